#include "sketchrec.h"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <new>
#include <string>

#include "sketchrec/card_estimators.hpp"
#include "sketchrec/datagen.hpp"
#include "sketchrec/error.hpp"
#include "sketchrec/eval.hpp"
#include "sketchrec/intervals.hpp"
#include "sketchrec/multiview.hpp"
#include "sketchrec/param_fit.hpp"

struct skr_sketch {
  skr::MultiSketch ms;
};
struct skr_dist {
  skr::FreqDistribution d;
};
struct skr_conformal {
  skr::ConformalAdjuster adj;
};

namespace {

thread_local std::string g_last_error;

template <class F>
skr_status guarded(F&& f) {
  try {
    f();
    g_last_error.clear();
    return SKR_OK;
  } catch (const skr::Error& e) {
    g_last_error = e.what();
    return static_cast<skr_status>(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return SKR_E_TOO_LARGE;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SKR_E_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) skr::fail(skr::Errc::invalid_argument, what);
}

skr::SmoothingParams to_cpp(const skr_params& p) {
  skr::SmoothingParams s = p.kind == SKR_KIND_DP ? skr::SmoothingParams::dp(p.theta)
                                                 : skr::SmoothingParams::nggp(p.theta, p.alpha, p.tau);
  s.validate();
  return s;
}

skr_params to_c(const skr::SmoothingParams& s) {
  return {s.kind == skr::Kind::DP ? SKR_KIND_DP : SKR_KIND_NGGP, s.theta, s.alpha, s.tau};
}

skr::FitResult to_cpp(const skr_fit& f) {
  skr::FitResult r;
  r.params = to_cpp(f.params);
  r.objective = f.objective;
  r.iterations = f.iterations;
  r.converged = f.converged != 0;
  r.seed = f.seed;
  r.method = std::string(f.method, strnlen(f.method, sizeof f.method));
  return r;
}

void to_c(const skr::FitResult& r, skr_fit* out) {
  out->params = to_c(r.params);
  out->objective = r.objective;
  out->iterations = r.iterations;
  out->converged = r.converged ? 1 : 0;
  out->seed = r.seed;
  std::memset(out->method, 0, sizeof out->method);
  std::strncpy(out->method, r.method.c_str(), sizeof out->method - 1);
}

const skr::Sketch& row_of(const skr_sketch* s, uint32_t row) {
  require(s != nullptr, "sketch is null");
  if (row >= s->ms.rows()) skr::fail(skr::Errc::invalid_argument, "row index out of range");
  return s->ms.row(row);
}

void copy_stream(const skr::Stream& st, uint64_t* out) {
  std::copy(st.symbols.begin(), st.symbols.end(), out);
}

}  // namespace

extern "C" {

const char* skr_last_error(void) { return g_last_error.c_str(); }

const char* skr_status_name(skr_status status) {
  switch (status) {
    case SKR_OK: return "ok";
    case SKR_E_INVALID_ARGUMENT: return "invalid-argument";
    case SKR_E_INCOMPATIBLE: return "incompatible";
    case SKR_E_OVERFLOW: return "overflow";
    case SKR_E_DOMAIN: return "domain";
    case SKR_E_NUMERIC: return "numeric";
    case SKR_E_NON_IDENTIFIABLE: return "non-identifiable";
    case SKR_E_IO: return "io";
    case SKR_E_TOO_LARGE: return "too-large";
    case SKR_E_DEGENERATE: return "degenerate";
    case SKR_E_PRECONDITION: return "precondition";
    case SKR_E_INTERNAL: return "internal";
  }
  return "unknown";
}

uint64_t skr_key64_u64(uint64_t x) { return skr::key64(x); }

uint64_t skr_key64_str(const char* data, size_t len) {
  return skr::key64(std::string_view(data ? data : "", data ? len : 0));
}

skr_status skr_sketch_create(uint32_t m, uint32_t j, uint64_t seed, skr_sketch** out) {
  return guarded([&] {
    require(out != nullptr, "out is null");
    *out = new skr_sketch{skr::MultiSketch::create(m, j, seed)};
  });
}

void skr_sketch_free(skr_sketch* sketch) { delete sketch; }

skr_status skr_sketch_add(skr_sketch* sketch, uint64_t key, uint64_t weight) {
  return guarded([&] {
    require(sketch != nullptr, "sketch is null");
    sketch->ms.update(key, weight);
  });
}

skr_status skr_sketch_merge(skr_sketch* dst, const skr_sketch* src) {
  return guarded([&] {
    require(dst && src, "sketch is null");
    dst->ms.merge(src->ms);
  });
}

skr_status skr_sketch_save(const skr_sketch* sketch, const char* path) {
  return guarded([&] {
    require(sketch && path, "null argument");
    sketch->ms.save(std::string(path));
  });
}

skr_status skr_sketch_load(const char* path, skr_sketch** out) {
  return guarded([&] {
    require(path && out, "null argument");
    *out = new skr_sketch{skr::MultiSketch::load(std::string(path))};
  });
}

skr_status skr_sketch_export_csv(const skr_sketch* sketch, const char* path) {
  return guarded([&] {
    require(sketch && path, "null argument");
    std::ofstream f(path);
    if (!f) skr::fail(skr::Errc::io, std::string("cannot write ") + path);
    sketch->ms.export_csv(f);
  });
}

skr_status skr_sketch_info(const skr_sketch* sketch, uint32_t* m, uint32_t* j, uint64_t* n) {
  return guarded([&] {
    require(sketch != nullptr, "sketch is null");
    if (m) *m = sketch->ms.rows();
    if (j) *j = sketch->ms.width();
    if (n) *n = sketch->ms.n();
  });
}

skr_status skr_sketch_row_seeds(const skr_sketch* sketch, uint32_t row, uint64_t* a, uint64_t* b) {
  return guarded([&] {
    const auto& h = row_of(sketch, row).hash();
    if (a) *a = h.seed_a;
    if (b) *b = h.seed_b;
  });
}

skr_status skr_sketch_counts(const skr_sketch* sketch, uint32_t row, uint64_t* out, size_t len) {
  return guarded([&] {
    auto c = row_of(sketch, row).counts();
    require(out != nullptr && len >= c.size(), "output buffer too small");
    std::copy(c.begin(), c.end(), out);
  });
}

skr_status skr_sketch_query(const skr_sketch* sketch, uint64_t key, uint64_t* out, size_t len) {
  return guarded([&] {
    require(sketch != nullptr, "sketch is null");
    require(out != nullptr && len >= sketch->ms.rows(), "output buffer too small");
    auto q = sketch->ms.query(key);
    std::copy(q.begin(), q.end(), out);
  });
}

skr_status skr_fit_dp(const skr_sketch* sketch, uint32_t row, skr_fit* out) {
  return guarded([&] {
    require(out != nullptr, "out is null");
    to_c(skr::fit_dp(row_of(sketch, row)), out);
  });
}

skr_status skr_fit_nggp_prefix(const uint64_t* symbols, size_t m, double tau, skr_fit* out) {
  return guarded([&] {
    require(out != nullptr && (symbols != nullptr || m == 0), "null argument");
    skr::PrefixFitConfig cfg;
    cfg.tau = tau;
    to_c(skr::fit_nggp_prefix(skr::PrefixSample::from_symbols({symbols, m}), cfg), out);
  });
}

skr_status skr_fit_nggp_minwass(const skr_sketch* sketch, uint32_t row, uint64_t m, uint32_t num_mc, uint64_t seed,
                                double tau, skr_fit* out) {
  return guarded([&] {
    require(out != nullptr, "out is null");
    skr::MinWassConfig cfg;
    cfg.num_mc = num_mc;
    cfg.seed = seed;
    cfg.tau = tau;
    to_c(skr::fit_nggp_minwass(row_of(sketch, row), m, cfg), out);
  });
}

skr_status skr_fit_to_json(const skr_fit* fit, char* buf, size_t cap, size_t* needed) {
  return guarded([&] {
    require(fit != nullptr, "fit is null");
    const std::string s = skr::fit_result_to_json(to_cpp(*fit));
    if (needed) *needed = s.size() + 1;
    if (buf && cap >= s.size() + 1) std::memcpy(buf, s.c_str(), s.size() + 1);
    else if (buf) skr::fail(skr::Errc::invalid_argument, "output buffer too small");
  });
}

skr_status skr_fit_from_json(const char* json, skr_fit* out) {
  return guarded([&] {
    require(json && out, "null argument");
    to_c(skr::fit_result_from_json(json), out);
  });
}

skr_status skr_estimate_freq(const skr_sketch* sketch, uint64_t key, const skr_params* params, size_t nparams,
                             skr_rule rule, uint64_t mc_samples, uint64_t mc_seed, double* point, skr_dist** dist) {
  return guarded([&] {
    require(sketch && point, "null argument");
    require(rule == SKR_RULE_POE || rule == SKR_RULE_MIN || rule == SKR_RULE_CMS, "unknown rule");
    std::vector<skr::SmoothingParams> ps;
    if (rule != SKR_RULE_CMS) {
      require(params != nullptr && nparams >= 1, "smoothing parameters required");
      for (size_t i = 0; i < nparams; ++i) ps.push_back(to_cpp(params[i]));
    }
    const skr::Rule r = rule == SKR_RULE_POE ? skr::Rule::PoE : rule == SKR_RULE_MIN ? skr::Rule::Min : skr::Rule::CMS;
    auto est = skr::estimate_freq_multiview(sketch->ms, key, ps, r, {mc_samples, mc_seed});
    *point = est.point;
    if (dist) *dist = est.dist ? new skr_dist{std::move(*est.dist)} : nullptr;
  });
}

skr_status skr_estimate_card(const skr_sketch* sketch, uint32_t row, const skr_params* params, uint64_t mc_samples,
                             uint64_t mc_seed, double* value, double* stderr_out) {
  return guarded([&] {
    require(params && value, "null argument");
    const auto& s = row_of(sketch, row);
    const auto p = to_cpp(*params);
    auto ce = p.kind == skr::Kind::DP ? skr::estimate_card_dp(s, p.theta)
                                      : skr::estimate_card_nggp(s, p, {mc_samples, mc_seed});
    *value = ce.value;
    if (stderr_out) *stderr_out = ce.mc_stderr;
  });
}

void skr_dist_free(skr_dist* dist) { delete dist; }

uint64_t skr_dist_support_max(const skr_dist* dist) { return dist ? dist->d.support_max() : 0; }

skr_status skr_dist_pmf(const skr_dist* dist, double* out, size_t len) {
  return guarded([&] {
    require(dist != nullptr, "dist is null");
    auto m = dist->d.masses();
    require(out != nullptr && len >= m.size(), "output buffer too small");
    std::copy(m.begin(), m.end(), out);
  });
}

double skr_dist_mean(const skr_dist* dist) { return dist ? dist->d.mean() : 0.0; }

uint64_t skr_dist_quantile(const skr_dist* dist, double p) { return dist ? dist->d.quantile(p) : 0; }

skr_status skr_smoothed_interval(const skr_dist* dist, double level, uint64_t* lo, uint64_t* hi) {
  return guarded([&] {
    require(dist && lo && hi, "null argument");
    auto iv = skr::smoothed_interval(dist->d, level);
    *lo = iv.lo;
    *hi = iv.hi;
  });
}

skr_status skr_conformal_calibrate(const double* estimates, const uint64_t* truth, size_t m, double level,
                                   skr_conformal** out) {
  return guarded([&] {
    require(out != nullptr && ((estimates && truth) || m == 0), "null argument");
    *out = new skr_conformal{skr::conformal_calibrate({estimates, m}, {truth, m}, level)};
  });
}

void skr_conformal_free(skr_conformal* adj) { delete adj; }

skr_status skr_conformal_quantiles(const skr_conformal* adj, double* q_lo, double* q_hi) {
  return guarded([&] {
    require(adj != nullptr, "adjuster is null");
    if (q_lo) *q_lo = adj->adj.q_lo;
    if (q_hi) *q_hi = adj->adj.q_hi;
  });
}

skr_status skr_conformal_interval(const skr_conformal* adj, double point, uint64_t cap, uint64_t* lo, uint64_t* hi) {
  return guarded([&] {
    require(adj && lo && hi, "null argument");
    auto iv = skr::conformal_interval(adj->adj, point, cap);
    *lo = iv.lo;
    *hi = iv.hi;
  });
}

skr_status skr_simulate_pyp(double gamma, double sigma, uint64_t n, uint64_t seed, uint64_t* out) {
  return guarded([&] {
    require(out != nullptr || n == 0, "out is null");
    skr::Rng rng(seed);
    copy_stream(skr::gen_pyp(rng, gamma, sigma, n), out);
  });
}

skr_status skr_simulate_zipf(double c, uint64_t vocab, uint64_t n, uint64_t seed, uint64_t* out) {
  return guarded([&] {
    require(out != nullptr || n == 0, "out is null");
    skr::Rng rng(seed);
    copy_stream(skr::gen_zipf(rng, c, vocab, n), out);
  });
}

skr_status skr_simulate_nggp(double theta, double alpha, double tau, uint64_t n, uint64_t seed, uint64_t* out) {
  return guarded([&] {
    require(out != nullptr || n == 0, "out is null");
    skr::Rng rng(seed);
    copy_stream(skr::gen_nggp(rng, theta, alpha, tau, n), out);
  });
}

skr_status skr_eval_run(const char* config_json, const char* out_dir, size_t* failed_reps) {
  return guarded([&] {
    require(config_json && out_dir, "null argument");
    const auto cfg = skr::ExperimentConfig::from_json(config_json);
    const auto report = skr::run_experiment(cfg);
    report.write_all(out_dir);
    std::ofstream f(std::filesystem::path(out_dir) / "config.json");
    if (!f) skr::fail(skr::Errc::io, "cannot write config.json");
    f << cfg.to_json() << '\n';
    if (failed_reps) *failed_reps = report.errors.size();
  });
}

}  // extern "C"

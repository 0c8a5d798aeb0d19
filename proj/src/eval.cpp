#include "sketchrec/eval.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <ostream>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "json.hpp"
#include "sketchrec/card_estimators.hpp"
#include "sketchrec/datagen.hpp"
#include "sketchrec/error.hpp"
#include "sketchrec/multiview.hpp"
#include "sketchrec/param_fit.hpp"

namespace skr {
namespace {

std::string num(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

struct RepOut {
  std::vector<MaeRow> mae;
  std::vector<CardRow> card;
  std::vector<FitRow> fits;
  std::string error;
};

class RepRunner {
 public:
  RepRunner(const ExperimentConfig& cfg, uint32_t rep, const ZipfSampler* zipf)
      : cfg_(cfg), rep_(rep), zipf_(zipf), seed_(derive_seed(cfg.seed, rep)), bins_(bins_from_edges(cfg.bin_edges)) {}

  RepOut run() {
    Rng gen(derive_seed(seed_, 0));
    const auto& g = cfg_.generator;
    Stream st;
    if (g.kind == "pyp")
      st = gen_pyp(gen, g.gamma, g.sigma, cfg_.n);
    else if (g.kind == "zipf")
      st = gen_zipf(gen, *zipf_, cfg_.n);
    else
      st = gen_nggp(gen, g.theta, g.alpha, g.tau, cfg_.n);

    MultiSketch ms = MultiSketch::create(cfg_.M, cfg_.J, derive_seed(seed_, 1));
    const uint64_t m = cfg_.prefix_m ? cfg_.prefix_m : std::max<uint64_t>(2, cfg_.n / 20);
    ReplayResult rr = replay(st.symbols, &ms, m);

    truth_ = std::move(st.truth.counts);
    const size_t K = truth_.size();
    counts_.resize(K * cfg_.M);
    for (size_t s = 0; s < K; ++s) {
      const uint64_t key = key64(static_cast<uint64_t>(s));
      for (uint32_t l = 0; l < cfg_.M; ++l) counts_[s * cfg_.M + l] = ms.row(l).query(key);
    }

    std::vector<double> est(K);
    for (size_t s = 0; s < K; ++s) {
      auto c = view(s);
      est[s] = static_cast<double>(*std::min_element(c.begin(), c.end()));
    }
    emit("cms", "cms", est);

    for (const auto& kind : cfg_.smoothing) {
      std::vector<SmoothingParams> params;
      if (kind == "dp") {
        for (uint32_t l = 0; l < cfg_.M; ++l) {
          FitResult f = fit_dp(ms.row(l));
          record_fit(l, "dp", f);
          params.push_back(f.params);
        }
      } else {
        if (cfg_.nggp_fit == "prefix") {
          FitResult f = fit_nggp_prefix(PrefixSample::from_symbols(rr.prefix));
          for (uint32_t l = 0; l < cfg_.M; ++l) {
            record_fit(l, "nggp", f);
            params.push_back(f.params);
          }
        } else {
          for (uint32_t l = 0; l < cfg_.M; ++l) {
            MinWassConfig wc;
            wc.num_mc = cfg_.wass_num_mc;
            wc.seed = derive_seed(seed_, 200 + l);
            FitResult f = fit_nggp_minwass(ms.row(l), m, wc);
            record_fit(l, "nggp", f);
            params.push_back(f.params);
          }
        }
      }
      estimate(kind, params);
      if (cfg_.cardinality) {
        CardinalityEstimate ce = kind == "dp"
                                     ? estimate_card_dp(ms.row(0), params[0].theta)
                                     : estimate_card_nggp(ms.row(0), params[0], {cfg_.mc_samples, derive_seed(seed_, 99)});
        out_.card.push_back({rep_, kind, static_cast<uint64_t>(K), ce.value});
      }
    }
    return std::move(out_);
  }

 private:
  std::span<const uint64_t> view(size_t s) const { return {counts_.data() + s * cfg_.M, cfg_.M}; }

  void emit(const std::string& estimator, const std::string& rule, const std::vector<double>& est) {
    auto table = mae_by_bin(truth_, est, bins_);
    for (size_t b = 0; b < bins_.size(); ++b)
      if (table[b]) out_.mae.push_back({rep_, estimator, rule, bins_[b].label(), table[b]->mae});
  }

  void record_fit(uint32_t l, const std::string& estimator, const FitResult& f) {
    out_.fits.push_back({rep_, l, estimator, f.method, f.params.theta, f.params.alpha, f.params.tau, f.objective});
  }

  void estimate(const std::string& kind, const std::vector<SmoothingParams>& params) {
    const size_t K = truth_.size();
    const uint32_t J = cfg_.J;
    std::vector<double> est(K);
    if (cfg_.M == 1) {
      std::unordered_map<uint64_t, double> cache;
      for (size_t s = 0; s < K; ++s) {
        const uint64_t c = view(s)[0];
        auto it = cache.find(c);
        if (it == cache.end()) it = cache.emplace(c, estimate_freq(c, params[0], J)).first;
        est[s] = it->second;
      }
      emit(kind, "single", est);
      return;
    }
    // Per-view expert caches keyed by bucket count.
    std::vector<std::unordered_map<uint64_t, FreqDistribution>> cache(cfg_.M);
    std::vector<std::vector<double>> draws(cfg_.M);
    if (kind != "dp")
      for (uint32_t l = 0; l < cfg_.M; ++l)
        draws[l] = draw_V(params[l], J, {cfg_.mc_samples, derive_seed(seed_, 100 + l)});
    auto expert = [&](uint32_t l, uint64_t c) -> const FreqDistribution& {
      auto it = cache[l].find(c);
      if (it == cache[l].end()) {
        FreqDistribution d = kind == "dp" ? pi_dp(c, params[l].theta, J) : binomial_mixture(c, draws[l]);
        it = cache[l].emplace(c, std::move(d)).first;
      }
      return it->second;
    };
    std::vector<double> thetas;
    for (const auto& p : params) thetas.push_back(p.theta);
    std::vector<FreqDistribution> experts(cfg_.M);
    for (const auto& rule : cfg_.rules) {
      for (size_t s = 0; s < K; ++s) {
        auto c = view(s);
        if (kind == "dp" && rule == "poe") {
          est[s] = dp_multihash_pmf(c, thetas, J).mean();
          continue;
        }
        for (uint32_t l = 0; l < cfg_.M; ++l) experts[l] = expert(l, c[l]);
        est[s] = (rule == "poe" ? aggregate_poe(experts) : aggregate_min(experts)).mean();
      }
      emit(kind, rule, est);
    }
  }

  const ExperimentConfig& cfg_;
  uint32_t rep_;
  const ZipfSampler* zipf_;
  uint64_t seed_;
  std::vector<Bin> bins_;
  std::vector<uint64_t> truth_;
  std::vector<uint64_t> counts_;
  RepOut out_;
};

}  // namespace

std::string Bin::label() const {
  return "(" + num(lo) + "," + num(hi) + (std::isinf(hi) ? ")" : "]");
}

std::vector<Bin> bins_from_edges(const std::vector<double>& edges) {
  if (edges.empty()) fail(Errc::invalid_argument, "at least one bin edge is required");
  for (size_t i = 1; i < edges.size(); ++i)
    if (!(edges[i] > edges[i - 1])) fail(Errc::invalid_argument, "bin edges must be strictly increasing");
  std::vector<Bin> bins;
  for (size_t i = 0; i + 1 < edges.size(); ++i) bins.push_back({edges[i], edges[i + 1]});
  bins.push_back({edges.back(), std::numeric_limits<double>::infinity()});
  return bins;
}

std::vector<double> parse_bin_edges(const std::string& text) {
  std::vector<double> edges;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      size_t pos = 0;
      edges.push_back(std::stod(tok, &pos));
      if (pos != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      fail(Errc::invalid_argument, "bad bin edge: " + tok);
    }
  }
  bins_from_edges(edges);
  return edges;
}

std::vector<std::optional<BinMae>> mae_by_bin(std::span<const uint64_t> truth, std::span<const double> estimates,
                                              const std::vector<Bin>& bins) {
  if (truth.size() != estimates.size()) fail(Errc::invalid_argument, "truth and estimates differ in length");
  std::vector<double> sum(bins.size(), 0.0);
  std::vector<uint64_t> cnt(bins.size(), 0);
  for (size_t s = 0; s < truth.size(); ++s) {
    if (truth[s] == 0) continue;
    const double f = static_cast<double>(truth[s]);
    for (size_t b = 0; b < bins.size(); ++b) {
      if (bins[b].contains(f)) {
        sum[b] += std::abs(f - estimates[s]);
        ++cnt[b];
        break;
      }
    }
  }
  std::vector<std::optional<BinMae>> out(bins.size());
  for (size_t b = 0; b < bins.size(); ++b)
    if (cnt[b] > 0) out[b] = BinMae{sum[b] / static_cast<double>(cnt[b]), cnt[b]};
  return out;
}

void ExperimentConfig::validate() const {
  if (n == 0) fail(Errc::invalid_argument, "n must be >= 1");
  if (J == 0 || M == 0) fail(Errc::invalid_argument, "M and J must be >= 1");
  if (repetitions == 0) fail(Errc::invalid_argument, "repetitions must be >= 1");
  if (generator.kind != "pyp" && generator.kind != "zipf" && generator.kind != "nggp")
    fail(Errc::invalid_argument, "generator kind must be pyp, zipf or nggp");
  for (const auto& s : smoothing)
    if (s != "dp" && s != "nggp") fail(Errc::invalid_argument, "smoothing must be dp or nggp");
  for (const auto& r : rules)
    if (r != "poe" && r != "min") fail(Errc::invalid_argument, "rules must be poe or min");
  if (nggp_fit != "prefix" && nggp_fit != "wass") fail(Errc::invalid_argument, "nggp_fit must be prefix or wass");
  if (mc_samples == 0 || wass_num_mc == 0) fail(Errc::invalid_argument, "Monte Carlo sizes must be >= 1");
  bins_from_edges(bin_edges);
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
  ExperimentConfig c;
  try {
    auto j = nlohmann::json::parse(text);
    if (j.contains("generator")) {
      const auto& g = j["generator"];
      c.generator.kind = g.value("kind", c.generator.kind);
      c.generator.gamma = g.value("gamma", c.generator.gamma);
      c.generator.sigma = g.value("sigma", c.generator.sigma);
      c.generator.zipf_c = g.value("c", c.generator.zipf_c);
      c.generator.vocab = g.value("vocab", c.generator.vocab);
      c.generator.theta = g.value("theta", c.generator.theta);
      c.generator.alpha = g.value("alpha", c.generator.alpha);
      c.generator.tau = g.value("tau", c.generator.tau);
    }
    c.n = j.value("n", c.n);
    c.J = j.value("J", c.J);
    c.M = j.value("M", c.M);
    c.smoothing = j.value("smoothing", c.smoothing);
    c.rules = j.value("rules", c.rules);
    c.nggp_fit = j.value("nggp_fit", c.nggp_fit);
    c.prefix_m = j.value("prefix_m", c.prefix_m);
    c.repetitions = j.value("repetitions", c.repetitions);
    c.seed = j.value("seed", c.seed);
    c.bin_edges = j.value("bins", c.bin_edges);
    c.mc_samples = j.value("mc_samples", c.mc_samples);
    c.wass_num_mc = j.value("wass_num_mc", c.wass_num_mc);
    c.cardinality = j.value("cardinality", c.cardinality);
    c.threads = j.value("threads", c.threads);
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::invalid_argument, std::string("invalid experiment config: ") + e.what());
  }
  c.validate();
  return c;
}

std::string ExperimentConfig::to_json() const {
  nlohmann::ordered_json j;
  j["generator"] = {{"kind", generator.kind}, {"gamma", generator.gamma}, {"sigma", generator.sigma},
                    {"c", generator.zipf_c},  {"vocab", generator.vocab}, {"theta", generator.theta},
                    {"alpha", generator.alpha}, {"tau", generator.tau}};
  j["n"] = n;
  j["J"] = J;
  j["M"] = M;
  j["smoothing"] = smoothing;
  j["rules"] = rules;
  j["nggp_fit"] = nggp_fit;
  j["prefix_m"] = prefix_m;
  j["repetitions"] = repetitions;
  j["seed"] = seed;
  j["bins"] = bin_edges;
  j["mc_samples"] = mc_samples;
  j["wass_num_mc"] = wass_num_mc;
  j["cardinality"] = cardinality;
  j["threads"] = threads;
  return j.dump(2);
}

void ExperimentReport::write_mae_csv(std::ostream& out) const {
  out << "rep,estimator,rule,bin,mae\n";
  for (const auto& r : mae) out << r.rep << ',' << r.estimator << ',' << r.rule << ",\"" << r.bin << "\"," << num(r.mae) << '\n';
}

void ExperimentReport::write_card_csv(std::ostream& out) const {
  out << "rep,estimator,k_true,k_hat\n";
  for (const auto& r : card) out << r.rep << ',' << r.estimator << ',' << r.k_true << ',' << num(r.k_hat) << '\n';
}

void ExperimentReport::write_fits_csv(std::ostream& out) const {
  out << "rep,view,estimator,method,theta,alpha,tau,objective\n";
  for (const auto& r : fits)
    out << r.rep << ',' << r.view << ',' << r.estimator << ',' << r.method << ',' << num(r.theta) << ','
        << num(r.alpha) << ',' << num(r.tau) << ',' << num(r.objective) << '\n';
}

void ExperimentReport::write_all(const std::string& dir) const {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream f(std::filesystem::path(dir) / name);
    if (!f) fail(Errc::io, "cannot write " + (std::filesystem::path(dir) / name).string());
    return f;
  };
  auto a = open("freq_mae.csv");
  write_mae_csv(a);
  auto b = open("cardinality.csv");
  write_card_csv(b);
  auto c = open("fits.csv");
  write_fits_csv(c);
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  std::unique_ptr<ZipfSampler> zipf;
  if (cfg.generator.kind == "zipf") zipf = std::make_unique<ZipfSampler>(cfg.generator.zipf_c, cfg.generator.vocab);

  std::vector<RepOut> outs(cfg.repetitions);
  std::atomic<uint32_t> next{0};
  auto worker = [&] {
    for (uint32_t rep; (rep = next.fetch_add(1)) < cfg.repetitions;) {
      try {
        outs[rep] = RepRunner(cfg, rep, zipf.get()).run();
      } catch (const std::exception& e) {
        outs[rep] = RepOut{};
        outs[rep].error = "rep " + std::to_string(rep) + ": " + e.what();
      }
    }
  };
  unsigned threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, cfg.repetitions);
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  ExperimentReport report;
  for (auto& o : outs) {
    report.mae.insert(report.mae.end(), o.mae.begin(), o.mae.end());
    report.card.insert(report.card.end(), o.card.begin(), o.card.end());
    report.fits.insert(report.fits.end(), o.fits.begin(), o.fits.end());
    if (!o.error.empty()) {
      std::cerr << "eval: " << o.error << '\n';
      report.errors.push_back(o.error);
    }
  }
  return report;
}

}  // namespace skr

// Command-line front end; talks to the library only through sketchrec.h.
#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sketchrec.h"

namespace {

constexpr int kExitOther = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;

struct Failure {
  int code;
  std::string msg;
};

[[noreturn]] void usage(const std::string& msg) { throw Failure{kExitUsage, msg}; }

void check(skr_status st) {
  if (st == SKR_OK) return;
  const std::string msg = std::string(skr_status_name(st)) + ": " + skr_last_error();
  switch (st) {
    case SKR_E_INVALID_ARGUMENT: throw Failure{kExitUsage, msg};
    case SKR_E_NUMERIC:
    case SKR_E_DOMAIN:
    case SKR_E_NON_IDENTIFIABLE:
    case SKR_E_DEGENERATE: throw Failure{kExitNumeric, msg};
    default: throw Failure{kExitOther, msg};
  }
}

struct SketchDeleter {
  void operator()(skr_sketch* s) const { skr_sketch_free(s); }
};
struct DistDeleter {
  void operator()(skr_dist* d) const { skr_dist_free(d); }
};
struct ConformalDeleter {
  void operator()(skr_conformal* c) const { skr_conformal_free(c); }
};
using SketchPtr = std::unique_ptr<skr_sketch, SketchDeleter>;
using DistPtr = std::unique_ptr<skr_dist, DistDeleter>;
using ConformalPtr = std::unique_ptr<skr_conformal, ConformalDeleter>;

SketchPtr load_sketch(const std::string& path) {
  skr_sketch* s = nullptr;
  check(skr_sketch_load(path.c_str(), &s));
  return SketchPtr(s);
}

// A token is a u64 when the whole line parses as one, otherwise a UTF-8 string.
uint64_t token_key(std::string_view tok) {
  uint64_t v = 0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec == std::errc() && p == tok.data() + tok.size() && !tok.empty()) return skr_key64_u64(v);
  return skr_key64_str(tok.data(), tok.size());
}

template <class F>
void for_each_token(const std::vector<std::string>& files, F&& f) {
  auto consume = [&](std::istream& in) {
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      f(token_key(line));
    }
  };
  if (files.empty()) {
    consume(std::cin);
    return;
  }
  for (const auto& path : files) {
    std::ifstream in(path);
    if (!in) throw Failure{kExitOther, "cannot open " + path};
    consume(in);
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Failure{kExitOther, "cannot open " + path};
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::ostream& open_out(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path);
  if (!file) throw Failure{kExitOther, "cannot write " + path};
  return file;
}

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

std::string fit_json(const skr_fit& fit) {
  size_t need = 0;
  check(skr_fit_to_json(&fit, nullptr, 0, &need));
  std::string s(need, '\0');
  check(skr_fit_to_json(&fit, s.data(), s.size(), &need));
  s.resize(need - 1);
  return s;
}

void write_fit(const skr_fit& fit, const std::string& out) {
  std::ofstream f;
  open_out(out, f) << fit_json(fit) << '\n';
}

// Per-view params: from --params-file (shared), or a DP fit of every row when smoothing is dp.
std::vector<skr_params> resolve_params(const skr_sketch* s, const std::string& smoothing, const std::string& file) {
  uint32_t M = 0;
  check(skr_sketch_info(s, &M, nullptr, nullptr));
  if (!file.empty()) {
    skr_fit fit{};
    check(skr_fit_from_json(read_file(file).c_str(), &fit));
    if ((smoothing == "dp") != (fit.params.kind == SKR_KIND_DP))
      usage("--params-file kind does not match --smoothing " + smoothing);
    return {fit.params};
  }
  if (smoothing != "dp") usage("--smoothing " + smoothing + " requires --params-file");
  std::vector<skr_params> out;
  for (uint32_t l = 0; l < M; ++l) {
    skr_fit fit{};
    check(skr_fit_dp(s, l, &fit));
    out.push_back(fit.params);
  }
  return out;
}

skr_rule parse_rule(const std::string& smoothing, const std::string& rule) {
  if (smoothing == "cms") return SKR_RULE_CMS;
  return rule == "min" ? SKR_RULE_MIN : SKR_RULE_POE;
}

struct Opts {
  uint32_t j = 128, m = 1;
  uint64_t seed = 1;
  std::string out, params_file, sketch, config, bins, smoothing = "dp", rule = "poe", calibration, calib_out;
  std::vector<std::string> inputs, keys;
  double level = 0.9, tau = 0.5;
  uint32_t row = 0, num_mc = 10;
  uint64_t prefix_m = 0, n = 0, mc_samples = 10000, calib_m = 0, vocab = 1000000;
  double gamma = 1.0, sigma = 0.75, zipf_c = 1.3, theta = 100.0, alpha = 0.5;
};

void cmd_sketch_build(const Opts& o) {
  skr_sketch* raw = nullptr;
  check(skr_sketch_create(o.m, o.j, o.seed, &raw));
  SketchPtr s(raw);
  std::vector<uint64_t> calib_keys;
  std::unordered_map<uint64_t, uint64_t> calib_counts;
  for_each_token(o.inputs, [&](uint64_t k) {
    check(skr_sketch_add(s.get(), k, 1));
    if (calib_keys.size() < o.calib_m && calib_counts.emplace(k, 0).second) calib_keys.push_back(k);
    if (auto it = calib_counts.find(k); it != calib_counts.end()) ++it->second;
  });
  check(skr_sketch_save(s.get(), o.out.c_str()));
  if (!o.calib_out.empty()) {
    std::ofstream f(o.calib_out);
    if (!f) throw Failure{kExitOther, "cannot write " + o.calib_out};
    f << "key_hash64,true_count\n";
    for (uint64_t k : calib_keys) f << k << ',' << calib_counts[k] << '\n';
  }
}

void cmd_sketch_merge(const Opts& o) {
  if (o.inputs.empty()) usage("merge needs at least one input sketch");
  SketchPtr acc = load_sketch(o.inputs[0]);
  for (size_t i = 1; i < o.inputs.size(); ++i) check(skr_sketch_merge(acc.get(), load_sketch(o.inputs[i]).get()));
  check(skr_sketch_save(acc.get(), o.out.c_str()));
}

void cmd_sketch_info(const Opts& o) {
  if (o.inputs.size() != 1) usage("info takes exactly one sketch file");
  SketchPtr s = load_sketch(o.inputs[0]);
  uint32_t M = 0, J = 0;
  uint64_t n = 0;
  check(skr_sketch_info(s.get(), &M, &J, &n));
  nlohmann::ordered_json j;
  j["M"] = M;
  j["J"] = J;
  j["n"] = n;
  j["rows"] = nlohmann::json::array();
  for (uint32_t l = 0; l < M; ++l) {
    uint64_t a = 0, b = 0;
    check(skr_sketch_row_seeds(s.get(), l, &a, &b));
    std::vector<uint64_t> c(J);
    check(skr_sketch_counts(s.get(), l, c.data(), c.size()));
    uint64_t nonzero = 0, mx = 0;
    for (uint64_t x : c) {
      nonzero += x > 0;
      mx = std::max(mx, x);
    }
    j["rows"].push_back({{"seed_a", a}, {"seed_b", b}, {"nonzero_buckets", nonzero}, {"max_count", mx}});
  }
  std::cout << j.dump(2) << '\n';
  if (!o.out.empty()) check(skr_sketch_export_csv(s.get(), o.out.c_str()));
}

void cmd_fit(const Opts& o, const std::string& method) {
  skr_fit fit{};
  if (method == "nggp-prefix") {
    std::vector<uint64_t> keys;
    for_each_token(o.inputs, [&](uint64_t k) {
      if (o.prefix_m == 0 || keys.size() < o.prefix_m) keys.push_back(k);
    });
    check(skr_fit_nggp_prefix(keys.data(), keys.size(), o.tau, &fit));
  } else {
    SketchPtr s = load_sketch(o.sketch);
    if (method == "dp") {
      check(skr_fit_dp(s.get(), o.row, &fit));
    } else {
      uint64_t n = 0;
      check(skr_sketch_info(s.get(), nullptr, nullptr, &n));
      const uint64_t m = o.prefix_m ? o.prefix_m : std::max<uint64_t>(1, n / 20);
      check(skr_fit_nggp_minwass(s.get(), o.row, m, o.num_mc, o.seed, o.tau, &fit));
    }
  }
  write_fit(fit, o.out);
}

void cmd_estimate_freq(const Opts& o) {
  if (o.keys.empty()) usage("--key is required");
  SketchPtr s = load_sketch(o.sketch);
  const skr_rule rule = parse_rule(o.smoothing, o.rule);
  std::vector<skr_params> ps;
  if (rule != SKR_RULE_CMS) ps = resolve_params(s.get(), o.smoothing, o.params_file);
  std::ofstream f;
  auto& out = open_out(o.out, f);
  out << "key,estimate\n";
  for (const auto& key : o.keys) {
    double point = 0.0;
    check(skr_estimate_freq(s.get(), token_key(key), ps.data(), ps.size(), rule, o.mc_samples, o.seed, &point,
                            nullptr));
    out << key << ',' << num(point) << '\n';
  }
}

void cmd_estimate_card(const Opts& o) {
  SketchPtr s = load_sketch(o.sketch);
  if (o.smoothing == "cms") usage("cardinality needs --smoothing dp or nggp");
  auto ps = resolve_params(s.get(), o.smoothing, o.params_file);
  const skr_params& p = ps.size() > o.row ? ps[o.row] : ps[0];
  double value = 0.0, se = 0.0;
  check(skr_estimate_card(s.get(), o.row, &p, o.mc_samples, o.seed, &value, &se));
  std::ofstream f;
  open_out(o.out, f) << "estimator,k_hat,mc_stderr\n" << o.smoothing << ',' << num(value) << ',' << num(se) << '\n';
}

void cmd_interval(const Opts& o) {
  if (o.keys.empty()) usage("--key is required");
  if (o.smoothing == "cms") usage("intervals need --smoothing dp or nggp");
  SketchPtr s = load_sketch(o.sketch);
  uint32_t M = 0;
  check(skr_sketch_info(s.get(), &M, nullptr, nullptr));
  const skr_rule rule = parse_rule(o.smoothing, o.rule);
  auto ps = resolve_params(s.get(), o.smoothing, o.params_file);
  auto point_of = [&](uint64_t key, DistPtr* dist) {
    double point = 0.0;
    skr_dist* d = nullptr;
    check(skr_estimate_freq(s.get(), key, ps.data(), ps.size(), rule, o.mc_samples, o.seed, &point,
                            dist ? &d : nullptr));
    if (dist) dist->reset(d);
    return point;
  };
  auto cms_cap = [&](uint64_t key) {
    std::vector<uint64_t> c(M);
    check(skr_sketch_query(s.get(), key, c.data(), c.size()));
    return *std::min_element(c.begin(), c.end());
  };

  ConformalPtr adj;
  if (!o.calibration.empty()) {
    std::vector<double> est;
    std::vector<uint64_t> truth;
    std::istringstream in(read_file(o.calibration));
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      uint64_t k = 0, t = 0;
      char comma = 0;
      std::istringstream ls(line);
      if (!(ls >> k >> comma >> t) || comma != ',') throw Failure{kExitOther, "malformed calibration row: " + line};
      est.push_back(point_of(k, nullptr));
      truth.push_back(t);
    }
    skr_conformal* raw = nullptr;
    check(skr_conformal_calibrate(est.data(), truth.data(), est.size(), o.level, &raw));
    adj.reset(raw);
  }

  std::ofstream f;
  auto& out = open_out(o.out, f);
  out << "key,estimate,lo,hi,method\n";
  for (const auto& key : o.keys) {
    const uint64_t k = token_key(key);
    DistPtr dist;
    const double point = point_of(k, &dist);
    uint64_t lo = 0, hi = 0;
    if (adj) {
      check(skr_conformal_interval(adj.get(), point, cms_cap(k), &lo, &hi));
    } else {
      if (!dist) throw Failure{kExitOther, "estimator produced no posterior distribution"};
      check(skr_smoothed_interval(dist.get(), o.level, &lo, &hi));
    }
    out << key << ',' << num(point) << ',' << lo << ',' << hi << ',' << (adj ? "conformal" : "smoothed") << '\n';
  }
}

void cmd_simulate(const Opts& o, const std::string& kind) {
  if (o.n == 0) usage("--n must be >= 1");
  std::vector<uint64_t> stream(o.n);
  if (kind == "pyp")
    check(skr_simulate_pyp(o.gamma, o.sigma, o.n, o.seed, stream.data()));
  else if (kind == "zipf")
    check(skr_simulate_zipf(o.zipf_c, o.vocab, o.n, o.seed, stream.data()));
  else
    check(skr_simulate_nggp(o.theta, o.alpha, o.tau, o.n, o.seed, stream.data()));
  std::ofstream f;
  auto& out = open_out(o.out, f);
  std::string buf;
  for (uint64_t x : stream) {
    buf += std::to_string(x);
    buf += '\n';
  }
  out << buf;
}

void cmd_eval_run(const Opts& o) {
  if (o.out.empty()) usage("--out directory is required");
  nlohmann::json cfg;
  try {
    cfg = nlohmann::json::parse(read_file(o.config));
  } catch (const nlohmann::json::exception& e) {
    usage(std::string("invalid config: ") + e.what());
  }
  if (!o.bins.empty()) {
    std::vector<double> edges;
    std::stringstream ss(o.bins);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      try {
        edges.push_back(std::stod(tok));
      } catch (const std::exception&) {
        usage("bad --bins entry: " + tok);
      }
    }
    cfg["bins"] = edges;
  }
  size_t failed = 0;
  check(skr_eval_run(cfg.dump().c_str(), o.out.c_str(), &failed));
  if (failed) std::cerr << failed << " repetition(s) failed; see messages above\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sketch-based frequency and cardinality recovery"};
  app.require_subcommand(1);
  Opts o;

  auto add_sketch = [&](CLI::App* c) { c->add_option("--sketch", o.sketch, "Sketch file")->required(); };
  auto add_smoothing = [&](CLI::App* c) {
    c->add_option("--smoothing", o.smoothing, "cms, dp or nggp")
        ->check(CLI::IsMember({"cms", "dp", "nggp"}))
        ->capture_default_str();
    c->add_option("--rule", o.rule, "Multi-view rule: poe or min")->check(CLI::IsMember({"poe", "min"}));
    c->add_option("--params-file", o.params_file, "Smoothing parameters JSON");
    c->add_option("--mc-samples", o.mc_samples, "Monte Carlo draws for NGGP")->capture_default_str();
    c->add_option("--seed", o.seed, "Monte Carlo seed")->capture_default_str();
    c->add_option("--out", o.out, "Output CSV (default stdout)");
  };

  auto* sketch = app.add_subcommand("sketch", "Build, merge and inspect sketches");
  sketch->require_subcommand(1);
  auto* build = sketch->add_subcommand("build", "Sketch newline-delimited token files (stdin if none)");
  build->add_option("--j", o.j, "Buckets per hash")->capture_default_str();
  build->add_option("--m-hashes", o.m, "Number of hash functions")->capture_default_str();
  build->add_option("--seed", o.seed, "Master hash seed")->capture_default_str();
  build->add_option("--out", o.out, "Output sketch file")->required();
  build->add_option("--calibration-m", o.calib_m, "Track exact counts of the first N distinct tokens");
  build->add_option("--calibration-out", o.calib_out, "Calibration CSV for those tokens");
  build->add_option("inputs", o.inputs, "Token files");
  auto* merge = sketch->add_subcommand("merge", "Add sketches built with the same seeds");
  merge->add_option("--out", o.out, "Output sketch file")->required();
  merge->add_option("inputs", o.inputs, "Sketch files")->required();
  auto* info = sketch->add_subcommand("info", "Print sketch header and summary");
  info->add_option("--out", o.out, "Also export counts as CSV (l,j,count)");
  info->add_option("inputs", o.inputs, "Sketch file")->required();

  auto* fit = app.add_subcommand("fit", "Fit smoothing parameters");
  fit->require_subcommand(1);
  auto* fit_dp = fit->add_subcommand("dp", "Sketch maximum likelihood for the DP");
  add_sketch(fit_dp);
  fit_dp->add_option("--row", o.row, "Sketch row")->capture_default_str();
  fit_dp->add_option("--out", o.out, "Output params JSON (default stdout)");
  auto* fit_prefix = fit->add_subcommand("nggp-prefix", "NGGP maximum likelihood on a stream prefix");
  fit_prefix->add_option("--prefix-m", o.prefix_m, "Prefix length (default: whole input)");
  fit_prefix->add_option("--tau", o.tau, "Fixed tau")->capture_default_str();
  fit_prefix->add_option("--out", o.out, "Output params JSON (default stdout)");
  fit_prefix->add_option("inputs", o.inputs, "Token files (stdin if none)");
  auto* fit_wass = fit->add_subcommand("nggp-wass", "NGGP minimum-Wasserstein fit to a sketch row");
  add_sketch(fit_wass);
  fit_wass->add_option("--row", o.row, "Sketch row")->capture_default_str();
  fit_wass->add_option("--prefix-m", o.prefix_m, "Synthetic stream size (default n/20)");
  fit_wass->add_option("--num-mc", o.num_mc, "Synthetic sketches per evaluation")->capture_default_str();
  fit_wass->add_option("--tau", o.tau, "Fixed tau")->capture_default_str();
  fit_wass->add_option("--seed", o.seed, "Simulation seed")->capture_default_str();
  fit_wass->add_option("--out", o.out, "Output params JSON (default stdout)");

  auto* estimate = app.add_subcommand("estimate", "Frequency and cardinality estimates");
  estimate->require_subcommand(1);
  auto* est_freq = estimate->add_subcommand("freq", "Estimate token frequencies");
  add_sketch(est_freq);
  est_freq->add_option("--key", o.keys, "Query token (repeatable)")->required();
  add_smoothing(est_freq);
  auto* est_card = estimate->add_subcommand("card", "Estimate the number of distinct tokens");
  add_sketch(est_card);
  est_card->add_option("--row", o.row, "Sketch row")->capture_default_str();
  add_smoothing(est_card);

  auto* interval = app.add_subcommand("interval", "Frequency intervals (smoothed, or conformal with --calibration)");
  add_sketch(interval);
  interval->add_option("--key", o.keys, "Query token (repeatable)")->required();
  interval->add_option("--level", o.level, "Nominal coverage")->capture_default_str();
  interval->add_option("--calibration", o.calibration, "CSV key_hash64,true_count");
  add_smoothing(interval);

  auto* simulate = app.add_subcommand("simulate", "Write a synthetic stream of u64 symbols");
  simulate->require_subcommand(1);
  auto add_sim = [&](CLI::App* c) {
    c->add_option("--n", o.n, "Stream length")->required();
    c->add_option("--seed", o.seed, "Seed")->capture_default_str();
    c->add_option("--out", o.out, "Output file (default stdout)");
  };
  auto* sim_pyp = simulate->add_subcommand("pyp", "Pitman-Yor urn");
  add_sim(sim_pyp);
  sim_pyp->add_option("--gamma", o.gamma, "Strength")->capture_default_str();
  sim_pyp->add_option("--sigma", o.sigma, "Discount")->capture_default_str();
  auto* sim_zipf = simulate->add_subcommand("zipf", "Truncated Zipf");
  add_sim(sim_zipf);
  sim_zipf->add_option("--c", o.zipf_c, "Exponent")->capture_default_str();
  sim_zipf->add_option("--vocab", o.vocab, "Support size")->capture_default_str();
  auto* sim_nggp = simulate->add_subcommand("nggp", "NGGP urn");
  add_sim(sim_nggp);
  sim_nggp->add_option("--theta", o.theta)->capture_default_str();
  sim_nggp->add_option("--alpha", o.alpha)->capture_default_str();
  sim_nggp->add_option("--tau", o.tau)->capture_default_str();

  auto* eval = app.add_subcommand("eval", "Experiment harness");
  eval->require_subcommand(1);
  auto* eval_run = eval->add_subcommand("run", "Run an experiment config and write CSV reports");
  eval_run->add_option("--config", o.config, "Experiment JSON")->required();
  eval_run->add_option("--out", o.out, "Output directory")->required();
  eval_run->add_option("--bins", o.bins, "Bin edges, e.g. 0,1,4,16,64,256");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (build->parsed()) cmd_sketch_build(o);
    else if (merge->parsed()) cmd_sketch_merge(o);
    else if (info->parsed()) cmd_sketch_info(o);
    else if (fit_dp->parsed()) cmd_fit(o, "dp");
    else if (fit_prefix->parsed()) cmd_fit(o, "nggp-prefix");
    else if (fit_wass->parsed()) cmd_fit(o, "nggp-wass");
    else if (est_freq->parsed()) cmd_estimate_freq(o);
    else if (est_card->parsed()) cmd_estimate_card(o);
    else if (interval->parsed()) cmd_interval(o);
    else if (sim_pyp->parsed()) cmd_simulate(o, "pyp");
    else if (sim_zipf->parsed()) cmd_simulate(o, "zipf");
    else if (sim_nggp->parsed()) cmd_simulate(o, "nggp");
    else if (eval_run->parsed()) cmd_eval_run(o);
  } catch (const Failure& f) {
    std::cerr << "error: " << f.msg << '\n';
    return f.code;
  }
  return 0;
}

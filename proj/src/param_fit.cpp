#include "sketchrec/param_fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "json.hpp"
#include "sketchrec/error.hpp"
#include "sketchrec/specfun.hpp"

namespace skr {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLogThetaLo = -10.0;
constexpr double kLogThetaHi = 20.0;
constexpr double kLogitLim = 10.0;

double log_tau_plus_exp(double w, double log_tau) {
  return w > log_tau ? w + std::log1p(std::exp(log_tau - w)) : log_tau + std::log1p(std::exp(w - log_tau));
}

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double logit(double p) { return std::log(p) - std::log1p(-p); }

// Point where h falls 'drop' below h(mode), searching in direction dir.
double drop_point(const UrnLatent& lat, double mode, double hmax, double sigma, double dir, double drop) {
  double step = sigma;
  for (int it = 0; it < 200; ++it) {
    const double x = mode + dir * step;
    if (lat.h(x) < hmax - drop) return x;
    step *= 2.0;
  }
  fail(Errc::numeric, "latent density does not decay");
}

class Ars {
 public:
  Ars(const UrnLatent& lat, std::initializer_list<double> xs) : lat_(lat) {
    for (double x : xs) pts_.push_back({x, lat.h(x), lat.dh(x)});
    ok_ = build();
  }

  bool sample(Rng& rng, double& out) {
    for (int tries = 0; ok_ && tries < 200; ++tries) {
      size_t seg = 0;
      const double u = uniform01(rng) * cum_.back();
      while (seg + 1 < cum_.size() && cum_[seg] < u) ++seg;
      const double x = draw_in(seg, uniform01(rng));
      if (!std::isfinite(x)) return false;
      const Pt& p = pts_[seg];
      const double upper = p.h + p.d * (x - p.x);
      const double hx = lat_.h(x);
      if (std::log(uniform01(rng)) <= hx - upper) {
        out = x;
        return true;
      }
      if (pts_.size() < 40) {
        Pt np{x, hx, lat_.dh(x)};
        pts_.insert(std::upper_bound(pts_.begin(), pts_.end(), np, [](const Pt& a, const Pt& b) { return a.x < b.x; }),
                    np);
        ok_ = build();
      }
    }
    return false;
  }

 private:
  struct Pt {
    double x, h, d;
  };

  double lo(size_t i) const { return i == 0 ? -kInf : z_[i - 1]; }
  double hi(size_t i) const { return i + 1 == pts_.size() ? kInf : z_[i]; }

  bool build() {
    const size_t k = pts_.size();
    if (k < 2 || !(pts_.front().d > 0.0) || !(pts_.back().d < 0.0)) return false;
    z_.assign(k - 1, 0.0);
    for (size_t i = 0; i + 1 < k; ++i) {
      const Pt &a = pts_[i], &b = pts_[i + 1];
      const double dd = a.d - b.d;
      z_[i] = dd > 1e-12 * (std::abs(a.d) + std::abs(b.d)) ? (b.h - a.h - b.x * b.d + a.x * a.d) / dd
                                                            : 0.5 * (a.x + b.x);
      z_[i] = std::clamp(z_[i], a.x, b.x);
    }
    std::vector<double> lm(k);
    for (size_t i = 0; i < k; ++i) {
      const Pt& p = pts_[i];
      const double l = lo(i), h = hi(i), span = h - l;
      if (p.d > 0.0)
        lm[i] = p.h + p.d * (h - p.x) + (std::isfinite(span) ? std::log(-std::expm1(-p.d * span)) : 0.0) -
                std::log(p.d);
      else if (p.d < 0.0)
        lm[i] = p.h + p.d * (l - p.x) + (std::isfinite(span) ? std::log(-std::expm1(p.d * span)) : 0.0) -
                std::log(-p.d);
      else
        lm[i] = p.h + std::log(span);
      if (std::isnan(lm[i])) return false;
    }
    const double mx = *std::max_element(lm.begin(), lm.end());
    if (!std::isfinite(mx)) return false;
    cum_.assign(k, 0.0);
    double acc = 0.0;
    for (size_t i = 0; i < k; ++i) cum_[i] = acc += std::exp(lm[i] - mx);
    return true;
  }

  // Inverse CDF of exp(d x) restricted to segment i.
  double draw_in(size_t i, double u) const {
    const Pt& p = pts_[i];
    const double l = lo(i), h = hi(i);
    if (p.d == 0.0) return l + u * (h - l);
    if (p.d > 0.0) {
      if (!std::isfinite(l)) return h + std::log(u) / p.d;
      return h + std::log1p((1.0 - u) * std::expm1(-p.d * (h - l))) / p.d;
    }
    if (!std::isfinite(h)) return l + std::log(u) / p.d;
    return l + std::log1p((1.0 - u) * std::expm1(p.d * (h - l))) / p.d;
  }

  const UrnLatent& lat_;
  std::vector<Pt> pts_;
  std::vector<double> z_;
  std::vector<double> cum_;
  bool ok_ = false;
};

}  // namespace

std::string fit_result_to_json(const FitResult& fit) {
  nlohmann::ordered_json j;
  j["kind"] = fit.params.kind == Kind::DP ? "DP" : "NGGP";
  j["theta"] = fit.params.theta;
  j["alpha"] = fit.params.alpha;
  j["tau"] = fit.params.tau;
  j["objective"] = fit.objective;
  j["method"] = fit.method;
  j["seed"] = fit.seed;
  return j.dump(2);
}

FitResult fit_result_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    fail(Errc::invalid_argument, std::string("invalid params JSON: ") + e.what());
  }
  FitResult fit;
  try {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "DP" || kind == "dp") {
      fit.params = SmoothingParams::dp(j.at("theta").get<double>());
    } else if (kind == "NGGP" || kind == "nggp") {
      fit.params = SmoothingParams::nggp(j.at("theta").get<double>(), j.value("alpha", 0.0), j.value("tau", 0.5));
    } else {
      fail(Errc::invalid_argument, "unknown params kind: " + kind);
    }
    fit.objective = j.value("objective", 0.0);
    fit.method = j.value("method", std::string("fixed"));
    fit.seed = j.value("seed", uint64_t{0});
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::invalid_argument, std::string("invalid params JSON: ") + e.what());
  }
  fit.params.provenance = fit.method;
  fit.converged = true;
  return fit;
}

PrefixSample PrefixSample::from_symbols(std::span<const uint64_t> symbols) {
  PrefixSample p;
  std::map<uint64_t, uint64_t> idx;
  for (uint64_t s : symbols) {
    auto [it, inserted] = idx.try_emplace(s, p.counts.size());
    if (inserted) p.counts.push_back(0);
    ++p.counts[it->second];
  }
  p.m = symbols.size();
  return p;
}

double dp_loglik_sketch(double theta, std::span<const uint64_t> counts) {
  if (!(theta > 0.0)) fail(Errc::domain, "theta must be positive");
  const double a = theta / static_cast<double>(counts.size());
  double n = 0.0, ll = 0.0;
  for (uint64_t c : counts) {
    if (c == 0) continue;
    n += static_cast<double>(c);
    ll += log_gamma(a + static_cast<double>(c)) - log_gamma(a);
  }
  return ll + log_gamma(theta) - log_gamma(theta + n);
}

double dp_loglik_grad(double theta, std::span<const uint64_t> counts) {
  if (!(theta > 0.0)) fail(Errc::domain, "theta must be positive");
  const double J = static_cast<double>(counts.size());
  const double a = theta / J;
  double n = 0.0, g = 0.0;
  for (uint64_t c : counts) {
    if (c == 0) continue;
    n += static_cast<double>(c);
    g += digamma(a + static_cast<double>(c)) - digamma(a);
  }
  return g / J + digamma(theta) - digamma(theta + n);
}

FitResult fit_dp(std::span<const uint64_t> counts) {
  if (counts.size() == 1) fail(Errc::non_identifiable, "DP likelihood is flat in theta when J = 1");
  if (counts.empty()) fail(Errc::invalid_argument, "empty sketch");
  uint64_t n = 0;
  for (uint64_t c : counts) n += c;
  if (n == 0) fail(Errc::invalid_argument, "fit_dp requires n >= 1");

  auto f = [&](double t) { return dp_loglik_sketch(std::exp(t), counts); };
  constexpr int kGrid = 61;
  const double step = (kLogThetaHi - kLogThetaLo) / (kGrid - 1);
  int best = 0;
  double fbest = f(kLogThetaLo);
  for (int g = 1; g < kGrid; ++g) {
    const double v = f(kLogThetaLo + g * step);
    if (v > fbest) {
      fbest = v;
      best = g;
    }
  }
  double a = kLogThetaLo + std::max(0, best - 1) * step;
  double b = kLogThetaLo + std::min(kGrid - 1, best + 1) * step;
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - gr * (b - a), d = a + gr * (b - a);
  double fc = f(c), fd = f(d);
  int iters = kGrid;
  while (b - a > 1e-10 && iters < 500) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = f(d);
    }
    ++iters;
  }
  double t = 0.5 * (a + b);
  double ft = f(t);
  // Golden section may settle on a bracket end; keep the better of interior point and grid edges.
  for (double edge : {kLogThetaLo, kLogThetaHi}) {
    if (f(edge) > ft) {
      t = edge;
      ft = f(edge);
    }
  }
  FitResult fit;
  fit.params = SmoothingParams::dp(std::exp(t));
  fit.params.provenance = "fitted(dp-mle)";
  fit.objective = ft;
  fit.method = "dp-mle";
  fit.iterations = iters;
  fit.converged = t > kLogThetaLo + 1e-6 && t < kLogThetaHi - 1e-6;
  return fit;
}

FitResult fit_dp(const Sketch& sketch) { return fit_dp(sketch.counts()); }

double UrnLatent::h(double w) const {
  const double lt = std::log(tau);
  const double L = log_tau_plus_exp(w, lt);
  const double gm = std::pow(tau, alpha) * std::expm1(alpha * (L - lt));
  return i * w - (i - alpha * k) * L - theta / alpha * gm;
}

double UrnLatent::dh(double w) const {
  const double lt = std::log(tau);
  const double s = logistic(w - lt);
  const double G = std::exp(alpha * log_tau_plus_exp(w, lt));
  return i - (i - alpha * k) * s - theta * G * s;
}

double UrnLatent::d2h(double w) const {
  const double lt = std::log(tau);
  const double s = logistic(w - lt);
  const double G = std::exp(alpha * log_tau_plus_exp(w, lt));
  return -(i - alpha * k) * s * (1.0 - s) - theta * G * s * (alpha * s + 1.0 - s);
}

double UrnLatent::mode(double hint) const {
  if (!std::isfinite(hint)) hint = 0.0;
  double a = hint, b = hint;
  double step = 1.0;
  if (dh(hint) > 0.0) {
    for (int it = 0; dh(b) > 0.0; ++it) {
      if (it > 200) fail(Errc::numeric, "latent mode search diverged");
      a = b;
      b += step;
      step *= 2.0;
    }
  } else {
    for (int it = 0; dh(a) <= 0.0; ++it) {
      if (it > 200) fail(Errc::numeric, "latent mode search diverged");
      b = a;
      a -= step;
      step *= 2.0;
    }
  }
  // Safeguarded Newton on dh, which is strictly decreasing.
  double x = 0.5 * (a + b);
  for (int it = 0; it < 100; ++it) {
    const double g = dh(x);
    if (g > 0.0)
      a = x;
    else
      b = x;
    const double g2 = d2h(x);
    double nx = g2 < 0.0 ? x - g / g2 : 0.5 * (a + b);
    if (!(nx > a && nx < b)) nx = 0.5 * (a + b);
    if (std::abs(nx - x) < 1e-12 * (1.0 + std::abs(x)) || b - a < 1e-12 * (1.0 + std::abs(x))) return nx;
    x = nx;
  }
  return x;
}

double sample_grid_inverse_cdf(Rng& rng, const UrnLatent& lat, double mode) {
  constexpr int kPoints = 2048;
  const double hmax = lat.h(mode);
  const double curv = lat.d2h(mode);
  const double sigma = curv < 0.0 ? 1.0 / std::sqrt(-curv) : 1.0;
  const double lo = drop_point(lat, mode, hmax, sigma, -1.0, 40.0);
  const double hi = drop_point(lat, mode, hmax, sigma, 1.0, 40.0);
  const double dx = (hi - lo) / kPoints;
  std::vector<double> cum(kPoints);
  double acc = 0.0;
  for (int g = 0; g < kPoints; ++g) cum[g] = acc += std::exp(lat.h(lo + (g + 0.5) * dx) - hmax);
  const double u = uniform01(rng) * acc;
  const auto cell = static_cast<int>(std::lower_bound(cum.begin(), cum.end(), u) - cum.begin());
  return lo + (std::min(cell, kPoints - 1) + uniform01(rng)) * dx;
}

double sample_urn_latent(Rng& rng, const UrnLatent& lat, double* mode_hint) {
  const double mode = lat.mode(mode_hint ? *mode_hint : 0.0);
  if (mode_hint) *mode_hint = mode;
  const double curv = lat.d2h(mode);
  if (curv < 0.0 && std::isfinite(curv)) {
    const double sigma = 1.0 / std::sqrt(-curv);
    Ars ars(lat, {mode - 1.5 * sigma, mode, mode + 1.5 * sigma});
    double x;
    if (ars.sample(rng, x)) return x;
  }
  return sample_grid_inverse_cdf(rng, lat, mode);
}

PrefixSample nggp_urn_sample(Rng& rng, double theta, double alpha, double tau, uint64_t m,
                             std::vector<uint64_t>* stream) {
  if (!(alpha > 0.0 && alpha < 1.0)) fail(Errc::domain, "urn requires alpha in (0, 1)");
  if (!(theta > 0.0) || !(tau > 0.0)) fail(Errc::domain, "urn requires theta, tau > 0");
  if (m == 0) fail(Errc::invalid_argument, "urn requires m >= 1");
  PrefixSample out;
  out.m = m;
  out.counts.push_back(1);
  if (stream) {
    stream->clear();
    stream->reserve(m);
    stream->push_back(0);
  }
  std::vector<uint64_t> repeats;
  const double lt = std::log(tau);
  double hint = 0.0;
  for (uint64_t i = 1; i < m; ++i) {
    const double id = static_cast<double>(i);
    const double k = static_cast<double>(out.counts.size());
    const UrnLatent lat{theta, alpha, tau, id, k};
    const double w = sample_urn_latent(rng, lat, &hint);
    const double w_new = theta * std::exp(alpha * log_tau_plus_exp(w, lt));
    const double w_old = id - alpha * k;
    const double u = uniform01(rng) * (w_new + w_old);
    uint64_t s;
    if (u < w_new) {
      s = out.counts.size();
      out.counts.push_back(0);
    } else {
      // n_h - alpha = (n_h - 1) + (1 - alpha).
      if (u - w_new < id - k && !repeats.empty())
        s = repeats[std::min<uint64_t>(repeats.size() - 1, static_cast<uint64_t>(uniform01(rng) * repeats.size()))];
      else
        s = std::min<uint64_t>(out.counts.size() - 1, static_cast<uint64_t>(uniform01(rng) * k));
      repeats.push_back(s);
    }
    ++out.counts[s];
    if (stream) stream->push_back(s);
  }
  return out;
}

double nggp_loglik_prefix(double theta, double alpha, double tau, const PrefixSample& prefix) {
  if (!(theta > 0.0) || !(alpha > 0.0 && alpha < 1.0) || !(tau > 0.0))
    fail(Errc::domain, "prefix likelihood requires theta > 0, alpha in (0, 1), tau > 0");
  if (prefix.m == 0 || prefix.counts.empty()) fail(Errc::invalid_argument, "empty prefix");
  const double m = static_cast<double>(prefix.m);
  const double k = static_cast<double>(prefix.k());
  std::map<uint64_t, uint64_t> fof;
  for (uint64_t c : prefix.counts) ++fof[c];
  double ll = k * std::log(theta) - log_gamma(m);
  const double base = log_gamma(1.0 - alpha);
  for (auto [c, mult] : fof) ll += static_cast<double>(mult) * (log_gamma(static_cast<double>(c) - alpha) - base);

  const UrnLatent lat{theta, alpha, tau, m, k};
  const double mode = lat.mode(0.0);
  const double hmax = lat.h(mode);
  const double sigma = 1.0 / std::sqrt(-lat.d2h(mode));
  const double lo = drop_point(lat, mode, hmax, sigma, -1.0, 45.0);
  const double hi = drop_point(lat, mode, hmax, sigma, 1.0, 45.0);
  QuadratureConfig cfg;
  cfg.abs_tol = 1e-12 * sigma;
  cfg.rel_tol = 1e-10;
  cfg.max_subdivisions = 500;
  const double I = integrate([&](double w) { return std::exp(lat.h(w) - hmax); }, lo, hi, cfg);
  return ll + hmax + std::log(I);
}

NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x0,
                             const std::vector<double>& step, double xtol, int max_iter) {
  const size_t d = x0.size();
  std::vector<std::vector<double>> simplex(d + 1, x0);
  for (size_t i = 0; i < d; ++i) simplex[i + 1][i] += step[i];
  std::vector<double> fv(d + 1);
  for (size_t i = 0; i <= d; ++i) fv[i] = f(simplex[i]);
  std::vector<size_t> order(d + 1);
  NelderMeadResult res;
  int it = 0;
  auto affine = [&](const std::vector<double>& a, const std::vector<double>& b, double t) {
    std::vector<double> out(d);
    for (size_t i = 0; i < d; ++i) out[i] = a[i] + t * (b[i] - a[i]);
    return out;
  };
  for (; it < max_iter; ++it) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return fv[a] < fv[b]; });
    const size_t best = order.front(), worst = order.back(), second = order[d - 1];
    double diam = 0.0;
    for (size_t i = 0; i <= d; ++i)
      for (size_t c = 0; c < d; ++c) diam = std::max(diam, std::abs(simplex[i][c] - simplex[best][c]));
    if (diam < xtol) {
      res.converged = true;
      break;
    }
    std::vector<double> centroid(d, 0.0);
    for (size_t i = 0; i <= d; ++i)
      if (i != worst)
        for (size_t c = 0; c < d; ++c) centroid[c] += simplex[i][c] / static_cast<double>(d);
    auto xr = affine(centroid, simplex[worst], -1.0);
    const double fr = f(xr);
    if (fr < fv[best]) {
      auto xe = affine(centroid, simplex[worst], -2.0);
      const double fe = f(xe);
      if (fe < fr) {
        simplex[worst] = xe;
        fv[worst] = fe;
      } else {
        simplex[worst] = xr;
        fv[worst] = fr;
      }
      continue;
    }
    if (fr < fv[second]) {
      simplex[worst] = xr;
      fv[worst] = fr;
      continue;
    }
    const bool outside = fr < fv[worst];
    auto xc = outside ? affine(centroid, xr, 0.5) : affine(centroid, simplex[worst], 0.5);
    const double fc = f(xc);
    if (fc < (outside ? fr : fv[worst])) {
      simplex[worst] = xc;
      fv[worst] = fc;
      continue;
    }
    for (size_t i = 0; i <= d; ++i) {
      if (i == best) continue;
      simplex[i] = affine(simplex[best], simplex[i], 0.5);
      fv[i] = f(simplex[i]);
    }
  }
  const size_t best = static_cast<size_t>(std::min_element(fv.begin(), fv.end()) - fv.begin());
  res.x = simplex[best];
  res.f = fv[best];
  res.iterations = it;
  return res;
}

FitResult fit_nggp_prefix(const PrefixSample& prefix, const PrefixFitConfig& cfg) {
  if (prefix.m < 2) fail(Errc::invalid_argument, "prefix fit requires m >= 2");
  auto objective = [&](const std::vector<double>& x) {
    if (x[0] < kLogThetaLo || x[0] > kLogThetaHi || std::abs(x[1]) > kLogitLim) return kInf;
    try {
      const double v = -nggp_loglik_prefix(std::exp(x[0]), logistic(x[1]), cfg.tau, prefix);
      return std::isfinite(v) ? v : kInf;
    } catch (const Error&) {
      return kInf;
    }
  };
  std::vector<std::pair<double, std::vector<double>>> grid;
  for (double lt : {-2.0, 0.0, 2.0, 4.0, 6.0, 8.0, 10.0})
    for (double a : {0.05, 0.2, 0.35, 0.5, 0.65, 0.8, 0.95}) {
      std::vector<double> x{lt, logit(a)};
      grid.emplace_back(objective(x), x);
    }
  std::sort(grid.begin(), grid.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  NelderMeadResult best;
  best.f = kInf;
  int total_iter = 0;
  for (int r = 0; r < cfg.restarts && r < static_cast<int>(grid.size()); ++r) {
    if (!std::isfinite(grid[r].first)) break;
    auto res = nelder_mead(objective, grid[r].second, {0.5, 0.5}, cfg.xtol, cfg.max_iter);
    total_iter += res.iterations;
    if (res.f < best.f) best = res;
  }
  if (!std::isfinite(best.f)) fail(Errc::numeric, "prefix likelihood fit failed from every restart");
  FitResult fit;
  fit.params = SmoothingParams::nggp(std::exp(best.x[0]), logistic(best.x[1]), cfg.tau);
  fit.params.provenance = "fitted(nggp-prefix-mle)";
  fit.objective = -best.f;
  fit.method = "nggp-prefix-mle";
  fit.iterations = total_iter;
  fit.converged = best.converged;
  return fit;
}

double wasserstein1(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) fail(Errc::invalid_argument, "Wasserstein inputs differ in length");
  if (a.empty()) return 0.0;
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  double s = 0.0;
  for (size_t i = 0; i < x.size(); ++i) s += std::abs(x[i] - y[i]);
  return s / static_cast<double>(x.size());
}

double wasserstein1_counts(std::span<const uint64_t> a, std::span<const uint64_t> b) {
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  return wasserstein1(x, y);
}

double minwass_objective(std::span<const uint64_t> counts, double theta, double alpha, uint64_t m,
                         const MinWassConfig& cfg) {
  const auto J = static_cast<uint32_t>(counts.size());
  double n = 0.0;
  for (uint64_t c : counts) n += static_cast<double>(c);
  std::vector<double> obs(counts.begin(), counts.end());
  const double scale = n / static_cast<double>(m);
  double total = 0.0;
  for (uint32_t r = 0; r < cfg.num_mc; ++r) {
    // Common random numbers: replica r uses the same streams for every candidate.
    Rng urn_rng(derive_seed(cfg.seed, 2 * r));
    Rng hash_rng(derive_seed(cfg.seed, 2 * r + 1));
    const PrefixSample ps = nggp_urn_sample(urn_rng, theta, alpha, cfg.tau, m);
    const HashFunction h = draw_hash(hash_rng, J);
    std::vector<double> syn(J, 0.0);
    for (size_t s = 0; s < ps.counts.size(); ++s) syn[h(key64(static_cast<uint64_t>(s)))] += static_cast<double>(ps.counts[s]);
    for (double& x : syn) x *= scale;
    total += wasserstein1(obs, syn);
  }
  return total / cfg.num_mc;
}

FitResult fit_nggp_minwass(std::span<const uint64_t> counts, uint64_t m, const MinWassConfig& cfg) {
  uint64_t n = 0;
  for (uint64_t c : counts) n += c;
  if (counts.empty() || n == 0) fail(Errc::invalid_argument, "minimum-Wasserstein fit requires n >= 1");
  if (m == 0 || m > n) fail(Errc::invalid_argument, "synthetic size m must lie in [1, n]");
  if (cfg.num_mc == 0) fail(Errc::invalid_argument, "num_mc must be >= 1");
  auto objective = [&](const std::vector<double>& x) {
    if (x[0] < kLogThetaLo || x[0] > kLogThetaHi || std::abs(x[1]) > kLogitLim) return kInf;
    return minwass_objective(counts, std::exp(x[0]), logistic(x[1]), m, cfg);
  };
  std::vector<double> start;
  double fstart = kInf;
  for (double lt : cfg.grid_log_theta)
    for (double a : cfg.grid_alpha) {
      std::vector<double> x{lt, logit(a)};
      const double v = objective(x);
      if (v < fstart) {
        fstart = v;
        start = x;
      }
    }
  if (start.empty()) fail(Errc::numeric, "minimum-Wasserstein grid produced no finite objective");
  auto res = nelder_mead(objective, start, {0.5, 0.5}, cfg.xtol, cfg.max_iter);
  FitResult fit;
  fit.params = SmoothingParams::nggp(std::exp(res.x[0]), logistic(res.x[1]), cfg.tau);
  fit.params.provenance = "fitted(nggp-min-wasserstein)";
  fit.objective = res.f;
  fit.method = "nggp-min-wasserstein";
  fit.iterations = res.iterations + static_cast<int>(cfg.grid_log_theta.size() * cfg.grid_alpha.size());
  fit.converged = res.converged;
  fit.seed = cfg.seed;
  return fit;
}

FitResult fit_nggp_minwass(const Sketch& sketch, uint64_t m, const MinWassConfig& cfg) {
  return fit_nggp_minwass(sketch.counts(), m, cfg);
}

}  // namespace skr

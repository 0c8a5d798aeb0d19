#include <gtest/gtest.h>

#include <algorithm>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/special_functions/digamma.hpp>
#include <cmath>
#include <functional>
#include <map>

#include "sketchrec/datagen.hpp"
#include "sketchrec/error.hpp"
#include "sketchrec/param_fit.hpp"
#include "sketchrec/specfun.hpp"

using namespace skr;

namespace {

MultiSketch sketch_stream(const std::vector<uint64_t>& symbols, uint32_t J, uint64_t seed) {
  auto ms = MultiSketch::create(1, J, seed);
  for (auto s : symbols) ms.update(key64(s));
  return ms;
}

// Block sizes of every set partition of {1..m}.
void partitions(int m, std::vector<std::vector<uint64_t>>& out) {
  std::function<void(int, std::vector<uint64_t>&)> rec = [&](int i, std::vector<uint64_t>& blocks) {
    if (i == m) {
      out.push_back(blocks);
      return;
    }
    for (size_t j = 0; j < blocks.size(); ++j) {
      ++blocks[j];
      rec(i + 1, blocks);
      --blocks[j];
    }
    blocks.push_back(1);
    rec(i + 1, blocks);
    blocks.pop_back();
  };
  std::vector<uint64_t> b;
  rec(0, b);
}

double two_sample_ks(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  size_t i = 0, j = 0;
  double d = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j]) ++i;
    else ++j;
    d = std::max(d, std::abs(double(i) / a.size() - double(j) / b.size()));
  }
  return d;
}

}  // namespace

TEST(DpLoglik, FlatWhenSingleBucket) {
  std::vector<uint64_t> c{37};
  const double base = dp_loglik_sketch(1.0, c);
  for (double t : {0.01, 3.0, 1e4}) EXPECT_NEAR(dp_loglik_sketch(t, c), base, 1e-8);
  EXPECT_THROW(fit_dp(c), Error);
  try {
    fit_dp(c);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::non_identifiable);
  }
}

TEST(DpLoglik, GradientMatchesFiniteDifference) {
  Rng rng(1);
  for (int t = 0; t < 30; ++t) {
    std::vector<uint64_t> c(2 + rng() % 100);
    for (auto& x : c) x = rng() % 500;
    c[0] += 1;
    for (double theta : {0.5, 20.0, 900.0}) {
      const double h = 1e-5 * theta;
      const double fd = (dp_loglik_sketch(theta + h, c) - dp_loglik_sketch(theta - h, c)) / (2 * h);
      const double g = dp_loglik_grad(theta, c);
      EXPECT_NEAR(g, fd, 1e-5 * std::max(1.0, std::abs(g)));
      // Digamma form of the gradient written out with Boost.
      double ref = boost::math::digamma(theta);
      double n = 0;
      for (auto x : c) n += x;
      ref -= boost::math::digamma(theta + n);
      for (auto x : c)
        if (x > 0) ref += (boost::math::digamma(theta / c.size() + x) - boost::math::digamma(theta / c.size())) / c.size();
      EXPECT_NEAR(g, ref, 1e-8 * std::max(1.0, std::abs(ref)));
    }
  }
}

TEST(FitDp, DeterministicAndMatchesDenseGrid) {
  Rng rng(2);
  for (int t = 0; t < 10; ++t) {
    auto st = gen_pyp(rng, 50.0 + 30 * t, 0.0, 20000);
    auto ms = sketch_stream(st.symbols, 64, rng());
    auto a = fit_dp(ms.row(0));
    auto b = fit_dp(ms.row(0));
    EXPECT_EQ(a.params.theta, b.params.theta);
    EXPECT_EQ(a.method, "dp-mle");
    EXPECT_TRUE(a.converged);
    double best = 0, fbest = -INFINITY;
    double coarse = -10;
    for (double lt = -10; lt <= 20; lt += 0.05)
      if (dp_loglik_sketch(std::exp(lt), ms.row(0).counts()) > dp_loglik_sketch(std::exp(coarse), ms.row(0).counts()))
        coarse = lt;
    for (double lt = coarse - 0.1; lt <= coarse + 0.1; lt += 1e-5) {
      const double v = dp_loglik_sketch(std::exp(lt), ms.row(0).counts());
      if (v > fbest) fbest = v, best = std::exp(lt);
    }
    EXPECT_NEAR(a.params.theta, best, 1e-3 * best);
  }
}

TEST(FitDp, RecoversConcentrationOnDirichletData) {
  Rng rng(3);
  int inside = 0;
  for (int rep = 0; rep < 50; ++rep) {
    auto st = gen_pyp(rng, 100.0, 0.0, 100000);
    auto ms = sketch_stream(st.symbols, 128, rng());
    const double th = fit_dp(ms.row(0)).params.theta;
    inside += th >= 50 && th <= 200;
  }
  EXPECT_GE(inside, 45);
}

TEST(PrefixLoglik, SumsToOneOverPartitions) {
  // exp(loglik) is the exchangeable partition probability, so it sums to one over set partitions.
  for (int m : {1, 3, 5, 7}) {
    std::vector<std::vector<uint64_t>> parts;
    partitions(m, parts);
    for (auto [theta, alpha, tau] : {std::tuple{1.0, 0.5, 0.5}, std::tuple{30.0, 0.2, 2.0}, std::tuple{0.3, 0.9, 0.5}}) {
      double total = 0;
      for (const auto& p : parts) total += std::exp(nggp_loglik_prefix(theta, alpha, tau, {p, (uint64_t)m}));
      EXPECT_NEAR(total, 1.0, 1e-8) << m << " " << theta << " " << alpha;
    }
  }
}

TEST(PrefixLoglik, MatchesDirectQuadrature) {
  Rng rng(4);
  boost::math::quadrature::exp_sinh<double> es;
  for (int t = 0; t < 10; ++t) {
    auto ps = nggp_urn_sample(rng, 5.0, 0.5, 0.5, 40);
    const double m = ps.m, k = ps.k();
    for (auto [theta, alpha] : {std::pair{2.0, 0.3}, std::pair{10.0, 0.6}}) {
      const double tau = 0.5;
      const double I = es.integrate([&](double u) {
        return std::exp((m - 1) * std::log(u) + (k * alpha - m) * std::log(tau + u) -
                        theta / alpha * (std::pow(tau + u, alpha) - std::pow(tau, alpha)));
      });
      double ref = k * std::log(theta) - std::lgamma(m) + std::log(I);
      for (auto n : ps.counts)
        for (uint64_t i = 1; i < n; ++i) ref += std::log(i - alpha);
      EXPECT_NEAR(nggp_loglik_prefix(theta, alpha, tau, ps), ref, 1e-8 * std::abs(ref));
    }
  }
}

TEST(PrefixLoglik, FiniteAcrossGrid) {
  Rng rng(5);
  for (int t = 0; t < 3; ++t) {
    auto ps = nggp_urn_sample(rng, 1.0 + 50 * t, 0.4, 0.5, 500);
    for (double theta = 0.1; theta <= 1000; theta *= 2.5)
      for (double alpha = 0.05; alpha < 0.951; alpha += 0.1)
        ASSERT_TRUE(std::isfinite(nggp_loglik_prefix(theta, alpha, 0.5, ps))) << theta << " " << alpha;
  }
  PrefixSample one{{1}, 1};
  EXPECT_TRUE(std::isfinite(nggp_loglik_prefix(3.0, 0.5, 0.5, one)));
}

TEST(FitPrefix, DeterministicAndNearGridArgmax) {
  Rng rng(6);
  auto ps = nggp_urn_sample(rng, 100, 0.5, 0.5, 3000);
  auto a = fit_nggp_prefix(ps), b = fit_nggp_prefix(ps);
  EXPECT_EQ(a.params.theta, b.params.theta);
  EXPECT_EQ(a.params.alpha, b.params.alpha);
  EXPECT_EQ(a.params.tau, 0.5);
  EXPECT_EQ(a.method, "nggp-prefix-mle");
  // Dense grid over (log theta, alpha); the optimizer must land within one cell of its argmax.
  const double dlt = 0.05, da = 0.01;
  double blt = 0, ba = 0, fb = -INFINITY;
  for (double lt = 2.0; lt <= 7.0; lt += dlt)
    for (double al = 0.01; al < 0.995; al += da) {
      const double v = nggp_loglik_prefix(std::exp(lt), al, 0.5, ps);
      if (v > fb) fb = v, blt = lt, ba = al;
    }
  EXPECT_NEAR(std::log(a.params.theta), blt, dlt);
  EXPECT_NEAR(a.params.alpha, ba, da);
  EXPECT_GE(a.objective, fb - 1e-9);
  EXPECT_THROW(fit_nggp_prefix(PrefixSample{{1}, 1}), Error);
}

TEST(FitPrefix, DirichletDataGivesSmallAlpha) {
  Rng rng(7);
  int small = 0;
  for (int rep = 0; rep < 50; ++rep) {
    auto st = gen_pyp(rng, 100.0, 0.0, 5000);
    small += fit_nggp_prefix(PrefixSample::from_symbols(st.symbols)).params.alpha < 0.2;
  }
  EXPECT_GE(small, 40);
}

TEST(UrnLatent, LogConcaveAndSamplerMatchesGrid) {
  for (auto [theta, alpha, i, k] : {std::tuple{10.0, 0.5, 1.0, 1.0}, std::tuple{100.0, 0.7, 500.0, 180.0},
                                    std::tuple{1.0, 0.05, 50.0, 3.0}, std::tuple{5.0, 0.95, 2000.0, 1500.0}}) {
    UrnLatent lat{theta, alpha, 0.5, i, k};
    const double mode = lat.mode(0.0);
    EXPECT_NEAR(lat.dh(mode), 0.0, 1e-6 * (1 + i));
    for (double w = mode - 30; w <= mode + 30; w += 0.25) {
      const double e = 1e-4;
      const double fd = (lat.h(w + e) - 2 * lat.h(w) + lat.h(w - e)) / (e * e);
      EXPECT_LE(lat.d2h(w), 0.0);
      EXPECT_LE(fd, 1e-4 * (1 + std::abs(lat.h(w))));
    }
    Rng r1(11), r2(12);
    std::vector<double> ars, grid;
    double hint = mode;
    for (int s = 0; s < 20000; ++s) {
      ars.push_back(sample_urn_latent(r1, lat, &hint));
      grid.push_back(sample_grid_inverse_cdf(r2, lat, mode));
    }
    // Two-sample KS at the 0.1% level, plus the mean against quadrature of the density.
    EXPECT_LT(two_sample_ks(ars, grid), 1.95 * std::sqrt(2.0 / 20000));
    const double sig = 1 / std::sqrt(-lat.d2h(mode));
    const double hm = lat.h(mode);
    const double Z = integrate([&](double w) { return std::exp(lat.h(w) - hm); }, mode - 40 * sig, mode + 40 * sig);
    const double M1 = integrate([&](double w) { return w * std::exp(lat.h(w) - hm); }, mode - 40 * sig, mode + 40 * sig);
    double mean = 0, m2 = 0;
    for (double x : ars) mean += x, m2 += x * x;
    mean /= ars.size();
    const double sd = std::sqrt(m2 / ars.size() - mean * mean);
    EXPECT_NEAR(mean, M1 / Z, 4 * sd / std::sqrt(ars.size()));
  }
}

TEST(Wasserstein, ExamplesAndMetric) {
  std::vector<uint64_t> a{1, 3}, b{2, 2};
  EXPECT_DOUBLE_EQ(wasserstein1_counts(a, b), 1.0);
  EXPECT_DOUBLE_EQ(wasserstein1_counts(a, a), 0.0);
  std::vector<uint64_t> c{1};
  EXPECT_THROW(wasserstein1_counts(a, c), Error);
  Rng rng(8);
  for (int t = 0; t < 200; ++t) {
    const size_t J = 1 + rng() % 20;
    std::vector<uint64_t> x(J), y(J), z(J);
    for (size_t j = 0; j < J; ++j) x[j] = rng() % 50, y[j] = rng() % 50, z[j] = rng() % 50;
    const double xy = wasserstein1_counts(x, y), yx = wasserstein1_counts(y, x);
    EXPECT_DOUBLE_EQ(xy, yx);
    EXPECT_LE(wasserstein1_counts(x, z), xy + wasserstein1_counts(y, z) + 1e-12);
    auto xs = x;
    std::shuffle(xs.begin(), xs.end(), rng);
    EXPECT_DOUBLE_EQ(wasserstein1_counts(x, xs), 0.0);
  }
}

TEST(MinWass, ObjectivePrefersTruthAndIsDeterministic) {
  Rng rng(9);
  std::vector<double> diff;
  for (int rep = 0; rep < 20; ++rep) {
    auto st = gen_nggp(rng, 100, 0.5, 0.5, 100000);
    auto ms = sketch_stream(st.symbols, 128, rng());
    MinWassConfig cfg;
    cfg.seed = rng();
    const double at = minwass_objective(ms.row(0).counts(), 100, 0.5, 5000, cfg);
    const double off = minwass_objective(ms.row(0).counts(), 100, 0.9, 5000, cfg);
    EXPECT_EQ(at, minwass_objective(ms.row(0).counts(), 100, 0.5, 5000, cfg));
    diff.push_back(off - at);
  }
  std::nth_element(diff.begin(), diff.begin() + 10, diff.end());
  EXPECT_GT(diff[10], 0.0);
}

TEST(MinWass, FitIsDeterministic) {
  Rng rng(10);
  auto st = gen_nggp(rng, 100, 0.5, 0.5, 20000);
  auto ms = sketch_stream(st.symbols, 64, 3);
  MinWassConfig cfg;
  cfg.seed = 77;
  cfg.num_mc = 3;
  auto a = fit_nggp_minwass(ms.row(0), 1000, cfg), b = fit_nggp_minwass(ms.row(0), 1000, cfg);
  EXPECT_EQ(a.params.theta, b.params.theta);
  EXPECT_EQ(a.params.alpha, b.params.alpha);
  EXPECT_EQ(a.seed, 77u);
  EXPECT_EQ(a.method, "nggp-min-wasserstein");
  EXPECT_THROW(fit_nggp_minwass(ms.row(0), 30000, cfg), Error);
}

TEST(NelderMead, Rosenbrock) {
  auto f = [](const std::vector<double>& x) {
    return 100 * (x[1] - x[0] * x[0]) * (x[1] - x[0] * x[0]) + (1 - x[0]) * (1 - x[0]);
  };
  auto r = nelder_mead(f, {-1.2, 1.0}, {0.5, 0.5}, 1e-10, 5000);
  EXPECT_NEAR(r.x[0], 1.0, 1e-6);
  EXPECT_NEAR(r.x[1], 1.0, 1e-6);
  EXPECT_TRUE(r.converged);
}

TEST(FitResultJson, RoundTrip) {
  FitResult f;
  f.params = SmoothingParams::nggp(12.5, 0.25, 0.5);
  f.objective = -3.5;
  f.method = "nggp-prefix-mle";
  f.seed = 9;
  auto back = fit_result_from_json(fit_result_to_json(f));
  EXPECT_EQ(back.params.kind, Kind::NGGP);
  EXPECT_EQ(back.params.theta, 12.5);
  EXPECT_EQ(back.params.alpha, 0.25);
  EXPECT_EQ(back.params.tau, 0.5);
  EXPECT_EQ(back.objective, -3.5);
  EXPECT_EQ(back.method, f.method);
  EXPECT_EQ(back.seed, 9u);
  EXPECT_THROW(fit_result_from_json("{not json"), Error);
  EXPECT_THROW(fit_result_from_json(R"({"kind":"XYZ","theta":1})"), Error);
}

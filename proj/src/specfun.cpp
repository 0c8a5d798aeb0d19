#include "sketchrec/specfun.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <queue>
#include <string>
#include <vector>

#include "sketchrec/error.hpp"

namespace skr {
namespace {

// Gauss-Kronrod 15-point abscissae and weights, with the embedded 7-point Gauss weights.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

Segment gk15(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double kron = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int i = 0; i < 7; ++i) {
    const double dx = h * kXgk[i];
    const double f1 = f(c - dx);
    const double f2 = f(c + dx);
    kron += kWgk[i] * (f1 + f2);
    if (i % 2 == 1) gauss += kWg[i / 2] * (f1 + f2);
  }
  return {a, b, kron * h, std::abs((kron - gauss) * h)};
}

// Lentz continued fraction for e^z E_nu(z); converges quickly for z >= 1.
double scaled_cf(double nu, double z) {
  constexpr double tiny = 1e-300;
  double b = z + nu;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -static_cast<double>(i) * (nu - 1.0 + i);
    b += 2.0;
    d = 1.0 / (an * d + b);
    c = b + an / c;
    const double del = c * d;
    h *= del;
    if (std::abs(del - 1.0) < 1e-15) return h;
  }
  fail(Errc::numeric, "exp_integral continued fraction did not converge");
}

// int_0^inf exp(-(nu-1) y - z (e^y - 1)) dy, the scaled integral after x = e^y.
double scaled_quad(double nu, double z) {
  auto g = [nu, z](double y) { return -(nu - 1.0) * y - z * std::expm1(y); };
  double Y = 1.0;
  while (g(Y) > -50.0) Y *= 2.0;
  QuadratureConfig cfg;
  cfg.abs_tol = 0.0;
  cfg.rel_tol = 1e-12;
  cfg.max_subdivisions = 2000;
  return integrate([&](double y) { return std::exp(g(y)); }, 0.0, Y, cfg);
}

}  // namespace

double log_gamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) fail(Errc::domain, "log_gamma requires x > 0");
  double shift = 0.0;
  if (x < 10.0) {
    double prod = 1.0;
    while (x < 10.0) {
      prod *= x;
      x += 1.0;
    }
    shift = std::log(prod);
  }
  const double r = 1.0 / x;
  const double r2 = r * r;
  const double series =
      r * (1.0 / 12 +
           r2 * (-1.0 / 360 +
                 r2 * (1.0 / 1260 +
                       r2 * (-1.0 / 1680 + r2 * (1.0 / 1188 + r2 * (-691.0 / 360360 + r2 / 156.0))))));
  return (x - 0.5) * std::log(x) - x + 0.5 * std::log(2.0 * std::numbers::pi) + series - shift;
}

double digamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) fail(Errc::domain, "digamma requires x > 0");
  double acc = 0.0;
  while (x < 6.0) {
    acc -= 1.0 / x;
    x += 1.0;
  }
  const double r2 = 1.0 / (x * x);
  const double series =
      r2 * (1.0 / 12 -
            r2 * (1.0 / 120 -
                  r2 * (1.0 / 252 -
                        r2 * (1.0 / 240 - r2 * (1.0 / 132 - r2 * (691.0 / 32760 - r2 / 12.0))))));
  return acc + std::log(x) - 0.5 / x - series;
}

QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                    const QuadratureConfig& cfg) {
  if (!(cfg.abs_tol >= 0.0) || !(cfg.rel_tol >= 0.0) || (cfg.abs_tol == 0.0 && cfg.rel_tol == 0.0))
    fail(Errc::invalid_argument, "quadrature tolerances must be positive");
  std::priority_queue<Segment> heap;
  Segment first = gk15(f, a, b);
  heap.push(first);
  double total = first.value;
  double err = first.error;
  int splits = 0;
  while (err > std::max(cfg.abs_tol, cfg.rel_tol * std::abs(total)) && splits < cfg.max_subdivisions) {
    Segment worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    Segment left = gk15(f, worst.a, mid);
    Segment right = gk15(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++splits;
  }
  // Re-sum to shed accumulated rounding from incremental updates.
  double sum = 0.0, esum = 0.0;
  while (!heap.empty()) {
    sum += heap.top().value;
    esum += heap.top().error;
    heap.pop();
  }
  QuadratureResult res{sum, esum, splits, false};
  res.converged = std::isfinite(sum) && esum <= std::max(cfg.abs_tol, cfg.rel_tol * std::abs(sum));
  return res;
}

double integrate(const std::function<double(double)>& f, double a, double b, const QuadratureConfig& cfg) {
  QuadratureResult r = integrate_adaptive(f, a, b, cfg);
  if (!r.converged)
    fail(Errc::numeric, "quadrature did not converge: estimate " + std::to_string(r.value) + ", error " +
                            std::to_string(r.error) + " after " + std::to_string(r.subdivisions) +
                            " subdivisions");
  return r.value;
}

double exp_integral_scaled(double nu, double z) {
  if (!(nu >= 1.0) || !(z >= 0.0) || !std::isfinite(nu) || !std::isfinite(z))
    fail(Errc::domain, "exp_integral requires nu >= 1 and z >= 0");
  if (z == 0.0) {
    if (nu == 1.0) fail(Errc::domain, "E_1(0) diverges");
    return 1.0 / (nu - 1.0);
  }
  if (z >= 1.0) return scaled_cf(nu, z);
  return scaled_quad(nu, z);
}

double exp_integral(double nu, double z) { return std::exp(-z) * exp_integral_scaled(nu, z); }

double sample_exponential(Rng& rng) { return -std::log(uniform01(rng)); }

double sample_log_gamma(Rng& rng, double shape) {
  if (!(shape > 0.0)) fail(Errc::domain, "gamma shape must be positive");
  if (shape >= 1.0) {
    std::gamma_distribution<double> g(shape, 1.0);
    double x = g(rng);
    while (x <= 0.0) x = g(rng);
    return std::log(x);
  }
  // G(a) = G(a + 1) U^{1/a}
  std::gamma_distribution<double> g(shape + 1.0, 1.0);
  return std::log(g(rng)) + std::log(uniform01(rng)) / shape;
}

double sample_beta(Rng& rng, double a, double b) {
  const double la = sample_log_gamma(rng, a);
  const double lb = sample_log_gamma(rng, b);
  return 1.0 / (1.0 + std::exp(lb - la));
}

double sample_V_dp(Rng& rng, double theta, uint32_t J) {
  if (!(theta > 0.0) || J == 0) fail(Errc::domain, "DP mixing variable requires theta > 0, J >= 1");
  return sample_beta(rng, 1.0, theta / J);
}

double sample_V_nggp(Rng& rng, double theta, double alpha, double tau, uint32_t J) {
  if (!(alpha > 0.0 && alpha < 1.0)) fail(Errc::domain, "NGGP mixing variable requires alpha in (0, 1)");
  if (!(theta > 0.0) || !(tau > 0.0) || J == 0) fail(Errc::domain, "NGGP requires theta, tau > 0, J >= 1");
  const double b = theta * std::pow(tau, alpha) / (J * alpha);
  const double B = sample_beta(rng, 1.0 - alpha, alpha);
  const double E = sample_exponential(rng);
  return B * -std::expm1(-std::log1p(E / b) / alpha);
}

double mean_V_nggp(double theta, double alpha, double tau, uint32_t J) {
  if (!(alpha > 0.0 && alpha < 1.0)) fail(Errc::domain, "NGGP mean requires alpha in (0, 1)");
  if (!(theta > 0.0) || !(tau > 0.0) || J == 0) fail(Errc::domain, "NGGP requires theta, tau > 0, J >= 1");
  const double b = theta * std::pow(tau, alpha) / (J * alpha);
  // 1 - b S_nu(b) = nu S_{nu+1}(b) with S_nu(z) = e^z E_nu(z); avoids cancellation.
  const double nu = 1.0 / alpha;
  return (1.0 - alpha) * nu * exp_integral_scaled(nu + 1.0, b);
}

}  // namespace skr

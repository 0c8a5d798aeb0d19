#include "sketchrec/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <thread>

#include "sketchrec/error.hpp"
#include "sketchrec/specfun.hpp"

namespace skr {
namespace {

double log_choose(double n, double k) { return std::lgamma(n + 1) - std::lgamma(k + 1) - std::lgamma(n - k + 1); }

// x^e with 0^0 = 1.
double pow0(double x, double e) { return e == 0.0 ? 1.0 : std::pow(x, e); }

void check_buckets(const DiscreteDist& P, const BucketMap& buckets, uint32_t J) {
  if (buckets.empty()) fail(Errc::invalid_argument, "at least one hash row is required");
  for (const auto& row : buckets) {
    if (row.size() != P.size()) fail(Errc::invalid_argument, "bucket assignment length differs from support");
    for (uint32_t b : row)
      if (b >= J) fail(Errc::invalid_argument, "bucket index out of range");
  }
}

void check_counts(const std::vector<std::vector<uint64_t>>& c, size_t M, uint32_t J, uint64_t n) {
  if (c.size() != M) fail(Errc::invalid_argument, "sketch has the wrong number of rows");
  for (const auto& row : c) {
    if (row.size() != J) fail(Errc::invalid_argument, "sketch row has the wrong width");
    uint64_t s = 0;
    for (uint64_t x : row) s += x;
    if (s != n) fail(Errc::invalid_argument, "sketch row does not sum to n");
  }
}

struct Enumerator {
  const DiscreteDist& P;
  const BucketMap& B;
  uint32_t J;
  uint64_t n;
  std::vector<uint64_t> target;  // flattened M x J
  std::vector<size_t> in_j;      // symbols hashed to j in every row

  size_t M() const { return B.size(); }

  void dfs(uint64_t depth, double weight, std::vector<uint64_t>& counts, std::vector<uint32_t>& seen,
           std::vector<double>& acc) const {
    if (depth == n) {
      for (size_t s : in_j) acc[seen[s]] += weight * P.probs[s];
      return;
    }
    for (size_t s = 0; s < P.size(); ++s) {
      if (P.probs[s] == 0.0) continue;
      bool fits = true;
      for (size_t l = 0; l < M(); ++l) {
        const size_t idx = l * J + B[l][s];
        if (counts[idx] >= target[idx]) {
          fits = false;
          break;
        }
      }
      if (!fits) continue;
      for (size_t l = 0; l < M(); ++l) ++counts[l * J + B[l][s]];
      ++seen[s];
      dfs(depth + 1, weight * P.probs[s], counts, seen, acc);
      --seen[s];
      for (size_t l = 0; l < M(); ++l) --counts[l * J + B[l][s]];
    }
  }
};

// Sum over sequences of bucket tuples with the given remaining marginals of the product of weights.
double tuple_sequence_sum(const std::vector<std::vector<uint32_t>>& tuples, const std::vector<double>& w,
                          uint32_t J, uint64_t len, std::vector<uint64_t>& remaining) {
  if (len == 0) return 1.0;
  double total = 0.0;
  const size_t M = tuples.empty() ? 0 : tuples[0].size();
  for (size_t t = 0; t < tuples.size(); ++t) {
    if (w[t] == 0.0) continue;
    bool fits = true;
    for (size_t l = 0; l < M; ++l)
      if (remaining[l * J + tuples[t][l]] == 0) {
        fits = false;
        break;
      }
    if (!fits) continue;
    for (size_t l = 0; l < M; ++l) --remaining[l * J + tuples[t][l]];
    total += w[t] * tuple_sequence_sum(tuples, w, J, len - 1, remaining);
    for (size_t l = 0; l < M; ++l) ++remaining[l * J + tuples[t][l]];
  }
  return total;
}

struct Moments {
  double a, b, c;  // risk(beta) = a beta^2 - 2 b beta + c
};

Moments risk_moments(const std::vector<double>& p, const std::vector<uint32_t>& buckets, uint32_t J, double n) {
  std::vector<double> q(J, 0.0), p2(J, 0.0);
  double sp2 = 0.0, sp3 = 0.0;
  for (size_t s = 0; s < p.size(); ++s) {
    q[buckets[s]] += p[s];
    p2[buckets[s]] += p[s] * p[s];
    sp2 += p[s] * p[s];
    sp3 += p[s] * p[s] * p[s];
  }
  double sq2 = 0.0, sq3 = 0.0, cross = 0.0;
  for (uint32_t j = 0; j < J; ++j) {
    sq2 += q[j] * q[j];
    sq3 += q[j] * q[j] * q[j];
    cross += q[j] * p2[j];
  }
  return {n * sq2 + n * (n - 1) * sq3, n * sp2 + n * (n - 1) * cross, n * sp2 + n * (n - 1) * sp3};
}

double eval(const Moments& m, double beta) { return m.a * beta * beta - 2.0 * m.b * beta + m.c; }

}  // namespace

double pi_known_P(const DiscreteDist& P, const std::vector<uint32_t>& buckets, uint64_t c, uint32_t j,
                  uint64_t r) {
  if (buckets.size() != P.size()) fail(Errc::invalid_argument, "bucket assignment length differs from support");
  double q = 0.0;
  for (size_t s = 0; s < P.size(); ++s)
    if (buckets[s] == j) q += P.probs[s];
  if (!(q > 0.0)) fail(Errc::domain, "bucket has zero probability mass");
  if (r > c) return 0.0;
  const double lc = log_choose(static_cast<double>(c), static_cast<double>(r));
  double sum = 0.0;
  for (size_t s = 0; s < P.size(); ++s) {
    if (buckets[s] != j || P.probs[s] == 0.0) continue;
    const double x = std::min(1.0, P.probs[s] / q);
    sum += pow0(x, static_cast<double>(r + 1)) * pow0(1.0 - x, static_cast<double>(c - r));
  }
  return std::exp(lc) * sum;
}

FreqDistribution pi_known_P_dist(const DiscreteDist& P, const std::vector<uint32_t>& buckets, uint64_t c,
                                 uint32_t j) {
  std::vector<double> pmf(c + 1);
  for (uint64_t r = 0; r <= c; ++r) pmf[r] = pi_known_P(P, buckets, c, j, r);
  return FreqDistribution(std::move(pmf));
}

FreqDistribution enumerate_conditional(const DiscreteDist& P, const BucketMap& buckets, uint32_t J,
                                       uint64_t n, const std::vector<std::vector<uint64_t>>& c,
                                       const std::vector<uint32_t>& j, unsigned threads) {
  P.validate();
  check_buckets(P, buckets, J);
  check_counts(c, buckets.size(), J, n);
  if (j.size() != buckets.size()) fail(Errc::invalid_argument, "one target bucket per row is required");
  if (std::pow(static_cast<double>(P.size()), static_cast<double>(n + 1)) > kEnumerationLimit)
    fail(Errc::too_large, "enumeration exceeds |S|^(n+1) <= 1e7");

  Enumerator e{P, buckets, J, n, {}, {}};
  for (const auto& row : c) e.target.insert(e.target.end(), row.begin(), row.end());
  for (size_t s = 0; s < P.size(); ++s) {
    bool all = true;
    for (size_t l = 0; l < buckets.size(); ++l) all = all && buckets[l][s] == j[l];
    if (all) e.in_j.push_back(s);
  }

  std::vector<double> acc(n + 1, 0.0);
  if (n == 0) {
    std::vector<uint64_t> counts(e.target.size(), 0);
    std::vector<uint32_t> seen(P.size(), 0);
    e.dfs(0, 1.0, counts, seen, acc);
  } else {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(P.size()));
    std::vector<std::vector<double>> partial(threads, std::vector<double>(n + 1, 0.0));
    auto work = [&](unsigned tid) {
      std::vector<uint64_t> counts(e.target.size(), 0);
      std::vector<uint32_t> seen(P.size(), 0);
      for (size_t s0 = tid; s0 < P.size(); s0 += threads) {
        if (P.probs[s0] == 0.0) continue;
        bool fits = true;
        for (size_t l = 0; l < buckets.size(); ++l) fits = fits && e.target[l * J + buckets[l][s0]] > 0;
        if (!fits) continue;
        for (size_t l = 0; l < buckets.size(); ++l) ++counts[l * J + buckets[l][s0]];
        ++seen[s0];
        e.dfs(1, P.probs[s0], counts, seen, partial[tid]);
        --seen[s0];
        for (size_t l = 0; l < buckets.size(); ++l) --counts[l * J + buckets[l][s0]];
      }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(work, t);
    work(0);
    for (auto& th : pool) th.join();
    for (const auto& part : partial)
      for (size_t r = 0; r <= n; ++r) acc[r] += part[r];
  }
  double total = 0.0;
  for (double a : acc) total += a;
  if (!(total > 0.0)) fail(Errc::degenerate, "observed sketch and bucket have zero probability under P");
  return FreqDistribution(std::move(acc));
}

std::vector<double> multihash_conditional_general(const DiscreteDist& P, const BucketMap& buckets, uint32_t J,
                                                  uint64_t n, const std::vector<std::vector<uint64_t>>& c,
                                                  const std::vector<uint32_t>& j) {
  P.validate();
  check_buckets(P, buckets, J);
  check_counts(c, buckets.size(), J, n);
  const size_t M = buckets.size();
  if (j.size() != M) fail(Errc::invalid_argument, "one target bucket per row is required");

  std::map<std::vector<uint32_t>, size_t> index;
  std::vector<std::vector<uint32_t>> tuples;
  std::vector<double> q;
  std::vector<size_t> tuple_of(P.size());
  for (size_t s = 0; s < P.size(); ++s) {
    std::vector<uint32_t> t(M);
    for (size_t l = 0; l < M; ++l) t[l] = buckets[l][s];
    auto [it, inserted] = index.try_emplace(t, tuples.size());
    if (inserted) {
      tuples.push_back(t);
      q.push_back(0.0);
    }
    q[it->second] += P.probs[s];
    tuple_of[s] = it->second;
  }
  auto jt = index.find(j);
  if (jt == index.end() || !(q[jt->second] > 0.0)) fail(Errc::domain, "target bucket tuple has zero mass");
  const size_t tj = jt->second;

  std::vector<uint64_t> remaining;
  for (const auto& row : c) remaining.insert(remaining.end(), row.begin(), row.end());
  const double denom = q[tj] * tuple_sequence_sum(tuples, q, J, n, remaining);
  if (!(denom > 0.0)) fail(Errc::degenerate, "observed sketch has zero probability under P");

  uint64_t rmax = n;
  for (size_t l = 0; l < M; ++l) rmax = std::min(rmax, c[l][j[l]]);
  std::vector<double> out(rmax + 1, 0.0);
  for (uint64_t r = 0; r <= rmax; ++r) {
    std::vector<uint64_t> rem = remaining;
    for (size_t l = 0; l < M; ++l) rem[l * J + j[l]] -= r;
    double sum = 0.0;
    for (size_t s = 0; s < P.size(); ++s) {
      if (tuple_of[s] != tj || P.probs[s] == 0.0) continue;
      std::vector<double> w = q;
      w[tj] = std::max(0.0, w[tj] - P.probs[s]);
      sum += std::pow(P.probs[s], static_cast<double>(r + 1)) * tuple_sequence_sum(tuples, w, J, n - r, rem);
    }
    out[r] = std::exp(log_choose(static_cast<double>(n), static_cast<double>(r))) * sum / denom;
  }
  return out;
}

double sketch_pmf(const DiscreteDist& P, const std::vector<uint32_t>& buckets, uint32_t J, uint64_t n,
                  const std::vector<uint64_t>& c) {
  if (c.size() != J) fail(Errc::invalid_argument, "count vector has the wrong width");
  uint64_t total = 0;
  for (uint64_t x : c) total += x;
  if (total != n) fail(Errc::invalid_argument, "counts must sum to n");
  auto q = bucket_masses(P, buckets, J);
  double lp = std::lgamma(static_cast<double>(n) + 1.0);
  for (uint32_t j = 0; j < J; ++j) {
    if (c[j] == 0) continue;
    if (q[j] == 0.0) return 0.0;
    lp += static_cast<double>(c[j]) * std::log(q[j]) - std::lgamma(static_cast<double>(c[j]) + 1.0);
  }
  return std::exp(lp);
}

double risk_freq_exact(double beta, const DiscreteDist& P, const std::vector<uint32_t>& buckets, uint32_t J,
                       uint64_t n) {
  P.validate();
  if (buckets.size() != P.size()) fail(Errc::invalid_argument, "bucket assignment length differs from support");
  return eval(risk_moments(P.probs, buckets, J, static_cast<double>(n)), beta);
}

double risk_freq_vertex(const DiscreteDist& P, const std::vector<uint32_t>& buckets, uint32_t J, uint64_t n) {
  P.validate();
  Moments m = risk_moments(P.probs, buckets, J, static_cast<double>(n));
  return m.b / m.a;
}

MinimaxResult minimax_grid_check(uint64_t n, uint32_t J, uint32_t K, const MinimaxConfig& cfg) {
  if (J == 0 || K == 0) fail(Errc::invalid_argument, "J and K must be >= 1");
  const size_t L = static_cast<size_t>(J) * K;
  if (L > 256) fail(Errc::too_large, "minimax grid check supports at most 256 support points");
  if (cfg.beta_grid < 3) fail(Errc::invalid_argument, "beta grid needs at least 3 points");
  const double nd = static_cast<double>(n);

  // Support point i sits in bucket i / K.
  std::vector<uint32_t> buckets(L);
  for (size_t i = 0; i < L; ++i) buckets[i] = static_cast<uint32_t>(i / K);

  std::vector<std::vector<double>> cands;
  for (size_t k = 1; k <= L; ++k) {
    std::vector<double> packed(L, 0.0), spread(L, 0.0);
    for (size_t t = 0; t < k; ++t) {
      packed[t] = 1.0 / k;
      spread[(t % J) * K + t / J] = 1.0 / k;
    }
    cands.push_back(std::move(packed));
    cands.push_back(std::move(spread));
  }
  Rng rng(cfg.seed);
  for (int i = 0; i < cfg.random_candidates; ++i) {
    const size_t k = 1 + rng() % L;
    std::vector<size_t> idx(L);
    for (size_t t = 0; t < L; ++t) idx[t] = t;
    std::shuffle(idx.begin(), idx.end(), rng);
    std::vector<double> p(L, 0.0);
    double s = 0.0;
    for (size_t t = 0; t < k; ++t) s += p[idx[t]] = sample_exponential(rng);
    for (double& x : p) x /= s;
    cands.push_back(std::move(p));
  }
  std::vector<Moments> mom;
  mom.reserve(cands.size());
  for (const auto& p : cands) mom.push_back(risk_moments(p, buckets, J, nd));

  auto worst = [&](double beta, size_t* arg) {
    double best = -1.0;
    for (size_t i = 0; i < mom.size(); ++i) {
      const double r = eval(mom[i], beta);
      if (r > best) {
        best = r;
        if (arg) *arg = i;
      }
    }
    return best;
  };

  // max of convex quadratics is convex in beta: grid, then ternary search around the best cell.
  int gbest = 0;
  double vbest = worst(0.0, nullptr);
  for (int g = 1; g < cfg.beta_grid; ++g) {
    const double v = worst(static_cast<double>(g) / (cfg.beta_grid - 1), nullptr);
    if (v < vbest) {
      vbest = v;
      gbest = g;
    }
  }
  double lo = std::max(0.0, (gbest - 1.0) / (cfg.beta_grid - 1));
  double hi = std::min(1.0, (gbest + 1.0) / (cfg.beta_grid - 1));
  for (int it = 0; it < 100; ++it) {
    const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
    if (worst(m1, nullptr) < worst(m2, nullptr))
      hi = m2;
    else
      lo = m1;
  }
  MinimaxResult res;
  res.beta_star = 0.5 * (lo + hi);
  size_t arg = 0;
  res.worst_risk = worst(res.beta_star, &arg);
  res.worst_P = cands[arg];
  for (double p : res.worst_P) {
    res.tv_to_uniform += 0.5 * std::abs(p - 1.0 / L);
    if (p > 0.0) ++res.worst_support;
  }
  Moments uni = risk_moments(std::vector<double>(L, 1.0 / L), buckets, J, nd);
  res.risk_uniform_at_inv_k = eval(uni, 1.0 / K);
  res.uniform_vertex = uni.b / uni.a;
  return res;
}

double card_worstcase_bound(const std::vector<double>& q, const std::vector<double>& beta, uint64_t n,
                            uint64_t r) {
  if (q.size() != beta.size()) fail(Errc::invalid_argument, "q and beta differ in length");
  if (n == 0) fail(Errc::invalid_argument, "n must be >= 1");
  double qb = 0.0;
  for (size_t i = 0; i < q.size(); ++i) qb += q[i] * beta[i];
  const double nd = static_cast<double>(n), rd = static_cast<double>(r);
  if (!(qb < (rd + 1.0) / (2.0 * nd))) fail(Errc::precondition, "requires <q, beta> < (r + 1) / 2n");

  double A = 0.0;
  if (r + 1 <= n) {
    const double x = r == 0 ? 0.0 : rd / (nd - 1.0);
    A = std::exp(log_choose(nd, rd + 1.0)) * pow0(x, rd) * pow0(1.0 - x, nd - rd - 1.0);
  }
  double B = 0.0;
  if (2 * r + 2 <= n) {
    const double x = r == 0 ? 0.0 : rd / (nd - 2.0);
    const double lmult = std::lgamma(nd + 1.0) - 2.0 * std::lgamma(rd + 2.0) - std::lgamma(nd - 2.0 * rd - 1.0);
    B = std::exp(lmult) * pow0(x, 2.0 * rd) * pow0(1.0 - 2.0 * x, nd - 2.0 * rd - 2.0);
  }
  const double lead = nd / (rd + 1.0) * qb;
  return lead * lead + (1.0 - 2.0 * lead) * A + B;
}

}  // namespace skr

#include "msl/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace msl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_query(const RateQuery& q) {
  if (q.rhos.empty() || q.rhos.size() != q.sizes.size())
    throw std::invalid_argument("RateQuery: rhos and sizes must be aligned and nonempty");
  for (std::size_t i = 0; i + 1 < q.rhos.size(); ++i)
    if (q.rhos[i] > q.rhos[i + 1])
      throw std::invalid_argument("RateQuery: rhos must be sorted ascending");
  for (double r : q.rhos)
    if (!(r >= 1.0)) throw std::invalid_argument("RateQuery: every rho must be >= 1");
  for (std::int64_t s : q.sizes)
    if (s < 0) throw std::invalid_argument("RateQuery: sizes must be nonnegative");
  if (q.sizes.front() < 1)
    throw std::invalid_argument("RateQuery: first ranked task must have a sample");
  if (q.beta < 0.0 || q.beta > 1.0)
    throw std::invalid_argument("RateQuery: beta in [0,1] required");
  if (q.vc < 1) throw std::invalid_argument("RateQuery: vc >= 1 required");
  if (!(q.delta > 0.0) || !(q.delta < 1.0))
    throw std::invalid_argument("RateQuery: delta in (0,1) required");
  if (!(q.C0 > 0.0)) throw std::invalid_argument("RateQuery: C0 > 0 required");
}

BoundValue minimize(std::vector<double> terms) {
  BoundValue b;
  b.per_t_terms = std::move(terms);
  b.argmin_t = 1;
  b.value = b.per_t_terms.front();
  for (std::size_t i = 1; i < b.per_t_terms.size(); ++i) {
    if (b.per_t_terms[i] < b.value) {
      b.value = b.per_t_terms[i];
      b.argmin_t = int(i) + 1;
    }
  }
  return b;
}

}  // namespace

double positive_log(double x) {
  if (x < 0.0) throw std::domain_error("positive_log: x >= 0 required");
  return x > 0.0 ? std::max(std::log(x), 1.0) : 1.0;
}

double eps(std::int64_t m, double delta, int vc) {
  if (m < 1) throw std::invalid_argument("eps: m >= 1 required");
  if (vc < 1) throw std::invalid_argument("eps: vc >= 1 required");
  if (!(delta > 0.0) || !(delta < 1.0)) throw std::invalid_argument("eps: delta in (0,1) required");
  const double md = double(m);
  return (vc / md) * positive_log(md / vc) + (1.0 / md) * positive_log(1.0 / delta);
}

double avg_rho(const std::vector<double>& rhos,
               const std::vector<std::int64_t>& sizes, int t) {
  if (rhos.size() != sizes.size())
    throw std::invalid_argument("avg_rho: rhos and sizes must be aligned");
  if (t < 1 || std::size_t(t) > rhos.size())
    throw std::out_of_range("avg_rho: t out of range");
  double weighted = 0.0;
  std::int64_t total = 0;
  for (int s = 0; s < t; ++s) {
    if (sizes[std::size_t(s)] == 0) continue;
    if (std::isinf(rhos[std::size_t(s)])) return kInf;
    weighted += rhos[std::size_t(s)] * double(sizes[std::size_t(s)]);
    total += sizes[std::size_t(s)];
  }
  if (total == 0) throw std::invalid_argument("avg_rho: empty prefix");
  return weighted / double(total);
}

BoundValue minimax_rate(const RateQuery& q) {
  check_query(q);
  const int T = int(q.rhos.size());
  std::vector<double> terms(static_cast<std::size_t>(T));
  std::int64_t Nt = 0;
  for (int t = 1; t <= T; ++t) {
    Nt += q.sizes[std::size_t(t) - 1];
    const double rbar = avg_rho(q.rhos, q.sizes, t);
    const double expo = std::isinf(rbar) ? 0.0 : 1.0 / ((2.0 - q.beta) * rbar);
    terms[std::size_t(t) - 1] = std::pow(double(Nt), -expo);
  }
  return minimize(std::move(terms));
}

BoundValue semi_adaptive_bound(const RateQuery& q) {
  check_query(q);
  const int T = int(q.rhos.size());
  std::vector<double> terms(static_cast<std::size_t>(T));
  std::int64_t Nt = 0;
  for (int t = 1; t <= T; ++t) {
    Nt += q.sizes[std::size_t(t) - 1];
    const double rbar = avg_rho(q.rhos, q.sizes, t);
    const double inner = 1024.0 * q.C0 * q.C0 * q.C0 * q.C0 * q.C_beta *
                         (q.vc * positive_log(double(Nt) / q.vc) +
                          positive_log(1.0 / q.delta)) /
                         double(Nt);
    const double expo = std::isinf(rbar) ? 0.0 : 1.0 / ((2.0 - q.beta) * rbar);
    terms[std::size_t(t) - 1] = q.C_rho * std::pow(inner, expo);
  }
  return minimize(std::move(terms));
}

BoundValue oracle_bound(const RateQuery& q) { return semi_adaptive_bound(q); }

BoundValue pooling_bound_beta1(const RateQuery& q) {
  check_query(q);
  const int T = int(q.rhos.size());
  std::int64_t total = 0;
  for (std::int64_t s : q.sizes) total += s;
  const double L = q.vc * positive_log(double(total) / q.vc) + positive_log(1.0 / q.delta);
  std::vector<double> terms(static_cast<std::size_t>(T));
  std::int64_t Nt = 0;
  for (int t = 1; t <= T; ++t) {
    Nt += q.sizes[std::size_t(t) - 1];
    const double rbar = avg_rho(q.rhos, q.sizes, t);
    const double inner = 32.0 * q.C0 * q.C0 * q.C_beta * L / double(Nt);
    const double expo = std::isinf(rbar) ? 0.0 : 1.0 / rbar;
    terms[std::size_t(t) - 1] = q.C_rho * std::pow(inner, expo);
  }
  return minimize(std::move(terms));
}

BoundValue quantile_pooling_bound(const RateQuery& q, double alpha) {
  check_query(q);
  if (!(alpha > 0.0) || alpha > 1.0)
    throw std::invalid_argument("quantile_pooling_bound: alpha in (0,1] required");
  const int T = int(q.rhos.size());
  std::int64_t total = 0;
  for (std::int64_t s : q.sizes) total += s;
  int t_alpha = T;
  std::int64_t Nt = 0;
  for (int t = 1; t <= T; ++t) {
    Nt += q.sizes[std::size_t(t) - 1];
    if (double(Nt) >= alpha * double(total)) {
      t_alpha = t;
      break;
    }
  }
  const double L = q.vc * positive_log(double(total) / q.vc) + positive_log(1.0 / q.delta);
  const double rbar = avg_rho(q.rhos, q.sizes, t_alpha);
  const double inner =
      std::pow(32.0 * q.C0 * q.C0 / alpha, 2.0 - q.beta) * q.C_beta * L / double(total);
  const double expo = std::isinf(rbar) ? 0.0 : 1.0 / ((2.0 - q.beta) * rbar);
  std::vector<double> terms(std::size_t(T), kInf);
  terms[std::size_t(t_alpha) - 1] = q.C_rho * std::pow(inner, expo);
  return minimize(std::move(terms));
}

BoundValue general_pooling_bound(const RateQuery& q) {
  check_query(q);
  const int T = int(q.rhos.size());
  std::int64_t total = 0;
  for (std::int64_t s : q.sizes) total += s;
  const double L = q.vc * positive_log(double(total) / q.vc) + positive_log(1.0 / q.delta);
  std::vector<double> terms(static_cast<std::size_t>(T));
  std::int64_t Nt = 0;
  for (int t = 1; t <= T; ++t) {
    Nt += q.sizes[std::size_t(t) - 1];
    const double rbar = avg_rho(q.rhos, q.sizes, t);
    // at beta = 1 this matches pooling_bound_beta1 bit for bit: pow(x,1) = x,
    // pow(total, -0) = 1, and the products associate identically
    const double inner = std::pow(32.0 * q.C0 * q.C0, 2.0 - q.beta) * q.C_beta * L /
                         (std::pow(double(Nt), 2.0 - q.beta) *
                          std::pow(double(total), -(1.0 - q.beta)));
    const double expo = std::isinf(rbar) ? 0.0 : 1.0 / ((2.0 - q.beta) * rbar);
    terms[std::size_t(t) - 1] = q.C_rho * std::pow(inner, expo);
  }
  return minimize(std::move(terms));
}

double kl_bernoulli(double p, double q) {
  if (!(p > 0.0) || !(p < 1.0) || !(q > 0.0) || !(q < 1.0))
    throw std::domain_error("kl_bernoulli: p, q in (0,1) required");
  return p * std::log(p / q) + (1.0 - p) * std::log((1.0 - p) / (1.0 - q));
}

double slud_lower_bound(std::int64_t m, double p, double m0) {
  if (m < 1) throw std::invalid_argument("slud_lower_bound: m >= 1 required");
  if (!(p > 0.0) || p > 0.5)
    throw std::domain_error("slud_lower_bound: p in (0, 1/2] required");
  if (m0 < 0.0 || m0 > double(m) * (1.0 - 2.0 * p))
    throw std::domain_error("slud_lower_bound: 0 <= m0 <= m(1-2p) required");
  return 0.25 * std::exp(-m0 * m0 / (double(m) * p * (1.0 - p)));
}

double binomial_tail_exact(std::int64_t m, double p, std::int64_t k) {
  if (m < 0) throw std::invalid_argument("binomial_tail_exact: m >= 0 required");
  if (p < 0.0 || p > 1.0)
    throw std::invalid_argument("binomial_tail_exact: p in [0,1] required");
  if (k < 0) return 1.0;
  if (k >= m) return 0.0;
  if (p == 0.0) return 0.0;
  if (p == 1.0) return 1.0;
  // cache lgamma(i+1) for i in [0, m]
  std::vector<double> lf(std::size_t(m) + 1);
  lf[0] = 0.0;
  for (std::int64_t i = 1; i <= m; ++i)
    lf[std::size_t(i)] = lf[std::size_t(i) - 1] + std::log(double(i));
  const double lp = std::log(p), lq = std::log1p(-p);
  double lse = -kInf;
  for (std::int64_t j = k + 1; j <= m; ++j) {
    const double lt = lf[std::size_t(m)] - lf[std::size_t(j)] - lf[std::size_t(m - j)] +
                      double(j) * lp + double(m - j) * lq;
    if (lt > lse) {
      lse = lt + std::log1p(std::exp(lse - lt));
    } else {
      lse = lse + std::log1p(std::exp(lt - lse));
    }
  }
  return std::min(1.0, std::exp(lse));
}

}  // namespace msl

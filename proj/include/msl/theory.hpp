#pragma once

#include <cstdint>
#include <vector>

namespace msl {

// max{ln x, 1}; defined as 1 for x = 0 so prefix formulas stay finite.
double positive_log(double x);

// (vc/m)*plog(m/vc) + (1/m)*plog(1/delta)
double eps(std::int64_t m, double delta, int vc);

// Size-weighted mean of the first t exponents (t is 1-based); +inf as soon as
// an infinite exponent carries positive weight. Zero-size entries are skipped.
double avg_rho(const std::vector<double>& rhos,
               const std::vector<std::int64_t>& sizes, int t);

struct RateQuery {
  std::vector<double> rhos;         // sorted ascending, +inf allowed
  std::vector<std::int64_t> sizes;  // aligned with rhos; first entry >= 1
  double beta = 1.0;
  int vc = 1;
  double delta = 0.05;
  double C_beta = 2.0;
  double C_rho = 2.0;
  double C0 = 1.0;
};

struct BoundValue {
  double value = 0.0;
  int argmin_t = 1;  // 1-based prefix length achieving the min
  std::vector<double> per_t_terms;
};

// min_t N_t^{-1/((2-beta)*rbar_t)}, constants dropped.
BoundValue minimax_rate(const RateQuery& q);

// min_t C_rho * (2^10 C0^4 C_beta (vc*plog(N_t/vc) + plog(1/delta)) / N_t)^{1/((2-beta)*rbar_t)}
BoundValue oracle_bound(const RateQuery& q);
BoundValue semi_adaptive_bound(const RateQuery& q);

// min_t C_rho * (32 C0^2 C_beta (vc*plog(total/vc) + plog(1/delta)) / N_t)^{1/rbar_t}
// (the low-noise pooling bound; beta is treated as 1)
BoundValue pooling_bound_beta1(const RateQuery& q);

// Single term at t(alpha) = smallest t with N_t >= alpha*total:
// C_rho * ((32 C0^2/alpha)^{2-beta} C_beta (vc*plog(total/vc) + plog(1/delta)) / total)^{1/((2-beta)*rbar_{t(alpha)})}
BoundValue quantile_pooling_bound(const RateQuery& q, double alpha);

// min_t C_rho * ((32 C0^2)^{2-beta} C_beta (vc*plog(total/vc) + plog(1/delta))
//                / (N_t^{2-beta} * total^{-(1-beta)}))^{1/((2-beta)*rbar_t)}
BoundValue general_pooling_bound(const RateQuery& q);

// p ln(p/q) + (1-p) ln((1-p)/(1-q)); throws on boundary parameters.
double kl_bernoulli(double p, double q);

// (1/4) exp(-m0^2 / (m p (1-p))); requires p in (0,1/2], 0 <= m0 <= m(1-2p).
double slud_lower_bound(std::int64_t m, double p, double m0);

// P(Bin(m,p) > k), summed stably in log space.
double binomial_tail_exact(std::int64_t m, double p, std::int64_t k);

}  // namespace msl

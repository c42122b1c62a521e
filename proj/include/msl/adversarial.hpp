#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "msl/distributions.hpp"
#include "msl/procedures.hpp"
#include "msl/rng.hpp"

namespace msl {

// Parameters of the two-point adaptivity-impossibility construction: a target
// D, a noisy source P mimicking it, and a benign decoy Q, mixed N_P : N_Q.
struct ImpossibilityParams {
  double beta = 0.0;
  std::int64_t n = 1;     // points per source dataset
  std::int64_t n_D = 0;   // target dataset size
  std::int64_t N_P = 48;  // P-component weight (count scale)
  std::int64_t N_Q = 16;  // Q-component weight
  double c0 = 0.25;
  double c1 = 1.0 / 1024.0;
  int sigma = -1;

  double eps() const;      // (n*N_P)^{-1/(2-beta)}
  double eps0() const;     // 1 ∧ n_D^{-1/(2-beta)}
  double alpha_P() const;  // N_P/(N_P+N_Q)
  double alpha_Q() const;
  double rho_P() const;    // ln(c1^{-(2-beta)} n N_P) / ln(c0^{-(2-beta)} (1 ∨ n_D))
};

// Hard range violations throw std::invalid_argument. Parameters that are legal
// but below the full-strength thresholds of the impossibility statement come
// back as warnings so desk-scale demos stay runnable.
std::vector<std::string> check_params(const ImpossibilityParams& p);

// D: mass eps0^b/2 at x1, eta(x1) = 1/2 + sigma*c0*eps0^{1-b};
// P: mass c1*eps^b,  eta(x1) = 1/2 + sigma*eps^{1-b};
// Q: mass 1,         eta(x1) = 1/2 + sigma/2;  eta(x0) = 1 everywhere.
void build_impossibility_tasks(const ImpossibilityParams& p, TaskDistribution& D,
                               TaskDistribution& P, TaskDistribution& Q);

struct GammaStats {
  std::int64_t N_plus = 0, N_minus = 0;              // homogeneous vector counts
  std::int64_t n_plus = 0, n_minus = 0;              // x1 label counts, all sources
  std::int64_t n_tilde_plus = 0, n_tilde_minus = 0;  // x1 labels outside homogeneous vectors
  std::int64_t target_plus = 0, target_minus = 0;    // x1 label counts in the target set
  // latent mixture bookkeeping; -1 when recovered from a materialized sample
  std::int64_t q_vectors = -1;
  std::int64_t p_homogeneous = -1;
};

// Materializes N = N_P + N_Q source datasets (component flipped per vector)
// plus the target dataset. Only for small N; the stats sampler below scales.
MultiSample sample_gamma(const ImpossibilityParams& p, Rng& rng);

GammaStats gamma_stats_of(const MultiSample& Z, const ImpossibilityParams& p);

// Draws GammaStats directly through binomial/multinomial composition without
// materializing vectors; distributionally identical to
// gamma_stats_of(sample_gamma(...)) and O(n^2) per draw regardless of N.
GammaStats sample_gamma_stats(const ImpossibilityParams& p, Rng& rng);

// log of the +/- mixture likelihood ratio, straight product over the sample.
double likelihood_ratio_direct(const MultiSample& Z, const ImpossibilityParams& p);

// Closed form from the sufficient statistics:
// (n+-n-)*ln(etaP+/etaP-) + (N+-N-)*ln G + (t+-t-)*ln(etaD+/etaD-),
// G = (aP*(w*etaP+)^n + aQ) / (aP*(w*etaP+)^n).
double likelihood_ratio_decomposed(const GammaStats& s, const ImpossibilityParams& p);

// Sign of the decomposed log-ratio with a certified decision: double
// evaluation with an error bound, escalated to 256- then 1024-bit floats when
// the margin is too small; unresolved or exact ties return -1.
int bayes_discriminant(const GammaStats& s, const ImpossibilityParams& p);

// Monte Carlo estimate of P(ratio favors +) under the sigma = -1 measure.
std::pair<double, double> estimate_flip_probability(const ImpossibilityParams& p,
                                                    std::int64_t reps, Rng& rng);

struct ImpossibilityReport {
  std::int64_t reps = 0;
  double flip_freq = 0.0, flip_se = 0.0;                  // P(discriminant = +)
  double nhat_gt_freq = 0.0, nhat_gt_se = 0.0;            // P(N+ > N-)
  double joint_event_freq = 0.0, joint_event_se = 0.0;    // P(E_P and E_Q)
  double target_event_freq = 0.0, target_event_se = 0.0;  // P(target ratio >= 1)
  double expected_hom_P = 0.0;                            // E[# homogeneous P vectors]
};

// One Monte Carlo pass collecting every event frequency the impossibility
// argument chains together. Requires sigma = -1.
ImpossibilityReport impossibility_report(const ImpossibilityParams& p,
                                         std::int64_t reps, Rng& rng);

struct EventReport {
  std::int64_t reps = 0;
  double expected_hom_P = 0.0;
  double ep_fail_freq = 0.0;  // how often # hom. P vectors left [E/2, 2E]
  double ep_chernoff = 0.0;   // stated bound 2*exp(-E/8)
  double eq_fail_freq = 0.0;  // how often # Q vectors exceeded 2*N_Q
  double eq_chernoff = 0.0;   // stated bound exp(-N_Q/3)
  bool ep_ok = false;         // fail_freq <= bound + 3*se
  bool eq_ok = false;
};

EventReport verify_event_probabilities(const ImpossibilityParams& p,
                                       std::int64_t reps, Rng& rng);

// Greedy packing of {-1,+1}^d with pairwise Hamming distance >= ceil(d/8),
// starting from the all-ones vector and scanning lexicographically downward.
// Supports 8 <= d <= 24 (bitmap-sized search space).
std::vector<std::vector<std::int8_t>> vg_packing(int d);

bool verify_packing_distance(const std::vector<std::vector<std::int8_t>>& vecs,
                             int min_dist);

// Source tasks = N_Q benign copies, then N_P mimics, target last; class is the
// two-member table class {x1 -> +1, x1 -> -1}. Throws std::length_error above
// 2^21 tasks — use sample_gamma_stats for the aggregate-count regime.
MultisourceInstance build_impossibility_instance(const ImpossibilityParams& p);

// Packing element sigma_index drives make_lower_bound_family; the class is one
// table member per packing vector. Source sample sizes default to 1 each
// (callers resize); target size defaults to 1.
MultisourceInstance build_lower_bound_instance(const std::vector<double>& rhos,
                                               double beta, int d,
                                               std::size_t sigma_index,
                                               double epsilon);

}  // namespace msl

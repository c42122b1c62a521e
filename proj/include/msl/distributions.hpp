#pragma once
#include <cstdint>
#include <utility>
#include <variant>
#include <vector>

#include "msl/hypothesis.hpp"
#include "msl/rng.hpp"

namespace msl {

// Joint (X, Y) distribution over the support {x0, x1}; point ids 0 and 1.
// eta_* is P(Y = +1 | X = x*).
struct TwoPointTask {
  double mass_x1 = 0.5;
  double eta_x1 = 0.5;
  double eta_x0 = 1.0;
};

// Support {x0, x1, ..., xd} with point ids 0..d.
struct FinitePointsTask {
  std::vector<double> masses;  // sums to 1 within 1e-12
  std::vector<double> etas;    // P(Y=+1 | x_i)
};

struct UniformMarginal {
  double a = 0.0, b = 1.0;
};

// Density rho * x^{rho-1} / b^rho on (0, b]; zero mass at and below 0.
struct PowerLawMarginal {
  double rho = 1.0, b = 1.0;
};

using ThresholdMarginal = std::variant<UniformMarginal, PowerLawMarginal>;

// Labels follow the threshold h* at hstar_cut (orientation positive_side),
// flipped with probability flip_below / flip_above on the respective side of
// the cut. Realizable tasks have both flip probabilities 0; flip
// probabilities must stay below 1/2 so h* remains Bayes-optimal.
struct ThresholdTask {
  ThresholdMarginal marginal;
  double hstar_cut = 0.0;
  Side positive_side = Side::right;
  double flip_below = 0.0;
  double flip_above = 0.0;
};

using TaskDistribution = std::variant<TwoPointTask, FinitePointsTask, ThresholdTask>;

LabeledSample sample(const TaskDistribution& dist, std::int64_t n, Rng& rng);

// Exact population risk / best-in-class hypothesis / excess risk, all in
// closed form. Throws std::invalid_argument on unsupported pairings
// (e.g. a Table hypothesis against a continuous-marginal task).
double population_risk(const Hypothesis& h, const TaskDistribution& dist);
Hypothesis bayes_in_class(const TaskDistribution& dist, const HypothesisClass& cls);
double population_excess_risk(const Hypothesis& h, const TaskDistribution& dist,
                              const HypothesisClass& cls);

// Marginal mass of {x : h(x) != h2(x)}.
double population_disagreement(const Hypothesis& h, const Hypothesis& h2,
                               const TaskDistribution& dist);

struct ConditionReport {
  bool holds = false;
  Hypothesis worst_hypothesis;
  double worst_ratio = 0.0;  // <= 1 iff holds; may be +infinity
  int grid_size = 0;
};

// Checks P(h != h*) <= C_beta * E(h)^beta over the grid. Zero-excess
// hypotheses with positive disagreement produce an infinite ratio (1/0
// convention); beta = 0 uses E^0 = 1 even at E = 0.
ConditionReport validate_bernstein(const TaskDistribution& dist,
                                   const HypothesisClass& cls, double C_beta,
                                   double beta,
                                   const std::vector<Hypothesis>& grid);

// Checks E_target(h) <= C_rho * E_source(h)^{1/rho} over the grid;
// rho may be +infinity (1/rho = 0, the trivially valid exponent).
ConditionReport validate_transfer_exponent(const TaskDistribution& source,
                                           const TaskDistribution& target,
                                           const HypothesisClass& cls,
                                           double C_rho, double rho,
                                           const std::vector<Hypothesis>& grid);

// Smallest rho for which validate_transfer_exponent holds, located by
// bisection on a logarithmic bracket to relative tolerance 1e-3.
// Returns +infinity when no finite exponent on the bracket validates.
double estimate_min_rho(const TaskDistribution& source,
                        const TaskDistribution& target,
                        const HypothesisClass& cls, double C_rho,
                        const std::vector<Hypothesis>& grid);

// Hypothesis grid for the validators: finite classes list every member;
// threshold classes get `n` cuts placed geometrically around the center
// task's Bayes cut, where the conditions bind (offsets span 1e-12..1 of the
// available room on each side).
std::vector<Hypothesis> validation_grid(const HypothesisClass& cls,
                                        const TaskDistribution& center,
                                        int n = 200);

// Source/target pair exhibiting asymmetric transfer (sigma = -1 variant):
// eps = n_P^{-1/(2-beta)}; target has mass 1/2 at x1 with eta 1/4; the source
// concentrates mass eps^beta at x1 with eta 1/2 - c2 * eps^{1-beta}. Both share
// the x1-negative best-in-class hypothesis. Requires beta in [0,1), n_P >= 1,
// 0 < c2 <= 1/(8*sqrt(2)).
std::pair<TaskDistribution, TaskDistribution> make_asymmetry_pair(double beta,
                                                                  std::int64_t n_P,
                                                                  double c2);

// Family of FinitePoints tasks over {x0..xd}: task t has mass eps^{rho_t*beta}
// split evenly over x1..xd, label probabilities 1/2 + sigma_i *
// eps^{rho_t(1-beta)} / 2 there, and deterministic +1 at x0. rho = +infinity
// degenerates to a point mass at (x0, +1). Requires every rho >= 1, d >= 1,
// eps in (0,1), sigma of length d.
std::vector<TaskDistribution> make_lower_bound_family(
    const std::vector<double>& rhos, double beta, double epsilon, int d,
    const std::vector<std::int8_t>& sigma);

}  // namespace msl

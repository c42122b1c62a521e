#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "msl/distributions.hpp"
#include "msl/hypothesis.hpp"
#include "msl/rng.hpp"

namespace msl {

// N sources plus the target, which is always the LAST entry.
struct MultisourceInstance {
  std::vector<TaskDistribution> tasks;
  std::vector<std::int64_t> sample_sizes;  // last entry = n_D >= 0, others >= 1
  std::vector<double> declared_rhos;       // last entry == 1 (target vs itself)
  double beta = 1.0;
  double C_beta = 2.0;
  double C_rho = 2.0;
  HypothesisClass cls;
};

struct MultiSample {
  std::vector<LabeledSample> datasets;
};

struct Ranking {
  // order[k] = original task index of the (k+1)-th smallest declared rho;
  // ties keep task order.
  std::vector<int> order;
};

enum class Fallback { AnyHypothesis, PooledERM };

struct ProcedureConfig {
  double C0 = 1.0;
  double delta = 0.05;
  Fallback fallback = Fallback::PooledERM;
};

struct ProcedureResult {
  Hypothesis h;
  bool degenerate = false;     // learner had no data to work with
  bool used_fallback = false;  // rank-based intersection was empty
};

struct InstanceCheck {
  bool shared_optimum = false;  // one best-in-class hypothesis fits every task
  bool transfer_ok = false;     // declared (C_rho, rho_t) hold against the target
  bool bernstein_ok = false;    // (C_beta, beta) holds for every task
  std::string detail;           // first failure, empty when all pass
  bool ok() const { return shared_optimum && transfer_ok && bernstein_ok; }
};

InstanceCheck validate_instance(const MultisourceInstance& inst, int grid_n = 200);

MultiSample draw_multisample(const MultisourceInstance& inst, Rng& rng);

Ranking make_ranking(const std::vector<double>& declared_rhos);

ProcedureResult target_only_erm(const HypothesisClass& cls, const MultiSample& Z);

ProcedureResult pool_erm(const HypothesisClass& cls, const MultiSample& Z);

LabeledSample prefix_sample(const MultiSample& Z, const Ranking& ranking, int t);

// argmin over prefix lengths of the constant-bearing rate expression; the
// inputs must already be in ranked order. Ties break toward smaller t.
int oracle_select_t_star(const std::vector<double>& ranked_rhos,
                         const std::vector<std::int64_t>& ranked_sizes,
                         double beta, double C_beta, double C_rho, int vc,
                         const ProcedureConfig& config);

ProcedureResult oracle_procedure(const MultisourceInstance& inst,
                                 const MultiSample& Z, const Ranking& ranking,
                                 const ProcedureConfig& config);

// Membership of h in the radius constraint set built from the first t ranked
// datasets pooled together (delta_t = delta/(6 t^2)); an empty prefix accepts
// everything.
bool constraint_set_contains(const HypothesisClass& cls, const Hypothesis& h,
                             const LabeledSample& Z_prefix, int t,
                             const ProcedureConfig& config);

ProcedureResult rank_based_procedure(const HypothesisClass& cls,
                                     const MultiSample& Z,
                                     const Ranking& ranking,
                                     const ProcedureConfig& config);

// Streaming specialization of rank_based_procedure for a two-member table
// class over support {x0, x1} whose members agree at x0. One pass over the
// ranked datasets instead of one ERM per prefix; required for instances with
// tens of thousands of tasks.
ProcedureResult rank_based_two_point_fast(const HypothesisClass& cls,
                                          const MultiSample& Z,
                                          const Ranking& ranking,
                                          const ProcedureConfig& config);

}  // namespace msl

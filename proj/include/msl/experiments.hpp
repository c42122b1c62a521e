#pragma once
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "msl/config.hpp"
#include "msl/procedures.hpp"

namespace msl {

inline constexpr const char* kVersion = "msl 1.0.0";

// Raised when instance assumptions fail pre-run checks; the CLI maps it to
// exit code 3. --force downgrades it to a report warning.
struct ValidationFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Command-line overrides applied on top of the config file.
struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> reps;
  int threads = 1;
  bool force = false;
};

struct RunMeta {
  std::string experiment;
  std::string config_hash;
  std::uint64_t master_seed = 0;
  std::int64_t replications = 0;
  std::string version = kVersion;
};

struct RateRow {
  double sweep = 0.0;  // sweep-axis value (n, N, or total sample count)
  std::string procedure;
  double mean = 0.0;  // mean target excess risk over replications
  double se = 0.0;
  std::int64_t reps = 0;
  bool clamped = false;  // all-zero mean replaced by the Monte Carlo floor
};

struct RateFit {
  std::string procedure;
  double slope = 0.0;
  double band = 0.0;  // 95% half-width (delta method from the row stderrs)
  int points_used = 0;
};

struct RateReport {
  RunMeta meta;
  std::string sweep_axis;  // "n" | "N" | "total"
  std::vector<RateRow> rows;
  std::vector<RateFit> fits;
  std::vector<std::string> warnings;
};

struct FitPoint {
  double x = 0.0;
  double mean = 0.0;
  double se = 0.0;
};

// Least squares on (ln x, ln mean). Points with mean <= 0 are dropped with a
// warning; fewer than 4 surviving points is an error. The band is the 95%
// half-width propagated from the stderrs by the delta method.
RateFit fit_rate_exponent(const std::vector<FitPoint>& pts,
                          const std::string& procedure,
                          std::vector<std::string>* warnings);

struct AsymmetryRow {
  std::string learner;  // "pooled" | "source_only" | "target_only"
  double target_excess_mean = 0.0, target_excess_se = 0.0;
  double source_excess_mean = 0.0, source_excess_se = 0.0;
  double wrong_at_x1_freq = 0.0, wrong_at_x1_se = 0.0;
};

struct AsymmetryReport {
  RunMeta meta;
  bool swap_target = false;  // measure both risks with roles exchanged
  std::int64_t n_P = 0, n_D = 0;
  std::vector<AsymmetryRow> rows;
  std::vector<std::string> warnings;
};

struct AdaptivityRow {
  std::string procedure;  // "pooled" | "rank_based"
  double target_excess_mean = 0.0, target_excess_se = 0.0;
  double wrong_at_x1_freq = 0.0, wrong_at_x1_se = 0.0;
};

struct AdaptivityReport {
  RunMeta meta;
  bool procedures_run = false;  // false when the instance is too large to materialize
  std::vector<AdaptivityRow> rows;
  std::int64_t flip_reps = 0;
  double flip_freq = 0.0, flip_se = 0.0;
  double flip_floor = 0.0;         // 1/(12*96*84), the certified lower bound
  double rank_rate_ceiling = 0.0;  // (n*N_Q)^{-1/(2-beta)} reference scale
  std::vector<std::string> warnings;
};

struct BoundsRow {
  std::string name;
  double value = 0.0;
  int argmin_t = 0;  // 0 when the calculator has no prefix argument
  std::vector<double> per_t_terms;
};

struct BoundsReport {
  RunMeta meta;
  std::vector<BoundsRow> rows;
};

struct PackReport {
  RunMeta meta;
  int d = 0;
  int min_distance = 0;
  bool distance_verified = false;
  std::vector<std::vector<std::int8_t>> vectors;
};

struct ValidateReport {
  RunMeta meta;
  std::string family;
  bool shared_optimum = false, transfer_ok = false, bernstein_ok = false;
  std::string detail;
  std::vector<std::string> warnings;
  bool ok() const { return shared_optimum && transfer_ok && bernstein_ok; }
};

// Experiment drivers. Each parses and schema-checks its config (ConfigError on
// problems), re-checks instance assumptions before sampling
// (ValidationFailure unless opts.force), then runs the Monte Carlo with
// replication streams hash64({master_seed, experiment_id, sweep_index, rep})
// so results do not depend on opts.threads.
RateReport run_rate_experiment(const Config& cfg, const RunOptions& opts);
AsymmetryReport run_asymmetry_experiment(const Config& cfg, const RunOptions& opts);
AdaptivityReport run_adaptivity_experiment(const Config& cfg, const RunOptions& opts);
BoundsReport run_bounds(const Config& cfg);
PackReport run_pack(const Config& cfg);
ValidateReport run_validate(const Config& cfg);

}  // namespace msl

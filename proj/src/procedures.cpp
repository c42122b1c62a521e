#include "msl/procedures.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "msl/theory.hpp"

namespace msl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_structure(const MultisourceInstance& inst) {
  const std::size_t T = inst.tasks.size();
  if (T < 1) throw std::invalid_argument("instance: needs at least the target task");
  if (inst.sample_sizes.size() != T || inst.declared_rhos.size() != T)
    throw std::invalid_argument("instance: sizes/rhos must align with tasks");
  for (std::size_t i = 0; i + 1 < T; ++i)
    if (inst.sample_sizes[i] < 1)
      throw std::invalid_argument("instance: source sample sizes must be >= 1");
  if (inst.sample_sizes.back() < 0)
    throw std::invalid_argument("instance: target sample size must be >= 0");
  for (double r : inst.declared_rhos)
    if (!(r >= 1.0)) throw std::invalid_argument("instance: declared rhos must be >= 1");
  if (inst.declared_rhos.back() != 1.0)
    throw std::invalid_argument("instance: the target's declared rho must be 1");
}

std::string describe_task(std::size_t i, std::size_t T) {
  char buf[64];
  if (i + 1 == T)
    std::snprintf(buf, sizeof buf, "target task");
  else
    std::snprintf(buf, sizeof buf, "source task %zu", i + 1);
  return buf;
}

}  // namespace

InstanceCheck validate_instance(const MultisourceInstance& inst, int grid_n) {
  check_structure(inst);
  const std::size_t T = inst.tasks.size();
  const TaskDistribution& target = inst.tasks.back();
  const Hypothesis hstar = bayes_in_class(target, inst.cls);
  InstanceCheck out;
  out.shared_optimum = true;
  out.transfer_ok = true;
  out.bernstein_ok = true;
  char buf[160];
  for (std::size_t i = 0; i < T && out.shared_optimum; ++i) {
    const double e = population_excess_risk(hstar, inst.tasks[i], inst.cls);
    if (e > 1e-12) {
      out.shared_optimum = false;
      std::snprintf(buf, sizeof buf, "%s does not share the target optimum (excess %.3g)",
                    describe_task(i, T).c_str(), e);
      out.detail = buf;
    }
  }
  const std::vector<Hypothesis> grid = validation_grid(inst.cls, target, grid_n);
  for (std::size_t i = 0; i < T && out.transfer_ok; ++i) {
    const ConditionReport rep = validate_transfer_exponent(
        inst.tasks[i], target, inst.cls, inst.C_rho, inst.declared_rhos[i], grid);
    if (!rep.holds) {
      out.transfer_ok = false;
      std::snprintf(buf, sizeof buf,
                    "%s violates the declared transfer exponent %.4g (worst ratio %.4g)",
                    describe_task(i, T).c_str(), inst.declared_rhos[i], rep.worst_ratio);
      if (out.detail.empty()) out.detail = buf;
    }
  }
  for (std::size_t i = 0; i < T && out.bernstein_ok; ++i) {
    const ConditionReport rep =
        validate_bernstein(inst.tasks[i], inst.cls, inst.C_beta, inst.beta, grid);
    if (!rep.holds) {
      out.bernstein_ok = false;
      std::snprintf(buf, sizeof buf,
                    "%s violates the noise condition beta=%.4g (worst ratio %.4g)",
                    describe_task(i, T).c_str(), inst.beta, rep.worst_ratio);
      if (out.detail.empty()) out.detail = buf;
    }
  }
  return out;
}

MultiSample draw_multisample(const MultisourceInstance& inst, Rng& rng) {
  check_structure(inst);
  MultiSample Z;
  Z.datasets.reserve(inst.tasks.size());
  for (std::size_t i = 0; i < inst.tasks.size(); ++i)
    Z.datasets.push_back(sample(inst.tasks[i], inst.sample_sizes[i], rng));
  return Z;
}

Ranking make_ranking(const std::vector<double>& declared_rhos) {
  Ranking r;
  r.order.resize(declared_rhos.size());
  std::iota(r.order.begin(), r.order.end(), 0);
  std::stable_sort(r.order.begin(), r.order.end(), [&](int a, int b) {
    return declared_rhos[std::size_t(a)] < declared_rhos[std::size_t(b)];
  });
  return r;
}

ProcedureResult target_only_erm(const HypothesisClass& cls, const MultiSample& Z) {
  if (Z.datasets.empty()) throw std::invalid_argument("target_only_erm: empty multisample");
  const ErmResult er = erm(cls, Z.datasets.back());
  return {er.h, er.degenerate, false};
}

ProcedureResult pool_erm(const HypothesisClass& cls, const MultiSample& Z) {
  LabeledSample pooled;
  for (const auto& ds : Z.datasets) pooled.append(ds);
  const ErmResult er = erm(cls, pooled);
  return {er.h, er.degenerate, false};
}

LabeledSample prefix_sample(const MultiSample& Z, const Ranking& ranking, int t) {
  if (ranking.order.size() != Z.datasets.size())
    throw std::invalid_argument("prefix_sample: ranking does not match the multisample");
  if (t < 1 || std::size_t(t) > ranking.order.size())
    throw std::out_of_range("prefix_sample: t out of range");
  LabeledSample s;
  for (int k = 0; k < t; ++k) s.append(Z.datasets[std::size_t(ranking.order[std::size_t(k)])]);
  return s;
}

int oracle_select_t_star(const std::vector<double>& ranked_rhos,
                         const std::vector<std::int64_t>& ranked_sizes,
                         double beta, double C_beta, double C_rho, int vc,
                         const ProcedureConfig& config) {
  if (ranked_rhos.empty() || ranked_rhos.size() != ranked_sizes.size())
    throw std::invalid_argument("oracle_select_t_star: bad ranked inputs");
  const int T = int(ranked_rhos.size());
  int best_t = 1;
  double best = kInf;
  std::int64_t Nt = 0;
  for (int t = 1; t <= T; ++t) {
    Nt += ranked_sizes[std::size_t(t) - 1];
    double term;
    if (Nt == 0) {
      term = kInf;  // an empty prefix has nothing to learn from
    } else {
      const double rbar = avg_rho(ranked_rhos, ranked_sizes, t);
      const double inner = 1024.0 * config.C0 * config.C0 * config.C0 * config.C0 *
                           C_beta *
                           (vc * positive_log(double(Nt) / vc) +
                            positive_log(1.0 / config.delta)) /
                           double(Nt);
      const double expo = std::isinf(rbar) ? 0.0 : 1.0 / ((2.0 - beta) * rbar);
      term = C_rho * std::pow(inner, expo);
    }
    if (term < best) {
      best = term;
      best_t = t;
    }
  }
  return best_t;
}

ProcedureResult oracle_procedure(const MultisourceInstance& inst,
                                 const MultiSample& Z, const Ranking& ranking,
                                 const ProcedureConfig& config) {
  check_structure(inst);
  std::vector<double> ranked_rhos;
  std::vector<std::int64_t> ranked_sizes;
  ranked_rhos.reserve(ranking.order.size());
  ranked_sizes.reserve(ranking.order.size());
  for (int idx : ranking.order) {
    ranked_rhos.push_back(inst.declared_rhos[std::size_t(idx)]);
    ranked_sizes.push_back(inst.sample_sizes[std::size_t(idx)]);
  }
  const int t_star =
      oracle_select_t_star(ranked_rhos, ranked_sizes, inst.beta, inst.C_beta,
                           inst.C_rho, vc_dimension(inst.cls), config);
  const LabeledSample prefix = prefix_sample(Z, ranking, t_star);
  const ErmResult er = erm(inst.cls, prefix);
  return {er.h, er.degenerate, false};
}

bool constraint_set_contains(const HypothesisClass& cls, const Hypothesis& h,
                             const LabeledSample& Z_prefix, int t,
                             const ProcedureConfig& config) {
  if (t < 1) throw std::out_of_range("constraint_set_contains: t >= 1 required");
  if (Z_prefix.empty()) return true;
  const double delta_t = config.delta / (6.0 * double(t) * double(t));
  const double e = eps(std::int64_t(Z_prefix.size()), delta_t, vc_dimension(cls));
  const ErmResult hat = erm(cls, Z_prefix);
  const double excess = excess_empirical_risk(h, hat.h, Z_prefix);
  const double p_hat = empirical_disagreement(h, hat.h, Z_prefix);
  return excess <= config.C0 * std::sqrt(p_hat * e) + config.C0 * e;
}

ProcedureResult rank_based_procedure(const HypothesisClass& cls,
                                     const MultiSample& Z,
                                     const Ranking& ranking,
                                     const ProcedureConfig& config) {
  if (ranking.order.size() != Z.datasets.size())
    throw std::invalid_argument("rank_based_procedure: ranking does not match the multisample");
  const int T = int(Z.datasets.size());
  LabeledSample pooled;
  for (const auto& ds : Z.datasets) pooled.append(ds);
  if (pooled.empty()) {
    const ErmResult er = erm(cls, pooled);
    return {er.h, true, false};
  }
  std::vector<Hypothesis> candidates = distinct_behaviors(cls, pooled);
  std::vector<double> pooled_risk(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i)
    pooled_risk[i] = empirical_risk(candidates[i], pooled);
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return pooled_risk[a] < pooled_risk[b]; });

  std::vector<char> alive(candidates.size(), 1);
  std::size_t alive_count = candidates.size();
  LabeledSample prefix;
  const int vc = vc_dimension(cls);
  for (int t = 1; t <= T && alive_count > 0; ++t) {
    prefix.append(Z.datasets[std::size_t(ranking.order[std::size_t(t) - 1])]);
    if (prefix.empty()) continue;  // empty prefixes accept everything
    const double delta_t = config.delta / (6.0 * double(t) * double(t));
    const double e = eps(std::int64_t(prefix.size()), delta_t, vc);
    const ErmResult hat = erm(cls, prefix);
    const double hat_risk = empirical_risk(hat.h, prefix);
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (!alive[i]) continue;
      const double excess = empirical_risk(candidates[i], prefix) - hat_risk;
      const double p_hat = empirical_disagreement(candidates[i], hat.h, prefix);
      if (!(excess <= config.C0 * std::sqrt(p_hat * e) + config.C0 * e)) {
        alive[i] = 0;
        --alive_count;
      }
    }
  }
  for (std::size_t i : order)
    if (alive[i]) return {candidates[i], false, false};
  if (config.fallback == Fallback::PooledERM) {
    const ErmResult er = erm(cls, pooled);
    return {er.h, er.degenerate, true};
  }
  return {candidates[order.front()], false, true};
}

ProcedureResult rank_based_two_point_fast(const HypothesisClass& cls,
                                          const MultiSample& Z,
                                          const Ranking& ranking,
                                          const ProcedureConfig& config) {
  const auto* fc = std::get_if<FiniteClass>(&cls);
  if (!fc || fc->support_size != 2 || fc->members.size() != 2 ||
      fc->members[0].labels.size() != 2 || fc->members[1].labels.size() != 2 ||
      fc->members[0].labels[0] != fc->members[1].labels[0] ||
      fc->members[0].labels[1] == fc->members[1].labels[1])
    throw std::invalid_argument(
        "rank_based_two_point_fast: needs a two-member table class on two points "
        "agreeing at x0");
  if (ranking.order.size() != Z.datasets.size())
    throw std::invalid_argument("rank_based_two_point_fast: ranking does not match the multisample");
  const int T = int(Z.datasets.size());
  const int l0 = fc->members[0].labels[0];
  // per-member error count at x1 given (c1p, c1m)
  const int l1[2] = {fc->members[0].labels[1], fc->members[1].labels[1]};

  struct Step {
    std::int64_t m, c1p, c1m, c0err;
    double eps_t;
  };
  std::vector<Step> steps;
  steps.reserve(std::size_t(T));
  const int vc = vc_dimension(cls);
  std::int64_t m = 0, c1p = 0, c1m = 0, c0err = 0;
  for (int t = 1; t <= T; ++t) {
    const LabeledSample& ds = Z.datasets[std::size_t(ranking.order[std::size_t(t) - 1])];
    for (std::size_t i = 0; i < ds.size(); ++i) {
      ++m;
      if (ds.x[i] == 1.0) {
        (ds.y[i] > 0 ? c1p : c1m)++;
      } else if (ds.x[i] == 0.0) {
        c0err += ds.y[i] != l0;
      } else {
        throw std::invalid_argument("rank_based_two_point_fast: sample off the two-point support");
      }
    }
    const double delta_t = config.delta / (6.0 * double(t) * double(t));
    steps.push_back({m, c1p, c1m, c0err, m > 0 ? eps(m, delta_t, vc) : kInf});
  }
  if (m == 0) return {fc->members[0], true, false};

  auto err1 = [&](int j, const Step& s) -> std::int64_t {
    return l1[j] > 0 ? s.c1m : s.c1p;
  };
  // candidate order: pooled empirical risk, ties by member index
  const Step& last = steps.back();
  const double pooled_risk[2] = {double(err1(0, last) + last.c0err) / double(last.m),
                                 double(err1(1, last) + last.c0err) / double(last.m)};
  int order2[2] = {0, 1};
  if (pooled_risk[1] < pooled_risk[0]) std::swap(order2[0], order2[1]);

  for (int oi = 0; oi < 2; ++oi) {
    const int j = order2[oi];
    bool ok = true;
    for (const Step& s : steps) {
      if (s.m == 0) continue;
      const std::int64_t e0 = err1(0, s), e1 = err1(1, s);
      const int jh = e1 < e0 ? 1 : 0;  // prefix ERM, first member on ties
      // same double arithmetic as the generic path: risks first, then subtract
      const double excess = double(err1(j, s) + s.c0err) / double(s.m) -
                            double(err1(jh, s) + s.c0err) / double(s.m);
      const double p_hat = j == jh ? 0.0 : double(s.c1p + s.c1m) / double(s.m);
      if (!(excess <= config.C0 * std::sqrt(p_hat * s.eps_t) + config.C0 * s.eps_t)) {
        ok = false;
        break;
      }
    }
    if (ok) return {fc->members[std::size_t(j)], false, false};
  }
  // both fallbacks coincide here: the pooled ERM of this class is exactly the
  // min-pooled-risk member, which is also the first candidate
  return {fc->members[std::size_t(order2[0])], false, true};
}

}  // namespace msl

#include "msl/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace msl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double marginal_cdf(const ThresholdMarginal& m, double x) {
  if (const auto* u = std::get_if<UniformMarginal>(&m)) {
    if (x <= u->a) return 0.0;
    if (x >= u->b) return 1.0;
    return (x - u->a) / (u->b - u->a);
  }
  const auto& p = std::get<PowerLawMarginal>(m);
  if (x <= 0.0) return 0.0;
  if (x >= p.b) return 1.0;
  return std::pow(x / p.b, p.rho);
}

double flip_prob(const ThresholdTask& t, double x) {
  return x < t.hstar_cut ? t.flip_below : t.flip_above;
}

// P(h(x) != Y | X = x) for a threshold task.
double pointwise_error(const ThresholdTask& t, const Hypothesis& h, double x) {
  const Threshold hstar{t.hstar_cut, t.positive_side};
  const double q = flip_prob(t, x);
  return predict(h, x) == predict(hstar, x) ? q : 1.0 - q;
}

// R(h) - R(h2) under a threshold task, integrated segment by segment over the
// breakpoints of both hypotheses and the task's cut. The per-segment error
// difference is formed before scaling by the segment mass, so segments where
// the hypotheses agree contribute exactly zero.
double threshold_risk_difference(const ThresholdTask& t, const Hypothesis& h,
                                 const Hypothesis& h2) {
  const double c1 = std::get<Threshold>(h).cut;
  const double c2 = std::get<Threshold>(h2).cut;
  double brk[3] = {t.hstar_cut, c1, c2};
  std::sort(brk, brk + 3);
  double acc = 0.0;
  double lo = -kInf;
  for (int seg = 0; seg <= 3; ++seg) {
    const double hi = seg < 3 ? brk[seg] : kInf;
    if (hi <= lo) continue;
    double rep;
    if (std::isinf(lo) && std::isinf(hi))
      rep = 0.0;
    else if (std::isinf(lo))
      rep = hi - 1.0;
    else if (std::isinf(hi))
      rep = lo + 1.0;
    else
      rep = 0.5 * (lo + hi);
    const double d = pointwise_error(t, h, rep) - pointwise_error(t, h2, rep);
    if (d != 0.0)
      acc += d * (marginal_cdf(t.marginal, hi) - marginal_cdf(t.marginal, lo));
    lo = hi;
  }
  return acc;
}

double discrete_mass(const TaskDistribution& dist, std::size_t i) {
  if (const auto* tp = std::get_if<TwoPointTask>(&dist))
    return i == 0 ? 1.0 - tp->mass_x1 : tp->mass_x1;
  return std::get<FinitePointsTask>(dist).masses.at(i);
}

double discrete_eta(const TaskDistribution& dist, std::size_t i) {
  if (const auto* tp = std::get_if<TwoPointTask>(&dist))
    return i == 0 ? tp->eta_x0 : tp->eta_x1;
  return std::get<FinitePointsTask>(dist).etas.at(i);
}

std::size_t support_size(const TaskDistribution& dist) {
  if (std::holds_alternative<TwoPointTask>(dist)) return 2;
  return std::get<FinitePointsTask>(dist).masses.size();
}

bool is_discrete(const TaskDistribution& dist) {
  return !std::holds_alternative<ThresholdTask>(dist);
}

[[noreturn]] void unsupported(const char* what) {
  throw std::invalid_argument(std::string("unsupported family: ") + what);
}

}  // namespace

LabeledSample sample(const TaskDistribution& dist, std::int64_t n, Rng& rng) {
  LabeledSample S;
  if (n <= 0) return S;
  S.x.reserve(std::size_t(n));
  S.y.reserve(std::size_t(n));
  if (const auto* t = std::get_if<ThresholdTask>(&dist)) {
    const Threshold hstar{t->hstar_cut, t->positive_side};
    for (std::int64_t i = 0; i < n; ++i) {
      double x;
      if (const auto* u = std::get_if<UniformMarginal>(&t->marginal)) {
        x = rng.uniform(u->a, u->b);
      } else {
        const auto& p = std::get<PowerLawMarginal>(t->marginal);
        x = p.b * std::pow(1.0 - rng.uniform01(), 1.0 / p.rho);  // inverse CDF, x > 0
      }
      int y = predict(hstar, x);
      if (rng.bernoulli(flip_prob(*t, x))) y = -y;
      S.push_back(x, y);
    }
    return S;
  }
  const std::size_t k = support_size(dist);
  for (std::int64_t i = 0; i < n; ++i) {
    const double u = rng.uniform01();
    double cum = 0.0;
    std::size_t idx = k - 1;
    for (std::size_t j = 0; j < k; ++j) {
      cum += discrete_mass(dist, j);
      if (u < cum) {
        idx = j;
        break;
      }
    }
    const int y = rng.bernoulli(discrete_eta(dist, idx)) ? +1 : -1;
    S.push_back(double(idx), y);
  }
  return S;
}

double population_risk(const Hypothesis& h, const TaskDistribution& dist) {
  if (is_discrete(dist)) {
    if (!std::holds_alternative<Table>(h)) unsupported("discrete task needs a Table hypothesis");
    double r = 0.0;
    for (std::size_t i = 0; i < support_size(dist); ++i) {
      const double eta = discrete_eta(dist, i);
      r += discrete_mass(dist, i) * (predict(h, double(i)) > 0 ? 1.0 - eta : eta);
    }
    return r;
  }
  const auto& t = std::get<ThresholdTask>(dist);
  if (!std::holds_alternative<Threshold>(h)) unsupported("threshold task needs a Threshold hypothesis");
  // risk differences are exact; absolute risk integrates error prob directly
  double brk[2] = {t.hstar_cut, std::get<Threshold>(h).cut};
  std::sort(brk, brk + 2);
  double acc = 0.0, lo = -kInf;
  for (int seg = 0; seg <= 2; ++seg) {
    const double hi = seg < 2 ? brk[seg] : kInf;
    if (hi <= lo) continue;
    const double rep = std::isinf(lo) ? hi - 1.0 : (std::isinf(hi) ? lo + 1.0 : 0.5 * (lo + hi));
    acc += pointwise_error(t, h, rep) * (marginal_cdf(t.marginal, hi) - marginal_cdf(t.marginal, lo));
    lo = hi;
  }
  return acc;
}

double population_disagreement(const Hypothesis& h, const Hypothesis& h2,
                               const TaskDistribution& dist) {
  if (is_discrete(dist)) {
    double m = 0.0;
    for (std::size_t i = 0; i < support_size(dist); ++i)
      if (predict(h, double(i)) != predict(h2, double(i)))
        m += discrete_mass(dist, i);
    return m;
  }
  const auto& t = std::get<ThresholdTask>(dist);
  const double c1 = std::get<Threshold>(h).cut;
  const double c2 = std::get<Threshold>(h2).cut;
  const auto& a = std::get<Threshold>(h);
  const auto& b = std::get<Threshold>(h2);
  if (a.positive_side == b.positive_side) {
    const double lo = std::min(c1, c2), hi = std::max(c1, c2);
    return marginal_cdf(t.marginal, hi) - marginal_cdf(t.marginal, lo);
  }
  // opposite orientations agree between the cuts only
  const double lo = std::min(c1, c2), hi = std::max(c1, c2);
  return 1.0 - (marginal_cdf(t.marginal, hi) - marginal_cdf(t.marginal, lo));
}

Hypothesis bayes_in_class(const TaskDistribution& dist, const HypothesisClass& cls) {
  if (const auto* f = std::get_if<FiniteClass>(&cls)) {
    if (!is_discrete(dist)) unsupported("finite class against continuous task");
    if (f->members.empty()) throw std::invalid_argument("bayes_in_class: empty class");
    std::size_t best = 0;
    double best_risk = population_risk(f->members[0], dist);
    for (std::size_t i = 1; i < f->members.size(); ++i) {
      const double r = population_risk(f->members[i], dist);
      if (r < best_risk) {
        best_risk = r;
        best = i;
      }
    }
    return f->members[best];
  }
  const auto& tc = std::get<ThresholdsClass>(cls);
  if (is_discrete(dist)) unsupported("threshold class against discrete task");
  const auto& t = std::get<ThresholdTask>(dist);
  const double candidates[3] = {std::clamp(t.hstar_cut, tc.lo, tc.hi), tc.lo, tc.hi};
  Hypothesis best = Threshold{candidates[0], tc.positive_side};
  double best_risk = population_risk(best, dist);
  for (int i = 1; i < 3; ++i) {
    Hypothesis h = Threshold{candidates[i], tc.positive_side};
    const double r = population_risk(h, dist);
    if (r < best_risk) {
      best_risk = r;
      best = h;
    }
  }
  return best;
}

double population_excess_risk(const Hypothesis& h, const TaskDistribution& dist,
                              const HypothesisClass& cls) {
  const Hypothesis hstar = bayes_in_class(dist, cls);
  double diff;
  if (is_discrete(dist)) {
    diff = 0.0;
    for (std::size_t i = 0; i < support_size(dist); ++i) {
      const int a = predict(h, double(i)), b = predict(hstar, double(i));
      if (a == b) continue;
      const double eta = discrete_eta(dist, i);
      // error prob of +1 is (1-eta), of -1 is eta
      const double d = (a > 0 ? 1.0 - eta : eta) - (b > 0 ? 1.0 - eta : eta);
      diff += discrete_mass(dist, i) * d;
    }
  } else {
    diff = threshold_risk_difference(std::get<ThresholdTask>(dist), h, hstar);
  }
  return diff > 0.0 ? diff : 0.0;
}

ConditionReport validate_bernstein(const TaskDistribution& dist,
                                   const HypothesisClass& cls, double C_beta,
                                   double beta,
                                   const std::vector<Hypothesis>& grid) {
  if (C_beta < 2.0) throw std::invalid_argument("validate_bernstein: C_beta >= 2 required");
  if (beta < 0.0 || beta > 1.0) throw std::invalid_argument("validate_bernstein: beta in [0,1]");
  if (grid.empty()) throw std::invalid_argument("validate_bernstein: empty grid");
  const Hypothesis hstar = bayes_in_class(dist, cls);
  ConditionReport rep;
  rep.grid_size = int(grid.size());
  rep.worst_hypothesis = grid.front();
  rep.worst_ratio = 0.0;
  for (const auto& h : grid) {
    const double p = population_disagreement(h, hstar, dist);
    const double e = population_excess_risk(h, dist, cls);
    const double denom = C_beta * std::pow(e, beta);  // beta = 0: e^0 = 1, even at e = 0
    double ratio;
    if (p == 0.0)
      ratio = 0.0;
    else if (denom == 0.0)
      ratio = kInf;  // 1/0 convention
    else
      ratio = p / denom;
    if (ratio > rep.worst_ratio) {
      rep.worst_ratio = ratio;
      rep.worst_hypothesis = h;
    }
  }
  rep.holds = rep.worst_ratio <= 1.0;
  return rep;
}

ConditionReport validate_transfer_exponent(const TaskDistribution& source,
                                           const TaskDistribution& target,
                                           const HypothesisClass& cls,
                                           double C_rho, double rho,
                                           const std::vector<Hypothesis>& grid) {
  if (C_rho < 2.0) throw std::invalid_argument("validate_transfer_exponent: C_rho >= 2 required");
  if (!(rho > 0.0)) throw std::invalid_argument("validate_transfer_exponent: rho > 0 required");
  if (grid.empty()) throw std::invalid_argument("validate_transfer_exponent: empty grid");
  ConditionReport rep;
  rep.grid_size = int(grid.size());
  rep.worst_hypothesis = grid.front();
  rep.worst_ratio = 0.0;
  const double inv_rho = std::isinf(rho) ? 0.0 : 1.0 / rho;
  for (const auto& h : grid) {
    const double e_tgt = population_excess_risk(h, target, cls);
    const double e_src = population_excess_risk(h, source, cls);
    const double rhs = C_rho * std::pow(e_src, inv_rho);  // rho = inf: e^0 = 1
    double ratio;
    if (e_tgt == 0.0)
      ratio = 0.0;
    else if (rhs == 0.0)
      ratio = kInf;
    else
      ratio = e_tgt / rhs;
    if (ratio > rep.worst_ratio) {
      rep.worst_ratio = ratio;
      rep.worst_hypothesis = h;
    }
  }
  rep.holds = rep.worst_ratio <= 1.0;
  return rep;
}

double estimate_min_rho(const TaskDistribution& source,
                        const TaskDistribution& target,
                        const HypothesisClass& cls, double C_rho,
                        const std::vector<Hypothesis>& grid) {
  auto holds = [&](double rho) {
    return validate_transfer_exponent(source, target, cls, C_rho, rho, grid).holds;
  };
  double lo = 1e-3, hi = 1e6;
  if (holds(lo)) return lo;
  if (!holds(hi)) return kInf;
  // validity is monotone nondecreasing in rho (excess risks are <= 1)
  while (hi / lo - 1.0 > 1e-3) {
    const double mid = std::sqrt(lo * hi);
    (holds(mid) ? hi : lo) = mid;
  }
  return hi;
}

std::vector<Hypothesis> validation_grid(const HypothesisClass& cls,
                                        const TaskDistribution& center, int n) {
  if (const auto* f = std::get_if<FiniteClass>(&cls)) {
    std::vector<Hypothesis> g;
    g.reserve(f->members.size());
    for (const auto& m : f->members) g.push_back(m);
    return g;
  }
  const auto& tc = std::get<ThresholdsClass>(cls);
  double c0 = 0.5 * (tc.lo + tc.hi);
  if (const auto* t = std::get_if<ThresholdTask>(&center))
    c0 = std::clamp(t->hstar_cut, tc.lo, tc.hi);
  const double span_l = c0 - tc.lo, span_r = tc.hi - c0;
  std::vector<Hypothesis> g;
  auto emit_side = [&](double span, double dir, int count) {
    if (span <= 0.0 || count <= 0) return;
    for (int i = 0; i < count; ++i) {
      const double frac = count == 1 ? 1.0 : double(i) / double(count - 1);
      const double offset = span * std::pow(1e-12, 1.0 - frac);
      g.push_back(Threshold{c0 + dir * offset, tc.positive_side});
    }
  };
  if (span_l > 0.0 && span_r > 0.0) {
    emit_side(span_l, -1.0, n / 2);
    emit_side(span_r, +1.0, n - n / 2);
  } else if (span_l > 0.0) {
    emit_side(span_l, -1.0, n);
  } else if (span_r > 0.0) {
    emit_side(span_r, +1.0, n);
  } else {
    g.push_back(Threshold{c0, tc.positive_side});
  }
  return g;
}

std::pair<TaskDistribution, TaskDistribution> make_asymmetry_pair(double beta,
                                                                  std::int64_t n_P,
                                                                  double c2) {
  if (beta < 0.0 || beta >= 1.0)
    throw std::invalid_argument("make_asymmetry_pair: beta in [0,1) required");
  if (n_P < 1) throw std::invalid_argument("make_asymmetry_pair: n_P >= 1 required");
  if (!(c2 > 0.0) || c2 > 1.0 / (8.0 * std::sqrt(2.0)))
    throw std::invalid_argument("make_asymmetry_pair: c2 in (0, 1/(8*sqrt(2))] required");
  const double eps = std::pow(double(n_P), -1.0 / (2.0 - beta));
  TaskDistribution P = TwoPointTask{std::pow(eps, beta),
                                    0.5 - c2 * std::pow(eps, 1.0 - beta), 1.0};
  TaskDistribution D = TwoPointTask{0.5, 0.25, 1.0};
  return {P, D};
}

std::vector<TaskDistribution> make_lower_bound_family(
    const std::vector<double>& rhos, double beta, double epsilon, int d,
    const std::vector<std::int8_t>& sigma) {
  if (d < 1) throw std::invalid_argument("make_lower_bound_family: d >= 1 required");
  if (!(epsilon > 0.0) || epsilon >= 1.0)
    throw std::invalid_argument("make_lower_bound_family: epsilon in (0,1) required");
  if (int(sigma.size()) != d)
    throw std::invalid_argument("make_lower_bound_family: sigma length must equal d");
  if (beta < 0.0 || beta > 1.0)
    throw std::invalid_argument("make_lower_bound_family: beta in [0,1] required");
  std::vector<TaskDistribution> out;
  out.reserve(rhos.size());
  for (double rho : rhos) {
    if (!(rho >= 1.0)) throw std::invalid_argument("make_lower_bound_family: rho >= 1 required");
    FinitePointsTask task;
    task.masses.resize(std::size_t(d) + 1);
    task.etas.resize(std::size_t(d) + 1);
    task.etas[0] = 1.0;
    if (std::isinf(rho)) {  // degenerates to a point mass at (x0, +1)
      task.masses[0] = 1.0;
      for (int i = 1; i <= d; ++i) {
        task.masses[std::size_t(i)] = 0.0;
        task.etas[std::size_t(i)] = 0.5;
      }
    } else {
      const double spread = std::pow(epsilon, rho * beta);
      const double bump = std::pow(epsilon, rho * (1.0 - beta)) / 2.0;
      task.masses[0] = 1.0 - spread;
      for (int i = 1; i <= d; ++i) {
        task.masses[std::size_t(i)] = spread / d;
        task.etas[std::size_t(i)] = 0.5 + sigma[std::size_t(i) - 1] * bump;
      }
    }
    out.emplace_back(std::move(task));
  }
  return out;
}

}  // namespace msl

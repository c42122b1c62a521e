#include "msl/hypothesis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>

namespace msl {

int predict(const Hypothesis& h, double x) {
  if (const auto* t = std::get_if<Threshold>(&h)) {
    if (t->positive_side == Side::right) return x >= t->cut ? +1 : -1;
    return x <= t->cut ? +1 : -1;
  }
  const auto& tab = std::get<Table>(h);
  const auto idx = static_cast<std::size_t>(std::llround(x));
  if (idx >= tab.labels.size())
    throw std::out_of_range("predict: support-point id outside table");
  return tab.labels[idx];
}

double empirical_risk(const Hypothesis& h, const LabeledSample& S) {
  if (S.empty()) return 0.0;
  std::size_t errors = 0;
  for (std::size_t i = 0; i < S.size(); ++i)
    errors += predict(h, S.x[i]) != S.y[i];
  return double(errors) / double(S.size());
}

double empirical_disagreement(const Hypothesis& h, const Hypothesis& h2,
                              const LabeledSample& S) {
  if (S.empty()) return 0.0;
  std::size_t count = 0;
  for (double xi : S.x) count += predict(h, xi) != predict(h2, xi);
  return double(count) / double(S.size());
}

double excess_empirical_risk(const Hypothesis& h, const Hypothesis& h2,
                             const LabeledSample& S) {
  return empirical_risk(h, S) - empirical_risk(h2, S);
}

namespace {

struct GroupedSample {
  std::vector<double> xs;        // distinct, ascending
  std::vector<std::int64_t> pos;  // count of +1 labels at xs[i]
  std::vector<std::int64_t> neg;
};

GroupedSample group_by_x(const LabeledSample& S) {
  std::map<double, std::pair<std::int64_t, std::int64_t>> acc;
  for (std::size_t i = 0; i < S.size(); ++i) {
    auto& c = acc[S.x[i]];
    (S.y[i] > 0 ? c.first : c.second) += 1;
  }
  GroupedSample g;
  g.xs.reserve(acc.size());
  for (const auto& [x, c] : acc) {
    g.xs.push_back(x);
    g.pos.push_back(c.first);
    g.neg.push_back(c.second);
  }
  return g;
}

// A threshold behavior on the sample: points with index < j get the "left"
// label, the rest the "right" label. The achievable cut range depends on the
// class orientation:
//   right-positive: cut in (xs[j-1], xs[j]]  (x >= cut is +1)
//   left-positive:  cut in [xs[j-1], xs[j])  (x <= cut is +1)
// both intersected with the class domain [lo, hi].
struct SweepBehavior {
  std::int64_t errors = 0;
  double rep_cut = 0.0;   // representative: midpoint of the clipped interval
  double width = 0.0;
  double left_end = 0.0;  // for the leftmost-on-tie rule
};

bool behavior_interval(const ThresholdsClass& cls, const GroupedSample& g,
                       std::size_t j, double* lo_out, double* hi_out,
                       double* rep) {
  const std::size_t k = g.xs.size();
  const double open_lo = (j == 0) ? -HUGE_VAL : g.xs[j - 1];
  const double open_hi = (j == k) ? HUGE_VAL : g.xs[j];
  double l = std::max(open_lo, cls.lo);
  double r = std::min(open_hi, cls.hi);
  if (l > r) return false;
  double mid = 0.5 * (l + r);
  if (l == r) mid = l;
  // Respect the half-open end when the interval collapses to a point.
  auto achieves = [&](double c) {
    if (c < cls.lo || c > cls.hi) return false;
    if (cls.positive_side == Side::right)
      return (j == 0 || g.xs[j - 1] < c) && (j == k || c <= g.xs[j]);
    return (j == 0 || g.xs[j - 1] <= c) && (j == k || c < g.xs[j]);
  };
  if (!achieves(mid)) {
    // try the closed end of the raw interval
    const double closed = cls.positive_side == Side::right ? r : l;
    if (!achieves(closed)) return false;
    mid = closed;
  }
  *lo_out = l;
  *hi_out = r;
  *rep = mid;
  return true;
}

ErmResult erm_thresholds(const ThresholdsClass& cls, const LabeledSample& S) {
  if (S.empty()) {
    return {Threshold{0.5 * (cls.lo + cls.hi), cls.positive_side}, 0.0, true};
  }
  GroupedSample g = group_by_x(S);
  const std::size_t k = g.xs.size();
  // suffix/prefix error counts; "left of the cut" is -1 for right-positive
  // classes and +1 for left-positive ones.
  std::vector<std::int64_t> pref_pos(k + 1, 0), pref_neg(k + 1, 0);
  for (std::size_t i = 0; i < k; ++i) {
    pref_pos[i + 1] = pref_pos[i] + g.pos[i];
    pref_neg[i + 1] = pref_neg[i] + g.neg[i];
  }
  const std::int64_t tot_pos = pref_pos[k], tot_neg = pref_neg[k];

  bool have = false;
  SweepBehavior best;
  for (std::size_t j = 0; j <= k; ++j) {
    double l, r, rep;
    if (!behavior_interval(cls, g, j, &l, &r, &rep)) continue;
    std::int64_t errors;
    if (cls.positive_side == Side::right)
      errors = pref_pos[j] + (tot_neg - pref_neg[j]);
    else
      errors = pref_neg[j] + (tot_pos - pref_pos[j]);
    SweepBehavior b{errors, rep, r - l, l};
    if (!have || b.errors < best.errors ||
        (b.errors == best.errors &&
         (b.width > best.width ||
          (b.width == best.width && b.left_end < best.left_end)))) {
      best = b;
      have = true;
    }
  }
  if (!have)  // domain entirely outside the sample's achievable cuts: cannot happen
    throw std::logic_error("erm: no achievable threshold behavior");
  return {Threshold{best.rep_cut, cls.positive_side},
          double(best.errors) / double(S.size()), false};
}

ErmResult erm_finite(const FiniteClass& cls, const LabeledSample& S) {
  if (cls.members.empty()) throw std::invalid_argument("erm: empty class");
  if (S.empty()) return {cls.members[0], 0.0, true};
  std::size_t best = 0;
  double best_risk = empirical_risk(cls.members[0], S);
  for (std::size_t i = 1; i < cls.members.size(); ++i) {
    const double r = empirical_risk(cls.members[i], S);
    if (r < best_risk) {
      best_risk = r;
      best = i;
    }
  }
  return {cls.members[best], best_risk, false};
}

}  // namespace

ErmResult erm(const HypothesisClass& cls, const LabeledSample& S) {
  if (const auto* t = std::get_if<ThresholdsClass>(&cls)) return erm_thresholds(*t, S);
  return erm_finite(std::get<FiniteClass>(cls), S);
}

std::vector<Hypothesis> distinct_behaviors(const HypothesisClass& cls,
                                           const LabeledSample& S) {
  std::vector<Hypothesis> out;
  if (const auto* t = std::get_if<ThresholdsClass>(&cls)) {
    if (S.empty()) {
      out.push_back(Threshold{0.5 * (t->lo + t->hi), t->positive_side});
      return out;
    }
    GroupedSample g = group_by_x(S);
    for (std::size_t j = 0; j <= g.xs.size(); ++j) {
      double l, r, rep;
      if (behavior_interval(*t, g, j, &l, &r, &rep))
        out.push_back(Threshold{rep, t->positive_side});
    }
    return out;
  }
  const auto& f = std::get<FiniteClass>(cls);
  std::set<std::vector<std::int8_t>> seen;
  for (const auto& m : f.members) {
    std::vector<std::int8_t> sig;
    sig.reserve(S.size());
    for (double xi : S.x) sig.push_back(static_cast<std::int8_t>(predict(m, xi)));
    if (seen.insert(std::move(sig)).second) out.push_back(m);
  }
  return out;
}

int vc_dimension(const HypothesisClass& cls) {
  if (std::holds_alternative<ThresholdsClass>(cls)) return 1;
  const auto& f = std::get<FiniteClass>(cls);
  if (f.support_size < 0 || f.support_size > 16)
    throw std::invalid_argument(
        "vc_dimension: exact shattering check limited to support sizes <= 16");
  const int m = f.support_size;
  std::set<std::uint32_t> behaviors;
  for (const auto& member : f.members) {
    if (static_cast<int>(member.labels.size()) != m)
      throw std::invalid_argument("vc_dimension: member table size mismatch");
    std::uint32_t bits = 0;
    for (int i = 0; i < m; ++i)
      if (member.labels[i] > 0) bits |= (1u << i);
    behaviors.insert(bits);
  }
  // Largest k such that some k-subset of the support is shattered.
  for (int k = m; k >= 1; --k) {
    if ((1u << k) > behaviors.size()) continue;
    // iterate k-subsets of {0..m-1} as bitmasks
    std::uint32_t subset = (1u << k) - 1;
    while (subset < (1u << m)) {
      std::set<std::uint32_t> proj;
      for (std::uint32_t b : behaviors) {
        std::uint32_t p = 0;
        int bit = 0;
        for (int i = 0; i < m; ++i)
          if (subset & (1u << i)) {
            if (b & (1u << i)) p |= (1u << bit);
            ++bit;
          }
        proj.insert(p);
        if (proj.size() == (1u << k)) break;
      }
      if (proj.size() == (1u << k)) return k;
      // next k-subset (Gosper's hack)
      const std::uint32_t c = subset & -subset;
      const std::uint32_t r = subset + c;
      subset = (((r ^ subset) >> 2) / c) | r;
    }
  }
  return 0;
}

}  // namespace msl

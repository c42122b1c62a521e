#pragma once
#include <cstdint>
#include <variant>
#include <vector>

namespace msl {

// Which side of a threshold carries the +1 label.
enum class Side { left, right };

struct Threshold {
  double cut = 0.0;
  Side positive_side = Side::right;
};

// Label assignment over the support points {0, 1, ..., k-1} of a finite class.
struct Table {
  std::vector<std::int8_t> labels;  // each entry is -1 or +1
};

using Hypothesis = std::variant<Threshold, Table>;

// For Table hypotheses, x is a support-point id stored as a double.
int predict(const Hypothesis& h, double x);

struct LabeledSample {
  std::vector<double> x;
  std::vector<std::int8_t> y;  // -1 / +1

  std::size_t size() const { return x.size(); }
  bool empty() const { return x.empty(); }
  void push_back(double xi, int yi) {
    x.push_back(xi);
    y.push_back(static_cast<std::int8_t>(yi));
  }
  void append(const LabeledSample& o) {
    x.insert(x.end(), o.x.begin(), o.x.end());
    y.insert(y.end(), o.y.begin(), o.y.end());
  }
};

struct ThresholdsClass {
  double lo = 0.0, hi = 1.0;
  Side positive_side = Side::right;
};

struct FiniteClass {
  int support_size = 0;
  std::vector<Table> members;
};

using HypothesisClass = std::variant<ThresholdsClass, FiniteClass>;

// 1 for threshold classes; exact shattering computation for finite classes
// (support size <= 16 enforced — exhaustive subset check).
int vc_dimension(const HypothesisClass& cls);

// Empirical risk; 0 on an empty sample by convention.
double empirical_risk(const Hypothesis& h, const LabeledSample& S);

// Empirical pseudo-distance |S|^-1 sum 1{h(x) != h2(x)}; 0 on empty S.
double empirical_disagreement(const Hypothesis& h, const Hypothesis& h2,
                              const LabeledSample& S);

// R_S(h) - R_S(h2).
double excess_empirical_risk(const Hypothesis& h, const Hypothesis& h2,
                             const LabeledSample& S);

struct ErmResult {
  Hypothesis h;
  double risk = 0.0;
  bool degenerate = false;  // set when S was empty and the class default is returned
};

// Exact empirical risk minimization.
//   Thresholds: sort-and-sweep over the <= |S|+1 achievable behaviors; among
//   minimizers the representative cut is the midpoint of the widest optimal
//   cut interval (leftmost interval on ties).
//   Finite: scan; lowest-index member wins ties.
// An empty sample returns the class default (domain midpoint / member 0),
// flagged degenerate.
ErmResult erm(const HypothesisClass& cls, const LabeledSample& S);

// One representative hypothesis per distinct behavior of the class on S,
// ordered left-to-right (thresholds) or by first member index (finite).
// Thresholds use the same midpoint representative rule as erm().
std::vector<Hypothesis> distinct_behaviors(const HypothesisClass& cls,
                                           const LabeledSample& S);

}  // namespace msl

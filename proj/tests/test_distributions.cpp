#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "expected_values.hpp"
#include "msl/distributions.hpp"
#include "msl/hypothesis.hpp"
#include "msl/rng.hpp"

using namespace msl;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Two hypotheses over {x0, x1} that agree (+1) at x0. h_plus is wrong at x1
// whenever eta_x1 < 1/2 there.
FiniteClass two_point_class() {
  return FiniteClass{2, {Table{{+1, +1}}, Table{{+1, -1}}}};
}

// All 2^k label assignments over support points {x0, ..., x_{k-1}}.
FiniteClass full_class(int k) {
  FiniteClass cls;
  cls.support_size = k;
  for (int m = 0; m < (1 << k); ++m) {
    Table t;
    for (int i = 0; i < k; ++i)
      t.labels.push_back((m >> i) & 1 ? +1 : -1);
    cls.members.push_back(std::move(t));
  }
  return cls;
}

double chi2_threshold(int df, double level = 1e-3) {
  return boost::math::quantile(boost::math::chi_squared(df), 1.0 - level);
}

double chi2_stat(const std::vector<std::int64_t>& observed,
                 const std::vector<double>& expected) {
  REQUIRE(observed.size() == expected.size());
  double stat = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    REQUIRE(expected[i] > 0.0);
    const double d = double(observed[i]) - expected[i];
    stat += d * d / expected[i];
  }
  return stat;
}

}  // namespace

TEST_CASE("sampling edge cases: zero draws and deterministic tasks") {
  Rng rng(1);
  const LabeledSample empty = sample(TwoPointTask{0.3, 0.7, 0.9}, 0, rng);
  CHECK(empty.empty());
  const LabeledSample certain = sample(TwoPointTask{1.0, 1.0, 1.0}, 5, rng);
  REQUIRE(certain.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(certain.x[i] == 1.0);
    CHECK(certain.y[i] == +1);
  }
}

TEST_CASE("sampling is reproducible from the seed") {
  const TaskDistribution task =
      ThresholdTask{PowerLawMarginal{2.0, 1.0}, 0.4, Side::right, 0.05, 0.1};
  Rng a(77), b(77);
  const LabeledSample s1 = sample(task, 1000, a);
  const LabeledSample s2 = sample(task, 1000, b);
  CHECK(s1.x == s2.x);
  CHECK(s1.y == s2.y);
}

TEST_CASE("two-point marginal frequency matches its mass") {
  Rng rng(11);
  const std::int64_t n = 100000;
  const LabeledSample S = sample(TwoPointTask{0.5, 0.25, 1.0}, n, rng);
  std::int64_t at_x1 = 0;
  for (double x : S.x) at_x1 += (x == 1.0);
  // Bin(1e5, 1/2), four standard deviations
  CHECK(std::abs(double(at_x1) - 50000.0) < 4.0 * std::sqrt(25000.0));
}

TEST_CASE("two-point sampler passes a chi-squared goodness-of-fit test") {
  const TwoPointTask task{0.3, 0.7, 0.9};
  Rng rng(12);
  const std::int64_t n = 100000;
  const LabeledSample S = sample(task, n, rng);
  std::vector<std::int64_t> obs(4, 0);  // (x, y) cells
  for (std::size_t i = 0; i < S.size(); ++i)
    ++obs[(S.x[i] == 1.0 ? 2 : 0) + (S.y[i] > 0 ? 1 : 0)];
  const std::vector<double> exp = {0.7 * 0.1 * n, 0.7 * 0.9 * n,
                                   0.3 * 0.3 * n, 0.3 * 0.7 * n};
  CHECK(chi2_stat(obs, exp) < chi2_threshold(3));
}

TEST_CASE("finite-points sampler passes a chi-squared goodness-of-fit test") {
  const FinitePointsTask task{{0.5, 0.3, 0.2}, {1.0, 0.25, 0.6}};
  Rng rng(13);
  const std::int64_t n = 100000;
  const LabeledSample S = sample(task, n, rng);
  std::int64_t x0_minus = 0;
  std::vector<std::int64_t> obs(5, 0);  // (x0,+), (x1,-), (x1,+), (x2,-), (x2,+)
  for (std::size_t i = 0; i < S.size(); ++i) {
    const int xi = int(S.x[i]);
    const bool plus = S.y[i] > 0;
    if (xi == 0 && !plus) ++x0_minus;
    if (xi == 0 && plus) ++obs[0];
    if (xi == 1) ++obs[plus ? 2 : 1];
    if (xi == 2) ++obs[plus ? 4 : 3];
  }
  CHECK(x0_minus == 0);  // eta(x0) = 1: the negative label never appears
  const std::vector<double> exp = {0.5 * n, 0.3 * 0.75 * n, 0.3 * 0.25 * n,
                                   0.2 * 0.4 * n, 0.2 * 0.6 * n};
  CHECK(chi2_stat(obs, exp) < chi2_threshold(4));
}

TEST_CASE("uniform threshold sampler with label noise passes goodness-of-fit") {
  const ThresholdTask task{UniformMarginal{-1.0, 3.0}, 0.5, Side::right, 0.1, 0.2};
  Rng rng(14);
  const std::int64_t n = 100000;
  const LabeledSample S = sample(task, n, rng);
  std::vector<std::int64_t> obs(16, 0);  // 8 equal x-bins x 2 labels
  for (std::size_t i = 0; i < S.size(); ++i) {
    int bin = int(std::floor((S.x[i] + 1.0) / 0.5));
    if (bin < 0) bin = 0;
    if (bin > 7) bin = 7;
    ++obs[bin * 2 + (S.y[i] > 0 ? 1 : 0)];
  }
  std::vector<double> exp;
  for (int bin = 0; bin < 8; ++bin) {
    // bins 0..2 lie below the cut: P(+1) = flip_below; above: 1 - flip_above
    const double p_plus = bin < 3 ? 0.1 : 0.8;
    exp.push_back(n / 8.0 * (1.0 - p_plus));
    exp.push_back(n / 8.0 * p_plus);
  }
  CHECK(chi2_stat(obs, exp) < chi2_threshold(15));
}

TEST_CASE("power-law threshold sampler matches the closed-form cdf") {
  const ThresholdTask task{PowerLawMarginal{2.5, 1.0}, 0.3, Side::right, 0.0, 0.0};
  Rng rng(15);
  const std::int64_t n = 100000;
  const LabeledSample S = sample(task, n, rng);
  const std::vector<double> edges = {0.3, 0.5, 0.7, 0.9, 1.0};
  std::vector<std::int64_t> obs(5, 0);
  for (std::size_t i = 0; i < S.size(); ++i) {
    CHECK(S.x[i] > 0.0);
    CHECK(S.x[i] <= 1.0);
    // realizable task: the label is exactly the threshold's
    CHECK(int(S.y[i]) == (S.x[i] >= 0.3 ? +1 : -1));
    std::size_t bin = 0;
    while (S.x[i] > edges[bin]) ++bin;
    ++obs[bin];
  }
  std::vector<double> exp;
  double prev = 0.0;
  for (double e : edges) {
    const double cdf = std::pow(e, 2.5);
    exp.push_back((cdf - prev) * n);
    prev = cdf;
  }
  // the first cell's probability doubles as a pin on the quadrature constant
  CHECK(exp[0] / n == doctest::Approx(ev::POWERLAW_RHO25_CDF_03).epsilon(1e-9));
  CHECK(chi2_stat(obs, exp) < chi2_threshold(4));
}

TEST_CASE("power-law closed forms agree with numeric integration") {
  const ThresholdTask task{PowerLawMarginal{2.5, 1.0}, 0.0, Side::right, 0.0, 0.0};
  // mass of (0, 0.3]: disagreement between cuts 0 and 0.3
  const double mass_03 = population_disagreement(
      Threshold{0.0, Side::right}, Threshold{0.3, Side::right}, task);
  CHECK(mass_03 == doctest::Approx(ev::POWERLAW_RHO25_CDF_03).epsilon(1e-9));
  CHECK(mass_03 == doctest::Approx(std::pow(0.3, 2.5)).epsilon(1e-9));
  // an off-origin window, integrated in-test by Simpson's rule
  const double mass_window = population_disagreement(
      Threshold{0.05, Side::right}, Threshold{0.35, Side::right}, task);
  const auto density = [](double x) { return 2.5 * std::pow(x, 1.5); };
  const int steps = 1 << 14;
  const double h = (0.35 - 0.05) / steps;
  double acc = density(0.05) + density(0.35);
  for (int i = 1; i < steps; ++i)
    acc += density(0.05 + i * h) * (i % 2 ? 4.0 : 2.0);
  CHECK(mass_window == doctest::Approx(acc * h / 3.0).epsilon(1e-9));
}

TEST_CASE("population excess risk pins on the two-point target") {
  const TwoPointTask target{0.5, 0.25, 1.0};
  const HypothesisClass cls{two_point_class()};
  const Hypothesis wrong = Table{{+1, +1}};
  const Hypothesis right = Table{{+1, -1}};
  CHECK(population_excess_risk(wrong, target, cls) ==
        doctest::Approx(ev::TWOPOINT_WRONG_EXCESS).epsilon(1e-12));
  CHECK(population_excess_risk(right, target, cls) == doctest::Approx(0.0));
  CHECK(population_disagreement(wrong, right, target) == doctest::Approx(0.5));
}

TEST_CASE("bayes_in_class recovers the labeling rule") {
  // eta(x1) > 1/2: the x1-positive member is Bayes
  const Hypothesis b1 =
      bayes_in_class(TwoPointTask{0.4, 0.9, 1.0}, two_point_class());
  CHECK(std::get<Table>(b1).labels == std::vector<std::int8_t>{+1, +1});
  // realizable uniform threshold: zero excess at the true cut
  const ThresholdTask t2{UniformMarginal{0.0, 2.0}, 0.5, Side::right, 0.0, 0.0};
  const HypothesisClass cls2{ThresholdsClass{0.0, 2.0, Side::right}};
  CHECK(population_excess_risk(Threshold{0.5, Side::right}, t2, cls2) ==
        doctest::Approx(0.0));
  CHECK(population_excess_risk(Threshold{0.9, Side::right}, t2, cls2) ==
        doctest::Approx(0.2));
  // power-law marginal, cut at the origin: everything is positive
  const ThresholdTask t3{PowerLawMarginal{2.0, 1.0}, 0.0, Side::right, 0.0, 0.0};
  const HypothesisClass cls3{ThresholdsClass{0.0, 1.0, Side::right}};
  CHECK(population_excess_risk(Threshold{0.0, Side::right}, t3, cls3) ==
        doctest::Approx(0.0));
}

TEST_CASE("table hypotheses against continuous marginals are rejected") {
  const ThresholdTask t{UniformMarginal{0.0, 1.0}, 0.5, Side::right, 0.0, 0.0};
  CHECK_THROWS_AS((void)population_risk(Table{{+1, -1}}, t), std::invalid_argument);
}

TEST_CASE("noise-level condition holds trivially at beta zero") {
  const auto [src, tgt] = make_asymmetry_pair(0.0, 1000, 0.08);
  const HypothesisClass cls{two_point_class()};
  const auto grid = validation_grid(cls, tgt);
  CHECK(validate_bernstein(tgt, cls, 2.0, 0.0, grid).holds);
  CHECK(validate_bernstein(src, cls, 2.0, 0.0, grid).holds);
}

TEST_CASE("noise-level condition holds at beta one on realizable tasks") {
  const ThresholdTask t{UniformMarginal{0.0, 1.0}, 0.4, Side::right, 0.0, 0.0};
  const HypothesisClass cls{ThresholdsClass{0.0, 1.0, Side::right}};
  const auto grid = validation_grid(cls, t);
  const ConditionReport rep = validate_bernstein(t, cls, 2.0, 1.0, grid);
  CHECK(rep.holds);
  CHECK(rep.worst_ratio <= 1.0);
  CHECK(rep.grid_size == int(grid.size()));
}

TEST_CASE("lower-bound family: excess and disagreement pins") {
  const std::vector<std::int8_t> sigma = {+1, -1, +1, +1, -1, +1, -1, -1};
  const auto tasks = make_lower_bound_family({2.0, 1.0}, 0.5, 0.1, 8, sigma);
  REQUIRE(tasks.size() == 2);
  // Bayes labels sigma_i at x_i, +1 at x0; flip support points 1, 4, 7
  Table hstar, h;
  hstar.labels.push_back(+1);
  for (std::int8_t s : sigma) hstar.labels.push_back(s);
  h = hstar;
  for (int i : {1, 4, 7}) h.labels[std::size_t(i)] = std::int8_t(-h.labels[std::size_t(i)]);
  const FiniteClass pair_cls{9, {hstar, h}};
  CHECK(population_excess_risk(h, tasks[0], pair_cls) ==
        doctest::Approx(ev::LB_TASK_EXCESS_3FLIPS).epsilon(1e-12));
  CHECK(population_excess_risk(h, tasks[1], pair_cls) ==
        doctest::Approx(ev::LB_TARGET_EXCESS_3FLIPS).epsilon(1e-12));
  CHECK(population_disagreement(h, hstar, tasks[0]) ==
        doctest::Approx(ev::LB_TASK_DISAGREE_3FLIPS).epsilon(1e-12));
}

TEST_CASE("lower-bound family satisfies its declared conditions") {
  const std::vector<std::int8_t> sigma = {+1, -1, +1, +1, -1, +1, -1, -1};
  const double beta = 0.5;
  const auto tasks = make_lower_bound_family({2.0, 1.0}, beta, 0.1, 8, sigma);
  const HypothesisClass cls{full_class(9)};
  const auto grid = validation_grid(cls, tasks[1]);
  // Bayes labels
  const Table b = std::get<Table>(bayes_in_class(tasks[0], cls));
  REQUIRE(b.labels.size() == 9);
  CHECK(b.labels[0] == +1);
  for (int i = 0; i < 8; ++i) CHECK(b.labels[std::size_t(i + 1)] == sigma[std::size_t(i)]);
  // noise-level condition with C = 2 at the family's beta, for every task
  for (const auto& t : tasks)
    CHECK(validate_bernstein(t, cls, 2.0, beta, grid).holds);
  // each source transfers to the rho = 1 target at its own exponent
  CHECK(validate_transfer_exponent(tasks[0], tasks[1], cls, 2.0, 2.0, grid).holds);
  CHECK(validate_transfer_exponent(tasks[1], tasks[1], cls, 2.0, 1.0, grid).holds);
}

TEST_CASE("infinite transfer exponent degenerates to a point mass") {
  const auto tasks = make_lower_bound_family({kInf}, 0.5, 0.1, 3, {+1, -1, +1});
  REQUIRE(tasks.size() == 1);
  const auto& t = std::get<FinitePointsTask>(tasks[0]);
  CHECK(t.masses[0] == doctest::Approx(1.0));
  CHECK(t.etas[0] == doctest::Approx(1.0));
  Rng rng(3);
  const LabeledSample S = sample(tasks[0], 50, rng);
  for (std::size_t i = 0; i < S.size(); ++i) {
    CHECK(S.x[i] == 0.0);
    CHECK(S.y[i] == +1);
  }
}

TEST_CASE("lower-bound family rejects out-of-range parameters") {
  const std::vector<std::int8_t> s3 = {+1, -1, +1};
  CHECK_THROWS_AS((void)make_lower_bound_family({0.5}, 0.5, 0.1, 3, s3),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)make_lower_bound_family({1.0}, 0.5, 0.0, 3, s3),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)make_lower_bound_family({1.0}, 0.5, 1.0, 3, s3),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)make_lower_bound_family({1.0}, 0.5, 0.1, 0, {}),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)make_lower_bound_family({1.0}, 0.5, 0.1, 2, s3),
                  std::invalid_argument);
}

TEST_CASE("asymmetric pair: closed-form pins and parameter guards") {
  const auto [src, tgt] = make_asymmetry_pair(0.0, 1000, 0.08);
  const HypothesisClass cls{two_point_class()};
  const Hypothesis wrong = Table{{+1, +1}};
  CHECK(population_excess_risk(wrong, tgt, cls) ==
        doctest::Approx(ev::ASYM_TARGET_WRONG_EXCESS).epsilon(1e-12));
  CHECK(population_excess_risk(wrong, src, cls) ==
        doctest::Approx(ev::ASYM_SOURCE_WRONG_EXCESS).epsilon(1e-12));
  // both tasks share the x1-negative optimum
  const Hypothesis b_src = bayes_in_class(src, cls);
  const Hypothesis b_tgt = bayes_in_class(tgt, cls);
  CHECK(std::get<Table>(b_src).labels == std::get<Table>(b_tgt).labels);
  CHECK_THROWS_AS((void)make_asymmetry_pair(1.0, 1000, 0.08), std::invalid_argument);
  CHECK_THROWS_AS((void)make_asymmetry_pair(-0.1, 1000, 0.08), std::invalid_argument);
  CHECK_THROWS_AS((void)make_asymmetry_pair(0.0, 0, 0.08), std::invalid_argument);
  CHECK_THROWS_AS((void)make_asymmetry_pair(0.0, 1000, 0.0), std::invalid_argument);
  CHECK_THROWS_AS((void)make_asymmetry_pair(0.0, 1000, 0.09), std::invalid_argument);
}

TEST_CASE("estimated minimal exponent matches hand calculations") {
  const HypothesisClass two_cls{two_point_class()};
  // asymmetric pair: binding hypothesis is wrong-at-x1, exponent in closed form
  const auto [src, tgt] = make_asymmetry_pair(0.0, 1000, 0.08);
  const auto grid2 = validation_grid(two_cls, tgt);
  const double r = estimate_min_rho(src, tgt, two_cls, 2.0, grid2);
  CHECK(r == doctest::Approx(ev::ASYM_MIN_RHO).epsilon(2e-3));
  // self-transfer on this grid: the only positive-excess hypothesis sits at
  // E = 1/4, so the binding exponent is ln(1/4)/ln(1/8) = 2/3 rather than 1 —
  // the grid never probes the small-excess regime where self-transfer binds
  const double r_self = estimate_min_rho(tgt, tgt, two_cls, 2.0, grid2);
  CHECK(r_self == doctest::Approx(2.0 / 3.0).epsilon(2e-3));
}

TEST_CASE("estimated minimal exponent on threshold pairs") {
  const HypothesisClass cls{ThresholdsClass{0.0, 2.0, Side::right}};
  // uniform pair with a shared cut transfers at exponent one
  const ThresholdTask src{UniformMarginal{0.0, 2.0}, 0.5, Side::right, 0.0, 0.0};
  const ThresholdTask tgt{UniformMarginal{0.0, 1.0}, 0.5, Side::right, 0.0, 0.0};
  const auto grid = validation_grid(cls, tgt);
  const double r1 = estimate_min_rho(src, tgt, cls, 2.0, grid);
  CHECK(std::abs(r1 - 1.0) <= 0.02);
  // self-transfer over a grid that reaches arbitrarily small excesses
  const auto grid_self = validation_grid(cls, src);
  const double r_self = estimate_min_rho(src, src, cls, 2.0, grid_self);
  CHECK(std::abs(r_self - 1.0) <= 0.05);
  // power-law source against a uniform target: exponent equals the density power
  const HypothesisClass cls01{ThresholdsClass{0.0, 1.0, Side::right}};
  const ThresholdTask tgt01{UniformMarginal{0.0, 1.0}, 0.0, Side::right, 0.0, 0.0};
  for (double rho : {1.5, 2.0, 3.0}) {
    const ThresholdTask pl{PowerLawMarginal{rho, 1.0}, 0.0, Side::right, 0.0, 0.0};
    const auto g = validation_grid(cls01, tgt01);
    const double est = estimate_min_rho(pl, tgt01, cls01, 2.0, g);
    CHECK(std::abs(est / rho - 1.0) <= 0.05);
  }
}

TEST_CASE("a slightly understated exponent fails validation") {
  const HypothesisClass cls{ThresholdsClass{0.0, 1.0, Side::right}};
  const ThresholdTask src{PowerLawMarginal{3.0, 1.0}, 0.0, Side::right, 0.0, 0.0};
  const ThresholdTask tgt{UniformMarginal{0.0, 1.0}, 0.0, Side::right, 0.0, 0.0};
  const auto grid = validation_grid(cls, tgt);
  const ConditionReport rep = validate_transfer_exponent(src, tgt, cls, 2.0, 2.8, grid);
  CHECK_FALSE(rep.holds);
  CHECK(rep.worst_ratio > 1.0);
  // the declared exponent itself is fine
  CHECK(validate_transfer_exponent(src, tgt, cls, 2.0, 3.0, grid).holds);
  // and the trivial exponent always validates
  CHECK(validate_transfer_exponent(src, tgt, cls, 2.0, kInf, grid).holds);
}

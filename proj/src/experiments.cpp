#include "msl/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <mutex>
#include <numeric>
#include <thread>

#include "msl/adversarial.hpp"
#include "msl/distributions.hpp"
#include "msl/theory.hpp"

namespace msl {

namespace {

// stream-derivation ids; validate/bounds/pack never draw samples
constexpr std::uint64_t kIdRates = 1, kIdPooling = 2, kIdAsymmetry = 3,
                        kIdAdaptivity = 4;

struct ExperimentHeader {
  std::string kind;
  std::uint64_t master_seed = 1;
  std::int64_t replications = 1;
};

ExperimentHeader read_header(const Config& cfg, const RunOptions& opts,
                             std::int64_t default_reps) {
  SectionReader ex(cfg, "experiment", true);
  ExperimentHeader h;
  h.kind = ex.require_string("kind");
  h.master_seed = std::uint64_t(ex.get_int("master_seed", 1));
  h.replications = ex.get_int("replications", default_reps);
  ex.finish();
  if (opts.seed) h.master_seed = *opts.seed;
  if (opts.reps) h.replications = *opts.reps;
  if (h.replications < 1)
    throw ConfigError(cfg.origin() + ": replications must be >= 1");
  return h;
}

void require_kind(const Config& cfg, const ExperimentHeader& h,
                  const std::string& expected) {
  if (h.kind != expected)
    throw ConfigError(cfg.origin() + ": [experiment] kind is \"" + h.kind +
                      "\" but this subcommand runs \"" + expected + "\"");
}

struct FamilySpec {
  std::string family;
  // single_threshold_realizable
  double domain_lo = 0.0, domain_hi = 1.0, cut = 0.5;
  // two_point_noise_witness
  double c_gap = 1.0;
  // identical_sources
  std::int64_t source_n = 8;
  std::int64_t n_D = 0;
  // asymmetric_pair
  double beta = 0.0;
  std::int64_t n_P = 1000;
  double c2 = 0.08;
  bool swap_target = false;
  double declared_rho = 0.0;  // 0 = estimate from the pair
  // impossibility_product
  ImpossibilityParams imp;
  // lower_bound
  std::vector<double> rhos;
  int d = 8;
  std::int64_t sigma_index = 0;
  double epsilon = 0.1;
  std::int64_t source_size = 1, target_size = 1;
  // representative sizes used by the validate subcommand
  std::int64_t rep_n = 256, rep_N = 8;
};

FamilySpec read_family(const Config& cfg) {
  SectionReader ins(cfg, "instance", true);
  FamilySpec f;
  f.family = ins.require_string("family");
  if (f.family == "single_threshold_realizable") {
    f.domain_lo = ins.get_double("domain_lo", 0.0);
    f.domain_hi = ins.get_double("domain_hi", 1.0);
    f.cut = ins.get_double("cut", 0.5);
    f.rep_n = ins.get_int("n", 256);
    if (!(f.domain_lo < f.domain_hi))
      throw ConfigError(cfg.origin() + ": domain_lo must be below domain_hi");
    if (!(f.cut >= f.domain_lo && f.cut <= f.domain_hi))
      throw ConfigError(cfg.origin() + ": cut must lie inside the domain");
  } else if (f.family == "two_point_noise_witness") {
    f.c_gap = ins.get_double("c_gap", 1.0);
    f.rep_n = ins.get_int("n", 256);
    if (!(f.c_gap > 0.0) || f.c_gap > 1.0)
      throw ConfigError(cfg.origin() + ": c_gap must lie in (0, 1]");
  } else if (f.family == "identical_sources") {
    f.source_n = ins.get_int("source_n", 8);
    f.n_D = ins.get_int("n_D", 0);
    f.rep_N = ins.get_int("N", 8);
    if (f.source_n < 1) throw ConfigError(cfg.origin() + ": source_n must be >= 1");
    if (f.n_D < 0) throw ConfigError(cfg.origin() + ": n_D must be >= 0");
  } else if (f.family == "asymmetric_pair") {
    f.beta = ins.get_double("beta", 0.0);
    f.n_P = ins.get_int("n_P", 1000);
    f.n_D = ins.get_int("n_D", 11);
    f.c2 = ins.get_double("c2", 0.08);
    f.swap_target = ins.get_bool("swap_target", false);
    // Override the estimated source exponent; deliberately wrong values are
    // how the assumption validator's refusal path gets exercised.
    f.declared_rho = ins.get_double("declared_rho", 0.0);
    if (f.n_P < 0 || f.n_D < 0)
      throw ConfigError(cfg.origin() + ": sample sizes must be >= 0");
    if (f.declared_rho != 0.0 && f.declared_rho < 1.0)
      throw ConfigError(cfg.origin() + ": declared_rho must be >= 1 (or omitted)");
  } else if (f.family == "impossibility_product") {
    f.imp.beta = ins.get_double("beta", 0.0);
    f.imp.n = ins.get_int("n", 1);
    f.imp.n_D = ins.get_int("n_D", 0);
    f.imp.N_P = ins.get_int("N_P", 48);
    f.imp.N_Q = ins.get_int("N_Q", 16);
    f.imp.c0 = ins.get_double("c0", 0.25);
    f.imp.c1 = ins.get_double("c1", 1.0 / 1024.0);
    f.imp.sigma = int(ins.get_int("sigma", -1));
  } else if (f.family == "lower_bound") {
    f.rhos = ins.require_number_array("rhos");
    f.beta = ins.get_double("beta", 0.5);
    f.d = int(ins.get_int("d", 8));
    f.sigma_index = ins.get_int("sigma_index", 0);
    f.epsilon = ins.get_double("epsilon", 0.1);
    f.source_size = ins.get_int("source_size", 1);
    f.target_size = ins.get_int("target_size", 1);
    if (f.sigma_index < 0) throw ConfigError(cfg.origin() + ": sigma_index must be >= 0");
    if (f.source_size < 1 || f.target_size < 0)
      throw ConfigError(cfg.origin() + ": sizes out of range");
  } else {
    throw ConfigError(cfg.origin() + ": unknown instance family '" + f.family + "'");
  }
  ins.finish();
  return f;
}

FiniteClass two_point_class() {
  FiniteClass cls;
  cls.support_size = 2;
  cls.members = {Table{{1, 1}}, Table{{1, -1}}};
  return cls;
}

MultisourceInstance single_threshold_instance(const FamilySpec& f, std::int64_t n) {
  ThresholdTask t;
  t.marginal = UniformMarginal{f.domain_lo, f.domain_hi};
  t.hstar_cut = f.cut;
  t.positive_side = Side::right;
  MultisourceInstance inst;
  inst.tasks = {t};
  inst.sample_sizes = {n};
  inst.declared_rhos = {1.0};
  inst.beta = 1.0;
  inst.C_beta = 2.0;
  inst.C_rho = 2.0;
  inst.cls = ThresholdsClass{f.domain_lo, f.domain_hi, Side::right};
  return inst;
}

MultisourceInstance two_point_witness_instance(const FamilySpec& f, std::int64_t n) {
  // the excess-risk gap shrinks like n^{-1/2}, the regime where the beta = 0
  // rate is attained
  const double eta = 0.5 + 0.5 * f.c_gap / std::sqrt(double(n));
  MultisourceInstance inst;
  inst.tasks = {TwoPointTask{1.0, eta, 1.0}};
  inst.sample_sizes = {n};
  inst.declared_rhos = {1.0};
  inst.beta = 0.0;
  inst.C_beta = 2.0;
  inst.C_rho = 2.0;
  inst.cls = two_point_class();
  return inst;
}

MultisourceInstance identical_sources_instance(const FamilySpec& f, std::int64_t N) {
  ThresholdTask source;
  source.marginal = UniformMarginal{0.0, 2.0};
  source.hstar_cut = 0.5;
  source.positive_side = Side::right;
  ThresholdTask target;
  target.marginal = UniformMarginal{0.0, 1.0};
  target.hstar_cut = 0.5;
  target.positive_side = Side::right;
  MultisourceInstance inst;
  inst.tasks.assign(std::size_t(N), TaskDistribution{source});
  inst.tasks.push_back(target);
  inst.sample_sizes.assign(std::size_t(N), f.source_n);
  inst.sample_sizes.push_back(f.n_D);
  inst.declared_rhos.assign(std::size_t(N) + 1, 1.0);
  inst.beta = 1.0;
  inst.C_beta = 2.0;
  inst.C_rho = 2.0;
  inst.cls = ThresholdsClass{0.0, 2.0, Side::right};
  return inst;
}

MultisourceInstance asymmetry_instance(const FamilySpec& f) {
  const auto pair = make_asymmetry_pair(f.beta, std::max<std::int64_t>(f.n_P, 1), f.c2);
  const TaskDistribution& P = pair.first;
  const TaskDistribution& D = pair.second;
  MultisourceInstance inst;
  inst.cls = two_point_class();
  if (!f.swap_target) {
    inst.tasks = {P, D};
    inst.sample_sizes = {f.n_P, f.n_D};
  } else {
    inst.tasks = {D, P};
    inst.sample_sizes = {f.n_D, f.n_P};
  }
  inst.beta = f.beta;
  // the source's Bernstein constant grows as (2 c2)^{-beta}
  inst.C_beta = std::max(2.0, std::pow(2.0 * f.c2, -f.beta));
  inst.C_rho = 2.0;
  if (f.declared_rho > 0.0) {
    inst.declared_rhos = {f.declared_rho, 1.0};
  } else {
    const auto grid = validation_grid(inst.cls, inst.tasks.back());
    inst.declared_rhos = {
        estimate_min_rho(inst.tasks.front(), inst.tasks.back(), inst.cls, inst.C_rho, grid),
        1.0};
  }
  return inst;
}

MultisourceInstance lower_bound_instance(const FamilySpec& f) {
  MultisourceInstance inst = build_lower_bound_instance(
      f.rhos, f.beta, f.d, std::size_t(f.sigma_index), f.epsilon);
  for (std::size_t t = 0; t + 1 < inst.sample_sizes.size(); ++t)
    inst.sample_sizes[t] = f.source_size;
  inst.sample_sizes.back() = f.target_size;
  return inst;
}

MultisourceInstance build_rate_instance(const FamilySpec& f, std::int64_t v) {
  if (f.family == "single_threshold_realizable") return single_threshold_instance(f, v);
  if (f.family == "two_point_noise_witness") return two_point_witness_instance(f, v);
  return identical_sources_instance(f, v);
}

std::int64_t total_samples(const MultisourceInstance& inst) {
  return std::accumulate(inst.sample_sizes.begin(), inst.sample_sizes.end(),
                         std::int64_t(0));
}

struct MeanSe {
  double mean = 0.0, se = 0.0;
};

MeanSe summarize(const std::vector<double>& v) {
  const double n = double(v.size());
  MeanSe out;
  out.mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  if (v.size() < 2) return out;
  double ss = 0.0;
  for (double x : v) ss += (x - out.mean) * (x - out.mean);
  out.se = std::sqrt(ss / (n - 1.0) / n);
  return out;
}

void parallel_reps(std::int64_t reps, int threads,
                   const std::function<void(std::int64_t)>& body) {
  const int T = std::max(1, threads);
  if (T == 1 || reps < 2) {
    for (std::int64_t r = 0; r < reps; ++r) body(r);
    return;
  }
  std::vector<std::thread> pool;
  std::mutex mu;
  std::exception_ptr err;
  const std::int64_t chunk = (reps + T - 1) / T;
  for (int k = 0; k < T; ++k) {
    const std::int64_t lo = std::int64_t(k) * chunk;
    const std::int64_t hi = std::min(reps, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&, lo, hi]() {
      try {
        for (std::int64_t r = lo; r < hi; ++r) body(r);
      } catch (...) {
        std::lock_guard<std::mutex> g(mu);
        if (!err) err = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

enum class ProcKind { TargetErm, PooledErm, Oracle, RankBased };

ProcKind parse_proc(const Config& cfg, const std::string& s) {
  if (s == "target_erm") return ProcKind::TargetErm;
  if (s == "pooled_erm") return ProcKind::PooledErm;
  if (s == "oracle") return ProcKind::Oracle;
  if (s == "rank_based") return ProcKind::RankBased;
  throw ConfigError(cfg.origin() + ": unknown procedure '" + s +
                    "' (expected target_erm, pooled_erm, oracle, or rank_based)");
}

const char* proc_name(ProcKind k) {
  switch (k) {
    case ProcKind::TargetErm: return "target_erm";
    case ProcKind::PooledErm: return "pooled_erm";
    case ProcKind::Oracle: return "oracle";
    case ProcKind::RankBased: return "rank_based";
  }
  return "?";
}

bool fast_two_point_applicable(const HypothesisClass& cls) {
  const FiniteClass* fc = std::get_if<FiniteClass>(&cls);
  return fc && fc->support_size == 2 && fc->members.size() == 2 &&
         fc->members[0].labels.size() == 2 && fc->members[1].labels.size() == 2 &&
         fc->members[0].labels[0] == fc->members[1].labels[0];
}

Hypothesis run_procedure(ProcKind k, const MultisourceInstance& inst,
                         const MultiSample& Z, const Ranking& rk,
                         const ProcedureConfig& pc) {
  switch (k) {
    case ProcKind::TargetErm: return target_only_erm(inst.cls, Z).h;
    case ProcKind::PooledErm: return pool_erm(inst.cls, Z).h;
    case ProcKind::Oracle: return oracle_procedure(inst, Z, rk, pc).h;
    case ProcKind::RankBased:
      return fast_two_point_applicable(inst.cls)
                 ? rank_based_two_point_fast(inst.cls, Z, rk, pc).h
                 : rank_based_procedure(inst.cls, Z, rk, pc).h;
  }
  throw std::logic_error("unreachable");
}

void check_assumptions_or_throw(const MultisourceInstance& inst,
                                const RunOptions& opts,
                                std::vector<std::string>* warnings) {
  const InstanceCheck chk = validate_instance(inst);
  if (chk.ok()) return;
  if (!opts.force)
    throw ValidationFailure("instance assumptions failed: " + chk.detail);
  warnings->push_back("forced past a failed assumption check: " + chk.detail);
}

}  // namespace

RateFit fit_rate_exponent(const std::vector<FitPoint>& pts,
                          const std::string& procedure,
                          std::vector<std::string>* warnings) {
  std::vector<FitPoint> kept;
  kept.reserve(pts.size());
  for (const FitPoint& p : pts) {
    if (p.mean > 0.0 && p.x > 0.0) {
      kept.push_back(p);
    } else if (warnings) {
      char buf[128];
      std::snprintf(buf, sizeof buf,
                    "%s: nonpositive mean at sweep value %.6g excluded from the rate fit",
                    procedure.c_str(), p.x);
      warnings->push_back(buf);
    }
  }
  if (kept.size() < 4)
    throw std::invalid_argument("fit_rate_exponent: needs at least 4 points with positive means");
  const std::size_t n = kept.size();
  double mean_lx = 0.0;
  for (const FitPoint& p : kept) mean_lx += std::log(p.x);
  mean_lx /= double(n);
  double sxx = 0.0, sxy = 0.0;
  for (const FitPoint& p : kept) {
    const double dx = std::log(p.x) - mean_lx;
    sxx += dx * dx;
    sxy += dx * std::log(p.mean);
  }
  if (!(sxx > 0.0))
    throw std::invalid_argument("fit_rate_exponent: sweep values must not coincide");
  RateFit fit;
  fit.procedure = procedure;
  fit.slope = sxy / sxx;
  double var = 0.0;
  for (const FitPoint& p : kept) {
    const double a = (std::log(p.x) - mean_lx) / sxx;
    const double sd_log = p.se / p.mean;  // delta method for ln(mean)
    var += a * a * sd_log * sd_log;
  }
  fit.band = 1.96 * std::sqrt(var);
  fit.points_used = int(n);
  return fit;
}

RateReport run_rate_experiment(const Config& cfg, const RunOptions& opts) {
  cfg.check_only_sections({"experiment", "instance", "sweep", "procedures"});
  const ExperimentHeader hdr = read_header(cfg, opts, 1000);
  if (hdr.kind != "rates" && hdr.kind != "pooling")
    throw ConfigError(cfg.origin() +
                      ": [experiment] kind must be \"rates\" or \"pooling\" here");
  const std::uint64_t exp_id = hdr.kind == "rates" ? kIdRates : kIdPooling;
  const FamilySpec fam = read_family(cfg);

  SectionReader sw(cfg, "sweep", true);
  const std::string axis = sw.require_string("axis");
  const std::vector<std::int64_t> grid = sw.require_int_array("grid");
  sw.finish();
  if (grid.empty()) throw ConfigError(cfg.origin() + ": sweep grid is empty");
  if (grid.front() < 1)
    throw ConfigError(cfg.origin() + ": sweep grid values must be >= 1");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (grid[i] <= grid[i - 1])
      throw ConfigError(cfg.origin() + ": sweep grid must be strictly increasing");

  SectionReader pr(cfg, "procedures", false);
  ProcedureConfig pc;
  std::vector<std::string> plist = {"target_erm"};
  if (pr.present()) {
    plist = pr.get_string_array("list", plist);
    pc.C0 = pr.get_double("C0", 1.0);
    pc.delta = pr.get_double("delta", 0.05);
    pr.finish();
  }
  if (plist.empty()) throw ConfigError(cfg.origin() + ": procedure list is empty");
  std::vector<ProcKind> procs;
  for (const std::string& s : plist) procs.push_back(parse_proc(cfg, s));

  const bool single_task = fam.family == "single_threshold_realizable" ||
                           fam.family == "two_point_noise_witness";
  if (single_task && axis != "n")
    throw ConfigError(cfg.origin() + ": single-task families sweep axis \"n\"");
  if (fam.family == "identical_sources" && axis != "N" && axis != "total")
    throw ConfigError(cfg.origin() +
                      ": identical_sources sweeps axis \"N\" or \"total\"");
  if (!single_task && fam.family != "identical_sources")
    throw ConfigError(cfg.origin() + ": family '" + fam.family +
                      "' does not support rate sweeps");

  RateReport rep;
  rep.meta.experiment = hdr.kind;
  rep.meta.config_hash = config_hash(cfg);
  rep.meta.master_seed = hdr.master_seed;
  rep.meta.replications = hdr.replications;
  rep.sweep_axis = axis;

  check_assumptions_or_throw(build_rate_instance(fam, grid.front()), opts,
                             &rep.warnings);

  for (std::size_t ti = 0; ti < grid.size(); ++ti) {
    const MultisourceInstance inst = build_rate_instance(fam, grid[ti]);
    const TaskDistribution& target = inst.tasks.back();
    const Ranking rk = make_ranking(inst.declared_rhos);
    const std::int64_t reps = hdr.replications;
    std::vector<std::vector<double>> excess(procs.size(),
                                            std::vector<double>(std::size_t(reps), 0.0));
    parallel_reps(reps, opts.threads, [&](std::int64_t r) {
      Rng rng(hash64({hdr.master_seed, exp_id, std::uint64_t(ti), std::uint64_t(r)}));
      const MultiSample Z = draw_multisample(inst, rng);
      for (std::size_t pi = 0; pi < procs.size(); ++pi) {
        const Hypothesis h = run_procedure(procs[pi], inst, Z, rk, pc);
        excess[pi][std::size_t(r)] = population_excess_risk(h, target, inst.cls);
      }
    });
    const double sweep_value =
        axis == "total" ? double(total_samples(inst)) : double(grid[ti]);
    for (std::size_t pi = 0; pi < procs.size(); ++pi) {
      const MeanSe ms = summarize(excess[pi]);
      RateRow row;
      row.sweep = sweep_value;
      row.procedure = proc_name(procs[pi]);
      row.mean = ms.mean;
      row.se = ms.se;
      row.reps = reps;
      if (row.mean == 0.0) {
        // Monte Carlo floor so the log-log fit stays defined
        row.mean = 0.5 / double(reps);
        row.clamped = true;
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "%s: zero excess risk in every replication at sweep value %.6g; "
                      "clamped to the Monte Carlo floor %.6g",
                      row.procedure.c_str(), sweep_value, row.mean);
        rep.warnings.push_back(buf);
      }
      rep.rows.push_back(std::move(row));
    }
  }

  for (std::size_t pi = 0; pi < procs.size(); ++pi) {
    std::vector<FitPoint> pts;
    for (const RateRow& row : rep.rows)
      if (row.procedure == proc_name(procs[pi]))
        pts.push_back(FitPoint{row.sweep, row.mean, row.se});
    rep.fits.push_back(fit_rate_exponent(pts, proc_name(procs[pi]), &rep.warnings));
  }
  return rep;
}

AsymmetryReport run_asymmetry_experiment(const Config& cfg, const RunOptions& opts) {
  cfg.check_only_sections({"experiment", "instance"});
  const ExperimentHeader hdr = read_header(cfg, opts, 2000);
  require_kind(cfg, hdr, "asymmetry");
  const FamilySpec fam = read_family(cfg);
  if (fam.family != "asymmetric_pair")
    throw ConfigError(cfg.origin() + ": the asymmetry runner needs family asymmetric_pair");

  const MultisourceInstance inst = asymmetry_instance(fam);
  const TaskDistribution& source = inst.tasks.front();
  const TaskDistribution& target = inst.tasks.back();

  AsymmetryReport rep;
  rep.meta.experiment = "asymmetry";
  rep.meta.config_hash = config_hash(cfg);
  rep.meta.master_seed = hdr.master_seed;
  rep.meta.replications = hdr.replications;
  rep.swap_target = fam.swap_target;
  rep.n_P = fam.n_P;
  rep.n_D = fam.n_D;

  check_assumptions_or_throw(inst, opts, &rep.warnings);

  const Hypothesis hstar = bayes_in_class(target, inst.cls);
  const std::int64_t reps = hdr.replications;
  constexpr int kLearners = 3;  // pooled, source_only, target_only
  std::vector<std::vector<double>> tE(kLearners, std::vector<double>(std::size_t(reps)));
  std::vector<std::vector<double>> sE(kLearners, std::vector<double>(std::size_t(reps)));
  std::vector<std::vector<double>> wr(kLearners, std::vector<double>(std::size_t(reps)));
  parallel_reps(reps, opts.threads, [&](std::int64_t r) {
    Rng rng(hash64({hdr.master_seed, kIdAsymmetry, 0ull, std::uint64_t(r)}));
    const MultiSample Z = draw_multisample(inst, rng);
    const Hypothesis hs[kLearners] = {pool_erm(inst.cls, Z).h,
                                      erm(inst.cls, Z.datasets.front()).h,
                                      target_only_erm(inst.cls, Z).h};
    for (int l = 0; l < kLearners; ++l) {
      tE[l][std::size_t(r)] = population_excess_risk(hs[l], target, inst.cls);
      sE[l][std::size_t(r)] = population_excess_risk(hs[l], source, inst.cls);
      wr[l][std::size_t(r)] = predict(hs[l], 1.0) != predict(hstar, 1.0) ? 1.0 : 0.0;
    }
  });
  const char* names[kLearners] = {"pooled", "source_only", "target_only"};
  for (int l = 0; l < kLearners; ++l) {
    AsymmetryRow row;
    row.learner = names[l];
    const MeanSe t = summarize(tE[l]), s = summarize(sE[l]), w = summarize(wr[l]);
    row.target_excess_mean = t.mean;
    row.target_excess_se = t.se;
    row.source_excess_mean = s.mean;
    row.source_excess_se = s.se;
    row.wrong_at_x1_freq = w.mean;
    row.wrong_at_x1_se = w.se;
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

AdaptivityReport run_adaptivity_experiment(const Config& cfg, const RunOptions& opts) {
  cfg.check_only_sections({"experiment", "instance", "procedures", "flip"});
  const ExperimentHeader hdr = read_header(cfg, opts, 400);
  require_kind(cfg, hdr, "adaptivity");
  const FamilySpec fam = read_family(cfg);
  if (fam.family != "impossibility_product")
    throw ConfigError(cfg.origin() +
                      ": the adaptivity runner needs family impossibility_product");
  const ImpossibilityParams p = fam.imp;

  AdaptivityReport rep;
  rep.meta.experiment = "adaptivity";
  rep.meta.config_hash = config_hash(cfg);
  rep.meta.master_seed = hdr.master_seed;
  rep.meta.replications = hdr.replications;

  try {
    for (const std::string& w : check_params(p))
      rep.warnings.push_back("precondition: " + w);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(cfg.origin() + ": " + e.what());
  }

  SectionReader pr(cfg, "procedures", false);
  ProcedureConfig pc;
  if (pr.present()) {
    pc.C0 = pr.get_double("C0", 1.0);
    pc.delta = pr.get_double("delta", 0.05);
    pr.finish();
  }
  SectionReader fl(cfg, "flip", false);
  std::int64_t flip_reps = 2000;
  if (fl.present()) {
    flip_reps = fl.get_int("replications", 2000);
    fl.finish();
  }
  if (flip_reps < 0) throw ConfigError(cfg.origin() + ": flip replications must be >= 0");

  rep.flip_floor = 1.0 / (12.0 * 96.0 * 84.0);
  rep.rank_rate_ceiling =
      std::pow(double(p.n) * double(std::max<std::int64_t>(p.N_Q, 1)),
               -1.0 / (2.0 - p.beta));

  const std::int64_t N = p.N_P + p.N_Q;
  const bool materializable = N <= (1 << 21);
  if (materializable) {
    const MultisourceInstance inst = build_impossibility_instance(p);
    check_assumptions_or_throw(inst, opts, &rep.warnings);
    const TaskDistribution& target = inst.tasks.back();
    const Hypothesis hstar = bayes_in_class(target, inst.cls);
    const Ranking rk = make_ranking(inst.declared_rhos);
    const std::int64_t reps = hdr.replications;
    constexpr int kProcs = 2;  // pooled, rank_based
    std::vector<std::vector<double>> tE(kProcs, std::vector<double>(std::size_t(reps)));
    std::vector<std::vector<double>> wr(kProcs, std::vector<double>(std::size_t(reps)));
    parallel_reps(reps, opts.threads, [&](std::int64_t r) {
      Rng rng(hash64({hdr.master_seed, kIdAdaptivity, 0ull, std::uint64_t(r)}));
      const MultiSample Z = draw_multisample(inst, rng);
      const Hypothesis hs[kProcs] = {pool_erm(inst.cls, Z).h,
                                     rank_based_two_point_fast(inst.cls, Z, rk, pc).h};
      for (int l = 0; l < kProcs; ++l) {
        tE[l][std::size_t(r)] = population_excess_risk(hs[l], target, inst.cls);
        wr[l][std::size_t(r)] = predict(hs[l], 1.0) != predict(hstar, 1.0) ? 1.0 : 0.0;
      }
    });
    const char* names[kProcs] = {"pooled", "rank_based"};
    for (int l = 0; l < kProcs; ++l) {
      AdaptivityRow row;
      row.procedure = names[l];
      const MeanSe t = summarize(tE[l]), w = summarize(wr[l]);
      row.target_excess_mean = t.mean;
      row.target_excess_se = t.se;
      row.wrong_at_x1_freq = w.mean;
      row.wrong_at_x1_se = w.se;
      rep.rows.push_back(std::move(row));
    }
    rep.procedures_run = true;
  } else {
    rep.warnings.push_back(
        "instance too large to materialize; procedure comparison skipped "
        "(flip estimate only)");
    // keep the assumption check meaningful by shrinking only the task count
    ImpossibilityParams wp = p;
    wp.N_P = std::max<std::int64_t>(std::min<std::int64_t>(p.N_P, 4096), 3 * p.N_Q);
    check_assumptions_or_throw(build_impossibility_instance(wp), opts, &rep.warnings);
    char buf[96];
    std::snprintf(buf, sizeof buf,
                  "assumptions checked on a reduced witness with N_P = %lld",
                  (long long)wp.N_P);
    rep.warnings.push_back(buf);
  }

  if (flip_reps > 0) {
    if (p.sigma == -1) {
      Rng rng(hash64({hdr.master_seed, kIdAdaptivity, 1ull, 0ull}));
      const auto fs = estimate_flip_probability(p, flip_reps, rng);
      rep.flip_freq = fs.first;
      rep.flip_se = fs.second;
      rep.flip_reps = flip_reps;
    } else {
      rep.warnings.push_back("flip estimate skipped: it is defined under sigma = -1");
    }
  }
  return rep;
}

BoundsReport run_bounds(const Config& cfg) {
  cfg.check_only_sections({"experiment", "query"});
  SectionReader ex(cfg, "experiment", true);
  const std::string kind = ex.require_string("kind");
  ex.finish();
  if (kind != "bounds")
    throw ConfigError(cfg.origin() + ": [experiment] kind must be \"bounds\" here");

  SectionReader q(cfg, "query", true);
  RateQuery rq;
  rq.rhos = q.require_number_array("rhos");
  rq.sizes = q.require_int_array("sizes");
  rq.beta = q.get_double("beta", 1.0);
  rq.vc = int(q.get_int("vc", 1));
  rq.delta = q.get_double("delta", 0.05);
  rq.C_beta = q.get_double("C_beta", 2.0);
  rq.C_rho = q.get_double("C_rho", 2.0);
  rq.C0 = q.get_double("C0", 1.0);
  const double alpha = q.get_double("quantile_alpha", 0.5);
  q.finish();

  BoundsReport rep;
  rep.meta.experiment = "bounds";
  rep.meta.config_hash = config_hash(cfg);
  try {
    auto add = [&rep](const char* name, const BoundValue& b) {
      rep.rows.push_back(BoundsRow{name, b.value, b.argmin_t, b.per_t_terms});
    };
    add("minimax_rate", minimax_rate(rq));
    add("oracle_bound", oracle_bound(rq));
    add("semi_adaptive_bound", semi_adaptive_bound(rq));
    if (rq.beta == 1.0) add("pooling_bound_beta1", pooling_bound_beta1(rq));
    add("quantile_pooling_bound", quantile_pooling_bound(rq, alpha));
    add("general_pooling_bound", general_pooling_bound(rq));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(cfg.origin() + ": invalid bound query: " + e.what());
  }
  return rep;
}

PackReport run_pack(const Config& cfg) {
  cfg.check_only_sections({"experiment", "pack"});
  SectionReader ex(cfg, "experiment", true);
  const std::string kind = ex.require_string("kind");
  ex.finish();
  if (kind != "pack")
    throw ConfigError(cfg.origin() + ": [experiment] kind must be \"pack\" here");
  SectionReader pk(cfg, "pack", true);
  const int d = int(pk.require_int("d"));
  pk.finish();

  PackReport rep;
  rep.meta.experiment = "pack";
  rep.meta.config_hash = config_hash(cfg);
  rep.d = d;
  rep.min_distance = (d + 7) / 8;
  try {
    rep.vectors = vg_packing(d);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(cfg.origin() + ": " + e.what());
  }
  rep.distance_verified = verify_packing_distance(rep.vectors, rep.min_distance);
  return rep;
}

ValidateReport run_validate(const Config& cfg) {
  cfg.check_only_sections({"experiment", "instance"});
  SectionReader ex(cfg, "experiment", true);
  const std::string kind = ex.require_string("kind");
  ex.finish();
  if (kind != "validate")
    throw ConfigError(cfg.origin() + ": [experiment] kind must be \"validate\" here");
  const FamilySpec fam = read_family(cfg);

  ValidateReport rep;
  rep.meta.experiment = "validate";
  rep.meta.config_hash = config_hash(cfg);
  rep.family = fam.family;

  MultisourceInstance inst;
  try {
    if (fam.family == "single_threshold_realizable" ||
        fam.family == "two_point_noise_witness") {
      inst = build_rate_instance(fam, fam.rep_n);
    } else if (fam.family == "identical_sources") {
      inst = identical_sources_instance(fam, fam.rep_N);
    } else if (fam.family == "asymmetric_pair") {
      inst = asymmetry_instance(fam);
    } else if (fam.family == "impossibility_product") {
      ImpossibilityParams p = fam.imp;
      for (const std::string& w : check_params(p))
        rep.warnings.push_back("precondition: " + w);
      if (p.N_P + p.N_Q > (1 << 21)) {
        p.N_P = std::max<std::int64_t>(std::min<std::int64_t>(p.N_P, 4096), 3 * p.N_Q);
        char buf[96];
        std::snprintf(buf, sizeof buf,
                      "instance too large to materialize; validated with N_P = %lld",
                      (long long)p.N_P);
        rep.warnings.push_back(buf);
      }
      inst = build_impossibility_instance(p);
    } else if (fam.family == "lower_bound") {
      inst = lower_bound_instance(fam);
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(cfg.origin() + ": " + e.what());
  } catch (const std::out_of_range& e) {
    throw ConfigError(cfg.origin() + ": " + e.what());
  }

  const InstanceCheck chk = validate_instance(inst);
  rep.shared_optimum = chk.shared_optimum;
  rep.transfer_ok = chk.transfer_ok;
  rep.bernstein_ok = chk.bernstein_ok;
  rep.detail = chk.detail;
  return rep;
}

}  // namespace msl

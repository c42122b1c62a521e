#include "msl/adversarial.hpp"

#include <mpfr.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <unordered_set>

namespace msl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double se_of(double freq, std::int64_t reps) {
  return std::sqrt(std::max(freq * (1.0 - freq), 0.0) / double(reps));
}

double trinomial(std::int64_t n, std::int64_t a, std::int64_t b) {
  auto fact = [](std::int64_t k) {
    double r = 1.0;
    for (std::int64_t i = 2; i <= k; ++i) r *= double(i);
    return r;
  };
  return fact(n) / (fact(a) * fact(b) * fact(n - a - b));
}

double logaddexp(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(std::min(a, b) - m));
}

struct TwoPointDensity {
  double m1;   // marginal mass at x1
  double eta;  // P(Y=+1 | x1); x0 is always labeled +1
};

double log_point_density(const TwoPointDensity& t, double x, int y) {
  if (x == 1.0) {
    const double pr = t.m1 * (y > 0 ? t.eta : 1.0 - t.eta);
    return pr > 0.0 ? std::log(pr) : -kInf;
  }
  if (x == 0.0) {
    if (y < 0)
      throw std::invalid_argument("likelihood: (x0, -1) is off the construction's support");
    const double pr = 1.0 - t.m1;
    return pr > 0.0 ? std::log(pr) : -kInf;
  }
  throw std::invalid_argument("likelihood: sample off the two-point support");
}

// {P, Q, D} density parameters for one sign
std::array<TwoPointDensity, 3> densities_for(const ImpossibilityParams& p, int sg) {
  const double e = p.eps(), e0 = p.eps0();
  return {TwoPointDensity{p.c1 * std::pow(e, p.beta), 0.5 + sg * std::pow(e, 1.0 - p.beta)},
          TwoPointDensity{1.0, 0.5 + sg * 0.5},
          TwoPointDensity{std::pow(e0, p.beta) / 2.0,
                          0.5 + sg * p.c0 * std::pow(e0, 1.0 - p.beta)}};
}

// A*u + B*v + C*w evaluated at the given precision, where u, v, w are the
// three decomposition logs recomputed from the raw parameters. Sets *decided
// when the result's magnitude clears the accumulated rounding budget (or is
// exactly zero); returns the sign.
int decomposed_sign_mpfr(long long A, long long B, long long C,
                         const ImpossibilityParams& p, mpfr_prec_t prec,
                         bool* decided) {
  mpfr_t e, e0, beta, t, etap, etam, u, v, wl, x, total, scale;
  mpfr_inits2(prec, e, e0, beta, t, etap, etam, u, v, wl, x, total, scale,
              (mpfr_ptr) nullptr);
  mpfr_set_d(beta, p.beta, MPFR_RNDN);  // doubles convert exactly

  // eps = (n*N_P)^{-1/(2-beta)}
  mpfr_set_si(e, long(p.n * p.N_P), MPFR_RNDN);
  mpfr_si_sub(t, 2, beta, MPFR_RNDN);
  mpfr_si_div(t, -1, t, MPFR_RNDN);
  mpfr_pow(e, e, t, MPFR_RNDN);

  // u = ln((1/2 + eps^{1-beta}) / (1/2 - eps^{1-beta}))
  mpfr_si_sub(t, 1, beta, MPFR_RNDN);
  mpfr_pow(t, e, t, MPFR_RNDN);
  mpfr_set_d(etap, 0.5, MPFR_RNDN);
  mpfr_add(etap, etap, t, MPFR_RNDN);
  mpfr_set_d(etam, 0.5, MPFR_RNDN);
  mpfr_sub(etam, etam, t, MPFR_RNDN);
  mpfr_log(u, etap, MPFR_RNDN);
  mpfr_log(t, etam, MPFR_RNDN);
  mpfr_sub(u, u, t, MPFR_RNDN);

  // x = alpha_P * (c1 * eps^beta * etap)^n ;  v = ln((x + alpha_Q)/x)
  mpfr_pow(t, e, beta, MPFR_RNDN);
  mpfr_mul_d(t, t, p.c1, MPFR_RNDN);
  mpfr_mul(x, t, etap, MPFR_RNDN);
  mpfr_pow_si(x, x, long(p.n), MPFR_RNDN);
  mpfr_mul_si(x, x, long(p.N_P), MPFR_RNDN);
  mpfr_div_si(x, x, long(p.N_P + p.N_Q), MPFR_RNDN);
  mpfr_set_si(t, long(p.N_Q), MPFR_RNDN);
  mpfr_div_si(t, t, long(p.N_P + p.N_Q), MPFR_RNDN);
  mpfr_add(t, t, x, MPFR_RNDN);
  mpfr_log(v, t, MPFR_RNDN);
  mpfr_log(t, x, MPFR_RNDN);
  mpfr_sub(v, v, t, MPFR_RNDN);

  // wl = ln((1/2 + c0*eps0^{1-beta}) / (1/2 - c0*eps0^{1-beta}))
  if (p.n_D > 0) {
    mpfr_set_si(e0, long(p.n_D), MPFR_RNDN);
    mpfr_si_sub(t, 2, beta, MPFR_RNDN);
    mpfr_si_div(t, -1, t, MPFR_RNDN);
    mpfr_pow(e0, e0, t, MPFR_RNDN);
  } else {
    mpfr_set_si(e0, 1, MPFR_RNDN);
  }
  mpfr_si_sub(t, 1, beta, MPFR_RNDN);
  mpfr_pow(t, e0, t, MPFR_RNDN);
  mpfr_mul_d(t, t, p.c0, MPFR_RNDN);
  mpfr_set_d(etap, 0.5, MPFR_RNDN);
  mpfr_add(etap, etap, t, MPFR_RNDN);
  mpfr_set_d(etam, 0.5, MPFR_RNDN);
  mpfr_sub(etam, etam, t, MPFR_RNDN);
  mpfr_log(wl, etap, MPFR_RNDN);
  mpfr_log(t, etam, MPFR_RNDN);
  mpfr_sub(wl, wl, t, MPFR_RNDN);

  mpfr_mul_si(u, u, long(A), MPFR_RNDN);
  mpfr_mul_si(v, v, long(B), MPFR_RNDN);
  mpfr_mul_si(wl, wl, long(C), MPFR_RNDN);
  mpfr_add(total, u, v, MPFR_RNDN);
  mpfr_add(total, total, wl, MPFR_RNDN);

  // conservative budget: |log| magnitudes stay below ~4000 here, and the whole
  // chain is a few dozen correctly-rounded operations
  const double weight = (std::fabs(double(A)) + std::fabs(double(B)) + std::fabs(double(C))) * 4000.0;
  mpfr_set_d(scale, weight, MPFR_RNDN);
  mpfr_mul_2si(scale, scale, -(long)prec + 16, MPFR_RNDN);

  int sg = 0;
  if (mpfr_zero_p(total)) {
    *decided = true;  // exact tie
  } else if (mpfr_cmpabs(total, scale) > 0) {
    *decided = true;
    sg = mpfr_sgn(total);
  }
  mpfr_clears(e, e0, beta, t, etap, etam, u, v, wl, x, total, scale,
              (mpfr_ptr) nullptr);
  return sg;
}

}  // namespace

double ImpossibilityParams::eps() const {
  return std::pow(double(n) * double(N_P), -1.0 / (2.0 - beta));
}

double ImpossibilityParams::eps0() const {
  return n_D > 0 ? std::min(1.0, std::pow(double(n_D), -1.0 / (2.0 - beta))) : 1.0;
}

double ImpossibilityParams::alpha_P() const { return double(N_P) / double(N_P + N_Q); }

double ImpossibilityParams::alpha_Q() const { return double(N_Q) / double(N_P + N_Q); }

double ImpossibilityParams::rho_P() const {
  const double num = std::log(std::pow(c1, -(2.0 - beta)) * double(n) * double(N_P));
  const double den =
      std::log(std::pow(c0, -(2.0 - beta)) * double(std::max<std::int64_t>(1, n_D)));
  return num / den;
}

std::vector<std::string> check_params(const ImpossibilityParams& p) {
  if (!(p.beta >= 0.0) || !(p.beta < 1.0))
    throw std::invalid_argument("impossibility params: beta in [0,1) required");
  if (p.n < 1) throw std::invalid_argument("impossibility params: n >= 1 required");
  if (p.beta > 0.0 && !(double(p.n) < 2.0 / p.beta - 1.0))
    throw std::invalid_argument("impossibility params: n < 2/beta - 1 required");
  if (p.n_D < 0) throw std::invalid_argument("impossibility params: n_D >= 0 required");
  if (p.N_P < 1) throw std::invalid_argument("impossibility params: N_P >= 1 required");
  if (p.N_Q < 0) throw std::invalid_argument("impossibility params: N_Q >= 0 required");
  if (p.N_P < 3 * p.N_Q)
    throw std::invalid_argument("impossibility params: N_P >= 3*N_Q required");
  if (!(p.c0 > 0.0) || p.c0 > 0.25)
    throw std::invalid_argument("impossibility params: c0 in (0, 1/4] required");
  if (!(p.c1 > 0.0) || p.c1 > 0.25)
    throw std::invalid_argument("impossibility params: c1 in (0, 1/4] required");
  if (p.sigma != -1 && p.sigma != 1)
    throw std::invalid_argument("impossibility params: sigma must be +1 or -1");

  std::vector<std::string> warnings;
  char buf[160];
  if (p.c1 > std::ldexp(1.0, -10))
    warnings.emplace_back("c1 above the full-strength threshold 2^-10: the flip-probability floor is not guaranteed");
  if (p.N_Q < 16)
    warnings.emplace_back("N_Q below 16: the flip-probability floor is not guaranteed");
  const double nNP = double(p.n) * double(p.N_P);
  const double nd = double(p.n);
  if (std::pow(nNP, (2.0 - 2.0 * p.beta) / (2.0 - p.beta)) <
      4096.0 * nd * nd / p.c1) {
    std::snprintf(buf, sizeof buf,
                  "(n*N_P)^((2-2b)/(2-b)) below 4096*n^2/c1: N_P too small for the mimic-count argument");
    warnings.emplace_back(buf);
  }
  if (std::pow(nNP, (2.0 - (nd + 1.0) * p.beta) / (2.0 - p.beta)) <
      4.0 * double(p.N_Q) * double(p.N_Q) * nd * std::ldexp(1.0, int(4 * p.n)) *
          std::pow(p.c1, -nd)) {
    warnings.emplace_back("(n*N_P)^((2-(n+1)b)/(2-b)) below 4*N_Q^2*n*2^{4n}/c1^n: decoys can swamp the mimics");
  }
  if (std::pow(double(p.N_P), (2.0 - (nd + 1.0) * p.beta) / (2.0 - p.beta)) <
      22.0 * nd * std::ldexp(1.0, int(p.n)) * std::pow(p.c1, -nd)) {
    warnings.emplace_back("N_P^((2-(n+1)b)/(2-b)) below 22*n*2^n/c1^n: homogeneous counts may not concentrate");
  }
  return warnings;
}

void build_impossibility_tasks(const ImpossibilityParams& p, TaskDistribution& D,
                               TaskDistribution& P, TaskDistribution& Q) {
  check_params(p);
  const auto dens = densities_for(p, p.sigma);
  P = TwoPointTask{dens[0].m1, dens[0].eta, 1.0};
  Q = TwoPointTask{dens[1].m1, dens[1].eta, 1.0};
  D = TwoPointTask{dens[2].m1, dens[2].eta, 1.0};
}

MultiSample sample_gamma(const ImpossibilityParams& p, Rng& rng) {
  check_params(p);
  const std::int64_t N = p.N_P + p.N_Q;
  if (N > (1 << 21))
    throw std::length_error("sample_gamma: too many vectors to materialize; use sample_gamma_stats");
  TaskDistribution D, P, Q;
  build_impossibility_tasks(p, D, P, Q);
  MultiSample Z;
  Z.datasets.reserve(std::size_t(N) + 1);
  const double aQ = p.alpha_Q();
  for (std::int64_t t = 0; t < N; ++t) {
    const bool is_q = rng.bernoulli(aQ);
    Z.datasets.push_back(sample(is_q ? Q : P, p.n, rng));
  }
  Z.datasets.push_back(sample(D, p.n_D, rng));
  return Z;
}

GammaStats gamma_stats_of(const MultiSample& Z, const ImpossibilityParams& p) {
  if (Z.datasets.empty())
    throw std::invalid_argument("gamma_stats_of: empty multisample");
  GammaStats s;
  const std::size_t N = Z.datasets.size() - 1;
  for (std::size_t t = 0; t < N; ++t) {
    const LabeledSample& ds = Z.datasets[t];
    if (std::int64_t(ds.size()) != p.n)
      throw std::invalid_argument("gamma_stats_of: source dataset size mismatch");
    std::int64_t a = 0, b = 0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      if (ds.x[i] == 1.0) {
        (ds.y[i] > 0 ? a : b)++;
      } else if (ds.x[i] == 0.0) {
        if (ds.y[i] < 0)
          throw std::invalid_argument("gamma_stats_of: (x0, -1) is off support");
      } else {
        throw std::invalid_argument("gamma_stats_of: sample off the two-point support");
      }
    }
    s.n_plus += a;
    s.n_minus += b;
    if (a == p.n) s.N_plus++;
    if (b == p.n) s.N_minus++;
  }
  s.n_tilde_plus = s.n_plus - p.n * s.N_plus;
  s.n_tilde_minus = s.n_minus - p.n * s.N_minus;
  const LabeledSample& tgt = Z.datasets.back();
  for (std::size_t i = 0; i < tgt.size(); ++i) {
    if (tgt.x[i] == 1.0) {
      (tgt.y[i] > 0 ? s.target_plus : s.target_minus)++;
    } else if (tgt.x[i] != 0.0 || tgt.y[i] < 0) {
      throw std::invalid_argument("gamma_stats_of: target sample off support");
    }
  }
  return s;
}

GammaStats sample_gamma_stats(const ImpossibilityParams& p, Rng& rng) {
  check_params(p);
  const std::int64_t N = p.N_P + p.N_Q;
  const double e = p.eps();
  const double w = p.c1 * std::pow(e, p.beta);
  const double eta = 0.5 + p.sigma * std::pow(e, 1.0 - p.beta);
  const double ph_plus = std::pow(w * eta, double(p.n));
  const double ph_minus = std::pow(w * (1.0 - eta), double(p.n));

  // fixed draw order (Q count, homogeneous counts, category counts, target)
  // keeps replications reproducible for a given stream
  GammaStats s;
  const std::int64_t K_Q = rng.binomial(N, p.alpha_Q());
  const std::int64_t M_P = N - K_Q;
  const std::int64_t H_plus = rng.binomial(M_P, ph_plus);
  const std::int64_t H_minus =
      rng.binomial(M_P - H_plus, std::min(1.0, ph_minus / (1.0 - ph_plus)));
  s.q_vectors = K_Q;
  s.p_homogeneous = H_plus + H_minus;

  std::int64_t remaining = M_P - H_plus - H_minus;
  if (p.n >= 2 && remaining > 0) {
    // aggregate the non-homogeneous vectors' x1-label counts by multinomial
    // cell, conditioning sequentially; the all-x0 cell absorbs the remainder
    double rem_mass = 1.0 - ph_plus - ph_minus;
    for (std::int64_t a = p.n; a >= 0 && remaining > 0; --a) {
      for (std::int64_t b = p.n - a; b >= 0 && remaining > 0; --b) {
        if ((a == p.n && b == 0) || (a == 0 && b == p.n)) continue;
        if (a == 0 && b == 0) {
          remaining = 0;
          break;
        }
        const double m_ab = trinomial(p.n, a, b) * std::pow(w * eta, double(a)) *
                            std::pow(w * (1.0 - eta), double(b)) *
                            std::pow(1.0 - w, double(p.n - a - b));
        const double q =
            rem_mass > 0.0 ? std::clamp(m_ab / rem_mass, 0.0, 1.0) : 0.0;
        const std::int64_t c = rng.binomial(remaining, q);
        s.n_tilde_plus += a * c;
        s.n_tilde_minus += b * c;
        remaining -= c;
        rem_mass -= m_ab;
      }
    }
  }

  const double mD = std::pow(p.eps0(), p.beta) / 2.0;
  const double etaD = 0.5 + p.sigma * p.c0 * std::pow(p.eps0(), 1.0 - p.beta);
  const std::int64_t t1 = rng.binomial(p.n_D, mD);
  s.target_plus = rng.binomial(t1, etaD);
  s.target_minus = t1 - s.target_plus;

  s.N_plus = H_plus + (p.sigma > 0 ? K_Q : 0);
  s.N_minus = H_minus + (p.sigma < 0 ? K_Q : 0);
  s.n_plus = s.n_tilde_plus + p.n * s.N_plus;
  s.n_minus = s.n_tilde_minus + p.n * s.N_minus;
  return s;
}

double likelihood_ratio_direct(const MultiSample& Z, const ImpossibilityParams& p) {
  if (Z.datasets.empty())
    throw std::invalid_argument("likelihood_ratio_direct: empty multisample");
  const auto plus = densities_for(p, +1);
  const auto minus = densities_for(p, -1);
  const double laP = std::log(p.alpha_P());
  const double laQ = p.N_Q > 0 ? std::log(p.alpha_Q()) : -kInf;
  double total = 0.0;
  const std::size_t N = Z.datasets.size() - 1;
  for (std::size_t t = 0; t < N; ++t) {
    const LabeledSample& ds = Z.datasets[t];
    if (std::int64_t(ds.size()) != p.n)
      throw std::invalid_argument("likelihood_ratio_direct: source dataset size mismatch");
    double lpp = 0.0, lqp = 0.0, lpm = 0.0, lqm = 0.0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      lpp += log_point_density(plus[0], ds.x[i], ds.y[i]);
      lqp += log_point_density(plus[1], ds.x[i], ds.y[i]);
      lpm += log_point_density(minus[0], ds.x[i], ds.y[i]);
      lqm += log_point_density(minus[1], ds.x[i], ds.y[i]);
    }
    total += logaddexp(laP + lpp, laQ + lqp) - logaddexp(laP + lpm, laQ + lqm);
  }
  const LabeledSample& tgt = Z.datasets.back();
  for (std::size_t i = 0; i < tgt.size(); ++i)
    total += log_point_density(plus[2], tgt.x[i], tgt.y[i]) -
             log_point_density(minus[2], tgt.x[i], tgt.y[i]);
  return total;
}

double likelihood_ratio_decomposed(const GammaStats& s, const ImpossibilityParams& p) {
  const double e = p.eps();
  const double bump = std::pow(e, 1.0 - p.beta);
  const double etap = 0.5 + bump, etam = 0.5 - bump;
  const double u = std::log(etap) - std::log(etam);
  const double w = p.c1 * std::pow(e, p.beta);
  const double x = p.alpha_P() * std::pow(w * etap, double(p.n));
  const double v = std::log(x + p.alpha_Q()) - std::log(x);
  const double e0 = p.eps0();
  const double dbump = p.c0 * std::pow(e0, 1.0 - p.beta);
  const double wl = std::log(0.5 + dbump) - std::log(0.5 - dbump);
  return double(s.n_plus - s.n_minus) * u + double(s.N_plus - s.N_minus) * v +
         double(s.target_plus - s.target_minus) * wl;
}

int bayes_discriminant(const GammaStats& s, const ImpossibilityParams& p) {
  const long long A = s.n_plus - s.n_minus;
  const long long B = s.N_plus - s.N_minus;
  const long long C = s.target_plus - s.target_minus;
  if (A == 0 && B == 0 && C == 0) return -1;
  {
    const double e = p.eps();
    const double bump = std::pow(e, 1.0 - p.beta);
    const double u = std::log(0.5 + bump) - std::log(0.5 - bump);
    const double w = p.c1 * std::pow(e, p.beta);
    const double x = p.alpha_P() * std::pow(w * (0.5 + bump), double(p.n));
    const double v = std::log(x + p.alpha_Q()) - std::log(x);
    const double dbump = p.c0 * std::pow(p.eps0(), 1.0 - p.beta);
    const double wl = std::log(0.5 + dbump) - std::log(0.5 - dbump);
    const double ta = double(A) * u, tb = double(B) * v, tc = double(C) * wl;
    const double total = ta + tb + tc;
    const double scale = std::fabs(ta) + std::fabs(tb) + std::fabs(tc);
    if (std::isfinite(total) && std::fabs(total) > 1e-12 * scale)
      return total > 0.0 ? +1 : -1;
  }
  for (mpfr_prec_t prec : {mpfr_prec_t(256), mpfr_prec_t(1024)}) {
    bool decided = false;
    const int sg = decomposed_sign_mpfr(A, B, C, p, prec, &decided);
    if (decided) return sg > 0 ? +1 : -1;
  }
  return -1;  // unresolved at 1024 bits: treat as a tie
}

ImpossibilityReport impossibility_report(const ImpossibilityParams& p,
                                         std::int64_t reps, Rng& rng) {
  if (p.sigma != -1)
    throw std::invalid_argument("impossibility_report: defined under the sigma = -1 measure");
  if (reps < 1) throw std::invalid_argument("impossibility_report: reps >= 1 required");
  check_params(p);
  const double e = p.eps();
  const double w = p.c1 * std::pow(e, p.beta);
  const double bump = std::pow(e, 1.0 - p.beta);
  const double enp = double(p.N_P) * std::pow(w, double(p.n)) *
                     (std::pow(0.5 + bump, double(p.n)) + std::pow(0.5 - bump, double(p.n)));
  std::int64_t flip = 0, ngt = 0, joint = 0, tev = 0;
  for (std::int64_t r = 0; r < reps; ++r) {
    const GammaStats s = sample_gamma_stats(p, rng);
    flip += bayes_discriminant(s, p) == +1;
    ngt += s.N_plus > s.N_minus;
    const bool ep =
        2.0 * double(s.p_homogeneous) >= enp && double(s.p_homogeneous) <= 2.0 * enp;
    const bool eq = s.q_vectors <= 2 * p.N_Q;
    joint += ep && eq;
    tev += s.target_plus >= s.target_minus;
  }
  ImpossibilityReport rep;
  rep.reps = reps;
  rep.expected_hom_P = enp;
  rep.flip_freq = double(flip) / double(reps);
  rep.flip_se = se_of(rep.flip_freq, reps);
  rep.nhat_gt_freq = double(ngt) / double(reps);
  rep.nhat_gt_se = se_of(rep.nhat_gt_freq, reps);
  rep.joint_event_freq = double(joint) / double(reps);
  rep.joint_event_se = se_of(rep.joint_event_freq, reps);
  rep.target_event_freq = double(tev) / double(reps);
  rep.target_event_se = se_of(rep.target_event_freq, reps);
  return rep;
}

std::pair<double, double> estimate_flip_probability(const ImpossibilityParams& p,
                                                    std::int64_t reps, Rng& rng) {
  const ImpossibilityReport rep = impossibility_report(p, reps, rng);
  return {rep.flip_freq, rep.flip_se};
}

EventReport verify_event_probabilities(const ImpossibilityParams& p,
                                       std::int64_t reps, Rng& rng) {
  if (p.sigma != -1)
    throw std::invalid_argument("verify_event_probabilities: defined under the sigma = -1 measure");
  if (reps < 1) throw std::invalid_argument("verify_event_probabilities: reps >= 1 required");
  check_params(p);
  const double e = p.eps();
  const double w = p.c1 * std::pow(e, p.beta);
  const double bump = std::pow(e, 1.0 - p.beta);
  const double enp = double(p.N_P) * std::pow(w, double(p.n)) *
                     (std::pow(0.5 + bump, double(p.n)) + std::pow(0.5 - bump, double(p.n)));
  std::int64_t ep_fail = 0, eq_fail = 0;
  for (std::int64_t r = 0; r < reps; ++r) {
    const GammaStats s = sample_gamma_stats(p, rng);
    ep_fail += !(2.0 * double(s.p_homogeneous) >= enp &&
                 double(s.p_homogeneous) <= 2.0 * enp);
    eq_fail += !(s.q_vectors <= 2 * p.N_Q);
  }
  EventReport rep;
  rep.reps = reps;
  rep.expected_hom_P = enp;
  rep.ep_fail_freq = double(ep_fail) / double(reps);
  rep.ep_chernoff = 2.0 * std::exp(-enp / 8.0);
  rep.eq_fail_freq = double(eq_fail) / double(reps);
  rep.eq_chernoff = std::exp(-double(p.N_Q) / 3.0);
  rep.ep_ok = rep.ep_fail_freq <= rep.ep_chernoff + 3.0 * se_of(rep.ep_fail_freq, reps);
  rep.eq_ok = rep.eq_fail_freq <= rep.eq_chernoff + 3.0 * se_of(rep.eq_fail_freq, reps);
  return rep;
}

std::vector<std::vector<std::int8_t>> vg_packing(int d) {
  if (d < 8) throw std::invalid_argument("vg_packing: d >= 8 required");
  if (d > 24)
    throw std::invalid_argument("vg_packing: d <= 24 supported (bitmap-sized search space)");
  const int D = (d + 7) / 8;  // distance floor, ceil(d/8)
  const std::uint32_t space = 1u << d;
  std::vector<bool> blocked(space, false);
  std::vector<std::uint32_t> admitted;
  for (std::uint32_t m = space - 1;; --m) {
    if (!blocked[m]) {
      admitted.push_back(m);
      blocked[m] = true;
      if (D >= 2)
        for (int i = 0; i < d; ++i) blocked[m ^ (1u << i)] = true;
      if (D >= 3)
        for (int i = 0; i < d; ++i)
          for (int j = i + 1; j < d; ++j) blocked[m ^ (1u << i) ^ (1u << j)] = true;
    }
    if (m == 0) break;
  }
  std::vector<std::vector<std::int8_t>> out;
  out.reserve(admitted.size());
  for (std::uint32_t m : admitted) {
    std::vector<std::int8_t> v(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) v[std::size_t(i)] = (m >> i) & 1u ? +1 : -1;
    out.push_back(std::move(v));
  }
  if (out.size() < (std::size_t(1) << (d / 8)))
    throw std::logic_error("vg_packing: output below the guaranteed size");
  return out;
}

bool verify_packing_distance(const std::vector<std::vector<std::int8_t>>& vecs,
                             int min_dist) {
  if (min_dist < 1) throw std::invalid_argument("verify_packing_distance: min_dist >= 1");
  if (vecs.empty()) return true;
  const std::size_t d = vecs.front().size();
  if (d > 32) throw std::invalid_argument("verify_packing_distance: dimension above 32");
  std::vector<std::uint32_t> masks;
  masks.reserve(vecs.size());
  for (const auto& v : vecs) {
    if (v.size() != d)
      throw std::invalid_argument("verify_packing_distance: ragged input");
    std::uint32_t m = 0;
    for (std::size_t i = 0; i < d; ++i) {
      if (v[i] != 1 && v[i] != -1)
        throw std::invalid_argument("verify_packing_distance: entries must be +-1");
      if (v[i] == 1) m |= 1u << i;
    }
    masks.push_back(m);
  }
  if (min_dist <= 3) {
    // ball membership: no other vector within radius min_dist - 1
    std::unordered_set<std::uint32_t> set(masks.begin(), masks.end());
    if (set.size() != masks.size()) return false;
    for (std::uint32_t m : masks) {
      if (min_dist >= 2)
        for (std::size_t i = 0; i < d; ++i)
          if (set.count(m ^ (1u << i))) return false;
      if (min_dist >= 3)
        for (std::size_t i = 0; i < d; ++i)
          for (std::size_t j = i + 1; j < d; ++j)
            if (set.count(m ^ (1u << i) ^ (1u << j))) return false;
    }
    return true;
  }
  for (std::size_t i = 0; i < masks.size(); ++i)
    for (std::size_t j = i + 1; j < masks.size(); ++j)
      if (__builtin_popcount(masks[i] ^ masks[j]) < min_dist) return false;
  return true;
}

MultisourceInstance build_impossibility_instance(const ImpossibilityParams& p) {
  check_params(p);
  const std::int64_t N = p.N_P + p.N_Q;
  if (N > (1 << 21))
    throw std::length_error(
        "build_impossibility_instance: too many tasks to materialize; use sample_gamma_stats");
  const double rho = p.rho_P();
  if (!(rho >= 1.0))
    throw std::invalid_argument(
        "build_impossibility_instance: parameters give a source transfer exponent below 1");
  TaskDistribution D, P, Q;
  build_impossibility_tasks(p, D, P, Q);
  MultisourceInstance inst;
  inst.tasks.reserve(std::size_t(N) + 1);
  inst.sample_sizes.reserve(std::size_t(N) + 1);
  inst.declared_rhos.reserve(std::size_t(N) + 1);
  for (std::int64_t i = 0; i < p.N_Q; ++i) {
    inst.tasks.push_back(Q);
    inst.sample_sizes.push_back(p.n);
    inst.declared_rhos.push_back(1.0);
  }
  for (std::int64_t i = 0; i < p.N_P; ++i) {
    inst.tasks.push_back(P);
    inst.sample_sizes.push_back(p.n);
    inst.declared_rhos.push_back(rho);
  }
  inst.tasks.push_back(D);
  inst.sample_sizes.push_back(p.n_D);
  inst.declared_rhos.push_back(1.0);
  inst.beta = p.beta;
  inst.C_beta = std::max(0.5 * std::pow(p.c0, -p.beta), 2.0);
  inst.C_rho = 3.0;
  FiniteClass cls;
  cls.support_size = 2;
  cls.members = {Table{{1, 1}}, Table{{1, -1}}};
  inst.cls = std::move(cls);
  return inst;
}

MultisourceInstance build_lower_bound_instance(const std::vector<double>& rhos,
                                               double beta, int d,
                                               std::size_t sigma_index,
                                               double epsilon) {
  if (rhos.empty())
    throw std::invalid_argument("build_lower_bound_instance: at least one source exponent");
  const auto packing = vg_packing(d);
  if (sigma_index >= packing.size())
    throw std::out_of_range("build_lower_bound_instance: sigma_index exceeds the packing size");
  const auto& sigma = packing[sigma_index];
  MultisourceInstance inst;
  inst.tasks = make_lower_bound_family(rhos, beta, epsilon, d, sigma);
  inst.tasks.push_back(make_lower_bound_family({1.0}, beta, epsilon, d, sigma).front());
  inst.declared_rhos = rhos;
  inst.declared_rhos.push_back(1.0);
  inst.sample_sizes.assign(rhos.size() + 1, 1);
  inst.beta = beta;
  inst.C_beta = 2.0;
  inst.C_rho = 2.0;
  FiniteClass cls;
  cls.support_size = d + 1;
  cls.members.reserve(packing.size());
  for (const auto& sv : packing) {
    Table t;
    t.labels.resize(std::size_t(d) + 1);
    t.labels[0] = 1;
    for (int i = 0; i < d; ++i) t.labels[std::size_t(i) + 1] = sv[std::size_t(i)];
    cls.members.push_back(std::move(t));
  }
  inst.cls = std::move(cls);
  return inst;
}

}  // namespace msl

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "prodnet/eigensym.hpp"
#include "prodnet/linalg.hpp"
#include "prodnet/network.hpp"
#include "prodnet/propagate.hpp"
#include "prodnet/rng.hpp"
#include "prodnet/shocks.hpp"

namespace prodnet {

struct RiskMeta {
  int n = 0;
  int T = 0;
  double lambda2 = 0.0;
  double sigma = 0.0;
  double b = 0.0;
  std::uint64_t seed = 0;
};

struct RiskReport {
  double phi = 0.0;
  double phi_star = 0.0;
  double phi_hat = 0.0;
  double phi_hat_star = 0.0;
  double omega_c = 0.0;
  double omega_c_star = 0.0;
  double omega_hat_c = 0.0;
  double omega_hat_c_star = 0.0;
  double R = 0.0;
  double kappa = 0.0;
  double c = 0.0;
  RiskMeta meta;
};

// ---------- population formulas ----------

// Increment variance of the per-date fully propagated aggregate:
// 2 sigma^2 |gamma^T (I-A)^{-1}|^2.
inline double population_static_variance(const ProductionNetwork& net, double sigma,
                                         double tol = 1e-12) {
  const Vec w = static_weights(net, tol);
  return 2.0 * sigma * sigma * dot(w, w);
}

// Increment variance of the flow-aggregated round-based economy.  Writing
// B_j for the sum of A^l over the j-th block of L layers, the increment
// loads eps_t through gamma^T B_0 and eps_{t-j} through gamma^T (B_j -
// B_{j-1}); independence across dates turns the variance into a sum of
// squared norms, summed here until the geometric tail is negligible.
inline double population_L_variance(const ProductionNetwork& net, double sigma, int L,
                                    double tol = 1e-12) {
  if (L < 1) throw std::invalid_argument("population_L_variance: L must be positive");
  const int n = net.n;
  Vec cur = net.gamma, tmp(n);  // (A^T)^l gamma walker
  Vec c_prev(n, 0.0), c_cur(n);
  KahanSum total;
  int low_term_streak = 0;
  for (int j = 0; j < 100000; ++j) {
    std::fill(c_cur.begin(), c_cur.end(), 0.0);
    for (int l = 0; l < L; ++l) {
      for (int i = 0; i < n; ++i) c_cur[i] += cur[i];
      net.A.tmatvec(cur, tmp);
      cur.swap(tmp);
    }
    double term = 0.0;
    if (j == 0) {
      term = dot(c_cur, c_cur);
    } else {
      KahanSum d;
      for (int i = 0; i < n; ++i) {
        const double diff = c_cur[i] - c_prev[i];
        d.add(diff * diff);
      }
      term = d.value();
    }
    total.add(term);
    c_prev.swap(c_cur);
    const double running = total.value();
    if (j > 0 && term <= tol * std::max(running, 1e-300)) {
      if (++low_term_streak >= 2 && norm1(cur) <= tol) break;
    } else {
      low_term_streak = 0;
    }
  }
  return sigma * sigma * total.value();
}

struct TwoModeVariances {
  double phi = 0.0;
  double phi_star = 0.0;
};

// phi = 2 b^2 sigma^2 / (1 + lambda2); phi* = 2 b^2 sigma^2 / (1 - lambda2)^2.
inline TwoModeVariances twomode_variances(double b, double lambda2, double sigma) {
  if (!(lambda2 >= 0.0 && lambda2 < 1.0))
    throw std::invalid_argument("twomode_variances: lambda2 outside [0,1)");
  TwoModeVariances v;
  const double bs = b * b * sigma * sigma;
  v.phi = 2.0 * bs / (1.0 + lambda2);
  v.phi_star = 2.0 * bs / ((1.0 - lambda2) * (1.0 - lambda2));
  return v;
}

inline double attenuation_ratio(double lambda2) {
  if (!(lambda2 >= 0.0 && lambda2 < 1.0))
    throw std::invalid_argument("attenuation_ratio: lambda2 outside [0,1)");
  return (1.0 - lambda2) * (1.0 - lambda2) / (1.0 + lambda2);
}

inline double level_ratio_closed(double lambda2) {
  if (!(lambda2 >= 0.0 && lambda2 < 1.0))
    throw std::invalid_argument("level_ratio_closed: lambda2 outside [0,1)");
  return (1.0 - lambda2) / (1.0 + lambda2);
}

// ---------- realized estimators ----------

inline Vec increments(const Vec& y) {
  if (y.size() < 2) throw std::invalid_argument("increments: need at least two points");
  Vec d(y.size() - 1);
  for (std::size_t t = 1; t < y.size(); ++t) d[t - 1] = y[t] - y[t - 1];
  return d;
}

inline double sample_mean(const Vec& v) {
  KahanSum s;
  for (double x : v) s.add(x);
  return s.value() / static_cast<double>(v.size());
}

inline double sample_variance(const Vec& v) {
  if (v.size() < 2) throw std::invalid_argument("sample_variance: need at least two points");
  const double m = sample_mean(v);
  KahanSum s;
  for (double x : v) s.add((x - m) * (x - m));
  return s.value() / static_cast<double>(v.size() - 1);
}

// Window volatility with the mean increment removed; divisor is the number
// of increments T-1.
inline double realized_volatility(const Vec& y) {
  if (y.size() < 3) throw std::invalid_argument("realized_volatility: need at least three points");
  const Vec d = increments(y);
  const double m = sample_mean(d);
  KahanSum s;
  for (double x : d) s.add((x - m) * (x - m));
  return s.value() / static_cast<double>(d.size());
}

// Same divisor, no demeaning; the version whose expectation is exactly the
// population increment variance in the static benchmark.
inline double realized_volatility_raw(const Vec& y) {
  if (y.size() < 2)
    throw std::invalid_argument("realized_volatility_raw: need at least two points");
  const Vec d = increments(y);
  KahanSum s;
  for (double x : d) s.add(x * x);
  return s.value() / static_cast<double>(d.size());
}

// Fraction of increments below -c.
inline double realized_tail(const Vec& y, double c) {
  if (!(c > 0.0)) throw std::invalid_argument("realized_tail: c must be positive");
  const Vec d = increments(y);
  std::size_t hits = 0;
  for (double x : d)
    if (x < -c) ++hits;
  return static_cast<double>(hits) / static_cast<double>(d.size());
}

// ---------- tails ----------

inline double gaussian_tail(double phi, double c) {
  if (!(phi >= 0.0)) throw std::invalid_argument("gaussian_tail: variance must be nonnegative");
  if (c < 0.0) throw std::invalid_argument("gaussian_tail: threshold must be nonnegative");
  if (phi == 0.0) return c > 0.0 ? 0.0 : 0.5;
  return normal_lower_tail(c / std::sqrt(phi));
}

struct TailRatio {
  double exact = 0.0;
  double asymptotic = 0.0;
};

// Ratio of lower-tail probabilities at threshold x under variance kappa vs 1,
// plus its large-x Mills-ratio approximation.
inline TailRatio tail_ratio(double kappa, double x) {
  if (!(kappa > 0.0 && kappa <= 1.0)) throw std::invalid_argument("tail_ratio: kappa outside (0,1]");
  if (!(x > 0.0)) throw std::invalid_argument("tail_ratio: x must be positive");
  TailRatio r;
  r.exact = normal_lower_tail(x * std::sqrt(kappa)) / normal_lower_tail(x);
  r.asymptotic = std::exp(0.5 * x * x * (1.0 - kappa)) / std::sqrt(kappa);
  return r;
}

// ---------- finite-horizon machinery ----------

struct OverlapMatrices {
  Dense K;  // T x T lower triangular, K_{tq} = lambda2^{t-q} for q <= t
  Dense D;  // (T-1) x T first differences
};

inline OverlapMatrices build_overlap_matrices(double lambda2, int T) {
  if (T < 2) throw std::invalid_argument("build_overlap_matrices: T must be at least 2");
  OverlapMatrices m;
  m.K = Dense(T, T);
  for (int t = 0; t < T; ++t) {
    double p = 1.0;
    for (int q = t; q >= 0; --q) {
      m.K.at(t, q) = p;
      p *= lambda2;
    }
  }
  m.D = Dense(T - 1, T);
  for (int t = 0; t < T - 1; ++t) {
    m.D.at(t, t) = -1.0;
    m.D.at(t, t + 1) = 1.0;
  }
  return m;
}

// Covariance of the dynamic-level increments under unit innovations,
// entries from second differences of Cov(s_t, s_q) =
// lambda^{|t-q|} (1 - lambda^{2 min(t,q)}) / (1 - lambda^2), with s_0 = 0.
inline Dense increment_covariance(double lambda2, int T) {
  if (T < 2) throw std::invalid_argument("increment_covariance: T must be at least 2");
  if (!(std::fabs(lambda2) < 1.0))
    throw std::invalid_argument("increment_covariance: |lambda2| must be below 1");
  Vec pw(2 * T + 2);
  pw[0] = 1.0;
  for (std::size_t k = 1; k < pw.size(); ++k) pw[k] = pw[k - 1] * lambda2;
  const double om = 1.0 - lambda2 * lambda2;
  auto G = [&](int t, int s) {
    if (t == 0 || s == 0) return 0.0;
    const int mn = std::min(t, s);
    return pw[std::abs(t - s)] * (1.0 - pw[2 * mn]) / om;
  };
  Dense M(T - 1, T - 1);
  for (int a = 1; a <= T - 1; ++a)
    for (int c = a; c <= T - 1; ++c) {
      const double v = G(a + 1, c + 1) - G(a, c + 1) - G(a + 1, c) + G(a, c);
      M.at(a - 1, c - 1) = v;
      M.at(c - 1, a - 1) = v;
    }
  return M;
}

// Static counterpart D D^T: the (T-1) tridiagonal second-difference matrix.
inline Dense increment_covariance_static(int T) {
  if (T < 2) throw std::invalid_argument("increment_covariance_static: T must be at least 2");
  Dense M(T - 1, T - 1);
  for (int a = 0; a < T - 1; ++a) {
    M.at(a, a) = 2.0;
    if (a > 0) M.at(a, a - 1) = -1.0;
    if (a + 1 < T - 1) M.at(a, a + 1) = -1.0;
  }
  return M;
}

struct FiniteTSpectrum {
  int T = 0;
  double lambda2 = 0.0;
  Vec nu_star;  // eigenvalues of D D^T, descending
  Vec nu;       // eigenvalues of D K K^T D^T, descending
  double nu_max = 0.0;
};

// Trace of the dynamic increment covariance in closed form:
// sum_{t=1}^{T-1} [1 + ((1-l)/(1+l)) (1 - l^{2t})].
inline double trace_identity_value(double lambda2, int T) {
  const double f = (1.0 - lambda2) / (1.0 + lambda2);
  KahanSum s;
  double l2t = 1.0;
  const double l2 = lambda2 * lambda2;
  for (int t = 1; t <= T - 1; ++t) {
    l2t *= l2;
    s.add(1.0 + f * (1.0 - l2t));
  }
  return s.value();
}

inline Vec nu_star_analytic(int T) {
  Vec v(T - 1);
  for (int j = 1; j <= T - 1; ++j) v[j - 1] = 2.0 - 2.0 * std::cos(j * M_PI / T);
  std::sort(v.begin(), v.end(), std::greater<double>());
  return v;
}

namespace detail {

inline void frobenius_certificate(const Dense& M, const Vec& nu, const char* what) {
  KahanSum f2, n2;
  for (double x : M.a) f2.add(x * x);
  for (double x : nu) n2.add(x * x);
  const double ref = std::max(f2.value(), 1e-300);
  if (std::fabs(f2.value() - n2.value()) > 1e-9 * ref)
    throw std::runtime_error(std::string(what) + ": eigenvalue certificate failed");
}

}  // namespace detail

// Both spectra of the window quadratic forms, descending, with trace and
// Frobenius certificates on the eigensolves.
inline FiniteTSpectrum finite_T_spectra(double lambda2, int T) {
  FiniteTSpectrum s;
  s.T = T;
  s.lambda2 = lambda2;
  const Dense Mstar = increment_covariance_static(T);
  s.nu_star = symmetric_eigenvalues(Mstar);
  detail::frobenius_certificate(Mstar, s.nu_star, "finite_T_spectra[static]");
  const Dense M = increment_covariance(lambda2, T);
  s.nu = symmetric_eigenvalues(M);
  detail::frobenius_certificate(M, s.nu, "finite_T_spectra[dynamic]");
  for (double v : s.nu) s.nu_max = std::max(s.nu_max, v);
  return s;
}

// Expectation of the raw window volatility of the dynamic path:
// sigma^2 b^2 (1/(T-1)) tr M, by the closed trace formula.  Monotone in T
// toward the population increment variance.
inline double expected_phi_hat_raw(double lambda2, double b, double sigma, int T) {
  if (T < 2) throw std::invalid_argument("expected_phi_hat_raw: T must be at least 2");
  return sigma * sigma * b * b * trace_identity_value(lambda2, T) / (T - 1);
}

// ---------- coupled sampling and dominance ----------

struct QuadraticFormSample {
  Vec phi_hat;
  Vec phi_hat_star;
};

// Weighted chi-square draws of both window volatilities with one shared
// standard-normal vector per draw, weights paired by descending rank.
inline QuadraticFormSample sample_quadratic_form(const FiniteTSpectrum& sp, double b,
                                                 double sigma, int draws, std::uint64_t seed) {
  if (draws < 1) throw std::invalid_argument("sample_quadratic_form: draws must be positive");
  const int m = sp.T - 1;
  if (static_cast<int>(sp.nu.size()) != m || static_cast<int>(sp.nu_star.size()) != m)
    throw std::invalid_argument("sample_quadratic_form: spectrum size mismatch");
  const double f_dyn = sigma * sigma * b * b / m;
  const double f_sta = f_dyn / ((1.0 - sp.lambda2) * (1.0 - sp.lambda2));
  QuadraticFormSample out;
  out.phi_hat.resize(draws);
  out.phi_hat_star.resize(draws);
  for (int r = 0; r < draws; ++r) {
    CounterRng rng(seed, kStreamScalar + static_cast<std::uint64_t>(r));
    KahanSum a, as;
    for (int j = 0; j < m; ++j) {
      const double z = rng.gaussian(static_cast<std::uint64_t>(j));
      const double z2 = z * z;
      a.add(sp.nu[j] * z2);
      as.add(sp.nu_star[j] * z2);
    }
    out.phi_hat[r] = f_dyn * a.value();
    out.phi_hat_star[r] = f_sta * as.value();
  }
  return out;
}

struct FosdCheck {
  bool condition_holds = false;
  double nu_max = 0.0;
  double bound = 0.0;
};

// Sufficient condition for pathwise dominance of the coupled draws:
// nu_max <= (1 - lambda2)^{-2}.
inline FosdCheck fosd_check(const FiniteTSpectrum& sp, double lambda2) {
  if (std::fabs(sp.lambda2 - lambda2) > 1e-12)
    throw std::invalid_argument("fosd_check: spectrum built at a different lambda2");
  FosdCheck f;
  f.nu_max = sp.nu_max;
  f.bound = 1.0 / ((1.0 - lambda2) * (1.0 - lambda2));
  f.condition_holds = f.nu_max <= f.bound * (1.0 + 1e-12);
  return f;
}

inline long long coupled_violation_count(const QuadraticFormSample& s, double tol = 1e-12) {
  long long v = 0;
  for (std::size_t r = 0; r < s.phi_hat.size(); ++r)
    if (s.phi_hat_star[r] - s.phi_hat[r] < -tol) ++v;
  return v;
}

// Two-sample Kolmogorov-Smirnov statistic.
inline double ks_statistic(Vec a, Vec b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_statistic: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::fabs(i / na - j / nb));
  }
  return d;
}

// ---------- overshooting ----------

struct ReversalIncrements {
  double dy = 0.0;
  double dy_star = 0.0;
};

// One coupled increment pair from stationary state s_prev and innovations
// (eta_prev, eta_cur).
inline ReversalIncrements reversal_increments(double lambda2, double b, double s_prev,
                                              double eta_prev, double eta_cur) {
  ReversalIncrements r;
  r.dy = b * ((lambda2 - 1.0) * s_prev + eta_prev);
  r.dy_star = b / (1.0 - lambda2) * (eta_cur - eta_prev);
  return r;
}

struct OvershootReport {
  double rate_any = 0.0;     // |dy| > |dy*|
  double rate_margin = 0.0;  // |dy| > |dy*| + margin
  long long count_pp = 0, count_pm = 0, count_mp = 0, count_mm = 0;  // (sign dy, sign dy*)
  long long reps = 0;
  double margin = 0.0;
  double n_scaling = 0.0;
  int T = 0;
};

// Monte Carlo frequencies of dynamic increments exceeding the static ones in
// magnitude, with innovations shrunk by n_scaling^{-1/2} and the margin held
// fixed.  Each replication draws the stationary state exactly.
inline OvershootReport overshoot_diagnostics(double lambda2, double b, double sigma,
                                             double n_scaling, int T, long long reps,
                                             double margin, std::uint64_t seed) {
  if (!(lambda2 >= 0.0 && lambda2 < 1.0))
    throw std::invalid_argument("overshoot_diagnostics: lambda2 outside [0,1)");
  if (margin < 0.0) throw std::invalid_argument("overshoot_diagnostics: negative margin");
  if (reps < 1) throw std::invalid_argument("overshoot_diagnostics: reps must be positive");
  const double sigma_n = sigma / std::sqrt(n_scaling);
  const double sd_state = sigma_n / std::sqrt(1.0 - lambda2 * lambda2);
  OvershootReport rep;
  rep.reps = reps;
  rep.margin = margin;
  rep.n_scaling = n_scaling;
  rep.T = T;
  long long any = 0, marg = 0;
  for (long long r = 0; r < reps; ++r) {
    CounterRng rng(seed, kStreamScalar + static_cast<std::uint64_t>(r));
    const double s_prev = sd_state * rng.gaussian(0);
    const double eta_prev = sigma_n * rng.gaussian(1);
    const double eta_cur = sigma_n * rng.gaussian(2);
    const ReversalIncrements ri = reversal_increments(lambda2, b, s_prev, eta_prev, eta_cur);
    if (std::fabs(ri.dy) > std::fabs(ri.dy_star)) ++any;
    if (std::fabs(ri.dy) > std::fabs(ri.dy_star) + margin) ++marg;
    if (ri.dy >= 0.0) {
      (ri.dy_star >= 0.0 ? rep.count_pp : rep.count_pm)++;
    } else {
      (ri.dy_star >= 0.0 ? rep.count_mp : rep.count_mm)++;
    }
  }
  rep.rate_any = static_cast<double>(any) / static_cast<double>(reps);
  rep.rate_margin = static_cast<double>(marg) / static_cast<double>(reps);
  return rep;
}

// ---------- levels vs increments ----------

struct LevelsIncrements {
  double ratio_levels = 0.0;
  double ratio_increments = 0.0;
  double closed_levels = 0.0;
  double closed_increments = 0.0;
  int burn_in = 0;
};

// Simulated stationary variance ratios of the dynamic path against its
// static twin, with geometric burn-in, against the closed forms.
inline LevelsIncrements levels_vs_increments(double lambda2, double b, double sigma, int T,
                                             std::uint64_t seed) {
  if (!(lambda2 >= 0.0 && lambda2 < 1.0))
    throw std::invalid_argument("levels_vs_increments: lambda2 outside [0,1)");
  if (T < 10) throw std::invalid_argument("levels_vs_increments: window too short");
  const int burn = static_cast<int>(std::ceil(50.0 / (1.0 - lambda2)));
  const int total = burn + T;
  CounterRng rng(seed, kStreamScalar);
  Vec eta(total);
  for (int t = 0; t < total; ++t) eta[t] = sigma * rng.gaussian(static_cast<std::uint64_t>(t));
  const Vec y_all = simulate_reduced(lambda2, b, eta);
  const Vec ystar_all = static_reduced(lambda2, b, eta);
  Vec y(y_all.begin() + burn, y_all.end());
  Vec ystar(ystar_all.begin() + burn, ystar_all.end());
  LevelsIncrements out;
  out.burn_in = burn;
  out.ratio_levels = sample_variance(y) / sample_variance(ystar);
  out.ratio_increments = sample_variance(increments(y)) / sample_variance(increments(ystar));
  out.closed_levels = level_ratio_closed(lambda2);
  out.closed_increments = attenuation_ratio(lambda2);
  return out;
}

// ---------- consolidated report ----------

inline RiskReport make_risk_report(double lambda2, double b, double sigma, int T, double c,
                                   std::uint64_t seed) {
  if (T < 3) throw std::invalid_argument("make_risk_report: window too short");
  CounterRng rng(seed, kStreamScalar);
  Vec eta(T);
  for (int t = 0; t < T; ++t) eta[t] = sigma * rng.gaussian(static_cast<std::uint64_t>(t));
  const Vec y = simulate_reduced(lambda2, b, eta);
  const Vec ystar = static_reduced(lambda2, b, eta);
  const TwoModeVariances v = twomode_variances(b, lambda2, sigma);
  RiskReport r;
  r.phi = v.phi;
  r.phi_star = v.phi_star;
  r.phi_hat = realized_volatility(y);
  r.phi_hat_star = realized_volatility(ystar);
  r.omega_c = gaussian_tail(v.phi, c);
  r.omega_c_star = gaussian_tail(v.phi_star, c);
  r.omega_hat_c = realized_tail(y, c);
  r.omega_hat_c_star = realized_tail(ystar, c);
  r.R = attenuation_ratio(lambda2);
  r.kappa = v.phi_star > 0.0 ? v.phi / v.phi_star : 0.0;
  r.c = c;
  r.meta = RiskMeta{0, T, lambda2, sigma, b, seed};
  return r;
}

}  // namespace prodnet

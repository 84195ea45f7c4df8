#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "prodnet/linalg.hpp"
#include "prodnet/network.hpp"
#include "prodnet/rng.hpp"
#include "prodnet/shocks.hpp"

namespace prodnet {

struct PerronResult {
  double lambda1 = 0.0;
  Vec u1;  // left eigenvector, unit 2-norm, nonnegative
  Vec v1;  // right eigenvector, scaled so u1.v1 = 1, nonnegative
  int iterations = 0;
  double residual = 0.0;
  bool left_is_uniform = false;
  double positivity = 0.0;  // min(v1)/max(v1); near zero flags reducible structure
};

struct TransientResult {
  double lambda2 = 0.0;      // signed value when real, 0 when complex/rank-one
  double lambda2_mod = 0.0;  // modulus in every case
  bool is_complex = false;   // u2/v2 then hold the invariant-plane basis
  bool is_tied = false;
  Vec u2;  // left eigenvector for a real isolated mode
  Vec v2;  // right eigenvector for a real isolated mode
  int iterations = 0;
  double residual = 0.0;
};

struct ModePair {
  Vec u;     // unit 2-norm
  Vec v;     // scaled so u.v = 1
  double b;  // gamma . v
};

struct SpectralSummary {
  double lambda1 = 0.0;
  double lambda2 = 0.0;      // signed value when real and isolated
  double lambda2_mod = 0.0;
  double gap = 0.0;          // lambda1 - lambda2_mod
  bool lambda2_complex = false;
  bool lambda2_tied = false;
  double b = 0.0;            // gamma . v2_norm
  Vec u1, v1;                // Perron pair, u1 unit norm, u1.v1 = 1
  Vec u2, v2;                // transient pair as extracted
  Vec u2_norm, v2_norm;      // biorthogonal normalization of the same pair
  int perron_iterations = 0;
  int transient_iterations = 0;
  double perron_residual = 0.0;
  double transient_residual = 0.0;
};

namespace detail {

inline Vec seeded_unit_vector(int n, std::uint64_t stream) {
  CounterRng rng(0x5eedULL, stream);
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.gaussian(static_cast<std::uint64_t>(i));
  const double nn = norm2(v);
  for (double& x : v) x /= nn;
  return v;
}

}  // namespace detail

// Dominant eigentriple of a nonnegative share matrix by power iteration on
// A + cI; the positive diagonal shift removes rotation on periodic graphs.
// The uniform left vector is tried first via its residual, since constant
// column sums make it exact.
inline PerronResult perron(const Sparse& A, double tol = 1e-13, int max_iter = 200000) {
  const int n = A.n;
  if (n < 1) throw std::invalid_argument("perron: empty matrix");
  const Vec cs = A.col_sums();
  double cs_max = 0.0, cs_mean = 0.0;
  for (double c : cs) {
    cs_max = std::max(cs_max, c);
    cs_mean += c;
  }
  cs_mean /= n;
  if (cs_max <= 0.0) throw std::invalid_argument("perron: zero matrix");
  const double shift = 0.5 * cs_max;

  PerronResult r;
  Vec v(n, 1.0 / std::sqrt(static_cast<double>(n)));
  {
    CounterRng rng(0x5eedULL, 1);
    for (int i = 0; i < n; ++i) v[i] *= 1.0 + 0.01 * rng.uniform(static_cast<std::uint64_t>(i));
    const double nn = norm2(v);
    for (double& x : v) x /= nn;
  }
  Vec av(n);
  double lambda = cs_mean;
  int it = 0;
  for (; it < max_iter; ++it) {
    A.matvec(v, av);
    lambda = dot(v, av);
    double res = 0.0;
    for (int i = 0; i < n; ++i) res = std::max(res, std::fabs(av[i] - lambda * v[i]));
    r.residual = res;
    if (res <= tol * std::max(std::fabs(lambda), 1e-300)) break;
    for (int i = 0; i < n; ++i) av[i] += shift * v[i];
    const double nn = norm2(av);
    if (!(nn > 0.0)) throw std::runtime_error("perron: iterate collapsed");
    for (int i = 0; i < n; ++i) v[i] = av[i] / nn;
  }
  if (it == max_iter) throw std::runtime_error("perron: power iteration did not converge");
  r.iterations = it + 1;
  r.lambda1 = lambda;
  double vmin = v[0], vmax = v[0];
  for (double x : v) {
    vmin = std::min(vmin, x);
    vmax = std::max(vmax, x);
  }
  if (vmin < -tol * std::max(vmax, 1e-300))
    throw std::runtime_error("perron: not primitive (mixed-sign dominant eigenvector)");
  for (double& x : v) x = std::fabs(x);
  r.positivity = (vmax > 0.0) ? vmin / vmax : 0.0;
  r.v1 = v;

  // Candidate left vector: uniform.  A^T 1 equals the column-sum vector.
  double ures = 0.0;
  for (double c : cs) ures = std::max(ures, std::fabs(c - lambda));
  if (ures <= std::max(tol, 1e-11) * std::max(std::fabs(lambda), 1e-300)) {
    r.u1.assign(n, 1.0 / std::sqrt(static_cast<double>(n)));
    r.left_is_uniform = true;
  } else {
    Vec u = detail::seeded_unit_vector(n, 2);
    for (double& x : u) x = std::fabs(x);
    Vec au(n);
    int jt = 0;
    for (; jt < max_iter; ++jt) {
      A.tmatvec(u, au);
      const double lu = dot(u, au);
      double res = 0.0;
      for (int i = 0; i < n; ++i) res = std::max(res, std::fabs(au[i] - lu * u[i]));
      if (res <= tol * std::max(std::fabs(lu), 1e-300)) break;
      for (int i = 0; i < n; ++i) au[i] += shift * u[i];
      const double nn = norm2(au);
      if (!(nn > 0.0)) throw std::runtime_error("perron: left iterate collapsed");
      for (int i = 0; i < n; ++i) u[i] = au[i] / nn;
    }
    if (jt == max_iter) throw std::runtime_error("perron: left iteration did not converge");
    for (double& x : u) x = std::fabs(x);
    const double nn = norm2(u);
    for (double& x : u) x /= nn;
    r.u1 = u;
  }

  const double uv = dot(r.u1, r.v1);
  if (!(uv > 0.0)) throw std::runtime_error("perron: degenerate eigenvector pair");
  for (double& x : r.v1) x /= uv;
  return r;
}

inline PerronResult perron(const ProductionNetwork& net, double tol = 1e-13,
                           int max_iter = 200000) {
  return perron(net.A, tol, max_iter);
}

namespace detail {

// y = B x where B = A - lambda1 v1 u1^T removes the dominant mode.
inline void deflated_matvec(const Sparse& A, const PerronResult& p, const Vec& x, Vec& y) {
  A.matvec(x, y);
  const double c = p.lambda1 * dot(p.u1, x);
  axpy(y, -c, p.v1);
}

inline void deflated_tmatvec(const Sparse& A, const PerronResult& p, const Vec& x, Vec& y) {
  A.tmatvec(x, y);
  const double c = p.lambda1 * dot(p.v1, x);
  axpy(y, -c, p.u1);
}

struct Ritz2 {
  double la = 0.0, lb = 0.0;  // real parts when complex
  double mod_a = 0.0, mod_b = 0.0;
  bool complex_pair = false;
  double wa[2] = {1.0, 0.0};  // right eigenvector of H for la (real case)
};

// Eigenvalues of a 2x2 matrix H; la carries the larger modulus.
inline Ritz2 ritz_2x2(const double H[2][2]) {
  Ritz2 r;
  const double tr = H[0][0] + H[1][1];
  const double det = H[0][0] * H[1][1] - H[0][1] * H[1][0];
  const double disc = tr * tr - 4.0 * det;
  const double scale = std::max({tr * tr, 4.0 * std::fabs(det), 1e-300});
  if (disc < -1e-10 * scale) {
    r.complex_pair = true;
    r.la = 0.5 * tr;
    r.lb = 0.5 * tr;
    r.mod_a = r.mod_b = std::sqrt(det);
    return r;
  }
  const double sq = std::sqrt(std::max(disc, 0.0));
  double l1 = 0.5 * (tr + sq), l2 = 0.5 * (tr - sq);
  if (std::fabs(l2) > std::fabs(l1)) std::swap(l1, l2);
  r.la = l1;
  r.lb = l2;
  r.mod_a = std::fabs(l1);
  r.mod_b = std::fabs(l2);
  // (H - la I) w = 0; take the better-conditioned row.
  const double c1[2] = {H[0][1], r.la - H[0][0]};
  const double c2[2] = {r.la - H[1][1], H[1][0]};
  const double n1 = std::hypot(c1[0], c1[1]);
  const double n2 = std::hypot(c2[0], c2[1]);
  if (n1 >= n2 && n1 > 0.0) {
    r.wa[0] = c1[0] / n1;
    r.wa[1] = c1[1] / n1;
  } else if (n2 > 0.0) {
    r.wa[0] = c2[0] / n2;
    r.wa[1] = c2[1] / n2;
  }
  return r;
}

template <typename Apply>
inline TransientResult subspace2(const Apply& apply, int n, double lambda1, double tol,
                                 int max_iter, std::uint64_t stream_base) {
  TransientResult t;
  if (n == 1) return t;  // nothing below the dominant mode
  Vec q1 = seeded_unit_vector(n, stream_base);
  Vec q2 = seeded_unit_vector(n, stream_base + 1);
  {
    const double c = dot(q1, q2);
    axpy(q2, -c, q1);
    const double nn = norm2(q2);
    for (double& x : q2) x /= nn;
  }
  Vec z1(n), z2(n);
  const double floor_scale = std::max(lambda1, 1e-300);
  for (int it = 0; it < max_iter; ++it) {
    apply(q1, z1);
    apply(q2, z2);
    const double zn = std::max(norm2(z1), norm2(z2));
    if (zn <= 1e-13 * floor_scale) {
      // Deflated operator annihilates the whole subspace: rank-one network.
      t.iterations = it + 1;
      t.residual = zn;
      return t;
    }
    double H[2][2] = {{dot(q1, z1), dot(q1, z2)}, {dot(q2, z1), dot(q2, z2)}};
    const Ritz2 ritz = ritz_2x2(H);
    double res = 0.0;
    for (int i = 0; i < n; ++i) {
      const double r1 = z1[i] - H[0][0] * q1[i] - H[1][0] * q2[i];
      const double r2 = z2[i] - H[0][1] * q1[i] - H[1][1] * q2[i];
      res += r1 * r1 + r2 * r2;
    }
    res = std::sqrt(res);
    t.residual = res;
    t.iterations = it + 1;
    if (res <= tol * std::max(ritz.mod_a, 1e-6 * floor_scale)) {
      t.lambda2_mod = ritz.mod_a;
      if (ritz.complex_pair) {
        t.is_complex = true;
        t.u2 = q1;  // orthonormal basis of the invariant plane
        t.v2 = q2;
        return t;
      }
      t.lambda2 = ritz.la;
      if (ritz.mod_a - ritz.mod_b <= 1e-8 * std::max(ritz.mod_a, 1e-300)) {
        t.is_tied = true;
        return t;
      }
      Vec v2(n);
      for (int i = 0; i < n; ++i) v2[i] = ritz.wa[0] * q1[i] + ritz.wa[1] * q2[i];
      const double nn = norm2(v2);
      for (double& x : v2) x /= nn;
      t.v2 = std::move(v2);
      return t;
    }
    // The leading column can settle long before the full plane does when the
    // modes below it share a modulus and keep rotating.  Accept it alone once
    // its eigen-residual is small and its Ritz value is decisively separated.
    double res1 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double r1 = z1[i] - H[0][0] * q1[i];
      res1 += r1 * r1;
    }
    res1 = std::sqrt(res1);
    if (res1 <= tol * std::max(std::fabs(H[0][0]), 1e-6 * floor_scale)) {
      t.residual = res1;
      t.lambda2 = H[0][0];
      t.lambda2_mod = std::fabs(H[0][0]);
      if (ritz.mod_a - ritz.mod_b <= 1e-8 * std::max(ritz.mod_a, 1e-300) &&
          ritz.mod_b >= t.lambda2_mod * (1.0 - 1e-8)) {
        t.is_tied = true;
        t.lambda2_mod = ritz.mod_a;
        return t;
      }
      t.v2 = q1;
      return t;
    }
    // Orthonormalize (z1, z2) into the next frame.
    double nn = norm2(z1);
    if (nn <= 1e-300) z1 = seeded_unit_vector(n, stream_base + 100 + it);
    nn = norm2(z1);
    for (int i = 0; i < n; ++i) q1[i] = z1[i] / nn;
    double c = dot(q1, z2);
    axpy(z2, -c, q1);
    nn = norm2(z2);
    if (nn <= 1e-12 * zn) {
      z2 = seeded_unit_vector(n, stream_base + 200 + it);
      c = dot(q1, z2);
      axpy(z2, -c, q1);
      nn = norm2(z2);
    }
    for (int i = 0; i < n; ++i) q2[i] = z2[i] / nn;
  }
  throw std::runtime_error("transient mode iteration did not converge");
}

}  // namespace detail

// Second eigenpair of the share matrix through two-dimensional orthogonal
// iteration on the deflated operator, with Rayleigh-Ritz extraction.  The
// left vector comes from the same procedure on the transpose.  With
// gap_tol = 0 a vanishing spectral gap is reported, not rejected.
inline TransientResult dominant_transient(const Sparse& A, const PerronResult& p,
                                          double tol = 1e-12, int max_iter = 200000,
                                          double gap_tol = 0.0) {
  const int n = A.n;
  auto right = [&](const Vec& x, Vec& y) { detail::deflated_matvec(A, p, x, y); };
  TransientResult t = detail::subspace2(right, n, p.lambda1, tol, max_iter, 10);
  if (gap_tol > 0.0 && p.lambda1 - t.lambda2_mod <= gap_tol * p.lambda1)
    throw std::runtime_error("no spectral gap: |lambda2| within tolerance of lambda1");
  if (t.is_complex || t.is_tied || t.v2.empty()) return t;

  auto left = [&](const Vec& x, Vec& y) { detail::deflated_tmatvec(A, p, x, y); };
  TransientResult lt = detail::subspace2(left, n, p.lambda1, tol, max_iter, 20);
  if (lt.v2.empty())
    throw std::runtime_error("transient mode: left extraction failed where right succeeded");
  t.u2 = std::move(lt.v2);
  t.iterations += lt.iterations;
  t.residual = std::max(t.residual, lt.residual);
  return t;
}

// Biorthogonal normalization of the second eigenpair: u unit length,
// u.v = 1, joint sign fixed by u's first entry of largest magnitude.
inline ModePair normalize_pair(const Vec& u2, const Vec& v2, const Vec& gamma = {}) {
  if (u2.size() != v2.size() || u2.empty())
    throw std::invalid_argument("normalize_pair: size mismatch");
  const int n = static_cast<int>(u2.size());
  const double s = dot(u2, v2);
  const double nu = norm2(u2);
  if (std::fabs(s) <= 1e-12 * nu * norm2(v2))
    throw std::runtime_error("normalize_pair: defective pair, u.v vanishes");
  ModePair m;
  m.u = u2;
  m.v = v2;
  for (double& x : m.v) x /= s;  // now u.v = 1
  for (double& x : m.u) x /= nu;
  for (double& x : m.v) x *= nu;  // preserves u.v = 1
  int imax = 0;
  for (int i = 1; i < n; ++i)
    if (std::fabs(m.u[i]) > std::fabs(m.u[imax])) imax = i;
  if (m.u[imax] < 0.0) {
    for (double& x : m.u) x = -x;
    for (double& x : m.v) x = -x;
  }
  m.b = gamma.empty() ? 0.0 : dot(gamma, m.v);
  return m;
}

inline double loading(const Vec& gamma, const Vec& v2) { return dot(gamma, v2); }

inline SpectralSummary build_spectral_summary(const ProductionNetwork& net, double tol = 1e-12,
                                              double gap_tol = 0.0) {
  SpectralSummary s;
  const PerronResult p = perron(net.A, std::min(tol, 1e-13));
  const TransientResult t = dominant_transient(net.A, p, tol, 200000, gap_tol);
  s.lambda1 = p.lambda1;
  s.lambda2 = t.lambda2;
  s.lambda2_mod = t.lambda2_mod;
  s.gap = p.lambda1 - t.lambda2_mod;
  s.lambda2_complex = t.is_complex;
  s.lambda2_tied = t.is_tied;
  s.u1 = p.u1;
  s.v1 = p.v1;
  s.u2 = t.u2;
  s.v2 = t.v2;
  s.perron_iterations = p.iterations;
  s.transient_iterations = t.iterations;
  s.perron_residual = p.residual;
  s.transient_residual = t.residual;
  if (!t.is_complex && !t.is_tied && !t.u2.empty() && !t.v2.empty()) {
    const ModePair m = normalize_pair(t.u2, t.v2, net.gamma);
    s.u2_norm = m.u;
    s.v2_norm = m.v;
    s.b = m.b;
  }
  return s;
}

// eta_t = u2 . eps_hat_t for one demeaned cross-section.
inline double project_innovation(const Vec& u2, const Vec& eps_hat_t) {
  if (u2.size() != eps_hat_t.size())
    throw std::invalid_argument("project_innovation: dimension mismatch");
  KahanSum s;
  for (std::size_t i = 0; i < u2.size(); ++i) s.add(u2[i] * eps_hat_t[i]);
  return s.value();
}

// Same projection applied date by date to a panel's demeaned innovations.
inline Vec project_innovation(const ShockPanel& p, const Vec& u2) {
  if (static_cast<int>(u2.size()) != p.n)
    throw std::invalid_argument("project_innovation: vector length != panel width");
  Vec eta(p.T);
  for (int t = 0; t < p.T; ++t) {
    KahanSum s;
    for (int i = 0; i < p.n; ++i) s.add(u2[i] * p.hat(i, t));
    eta[t] = s.value();
  }
  return eta;
}

// Var(eta_t) after double demeaning: sigma^2 |P_c u2|^2 (1 - 1/T) where P_c
// removes the cross-sectional mean direction.
inline double innovation_variance(double sigma, int n, int T, const Vec& u2) {
  if (n < 1 || T < 1) throw std::invalid_argument("innovation_variance: bad panel shape");
  double s = 0.0;
  for (double x : u2) s += x;
  const double proj = norm2(u2) * norm2(u2) - s * s / n;
  return sigma * sigma * proj * (1.0 - 1.0 / T);
}

struct ProxyReport {
  Vec u2_proxy;
  double b_alpha = 0.0;
  double cosine_true_proxy = 0.0;  // |u2_true . u2_proxy| when a true vector is supplied
  double mean_emp = 0.0;
  double var_emp = 0.0;
};

// Degree-based stand-in for the second mode: standardized supplier counts,
// unit norm by construction.  The loading scale constant is fixed at 1.
inline ProxyReport degree_proxy(const std::vector<int>& degrees, const Vec& gamma,
                                const Vec& u2_true = {}) {
  const int n = static_cast<int>(degrees.size());
  if (n < 2) throw std::invalid_argument("degree_proxy: need at least two firms");
  if (!gamma.empty() && static_cast<int>(gamma.size()) != n)
    throw std::invalid_argument("degree_proxy: gamma size mismatch");
  ProxyReport r;
  KahanSum s;
  for (int d : degrees) s.add(static_cast<double>(d));
  r.mean_emp = s.value() / n;
  KahanSum ss;
  for (int d : degrees) {
    const double c = d - r.mean_emp;
    ss.add(c * c);
  }
  r.var_emp = ss.value() / n;
  if (!(r.var_emp > 0.0))
    throw std::runtime_error("degree_proxy: degenerate degrees, zero variance");
  const double root = std::sqrt(n * r.var_emp);
  r.u2_proxy.resize(n);
  for (int i = 0; i < n; ++i) r.u2_proxy[i] = (degrees[i] - r.mean_emp) / root;
  if (!gamma.empty()) {
    KahanSum g;
    for (int i = 0; i < n; ++i) g.add(gamma[i] * (degrees[i] - r.mean_emp));
    r.b_alpha = std::sqrt(static_cast<double>(n)) * g.value() / std::sqrt(r.var_emp);
  }
  if (!u2_true.empty()) {
    if (static_cast<int>(u2_true.size()) != n)
      throw std::invalid_argument("degree_proxy: u2_true size mismatch");
    const double nn = norm2(u2_true);
    if (nn > 0.0) r.cosine_true_proxy = std::fabs(dot(u2_true, r.u2_proxy)) / nn;
  }
  return r;
}

struct LogDerivativeB {
  double direct = 0.0;         // central difference of log|b(alpha)|
  double term_recenter = 0.0;  // -mean'(alpha) / (gamma.(d - mean 1))
  double term_scale = 0.0;     // -var'(alpha) / (2 var(alpha))
  double total = 0.0;          // sum of the two terms
};

// d log b / d alpha with the realized degrees held fixed: the degree-law
// moments move with alpha, the drawn directions do not.  Central differences
// of step h; also reports the recentering and rescaling terms separately.
inline LogDerivativeB log_derivative_b(double alpha, const std::vector<int>& degrees,
                                       const Vec& gamma, double h = 1e-3) {
  if (degrees.size() != gamma.size() || degrees.empty())
    throw std::invalid_argument("log_derivative_b: size mismatch");
  if (!(alpha - h > 1.0))
    throw std::invalid_argument("log_derivative_b: alpha - h must stay above 1");
  const double n = static_cast<double>(degrees.size());
  const DegreeMoments m0 = degree_moments(alpha, n);
  const DegreeMoments mp = degree_moments(alpha + h, n);
  const DegreeMoments mm = degree_moments(alpha - h, n);
  auto loading_at = [&](const DegreeMoments& m) {
    KahanSum g;
    for (std::size_t i = 0; i < degrees.size(); ++i) g.add(gamma[i] * (degrees[i] - m.mean));
    return std::sqrt(n) * g.value() / std::sqrt(m.variance);
  };
  const double b0 = loading_at(m0);
  if (std::fabs(b0) < 1e-300)
    throw std::runtime_error("log_derivative_b: loading vanishes at this alpha");
  LogDerivativeB out;
  out.direct = (std::log(std::fabs(loading_at(mp))) - std::log(std::fabs(loading_at(mm)))) /
               (2.0 * h);
  const double dmean = (mp.mean - mm.mean) / (2.0 * h);
  const double dvar = (mp.variance - mm.variance) / (2.0 * h);
  KahanSum g;
  for (std::size_t i = 0; i < degrees.size(); ++i) g.add(gamma[i] * (degrees[i] - m0.mean));
  out.term_recenter = -dmean / g.value();
  out.term_scale = -dvar / (2.0 * m0.variance);
  out.total = out.term_recenter + out.term_scale;
  return out;
}

}  // namespace prodnet

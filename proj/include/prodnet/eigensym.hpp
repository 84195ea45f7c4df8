#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "prodnet/linalg.hpp"

namespace prodnet {
namespace detail {

inline double pythag(double a, double b) {
  const double aa = std::fabs(a), ab = std::fabs(b);
  if (aa > ab) {
    const double r = ab / aa;
    return aa * std::sqrt(1.0 + r * r);
  }
  if (ab == 0.0) return 0.0;
  const double r = aa / ab;
  return ab * std::sqrt(1.0 + r * r);
}

// Householder reduction of a symmetric matrix to tridiagonal form, values
// only.  The input matrix is overwritten.
inline void householder_tridiag(Dense& z, Vec& d, Vec& e) {
  const int n = static_cast<int>(z.rows);
  d.assign(n, 0.0);
  e.assign(n, 0.0);
  for (int i = n - 1; i > 0; --i) {
    const int l = i - 1;
    double h = 0.0, sc = 0.0;
    if (l > 0) {
      for (int k = 0; k <= l; ++k) sc += std::fabs(z.at(i, k));
      if (sc == 0.0) {
        e[i] = z.at(i, l);
      } else {
        for (int k = 0; k <= l; ++k) {
          z.at(i, k) /= sc;
          h += z.at(i, k) * z.at(i, k);
        }
        double f = z.at(i, l);
        double g = (f >= 0.0) ? -std::sqrt(h) : std::sqrt(h);
        e[i] = sc * g;
        h -= f * g;
        z.at(i, l) = f - g;
        f = 0.0;
        for (int j = 0; j <= l; ++j) {
          g = 0.0;
          for (int k = 0; k <= j; ++k) g += z.at(j, k) * z.at(i, k);
          for (int k = j + 1; k <= l; ++k) g += z.at(k, j) * z.at(i, k);
          e[j] = g / h;
          f += e[j] * z.at(i, j);
        }
        const double hh = f / (h + h);
        for (int j = 0; j <= l; ++j) {
          f = z.at(i, j);
          e[j] = g = e[j] - hh * f;
          for (int k = 0; k <= j; ++k) z.at(j, k) -= f * e[k] + g * z.at(i, k);
        }
      }
    } else {
      e[i] = z.at(i, l);
    }
    d[i] = h;
  }
  e[0] = 0.0;
  for (int i = 0; i < n; ++i) d[i] = z.at(i, i);
}

// Implicit-shift QL sweeps on a tridiagonal matrix; eigenvalues land in d.
inline void ql_implicit(Vec& d, Vec& e) {
  const int n = static_cast<int>(d.size());
  if (n == 0) return;
  const double eps = std::numeric_limits<double>::epsilon();
  for (int i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = 0.0;
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::fabs(d[m]) + std::fabs(d[m + 1]);
        if (std::fabs(e[m]) <= eps * dd) break;
      }
      if (m != l) {
        if (iter++ == 60) throw std::runtime_error("ql_implicit: too many sweeps");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = pythag(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        int i;
        for (i = m - 1; i >= l; --i) {
          double f = s * e[i];
          const double b = c * e[i];
          e[i + 1] = r = pythag(f, g);
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          d[i + 1] = g + (p = s * r);
          g = c * r - b;
        }
        if (r == 0.0 && i >= l) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
}

// Cyclic Jacobi, values only.  Quadratic convergence, fully backward stable;
// preferred for small operators.
inline Vec jacobi_eigenvalues(Dense a) {
  const int n = static_cast<int>(a.rows);
  double off = 0.0, scale_ref = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      scale_ref = std::max(scale_ref, std::fabs(a.at(i, j)));
      if (i != j) off += a.at(i, j) * a.at(i, j);
    }
  const double tol = 1e-14 * std::max(scale_ref, 1e-300);
  for (int sweep = 0; sweep < 100 && off > tol * tol; ++sweep) {
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a.at(p, q);
        if (std::fabs(apq) <= 1e-300) continue;
        const double theta = (a.at(q, q) - a.at(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a.at(k, p), akq = a.at(k, q);
          a.at(k, p) = c * akp - s * akq;
          a.at(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a.at(p, k), aqk = a.at(q, k);
          a.at(p, k) = c * apk - s * aqk;
          a.at(q, k) = s * apk + c * aqk;
        }
      }
    }
    off = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j) off += a.at(i, j) * a.at(i, j);
  }
  Vec d(n);
  for (int i = 0; i < n; ++i) d[i] = a.at(i, i);
  return d;
}

inline bool is_tridiagonal(const Dense& a) {
  const int n = static_cast<int>(a.rows);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (std::abs(i - j) > 1 && a.at(i, j) != 0.0) return false;
  return true;
}

}  // namespace detail

// Eigenvalues of a symmetric matrix, sorted descending.  Small or already
// tridiagonal inputs take cheap paths; trace preservation is checked as the
// accuracy certificate of the orthogonal reduction.
inline Vec symmetric_eigenvalues(const Dense& m) {
  if (m.rows != m.cols) throw std::invalid_argument("symmetric_eigenvalues: not square");
  const int n = static_cast<int>(m.rows);
  if (n == 0) return {};
  double trace_in = 0.0, scale_ref = 0.0;
  for (int i = 0; i < n; ++i) {
    trace_in += m.at(i, i);
    for (int j = 0; j < n; ++j) scale_ref = std::max(scale_ref, std::fabs(m.at(i, j)));
  }
  Vec d;
  if (n <= 64 && !detail::is_tridiagonal(m)) {
    d = detail::jacobi_eigenvalues(m);
  } else {
    Vec e;
    if (detail::is_tridiagonal(m)) {
      d.resize(n);
      e.assign(n, 0.0);
      for (int i = 0; i < n; ++i) {
        d[i] = m.at(i, i);
        if (i > 0) e[i] = m.at(i, i - 1);
      }
    } else {
      Dense work = m;
      detail::householder_tridiag(work, d, e);
    }
    detail::ql_implicit(d, e);
  }
  KahanSum trace_out;
  for (double v : d) trace_out.add(v);
  const double drift = std::fabs(trace_out.value() - trace_in);
  if (drift > 1e-9 * std::max(1.0, static_cast<double>(n) * scale_ref))
    throw std::runtime_error("symmetric_eigenvalues: trace drift beyond certificate");
  std::sort(d.begin(), d.end(), std::greater<double>());
  return d;
}

}  // namespace prodnet

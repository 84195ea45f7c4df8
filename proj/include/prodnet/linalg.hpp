#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace prodnet {

using Vec = std::vector<double>;

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

inline double norm1(const Vec& a) {
  double s = 0.0;
  for (double v : a) s += std::fabs(v);
  return s;
}

inline double norm_inf(const Vec& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::fabs(v));
  return m;
}

inline void scale(Vec& a, double c) {
  for (double& v : a) v *= c;
}

// y += c*x
inline void axpy(Vec& y, double c, const Vec& x) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += c * x[i];
}

// Compensated accumulation for long reductions.
struct KahanSum {
  double s = 0.0, c = 0.0;
  void add(double x) {
    double t = s + x;
    if (std::fabs(s) >= std::fabs(x))
      c += (s - t) + x;
    else
      c += (x - t) + s;
    s = t;
  }
  double value() const { return s + c; }
};

struct Dense {
  std::size_t rows = 0, cols = 0;
  Vec a;

  Dense() = default;
  Dense(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

  double& at(std::size_t i, std::size_t j) { return a[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return a[i * cols + j]; }
};

// Compressed sparse column storage.  Column i holds the expenditure shares of
// buyer i; row index is the supplier.  Entries within a column are sorted by
// row so that traversal order, and hence floating-point results, are fixed.
struct Sparse {
  int n = 0;
  std::vector<int> col_ptr;  // size n+1
  std::vector<int> row_idx;
  Vec val;

  static Sparse from_triplets(int n, std::vector<int> rows, std::vector<int> cols, Vec vals) {
    if (rows.size() != cols.size() || rows.size() != vals.size())
      throw std::invalid_argument("from_triplets: ragged input");
    Sparse s;
    s.n = n;
    s.col_ptr.assign(static_cast<std::size_t>(n) + 1, 0);
    const std::size_t nnz = vals.size();
    std::vector<std::size_t> order(nnz);
    for (std::size_t k = 0; k < nnz; ++k) order[k] = k;
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
      if (cols[x] != cols[y]) return cols[x] < cols[y];
      return rows[x] < rows[y];
    });
    s.row_idx.reserve(nnz);
    s.val.reserve(nnz);
    for (std::size_t k : order) {
      if (rows[k] < 0 || rows[k] >= n || cols[k] < 0 || cols[k] >= n)
        throw std::invalid_argument("from_triplets: index out of range");
      if (!s.row_idx.empty() && cols[k] == s.last_col_ && rows[k] == s.row_idx.back()) {
        s.val.back() += vals[k];  // merge duplicate edges
      } else {
        s.row_idx.push_back(rows[k]);
        s.val.push_back(vals[k]);
        s.last_col_ = cols[k];
      }
      s.col_ptr[static_cast<std::size_t>(cols[k]) + 1] = static_cast<int>(s.val.size());
    }
    for (int i = 0; i < n; ++i)
      s.col_ptr[static_cast<std::size_t>(i) + 1] =
          std::max(s.col_ptr[static_cast<std::size_t>(i) + 1], s.col_ptr[i]);
    return s;
  }

  std::size_t nnz() const { return val.size(); }

  // y = A x
  void matvec(const Vec& x, Vec& y) const {
    y.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
      const double xi = x[i];
      if (xi == 0.0) continue;
      for (int k = col_ptr[i]; k < col_ptr[i + 1]; ++k) y[row_idx[k]] += val[k] * xi;
    }
  }

  // y = A' x
  void tmatvec(const Vec& x, Vec& y) const {
    y.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int k = col_ptr[i]; k < col_ptr[i + 1]; ++k) s += val[k] * x[row_idx[k]];
      y[i] = s;
    }
  }

  Vec col_sums() const {
    Vec s(n, 0.0);
    for (int i = 0; i < n; ++i)
      for (int k = col_ptr[i]; k < col_ptr[i + 1]; ++k) s[i] += val[k];
    return s;
  }

 private:
  int last_col_ = -1;
};

// Fixed-point solve of x = rhs + Op(x); converges geometrically whenever the
// operator's spectral radius is below one.  The returned iterate satisfies
// ||x - rhs - Op(x)||_inf <= tol * max(1, ||rhs||_inf).
template <typename OpFn>
Vec neumann_solve(OpFn&& op, const Vec& rhs, double tol = 1e-12, int max_iter = 100000) {
  Vec x = rhs, tmp(rhs.size());
  const double scale_ref = std::max(1.0, norm_inf(rhs));
  for (int it = 0; it < max_iter; ++it) {
    op(x, tmp);  // tmp = Op(x)
    double res = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double next = rhs[i] + tmp[i];
      res = std::max(res, std::fabs(next - x[i]));
      x[i] = next;
    }
    if (res <= tol * scale_ref) {
      op(x, tmp);
      double true_res = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i)
        true_res = std::max(true_res, std::fabs(x[i] - rhs[i] - tmp[i]));
      if (true_res <= tol * scale_ref) return x;
    }
  }
  throw std::runtime_error("neumann_solve: no convergence within iteration budget");
}

}  // namespace prodnet

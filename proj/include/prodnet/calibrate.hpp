#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "prodnet/linalg.hpp"
#include "prodnet/network.hpp"
#include "prodnet/riskstats.hpp"

namespace prodnet {

struct CalibrationRow {
  double lambda2 = 0.0;
  double R = 0.0;
  double static_share = 0.0;
  double dynamic_share = 0.0;
};

struct CalibrationTable {
  std::vector<CalibrationRow> rows;
  bool has_shares = false;
};

inline const Vec& default_lambda2_grid() {
  static const Vec g{0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8};
  return g;
}

inline const Vec& default_static_shares() {
  static const Vec s{0.10, 0.33};
  return s;
}

// One attenuation factor per grid point, rows ascending in lambda2.
inline CalibrationTable attenuation_table(Vec lambda2_grid) {
  if (lambda2_grid.empty()) throw std::invalid_argument("attenuation_table: empty grid");
  std::sort(lambda2_grid.begin(), lambda2_grid.end());
  CalibrationTable t;
  for (double l : lambda2_grid) {
    if (!(l > 0.0 && l < 1.0))
      throw std::invalid_argument("attenuation_table: grid point outside (0,1)");
    CalibrationRow r;
    r.lambda2 = l;
    r.R = attenuation_ratio(l);
    t.rows.push_back(r);
  }
  return t;
}

inline double granular_share(double static_share, double lambda2) {
  if (!(static_share > 0.0 && static_share <= 1.0))
    throw std::invalid_argument("granular_share: static share outside (0,1]");
  return static_share * attenuation_ratio(lambda2);
}

inline std::string share_label(double dynamic_share) {
  if (std::fabs(dynamic_share - 1.0 / 6.0) <= 0.02) return "approximately one-sixth";
  if (dynamic_share <= 0.06) return "close to zero";
  return "";
}

// Full table: one row per (lambda2, static share) pair.
inline CalibrationTable share_table(Vec lambda2_grid, const Vec& static_shares) {
  if (static_shares.empty()) throw std::invalid_argument("share_table: no shares given");
  CalibrationTable base = attenuation_table(std::move(lambda2_grid));
  CalibrationTable t;
  t.has_shares = true;
  for (const CalibrationRow& br : base.rows)
    for (double s : static_shares) {
      CalibrationRow r = br;
      r.static_share = s;
      r.dynamic_share = granular_share(s, br.lambda2);
      t.rows.push_back(r);
    }
  return t;
}

// ---------- lambda2(alpha) mappings ----------

struct Lambda2Map {
  enum class Type { kLinear, kTable };
  Type type = Type::kLinear;
  double intercept = 0.0;
  double slope = 0.0;
  std::vector<std::pair<double, double>> points;  // (alpha, lambda2), ascending alpha

  double operator()(double alpha) const {
    if (type == Type::kLinear) return intercept + slope * alpha;
    if (points.size() < 2) throw std::invalid_argument("Lambda2Map: table needs two points");
    if (alpha <= points.front().first) return points.front().second;
    if (alpha >= points.back().first) return points.back().second;
    for (std::size_t k = 1; k < points.size(); ++k)
      if (alpha <= points[k].first) {
        const auto& [x0, y0] = points[k - 1];
        const auto& [x1, y1] = points[k];
        return y0 + (y1 - y0) * (alpha - x0) / (x1 - x0);
      }
    return points.back().second;
  }
};

// ---------- alpha sensitivity ----------

struct SensitivityReport {
  double alpha = 0.0;
  double lambda2 = 0.0;
  double lambda2_prime = 0.0;
  double b = 0.0;
  double b_prime = 0.0;
  double exposure_channel = 0.0;
  double overlap_channel = 0.0;
  double total = 0.0;
  double direct_difference = 0.0;  // central difference of the mean statistic itself
  Vec nu_prime;
  double h_used = 0.0;
  bool sign_ok = true;  // mapping slope consistent with fatter tails raising lambda2
};

namespace detail {

// Loading of the degree proxy standardized by the exact integral moments at
// this exponent; the degree vector itself is held fixed.
inline double proxy_b(double alpha, const std::vector<int>& degrees, const Vec& gamma,
                      double b_scale) {
  const int n = static_cast<int>(degrees.size());
  if (n < 2) throw std::invalid_argument("proxy_b: need at least two degrees");
  if (gamma.size() != degrees.size()) throw std::invalid_argument("proxy_b: gamma size mismatch");
  const DegreeMoments m = degree_moments(alpha, static_cast<double>(n));
  if (!(m.variance > 0.0)) throw std::invalid_argument("proxy_b: degenerate moment variance");
  KahanSum s;
  for (int i = 0; i < n; ++i) s.add(gamma[i] * (degrees[i] - m.mean));
  return b_scale * std::sqrt(static_cast<double>(n)) * s.value() / std::sqrt(m.variance);
}

// A sorted-order kink signals a crossing: the second difference of a smooth
// eigenvalue branch is O(h^2) while a branch swap makes it comparable to the
// first difference.
inline bool ordering_mismatch(const Vec& lo, const Vec& mid, const Vec& hi, double scale) {
  for (std::size_t j = 0; j < mid.size(); ++j) {
    const double second = std::fabs(hi[j] - 2.0 * mid[j] + lo[j]);
    const double first = std::fabs(hi[j] - lo[j]);
    if (second > 0.25 * std::max(first, 1e-9 * scale)) return true;
  }
  return false;
}

}  // namespace detail

// Splits the alpha-derivative of the expected window volatility into the
// loading (exposure) channel and the spectrum (overlap) channel, with the
// spectrum derivative taken through the user-supplied lambda2(alpha) mapping
// by order-matched central differences.  Crossings trigger step halving.
inline SensitivityReport sensitivity_decomposition(
    double alpha, const std::function<double(double)>& lambda2_of_alpha,
    const std::vector<int>& degrees, const Vec& gamma, double sigma, double b_scale, int T,
    double h = 1e-3) {
  if (!(h > 0.0)) throw std::invalid_argument("sensitivity_decomposition: h must be positive");
  if (T < 2) throw std::invalid_argument("sensitivity_decomposition: T must be at least 2");
  SensitivityReport rep;
  rep.alpha = alpha;

  const int m = T - 1;
  const double s2 = sigma * sigma;

  for (int attempt = 0;; ++attempt) {
    if (alpha - h <= 1.0)
      throw std::invalid_argument("sensitivity_decomposition: alpha - h must exceed 1");
    const double l_mid = lambda2_of_alpha(alpha);
    const double l_lo = lambda2_of_alpha(alpha - h);
    const double l_hi = lambda2_of_alpha(alpha + h);
    for (double l : {l_mid, l_lo, l_hi})
      if (!(l > 0.0 && l < 1.0))
        throw std::invalid_argument("sensitivity_decomposition: mapping leaves (0,1)");

    rep.lambda2 = l_mid;
    rep.lambda2_prime = (l_hi - l_lo) / (2.0 * h);
    rep.sign_ok = rep.lambda2_prime < 0.0;

    const FiniteTSpectrum sp_mid = finite_T_spectra(l_mid, T);

    rep.nu_prime.assign(m, 0.0);
    bool crossing = false;
    if (std::fabs(l_hi - l_lo) > 1e-14) {
      const FiniteTSpectrum sp_lo = finite_T_spectra(l_lo, T);
      const FiniteTSpectrum sp_hi = finite_T_spectra(l_hi, T);
      crossing = detail::ordering_mismatch(sp_lo.nu, sp_mid.nu, sp_hi.nu, sp_mid.nu_max);
      if (!crossing) {
        const double dl = l_hi - l_lo;
        for (int j = 0; j < m; ++j) {
          const double dnu_dl = (sp_hi.nu[j] - sp_lo.nu[j]) / dl;
          rep.nu_prime[j] = dnu_dl * rep.lambda2_prime;
        }
      }
    }
    if (crossing) {
      if (attempt >= 3)
        throw std::runtime_error(
            "sensitivity_decomposition: eigenvalue crossing persists after step halving");
      h *= 0.5;
      continue;
    }

    const double b_mid = detail::proxy_b(alpha, degrees, gamma, b_scale);
    const double b_lo = detail::proxy_b(alpha - h, degrees, gamma, b_scale);
    const double b_hi = detail::proxy_b(alpha + h, degrees, gamma, b_scale);
    rep.b = b_mid;
    rep.b_prime = (b_hi - b_lo) / (2.0 * h);

    KahanSum nu_sum, nup_sum;
    for (int j = 0; j < m; ++j) {
      nu_sum.add(sp_mid.nu[j]);
      nup_sum.add(rep.nu_prime[j]);
    }
    rep.exposure_channel = 2.0 * b_mid * rep.b_prime * s2 * nu_sum.value() / m;
    rep.overlap_channel = s2 * b_mid * b_mid * nup_sum.value() / m;
    rep.total = rep.exposure_channel + rep.overlap_channel;

    const double e_hi = s2 * b_hi * b_hi * trace_identity_value(l_hi, T) / m;
    const double e_lo = s2 * b_lo * b_lo * trace_identity_value(l_lo, T) / m;
    rep.direct_difference = (e_hi - e_lo) / (2.0 * h);
    rep.h_used = h;
    return rep;
  }
}

}  // namespace prodnet

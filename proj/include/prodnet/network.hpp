#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "prodnet/linalg.hpp"
#include "prodnet/rng.hpp"

namespace prodnet {

struct DegreeMoments {
  double mean = 0.0;
  double variance = 0.0;
  double second_moment = 0.0;
  double d_max = 0.0;
  double psi_alpha = 0.0;          // finite-size factor (1 - n^{(1-a)/a}) / (1 - 1/n) at a = alpha
  double psi_alpha_minus_1 = 0.0;  // same factor evaluated at a = alpha - 1
};

struct DegreeSequence {
  std::vector<int> degrees;
  double alpha = 0.0;
  int d_max = 1;
  std::uint64_t seed = 0;
};

struct ProductionNetwork {
  int n = 0;
  double beta = 0.0;
  Sparse A;                       // A[j,i] = buyer i's expenditure share on supplier j
  Vec gamma;                      // household consumption weights, sum to one
  std::vector<int> degrees;      // supplier counts per buyer, when known
  std::string gamma_mode = "uniform";
  double alpha = 0.0;             // 0 when the network was not sampled from a degree law
  std::uint64_t seed = 0;

  void validate(double tol = 1e-12) const {
    if (n < 1) throw std::invalid_argument("network: n must be positive");
    if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("network: beta outside (0,1)");
    if (A.n != n) throw std::invalid_argument("network: matrix size mismatch");
    for (int i = 0; i < n; ++i)
      for (int k = A.col_ptr[i]; k < A.col_ptr[i + 1]; ++k) {
        if (A.row_idx[k] == i) throw std::invalid_argument("network: nonzero diagonal entry");
        if (A.val[k] < 0.0) throw std::invalid_argument("network: negative share");
      }
    const Vec cs = A.col_sums();
    for (int i = 0; i < n; ++i)
      if (std::fabs(cs[i] - (1.0 - beta)) > tol)
        throw std::invalid_argument("network: column " + std::to_string(i) +
                                    " sums to " + std::to_string(cs[i]) +
                                    ", expected " + std::to_string(1.0 - beta));
    if (!gamma.empty()) {
      if (static_cast<int>(gamma.size()) != n)
        throw std::invalid_argument("network: gamma size mismatch");
      double s = 0.0;
      for (double g : gamma) {
        if (g < 0.0) throw std::invalid_argument("network: negative consumption weight");
        s += g;
      }
      if (std::fabs(s - 1.0) > tol)
        throw std::invalid_argument("network: consumption weights sum to " + std::to_string(s));
    }
  }
};

// First two moments of the continuous Pareto density C x^{-(alpha+1)}
// truncated to [1, n^{1/alpha}].  The second moment crosses a removable
// singularity at alpha = 2, handled by the logarithmic limit; the asymptotic
// flag sends the cutoff to infinity.
inline DegreeMoments degree_moments(double alpha, double n, bool asymptotic = false) {
  if (!(alpha > 1.0))
    throw std::invalid_argument("degree_moments: alpha must exceed 1 (mean diverges otherwise)");
  DegreeMoments m;
  if (asymptotic || std::isinf(n)) {
    m.d_max = std::numeric_limits<double>::infinity();
    m.psi_alpha = 1.0;
    m.psi_alpha_minus_1 = 1.0;
    m.mean = alpha / (alpha - 1.0);
    if (alpha > 2.0) {
      m.second_moment = alpha / (alpha - 2.0);
      m.variance = m.second_moment - m.mean * m.mean;
    } else {
      m.second_moment = std::numeric_limits<double>::infinity();
      m.variance = std::numeric_limits<double>::infinity();
    }
    return m;
  }
  if (!(n >= 2.0)) throw std::invalid_argument("degree_moments: n must be at least 2");
  m.d_max = std::pow(n, 1.0 / alpha);
  const double denom = 1.0 - 1.0 / n;  // 1 - d_max^{-alpha}
  m.psi_alpha = (1.0 - std::pow(n, (1.0 - alpha) / alpha)) / denom;
  m.psi_alpha_minus_1 =
      (alpha > 1.0 + 1e-12)
          ? (1.0 - std::pow(n, (2.0 - alpha) / (alpha - 1.0))) / denom
          : std::numeric_limits<double>::quiet_NaN();
  m.mean = alpha / (alpha - 1.0) * m.psi_alpha;
  if (std::fabs(alpha - 2.0) < 1e-9) {
    m.second_moment = alpha * std::log(m.d_max) / denom;
  } else {
    m.second_moment =
        alpha / (alpha - 2.0) * (1.0 - std::pow(n, (2.0 - alpha) / alpha)) / denom;
  }
  m.variance = m.second_moment - m.mean * m.mean;
  return m;
}

// Continuous draws from the truncated Pareto law behind the degree sampler;
// exact inverse-CDF on [1, n^{1/alpha}].  Exposed so the closed-form moments
// can be Monte Carlo checked against the very distribution they describe.
inline Vec sample_truncated_pareto(std::size_t count, double alpha, double n,
                                   std::uint64_t seed,
                                   std::uint64_t stream = kStreamScalar) {
  if (!(alpha > 1.0)) throw std::invalid_argument("sample_truncated_pareto: alpha must exceed 1");
  const double tail_mass = 1.0 / n;  // cutoff^{-alpha}
  CounterRng rng(seed, stream);
  Vec x(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double u = rng.uniform(k);
    x[k] = std::pow(1.0 - u * (1.0 - tail_mass), -1.0 / alpha);
  }
  return x;
}

// Integer supplier counts: inverse-CDF Pareto draws, unbiased stochastic
// rounding (floor plus a Bernoulli on the fractional part, so the sample mean
// is the continuous mean), resampling anything beyond the cutoff.
inline DegreeSequence sample_degrees(int n, double alpha, std::uint64_t seed) {
  if (!(alpha > 1.0))
    throw std::invalid_argument(
        "sample_degrees: alpha must exceed 1, the degree mean diverges otherwise");
  if (n < 2) throw std::invalid_argument("sample_degrees: need at least two firms");
  DegreeSequence out;
  out.alpha = alpha;
  out.seed = seed;
  out.d_max = std::max(1, static_cast<int>(std::floor(std::pow(static_cast<double>(n), 1.0 / alpha))));
  out.degrees.resize(n);
  for (int i = 0; i < n; ++i) {
    CounterRng rng(seed, kStreamDegrees + static_cast<std::uint64_t>(i));
    int d = 0;
    bool ok = false;
    for (std::uint64_t attempt = 0; attempt < 10000; ++attempt) {
      const double x = std::pow(1.0 - rng.uniform(2 * attempt), -1.0 / alpha);
      if (x >= static_cast<double>(out.d_max) + 1.0) continue;
      const double f = std::floor(x);
      d = static_cast<int>(f) + (rng.uniform(2 * attempt + 1) < (x - f) ? 1 : 0);
      if (d >= 1 && d <= out.d_max) {
        ok = true;
        break;
      }
    }
    if (!ok) throw std::runtime_error("sample_degrees: resampling budget exhausted");
    out.degrees[i] = d;
  }
  return out;
}

enum class WeightMode { kUniform, kDegreeProportional };

inline WeightMode weight_mode_from_string(const std::string& s) {
  if (s == "uniform") return WeightMode::kUniform;
  if (s == "degree_proportional") return WeightMode::kDegreeProportional;
  throw std::invalid_argument("unknown weight mode: " + s);
}

inline Vec consumption_weights(const std::vector<int>& degrees, WeightMode mode) {
  const int n = static_cast<int>(degrees.size());
  if (n < 1) throw std::invalid_argument("consumption_weights: empty degree list");
  Vec g(n);
  if (mode == WeightMode::kUniform) {
    for (int i = 0; i < n; ++i) g[i] = 1.0 / n;
    return g;
  }
  double total = 0.0;
  for (int d : degrees) {
    if (d <= 0) throw std::invalid_argument("consumption_weights: nonpositive degree");
    total += d;
  }
  for (int i = 0; i < n; ++i) g[i] = degrees[i] / total;
  return g;
}

namespace detail {

// Vose alias table for O(1) categorical draws.
struct AliasTable {
  std::vector<double> prob;
  std::vector<int> alias;

  explicit AliasTable(const Vec& w) {
    const int n = static_cast<int>(w.size());
    prob.assign(n, 0.0);
    alias.assign(n, 0);
    double total = 0.0;
    for (double x : w) total += x;
    Vec p(n);
    for (int i = 0; i < n; ++i) p[i] = w[i] * n / total;
    std::vector<int> small, large;
    for (int i = n - 1; i >= 0; --i) (p[i] < 1.0 ? small : large).push_back(i);
    while (!small.empty() && !large.empty()) {
      const int s = small.back(), l = large.back();
      small.pop_back();
      prob[s] = p[s];
      alias[s] = l;
      p[l] = (p[l] + p[s]) - 1.0;
      if (p[l] < 1.0) {
        large.pop_back();
        small.push_back(l);
      }
    }
    for (int i : large) prob[i] = 1.0;
    for (int i : small) prob[i] = 1.0;
  }

  int draw(double u1, double u2) const {
    const int n = static_cast<int>(prob.size());
    int idx = static_cast<int>(u1 * n);
    if (idx >= n) idx = n - 1;
    return (u2 < prob[idx]) ? idx : alias[idx];
  }
};

}  // namespace detail

// Builds the share matrix: buyer i spreads (1-beta) evenly over degrees[i]
// distinct suppliers, chosen uniformly or proportionally to supplier degree.
inline ProductionNetwork build_share_matrix(const DegreeSequence& deg, double beta,
                                            WeightMode supplier_mode, std::uint64_t seed,
                                            WeightMode gamma_mode = WeightMode::kUniform) {
  const int n = static_cast<int>(deg.degrees.size());
  if (n < 2) throw std::invalid_argument("build_share_matrix: need at least two firms");
  if (!(beta > 0.0 && beta < 1.0))
    throw std::invalid_argument("build_share_matrix: beta outside (0,1)");
  for (int i = 0; i < n; ++i)
    if (deg.degrees[i] < 1 || deg.degrees[i] > n - 1)
      throw std::invalid_argument("build_share_matrix: degree of firm " + std::to_string(i) +
                                  " outside [1, n-1]");

  std::vector<int> rows, cols;
  Vec vals;
  std::vector<int> stamp(n, -1);
  Vec w(n);
  for (int j = 0; j < n; ++j) w[j] = static_cast<double>(deg.degrees[j]);
  detail::AliasTable alias(w);

  for (int i = 0; i < n; ++i) {
    CounterRng rng(seed, kStreamMatrix + static_cast<std::uint64_t>(i));
    const int d = deg.degrees[i];
    const double share = (1.0 - beta) / d;
    int picked = 0;
    std::uint64_t ctr = 0;
    const std::uint64_t budget = 256ULL * (static_cast<std::uint64_t>(d) + 4);
    std::vector<int> chosen;
    chosen.reserve(d);
    while (picked < d && ctr < budget) {
      int j;
      if (supplier_mode == WeightMode::kUniform) {
        // uniform over the n-1 candidates excluding the buyer itself
        j = static_cast<int>(rng.uniform(ctr++) * (n - 1));
        if (j >= n - 1) j = n - 2;
        if (j >= i) ++j;
      } else {
        const double u1 = rng.uniform(ctr++);
        const double u2 = rng.uniform(ctr++);
        j = alias.draw(u1, u2);
        if (j == i) continue;
      }
      if (stamp[j] == i) continue;
      stamp[j] = i;
      chosen.push_back(j);
      ++picked;
    }
    if (picked < d) {
      // Rejection stalled (heavily concentrated weights); fall back to
      // sequential weighted sampling without replacement.
      Vec wleft = w;
      wleft[i] = 0.0;
      for (int j : chosen) wleft[j] = 0.0;
      while (picked < d) {
        double total = 0.0;
        for (double x : wleft) total += x;
        if (total <= 0.0)
          throw std::runtime_error("build_share_matrix: supplier pool exhausted");
        double target = rng.uniform(ctr++) * total;
        int j = n - 1;
        for (int k = 0; k < n; ++k) {
          target -= wleft[k];
          if (target < 0.0) {
            j = k;
            break;
          }
        }
        wleft[j] = 0.0;
        chosen.push_back(j);
        ++picked;
      }
    }
    for (int j : chosen) {
      rows.push_back(j);
      cols.push_back(i);
      vals.push_back(share);
    }
  }

  ProductionNetwork net;
  net.n = n;
  net.beta = beta;
  net.A = Sparse::from_triplets(n, std::move(rows), std::move(cols), std::move(vals));
  net.degrees = deg.degrees;
  net.alpha = deg.alpha;
  net.seed = seed;
  net.gamma = consumption_weights(deg.degrees, gamma_mode);
  net.gamma_mode = (gamma_mode == WeightMode::kUniform) ? "uniform" : "degree_proportional";
  net.validate();
  return net;
}

// Reads an edge list "supplier,buyer,weight".  With normalize set, columns
// are rescaled to 1-beta; otherwise the column-sum invariant is verified.
inline ProductionNetwork ingest_network(const std::string& path, double beta, bool normalize) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("ingest_network: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("ingest_network: empty file " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "supplier,buyer,weight")
    throw std::runtime_error("ingest_network: bad header '" + line +
                             "', expected 'supplier,buyer,weight'");
  std::vector<int> rows, cols;
  Vec vals;
  long maxid = -1;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string f1, f2, f3;
    if (!std::getline(ss, f1, ',') || !std::getline(ss, f2, ',') || !std::getline(ss, f3))
      throw std::runtime_error("ingest_network: malformed row " + std::to_string(lineno));
    std::size_t pos = 0;
    long s = 0, b = 0;
    double wgt = 0.0;
    try {
      s = std::stol(f1, &pos);
      if (pos != f1.size()) throw std::invalid_argument(f1);
      b = std::stol(f2, &pos);
      if (pos != f2.size()) throw std::invalid_argument(f2);
      wgt = std::stod(f3, &pos);
      if (pos != f3.size()) throw std::invalid_argument(f3);
    } catch (const std::exception&) {
      throw std::runtime_error("ingest_network: unparsable row " + std::to_string(lineno));
    }
    if (s < 0 || b < 0)
      throw std::runtime_error("ingest_network: negative id at row " + std::to_string(lineno));
    if (s == b)
      throw std::runtime_error("ingest_network: self-loop at row " + std::to_string(lineno));
    if (wgt < 0.0)
      throw std::runtime_error("ingest_network: negative weight at row " + std::to_string(lineno));
    rows.push_back(static_cast<int>(s));
    cols.push_back(static_cast<int>(b));
    vals.push_back(wgt);
    maxid = std::max({maxid, s, b});
  }
  if (maxid < 1) throw std::runtime_error("ingest_network: no edges in " + path);
  const int n = static_cast<int>(maxid) + 1;

  ProductionNetwork net;
  net.n = n;
  net.beta = beta;
  net.A = Sparse::from_triplets(n, std::move(rows), std::move(cols), std::move(vals));
  Vec cs = net.A.col_sums();
  for (int i = 0; i < n; ++i)
    if (cs[i] <= 0.0)
      throw std::runtime_error("ingest_network: firm " + std::to_string(i) +
                               " has no suppliers (zero column)");
  if (normalize) {
    for (int i = 0; i < n; ++i) {
      const double f = (1.0 - beta) / cs[i];
      for (int k = net.A.col_ptr[i]; k < net.A.col_ptr[i + 1]; ++k) net.A.val[k] *= f;
    }
  }
  net.degrees.resize(n);
  for (int i = 0; i < n; ++i) net.degrees[i] = net.A.col_ptr[i + 1] - net.A.col_ptr[i];
  net.gamma = consumption_weights(net.degrees, WeightMode::kUniform);
  net.gamma_mode = "uniform";
  net.validate();
  return net;
}

}  // namespace prodnet

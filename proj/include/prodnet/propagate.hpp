#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "prodnet/linalg.hpp"
#include "prodnet/network.hpp"
#include "prodnet/shocks.hpp"

namespace prodnet {

enum class Aggregation { kFlow, kImpulse };

enum class Timing { kContemporaneous, kLagged };

// Influence weights w solving (I - A^T) w = gamma, so w.eps equals the
// fully propagated aggregate gamma^T (I - A)^{-1} eps.
inline Vec static_weights(const ProductionNetwork& net, double tol = 1e-12) {
  auto op = [&](const Vec& x, Vec& y) { net.A.tmatvec(x, y); };
  return neumann_solve(op, net.gamma, tol);
}

inline double leontief_aggregate(const ProductionNetwork& net, const Vec& eps,
                                 double tol = 1e-12) {
  const Vec w = static_weights(net, tol);
  KahanSum s;
  for (std::size_t i = 0; i < w.size(); ++i) s.add(w[i] * eps[i]);
  return s.value();
}

// Partial sums y_L = gamma^T sum_{l<=L} A^l eps for L = 0..Lmax.
inline Vec depth_truncated_series(const ProductionNetwork& net, const Vec& eps, int Lmax) {
  if (static_cast<int>(eps.size()) != net.n)
    throw std::invalid_argument("depth_truncated_series: shock length mismatch");
  Vec out(Lmax + 1);
  Vec s = eps, tmp(net.n);
  double acc = dot(net.gamma, s);
  out[0] = acc;
  for (int l = 1; l <= Lmax; ++l) {
    net.A.matvec(s, tmp);
    s.swap(tmp);
    acc += dot(net.gamma, s);
    out[l] = acc;
  }
  return out;
}

inline double depth_truncated(const ProductionNetwork& net, const Vec& eps, int L) {
  return depth_truncated_series(net, eps, L).back();
}

// Geometric tail bound on the truncation error: column sums of A^l shrink
// like (1-beta)^l, so with r = (1-beta) + 0.05 the depth-L error is at most
// |eps|_1 r^{L+1} / (1 - r).
inline double truncation_bound(double beta, double eps_norm1, int L) {
  const double r = (1.0 - beta) + 0.05;
  if (!(r < 1.0))
    throw std::invalid_argument("truncation_bound: beta too small, the margin rate reaches 1");
  return eps_norm1 * std::pow(r, L + 1) / (1.0 - r);
}

// Aggregation vector (I + A + ... + A^{L-1})^T gamma for flow readings of
// the round-based economy.
inline Vec flow_aggregator(const ProductionNetwork& net, int L) {
  Vec g = net.gamma, cur = net.gamma, tmp(net.n);
  for (int l = 1; l < L; ++l) {
    net.A.tmatvec(cur, tmp);
    cur.swap(tmp);
    for (int i = 0; i < net.n; ++i) g[i] += cur[i];
  }
  return g;
}

// Economy where inputs propagate L rounds between shock arrivals:
// state <- A^L state + eps_t.  Flow aggregation reads gamma through the
// within-period rounds; impulse reads the state directly.
inline Vec simulate_L_economy(const ProductionNetwork& net, const ShockPanel& panel, int L,
                              Aggregation agg = Aggregation::kFlow) {
  if (panel.n != net.n) throw std::invalid_argument("simulate_L_economy: panel width mismatch");
  if (L < 1) throw std::invalid_argument("simulate_L_economy: L must be positive");
  const Vec g = (agg == Aggregation::kFlow) ? flow_aggregator(net, L) : net.gamma;
  Vec state(net.n, 0.0), tmp(net.n);
  Vec y(panel.T);
  for (int t = 0; t < panel.T; ++t) {
    for (int l = 0; l < L; ++l) {
      net.A.matvec(state, tmp);
      state.swap(tmp);
    }
    const double* e = panel.col(t);
    for (int i = 0; i < net.n; ++i) state[i] += e[i];
    y[t] = dot(g, state);
  }
  return y;
}

enum class MicroInit { kSteadyState, kUnit };

struct MicroResult {
  Vec y;             // aggregate log deviation from the zero-shock twin, one per date
  Vec log_q;         // final-date log quantities
  Vec log_q_steady;  // fixed point of the shock-free recursion
  Vec prices;        // final-date posted prices m_i / q_i
  Vec sales;         // stationary nominal sales
  Vec labor;         // stationary labor demands
  Vec twin_gap;      // per-date distance of the twin from the fixed point
  double labor_residual = 0.0;
  double goods_residual = 0.0;
  double recursion_residual = 0.0;  // literal bookkeeping vs linear recursion
  double convergence_gap = 0.0;     // final-date distance of the twin from the fixed point
};

// Literal round-by-round simulation: firms post prices from current stocks,
// spend fixed expenditure shares out of stationary sales, and produce with
// unit-elastic technologies.  The linear recursion in log quantities is run
// alongside and the gap is recorded; aggregate output is read against a
// shock-free twin path.
inline MicroResult simulate_micro(const ProductionNetwork& net, const ShockPanel& panel,
                                  MicroInit init = MicroInit::kSteadyState,
                                  double tol = 1e-12) {
  if (panel.n != net.n) throw std::invalid_argument("simulate_micro: panel width mismatch");
  const int n = net.n;
  const double beta = net.beta;

  auto right = [&](const Vec& x, Vec& y) { net.A.matvec(x, y); };
  const Vec sales = neumann_solve(right, net.gamma, tol);  // m = gamma + A m
  Vec log_sales(n);
  for (int i = 0; i < n; ++i) {
    if (!(sales[i] > 0.0)) throw std::runtime_error("simulate_micro: nonpositive sales");
    log_sales[i] = std::log(sales[i]);
  }

  // Drift b_i = beta log beta + sum_j a_ij log a_ij
  //            + (beta + rowsum_i) log m_i - (A log m)_i.
  Vec rowsum(n, 0.0), theta(n, 0.0);
  for (int c = 0; c < n; ++c)
    for (int k = net.A.col_ptr[c]; k < net.A.col_ptr[c + 1]; ++k) {
      const int r = net.A.row_idx[k];
      const double v = net.A.val[k];
      rowsum[r] += v;
      if (v > 0.0) theta[r] += v * std::log(v);
    }
  Vec drift(n), am(n);
  net.A.matvec(log_sales, am);
  const double blogb = beta * std::log(beta);
  for (int i = 0; i < n; ++i)
    drift[i] = blogb + theta[i] + (beta + rowsum[i]) * log_sales[i] - am[i];

  MicroResult res;
  res.sales = sales;
  res.labor.resize(n);
  KahanSum labor_total;
  for (int i = 0; i < n; ++i) {
    res.labor[i] = beta * sales[i];
    labor_total.add(res.labor[i]);
  }
  res.labor_residual = std::fabs(labor_total.value() - 1.0);
  {
    Vec ams(n);
    net.A.matvec(sales, ams);
    double g = 0.0;
    for (int i = 0; i < n; ++i)
      g = std::max(g, std::fabs(sales[i] - net.gamma[i] - ams[i]));
    res.goods_residual = g;
  }

  res.log_q_steady = neumann_solve(right, drift, tol);  // x = A x + drift

  Vec lq(n, 0.0), lq_lin(n, 0.0), twin(n, 0.0);
  if (init == MicroInit::kSteadyState) {
    lq = res.log_q_steady;
    lq_lin = res.log_q_steady;
    twin = res.log_q_steady;
  }
  Vec next(n), lin_next(n), twin_next(n), tmp(n);
  res.y.resize(panel.T);
  for (int t = 0; t < panel.T; ++t) {
    // Literal step: log q'_i = eps_i + beta log(beta m_i)
    //   + sum_j a_ij (log a_ij + log m_i - log p_j),  log p_j = log m_j - log q_j.
    for (int i = 0; i < n; ++i)
      next[i] = panel.at(i, t) + beta * (std::log(beta) + log_sales[i]);
    for (int c = 0; c < n; ++c) {
      const double logp = log_sales[c] - lq[c];
      for (int k = net.A.col_ptr[c]; k < net.A.col_ptr[c + 1]; ++k) {
        const int r = net.A.row_idx[k];
        const double v = net.A.val[k];
        next[r] += v * (std::log(v) + log_sales[r] - logp);
      }
    }
    // Linear recursion and twin.
    net.A.matvec(lq_lin, tmp);
    for (int i = 0; i < n; ++i) lin_next[i] = tmp[i] + drift[i] + panel.at(i, t);
    net.A.matvec(twin, tmp);
    for (int i = 0; i < n; ++i) twin_next[i] = tmp[i] + drift[i];
    double rr = 0.0;
    for (int i = 0; i < n; ++i) rr = std::max(rr, std::fabs(next[i] - lin_next[i]));
    res.recursion_residual = std::max(res.recursion_residual, rr);
    lq.swap(next);
    lq_lin.swap(lin_next);
    twin.swap(twin_next);
    double tg = 0.0;
    for (int i = 0; i < n; ++i)
      tg = std::max(tg, std::fabs(twin[i] - res.log_q_steady[i]));
    res.twin_gap.push_back(tg);
    KahanSum s;
    for (int i = 0; i < n; ++i) s.add(net.gamma[i] * (lq[i] - twin[i]));
    res.y[t] = s.value();
  }
  res.log_q = lq;
  if (!res.twin_gap.empty()) res.convergence_gap = res.twin_gap.back();
  res.prices.resize(n);
  for (int i = 0; i < n; ++i) res.prices[i] = sales[i] * std::exp(-lq[i]);
  return res;
}

// One-dimensional surrogate s_t = lambda2 s_{t-1} + eta_t, y_t = b s_t.
// Contemporaneous timing lets the first stream entry move the first output;
// lagged timing delays the response by one date.
inline Vec simulate_reduced(double lambda2, double b, const Vec& eta,
                            Timing timing = Timing::kContemporaneous) {
  Vec y(eta.size());
  double s = 0.0;
  for (std::size_t t = 0; t < eta.size(); ++t) {
    if (timing == Timing::kContemporaneous) {
      s = lambda2 * s + eta[t];
      y[t] = b * s;
    } else {
      y[t] = b * s;
      s = lambda2 * s + eta[t];
    }
  }
  return y;
}

// Static counterpart of the surrogate: y*_t = b eta_t / (1 - lambda2).
inline Vec static_reduced(double lambda2, double b, const Vec& eta) {
  if (!(std::fabs(lambda2) < 1.0))
    throw std::invalid_argument("static_reduced: |lambda2| must be below 1");
  Vec y(eta.size());
  const double f = b / (1.0 - lambda2);
  for (std::size_t t = 0; t < eta.size(); ++t) y[t] = f * eta[t];
  return y;
}

// Fully propagated aggregate per date: y*_t = w.eps_t.
inline Vec static_series(const ProductionNetwork& net, const ShockPanel& panel,
                         double tol = 1e-12) {
  if (panel.n != net.n) throw std::invalid_argument("static_series: panel width mismatch");
  const Vec w = static_weights(net, tol);
  Vec y(panel.T);
  for (int t = 0; t < panel.T; ++t) {
    KahanSum s;
    for (int i = 0; i < net.n; ++i) s.add(w[i] * panel.at(i, t));
    y[t] = s.value();
  }
  return y;
}

struct InterferenceDecomposition {
  Vec total_increment;    // impulse-mode y_t - y_{t-1}
  Vec static_increment;   // gamma^T (I - A^L)^{-1} (eps_t - eps_{t-1})
  Vec correction;         // vintage interference from earlier shock changes
  double max_identity_gap = 0.0;
};

// Splits each increment of the round-based economy into the fully-propagated
// response to the newest shock change plus interference from older vintages.
// Shocks before the sample start are treated as zero.
inline InterferenceDecomposition interference_decomposition(const ProductionNetwork& net,
                                                            const ShockPanel& panel, int L,
                                                            double tol = 1e-12,
                                                            double tail_tol = 1e-14) {
  if (panel.n != net.n)
    throw std::invalid_argument("interference_decomposition: panel width mismatch");
  const int n = net.n, T = panel.T;

  auto opL = [&](const Vec& x, Vec& y) {
    Vec cur = x, tmp(n);
    for (int l = 0; l < L; ++l) {
      net.A.tmatvec(cur, tmp);
      cur.swap(tmp);
    }
    y = cur;
  };
  const Vec wL = neumann_solve(opL, net.gamma, tol);  // (I - (A^L)^T) wL = gamma

  // g_j = (A^{jL})^T gamma until its mass is negligible.
  std::vector<Vec> g;
  Vec cur = net.gamma, tmp(n);
  for (int j = 1;; ++j) {
    for (int l = 0; l < L; ++l) {
      net.A.tmatvec(cur, tmp);
      cur.swap(tmp);
    }
    if (norm1(cur) < tail_tol) break;
    g.push_back(cur);
    if (j > 100000)
      throw std::runtime_error("interference_decomposition: vintage series does not decay");
  }

  const Vec y = simulate_L_economy(net, panel, L, Aggregation::kImpulse);

  InterferenceDecomposition out;
  out.total_increment.resize(T);
  out.static_increment.resize(T);
  out.correction.resize(T);
  Vec deps(n), dlag(n);
  for (int t = 0; t < T; ++t) {
    for (int i = 0; i < n; ++i)
      deps[i] = panel.at(i, t) - (t > 0 ? panel.at(i, t - 1) : 0.0);
    out.total_increment[t] = y[t] - (t > 0 ? y[t - 1] : 0.0);
    out.static_increment[t] = dot(wL, deps);
    KahanSum corr;
    for (std::size_t j = 1; j <= g.size(); ++j) {
      const int tl = t - static_cast<int>(j);
      for (int i = 0; i < n; ++i) {
        const double lagged =
            (tl >= 0 ? panel.at(i, tl) - (tl > 0 ? panel.at(i, tl - 1) : 0.0) : 0.0);
        dlag[i] = lagged - deps[i];
      }
      corr.add(dot(g[j - 1], dlag));
    }
    out.correction[t] = corr.value();
    out.max_identity_gap =
        std::max(out.max_identity_gap,
                 std::fabs(out.static_increment[t] + out.correction[t] - out.total_increment[t]));
  }
  return out;
}

}  // namespace prodnet

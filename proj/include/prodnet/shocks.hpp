#pragma once

#include <cstdint>
#include <stdexcept>

#include "prodnet/linalg.hpp"
#include "prodnet/network.hpp"
#include "prodnet/rng.hpp"

namespace prodnet {

// Firm-by-date innovation panel, column major: eps[i + n*t].  eps holds the
// raw draws; eps_hat the double-demeaned copy used by the two-mode objects.
struct ShockPanel {
  int n = 0;
  int T = 0;
  Vec eps;
  Vec eps_hat;
  double sigma = 0.0;
  std::uint64_t seed = 0;

  double at(int i, int t) const { return eps[static_cast<std::size_t>(t) * n + i]; }
  double& at(int i, int t) { return eps[static_cast<std::size_t>(t) * n + i]; }
  double hat(int i, int t) const { return eps_hat[static_cast<std::size_t>(t) * n + i]; }
  double& hat(int i, int t) { return eps_hat[static_cast<std::size_t>(t) * n + i]; }
  const double* col(int t) const { return eps.data() + static_cast<std::size_t>(t) * n; }
  const double* col_hat(int t) const { return eps_hat.data() + static_cast<std::size_t>(t) * n; }
};

// Rebuilds eps_hat from eps: cross-sectional mean removed at every date,
// then each firm's window time-average removed.  The projections commute.
inline void demean_panel(ShockPanel& p) {
  p.eps_hat = p.eps;
  for (int t = 0; t < p.T; ++t) {
    KahanSum s;
    for (int i = 0; i < p.n; ++i) s.add(p.hat(i, t));
    const double m = s.value() / p.n;
    for (int i = 0; i < p.n; ++i) p.hat(i, t) -= m;
  }
  for (int i = 0; i < p.n; ++i) {
    KahanSum s;
    for (int t = 0; t < p.T; ++t) s.add(p.hat(i, t));
    const double m = s.value() / p.T;
    for (int t = 0; t < p.T; ++t) p.hat(i, t) -= m;
  }
}

// Independent N(0, sigma^2) draws; firm i owns substream kStreamShocks+i and
// date t is the counter, so panels of different lengths share leading draws.
inline ShockPanel draw_shocks(int n, int T, double sigma, std::uint64_t seed) {
  if (n < 1 || T < 1) throw std::invalid_argument("draw_shocks: n and T must be positive");
  if (!(sigma > 0.0)) throw std::invalid_argument("draw_shocks: sigma must be positive");
  ShockPanel p;
  p.n = n;
  p.T = T;
  p.sigma = sigma;
  p.seed = seed;
  p.eps.resize(static_cast<std::size_t>(n) * T);
  for (int i = 0; i < n; ++i) {
    CounterRng rng(seed, kStreamShocks + static_cast<std::uint64_t>(i));
    for (int t = 0; t < T; ++t) p.at(i, t) = sigma * rng.gaussian(static_cast<std::uint64_t>(t));
  }
  demean_panel(p);
  return p;
}

// Zero-filled panel scaffold for hand-built shock patterns in experiments.
inline ShockPanel zero_panel(int n, int T, double sigma = 1.0) {
  if (n < 1 || T < 1) throw std::invalid_argument("zero_panel: n and T must be positive");
  ShockPanel p;
  p.n = n;
  p.T = T;
  p.sigma = sigma;
  p.eps.assign(static_cast<std::size_t>(n) * T, 0.0);
  p.eps_hat = p.eps;
  return p;
}

}  // namespace prodnet

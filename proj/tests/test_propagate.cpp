#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "prodnet/network.hpp"
#include "prodnet/propagate.hpp"
#include "prodnet/shocks.hpp"

using namespace prodnet;

namespace {

ProductionNetwork two_firm(double beta) {
  ProductionNetwork net;
  net.n = 2;
  net.beta = beta;
  net.A = Sparse::from_triplets(2, {1, 0}, {0, 1}, {1.0 - beta, 1.0 - beta});
  net.gamma = {0.5, 0.5};
  net.degrees = {1, 1};
  net.validate();
  return net;
}

ProductionNetwork cycle_net(double beta, Vec gamma) {
  const int n = static_cast<int>(gamma.size());
  ProductionNetwork net;
  net.n = n;
  net.beta = beta;
  std::vector<int> rows, cols;
  Vec vals;
  for (int c = 0; c < n; ++c) {
    rows.push_back((c + 1) % n);
    cols.push_back(c);
    vals.push_back(1.0 - beta);
  }
  net.A = Sparse::from_triplets(n, std::move(rows), std::move(cols), std::move(vals));
  net.gamma = std::move(gamma);
  net.validate();
  return net;
}

ProductionNetwork random_net(int n, double alpha, double beta, std::uint64_t seed) {
  DegreeSequence ds = sample_degrees(n, alpha, seed);
  return build_share_matrix(ds, beta, WeightMode::kUniform, seed);
}

}  // namespace

TEST_CASE("static weights and aggregate on the two-firm network") {
  const ProductionNetwork net = two_firm(0.3);
  const Vec w = static_weights(net);
  CHECK(w[0] == Catch::Approx(5.0 / 3.0).epsilon(1e-11));
  CHECK(w[1] == Catch::Approx(5.0 / 3.0).epsilon(1e-11));
  const Vec eps{0.1, -0.2};
  CHECK(leontief_aggregate(net, eps) == Catch::Approx(-1.0 / 6.0).epsilon(1e-11));
}

TEST_CASE("depth-truncated sums converge and obey the tail bound") {
  const ProductionNetwork net = random_net(40, 2.0, 0.35, 555);
  ShockPanel panel = draw_shocks(net.n, 1, 0.3, 556);
  Vec eps(net.n);
  for (int i = 0; i < net.n; ++i) eps[i] = panel.at(i, 0);

  const double full = leontief_aggregate(net, eps);
  const Vec series = depth_truncated_series(net, eps, 60);
  CHECK(series.back() == Catch::Approx(full).margin(1e-10));
  CHECK(depth_truncated(net, eps, 60) == Catch::Approx(series.back()).margin(1e-15));

  const double e1 = norm1(eps);
  for (int L : {0, 2, 5, 10, 20}) {
    const double err = std::fabs(series[L] - full);
    CHECK(err <= truncation_bound(net.beta, e1, L) + 1e-12);
  }
  CHECK_THROWS_AS(truncation_bound(0.05, 1.0, 3), std::invalid_argument);
  CHECK_THROWS_AS(truncation_bound(0.01, 1.0, 3), std::invalid_argument);
}

TEST_CASE("flow aggregator accumulates transposed powers") {
  const ProductionNetwork net = two_firm(0.3);
  const Vec g1 = flow_aggregator(net, 1);
  CHECK(g1[0] == Catch::Approx(0.5).margin(1e-15));
  CHECK(g1[1] == Catch::Approx(0.5).margin(1e-15));
  const Vec g2 = flow_aggregator(net, 2);
  CHECK(g2[0] == Catch::Approx(0.85).margin(1e-14));
  CHECK(g2[1] == Catch::Approx(0.85).margin(1e-14));
}

TEST_CASE("round-based economy matches a hand-rolled recursion") {
  const ProductionNetwork net = cycle_net(0.3, Vec{0.2, 0.3, 0.5});
  ShockPanel panel = draw_shocks(3, 12, 0.4, 777);

  const Vec y = simulate_L_economy(net, panel, 1);
  const Vec y_imp = simulate_L_economy(net, panel, 1, Aggregation::kImpulse);

  Vec state(3, 0.0), tmp(3);
  for (int t = 0; t < panel.T; ++t) {
    net.A.matvec(state, tmp);
    state.swap(tmp);
    for (int i = 0; i < 3; ++i) state[i] += panel.at(i, t);
    const double expect = dot(net.gamma, state);
    CHECK(y[t] == Catch::Approx(expect).margin(1e-13));
    CHECK(y_imp[t] == Catch::Approx(expect).margin(1e-13));
  }
  CHECK_THROWS_AS(simulate_L_economy(net, panel, 0), std::invalid_argument);
}

TEST_CASE("micro simulation reproduces the one-round economy") {
  const ProductionNetwork net = random_net(40, 2.5, 0.35, 901);
  ShockPanel panel = draw_shocks(net.n, 60, 0.05, 902);

  const MicroResult m = simulate_micro(net, panel);
  const Vec y1 = simulate_L_economy(net, panel, 1);
  REQUIRE(m.y.size() == y1.size());
  for (std::size_t t = 0; t < y1.size(); ++t)
    CHECK(m.y[t] == Catch::Approx(y1[t]).margin(1e-10));
}

TEST_CASE("micro bookkeeping clears markets and tracks the recursion") {
  const ProductionNetwork net = random_net(40, 2.0, 0.35, 903);
  ShockPanel panel = draw_shocks(net.n, 60, 0.05, 904);

  const MicroResult m = simulate_micro(net, panel);
  CHECK(m.labor_residual <= 1e-9);
  CHECK(m.goods_residual <= 1e-11);
  CHECK(m.recursion_residual <= 1e-8);
  CHECK(m.convergence_gap <= 1e-9);
  CHECK(m.convergence_gap == m.twin_gap.back());
  for (double p : m.prices) CHECK(p > 0.0);
  for (double s : m.sales) CHECK(s > 0.0);
  double labor_sum = 0.0;
  for (double l : m.labor) labor_sum += l;
  CHECK(labor_sum == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("unit start decays geometrically toward the fixed point") {
  const ProductionNetwork net = two_firm(0.3);
  ShockPanel panel = zero_panel(2, 25);
  const MicroResult m = simulate_micro(net, panel, MicroInit::kUnit);
  REQUIRE(m.twin_gap.size() == 25);
  CHECK(m.twin_gap[0] > 0.0);
  for (std::size_t t = 1; t < m.twin_gap.size(); ++t)
    CHECK(m.twin_gap[t] == Catch::Approx(0.7 * m.twin_gap[t - 1]).epsilon(1e-6));
  for (std::size_t t = 0; t < m.y.size(); ++t) CHECK(std::fabs(m.y[t]) < 1e-12);
}

TEST_CASE("reduced recursion honors both timing conventions") {
  Vec eta(5, 0.0);
  eta[0] = 1.0;
  const double lambda = 0.6, b = 2.0;

  const Vec yc = simulate_reduced(lambda, b, eta);
  for (int t = 0; t < 5; ++t)
    CHECK(yc[t] == Catch::Approx(b * std::pow(lambda, t)).margin(1e-14));

  const Vec yl = simulate_reduced(lambda, b, eta, Timing::kLagged);
  CHECK(yl[0] == Catch::Approx(0.0).margin(1e-15));
  for (int t = 1; t < 5; ++t)
    CHECK(yl[t] == Catch::Approx(b * std::pow(lambda, t - 1)).margin(1e-14));
}

TEST_CASE("static surrogate scales each innovation") {
  const Vec eta{0.5, -1.0, 0.25};
  const Vec y = static_reduced(0.5, 3.0, eta);
  CHECK(y[0] == Catch::Approx(3.0).margin(1e-14));
  CHECK(y[1] == Catch::Approx(-6.0).margin(1e-14));
  CHECK(y[2] == Catch::Approx(1.5).margin(1e-14));
  CHECK_THROWS_AS(static_reduced(1.0, 3.0, eta), std::invalid_argument);
}

TEST_CASE("static series applies the influence weights date by date") {
  const ProductionNetwork net = two_firm(0.3);
  ShockPanel panel = draw_shocks(2, 6, 0.2, 321);
  const Vec y = static_series(net, panel);
  for (int t = 0; t < 6; ++t) {
    const double expect = (5.0 / 3.0) * (panel.at(0, t) + panel.at(1, t));
    CHECK(y[t] == Catch::Approx(expect).margin(1e-12));
  }
}

TEST_CASE("increment decomposition closes its identity") {
  const ProductionNetwork net = random_net(30, 2.0, 0.4, 606);
  ShockPanel panel = draw_shocks(net.n, 20, 0.1, 607);
  const InterferenceDecomposition d = interference_decomposition(net, panel, 3);
  CHECK(d.max_identity_gap <= 1e-10);
  REQUIRE(d.total_increment.size() == 20);
  for (int t = 0; t < 20; ++t) {
    const double rebuilt = d.static_increment[t] + d.correction[t];
    CHECK(d.total_increment[t] == Catch::Approx(rebuilt).margin(1e-10));
  }
}

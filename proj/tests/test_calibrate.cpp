#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "prodnet/calibrate.hpp"
#include "prodnet/network.hpp"

using namespace prodnet;

TEST_CASE("attenuation table sorts its grid and applies the closed form") {
  const CalibrationTable one = attenuation_table(Vec{0.2});
  REQUIRE(one.rows.size() == 1u);
  CHECK(one.rows[0].R == Catch::Approx(0.64 / 1.2).epsilon(1e-13));
  CHECK_FALSE(one.has_shares);

  const CalibrationTable two = attenuation_table(Vec{0.7, 0.5});
  REQUIRE(two.rows.size() == 2u);
  CHECK(two.rows[0].lambda2 == 0.5);
  CHECK(two.rows[0].R == Catch::Approx(1.0 / 6.0).epsilon(1e-13));
  CHECK(two.rows[1].lambda2 == 0.7);
  CHECK(two.rows[1].R == Catch::Approx(0.052941176470588235).epsilon(1e-12));

  const CalibrationTable full = attenuation_table(default_lambda2_grid());
  for (std::size_t k = 1; k < full.rows.size(); ++k)
    CHECK(full.rows[k].R < full.rows[k - 1].R);

  CHECK_THROWS_AS(attenuation_table(Vec{}), std::invalid_argument);
  CHECK_THROWS_AS(attenuation_table(Vec{0.0}), std::invalid_argument);
  CHECK_THROWS_AS(attenuation_table(Vec{1.0}), std::invalid_argument);
}

TEST_CASE("granular share rescales by the attenuation ratio") {
  CHECK(granular_share(0.25, 1e-9) == Catch::Approx(0.25).epsilon(1e-8));
  CHECK(granular_share(1.0, 0.5) == Catch::Approx(1.0 / 6.0).epsilon(1e-13));
  CHECK(granular_share(0.33, 0.5) == Catch::Approx(0.055).epsilon(1e-13));
  CHECK_THROWS_AS(granular_share(0.0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(granular_share(1.5, 0.5), std::invalid_argument);
}

TEST_CASE("share labels follow the banded rule") {
  CHECK(share_label(1.0 / 6.0) == "approximately one-sixth");
  CHECK(share_label(0.18) == "approximately one-sixth");
  CHECK(share_label(0.05) == "close to zero");
  CHECK(share_label(0.25).empty());
}

TEST_CASE("share table crosses grid and shares") {
  const CalibrationTable t = share_table(Vec{0.5}, Vec{0.1, 0.33});
  REQUIRE(t.rows.size() == 2u);
  CHECK(t.has_shares);
  for (const CalibrationRow& r : t.rows) {
    CHECK(r.dynamic_share == Catch::Approx(r.static_share * r.R).epsilon(1e-14));
    CHECK(r.lambda2 == 0.5);
  }
  CHECK(default_static_shares().size() == 2u);
  CHECK_THROWS_AS(share_table(Vec{0.5}, Vec{}), std::invalid_argument);
}

TEST_CASE("exponent-to-persistence mappings evaluate and clamp") {
  Lambda2Map lin;
  lin.type = Lambda2Map::Type::kLinear;
  lin.intercept = 0.9;
  lin.slope = -0.2;
  CHECK(lin(1.5) == Catch::Approx(0.6).epsilon(1e-14));

  Lambda2Map tab;
  tab.type = Lambda2Map::Type::kTable;
  tab.points = {{1.2, 0.8}, {2.0, 0.4}, {3.0, 0.3}};
  CHECK(tab(1.6) == Catch::Approx(0.6).epsilon(1e-13));
  CHECK(tab(1.0) == Catch::Approx(0.8).epsilon(1e-14));
  CHECK(tab(5.0) == Catch::Approx(0.3).epsilon(1e-14));
  CHECK(tab(2.0) == Catch::Approx(0.4).epsilon(1e-14));

  Lambda2Map bad;
  bad.type = Lambda2Map::Type::kTable;
  bad.points = {{1.2, 0.8}};
  CHECK_THROWS_AS(bad(1.5), std::invalid_argument);
}

TEST_CASE("ordering mismatch detector flags kinks only") {
  CHECK(detail::ordering_mismatch(Vec{0.0, 2.0}, Vec{1.0, 2.0}, Vec{0.0, 2.0}, 2.0));
  CHECK_FALSE(detail::ordering_mismatch(Vec{1.0, 0.5}, Vec{1.1, 0.55}, Vec{1.2, 0.6}, 1.2));
}

TEST_CASE("constant persistence leaves only the exposure channel") {
  DegreeSequence ds = sample_degrees(200, 1.8, 515);
  const Vec gamma = consumption_weights(ds.degrees, WeightMode::kDegreeProportional);
  auto flat = [](double) { return 0.5; };
  const SensitivityReport r =
      sensitivity_decomposition(1.8, flat, ds.degrees, gamma, 0.4, 1.0, 60);
  CHECK(r.lambda2 == 0.5);
  CHECK(r.lambda2_prime == Catch::Approx(0.0).margin(1e-15));
  CHECK(r.overlap_channel == 0.0);
  for (double np : r.nu_prime) CHECK(np == 0.0);
  CHECK(r.total == Catch::Approx(r.exposure_channel).margin(1e-18));
  CHECK(std::fabs(r.total - r.direct_difference) <=
        1e-4 * std::fabs(r.direct_difference) + 1e-12);
  CHECK_FALSE(r.sign_ok);
}

TEST_CASE("two-channel split matches the direct difference") {
  DegreeSequence ds = sample_degrees(200, 1.5, 606);
  const Vec gamma = consumption_weights(ds.degrees, WeightMode::kDegreeProportional);
  auto map = [](double a) { return 0.9 - 0.2 * (a - 1.0); };
  const SensitivityReport r =
      sensitivity_decomposition(1.5, map, ds.degrees, gamma, 0.3, 1.0, 60);
  CHECK(r.lambda2 == Catch::Approx(0.8).epsilon(1e-13));
  CHECK(r.lambda2_prime == Catch::Approx(-0.2).epsilon(1e-10));
  CHECK(r.sign_ok);
  CHECK(r.total == Catch::Approx(r.exposure_channel + r.overlap_channel).margin(1e-16));
  CHECK(std::fabs(r.total - r.direct_difference) <=
        1e-4 * std::fabs(r.direct_difference) + 1e-12);
  CHECK(r.h_used == Catch::Approx(1e-3).epsilon(1e-12));
}

TEST_CASE("sensitivity guards reject unusable inputs") {
  DegreeSequence ds = sample_degrees(50, 2.0, 707);
  const Vec gamma = consumption_weights(ds.degrees, WeightMode::kUniform);
  auto flat = [](double) { return 0.5; };
  CHECK_THROWS_AS(sensitivity_decomposition(1.0005, flat, ds.degrees, gamma, 0.3, 1.0, 60),
                  std::invalid_argument);
  auto outside = [](double) { return 1.2; };
  CHECK_THROWS_AS(sensitivity_decomposition(2.0, outside, ds.degrees, gamma, 0.3, 1.0, 60),
                  std::invalid_argument);
  CHECK_THROWS_AS(sensitivity_decomposition(2.0, flat, ds.degrees, gamma, 0.3, 1.0, 1),
                  std::invalid_argument);
}

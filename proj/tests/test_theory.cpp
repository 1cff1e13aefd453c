#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "mondyn/errors.hpp"
#include "mondyn/frame_potential.hpp"
#include "mondyn/theory.hpp"

using namespace mondyn;
using namespace mondyn::theory;

namespace {

HamiltonianSet prepared(CouplingSpec spec) {
  HamiltonianSet hs = build(spec);
  mean_field_shift(hs, zero_state(spec.n_b));
  bath_split(hs);
  return hs;
}

}  // namespace

// Closed-form values below were frozen from an independent evaluation of the
// same formulas; tolerances are double-precision tight.

TEST_CASE("first-order decay curve hits its frozen anchor values") {
  CHECK(f1_floor(1, 1) == doctest::Approx(0.66666666666666663).epsilon(1e-14));
  CHECK(f1_expected(1, 1, 1.0) == doctest::Approx(0.79999999999999993).epsilon(1e-14));
  CHECK(f1_floor(5, 3) == doctest::Approx(0.035151958989381178).epsilon(1e-14));
  CHECK(f1_expected(5, 3, 2.0) == doctest::Approx(0.05019873836981991).epsilon(1e-13));
  CHECK(f1_decay_rate(5, 3) == doctest::Approx(-2.0804033224221836).epsilon(1e-14));
  CHECK(f1_decay_rate(2, 1) == doctest::Approx(-0.74193734472937733).epsilon(1e-14));
}

TEST_CASE("decay curve starts at one and saturates at the floor") {
  for (int n_s = 1; n_s <= 10; ++n_s) {
    for (int n_b = 1; n_b <= 10; ++n_b) {
      CHECK(std::abs(f1_expected(n_s, n_b, 0.0) - 1.0) < 1e-12);
      CHECK(std::abs(f1_expected(n_s, n_b, 500.0) - f1_floor(n_s, n_b)) < 1e-10);
      CHECK(f1_floor(n_s, n_b) > haar_frame_potential(n_s, 1));
    }
  }
  // Strictly decreasing in the cycle count.
  for (int n = 1; n <= 6; ++n) {
    CHECK(f1_expected(3, 2, n) < f1_expected(3, 2, n - 1));
  }
}

TEST_CASE("higher-order floor and bounds hit frozen values") {
  CHECK(fk_floor(2, 1, 2) == doctest::Approx(0.24999999999999983).epsilon(1e-14));
  CHECK(fk_lower_bound(2, 1, 0.0, 2) == doctest::Approx(0.50000000000000044).epsilon(1e-14));
  CHECK(fk_lower_bound(2, 1, 3.0, 2) ==
        doctest::Approx(-0.15171447767819632).epsilon(1e-13));
  CHECK(fk_lower_bound_saturating(2, 1, 3.0, 2) ==
        doctest::Approx(0.34828552232180332).epsilon(1e-13));
  CHECK(fk_decay_rate(2, 1) == doctest::Approx(-0.67739882359180614).epsilon(1e-14));

  // The two tail conventions always differ by twice the floor.
  for (const double n : {0.0, 1.0, 2.0, 7.5}) {
    const double gap =
        fk_lower_bound_saturating(3, 2, n, 4) - fk_lower_bound(3, 2, n, 4);
    CHECK(gap == doctest::Approx(2.0 * fk_floor(3, 2, 4)).epsilon(1e-12));
  }
  // Large n: the verbatim bound tends to minus the floor (vacuous), the
  // saturating variant to plus the floor.
  CHECK(fk_lower_bound(2, 1, 400.0, 2) == doctest::Approx(-fk_floor(2, 1, 2)));
  CHECK(fk_lower_bound_saturating(2, 1, 400.0, 2) == doctest::Approx(fk_floor(2, 1, 2)));

  CHECK_THROWS_AS(fk_lower_bound(2, 1, 1.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(fk_lower_bound_saturating(2, 1, 1.0, 1), std::invalid_argument);
}

TEST_CASE("threshold cycle counts match frozen arithmetic") {
  CHECK(saturation_cycles(5, 3, 0.1) == doctest::Approx(2.7739760316291204).epsilon(1e-14));
  CHECK(saturation_cycles(7, 1, 0.1) ==
        doctest::Approx(10.321928094887362).epsilon(1e-14));
  CHECK(zeno_onset_cycles(15.0, 5, 3, 2.0) ==
        doctest::Approx(30.79875696970889).epsilon(1e-13));
  CHECK(crossover_cycles(5.0, 1, 3, 2.205) ==
        doctest::Approx(6.6775290725777445).epsilon(1e-13));
  CHECK(crossover_cycles(15.0, 1, 1, 2.705) ==
        doctest::Approx(29.632081757126777).epsilon(1e-13));
  CHECK(threshold_time(5, 3, 0.1, 3, 2.205) ==
        doctest::Approx(2.4067099091271751).epsilon(1e-13));
  CHECK(zeno_lower_bound(2.0, 4.0, 1, 0.5) ==
        doctest::Approx(0.60653065971263342).epsilon(1e-14));

  CHECK_THROWS_AS(zeno_lower_bound(1.0, 1.0, 2, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(zeno_onset_cycles(15.0, 5, 3, 0.0), UndefinedThresholdError);
  CHECK_THROWS_AS(crossover_cycles(15.0, 1, 1, 0.0), UndefinedThresholdError);
  CHECK_THROWS_AS(threshold_time(5, 3, 0.1, 3, 0.0), UndefinedThresholdError);
  CHECK_THROWS_AS(saturation_cycles(5, 3, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(saturation_cycles(5, 3, 1.5), std::invalid_argument);
}

TEST_CASE("general decay coefficient on a single boundary bond") {
  // 1+1 chain: the only bath-flipping term is the bath transverse field, so
  // every system state leaks at rate j_x^2 and all averaging modes coincide.
  const HamiltonianSet hs = prepared(CouplingSpec{});
  const double expected = 2.0 * 1.05 * 1.05;

  const DecayCoefficient haar = decay_coefficient_alpha1(hs, CoefficientAveraging::kHaar);
  CHECK(haar.value == doctest::Approx(expected).epsilon(1e-12));

  CoefficientOptions opts;
  opts.samples = 50;
  const DecayCoefficient mc =
      decay_coefficient_alpha1(hs, CoefficientAveraging::kMonteCarlo, opts);
  CHECK(mc.value == doctest::Approx(expected).epsilon(1e-10));
  CHECK(mc.std_error < 1e-10);  // leak map is proportional to an isometry here

  const DecayCoefficient evolved =
      decay_coefficient_alpha1(hs, CoefficientAveraging::kEvolved);
  CHECK(evolved.value == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("monte carlo averaging converges to the closed form when modes differ") {
  // The three-site xxx term adds a second leak channel alongside the bath
  // field; the two do not combine into one isometry, so the rate genuinely
  // depends on the system state and the estimator has real spread.
  CouplingSpec spec;
  spec.n_s = 2;
  spec.n_b = 1;
  spec.variant = Variant::kXXX;
  const HamiltonianSet hs = prepared(spec);
  const double haar = decay_coefficient_alpha1(hs, CoefficientAveraging::kHaar).value;
  CoefficientOptions opts;
  opts.samples = 4000;
  opts.seed = 3;
  const DecayCoefficient mc =
      decay_coefficient_alpha1(hs, CoefficientAveraging::kMonteCarlo, opts);
  CHECK(mc.std_error > 1e-6);
  CHECK(std::abs(mc.value - haar) < 5.0 * mc.std_error);
}

TEST_CASE("commuting-coupling coefficient is linear in the moment order") {
  // Unit fields: |<1|V|0>|^2 = 1 and the shifted coupling spread is 4, so the
  // coefficient is exactly 2K.
  CouplingSpec spec;
  spec.j_x = 1.0;
  spec.j_z = 0.25;
  const HamiltonianSet hs = prepared(spec);
  for (const int k : {1, 3, 10}) {
    CHECK(decay_coefficient_alpha3(hs, k) == doctest::Approx(2.0 * k).epsilon(1e-12));
  }

  CouplingSpec yy = spec;
  yy.variant = Variant::kYY;
  const HamiltonianSet hs_yy = prepared(yy);
  CHECK_THROWS_AS(decay_coefficient_alpha3(hs_yy, 1), UnsupportedError);

  HamiltonianSet unprepared = build(spec);
  CHECK_THROWS_AS(decay_coefficient_alpha3(unprepared, 1), std::invalid_argument);
  CHECK_THROWS_AS(decay_coefficient_alpha1(unprepared, CoefficientAveraging::kHaar),
                  std::invalid_argument);
}

TEST_CASE("log-log slope recovers exact power laws") {
  const std::vector<double> x = {1.0, 2.0, 4.0, 8.0};
  std::vector<double> y;
  for (const double v : x) y.push_back(3.0 * v * v * v);
  CHECK(log_log_slope(x, y) == doctest::Approx(3.0).epsilon(1e-12));

  y = {2.0, 1.0, 0.5, 0.25};
  CHECK(log_log_slope(x, y) == doctest::Approx(-1.0).epsilon(1e-12));

  // Entries at or below the floor are skipped.
  y = {2.0, 1.0, 0.5, 0.0};
  CHECK(log_log_slope(x, y) == doctest::Approx(-1.0).epsilon(1e-12));

  CHECK(std::isnan(log_log_slope({1.0, 2.0}, {1.0, 0.0})));
  CHECK_THROWS_AS(log_log_slope({1.0}, {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("single-cycle error scaling behaves as designed on a small chain") {
  const HamiltonianSet hs = prepared(CouplingSpec{});
  const StepErrorReport report = step_error_scaling(hs);
  REQUIRE(report.rows.size() == 6);
  for (std::size_t i = 1; i < report.rows.size(); ++i) {
    CHECK(report.rows[i].dt < report.rows[i - 1].dt);
    CHECK(report.rows[i].split_error <= report.rows[i - 1].split_error + 1e-15);
  }
  CHECK(report.split_exponent == doctest::Approx(3.0).epsilon(0.15));
  CHECK(report.leak_exponent == doctest::Approx(2.0).epsilon(0.15));
  for (const auto& row : report.rows) {
    CHECK(row.leak_exact >= 0.0);
    CHECK(row.leak_perturbative >= 0.0);
    CHECK(std::isfinite(row.leak_rel_error));
  }

  CouplingSpec big;
  big.n_s = 5;
  big.n_b = 2;
  CHECK_THROWS_AS(step_error_scaling(prepared(big)), std::invalid_argument);
  CHECK_THROWS_AS(step_error_scaling(hs, {0.1, -0.2}), std::invalid_argument);
}

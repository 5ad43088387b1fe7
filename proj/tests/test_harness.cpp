#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "mintime/harness.hpp"

using namespace mintime;
using Catch::Approx;

namespace {

const std::vector<double> kLadderH{0.04, 0.02, 0.01, 0.005, 0.0025};
const std::vector<double> kEulerErrors{0.2951, 0.1862, 0.1332, 0.1132, 0.0683};
const std::vector<double> kHeunErrors{0.2265, 0.1180, 0.0122, 0.0062, 0.0062};

}  // namespace

TEST_CASE("power-law fits round trip") {
  std::mt19937 rng(53);
  std::uniform_real_distribution<double> cdist(0.1, 30.0);
  std::uniform_real_distribution<double> pdist(0.25, 2.5);
  for (int trial = 0; trial < 50; ++trial) {
    const double c = cdist(rng);
    const double p = pdist(rng);
    std::vector<double> h{0.08, 0.04, 0.02, 0.01};
    std::vector<double> e;
    for (const double hi : h) e.push_back(c * std::pow(hi, p));
    const auto fit = fit_order(h, e);
    CHECK(fit.c == Approx(c).margin(1e-10 * c));
    CHECK(fit.p == Approx(p).margin(1e-10));
    CHECK(fit.residual < 1e-12);
  }

  const auto exact = fit_order({0.1, 0.05, 0.025}, {0.2, 0.1, 0.05});
  CHECK(exact.c == Approx(2.0).margin(1e-12));
  CHECK(exact.p == Approx(1.0).margin(1e-12));
}

TEST_CASE("fits of the published error ladders") {
  const auto euler = fit_order(kLadderH, kEulerErrors);
  CHECK(euler.c == Approx(1.37606).margin(1e-2));
  CHECK(euler.p == Approx(0.4940).margin(1e-2));

  const auto heun_fixed = fit_order(kLadderH, kHeunErrors, 1.0);
  CHECK(heun_fixed.c == Approx(2.62796).margin(2e-2));
  CHECK(heun_fixed.p == 1.0);
}

TEST_CASE("fit_order input validation") {
  CHECK_THROWS_AS(fit_order({0.1}, {0.2}), std::invalid_argument);
  CHECK_THROWS_AS(fit_order({0.1, -0.05}, {0.2, 0.1}), std::invalid_argument);
  CHECK_THROWS_AS(fit_order({0.1, 0.05}, {0.2, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(fit_order({0.1, 0.1}, {0.2, 0.1}), std::invalid_argument);
}

TEST_CASE("linf error is zero against itself") {
  const auto tube = reach_tube(example("ex1-box-origin"), Scheme::EulerRiemann,
                               make_direction_grid(50));
  auto field = min_time_field(tube, SpatialGrid{-1, 1, -1, 1, 0.1}, 1e-9, true,
                              FieldMode::Interpolated);
  for (int i1 = 0; i1 < field.grid.count1(); ++i1)
    for (int i2 = 0; i2 < field.grid.count2(); ++i2)
      field.values[static_cast<std::size_t>(i1) * field.grid.count2() + i2] =
          oracle_eval("ex1-box-origin", field.grid.node(i1, i2)).value;
  const auto report = linf_error(field, "ex1-box-origin");
  CHECK(report.linf == 0.0);
  CHECK(report.compared + report.excluded + report.finite_mismatches ==
        static_cast<int>(field.values.size()));
}

TEST_CASE("expansion violations") {
  const auto grid = make_direction_grid(50);
  {
    const auto tube =
        reach_tube(example("ex1-box-origin"), Scheme::EulerRiemann, grid);
    const double dt = time_grid(tube.problem).dt();
    CHECK(expansion_check(tube, 0.1 * dt).empty());
  }
  {
    const auto tube =
        reach_tube(example("ex-counter"), Scheme::EulerRiemann, grid);
    CHECK(expansion_check(tube, 0.0).size() == tube.sets.size() - 1);
  }
  {
    // Asymmetric control [0,1]: the sets stay nested but touch at the
    // target, so strict expansion fails while inclusion holds.
    const auto tube =
        reach_tube(example("exn5-halfcontrol"), Scheme::EulerRiemann, grid);
    CHECK_FALSE(expansion_check(tube, 0.0).empty());
    for (std::size_t j = 0; j + 1 < tube.sets.size(); ++j)
      CHECK(inclusion_margin(tube.sets[j], tube.sets[j + 1]) >= -1e-9);
  }
  {
    // Monotonicity in the threshold.
    const auto tube =
        reach_tube(example("ex3a"), Scheme::EulerRiemann, grid);
    const auto v1 = expansion_check(tube, 1e-4);
    const auto v2 = expansion_check(tube, 1e-2);
    for (const int j : v1)
      CHECK(std::find(v2.begin(), v2.end(), j) != v2.end());
  }
}

TEST_CASE("halving h quarters the order-2 error on the smooth example") {
  Ladder ladder;
  ladder.rungs = {{0.05, 50}, {0.025, 50}, {0.0125, 50}, {0.00625, 50}};
  const auto study = convergence_study("ex3a", Scheme::HeunTrapezoid, ladder);
  REQUIRE(study.rows.size() == 4);
  for (std::size_t i = 1; i < study.rows.size(); ++i) {
    const double ratio = study.rows[i - 1].error.linf / study.rows[i].error.linf;
    CHECK(ratio >= 2.5);
    CHECK(ratio <= 4.8);
  }
}

TEST_CASE("single-rung studies have no fit") {
  Ladder ladder;
  ladder.rungs = {{0.05, 50}};
  const auto study = convergence_study("ex3a", Scheme::EulerRiemann, ladder);
  CHECK(study.rows.size() == 1);
  CHECK_FALSE(study.fit.has_value());
  CHECK(study_to_csv(study).find("# fit none") != std::string::npos);

  Ladder empty;
  CHECK_THROWS_AS(convergence_study("ex3a", Scheme::EulerRiemann, empty),
                  std::invalid_argument);
}

TEST_CASE("space-discretization-only errors keep their ordering") {
  Ladder one;
  one.rungs = {{0.05, 100}};
  const double e_ball_ball =
      convergence_study("ex1-ball-ball", Scheme::EulerRiemann, one)
          .rows[0].error.linf;
  const double e_box_ball =
      convergence_study("ex1-box-ball", Scheme::EulerRiemann, one)
          .rows[0].error.linf;
  const double e_box_origin =
      convergence_study("ex1-box-origin", Scheme::EulerRiemann, one)
          .rows[0].error.linf;
  CHECK(e_ball_ball > e_box_ball);
  CHECK(e_box_ball > e_box_origin);
  CHECK(e_box_origin <= 1e-9);
}

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "mintime/mtf.hpp"
#include "mintime/systems.hpp"

using namespace mintime;
using Catch::Approx;

namespace {

double norm_inf(Vec2 x) { return std::max(std::abs(x.x), std::abs(x.y)); }

ReachTube truncated(const ReachTube& tube, int keep_outer) {
  ReachTube t = tube;
  t.sets.resize(static_cast<std::size_t>(keep_outer) + 1);
  auto& tg = time_grid(t.problem);
  tg.tf = tg.time(keep_outer);
  tg.outer_steps = keep_outer;
  return t;
}

}  // namespace

TEST_CASE("interpolated field reproduces the box gauge") {
  const auto tube = reach_tube(example("ex1-box-origin"), Scheme::EulerRiemann,
                               make_direction_grid(100));
  const auto s =
      eval_min_time(tube, {0.37, 0.11}, 1e-9, true, FieldMode::Interpolated);
  CHECK(s.value == Approx(0.37).margin(1e-9));

  const SpatialGrid grid{-1.0, 1.0, -1.0, 1.0, 0.1};
  const auto field =
      min_time_field(tube, grid, 1e-9, true, FieldMode::Interpolated);
  for (int i1 = 0; i1 < grid.count1(); ++i1) {
    for (int i2 = 0; i2 < grid.count2(); ++i2) {
      const Vec2 x = grid.node(i1, i2);
      CHECK(field.at(i1, i2) == Approx(norm_inf(x)).margin(1e-9));
    }
  }
}

TEST_CASE("nodes inside the target get value zero") {
  const auto tube = reach_tube(example("ex1-ball-ball"), Scheme::EulerRiemann,
                               make_direction_grid(100));
  CHECK(eval_min_time(tube, {0.0, 0.0}, 1e-9, true, FieldMode::Interpolated)
            .value == 0.0);
  CHECK(eval_min_time(tube, {0.2, 0.1}, 1e-9, true, FieldMode::Interpolated)
            .value == 0.0);
}

TEST_CASE("degenerate tubes: finite on the segment, infinite off it") {
  const auto info = example_info("ex-counter");
  const auto tube =
      reach_tube(info.problem, Scheme::EulerRiemann, make_direction_grid(100));
  const double dt = time_grid(info.problem).dt();
  for (const double s : {0.1, 0.33, 0.5, 0.71}) {
    const auto v = eval_min_time(tube, {s, -s}, info.membership_tol, true,
                                 FieldMode::Interpolated);
    CHECK(v.value == Approx(-std::log(1.0 - s)).margin(dt + 1e-6));
  }
  for (const Vec2 x : {Vec2{0.3, 0.1}, Vec2{-0.5, 0.2}, Vec2{0.2, 0.2}}) {
    CHECK(eval_min_time(tube, x, info.membership_tol, true,
                        FieldMode::Interpolated)
              .value == kInf);
  }
}

TEST_CASE("interpolated vs discrete values") {
  const auto tube = reach_tube(example("ex3a"), Scheme::HeunTrapezoid,
                               make_direction_grid(50));
  const double dt = time_grid(tube.problem).dt();
  const SpatialGrid grid{-1.0, 1.0, -1.0, 1.0, 0.13};
  for (int i1 = 0; i1 < grid.count1(); ++i1) {
    for (int i2 = 0; i2 < grid.count2(); ++i2) {
      const Vec2 x = grid.node(i1, i2);
      const double vi =
          eval_min_time(tube, x, 1e-9, true, FieldMode::Interpolated).value;
      const double vd =
          eval_min_time(tube, x, 1e-9, true, FieldMode::Discrete).value;
      if (!std::isfinite(vd)) {
        CHECK(!std::isfinite(vi));
        continue;
      }
      CHECK(vi <= vd + 1e-12);
      CHECK(vd - vi <= dt + 1e-12);
    }
  }
}

TEST_CASE("truncating the horizon never lowers field values") {
  const auto tube = reach_tube(example("ex1-ball-ball"), Scheme::EulerRiemann,
                               make_direction_grid(50));
  const auto shorter = truncated(tube, 6);
  const SpatialGrid grid{-1.0, 1.0, -1.0, 1.0, 0.2};
  const auto full = min_time_field(tube, grid, 1e-9, true, FieldMode::Interpolated);
  const auto part =
      min_time_field(shorter, grid, 1e-9, true, FieldMode::Interpolated);
  for (std::size_t i = 0; i < full.values.size(); ++i)
    CHECK(part.values[i] >= full.values[i] - 1e-12);
}

TEST_CASE("sublevel sets match set membership") {
  const auto info = example_info("ex1-ball-ball");
  const auto tube =
      reach_tube(info.problem, Scheme::EulerRiemann, make_direction_grid(100));
  const auto& tg = time_grid(info.problem);
  const SpatialGrid grid{-1.0, 1.0, -1.0, 1.0, 0.1};
  const auto field =
      min_time_field(tube, grid, 1e-9, true, FieldMode::Interpolated);
  for (const int j : {2, 5, 9}) {
    const double tj = tg.time(j);
    for (int i1 = 0; i1 < grid.count1(); ++i1) {
      for (int i2 = 0; i2 < grid.count2(); ++i2) {
        const Vec2 x = grid.node(i1, i2);
        const bool in_set = contains(tube.sets[static_cast<std::size_t>(j)], x, 1e-9);
        const bool in_sublevel = field.at(i1, i2) <= tj + 1e-9;
        CHECK(in_set == in_sublevel);
      }
    }
  }
}

TEST_CASE("interpolated mode requires monotone tubes") {
  const auto tube = reach_tube(example("ex1-box-origin"), Scheme::EulerRiemann,
                               make_direction_grid(20));
  CHECK_THROWS_AS(min_time_field(tube, SpatialGrid{}, 1e-9, false,
                                 FieldMode::Interpolated),
                  std::invalid_argument);
  CHECK_NOTHROW(min_time_field(tube, SpatialGrid{-1, 1, -1, 1, 0.5}, 1e-9,
                               false, FieldMode::Discrete));
}

TEST_CASE("double integrator trajectory is bang-bang with one switch") {
  auto problem = example("ex2a-origin");
  auto& tg = time_grid(problem);
  tg.tf = 3.0;
  tg.outer_steps = 120;  // dt = 0.025, h = 0.005
  const auto tube = reach_tube(problem, Scheme::EulerRiemann,
                               make_direction_grid(200));
  const auto traj = reconstruct_trajectory(tube, {0.0, 1.0}, 1e-9);

  REQUIRE(!traj.coefficients.empty());
  // Controls take extreme values only.
  for (const double u : traj.coefficients)
    CHECK(std::abs(std::abs(u) - 1.0) < 1e-12);
  // Exactly one sign change, at forward time 1 + sqrt(2)/2.
  int switches = 0;
  double switch_time = 0.0;
  for (std::size_t i = 1; i < traj.coefficients.size(); ++i) {
    if (traj.coefficients[i] != traj.coefficients[i - 1]) {
      ++switches;
      switch_time = traj.times[i];
    }
  }
  CHECK(switches == 1);
  CHECK(switch_time == Approx(1.0 + 0.5 * std::sqrt(2.0)).margin(0.05));
  CHECK(traj.duration == Approx(1.0 + std::sqrt(2.0)).margin(0.05));
  CHECK(traj.endpoint_gap < 0.05);
  // The replayed start approximates the queried point, the chain ends in
  // the target.
  CHECK(norm(traj.states.front() - Vec2{0.0, 1.0}) == traj.endpoint_gap);
  CHECK(norm(traj.target_point) < 1e-12);
}

TEST_CASE("straight-line motion for the integrator with ball control") {
  LinearControlProblem problem;
  problem.A_rev = TimeMatrix{Mat2::zero(), ScalarFn::One};
  problem.B_rev = TimeMatrix{-Mat2::identity(), ScalarFn::One};
  problem.control = ConvexBody::make_ball({0.0, 0.0}, 1.0);
  problem.target = ConvexBody::make_point({0.0, 0.0});
  problem.time = {0.0, 1.0, 20, 2};
  const auto tube = reach_tube(ControlProblem{problem}, Scheme::EulerRiemann,
                               make_direction_grid(100));
  const auto traj = reconstruct_trajectory(tube, {0.5, 0.0}, 1e-9);
  CHECK(traj.duration == Approx(0.5).margin(0.051));
  for (const Vec2& u : traj.controls) CHECK(norm(u - Vec2{-1.0, 0.0}) < 1e-9);
  CHECK(traj.endpoint_gap < 1e-9);
}

TEST_CASE("trajectory edge cases") {
  const auto tube = reach_tube(example("ex1-ball-ball"), Scheme::EulerRiemann,
                               make_direction_grid(50));
  const auto inside = reconstruct_trajectory(tube, {0.1, 0.0}, 1e-9);
  CHECK(inside.duration == 0.0);
  CHECK(inside.states.empty());
  CHECK_THROWS_AS(reconstruct_trajectory(tube, {5.0, 5.0}, 1e-9),
                  not_reachable_error);
}

TEST_CASE("field CSV uses the inf sentinel") {
  const auto info = example_info("ex-counter");
  const auto tube =
      reach_tube(info.problem, Scheme::EulerRiemann, make_direction_grid(50));
  const SpatialGrid grid{-1.0, 1.0, -1.0, 1.0, 0.5};
  const auto field = min_time_field(tube, grid, info.membership_tol, true,
                                    FieldMode::Interpolated);
  const std::string csv = field_to_csv(field);
  CHECK(csv.rfind("x1,x2,T\n", 0) == 0);
  CHECK(csv.find(",inf\n") != std::string::npos);
  CHECK(field_to_csv(field) == csv);
}

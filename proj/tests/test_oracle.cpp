#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "mintime/oracle.hpp"

using namespace mintime;
using Catch::Approx;

TEST_CASE("closed-form values") {
  CHECK(oracle_eval("ex1-ball-ball", {1.0, 0.0}).value == Approx(0.75));
  CHECK(oracle_eval("ex1-box-origin", {0.37, 0.11}).value == Approx(0.37));
  CHECK(oracle_eval("ex2a-origin", {0.0, 1.0}).value ==
        Approx(1.0 + 2.0 * std::sqrt(0.5)).margin(1e-12));
  CHECK(oracle_eval("ex4-bilinear", {0.5, 0.0}).value ==
        Approx(std::log(2.0)).margin(1e-12));
  CHECK_THROWS_AS(oracle_eval("ex99", {0.0, 0.0}), not_found_error);
}

TEST_CASE("box cover of a ball target") {
  // Along an axis the box faces reach the ball first: T = |x1| - r.
  CHECK(oracle_eval("ex1-box-ball", {1.0, 0.0}).value ==
        Approx(0.75).margin(1e-10));
  // On the diagonal the nearest ball point lies on the diagonal too.
  const double d = 0.8;
  const double expected = d - 0.25 / std::sqrt(2.0);
  CHECK(oracle_eval("ex1-box-ball", {d, d}).value ==
        Approx(expected).margin(1e-10));
  CHECK(oracle_eval("ex1-box-ball", {0.1, 0.2}).value == 0.0);
}

TEST_CASE("zero exactly on the target") {
  CHECK(oracle_eval("ex1-ball-ball", {0.25, 0.0}).value == 0.0);
  CHECK(oracle_eval("ex1-ball-ball", {0.26, 0.0}).value > 0.0);
  CHECK(oracle_eval("ex1-box-origin", {0.0, 0.0}).value == 0.0);
  CHECK(oracle_eval("ex2a-origin", {0.0, 0.0}).value == 0.0);
  CHECK(oracle_eval("ex3a", {0.0, 0.0}).value == 0.0);
  CHECK(oracle_eval("ex4-bilinear", {0.2, 0.1}).value == 0.0);
  CHECK(oracle_eval("ex-counter", {0.0, 0.0}).value == 0.0);
}

TEST_CASE("symmetry under point reflection") {
  std::mt19937 rng(101);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    const Vec2 x{coord(rng), coord(rng)};
    for (const char* id : {"ex1-ball-ball", "ex1-box-origin", "ex1-box-ball",
                           "ex4-bilinear", "ex2a-origin"}) {
      const double a = oracle_eval(id, x).value;
      const double b = oracle_eval(id, -x).value;
      if (std::isfinite(a))
        CHECK(a == Approx(b).margin(1e-10));
      else
        CHECK(!std::isfinite(b));
    }
  }
}

TEST_CASE("discontinuous oracle of the non-normal system") {
  const double tf = 2.0;
  for (const double s : {0.1, 0.5, 0.8}) {
    CHECK(oracle_eval("ex-counter", {s, -s}).value ==
          Approx(-std::log(1.0 - s)).margin(1e-12));
    CHECK(oracle_eval("ex-counter", {-s, s}).value ==
          Approx(-std::log(1.0 - s)).margin(1e-12));
  }
  CHECK(oracle_eval("ex-counter", {0.9, -0.9}).value == kInf);  // beyond tf
  CHECK(std::abs((1.0 - std::exp(-tf)) - 0.8647) < 1e-4);
  CHECK(oracle_eval("ex-counter", {0.2, 0.2}).value == kInf);
  CHECK(oracle_eval("ex-counter", {0.3, 0.1}).value == kInf);
}

TEST_CASE("strip oracle against brute force") {
  const double brute = brute_force_min_time(example("ex3a"), {0.1, -0.5935},
                                            FineParams{0.003125, 200});
  const double formula = oracle_eval("ex3a", {0.1, -0.5935}).value;
  CHECK(std::abs(formula - brute) < 2e-3);
}

TEST_CASE("brute force matches the exact class") {
  const auto problem = example("ex1-box-origin");
  std::mt19937 rng(733);
  std::uniform_real_distribution<double> coord(-0.95, 0.95);
  BruteForceOracle oracle(problem, FineParams{0.025, 400});
  for (int i = 0; i < 40; ++i) {
    const Vec2 x{coord(rng), coord(rng)};
    const double expected = std::max(std::abs(x.x), std::abs(x.y));
    CHECK(oracle.eval(x) == Approx(expected).margin(1e-8));
  }
}

TEST_CASE("double integrator closed form converges to brute force") {
  // Sampled max-gap shrinks with the reference step size, consistent with
  // the 1/2-Hoelder regularity of the minimum time function.
  const auto problem = example("ex2a-origin");
  std::mt19937 rng(947);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  std::vector<Vec2> pts;
  while (pts.size() < 100) {
    const Vec2 x{coord(rng), coord(rng)};
    const double t = oracle_eval("ex2a-origin", x).value;
    if (t > 1e-3 && t <= 1.0) pts.push_back(x);
  }
  double prev = kInf;
  for (const double h : {0.01, 0.0025}) {
    BruteForceOracle oracle(problem, FineParams{h, h < 0.01 ? 1600 : 800});
    double gap = 0.0;
    for (const Vec2& x : pts) {
      const double b = oracle.eval(x);
      if (std::isfinite(b))
        gap = std::max(gap, std::abs(b - oracle_eval("ex2a-origin", x).value));
    }
    CHECK(gap < prev);
    prev = gap;
  }
  CHECK(prev < 0.06);
}

TEST_CASE("bilinear closed form confirmed by the nonlinear propagator") {
  const auto problem = example("ex4-bilinear");
  BruteForceOracle oracle(problem, FineParams{0.00625, 800});
  std::mt19937 rng(271);
  std::uniform_real_distribution<double> coord(-0.65, 0.65);
  double gap = 0.0;
  int used = 0;
  for (int i = 0; i < 200 && used < 60; ++i) {
    const Vec2 x{coord(rng), coord(rng)};
    const double t = oracle_eval("ex4-bilinear", x).value;
    if (t <= 0.0 || t > 0.95) continue;
    ++used;
    gap = std::max(gap, std::abs(oracle.eval(x) - t));
  }
  REQUIRE(used >= 50);
  CHECK(gap < 2e-3);
}

TEST_CASE("fine parameters must divide the horizon") {
  CHECK_THROWS_AS(
      BruteForceOracle(example("ex1-box-origin"), FineParams{0.3, 50}),
      std::invalid_argument);
}

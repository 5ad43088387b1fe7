#pragma once

// Problem definitions: time-reversed linear dynamics, registered nonlinear
// dynamics, control/target specifications, time grids and the example
// registry with structural diagnostics (Kalman rank).

#include <cmath>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <variant>

#include "mintime/geometry.hpp"

namespace mintime {

struct not_found_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Registered scalar time factors; a closed enumeration, no expression
// parsing.
enum class ScalarFn { One, InvTSquared };

inline std::string scalar_fn_name(ScalarFn fn) {
  return fn == ScalarFn::One ? "one" : "inv-t-squared";
}

inline ScalarFn scalar_fn_from_name(const std::string& name) {
  if (name == "one") return ScalarFn::One;
  if (name == "inv-t-squared") return ScalarFn::InvTSquared;
  throw not_found_error("unknown scalar function: " + name);
}

inline double eval_scalar_fn(ScalarFn fn, double t) {
  switch (fn) {
    case ScalarFn::One:
      return 1.0;
    case ScalarFn::InvTSquared:
      if (std::abs(t) < 1e-12)
        throw std::domain_error("1/t^2 is undefined at t = 0");
      return 1.0 / (t * t);
  }
  throw std::logic_error("unreachable scalar fn");
}

// Possibly time-scaled matrix: value(t) = fn(t) * base.
struct TimeMatrix {
  Mat2 base;
  ScalarFn fn{ScalarFn::One};

  Mat2 eval(double t) const {
    if (fn == ScalarFn::One) return base;
    return eval_scalar_fn(fn, t) * base;
  }
  bool constant() const { return fn == ScalarFn::One; }
  constexpr bool operator==(const TimeMatrix&) const = default;
};

// Outer grid t_j = t0 + j * dt with K outer steps, each split into N inner
// steps of size h = dt / N.
struct TimeGrid {
  double t0{0.0};
  double tf{1.0};
  int outer_steps{1};   // K
  int inner_steps{1};   // N

  double dt() const { return (tf - t0) / static_cast<double>(outer_steps); }
  double h() const { return dt() / static_cast<double>(inner_steps); }
  double time(int j) const { return t0 + static_cast<double>(j) * dt(); }
  int total_inner() const { return outer_steps * inner_steps; }
  double inner_time(int i) const {
    return t0 + static_cast<double>(i) * h();
  }

  void validate() const {
    if (!(tf > t0)) throw std::invalid_argument("time grid needs tf > t0");
    if (outer_steps < 1 || inner_steps < 1)
      throw std::invalid_argument("time grid needs K, N >= 1");
  }
};

// Time-reversed linear control problem: dynamics y' = A_rev y + B_rev u
// with u in `control`, started from `target`.
struct LinearControlProblem {
  TimeMatrix A_rev;
  TimeMatrix B_rev;
  ConvexBody control;
  ConvexBody target;
  TimeGrid time;
};

using NonlinearField = std::function<Vec2(Vec2, double)>;

// Time-reversed nonlinear dynamics selected from a closed registry.
struct NonlinearProblem {
  std::string dynamics_id;
  ConvexBody control;  // Interval1D, sampled by the propagator
  ConvexBody target;
  TimeGrid time;
};

using ControlProblem = std::variant<LinearControlProblem, NonlinearProblem>;

inline const TimeGrid& time_grid(const ControlProblem& p) {
  return std::visit([](const auto& q) -> const TimeGrid& { return q.time; }, p);
}
inline TimeGrid& time_grid(ControlProblem& p) {
  return std::visit([](auto& q) -> TimeGrid& { return q.time; }, p);
}
inline const ConvexBody& target_body(const ControlProblem& p) {
  return std::visit([](const auto& q) -> const ConvexBody& { return q.target; },
                    p);
}

// Reversed field f(x, u) for a registered nonlinear dynamics id.
inline NonlinearField nonlinear_dynamics(const std::string& id) {
  if (id == "ex4-bilinear") {
    // Reversal of x1' = -x2 + x1 u, x2' = x1 + x2 u.
    return [](Vec2 x, double u) -> Vec2 {
      return {x.y - x.x * u, -x.x - x.y * u};
    };
  }
  throw not_found_error("unknown nonlinear dynamics: " + id);
}

inline std::pair<Mat2, Mat2> reverse_linear(const Mat2& a, const Mat2& b) {
  return {-a, -b};
}

// Numeric rank of the 2x4 block [B, AB] via the singular values of its
// Gram matrix, threshold 1e-10 relative to the largest singular value.
inline int kalman_rank(const Mat2& a, const Mat2& b) {
  const Mat2 ab = a * b;
  const Mat2 g = b * b.transposed() + ab * ab.transposed();
  const double tr = g.m00 + g.m11;
  const double det = g.m00 * g.m11 - g.m01 * g.m10;
  const double disc = std::sqrt(std::max(0.0, tr * tr - 4.0 * det));
  const double l1 = 0.5 * (tr + disc);
  const double l2 = 0.5 * (tr - disc);
  const double s1 = std::sqrt(std::max(0.0, l1));
  const double s2 = std::sqrt(std::max(0.0, l2));
  if (s1 <= 0.0) return 0;
  return s2 > 1e-10 * s1 ? 2 : 1;
}

// One registry entry: the reversed problem plus the forward pair (A, B)
// for structural diagnostics and per-example defaults. For one-dimensional
// control sets B_fwd embeds the input column as its first column.
struct ExampleInfo {
  ControlProblem problem;
  Mat2 A_fwd;
  Mat2 B_fwd;
  int default_nr{100};
  double membership_tol{1e-9};
  bool monotone{true};
};

namespace detail {

inline ExampleInfo make_linear_example(Mat2 a_fwd, Mat2 b_fwd, ScalarFn b_fn,
                                       ConvexBody control, ConvexBody target,
                                       TimeGrid time, Mat2 b_struct) {
  const auto [a_rev, b_rev] = reverse_linear(a_fwd, b_fwd);
  ExampleInfo info;
  info.problem = LinearControlProblem{
      TimeMatrix{a_rev, ScalarFn::One}, TimeMatrix{b_rev, b_fn},
      std::move(control), std::move(target), time};
  info.A_fwd = a_fwd;
  info.B_fwd = b_struct;
  return info;
}

inline std::map<std::string, ExampleInfo> build_registry() {
  std::map<std::string, ExampleInfo> reg;
  const Mat2 I = Mat2::identity();
  const Mat2 Z = Mat2::zero();
  const ConvexBody origin = ConvexBody::make_point({0.0, 0.0});
  const ConvexBody unit_ball = ConvexBody::make_ball({0.0, 0.0}, 1.0);
  const ConvexBody unit_box = ConvexBody::make_box({-1.0, -1.0}, {1.0, 1.0});
  const ConvexBody small_ball = ConvexBody::make_ball({0.0, 0.0}, 0.25);

  // Simple integrator x' = u; support function constant in time, every
  // scheme reproduces the reachable sets exactly.
  reg["ex1-ball-ball"] = make_linear_example(
      Z, I, ScalarFn::One, unit_ball, small_ball, {0.0, 1.0, 10, 2}, I);
  reg["ex1-box-ball"] = make_linear_example(
      Z, I, ScalarFn::One, unit_box, small_ball, {0.0, 1.0, 10, 2}, I);
  reg["ex1-box-origin"] = make_linear_example(
      Z, I, ScalarFn::One, unit_box, origin, {0.0, 1.0, 10, 2}, I);

  // Double integrator, scalar control injected into the second state.
  const Mat2 a_di{0.0, 1.0, 0.0, 0.0};
  const ConvexBody u_di = ConvexBody::make_interval(-1.0, 1.0, {0.0, 1.0});
  const Mat2 b_di_struct{0.0, 0.0, 1.0, 0.0};
  reg["ex2a-ball"] = make_linear_example(
      a_di, I, ScalarFn::One, u_di, ConvexBody::make_ball({0.0, 0.0}, 0.05),
      {0.0, 1.0, 20, 5}, b_di_struct);
  reg["ex2a-origin"] = make_linear_example(a_di, I, ScalarFn::One, u_di, origin,
                                           {0.0, 1.0, 20, 5}, b_di_struct);

  // Harmonic oscillator.
  const Mat2 a_ho{0.0, 1.0, -1.0, 0.0};
  reg["ex2b-oscillator"] = make_linear_example(
      a_ho, I, ScalarFn::One, u_di, origin, {0.0, 6.0, 40, 5}, b_di_struct);

  // Stable system with parallelogram reachable sets.
  const Mat2 a_stable{0.0, -1.0, 2.0, 3.0};
  const Mat2 b_ex3a{1.0, -1.0, -1.0, 2.0};
  {
    auto info = make_linear_example(a_stable, b_ex3a, ScalarFn::One, unit_box,
                                    origin, {0.0, 1.0, 10, 2}, b_ex3a);
    info.default_nr = 50;
    reg["ex3a"] = std::move(info);
  }
  reg["ex3b"] = make_linear_example(a_stable, I, ScalarFn::One, unit_ball,
                                    origin, {0.0, 1.0, 10, 2}, I);

  // Bilinear dynamics with exponentially growing disk reachable sets.
  {
    ExampleInfo info;
    info.problem = NonlinearProblem{
        "ex4-bilinear", ConvexBody::make_interval(-1.0, 1.0, {1.0, 0.0}),
        small_ball, {0.0, 1.0, 10, 2}};
    info.A_fwd = Mat2{0.0, -1.0, 1.0, 0.0};
    info.B_fwd = I;
    reg["ex4-bilinear"] = std::move(info);
  }

  // Non-normal system: rank [B, AB] = 1, segment-valued reachable sets and
  // a discontinuous minimum time function.
  {
    const ConvexBody u_counter =
        ConvexBody::make_interval(-1.0, 1.0, {1.0, -1.0});
    auto info = make_linear_example(a_stable, I, ScalarFn::One, u_counter,
                                    origin, {0.0, 2.0, 40, 2},
                                    Mat2{1.0, 0.0, -1.0, 0.0});
    info.membership_tol = 1e-6;  // grid nodes sit on the segment only
                                 // up to rounding
    reg["ex-counter"] = std::move(info);
  }

  // Time-dependent input scaling 1/t^2; started at t0 = 1 where the factor
  // is bounded by one.
  {
    const Mat2 a_rot{0.0, -1.0, 1.0, 0.0};
    auto info = make_linear_example(
        a_rot, I, ScalarFn::InvTSquared,
        ConvexBody::make_interval(-1.0, 1.0, {0.0, -1.0}), origin,
        {1.0, 11.0, 50, 4}, Mat2{0.0, 0.0, -1.0, 0.0});
    reg["exn1-invtsq"] = std::move(info);
  }

  // ex3a dynamics on a long horizon; reachable sets converge to a bounded
  // convex set.
  {
    auto info = make_linear_example(a_stable, b_ex3a, ScalarFn::One, unit_box,
                                    origin, {0.0, 100.0, 100, 5}, b_ex3a);
    info.default_nr = 50;
    reg["exn2-longhorizon"] = std::move(info);
  }

  // Rotation with ball control: reachable sets are balls around the target
  // in case a); an offset point target makes their union non-convex.
  const Mat2 a_rot2{0.0, 1.0, -1.0, 0.0};
  reg["exn4a-origin"] = make_linear_example(a_rot2, I, ScalarFn::One, unit_ball,
                                            origin, {0.0, 6.0, 30, 3}, I);
  {
    auto info = make_linear_example(a_rot2, I, ScalarFn::One, unit_ball,
                                    ConvexBody::make_point({2.0, 2.0}),
                                    {0.0, 6.0, 30, 3}, I);
    info.monotone = false;
    reg["exn4b-offset-target"] = std::move(info);
  }

  // Double integrator with asymmetric control sets: U = [0,1] keeps the
  // sets nested but not strictly expanding, U = [1,2] makes them move.
  reg["exn5-halfcontrol"] = make_linear_example(
      a_di, I, ScalarFn::One, ConvexBody::make_interval(0.0, 1.0, {0.0, 1.0}),
      origin, {0.0, 1.0, 10, 2}, b_di_struct);
  {
    auto info = make_linear_example(
        a_di, I, ScalarFn::One, ConvexBody::make_interval(1.0, 2.0, {0.0, 1.0}),
        origin, {0.0, 1.0, 10, 2}, b_di_struct);
    info.monotone = false;
    reg["exn5-shifted"] = std::move(info);
  }

  return reg;
}

}  // namespace detail

inline const std::map<std::string, ExampleInfo>& example_registry() {
  static const std::map<std::string, ExampleInfo> reg = detail::build_registry();
  return reg;
}

inline const ExampleInfo& example_info(const std::string& id) {
  const auto& reg = example_registry();
  const auto it = reg.find(id);
  if (it == reg.end()) throw not_found_error("unknown example: " + id);
  return it->second;
}

inline ControlProblem example(const std::string& id) {
  return example_info(id).problem;
}

}  // namespace mintime

#pragma once

// Reconstruction of the fully discrete minimum time function on a spatial
// grid from a reach tube, and of discrete open-loop time-optimal
// trajectories from the stored control chains.

#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mintime/csv.hpp"
#include "mintime/geometry.hpp"
#include "mintime/parallel.hpp"
#include "mintime/reachset.hpp"

namespace mintime {

struct not_reachable_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Uniform node grid over [x1min,x1max] x [x2min,x2max] with step dx;
// bounds are inclusive.
struct SpatialGrid {
  double x1min{-1.0}, x1max{1.0};
  double x2min{-1.0}, x2max{1.0};
  double dx{0.02};

  int count1() const {
    return static_cast<int>(std::floor((x1max - x1min) / dx + 1e-9)) + 1;
  }
  int count2() const {
    return static_cast<int>(std::floor((x2max - x2min) / dx + 1e-9)) + 1;
  }
  std::size_t node_count() const {
    return static_cast<std::size_t>(count1()) *
           static_cast<std::size_t>(count2());
  }
  Vec2 node(int i1, int i2) const {
    return {x1min + dx * static_cast<double>(i1),
            x2min + dx * static_cast<double>(i2)};
  }
  void validate() const {
    if (!(dx > 0.0)) throw std::invalid_argument("spatial grid needs dx > 0");
    if (!(x1max > x1min) || !(x2max > x2min))
      throw std::invalid_argument("spatial grid bounds are empty");
  }
};

enum class FieldMode { Interpolated, Discrete };

inline std::string field_mode_name(FieldMode m) {
  return m == FieldMode::Interpolated ? "interpolated" : "discrete";
}
inline FieldMode field_mode_from_name(const std::string& s) {
  if (s == "interpolated") return FieldMode::Interpolated;
  if (s == "discrete") return FieldMode::Discrete;
  throw not_found_error("unknown field mode: " + s);
}

// Minimum time values per grid node; +inf marks nodes the tube never
// covers. Stored row-major with the second coordinate fastest.
struct MinTimeField {
  SpatialGrid grid;
  std::vector<double> values;
  FieldMode mode{FieldMode::Interpolated};
  bool monotone{true};

  double at(int i1, int i2) const {
    return values[static_cast<std::size_t>(i1) *
                      static_cast<std::size_t>(grid.count2()) +
                  static_cast<std::size_t>(i2)];
  }
};

struct MinTimeSample {
  double value{kInf};
  int cover_index{-1};   // first covering outer index, -1 if never covered
  double lambda{0.0};    // interpolation parameter within the covering step
};

// Minimum time value of one point against the tube. Monotone tubes scan
// ascending for the first covering set; for non-monotone tubes the first
// hit is the minimum over all levels since outer times increase with j.
inline MinTimeSample eval_min_time(const ReachTube& tube, Vec2 x, double tol,
                                   bool monotone, FieldMode mode) {
  if (mode == FieldMode::Interpolated && !monotone)
    throw std::invalid_argument(
        "interpolated values need a monotone reach tube");
  const auto& tg = time_grid(tube.problem);
  MinTimeSample s;
  if (contains(tube.sets[0], x, tol)) {
    s.value = 0.0;
    s.cover_index = 0;
    return s;
  }
  for (std::size_t j = 1; j < tube.sets.size(); ++j) {
    if (!contains(tube.sets[j], x, tol)) continue;
    s.cover_index = static_cast<int>(j);
    if (mode == FieldMode::Discrete) {
      s.value = tg.time(static_cast<int>(j));
      return s;
    }
    const auto lam = min_lambda_membership(tube.sets[j - 1], tube.sets[j], x, tol);
    s.lambda = lam.value_or(1.0);
    s.value = tg.time(static_cast<int>(j) - 1) + tube.dt * s.lambda;
    return s;
  }
  return s;
}

inline MinTimeField min_time_field(const ReachTube& tube, const SpatialGrid& grid,
                                   double tol, bool monotone, FieldMode mode) {
  grid.validate();
  if (mode == FieldMode::Interpolated && !monotone)
    throw std::invalid_argument(
        "interpolated values need a monotone reach tube");
  MinTimeField field;
  field.grid = grid;
  field.mode = mode;
  field.monotone = monotone;
  const int n1 = grid.count1();
  const int n2 = grid.count2();
  field.values.assign(grid.node_count(), kInf);
  parallel_for(static_cast<std::size_t>(n1), [&](std::size_t i1) {
    for (int i2 = 0; i2 < n2; ++i2) {
      const Vec2 x = grid.node(static_cast<int>(i1), i2);
      field.values[i1 * static_cast<std::size_t>(n2) +
                   static_cast<std::size_t>(i2)] =
          eval_min_time(tube, x, tol, monotone, mode).value;
    }
  });
  return field;
}

inline std::string field_to_csv(const MinTimeField& field) {
  std::ostringstream out;
  out << "x1,x2,T\n";
  const int n1 = field.grid.count1();
  const int n2 = field.grid.count2();
  for (int i1 = 0; i1 < n1; ++i1) {
    for (int i2 = 0; i2 < n2; ++i2) {
      const Vec2 x = field.grid.node(i1, i2);
      out << fmt17(x.x) << ',' << fmt17(x.y) << ',' << fmt17(field.at(i1, i2))
          << '\n';
    }
  }
  return out.str();
}

// Discrete open-loop trajectory, forward in time from the start point
// towards the target. Controls are piecewise constant; coefficients carry
// the scalar control for interval control sets.
struct Trajectory {
  std::vector<double> times;
  std::vector<Vec2> states;
  std::vector<Vec2> controls;
  std::vector<double> coefficients;
  double duration{0.0};
  double endpoint_gap{0.0};  // distance between the replayed endpoint and x
  Vec2 start;
  Vec2 target_point;
};

// Reconstructs the control chain behind the most-active supporting
// direction at the first covering time and replays it. The replayed
// endpoint approximates x; the gap is reported, not hidden.
inline Trajectory reconstruct_trajectory(const ReachTube& tube, Vec2 x,
                                         double tol) {
  if (!tube.traces_available())
    throw std::logic_error("trajectory reconstruction needs control traces");
  const auto& problem = std::get<LinearControlProblem>(tube.problem);
  const auto sample = eval_min_time(tube, x, tol, true, FieldMode::Discrete);
  if (sample.cover_index < 0)
    throw not_reachable_error("point is not covered by the reach tube");

  Trajectory traj;
  traj.start = x;
  if (sample.cover_index == 0) return traj;  // already inside the target

  const int j = sample.cover_index;
  const auto& set = tube.sets[static_cast<std::size_t>(j)];
  int k_star = 0;
  double best = -kInf;
  for (int k = 0; k < tube.grid->unique_count(); ++k) {
    const double activity =
        dot((*tube.grid)[k], x) - set.support[static_cast<std::size_t>(k)];
    if (activity > best) {
      best = activity;
      k_star = k;
    }
  }

  const ControlTrace trace = capture_control_trace(tube, j, k_star);
  const std::vector<Vec2> reversed_states = replay_control_trace(tube, trace);
  const double t_cover = time_grid(tube.problem).time(j);
  const double h = problem.time.h();
  const int n = static_cast<int>(reversed_states.size()) - 1;

  traj.duration = t_cover - problem.time.t0;
  traj.target_point = trace.target_point;
  traj.endpoint_gap = norm(reversed_states.back() - x);
  traj.times.reserve(reversed_states.size());
  traj.states.reserve(reversed_states.size());
  // Reversed node i corresponds to forward time t_cover - tau_i.
  for (int i = n; i >= 0; --i) {
    traj.times.push_back(static_cast<double>(n - i) * h);
    traj.states.push_back(reversed_states[static_cast<std::size_t>(i)]);
    const int node = std::min(i, static_cast<int>(trace.controls.size()) - 1);
    traj.controls.push_back(trace.controls[static_cast<std::size_t>(node)]);
    if (!trace.coefficients.empty())
      traj.coefficients.push_back(
          trace.coefficients[static_cast<std::size_t>(node)]);
  }
  return traj;
}

inline std::string trajectory_to_csv(const Trajectory& traj) {
  std::ostringstream out;
  const bool scalar_control = !traj.coefficients.empty();
  out << (scalar_control ? "t,x1,x2,u1\n" : "t,x1,x2,u1,u2\n");
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    out << fmt17(traj.times[i]) << ',' << fmt17(traj.states[i].x) << ','
        << fmt17(traj.states[i].y) << ',';
    if (scalar_control)
      out << fmt17(traj.coefficients[i]);
    else
      out << fmt17(traj.controls[i].x) << ',' << fmt17(traj.controls[i].y);
    out << '\n';
  }
  return out.str();
}

}  // namespace mintime

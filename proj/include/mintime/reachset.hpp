#pragma once

// Set-valued integrators. Combination methods of order 1 and 2 evaluate the
// support-function integral of the reachable set per direction: the adjoint
// is propagated backwards through the transposed one-step transition maps,
// the control contribution is summed with Riemann or trapezoid weights, and
// the supporting point is accumulated by the forward maps. The direct Euler
// scheme and the nonlinear propagators iterate vertex clouds instead.

#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "mintime/csv.hpp"
#include "mintime/geometry.hpp"
#include "mintime/parallel.hpp"
#include "mintime/systems.hpp"

namespace mintime {

enum class Scheme {
  EulerRiemann,    // order-1 combination: Euler maps + Riemann sum
  HeunTrapezoid,   // order-2 combination: Heun maps + trapezoid rule
  EulerDirect,     // set-valued Euler on vertex clouds
  NonlinearEuler,
  NonlinearHeun,
};

inline bool is_linear_scheme(Scheme s) {
  return s == Scheme::EulerRiemann || s == Scheme::HeunTrapezoid ||
         s == Scheme::EulerDirect;
}
inline bool is_combination_scheme(Scheme s) {
  return s == Scheme::EulerRiemann || s == Scheme::HeunTrapezoid;
}

inline std::string scheme_name(Scheme s) {
  switch (s) {
    case Scheme::EulerRiemann: return "euler-riemann";
    case Scheme::HeunTrapezoid: return "heun-trapezoid";
    case Scheme::EulerDirect: return "euler-direct";
    case Scheme::NonlinearEuler: return "nonlinear-euler";
    case Scheme::NonlinearHeun: return "nonlinear-heun";
  }
  throw std::logic_error("unreachable scheme");
}

inline Scheme scheme_from_name(const std::string& name) {
  if (name == "euler-riemann") return Scheme::EulerRiemann;
  if (name == "heun-trapezoid") return Scheme::HeunTrapezoid;
  if (name == "euler-direct") return Scheme::EulerDirect;
  if (name == "nonlinear-euler") return Scheme::NonlinearEuler;
  if (name == "nonlinear-heun") return Scheme::NonlinearHeun;
  throw not_found_error("unknown scheme: " + name);
}

// One-step transition matrix for y' = A(t) y over [tau, tau + h].
inline Mat2 transition_matrix(const TimeMatrix& a_rev, double tau, double h,
                              int order) {
  if (!(h > 0.0)) throw std::invalid_argument("transition_matrix: h must be > 0");
  const Mat2 I = Mat2::identity();
  const Mat2 a0 = a_rev.eval(tau);
  if (order == 1) return I + h * a0;
  if (order == 2) {
    const Mat2 a1 = a_rev.eval(tau + h);
    return I + 0.5 * h * (a0 + a1 * (I + h * a0));
  }
  throw std::invalid_argument("transition_matrix: order must be 1 or 2");
}

// Open-loop control selection along one direction: quadrature node times,
// the argmax controls, and the supporting point of the target the chain
// starts from. Scalar coefficients are filled for interval control sets.
struct ControlTrace {
  int end_index{0};
  int direction{0};
  std::vector<double> times;
  std::vector<Vec2> controls;
  std::vector<double> coefficients;
  Vec2 target_point;
};

struct ReachTube {
  ControlProblem problem;
  Scheme scheme{Scheme::EulerRiemann};
  std::shared_ptr<const DirectionGrid> grid;
  std::vector<DiscreteConvexSet> sets;  // indices 0..K at times t_j
  double dt{0.0};
  double h{0.0};

  // Per-direction control traces can be recomputed for combination
  // schemes; cloud schemes do not keep the per-direction chains.
  bool traces_available() const { return is_combination_scheme(scheme); }
};

namespace detail {

// Support evaluation that tolerates a zero direction (a singular input
// matrix can annihilate the adjoint): the contribution is zero and the
// control falls back to the tie-breaking midpoint.
inline SupportPoint support_or_zero(const ConvexBody& body, Vec2 dir) {
  if (dir.x == 0.0 && dir.y == 0.0) {
    switch (body.kind) {
      case ConvexBody::Kind::Ball: return {0.0, body.ball.center};
      case ConvexBody::Kind::Box:
        return {0.0, 0.5 * (body.box.lo + body.box.hi)};
      case ConvexBody::Kind::Segment:
        return {0.0, 0.5 * (body.segment.a + body.segment.b)};
      case ConvexBody::Kind::Point: return {0.0, body.point.p};
      case ConvexBody::Kind::Interval1D:
        return {0.0,
                0.5 * (body.interval.lo + body.interval.hi) * body.interval.column};
    }
  }
  return support_oracle(body, dir);
}

// Shared per-tube data: one-step maps and input matrices at inner nodes.
struct StepContext {
  std::vector<Mat2> step;    // M_i over [tau_i, tau_{i+1}], i = 0..n-1
  std::vector<Mat2> input;   // B_rev(tau_i), i = 0..n
  std::vector<double> tau;   // node times, i = 0..n
};

inline StepContext build_context(const LinearControlProblem& p, Scheme scheme,
                                 int total_inner) {
  const int order = scheme == Scheme::HeunTrapezoid ? 2 : 1;
  const double h = p.time.h();
  StepContext ctx;
  ctx.step.resize(static_cast<std::size_t>(total_inner));
  ctx.input.resize(static_cast<std::size_t>(total_inner) + 1);
  ctx.tau.resize(static_cast<std::size_t>(total_inner) + 1);
  for (int i = 0; i <= total_inner; ++i) {
    const double t = p.time.inner_time(i);
    ctx.tau[static_cast<std::size_t>(i)] = t;
    ctx.input[static_cast<std::size_t>(i)] = p.B_rev.eval(t);
    if (i < total_inner)
      ctx.step[static_cast<std::size_t>(i)] =
          transition_matrix(p.A_rev, t, h, order);
  }
  return ctx;
}

inline double quad_weight(Scheme scheme, int i, int n, double h) {
  if (scheme == Scheme::EulerRiemann) return i < n ? h : 0.0;
  return (i == 0 || i == n) ? 0.5 * h : h;  // trapezoid
}

// Support value and supporting point of the discrete reachable set at node
// n in direction l, optionally recording the control chain.
inline SupportPoint reach_support(const LinearControlProblem& p,
                                  const StepContext& ctx, int n, Vec2 l,
                                  Scheme scheme, ControlTrace* trace) {
  std::vector<Vec2> q(static_cast<std::size_t>(n) + 1);
  q[static_cast<std::size_t>(n)] = l;
  for (int i = n - 1; i >= 0; --i)
    q[static_cast<std::size_t>(i)] =
        ctx.step[static_cast<std::size_t>(i)].apply_transposed(
            q[static_cast<std::size_t>(i + 1)]);

  const SupportPoint tgt = support_or_zero(p.target, q[0]);
  double value = tgt.value;
  Vec2 z = tgt.point;
  if (trace) trace->target_point = tgt.point;
  if (n == 0) return {value, z};

  const double h = p.time.h();
  const bool interval = p.control.kind == ConvexBody::Kind::Interval1D;
  const int last_node = scheme == Scheme::EulerRiemann ? n - 1 : n;
  for (int i = 0; i <= n; ++i) {
    Vec2 g{0.0, 0.0};
    if (i <= last_node) {
      const Mat2& b = ctx.input[static_cast<std::size_t>(i)];
      const Vec2 dir = b.apply_transposed(q[static_cast<std::size_t>(i)]);
      const SupportPoint sp = support_or_zero(p.control, dir);
      const double w = quad_weight(scheme, i, n, h);
      value += w * sp.value;
      g = b.apply(sp.point);
      if (trace) {
        trace->times.push_back(ctx.tau[static_cast<std::size_t>(i)]);
        trace->controls.push_back(sp.point);
        if (interval)
          trace->coefficients.push_back(
              support_argmax_coefficient(p.control.interval, dir));
      }
    }
    if (i == 0) {
      z += quad_weight(scheme, 0, n, h) * g;
    } else {
      z = ctx.step[static_cast<std::size_t>(i - 1)].apply(z) +
          quad_weight(scheme, i, n, h) * g;
    }
  }
  return {value, z};
}

inline DiscreteConvexSet set_from_support(
    const LinearControlProblem& p, const StepContext& ctx, int n,
    const std::shared_ptr<const DirectionGrid>& grid, Scheme scheme) {
  const int nr = grid->size();
  std::vector<double> h(static_cast<std::size_t>(nr));
  std::vector<Vec2> y(static_cast<std::size_t>(nr));
  for (int k = 0; k < nr; ++k) {
    const SupportPoint sp = reach_support(p, ctx, n, (*grid)[k], scheme, nullptr);
    h[static_cast<std::size_t>(k)] = sp.value;
    y[static_cast<std::size_t>(k)] = sp.point;
  }
  return make_discrete_set(grid, std::move(h), std::move(y));
}

inline DiscreteConvexSet set_from_cloud(
    const std::vector<Vec2>& cloud,
    const std::shared_ptr<const DirectionGrid>& grid) {
  const int nr = grid->size();
  std::vector<double> h(static_cast<std::size_t>(nr));
  std::vector<Vec2> y(static_cast<std::size_t>(nr));
  for (int k = 0; k < nr; ++k) {
    const Vec2 l = (*grid)[k];
    double best = -kInf;
    Vec2 arg = cloud.front();
    for (const Vec2& c : cloud) {
      const double v = dot(l, c);
      if (v > best) {
        best = v;
        arg = c;
      }
    }
    h[static_cast<std::size_t>(k)] = best;
    y[static_cast<std::size_t>(k)] = arg;
  }
  return make_discrete_set(grid, std::move(h), std::move(y));
}

// Extreme points / face midpoints of the control set exposed by the
// direction grid, used by the cloud-based schemes. Directions are
// transported through the input matrix so that h * B(tau) u attains the
// support of h * B(tau) U in every grid direction.
inline std::vector<Vec2> control_vertex_cloud(
    const ConvexBody& control, const DirectionGrid& grid, const Mat2& input) {
  std::vector<Vec2> pts;
  pts.reserve(static_cast<std::size_t>(grid.size()));
  for (int k = 0; k < grid.size(); ++k)
    pts.push_back(support_or_zero(control, input.apply_transposed(grid[k])).point);
  std::sort(pts.begin(), pts.end(), lex_less);
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

}  // namespace detail

// Discrete reachable set at outer time t_j (which must lie on the outer
// grid) for a combination scheme.
inline DiscreteConvexSet reach_at(const LinearControlProblem& problem, double t,
                                  Scheme scheme,
                                  std::shared_ptr<const DirectionGrid> grid) {
  if (!is_combination_scheme(scheme))
    throw std::invalid_argument("reach_at expects a combination scheme");
  problem.time.validate();
  const double dt = problem.time.dt();
  const int j = static_cast<int>(std::lround((t - problem.time.t0) / dt));
  if (j < 0 || j > problem.time.outer_steps ||
      std::abs(problem.time.time(j) - t) > 1e-9 * std::max(1.0, std::abs(t)))
    throw std::invalid_argument("reach_at: t is not on the outer time grid");
  const auto ctx =
      detail::build_context(problem, scheme, problem.time.total_inner());
  return detail::set_from_support(problem, ctx, j * problem.time.inner_steps,
                                  grid, scheme);
}

struct NonlinearOptions {
  int control_samples{2};   // N_U
  int boundary_samples{0};  // M_B; defaults to the direction count
};

// Boundary point-cloud propagation for a registered nonlinear dynamics:
// every (point, sampled constant control) pair is mapped through the Euler
// or Heun one-step map, then per direction the argmax point is kept.
inline ReachTube reach_nonlinear(const NonlinearProblem& problem, Scheme scheme,
                                 std::shared_ptr<const DirectionGrid> grid,
                                 NonlinearOptions opts = {}) {
  if (scheme != Scheme::NonlinearEuler && scheme != Scheme::NonlinearHeun)
    throw std::invalid_argument("reach_nonlinear expects a nonlinear scheme");
  problem.time.validate();
  const NonlinearField f = nonlinear_dynamics(problem.dynamics_id);
  if (problem.control.kind != ConvexBody::Kind::Interval1D)
    throw std::invalid_argument("nonlinear control set must be an interval");
  const int nu = opts.control_samples;
  if (nu < 2) throw std::invalid_argument("need at least 2 control samples");
  const int mb = opts.boundary_samples > 0 ? opts.boundary_samples : grid->size();
  if (mb < grid->size())
    throw std::invalid_argument("boundary samples must cover the direction grid");

  std::vector<double> etas(static_cast<std::size_t>(nu));
  const double lo = problem.control.interval.lo;
  const double hi = problem.control.interval.hi;
  for (int r = 0; r < nu; ++r)
    etas[static_cast<std::size_t>(r)] =
        lo + (hi - lo) * static_cast<double>(r) / static_cast<double>(nu - 1);

  const double h = problem.time.h();
  const bool heun = scheme == Scheme::NonlinearHeun;
  const auto step_map = [&](Vec2 x, double u) -> Vec2 {
    const Vec2 k1 = f(x, u);
    if (!heun) return x + h * k1;
    const Vec2 k2 = f(x + h * k1, u);
    return x + 0.5 * h * (k1 + k2);
  };

  // Initial cloud: boundary samples of the target.
  std::vector<Vec2> cloud;
  {
    const auto boundary_grid = make_direction_grid(mb);
    cloud.reserve(static_cast<std::size_t>(mb));
    for (int k = 0; k < mb; ++k)
      cloud.push_back(support_oracle(problem.target, (*boundary_grid)[k]).point);
  }

  ReachTube tube;
  tube.problem = problem;
  tube.scheme = scheme;
  tube.grid = grid;
  tube.dt = problem.time.dt();
  tube.h = h;
  tube.sets.reserve(static_cast<std::size_t>(problem.time.outer_steps) + 1);
  tube.sets.push_back(detail::set_from_cloud(cloud, grid));

  const int nr = grid->size();
  std::vector<Vec2> candidates;
  std::vector<Vec2> selected(static_cast<std::size_t>(nr));
  for (int j = 1; j <= problem.time.outer_steps; ++j) {
    for (int s = 0; s < problem.time.inner_steps; ++s) {
      candidates.clear();
      candidates.reserve(cloud.size() * etas.size());
      for (const Vec2& x : cloud)
        for (const double u : etas) candidates.push_back(step_map(x, u));
      // Convexification: per direction keep the supporting candidate.
      parallel_for(static_cast<std::size_t>(nr), [&](std::size_t k) {
        const Vec2 l = (*grid)[static_cast<int>(k)];
        double best = -kInf;
        Vec2 arg = candidates.front();
        for (const Vec2& c : candidates) {
          const double v = dot(l, c);
          if (v > best) {
            best = v;
            arg = c;
          }
        }
        selected[k] = arg;
      });
      cloud.assign(selected.begin(), selected.end());
    }
    tube.sets.push_back(detail::set_from_cloud(cloud, grid));
  }
  return tube;
}

namespace detail {

inline ReachTube reach_tube_combination(
    const LinearControlProblem& problem, Scheme scheme,
    std::shared_ptr<const DirectionGrid> grid) {
  problem.time.validate();
  ReachTube tube;
  tube.problem = problem;
  tube.scheme = scheme;
  tube.grid = grid;
  tube.dt = problem.time.dt();
  tube.h = problem.time.h();
  const int K = problem.time.outer_steps;
  const auto ctx = build_context(problem, scheme, problem.time.total_inner());
  tube.sets.resize(static_cast<std::size_t>(K) + 1);
  parallel_for(static_cast<std::size_t>(K) + 1, [&](std::size_t j) {
    tube.sets[j] = set_from_support(
        problem, ctx, static_cast<int>(j) * problem.time.inner_steps, grid,
        scheme);
  });
  return tube;
}

inline ReachTube reach_tube_direct(const LinearControlProblem& problem,
                                   std::shared_ptr<const DirectionGrid> grid) {
  problem.time.validate();
  ReachTube tube;
  tube.problem = problem;
  tube.scheme = Scheme::EulerDirect;
  tube.grid = grid;
  tube.dt = problem.time.dt();
  tube.h = problem.time.h();

  const double h = problem.time.h();
  tube.sets.reserve(static_cast<std::size_t>(problem.time.outer_steps) + 1);
  tube.sets.push_back(discretize_body(problem.target, grid));
  std::vector<Vec2> cloud = tube.sets.front().hull;

  std::vector<Vec2> next;
  int node = 0;
  for (int j = 1; j <= problem.time.outer_steps; ++j) {
    for (int s = 0; s < problem.time.inner_steps; ++s, ++node) {
      const double tau = problem.time.inner_time(node);
      const Mat2 m = transition_matrix(problem.A_rev, tau, h, 1);
      const Mat2 b = problem.B_rev.eval(tau);
      const auto ctrl_pts = control_vertex_cloud(problem.control, *grid, b);
      next.clear();
      next.reserve(cloud.size() * ctrl_pts.size());
      for (const Vec2& v : cloud) {
        const Vec2 mv = m.apply(v);
        for (const Vec2& u : ctrl_pts) next.push_back(mv + h * b.apply(u));
      }
      cloud = hull2d(next);
    }
    tube.sets.push_back(set_from_cloud(cloud, grid));
  }
  return tube;
}

}  // namespace detail

inline ReachTube reach_tube(const ControlProblem& problem, Scheme scheme,
                            std::shared_ptr<const DirectionGrid> grid,
                            NonlinearOptions opts = {}) {
  if (const auto* lin = std::get_if<LinearControlProblem>(&problem)) {
    if (is_combination_scheme(scheme))
      return detail::reach_tube_combination(*lin, scheme, std::move(grid));
    if (scheme == Scheme::EulerDirect)
      return detail::reach_tube_direct(*lin, std::move(grid));
    throw std::invalid_argument("nonlinear scheme on a linear problem");
  }
  const auto& nl = std::get<NonlinearProblem>(problem);
  if (!is_linear_scheme(scheme))
    return reach_nonlinear(nl, scheme, std::move(grid), opts);
  throw std::invalid_argument("linear scheme on a nonlinear problem");
}

// Smallest j >= 1 whose support-distance increment falls below the
// threshold; nullopt when the tube keeps growing.
inline std::optional<int> stopping_index(const ReachTube& tube,
                                         double threshold) {
  for (std::size_t j = 1; j < tube.sets.size(); ++j) {
    if (support_distance(tube.sets[j - 1], tube.sets[j]) < threshold)
      return static_cast<int>(j);
  }
  return std::nullopt;
}

// Recomputes the control chain behind the supporting point of direction k
// at outer index j. Only combination schemes keep per-direction chains.
inline ControlTrace capture_control_trace(const ReachTube& tube, int j, int k) {
  if (!tube.traces_available())
    throw std::logic_error("control traces unavailable for this scheme");
  const auto& problem = std::get<LinearControlProblem>(tube.problem);
  if (j < 0 || j >= static_cast<int>(tube.sets.size()))
    throw std::invalid_argument("trace index out of range");
  ControlTrace trace;
  trace.end_index = j;
  trace.direction = k;
  const auto ctx =
      detail::build_context(problem, tube.scheme, problem.time.total_inner());
  detail::reach_support(problem, ctx, j * problem.time.inner_steps,
                        (*tube.grid)[k], tube.scheme, &trace);
  return trace;
}

// Integrates the reversed system from the trace's target point with its
// stored controls; the final state reproduces the supporting point the
// trace was captured from.
inline std::vector<Vec2> replay_control_trace(const ReachTube& tube,
                                              const ControlTrace& trace) {
  const auto& problem = std::get<LinearControlProblem>(tube.problem);
  const int n = trace.end_index * problem.time.inner_steps;
  const auto ctx =
      detail::build_context(problem, tube.scheme, problem.time.total_inner());
  const double h = problem.time.h();
  std::vector<Vec2> states;
  states.reserve(static_cast<std::size_t>(n) + 1);
  const auto input_at = [&](int i) -> Vec2 {
    if (i >= static_cast<int>(trace.controls.size())) return {0.0, 0.0};
    return ctx.input[static_cast<std::size_t>(i)].apply(
        trace.controls[static_cast<std::size_t>(i)]);
  };
  Vec2 z = trace.target_point;
  if (n > 0) z += detail::quad_weight(tube.scheme, 0, n, h) * input_at(0);
  states.push_back(z);
  for (int i = 0; i < n; ++i) {
    z = ctx.step[static_cast<std::size_t>(i)].apply(z) +
        detail::quad_weight(tube.scheme, i + 1, n, h) * input_at(i + 1);
    states.push_back(z);
  }
  return states;
}

// One row per (outer time, direction).
inline std::string tube_to_csv(const ReachTube& tube) {
  std::ostringstream out;
  out << "j,t_j,k,l1,l2,h_k,y1,y2\n";
  const auto& tg = time_grid(tube.problem);
  for (std::size_t j = 0; j < tube.sets.size(); ++j) {
    const auto& s = tube.sets[j];
    for (int k = 0; k < tube.grid->size(); ++k) {
      const Vec2 l = (*tube.grid)[k];
      out << j << ',' << fmt17(tg.time(static_cast<int>(j))) << ',' << (k + 1)
          << ',' << fmt17(l.x) << ',' << fmt17(l.y) << ','
          << fmt17(s.support[static_cast<std::size_t>(k)]) << ','
          << fmt17(s.points[static_cast<std::size_t>(k)].x) << ','
          << fmt17(s.points[static_cast<std::size_t>(k)].y) << '\n';
    }
  }
  return out.str();
}

}  // namespace mintime

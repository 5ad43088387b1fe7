#pragma once

// Ground-truth minimum time values per registry example: closed forms where
// control theory supplies them, safeguarded root-finding for the strip
// geometries, and an independent brute-force oracle (a much finer reach
// tube) for the remaining examples and for validating every closed form.

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>

#include "mintime/mtf.hpp"
#include "mintime/reachset.hpp"
#include "mintime/systems.hpp"

namespace mintime {

struct OracleValue {
  enum class Provenance { ClosedForm, RootFind, BruteForce };
  double value{kInf};
  Provenance provenance{Provenance::ClosedForm};
};

namespace detail {

inline double norm_inf(Vec2 x) { return std::max(std::abs(x.x), std::abs(x.y)); }

// min t with x in B_r(0) + t [-1,1]^2, i.e. the first t at which the box
// around x of half-width t touches the ball.
inline double box_ball_cover_time(Vec2 x, double r) {
  const auto dist_origin_to_box = [&](double t) {
    const double dx = std::max(0.0, std::abs(x.x) - t);
    const double dy = std::max(0.0, std::abs(x.y) - t);
    return std::hypot(dx, dy);
  };
  if (dist_origin_to_box(0.0) <= r) return 0.0;
  double lo = 0.0, hi = norm_inf(x);
  for (int it = 0; it < 100 && hi - lo > 1e-13; ++it) {
    const double mid = 0.5 * (lo + hi);
    (dist_origin_to_box(mid) <= r ? hi : lo) = mid;
  }
  return hi;
}

// Root of the increasing function reach(t) = target on [0, t_max] by
// bisection to 1e-12; nullopt when the level is never attained.
template <typename F>
inline std::optional<double> increasing_root(F&& reach, double target,
                                             double t_max) {
  if (target < 0.0) return std::nullopt;
  if (target == 0.0) return 0.0;
  if (reach(t_max) < target) return std::nullopt;
  double lo = 0.0, hi = t_max;
  for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
    const double mid = 0.5 * (lo + hi);
    (reach(mid) >= target ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

// The reachable sets are intersections of two strips whose half-widths
// grow like 1 - e^{-t} and (1 - e^{-2t})/2; the minimum time is the larger
// of the two per-strip cover times.
inline double strip_min_time_ex3a(Vec2 x) {
  const double c1 = std::abs(x.y + 2.0 * x.x);
  const double c2 = std::abs(x.x + x.y);
  const double t_max = 50.0;
  const auto r1 = increasing_root([](double t) { return 1.0 - std::exp(-t); },
                                  c1, t_max);
  const auto r2 = increasing_root(
      [](double t) { return 0.5 * (1.0 - std::exp(-2.0 * t)); }, c2, t_max);
  if (!r1 && !r2) return kInf;
  double best = -kInf;
  if (r1) best = std::max(best, *r1);
  if (r2) best = std::max(best, *r2);
  return best;
}

inline double double_integrator_min_time(Vec2 x) {
  const double sigma = x.x + 0.5 * x.y * std::abs(x.y);
  if (sigma > 0.0) return x.y + 2.0 * std::sqrt(x.x + 0.5 * x.y * x.y);
  if (sigma < 0.0) return -x.y + 2.0 * std::sqrt(-x.x + 0.5 * x.y * x.y);
  return std::abs(x.y);
}

}  // namespace detail

struct FineParams {
  double h{0.0};
  int n_r{0};
};

// Interpolated minimum time from a single fine reach tube; the independent
// reference for examples without closed forms and the validation arbiter
// for every closed form.
class BruteForceOracle {
 public:
  BruteForceOracle(ControlProblem problem, FineParams fine, double tol = 1e-9,
                   bool monotone = true)
      : tol_(tol), monotone_(monotone) {
    TimeGrid& tg = time_grid(problem);
    const double span = tg.tf - tg.t0;
    const int total = static_cast<int>(std::lround(span / fine.h));
    if (total < 1 || std::abs(span - fine.h * total) > 1e-9 * span)
      throw std::invalid_argument("fine step must divide the horizon");
    if (total % tg.inner_steps != 0)
      throw std::invalid_argument("fine step incompatible with inner count");
    tg.outer_steps = total / tg.inner_steps;
    const Scheme scheme = std::holds_alternative<LinearControlProblem>(problem)
                              ? Scheme::HeunTrapezoid
                              : Scheme::NonlinearHeun;
    tube_ = reach_tube(problem, scheme, make_direction_grid(fine.n_r));
  }

  double eval(Vec2 x) const {
    return eval_min_time(tube_, x, tol_, monotone_, FieldMode::Interpolated)
        .value;
  }
  const ReachTube& tube() const { return tube_; }

 private:
  ReachTube tube_;
  double tol_;
  bool monotone_;
};

inline double brute_force_min_time(const ControlProblem& problem, Vec2 x,
                                   FineParams fine) {
  return BruteForceOracle(problem, fine).eval(x);
}

namespace detail {

inline FineParams brute_defaults(const std::string& id) {
  if (id == "ex2a-ball") return {0.000625, 3200};
  if (id == "ex2b-oscillator") return {0.0075, 400};
  if (id == "ex3b") return {0.0125, 400};
  throw not_found_error("no brute-force defaults for: " + id);
}

// Point evaluations against a fine tube are expensive; studies revisit the
// same grid nodes per rung, so values are memoized per example.
class MemoizedBruteOracle {
 public:
  MemoizedBruteOracle(const ControlProblem& problem, FineParams fine,
                      double tol, bool monotone)
      : base_(problem, fine, tol, monotone) {}

  double eval(Vec2 x) const {
    const std::pair<double, double> key{x.x, x.y};
    {
      std::lock_guard<std::mutex> lock(mutex_);
      const auto it = memo_.find(key);
      if (it != memo_.end()) return it->second;
    }
    const double value = base_.eval(x);
    std::lock_guard<std::mutex> lock(mutex_);
    memo_.emplace(key, value);
    return value;
  }
  const BruteForceOracle& base() const { return base_; }

 private:
  BruteForceOracle base_;
  mutable std::map<std::pair<double, double>, double> memo_;
  mutable std::mutex mutex_;
};

inline const MemoizedBruteOracle& cached_brute_oracle(const std::string& id) {
  static std::map<std::string, std::shared_ptr<MemoizedBruteOracle>> cache;
  static std::mutex mutex;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(id);
  if (it == cache.end()) {
    const auto& info = example_info(id);
    it = cache
             .emplace(id, std::make_shared<MemoizedBruteOracle>(
                              info.problem, brute_defaults(id),
                              info.membership_tol, info.monotone))
             .first;
  }
  return *it->second;
}

}  // namespace detail

// Fills the memoized reference values for a brute-force example over a set
// of points; deterministic and safe to run concurrently.
inline void prefill_brute_oracle(const std::string& id,
                                 const std::vector<Vec2>& points);

inline OracleValue oracle_eval(const std::string& id, Vec2 x) {
  using P = OracleValue::Provenance;
  if (id == "ex1-ball-ball")
    return {std::max(0.0, norm(x) - 0.25), P::ClosedForm};
  if (id == "ex1-box-origin") return {detail::norm_inf(x), P::ClosedForm};
  if (id == "ex1-box-ball")
    return {detail::box_ball_cover_time(x, 0.25), P::RootFind};
  if (id == "ex2a-origin")
    return {detail::double_integrator_min_time(x), P::ClosedForm};
  if (id == "ex3a" || id == "exn2-longhorizon")
    return {detail::strip_min_time_ex3a(x), P::RootFind};
  if (id == "ex4-bilinear")
    return {std::max(0.0, std::log(norm(x) / 0.25)), P::ClosedForm};
  if (id == "ex-counter") {
    // Finite only on the segment {s * (1, -1)} reachable within the horizon.
    const auto& info = example_info(id);
    const double tf = time_grid(info.problem).tf;
    if (std::abs(x.x + x.y) > 1e-12 * std::max(1.0, norm(x)))
      return {kInf, P::ClosedForm};
    const double s = std::abs(x.x);
    if (s > 1.0 - std::exp(-tf)) return {kInf, P::ClosedForm};
    return {s == 0.0 ? 0.0 : -std::log(1.0 - s), P::ClosedForm};
  }
  if (id == "ex2a-ball" || id == "ex2b-oscillator" || id == "ex3b")
    return {detail::cached_brute_oracle(id).eval(x), P::BruteForce};
  throw not_found_error("no oracle for example: " + id);
}

inline void prefill_brute_oracle(const std::string& id,
                                 const std::vector<Vec2>& points) {
  const auto& oracle = detail::cached_brute_oracle(id);
  parallel_for(points.size(), [&](std::size_t i) { oracle.eval(points[i]); });
}

}  // namespace mintime

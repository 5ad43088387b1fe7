#pragma once

// JSON serialization of control problems. Matrices are stored as 2x2 row
// arrays; "reversed" says whether A and B are already the time-reversed
// pair. The scalar time factor applies to B.

#include <string>
#include <variant>

#include <json.hpp>

#include "mintime/systems.hpp"

namespace mintime {

using nlohmann::json;

inline json to_json(Vec2 v) { return json::array({v.x, v.y}); }

inline Vec2 vec2_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2)
    throw std::invalid_argument("expected a 2-vector");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline json to_json(const Mat2& m) {
  return json::array({json::array({m.m00, m.m01}), json::array({m.m10, m.m11})});
}

inline Mat2 mat2_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2 || j[0].size() != 2 || j[1].size() != 2)
    throw std::invalid_argument("expected a 2x2 matrix");
  return {j[0][0].get<double>(), j[0][1].get<double>(), j[1][0].get<double>(),
          j[1][1].get<double>()};
}

inline json to_json(const ConvexBody& body) {
  switch (body.kind) {
    case ConvexBody::Kind::Ball:
      return {{"type", "ball"},
              {"center", to_json(body.ball.center)},
              {"radius", body.ball.radius}};
    case ConvexBody::Kind::Box:
      return {{"type", "box"},
              {"lo", to_json(body.box.lo)},
              {"hi", to_json(body.box.hi)}};
    case ConvexBody::Kind::Segment:
      return {{"type", "segment"},
              {"a", to_json(body.segment.a)},
              {"b", to_json(body.segment.b)}};
    case ConvexBody::Kind::Point:
      return {{"type", "point"}, {"p", to_json(body.point.p)}};
    case ConvexBody::Kind::Interval1D:
      return {{"type", "interval"},
              {"lo", body.interval.lo},
              {"hi", body.interval.hi},
              {"column", to_json(body.interval.column)}};
  }
  throw std::logic_error("unreachable body kind");
}

inline ConvexBody body_from_json(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "ball")
    return ConvexBody::make_ball(vec2_from_json(j.at("center")),
                                 j.at("radius").get<double>());
  if (type == "box")
    return ConvexBody::make_box(vec2_from_json(j.at("lo")),
                                vec2_from_json(j.at("hi")));
  if (type == "segment")
    return ConvexBody::make_segment(vec2_from_json(j.at("a")),
                                    vec2_from_json(j.at("b")));
  if (type == "point") return ConvexBody::make_point(vec2_from_json(j.at("p")));
  if (type == "interval")
    return ConvexBody::make_interval(j.at("lo").get<double>(),
                                     j.at("hi").get<double>(),
                                     vec2_from_json(j.at("column")));
  throw std::invalid_argument("unknown body type: " + type);
}

inline json to_json(const TimeGrid& tg) {
  return {{"t0", tg.t0}, {"tf", tg.tf}, {"K", tg.outer_steps}, {"N", tg.inner_steps}};
}

inline TimeGrid timegrid_from_json(const json& j) {
  TimeGrid tg{j.at("t0").get<double>(), j.at("tf").get<double>(),
              j.at("K").get<int>(), j.at("N").get<int>()};
  tg.validate();
  return tg;
}

inline json to_json(const ControlProblem& problem) {
  if (const auto* lin = std::get_if<LinearControlProblem>(&problem)) {
    return {{"A", to_json(lin->A_rev.base)},
            {"B", to_json(lin->B_rev.base)},
            {"reversed", true},
            {"control", to_json(lin->control)},
            {"target", to_json(lin->target)},
            {"time", to_json(lin->time)},
            {"scalar_fn", scalar_fn_name(lin->B_rev.fn)}};
  }
  const auto& nl = std::get<NonlinearProblem>(problem);
  return {{"dynamics", nl.dynamics_id},
          {"control", to_json(nl.control)},
          {"target", to_json(nl.target)},
          {"time", to_json(nl.time)}};
}

inline ControlProblem problem_from_json(const json& j) {
  if (j.contains("dynamics")) {
    NonlinearProblem nl;
    nl.dynamics_id = j.at("dynamics").get<std::string>();
    nonlinear_dynamics(nl.dynamics_id);  // validate against the registry
    nl.control = body_from_json(j.at("control"));
    nl.target = body_from_json(j.at("target"));
    nl.time = timegrid_from_json(j.at("time"));
    return nl;
  }
  Mat2 a = mat2_from_json(j.at("A"));
  Mat2 b = mat2_from_json(j.at("B"));
  if (!j.value("reversed", false)) std::tie(a, b) = reverse_linear(a, b);
  LinearControlProblem lin;
  lin.A_rev = TimeMatrix{a, ScalarFn::One};
  lin.B_rev = TimeMatrix{
      b, scalar_fn_from_name(j.value("scalar_fn", std::string("one")))};
  lin.control = body_from_json(j.at("control"));
  lin.target = body_from_json(j.at("target"));
  lin.time = timegrid_from_json(j.at("time"));
  return lin;
}

inline bool body_equal(const ConvexBody& a, const ConvexBody& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case ConvexBody::Kind::Ball:
      return a.ball.center == b.ball.center && a.ball.radius == b.ball.radius;
    case ConvexBody::Kind::Box:
      return a.box.lo == b.box.lo && a.box.hi == b.box.hi;
    case ConvexBody::Kind::Segment:
      return a.segment.a == b.segment.a && a.segment.b == b.segment.b;
    case ConvexBody::Kind::Point:
      return a.point.p == b.point.p;
    case ConvexBody::Kind::Interval1D:
      return a.interval.lo == b.interval.lo && a.interval.hi == b.interval.hi &&
             a.interval.column == b.interval.column;
  }
  return false;
}

inline bool problem_equal(const ControlProblem& a, const ControlProblem& b) {
  if (a.index() != b.index()) return false;
  const auto time_eq = [](const TimeGrid& x, const TimeGrid& y) {
    return x.t0 == y.t0 && x.tf == y.tf && x.outer_steps == y.outer_steps &&
           x.inner_steps == y.inner_steps;
  };
  if (const auto* la = std::get_if<LinearControlProblem>(&a)) {
    const auto& lb = std::get<LinearControlProblem>(b);
    return la->A_rev == lb.A_rev && la->B_rev == lb.B_rev &&
           body_equal(la->control, lb.control) &&
           body_equal(la->target, lb.target) && time_eq(la->time, lb.time);
  }
  const auto& na = std::get<NonlinearProblem>(a);
  const auto& nb = std::get<NonlinearProblem>(b);
  return na.dynamics_id == nb.dynamics_id &&
         body_equal(na.control, nb.control) && body_equal(na.target, nb.target) &&
         time_eq(na.time, nb.time);
}

}  // namespace mintime

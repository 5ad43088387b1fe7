#pragma once

// Planar convex-set primitives: direction grids, support oracles for the
// body types used as control and target sets, convex hulls, membership
// tests and set-distance proxies for discretized convex sets.
//
// A DiscreteConvexSet is the inner approximation of a convex set sampled
// on a direction grid: per-direction support values h_k, supporting
// points y_k, and the convex hull of the supporting points.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

namespace mintime {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Vec2 {
  double x{0.0};
  double y{0.0};

  constexpr Vec2() = default;
  constexpr Vec2(double x_, double y_) : x(x_), y(y_) {}

  constexpr Vec2 operator+(Vec2 r) const { return {x + r.x, y + r.y}; }
  constexpr Vec2 operator-(Vec2 r) const { return {x - r.x, y - r.y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr Vec2 operator-() const { return {-x, -y}; }
  constexpr Vec2& operator+=(Vec2 r) {
    x += r.x;
    y += r.y;
    return *this;
  }
  constexpr bool operator==(const Vec2&) const = default;
};

inline constexpr Vec2 operator*(double s, Vec2 v) { return v * s; }
inline constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline constexpr double norm2(Vec2 a) { return dot(a, a); }
inline constexpr Vec2 lerp(Vec2 a, Vec2 b, double t) {
  return {a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
}

// 2x2 real matrix, row-major.
struct Mat2 {
  double m00{0.0}, m01{0.0};
  double m10{0.0}, m11{0.0};

  static constexpr Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
  static constexpr Mat2 zero() { return {}; }

  constexpr Vec2 apply(Vec2 v) const {
    return {m00 * v.x + m01 * v.y, m10 * v.x + m11 * v.y};
  }
  // transpose(M) * v, used by adjoint propagation.
  constexpr Vec2 apply_transposed(Vec2 v) const {
    return {m00 * v.x + m10 * v.y, m01 * v.x + m11 * v.y};
  }
  constexpr Mat2 transposed() const { return {m00, m10, m01, m11}; }
  constexpr Mat2 operator*(const Mat2& r) const {
    return {m00 * r.m00 + m01 * r.m10, m00 * r.m01 + m01 * r.m11,
            m10 * r.m00 + m11 * r.m10, m10 * r.m01 + m11 * r.m11};
  }
  constexpr Mat2 operator+(const Mat2& r) const {
    return {m00 + r.m00, m01 + r.m01, m10 + r.m10, m11 + r.m11};
  }
  constexpr Mat2 operator*(double s) const {
    return {m00 * s, m01 * s, m10 * s, m11 * s};
  }
  constexpr Mat2 operator-() const { return {-m00, -m01, -m10, -m11}; }
  constexpr bool operator==(const Mat2&) const = default;
};

inline constexpr Mat2 operator*(double s, const Mat2& m) { return m * s; }

// Normed directions l^k at angles 2*pi*(k-1)/(N-1), k = 1..N. The closing
// direction duplicates the first one and is kept on purpose; consumers
// that need the unique range use `unique_count()`.
struct DirectionGrid {
  std::vector<Vec2> dirs;

  int size() const { return static_cast<int>(dirs.size()); }
  int unique_count() const { return size() - 1; }
  Vec2 operator[](int k) const { return dirs[static_cast<std::size_t>(k)]; }
};

inline std::shared_ptr<const DirectionGrid> make_direction_grid(int n_r) {
  if (n_r < 3) throw std::invalid_argument("direction grid needs N_R >= 3");
  auto grid = std::make_shared<DirectionGrid>();
  grid->dirs.resize(static_cast<std::size_t>(n_r));
  const double step = 2.0 * M_PI / static_cast<double>(n_r - 1);
  for (int k = 0; k < n_r - 1; ++k) {
    const double a = step * static_cast<double>(k);
    grid->dirs[static_cast<std::size_t>(k)] = {std::cos(a), std::sin(a)};
  }
  grid->dirs.back() = grid->dirs.front();
  return grid;
}

inline bool same_grid(const DirectionGrid& a, const DirectionGrid& b) {
  if (&a == &b) return true;
  if (a.size() != b.size()) return false;
  for (int k = 0; k < a.size(); ++k)
    if (!(a[k] == b[k])) return false;
  return true;
}

// Convex body specification. Interval1D models a one-dimensional control
// set {u * column : u in [lo, hi]} embedded in the plane.
struct BallBody {
  Vec2 center;
  double radius{0.0};
};
struct BoxBody {
  Vec2 lo, hi;
};
struct SegmentBody {
  Vec2 a, b;
};
struct PointBody {
  Vec2 p;
};
struct Interval1DBody {
  double lo{0.0}, hi{0.0};
  Vec2 column;
};

struct ConvexBody {
  enum class Kind { Ball, Box, Segment, Point, Interval1D };
  Kind kind{Kind::Point};
  BallBody ball{};
  BoxBody box{};
  SegmentBody segment{};
  PointBody point{};
  Interval1DBody interval{};

  static ConvexBody make_ball(Vec2 c, double r) {
    if (r < 0.0) throw std::invalid_argument("ball radius must be >= 0");
    ConvexBody b;
    b.kind = Kind::Ball;
    b.ball = {c, r};
    return b;
  }
  static ConvexBody make_box(Vec2 lo, Vec2 hi) {
    if (lo.x > hi.x || lo.y > hi.y)
      throw std::invalid_argument("box needs lo <= hi componentwise");
    ConvexBody b;
    b.kind = Kind::Box;
    b.box = {lo, hi};
    return b;
  }
  static ConvexBody make_segment(Vec2 a, Vec2 pb) {
    ConvexBody b;
    b.kind = Kind::Segment;
    b.segment = {a, pb};
    return b;
  }
  static ConvexBody make_point(Vec2 p) {
    ConvexBody b;
    b.kind = Kind::Point;
    b.point = {p};
    return b;
  }
  static ConvexBody make_interval(double lo, double hi, Vec2 column) {
    if (lo > hi) throw std::invalid_argument("interval needs lo <= hi");
    ConvexBody b;
    b.kind = Kind::Interval1D;
    b.interval = {lo, hi, column};
    return b;
  }
};

struct SupportPoint {
  double value{0.0};
  Vec2 point;
};

// Support function max_{c in body} <l, c> together with an attaining point.
// Ties on flat faces are broken by the face midpoint so the supporting
// point stays unique and centered.
inline SupportPoint support_oracle(const ConvexBody& body, Vec2 l) {
  if (l.x == 0.0 && l.y == 0.0)
    throw std::invalid_argument("support direction must be nonzero");
  switch (body.kind) {
    case ConvexBody::Kind::Ball: {
      const double nl = norm(l);
      const Vec2 p = body.ball.center + (body.ball.radius / nl) * l;
      return {dot(l, body.ball.center) + body.ball.radius * nl, p};
    }
    case ConvexBody::Kind::Box: {
      const auto& bx = body.box;
      Vec2 p;
      p.x = l.x > 0.0 ? bx.hi.x : (l.x < 0.0 ? bx.lo.x : 0.5 * (bx.lo.x + bx.hi.x));
      p.y = l.y > 0.0 ? bx.hi.y : (l.y < 0.0 ? bx.lo.y : 0.5 * (bx.lo.y + bx.hi.y));
      return {dot(l, p), p};
    }
    case ConvexBody::Kind::Segment: {
      const double va = dot(l, body.segment.a);
      const double vb = dot(l, body.segment.b);
      if (va > vb) return {va, body.segment.a};
      if (vb > va) return {vb, body.segment.b};
      return {va, 0.5 * (body.segment.a + body.segment.b)};
    }
    case ConvexBody::Kind::Point:
      return {dot(l, body.point.p), body.point.p};
    case ConvexBody::Kind::Interval1D: {
      const auto& iv = body.interval;
      const double s = dot(l, iv.column);
      const double u = s > 0.0 ? iv.hi : (s < 0.0 ? iv.lo : 0.5 * (iv.lo + iv.hi));
      return {u * s, u * iv.column};
    }
  }
  throw std::logic_error("unreachable body kind");
}

// Scalar coefficient of the support argmax for a 1-D control set; for the
// planar body kinds the argmax point itself is the control value.
inline double support_argmax_coefficient(const Interval1DBody& iv, Vec2 l) {
  const double s = dot(l, iv.column);
  return s > 0.0 ? iv.hi : (s < 0.0 ? iv.lo : 0.5 * (iv.lo + iv.hi));
}

namespace detail {

inline bool lex_less(Vec2 a, Vec2 b) {
  return a.x < b.x || (a.x == b.x && a.y < b.y);
}

}  // namespace detail

// Counter-clockwise convex hull (monotone chain). Exactly collinear input
// collapses to the two extreme points, coincident input to a single point.
inline std::vector<Vec2> hull2d(std::vector<Vec2> pts) {
  if (pts.empty()) throw std::invalid_argument("hull2d: empty point list");
  std::sort(pts.begin(), pts.end(), detail::lex_less);
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  const std::size_t n = pts.size();
  if (n <= 2) return pts;

  std::vector<Vec2> hull(2 * n);
  std::size_t m = 0;
  for (std::size_t i = 0; i < n; ++i) {  // lower chain
    while (m >= 2 &&
           cross(hull[m - 1] - hull[m - 2], pts[i] - hull[m - 2]) <= 0.0)
      --m;
    hull[m++] = pts[i];
  }
  const std::size_t lower = m + 1;
  for (std::size_t i = n - 1; i-- > 0;) {  // upper chain
    while (m >= lower &&
           cross(hull[m - 1] - hull[m - 2], pts[i] - hull[m - 2]) <= 0.0)
      --m;
    hull[m++] = pts[i];
  }
  hull.resize(m - 1);
  // Drop numerically coincident neighbors left by near-duplicate input.
  std::vector<Vec2> out;
  out.reserve(hull.size());
  for (const Vec2& p : hull) {
    if (out.empty() || norm2(p - out.back()) > 1e-26) out.push_back(p);
  }
  while (out.size() > 1 && norm2(out.back() - out.front()) <= 1e-26)
    out.pop_back();
  return out;
}

inline double dist_point_segment(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = norm2(ab);
  if (len2 == 0.0) return norm(p - a);
  const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return norm(p - (a + t * ab));
}

// Signed depth of x relative to a hull: positive inside (distance to the
// nearest edge line), negative outside (minus the Euclidean distance to
// the hull), and -distance for degenerate hulls (segment or point).
inline double signed_depth(const std::vector<Vec2>& hull, Vec2 x) {
  const std::size_t m = hull.size();
  if (m == 0) throw std::invalid_argument("signed_depth: empty hull");
  if (m == 1) return -norm(x - hull[0]);
  if (m == 2) return -dist_point_segment(x, hull[0], hull[1]);

  double depth = kInf;
  bool inside = true;
  for (std::size_t i = 0; i < m; ++i) {
    const Vec2 a = hull[i];
    const Vec2 b = hull[(i + 1) % m];
    const double c = cross(b - a, x - a);
    if (c < 0.0) {
      inside = false;
      break;
    }
    depth = std::min(depth, c / norm(b - a));
  }
  if (inside) return depth;
  double d = kInf;
  for (std::size_t i = 0; i < m; ++i)
    d = std::min(d, dist_point_segment(x, hull[i], hull[(i + 1) % m]));
  return -d;
}

// Inner approximation of a convex set on a direction grid.
struct DiscreteConvexSet {
  std::shared_ptr<const DirectionGrid> grid;
  std::vector<double> support;   // h_k per direction, closing duplicate kept
  std::vector<Vec2> points;      // supporting points y_k
  std::vector<Vec2> hull;        // ccw, may degenerate to 2 points or 1
  Vec2 bbox_lo, bbox_hi;

  bool degenerate() const { return hull.size() <= 2; }
};

namespace detail {

// Hulls thinner than this are collapsed onto their axis; the reachable
// sets of non-normal systems are exact segments up to rounding noise.
inline constexpr double kHullWidthTol = 1e-9;

inline void finalize_set(DiscreteConvexSet& s) {
  s.hull = hull2d(s.points);
  if (s.hull.size() > 2) {
    // Collapse numerically flat hulls to segments.
    std::size_t ia = 0;
    double best = -1.0;
    for (std::size_t i = 1; i < s.hull.size(); ++i) {
      const double d = norm2(s.hull[i] - s.hull[0]);
      if (d > best) {
        best = d;
        ia = i;
      }
    }
    const Vec2 a = s.hull[ia];
    std::size_t ib = 0;
    best = -1.0;
    for (std::size_t i = 0; i < s.hull.size(); ++i) {
      const double d = norm2(s.hull[i] - a);
      if (d > best) {
        best = d;
        ib = i;
      }
    }
    const Vec2 b = s.hull[ib];
    double width = 0.0;
    for (const Vec2& p : s.hull)
      width = std::max(width, dist_point_segment(p, a, b));
    if (width <= kHullWidthTol) {
      if (norm(b - a) <= 1e-12)
        s.hull = {a};
      else
        s.hull = lex_less(a, b) ? std::vector<Vec2>{a, b}
                                : std::vector<Vec2>{b, a};
    }
  }
  s.bbox_lo = {kInf, kInf};
  s.bbox_hi = {-kInf, -kInf};
  for (const Vec2& p : s.hull) {
    s.bbox_lo.x = std::min(s.bbox_lo.x, p.x);
    s.bbox_lo.y = std::min(s.bbox_lo.y, p.y);
    s.bbox_hi.x = std::max(s.bbox_hi.x, p.x);
    s.bbox_hi.y = std::max(s.bbox_hi.y, p.y);
  }
}

}  // namespace detail

inline DiscreteConvexSet make_discrete_set(
    std::shared_ptr<const DirectionGrid> grid, std::vector<double> support,
    std::vector<Vec2> points) {
  if (!grid || support.size() != points.size() ||
      static_cast<int>(support.size()) != grid->size())
    throw std::invalid_argument("discrete set: inconsistent sizes");
  DiscreteConvexSet s;
  s.grid = std::move(grid);
  s.support = std::move(support);
  s.points = std::move(points);
  detail::finalize_set(s);
  return s;
}

inline DiscreteConvexSet discretize_body(
    const ConvexBody& body, std::shared_ptr<const DirectionGrid> grid) {
  std::vector<double> h(static_cast<std::size_t>(grid->size()));
  std::vector<Vec2> y(static_cast<std::size_t>(grid->size()));
  for (int k = 0; k < grid->size(); ++k) {
    const auto sp = support_oracle(body, (*grid)[k]);
    h[static_cast<std::size_t>(k)] = sp.value;
    y[static_cast<std::size_t>(k)] = sp.point;
  }
  return make_discrete_set(std::move(grid), std::move(h), std::move(y));
}

// True iff x lies inside the hull or within distance tol of it.
inline bool contains(const DiscreteConvexSet& s, Vec2 x, double tol) {
  if (tol < 0.0) throw std::invalid_argument("contains: tol must be >= 0");
  if (x.x < s.bbox_lo.x - tol || x.x > s.bbox_hi.x + tol ||
      x.y < s.bbox_lo.y - tol || x.y > s.bbox_hi.y + tol)
    return false;
  return signed_depth(s.hull, x) >= -tol;
}

// Largest support-value gap over the direction grid. A lower bound of the
// Hausdorff distance, used as its proxy for stopping rules.
inline double support_distance(const DiscreteConvexSet& a,
                               const DiscreteConvexSet& b) {
  if (!same_grid(*a.grid, *b.grid))
    throw std::invalid_argument("support_distance: direction grids differ");
  double d = 0.0;
  for (std::size_t k = 0; k < a.support.size(); ++k)
    d = std::max(d, std::abs(a.support[k] - b.support[k]));
  return d;
}

// Minimal signed depth of the vertices of `a` inside the hull of `b`.
// Positive means a is strictly inside b, negative means some vertex of a
// is outside.
inline double inclusion_margin(const DiscreteConvexSet& a,
                               const DiscreteConvexSet& b) {
  if (!same_grid(*a.grid, *b.grid))
    throw std::invalid_argument("inclusion_margin: direction grids differ");
  double margin = kInf;
  for (const Vec2& v : a.hull) margin = std::min(margin, signed_depth(b.hull, v));
  return margin;
}

namespace detail {

// Membership of x in the hull of the interpolated supporting points
// (1-lambda) a_k + lambda b_k without building the hull: the points are
// supporting points of the Minkowski combination in increasing direction
// order, so they trace its hull boundary counter-clockwise and the
// left-of-every-edge test is exact.
inline bool interp_hull_contains(const std::vector<Vec2>& a,
                                 const std::vector<Vec2>& b, double lambda,
                                 Vec2 x, int unique_count) {
  const int m = unique_count;
  Vec2 prev = lerp(a[static_cast<std::size_t>(m - 1)],
                   b[static_cast<std::size_t>(m - 1)], lambda);
  for (int i = 0; i < m; ++i) {
    const Vec2 cur =
        lerp(a[static_cast<std::size_t>(i)], b[static_cast<std::size_t>(i)], lambda);
    const Vec2 e = cur - prev;
    if (norm2(e) > 1e-28 && cross(e, x - prev) < 0.0) return false;
    prev = cur;
  }
  return true;
}

inline double interp_segment_distance(const std::vector<Vec2>& a,
                                      const std::vector<Vec2>& b,
                                      double lambda, Vec2 x) {
  std::vector<Vec2> pts(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) pts[i] = lerp(a[i], b[i], lambda);
  Vec2 centroid{0.0, 0.0};
  for (const Vec2& p : pts) centroid += p;
  centroid = (1.0 / static_cast<double>(pts.size())) * centroid;
  Vec2 far = pts[0];
  double best = -1.0;
  for (const Vec2& p : pts) {
    const double d = norm2(p - centroid);
    if (d > best) {
      best = d;
      far = p;
    }
  }
  const Vec2 dir = far - centroid;
  double lo = kInf, hi = -kInf;
  Vec2 plo = pts[0], phi = pts[0];
  for (const Vec2& p : pts) {
    const double t = dot(p - centroid, dir);
    if (t < lo) {
      lo = t;
      plo = p;
    }
    if (t > hi) {
      hi = t;
      phi = p;
    }
  }
  return dist_point_segment(x, plo, phi);
}

}  // namespace detail

// Smallest lambda in [0,1] such that x lies in the polytope spanned by the
// interpolated supporting points (1-lambda) y_a^k + lambda y_b^k, found by
// bisection to absolute tolerance 1e-12 (60 iteration cap). Returns nullopt
// when x is not within tol of Sb. Full-dimensional interpolants use exact
// membership so that polytopal gauges are reproduced to bisection accuracy;
// degenerate ones (segments) fall back to distance <= tol.
inline std::optional<double> min_lambda_membership(const DiscreteConvexSet& sa,
                                                   const DiscreteConvexSet& sb,
                                                   Vec2 x, double tol) {
  if (!same_grid(*sa.grid, *sb.grid))
    throw std::invalid_argument("min_lambda_membership: direction grids differ");
  if (!contains(sb, x, tol)) return std::nullopt;

  const bool degenerate = sb.degenerate();
  const int m = sa.grid->unique_count();
  const auto covered = [&](double lambda) {
    if (degenerate)
      return detail::interp_segment_distance(sa.points, sb.points, lambda, x) <=
             tol;
    return detail::interp_hull_contains(sa.points, sb.points, lambda, x, m);
  };

  if (covered(0.0)) return 0.0;
  if (!covered(1.0)) return 1.0;  // within tol of sb but not strictly inside
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 60 && hi - lo > 1e-12; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (covered(mid))
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

}  // namespace mintime

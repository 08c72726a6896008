#include "crashsim/geometry.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace crashsim {

double normalize_angle(double a) {
  a = std::fmod(a, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  if (a > kPi) a -= 2.0 * kPi;
  return a;
}

Vec2 se2_apply(const Pose2& pose, const Vec2& point) {
  return point.rotated(pose.yaw) + pose.position();
}

Vec2 se2_apply_inverse(const Pose2& pose, const Vec2& point) {
  return (point - pose.position()).rotated(-pose.yaw);
}

Pose2 se2_inverse(const Pose2& pose) {
  const Vec2 t = Vec2(-pose.x, -pose.y).rotated(-pose.yaw);
  return Pose2(t.x, t.y, -pose.yaw);
}

Pose2 se2_compose(const Pose2& a, const Pose2& b) {
  const Vec2 t = se2_apply(a, b.position());
  return Pose2(t.x, t.y, a.yaw + b.yaw);
}

OrientedBox::OrientedBox(const Pose2& c, double len, double wid)
    : center(c), length(len), width(wid) {
  if (!(len > 0.0) || !(wid > 0.0) || len < wid) {
    throw std::invalid_argument("OrientedBox requires length >= width > 0");
  }
}

std::vector<Vec2> OrientedBox::corners() const {
  const double hl = 0.5 * length, hw = 0.5 * width;
  return {se2_apply(center, {hl, hw}), se2_apply(center, {-hl, hw}),
          se2_apply(center, {-hl, -hw}), se2_apply(center, {hl, -hw})};
}

bool OrientedBox::contains(const Vec2& p) const {
  const Vec2 local = se2_apply_inverse(center, p);
  return std::abs(local.x) <= 0.5 * length + kGeomEps &&
         std::abs(local.y) <= 0.5 * width + kGeomEps;
}

namespace {

double signed_area(const std::vector<Vec2>& v) {
  double s = 0.0;
  for (size_t i = 0; i < v.size(); ++i) {
    const Vec2& p = v[i];
    const Vec2& q = v[(i + 1) % v.size()];
    s += p.cross(q);
  }
  return 0.5 * s;
}

}  // namespace

Polygon::Polygon(std::vector<Vec2> verts) : vertices(std::move(verts)) {
  if (vertices.size() < 3) throw std::invalid_argument("Polygon requires >= 3 vertices");
  if (signed_area(vertices) < 0.0) {
    std::reverse(vertices.begin(), vertices.end());
  }
  if (std::abs(signed_area(vertices)) < kGeomEps) {
    throw std::invalid_argument("degenerate polygon (zero area)");
  }
}

double Polygon::area() const { return std::abs(signed_area(vertices)); }

Vec2 Polygon::centroid() const {
  double a = 0.0;
  Vec2 c(0.0, 0.0);
  for (size_t i = 0; i < vertices.size(); ++i) {
    const Vec2& p = vertices[i];
    const Vec2& q = vertices[(i + 1) % vertices.size()];
    const double w = p.cross(q);
    a += w;
    c = c + (p + q) * w;
  }
  return c / (3.0 * a);
}

bool Polygon::contains(const Vec2& p) const {
  // Crossing number with boundary treated as inside.
  bool inside = false;
  const size_t n = vertices.size();
  for (size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = vertices[j];
    const Vec2& b = vertices[i];
    if (segment_point_distance(a, b, p) < kGeomEps) return true;
    if ((b.y > p.y) != (a.y > p.y)) {
      const double xint = b.x + (p.y - b.y) * (a.x - b.x) / (a.y - b.y);
      if (p.x < xint) inside = !inside;
    }
  }
  return inside;
}

double segment_point_distance(const Vec2& a, const Vec2& b, const Vec2& p) {
  const Vec2 d = b - a;
  const double len2 = d.squared_norm();
  if (len2 < kGeomEps * kGeomEps) return (p - a).norm();
  const double t = std::clamp((p - a).dot(d) / len2, 0.0, 1.0);
  return (p - (a + d * t)).norm();
}

namespace {

int orientation(const Vec2& a, const Vec2& b, const Vec2& c) {
  const double v = (b - a).cross(c - a);
  if (v > kGeomEps) return 1;
  if (v < -kGeomEps) return -1;
  return 0;
}

bool on_segment(const Vec2& a, const Vec2& b, const Vec2& p) {
  return std::min(a.x, b.x) - kGeomEps <= p.x && p.x <= std::max(a.x, b.x) + kGeomEps &&
         std::min(a.y, b.y) - kGeomEps <= p.y && p.y <= std::max(a.y, b.y) + kGeomEps;
}

}  // namespace

bool segments_intersect(const Vec2& a0, const Vec2& a1, const Vec2& b0, const Vec2& b1) {
  const int o1 = orientation(a0, a1, b0);
  const int o2 = orientation(a0, a1, b1);
  const int o3 = orientation(b0, b1, a0);
  const int o4 = orientation(b0, b1, a1);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(a0, a1, b0)) return true;
  if (o2 == 0 && on_segment(a0, a1, b1)) return true;
  if (o3 == 0 && on_segment(b0, b1, a0)) return true;
  if (o4 == 0 && on_segment(b0, b1, a1)) return true;
  return false;
}

std::optional<Vec2> segment_intersection_point(const Vec2& a0, const Vec2& a1, const Vec2& b0,
                                               const Vec2& b1) {
  const Vec2 r = a1 - a0;
  const Vec2 s = b1 - b0;
  const double denom = r.cross(s);
  if (std::abs(denom) < kGeomEps) {
    // Parallel or collinear: report an endpoint lying on the other segment.
    if (std::abs((b0 - a0).cross(r)) > kGeomEps) return std::nullopt;
    for (const Vec2& p : {b0, b1}) {
      if (on_segment(a0, a1, p) && segment_point_distance(a0, a1, p) < kGeomEps) return p;
    }
    for (const Vec2& p : {a0, a1}) {
      if (on_segment(b0, b1, p) && segment_point_distance(b0, b1, p) < kGeomEps) return p;
    }
    return std::nullopt;
  }
  const double t = (b0 - a0).cross(s) / denom;
  const double u = (b0 - a0).cross(r) / denom;
  if (t < -kGeomEps || t > 1.0 + kGeomEps || u < -kGeomEps || u > 1.0 + kGeomEps) {
    return std::nullopt;
  }
  return a0 + r * t;
}

double segment_segment_distance(const Vec2& a0, const Vec2& a1, const Vec2& b0, const Vec2& b1) {
  if (segments_intersect(a0, a1, b0, b1)) return 0.0;
  return std::min(std::min(segment_point_distance(a0, a1, b0), segment_point_distance(a0, a1, b1)),
                  std::min(segment_point_distance(b0, b1, a0), segment_point_distance(b0, b1, a1)));
}

bool segment_intersects_polygon(const Vec2& a, const Vec2& b, const Polygon& poly) {
  const size_t n = poly.vertices.size();
  for (size_t i = 0; i < n; ++i) {
    if (segments_intersect(a, b, poly.vertices[i], poly.vertices[(i + 1) % n])) return true;
  }
  // Fully inside the polygon also blocks.
  return poly.contains((a + b) * 0.5);
}

bool polygons_intersect(const Polygon& a, const Polygon& b) {
  const size_t na = a.vertices.size(), nb = b.vertices.size();
  for (size_t i = 0; i < na; ++i) {
    for (size_t j = 0; j < nb; ++j) {
      if (segments_intersect(a.vertices[i], a.vertices[(i + 1) % na], b.vertices[j],
                             b.vertices[(j + 1) % nb])) {
        return true;
      }
    }
  }
  return a.contains(b.vertices[0]) || b.contains(a.vertices[0]);
}

double polygon_min_distance(const Polygon& a, const Polygon& b) {
  if (a.vertices.size() < 3 || b.vertices.size() < 3) {
    throw std::invalid_argument("polygon_min_distance: degenerate polygon");
  }
  if (polygons_intersect(a, b)) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  const size_t na = a.vertices.size(), nb = b.vertices.size();
  for (size_t i = 0; i < na; ++i) {
    for (size_t j = 0; j < nb; ++j) {
      best = std::min(best, segment_segment_distance(a.vertices[i], a.vertices[(i + 1) % na],
                                                     b.vertices[j], b.vertices[(j + 1) % nb]));
    }
  }
  return best;
}

bool obb_overlap(const OrientedBox& a, const OrientedBox& b) {
  const auto ca = a.corners();
  const auto cb = b.corners();
  // Candidate separating axes: the two edge normals of each box.
  const Vec2 axes[4] = {a.center.heading(), a.center.heading().rotated(kPi / 2),
                        b.center.heading(), b.center.heading().rotated(kPi / 2)};
  for (const Vec2& axis : axes) {
    double amin = std::numeric_limits<double>::infinity(), amax = -amin;
    double bmin = amin, bmax = -amin;
    for (const Vec2& p : ca) {
      const double v = p.dot(axis);
      amin = std::min(amin, v);
      amax = std::max(amax, v);
    }
    for (const Vec2& p : cb) {
      const double v = p.dot(axis);
      bmin = std::min(bmin, v);
      bmax = std::max(bmax, v);
    }
    if (amax < bmin - kGeomEps || bmax < amin - kGeomEps) return false;
  }
  return true;
}

Polygon box_to_polygon(const OrientedBox& box) { return Polygon(box.corners()); }

std::vector<Vec2> convex_hull(std::vector<Vec2> points) {
  std::sort(points.begin(), points.end(), [](const Vec2& a, const Vec2& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  points.erase(std::unique(points.begin(), points.end()), points.end());
  const size_t n = points.size();
  if (n < 3) return points;
  std::vector<Vec2> hull(2 * n);
  size_t k = 0;
  for (size_t i = 0; i < n; ++i) {  // lower
    while (k >= 2 && (hull[k - 1] - hull[k - 2]).cross(points[i] - hull[k - 2]) <= 0) --k;
    hull[k++] = points[i];
  }
  const size_t lower = k + 1;
  for (size_t i = n - 1; i-- > 0;) {  // upper
    while (k >= lower && (hull[k - 1] - hull[k - 2]).cross(points[i] - hull[k - 2]) <= 0) --k;
    hull[k++] = points[i];
  }
  hull.resize(k - 1);
  return hull;
}

std::vector<std::pair<int, int>> rasterize_box(const OrientedBox& box, const GridSpec& grid) {
  std::vector<std::pair<int, int>> cells;
  // Bound the scan by the box's AABB.
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const Vec2& c : box.corners()) {
    xmin = std::min(xmin, c.x);
    xmax = std::max(xmax, c.x);
    ymin = std::min(ymin, c.y);
    ymax = std::max(ymax, c.y);
  }
  const int ix0 = std::max(0, static_cast<int>(std::floor((xmin - grid.x_min) / grid.cell)));
  const int ix1 = std::min(grid.nx() - 1, static_cast<int>(std::floor((xmax - grid.x_min) / grid.cell)));
  const int iy0 = std::max(0, static_cast<int>(std::floor((ymin - grid.y_min) / grid.cell)));
  const int iy1 = std::min(grid.ny() - 1, static_cast<int>(std::floor((ymax - grid.y_min) / grid.cell)));
  for (int ix = ix0; ix <= ix1; ++ix) {
    for (int iy = iy0; iy <= iy1; ++iy) {
      if (box.contains(grid.cell_center(ix, iy))) cells.emplace_back(ix, iy);
    }
  }
  return cells;
}

}  // namespace crashsim

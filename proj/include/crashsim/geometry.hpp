#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

namespace crashsim {

constexpr double kPi = 3.14159265358979323846;
constexpr double kGeomEps = 1e-10;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2() = default;
  Vec2(double x_, double y_) : x(x_), y(y_) {}

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double k) const { return {x * k, y * k}; }
  Vec2 operator/(double k) const { return {x / k, y / k}; }
  bool operator==(const Vec2& o) const { return x == o.x && y == o.y; }

  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double cross(const Vec2& o) const { return x * o.y - y * o.x; }
  double norm() const { return std::hypot(x, y); }
  double squared_norm() const { return x * x + y * y; }
  Vec2 rotated(double angle) const {
    const double c = std::cos(angle), s = std::sin(angle);
    return {c * x - s * y, s * x + c * y};
  }
};

inline Vec2 operator*(double k, const Vec2& v) { return v * k; }

// Normalize an angle to (-pi, pi].
double normalize_angle(double a);

// Planar rigid pose: x forward, y left, yaw CCW from +x (project-wide
// convention).
struct Pose2 {
  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;

  Pose2() = default;
  Pose2(double x_, double y_, double yaw_) : x(x_), y(y_), yaw(normalize_angle(yaw_)) {}

  Vec2 position() const { return {x, y}; }
  Vec2 heading() const { return {std::cos(yaw), std::sin(yaw)}; }
};

// Transform a point expressed in the frame of `pose` into the parent frame.
Vec2 se2_apply(const Pose2& pose, const Vec2& point);

// Inverse rigid transform: parent-frame point into the frame of `pose`.
Vec2 se2_apply_inverse(const Pose2& pose, const Vec2& point);

Pose2 se2_inverse(const Pose2& pose);

// Compose: result maps child-of-b coordinates through b then a.
Pose2 se2_compose(const Pose2& a, const Pose2& b);

// Rotated rectangle footprint. length along the pose heading, width across.
struct OrientedBox {
  Pose2 center;
  double length = 0.0;
  double width = 0.0;

  OrientedBox() = default;
  OrientedBox(const Pose2& c, double len, double wid);

  // Corners in CCW order.
  std::vector<Vec2> corners() const;
  bool contains(const Vec2& p) const;
};

// Simple CCW polygon. Construction validates vertex count and winding.
struct Polygon {
  std::vector<Vec2> vertices;

  Polygon() = default;
  explicit Polygon(std::vector<Vec2> verts);

  double area() const;
  Vec2 centroid() const;
  bool contains(const Vec2& p) const;  // convex or simple polygons, boundary counts as inside
};

double segment_point_distance(const Vec2& a, const Vec2& b, const Vec2& p);
double segment_segment_distance(const Vec2& a0, const Vec2& a1, const Vec2& b0, const Vec2& b1);
bool segments_intersect(const Vec2& a0, const Vec2& a1, const Vec2& b0, const Vec2& b1);
std::optional<Vec2> segment_intersection_point(const Vec2& a0, const Vec2& a1, const Vec2& b0,
                                               const Vec2& b1);

// True if the open segment from a to b crosses the polygon (touching at the
// endpoints only does not count as crossing the interior).
bool segment_intersects_polygon(const Vec2& a, const Vec2& b, const Polygon& poly);

// Minimum Euclidean distance between two polygons; 0 when they touch or
// overlap. Throws std::invalid_argument on degenerate inputs.
double polygon_min_distance(const Polygon& a, const Polygon& b);

bool polygons_intersect(const Polygon& a, const Polygon& b);

// Separating-axis test for two oriented boxes.
bool obb_overlap(const OrientedBox& a, const OrientedBox& b);

Polygon box_to_polygon(const OrientedBox& box);

// Convex hull (Andrew monotone chain), CCW, no duplicate endpoint. Collinear
// inputs yield a degenerate 2-point "hull"; callers must handle that case.
std::vector<Vec2> convex_hull(std::vector<Vec2> points);

// Metric BEV grid. Cells are square; index 0 starts at (x_min, y_min) and the
// returned centers are cell midpoints. Row-major with x-major rows: linear
// index = ix * ny + iy.
struct GridSpec {
  double x_min = -50.0;
  double x_max = 50.0;
  double y_min = -50.0;
  double y_max = 50.0;
  double cell = 0.5;

  int nx() const { return static_cast<int>(std::lround((x_max - x_min) / cell)); }
  int ny() const { return static_cast<int>(std::lround((y_max - y_min) / cell)); }
  int size() const { return nx() * ny(); }
  bool in_range(int ix, int iy) const { return ix >= 0 && ix < nx() && iy >= 0 && iy < ny(); }
  int index(int ix, int iy) const { return ix * ny() + iy; }
  Vec2 cell_center(int ix, int iy) const {
    return {x_min + (ix + 0.5) * cell, y_min + (iy + 0.5) * cell};
  }
  // Cell containing the point, or nullopt outside the range.
  std::optional<std::pair<int, int>> cell_of(const Vec2& p) const {
    const int ix = static_cast<int>(std::floor((p.x - x_min) / cell));
    const int iy = static_cast<int>(std::floor((p.y - y_min) / cell));
    if (!in_range(ix, iy)) return std::nullopt;
    return std::make_pair(ix, iy);
  }

  static GridSpec motion_grid() { return {-50.0, 50.0, -50.0, 50.0, 0.5}; }
  static GridSpec detection_grid() { return {-51.2, 51.2, -51.2, 51.2, 0.8}; }
};

// Indices of cells whose centers lie inside the box.
std::vector<std::pair<int, int>> rasterize_box(const OrientedBox& box, const GridSpec& grid);

}  // namespace crashsim

#include "septop/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace septop {

double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

double triangle_area(const Triangle& t) {
  return 0.5 * cross2(t[1] - t[0], t[2] - t[0]);
}

Vec2 triangle_centroid(const Triangle& t) { return (t[0] + t[1] + t[2]) / 3.0; }

Vec2 triangle_incenter(const Triangle& t) {
  const double a = (t[2] - t[1]).norm();  // opposite vertex 0
  const double b = (t[0] - t[2]).norm();
  const double c = (t[1] - t[0]).norm();
  return (a * t[0] + b * t[1] + c * t[2]) / (a + b + c);
}

Triangle reference_triangle(int elem_type) {
  switch (elem_type) {
    case 1:
      return {Vec2(-2.0 / 3.0, -1.0 / 3.0), Vec2(1.0 / 3.0, -1.0 / 3.0),
              Vec2(1.0 / 3.0, 2.0 / 3.0)};
    case 2:
      return {Vec2(2.0 / 3.0, 1.0 / 3.0), Vec2(-1.0 / 3.0, -2.0 / 3.0),
              Vec2(-1.0 / 3.0, 1.0 / 3.0)};
    default:
      throw std::invalid_argument("reference_triangle: elem_type must be 1 or 2");
  }
}

SectorFrame make_sector_frame(const Triangle& t) {
  SectorFrame frame;
  frame.apex = triangle_incenter(t);
  for (int i = 0; i < 3; ++i) {
    frame.ray_dir[i] = (t[i] - frame.apex).normalized();
    frame.ray_angle[i] = std::atan2(frame.ray_dir[i].y(), frame.ray_dir[i].x());
  }
  return frame;
}

int sector_of(const SectorFrame& frame, const Vec2& x) {
  const Vec2 y = x - frame.apex;
  for (int j = 0; j < 3; ++j) {
    const Vec2& da = frame.ray_dir[(j + 1) % 3];
    const Vec2& db = frame.ray_dir[(j + 2) % 3];
    if (cross2(da, y) >= 0.0 && cross2(db, y) < 0.0) return j;
  }
  return 0;  // apex itself
}

std::vector<Vec2> clip_half_plane(const std::vector<Vec2>& polygon, const Vec2& p,
                                  const Vec2& n) {
  std::vector<Vec2> out;
  const std::size_t m = polygon.size();
  if (m == 0) return out;
  out.reserve(m + 2);
  for (std::size_t i = 0; i < m; ++i) {
    const Vec2& a = polygon[i];
    const Vec2& b = polygon[(i + 1) % m];
    const double da = n.dot(a - p);
    const double db = n.dot(b - p);
    if (da >= 0.0) out.push_back(a);
    if ((da > 0.0 && db < 0.0) || (da < 0.0 && db > 0.0)) {
      const double t = da / (da - db);
      out.push_back(a + t * (b - a));
    }
  }
  return out;
}

double polygon_area(const std::vector<Vec2>& polygon) {
  const std::size_t m = polygon.size();
  if (m < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    twice += cross2(polygon[i], polygon[(i + 1) % m]);
  }
  return 0.5 * twice;
}

std::array<double, 3> sector_area_fractions(const SectorFrame& frame,
                                            const std::vector<Vec2>& polygon) {
  const double total = polygon_area(polygon);
  std::array<double, 3> fractions{0.0, 0.0, 0.0};
  if (total <= 0.0) return fractions;
  for (int j = 0; j < 3; ++j) {
    const Vec2& da = frame.ray_dir[(j + 1) % 3];
    const Vec2& db = frame.ray_dir[(j + 2) % 3];
    const Vec2 na(-da.y(), da.x());   // cross2(da, y) >= 0
    const Vec2 nb(db.y(), -db.x());   // cross2(db, y) <= 0
    auto clipped = clip_half_plane(polygon, frame.apex, na);
    clipped = clip_half_plane(clipped, frame.apex, nb);
    fractions[j] = polygon_area(clipped) / total;
  }
  return fractions;
}

}  // namespace septop

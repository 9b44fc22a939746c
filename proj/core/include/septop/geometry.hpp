#pragma once

#include <Eigen/Dense>

#include <array>
#include <vector>

namespace septop {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

// A triangle as its three vertices in counter-clockwise order.
using Triangle = std::array<Vec2, 3>;

double cross2(const Vec2& a, const Vec2& b);

double triangle_area(const Triangle& t);
Vec2 triangle_centroid(const Triangle& t);

// Intersection point of the interior angle bisectors; the three bisector rays
// through the vertices all pass through it.
Vec2 triangle_incenter(const Triangle& t);

// Reference triangles at unit scale, centered at their centroid.
// Type 1 has its right angle at the bottom-right vertex, type 2 at the
// top-left vertex; both match the two element shapes of the structured mesh.
Triangle reference_triangle(int elem_type);

// The plane around a triangle is split into three wedges with apex at the
// incenter, bounded by the rays through the vertices. Wedge j is the one
// adjacent to the edge opposite vertex j (0-based), i.e. the edge from
// vertex j+1 to vertex j+2 (mod 3). Outside the triangle the wedges coincide
// with the sectors cut out by the angle-bisector rays.
struct SectorFrame {
  Vec2 apex;
  std::array<Vec2, 3> ray_dir;  // direction from apex through vertex i
  std::array<double, 3> ray_angle;
};

SectorFrame make_sector_frame(const Triangle& t);

// Index in {0,1,2} of the wedge containing x. Points on a boundary ray are
// assigned to the wedge that follows the ray counter-clockwise.
int sector_of(const SectorFrame& frame, const Vec2& x);

// Fraction of the polygon's area inside each wedge. The fractions sum to 1
// for any polygon with positive area.
std::array<double, 3> sector_area_fractions(const SectorFrame& frame,
                                            const std::vector<Vec2>& polygon);

// Clip a convex polygon to the half-plane { x : n.dot(x - p) >= 0 }.
std::vector<Vec2> clip_half_plane(const std::vector<Vec2>& polygon,
                                  const Vec2& p, const Vec2& n);

double polygon_area(const std::vector<Vec2>& polygon);

}  // namespace septop

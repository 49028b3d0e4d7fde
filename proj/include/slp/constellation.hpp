// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

namespace slp {

using Vec2 = Eigen::Vector2d;

// Absolute tolerance on halfspace offsets for unit-power constellations.
inline constexpr double kGeomTol = 1e-9;

// Closed halfspace {x | normal^T x >= offset}.
struct Halfspace {
  Vec2 normal;
  double offset = 0.0;

  double slack(const Vec2& x) const { return normal.dot(x) - offset; }
  bool contains(const Vec2& x, double tol = kGeomTol) const { return slack(x) >= -tol; }
};

// Bisector halfspace of x_i against x_j: a = x_i - x_j, b = a^T (x_i + x_j) / 2.
// Throws DegenerateConstellation when the points coincide.
Halfspace bisector(const Vec2& xi, const Vec2& xj);

struct Facet {
  std::size_t neighbor = 0;
  Halfspace halfspace;
};

// ML decision region of one point, with only facet-defining halfspaces kept.
struct VoronoiRegion {
  std::size_t owner = 0;
  std::vector<Facet> facets;
  bool bounded = false;

  bool contains(const Vec2& x, double tol = kGeomTol) const;
};

// Immutable finite 2D constellation. Points are indexed 0..M-1 internally;
// external surfaces (files, CLI) use labels 1..M.
class Constellation {
 public:
  // Scales the points by one positive factor so the mean squared norm is 1.
  static Constellation normalized(std::vector<Vec2> points);
  // Keeps the points as given (used for shifted or otherwise raw sets).
  static Constellation raw(std::vector<Vec2> points);

  std::size_t size() const { return points_.size(); }
  const Vec2& point(std::size_t i) const { return points_.at(i); }
  const std::vector<Vec2>& points() const { return points_; }
  // Factor applied to the input points (1 for raw constellations).
  double scale() const { return scale_; }
  double mean_power() const;
  double tolerance() const { return tol_; }

  // Counterclockwise hull vertices (collinear edge points excluded).
  const std::vector<std::size_t>& hull_vertices() const { return hull_; }
  // All points on bd(conv), counterclockwise, edge points included.
  const std::vector<std::size_t>& boundary_cycle() const { return cycle_; }
  bool is_boundary(std::size_t i) const { return on_boundary_.at(i); }
  bool is_hull_vertex(std::size_t i) const { return hull_vertex_.at(i); }
  // True when every point lies on one line.
  bool collinear() const { return collinear_; }
  // (counterclockwise neighbor, clockwise neighbor) along bd(conv) for
  // boundary points; nullopt for interior points.
  std::optional<std::pair<std::size_t, std::size_t>> boundary_neighbors(std::size_t i) const;
  bool origin_in_hull() const { return origin_in_hull_; }

  const VoronoiRegion& voronoi(std::size_t i) const { return regions_.at(i); }

 private:
  Constellation(std::vector<Vec2> points, double scale);

  std::vector<Vec2> points_;
  double scale_ = 1.0;
  double tol_ = kGeomTol;
  std::vector<std::size_t> hull_;
  std::vector<std::size_t> cycle_;
  std::vector<bool> on_boundary_;
  std::vector<bool> hull_vertex_;
  std::vector<std::optional<std::pair<std::size_t, std::size_t>>> neighbors_;
  bool collinear_ = false;
  bool origin_in_hull_ = false;
  std::vector<VoronoiRegion> regions_;
};

Constellation normalize_unit_power(std::vector<Vec2> points);
VoronoiRegion voronoi_region(const Constellation& c, std::size_t i);
bool is_boundary(const Constellation& c, std::size_t i);
std::vector<std::size_t> convex_hull(const Constellation& c);
bool origin_in_hull(const Constellation& c);

// Built-in constellations at unit average power.
Constellation make_psk(std::size_t order, double phase = 0.0);
Constellation make_square_qam(std::size_t order);
// One point at the origin surrounded by a regular 7-point ring, a stand-in
// for an AWGN-optimized 8-ary layout.
Constellation make_8opt();

}  // namespace slp

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "slp/constellation.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace slp {

// Strictness slack used by the sampling oracles.
inline constexpr double kStrictSlack = 1e-7;

// Shape of the distance-preserving region x_i + {d | A d >= 0}.
enum class RegionShape {
  Point,      // interior point: the region is {x_i}
  Wedge,      // hull vertex: polyhedral angle with two infinite edges
  Ray,        // point inside a hull edge: a half-line along the edge normal
  Halfplane,  // endpoint of a collinear constellation
  Line,       // inner point of a collinear constellation
};

const char* to_string(RegionShape shape);

// Nonnegative slack pair on the two boundary rows.
class DeltaVector {
 public:
  DeltaVector() = default;
  // Throws DomainError on a negative or non-finite component.
  DeltaVector(double first, double second);

  double first() const { return values_[0]; }
  double second() const { return values_[1]; }
  double operator[](std::size_t k) const { return values_.at(k); }
  const std::array<double, 2>& values() const { return values_; }

  // Componentwise strict order.
  bool strictly_below(const DeltaVector& other) const {
    return values_[0] < other.values_[0] && values_[1] < other.values_[1];
  }

 private:
  std::array<double, 2> values_{0.0, 0.0};
};

struct DpcirRegion {
  std::size_t owner = 0;
  Eigen::Matrix<double, Eigen::Dynamic, 2> A;  // rows a_ij^T
  Eigen::VectorXd b;
  Eigen::VectorXd c;                   // margins d_ij * ||a_ij|| / 2
  std::vector<std::size_t> neighbors;  // constellation index of each row
  // Row indices of the (counterclockwise, clockwise) boundary neighbors.
  std::optional<std::pair<std::size_t, std::size_t>> boundary_rows;
  Vec2 vertex = Vec2::Zero();
  RegionShape shape = RegionShape::Point;
  // Unit directions of the infinite edges, computed from all rows. For a
  // wedge, edges[k] lies on the hyperplane of boundary row k.
  std::vector<Vec2> edges;
  // Unit generators of the recession cone {d | A d >= 0}.
  std::vector<Vec2> generators;
  double tolerance = kGeomTol;

  std::size_t rows() const { return static_cast<std::size_t>(A.rows()); }
  // A x - b - c: the full slack vector of x.
  Eigen::VectorXd slack(const Vec2& x) const;
  bool contains(const Vec2& x) const;
  bool is_boundary() const { return shape != RegionShape::Point; }
};

DpcirRegion build_dpcir(const Constellation& c, std::size_t i);
std::vector<DpcirRegion> build_all_dpcirs(const Constellation& c);

// Unique point with slacks delta on the two boundary rows. Requires a wedge.
Vec2 point_from_delta(const DpcirRegion& r, const DeltaVector& delta);
// x_i + s * edge for a ray-shaped region, s >= 0.
Vec2 point_along_ray(const DpcirRegion& r, double s);
// x_i + sum_k mu_k * generators[k], mu >= 0.
Vec2 point_from_generators(const DpcirRegion& r, const std::vector<double>& mu);

bool contains(const DpcirRegion& r, const Vec2& x);

struct Lemma3Report {
  bool holds = true;
  std::optional<Vec2> witness;  // point of the region with ||x|| < ||x_i||
  std::size_t sampled = 0;
};

// Samples the region of boundary point i (wedges via point_from_delta over a
// log-spaced grid, other shapes via cone generators) and looks for a point
// closer to the origin than the vertex.
Lemma3Report check_lemma3(const Constellation& c, std::size_t i, std::size_t samples);

struct MonotonicityWitness {
  DeltaVector lower;
  DeltaVector upper;
  double norm_lower = 0.0;
  double norm_upper = 0.0;
};

struct Theorem1Report {
  bool monotone = true;
  std::optional<MonotonicityWitness> witness;
  std::size_t trials = 0;
};

// Draws random pairs lower < upper (componentwise, strict) and checks that
// the norm of the corresponding region point strictly increases. For rays
// both components carry the distance along the ray. Halfplane and line
// regions have no unique parametrization and throw DegenerateRegion.
Theorem1Report check_theorem1(const Constellation& c, std::size_t i, std::size_t trials, std::uint64_t seed = 1);
Theorem1Report check_theorem1(const DpcirRegion& r, std::size_t trials, std::uint64_t seed = 1);

}  // namespace slp

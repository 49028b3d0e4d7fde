// SPDX-License-Identifier: Apache-2.0
#include "slp/dpcir.hpp"

#include "slp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace slp {

namespace {

Vec2 perp(const Vec2& v) { return Vec2(-v.y(), v.x()); }

bool in_cone(const Eigen::Matrix<double, Eigen::Dynamic, 2>& A, const Vec2& d) {
  for (Eigen::Index r = 0; r < A.rows(); ++r)
    if (A.row(r).dot(d) < -1e-9 * A.row(r).norm()) return false;
  return true;
}

std::size_t row_of(const DpcirRegion& r, std::size_t neighbor) {
  const auto it = std::find(r.neighbors.begin(), r.neighbors.end(), neighbor);
  if (it == r.neighbors.end())
    throw std::logic_error("boundary neighbor " + std::to_string(neighbor + 1) + " of point " +
                           std::to_string(r.owner + 1) + " is not a Voronoi neighbor");
  return static_cast<std::size_t>(it - r.neighbors.begin());
}

void require_boundary(const DpcirRegion& r) {
  if (r.shape == RegionShape::Point)
    throw InteriorPointRegion("point " + std::to_string(r.owner + 1) + " is interior; its region is the point itself");
}

std::vector<double> log_grid(std::size_t n, double lo_exp, double hi_exp) {
  std::vector<double> out{0.0};
  if (n < 2) return out;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double f = n > 2 ? static_cast<double>(k) / static_cast<double>(n - 2) : 0.0;
    out.push_back(std::pow(10.0, lo_exp + f * (hi_exp - lo_exp)));
  }
  return out;
}

}  // namespace

const char* to_string(RegionShape shape) {
  switch (shape) {
    case RegionShape::Point: return "point";
    case RegionShape::Wedge: return "wedge";
    case RegionShape::Ray: return "ray";
    case RegionShape::Halfplane: return "halfplane";
    case RegionShape::Line: return "line";
  }
  return "unknown";
}

DeltaVector::DeltaVector(double first, double second) : values_{first, second} {
  if (!(first >= 0.0) || !(second >= 0.0) || !std::isfinite(first) || !std::isfinite(second))
    throw DomainError("slack components must be finite and nonnegative");
}

Eigen::VectorXd DpcirRegion::slack(const Vec2& x) const { return A * x - b - c; }

bool DpcirRegion::contains(const Vec2& x) const { return (slack(x).array() >= -tolerance).all(); }

DpcirRegion build_dpcir(const Constellation& c, std::size_t i) {
  const VoronoiRegion& vor = c.voronoi(i);
  DpcirRegion r;
  r.owner = i;
  r.vertex = c.point(i);
  r.tolerance = c.tolerance();
  const auto m = static_cast<Eigen::Index>(vor.facets.size());
  r.A.resize(m, 2);
  r.b.resize(m);
  r.c.resize(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const Facet& f = vor.facets[static_cast<std::size_t>(k)];
    const Vec2& a = f.halfspace.normal;
    const double d = (c.point(i) - c.point(f.neighbor)).norm();
    r.A.row(k) = a.transpose();
    r.b(k) = f.halfspace.offset;
    r.c(k) = d * a.norm() / 2.0;
    r.neighbors.push_back(f.neighbor);
  }

  if (const auto nb = c.boundary_neighbors(i)) r.boundary_rows = std::make_pair(row_of(r, nb->first), row_of(r, nb->second));

  // Extreme rays of {d | A d >= 0}: every edge direction is orthogonal to
  // some row.
  std::vector<Vec2> dirs;
  for (Eigen::Index k = 0; k < m; ++k) {
    const Vec2 t = perp(r.A.row(k).transpose()).normalized();
    for (const Vec2& d : {t, Vec2(-t)}) {
      if (!in_cone(r.A, d)) continue;
      const bool seen = std::any_of(dirs.begin(), dirs.end(), [&](const Vec2& e) { return (e - d).norm() < 1e-9; });
      if (!seen) dirs.push_back(d);
    }
  }

  if (dirs.empty()) {
    r.shape = RegionShape::Point;
  } else if (dirs.size() == 1) {
    r.shape = RegionShape::Ray;
    r.edges = dirs;
    r.generators = dirs;
  } else if (dirs.size() == 2) {
    r.edges = dirs;
    r.generators = dirs;
    if (dirs[0].dot(dirs[1]) < -1.0 + 1e-9) {
      const Vec2 n = r.A.row(0).transpose().normalized();
      if (in_cone(r.A, n)) {
        r.shape = RegionShape::Halfplane;
        r.generators.push_back(n);
      } else {
        r.shape = RegionShape::Line;
      }
    } else {
      r.shape = RegionShape::Wedge;
      if (r.boundary_rows) {
        const Vec2 a1 = r.A.row(static_cast<Eigen::Index>(r.boundary_rows->first)).transpose();
        if (std::abs(a1.dot(r.edges[0])) > std::abs(a1.dot(r.edges[1]))) std::swap(r.edges[0], r.edges[1]);
        r.generators = r.edges;
      }
    }
  } else {
    throw std::logic_error("recession cone of point " + std::to_string(i + 1) + " has more than two extreme rays");
  }
  return r;
}

std::vector<DpcirRegion> build_all_dpcirs(const Constellation& c) {
  std::vector<DpcirRegion> out;
  out.reserve(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) out.push_back(build_dpcir(c, i));
  return out;
}

Vec2 point_from_delta(const DpcirRegion& r, const DeltaVector& delta) {
  require_boundary(r);
  if (r.shape != RegionShape::Wedge || !r.boundary_rows)
    throw DegenerateRegion(std::string("boundary rows of a ") + to_string(r.shape) +
                           " region do not determine a unique point");
  const auto r1 = static_cast<Eigen::Index>(r.boundary_rows->first);
  const auto r2 = static_cast<Eigen::Index>(r.boundary_rows->second);
  Eigen::Matrix2d M;
  M.row(0) = r.A.row(r1);
  M.row(1) = r.A.row(r2);
  const Eigen::Vector2d rhs(r.b(r1) + r.c(r1) + delta.first(), r.b(r2) + r.c(r2) + delta.second());
  return M.partialPivLu().solve(rhs);
}

Vec2 point_along_ray(const DpcirRegion& r, double s) {
  require_boundary(r);
  if (r.shape != RegionShape::Ray) throw DegenerateRegion(std::string("region is a ") + to_string(r.shape) + ", not a ray");
  if (!(s >= 0.0)) throw DomainError("ray parameter must be nonnegative");
  return r.vertex + s * r.edges.front();
}

Vec2 point_from_generators(const DpcirRegion& r, const std::vector<double>& mu) {
  if (mu.size() != r.generators.size()) throw DomainError("one coefficient per cone generator expected");
  Vec2 x = r.vertex;
  for (std::size_t k = 0; k < mu.size(); ++k) {
    if (!(mu[k] >= 0.0)) throw DomainError("cone coefficients must be nonnegative");
    x += mu[k] * r.generators[k];
  }
  return x;
}

bool contains(const DpcirRegion& r, const Vec2& x) { return r.contains(x); }

Lemma3Report check_lemma3(const Constellation& c, std::size_t i, std::size_t samples) {
  const DpcirRegion r = build_dpcir(c, i);
  require_boundary(r);
  Lemma3Report report;
  const double vertex_norm = r.vertex.norm();
  auto visit = [&](const Vec2& x) {
    ++report.sampled;
    if (report.holds && x.norm() < vertex_norm - kStrictSlack) {
      report.holds = false;
      report.witness = x;
    }
  };

  const auto side = std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(samples)))));
  const std::vector<double> grid = log_grid(side, -4.0, 3.0);
  if (r.shape == RegionShape::Wedge) {
    for (double d1 : grid)
      for (double d2 : grid) visit(point_from_delta(r, DeltaVector(d1, d2)));
    return report;
  }
  const std::size_t g = r.generators.size();
  for (std::size_t p = 0; p < g; ++p)
    for (std::size_t q = p; q < g; ++q)
      for (double mp : grid)
        for (double mq : grid) {
          std::vector<double> mu(g, 0.0);
          mu[p] += mp;
          if (q != p) mu[q] += mq;
          visit(point_from_generators(r, mu));
          if (q == p) break;
        }
  return report;
}

Theorem1Report check_theorem1(const DpcirRegion& r, std::size_t trials, std::uint64_t seed) {
  require_boundary(r);
  if (r.shape != RegionShape::Wedge && r.shape != RegionShape::Ray)
    throw DegenerateRegion(std::string("a ") + to_string(r.shape) + " region is not uniquely parametrized by its slacks");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto draw_base = [&] { return unit(rng) < 0.2 ? 0.0 : std::pow(10.0, -3.0 + 4.3 * unit(rng)); };
  auto draw_step = [&] { return std::pow(10.0, -3.0 + 4.0 * unit(rng)); };
  auto norm_at = [&](const DeltaVector& d) {
    return r.shape == RegionShape::Wedge ? point_from_delta(r, d).norm() : point_along_ray(r, d.first()).norm();
  };

  Theorem1Report report;
  for (std::size_t k = 0; k < trials; ++k) {
    DeltaVector lower, upper;
    if (r.shape == RegionShape::Wedge) {
      const double l1 = draw_base(), l2 = draw_base();
      lower = DeltaVector(l1, l2);
      upper = DeltaVector(l1 + draw_step(), l2 + draw_step());
    } else {
      const double s = draw_base();
      const double t = s + draw_step();
      lower = DeltaVector(s, s);
      upper = DeltaVector(t, t);
    }
    ++report.trials;
    const double nl = norm_at(lower);
    const double nu = norm_at(upper);
    if (nu - nl <= kStrictSlack) {
      report.monotone = false;
      report.witness = MonotonicityWitness{lower, upper, nl, nu};
      break;
    }
  }
  return report;
}

Theorem1Report check_theorem1(const Constellation& c, std::size_t i, std::size_t trials, std::uint64_t seed) {
  return check_theorem1(build_dpcir(c, i), trials, seed);
}

}  // namespace slp

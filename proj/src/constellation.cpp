// SPDX-License-Identifier: Apache-2.0
#include "slp/constellation.hpp"

#include "slp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

namespace slp {

namespace {

double cross(const Vec2& o, const Vec2& a, const Vec2& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

using Polygon = std::vector<Vec2>;

// Sutherland-Hodgman clip of a convex polygon against {x | a^T x >= b}.
Polygon clip(const Polygon& poly, const Halfspace& h) {
  Polygon out;
  if (poly.empty()) return out;
  out.reserve(poly.size() + 1);
  for (std::size_t k = 0; k < poly.size(); ++k) {
    const Vec2& p = poly[k];
    const Vec2& q = poly[(k + 1) % poly.size()];
    const double sp = h.slack(p);
    const double sq = h.slack(q);
    if (sp >= 0.0) out.push_back(p);
    if ((sp >= 0.0) != (sq >= 0.0)) {
      const double lambda = sp / (sp - sq);
      out.push_back(p + lambda * (q - p));
    }
  }
  return out;
}

// True when the normals leave an angular gap of at least pi, i.e. the
// recession cone {d | A d >= 0} is nontrivial.
bool normals_leave_gap(const std::vector<Facet>& facets) {
  if (facets.empty()) return true;
  std::vector<double> angles;
  angles.reserve(facets.size());
  for (const auto& f : facets) angles.push_back(std::atan2(f.halfspace.normal.y(), f.halfspace.normal.x()));
  std::sort(angles.begin(), angles.end());
  double max_gap = angles.front() + 2.0 * std::numbers::pi - angles.back();
  for (std::size_t k = 1; k < angles.size(); ++k) max_gap = std::max(max_gap, angles[k] - angles[k - 1]);
  return max_gap >= std::numbers::pi - 1e-9;
}

bool on_segment(const Vec2& p, const Vec2& a, const Vec2& b, double tol) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return (p - a).norm() <= tol;
  const double lambda = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + lambda * ab)).norm() <= tol;
}

}  // namespace

Halfspace bisector(const Vec2& xi, const Vec2& xj) {
  const Vec2 a = xi - xj;
  if (a.squaredNorm() == 0.0) throw DegenerateConstellation("bisector: coincident points");
  return Halfspace{a, a.dot(xi + xj) / 2.0};
}

bool VoronoiRegion::contains(const Vec2& x, double tol) const {
  return std::all_of(facets.begin(), facets.end(), [&](const Facet& f) { return f.halfspace.contains(x, tol); });
}

Constellation Constellation::normalized(std::vector<Vec2> points) {
  if (points.size() < 2) throw DegenerateConstellation("constellation needs at least two points");
  double power = 0.0;
  for (const auto& p : points) power += p.squaredNorm();
  power /= static_cast<double>(points.size());
  if (!(power > 0.0) || !std::isfinite(power)) throw DegenerateConstellation("constellation has zero average power");
  const double s = 1.0 / std::sqrt(power);
  for (auto& p : points) p *= s;
  return Constellation(std::move(points), s);
}

Constellation Constellation::raw(std::vector<Vec2> points) { return Constellation(std::move(points), 1.0); }

Constellation::Constellation(std::vector<Vec2> points, double scale) : points_(std::move(points)), scale_(scale) {
  const std::size_t m = points_.size();
  if (m < 2) throw DegenerateConstellation("constellation needs at least two points");

  double max_norm = 0.0;
  for (const auto& p : points_) {
    if (!p.allFinite()) throw DegenerateConstellation("constellation point is not finite");
    max_norm = std::max(max_norm, p.norm());
  }
  if (max_norm == 0.0) throw DegenerateConstellation("constellation has zero average power");
  tol_ = kGeomTol * std::max(1.0, max_norm * max_norm);
  const double dist_tol = kGeomTol * std::max(1.0, max_norm);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j)
      if ((points_[i] - points_[j]).norm() <= dist_tol)
        throw DegenerateConstellation("duplicate constellation points " + std::to_string(i + 1) + " and " +
                                      std::to_string(j + 1));

  // Monotone chain; collinear points are dropped from the vertex list.
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (points_[a].x() != points_[b].x()) return points_[a].x() < points_[b].x();
    return points_[a].y() < points_[b].y();
  });
  std::vector<std::size_t> chain(2 * m);
  std::size_t k = 0;
  for (std::size_t idx = 0; idx < m; ++idx) {
    while (k >= 2 && cross(points_[chain[k - 2]], points_[chain[k - 1]], points_[order[idx]]) <= tol_) --k;
    chain[k++] = order[idx];
  }
  for (std::size_t idx = m - 1, lower = k + 1; idx-- > 0;) {
    while (k >= lower && cross(points_[chain[k - 2]], points_[chain[k - 1]], points_[order[idx]]) <= tol_) --k;
    chain[k++] = order[idx];
  }
  chain.resize(k - 1);
  hull_ = chain;
  collinear_ = hull_.size() < 3;
  if (collinear_) hull_ = {order.front(), order.back()};

  hull_vertex_.assign(m, false);
  for (auto v : hull_) hull_vertex_[v] = true;
  on_boundary_.assign(m, false);
  neighbors_.assign(m, std::nullopt);

  if (collinear_) {
    // All points on the segment; its two sides form the boundary.
    const Vec2 dir = points_[order.back()] - points_[order.front()];
    std::vector<std::size_t> line(order);
    std::sort(line.begin(), line.end(), [&](std::size_t a, std::size_t b) {
      return points_[a].dot(dir) < points_[b].dot(dir);
    });
    for (std::size_t p = 0; p < m; ++p) {
      on_boundary_[line[p]] = true;
      const std::size_t next = p + 1 < m ? line[p + 1] : line[p - 1];
      const std::size_t prev = p > 0 ? line[p - 1] : line[p + 1];
      neighbors_[line[p]] = std::make_pair(next, prev);
    }
    cycle_ = line;
    for (std::size_t p = m - 1; p-- > 1;) cycle_.push_back(line[p]);
  } else {
    for (std::size_t e = 0; e < hull_.size(); ++e) {
      const std::size_t va = hull_[e];
      const std::size_t vb = hull_[(e + 1) % hull_.size()];
      const Vec2& a = points_[va];
      const Vec2& b = points_[vb];
      std::vector<std::size_t> on_edge;
      for (std::size_t p = 0; p < m; ++p)
        if (p != va && p != vb && !hull_vertex_[p] && on_segment(points_[p], a, b, dist_tol)) on_edge.push_back(p);
      std::sort(on_edge.begin(), on_edge.end(), [&](std::size_t u, std::size_t v) {
        return (points_[u] - a).squaredNorm() < (points_[v] - a).squaredNorm();
      });
      cycle_.push_back(va);
      cycle_.insert(cycle_.end(), on_edge.begin(), on_edge.end());
    }
    for (auto p : cycle_) on_boundary_[p] = true;
    const std::size_t n = cycle_.size();
    for (std::size_t p = 0; p < n; ++p) neighbors_[cycle_[p]] = std::make_pair(cycle_[(p + 1) % n], cycle_[(p + n - 1) % n]);
  }

  // Origin containment (closed hull).
  const Vec2 origin = Vec2::Zero();
  if (collinear_) {
    origin_in_hull_ = on_segment(origin, points_[hull_[0]], points_[hull_[1]], dist_tol);
  } else {
    origin_in_hull_ = true;
    for (std::size_t e = 0; e < hull_.size(); ++e)
      if (cross(points_[hull_[e]], points_[hull_[(e + 1) % hull_.size()]], origin) < -tol_) origin_in_hull_ = false;
  }

  // Voronoi facets: a bisector is kept iff some point of the region cut by
  // the remaining bisectors violates it by more than the tolerance. The
  // region is clipped to a large box so the feasibility check is a finite
  // vertex scan.
  const double box = 1e6 * (1.0 + max_norm);
  const Polygon square = {Vec2(-box, -box), Vec2(box, -box), Vec2(box, box), Vec2(-box, box)};
  regions_.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    std::vector<Halfspace> cands(m);
    for (std::size_t j = 0; j < m; ++j)
      if (j != i) cands[j] = bisector(points_[i], points_[j]);
    VoronoiRegion region;
    region.owner = i;
    for (std::size_t j = 0; j < m; ++j) {
      if (j == i) continue;
      Polygon poly = square;
      for (std::size_t q = 0; q < m && !poly.empty(); ++q)
        if (q != i && q != j) poly = clip(poly, cands[q]);
      double violation = 0.0;
      for (const auto& v : poly) violation = std::max(violation, -cands[j].slack(v));
      if (violation > tol_) region.facets.push_back(Facet{j, cands[j]});
    }
    region.bounded = !normals_leave_gap(region.facets);
    regions_.push_back(std::move(region));
  }
}

double Constellation::mean_power() const {
  double power = 0.0;
  for (const auto& p : points_) power += p.squaredNorm();
  return power / static_cast<double>(points_.size());
}

std::optional<std::pair<std::size_t, std::size_t>> Constellation::boundary_neighbors(std::size_t i) const {
  return neighbors_.at(i);
}

Constellation normalize_unit_power(std::vector<Vec2> points) { return Constellation::normalized(std::move(points)); }

VoronoiRegion voronoi_region(const Constellation& c, std::size_t i) { return c.voronoi(i); }

bool is_boundary(const Constellation& c, std::size_t i) { return c.is_boundary(i); }

std::vector<std::size_t> convex_hull(const Constellation& c) { return c.hull_vertices(); }

bool origin_in_hull(const Constellation& c) { return c.origin_in_hull(); }

Constellation make_psk(std::size_t order, double phase) {
  if (order < 2) throw DegenerateConstellation("PSK order must be at least 2");
  std::vector<Vec2> pts;
  for (std::size_t k = 0; k < order; ++k) {
    const double ang = phase + 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(order);
    pts.emplace_back(std::cos(ang), std::sin(ang));
  }
  return Constellation::normalized(std::move(pts));
}

Constellation make_square_qam(std::size_t order) {
  const auto side = static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(order))));
  if (side < 2 || side * side != order) throw DegenerateConstellation("square QAM order must be a perfect square >= 4");
  std::vector<Vec2> pts;
  for (std::size_t q = 0; q < side; ++q)
    for (std::size_t p = 0; p < side; ++p)
      pts.emplace_back(2.0 * static_cast<double>(p) - static_cast<double>(side - 1),
                       2.0 * static_cast<double>(q) - static_cast<double>(side - 1));
  return Constellation::normalized(std::move(pts));
}

Constellation make_8opt() {
  std::vector<Vec2> pts = {Vec2::Zero()};
  for (int k = 0; k < 7; ++k) {
    const double ang = 2.0 * std::numbers::pi * k / 7.0;
    pts.emplace_back(std::cos(ang), std::sin(ang));
  }
  return Constellation::normalized(std::move(pts));
}

}  // namespace slp

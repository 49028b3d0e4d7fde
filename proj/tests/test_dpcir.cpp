// SPDX-License-Identifier: Apache-2.0
#include "oracles.hpp"
#include "slp/constellation.hpp"
#include "slp/dpcir.hpp"
#include "slp/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace slp;

namespace {

const double r2 = std::sqrt(2.0);

Constellation qpsk() { return make_psk(4, std::numbers::pi / 4); }
Constellation grid() { return Constellation::normalized(oracle::grid3x3()); }

std::vector<Constellation> centered() { return {qpsk(), make_psk(8), make_square_qam(16), grid(), make_8opt()}; }

// Random point of the region: through the slack parametrization for wedges
// and through the recession cone otherwise.
Vec2 sample(const DpcirRegion& r, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto mag = [&] { return u(rng) < 0.15 ? 0.0 : std::pow(10.0, -3.0 + 4.0 * u(rng)); };
  if (r.shape == RegionShape::Wedge && u(rng) < 0.5) return point_from_delta(r, DeltaVector(mag(), mag()));
  std::vector<double> mu(r.generators.size());
  for (auto& m : mu) m = mag();
  return point_from_generators(r, mu);
}

}  // namespace

TEST_CASE("QPSK corner region has two unit-margin rows") {
  const Constellation q = qpsk();
  const DpcirRegion r = build_dpcir(q, 0);
  REQUIRE(r.rows() == 2);
  CHECK(r.shape == RegionShape::Wedge);
  for (std::size_t k = 0; k < 2; ++k) {
    const Vec2 a = r.A.row(static_cast<Eigen::Index>(k)).transpose();
    const double d = (q.point(0) - q.point(r.neighbors[k])).norm();
    CHECK(std::abs(a.norm() - r2) < 1e-12);
    CHECK(std::abs(a.x() * a.y()) < 1e-12);
    CHECK(std::abs(r.b(k)) < 1e-12);
    CHECK(r.c(k) == doctest::Approx(d * a.norm() / 2.0));
    CHECK(r.c(k) == doctest::Approx(1.0));
  }
  REQUIRE(r.boundary_rows);
  CHECK(r.neighbors[r.boundary_rows->first] == 1);
  CHECK(r.neighbors[r.boundary_rows->second] == 3);
}

TEST_CASE("two-point region margin is d squared over two") {
  const Constellation c = Constellation::normalized({{1, 0}, {-1, 0}});
  const DpcirRegion r = build_dpcir(c, 0);
  REQUIRE(r.rows() == 1);
  CHECK(r.A.row(0).transpose().isApprox(Vec2(2, 0)));
  CHECK(std::abs(r.b(0)) < 1e-12);
  CHECK(r.c(0) == doctest::Approx(2.0));
  CHECK(r.shape == RegionShape::Halfplane);
}

TEST_CASE("interior grid point has a point region") {
  const DpcirRegion r = build_dpcir(grid(), 4);
  CHECK(r.shape == RegionShape::Point);
  CHECK_FALSE(r.boundary_rows);
  CHECK_FALSE(r.is_boundary());
  CHECK(r.generators.empty());
  CHECK(r.contains(r.vertex));
  CHECK_FALSE(r.contains(r.vertex + Vec2(1e-4, 0)));
  CHECK_THROWS_AS(point_from_delta(r, DeltaVector(0, 0)), InteriorPointRegion);
  CHECK_THROWS_AS(check_theorem1(grid(), 4, 10), InteriorPointRegion);
}

TEST_CASE("point_from_delta closed forms on QPSK") {
  const DpcirRegion r = build_dpcir(qpsk(), 0);
  CHECK(point_from_delta(r, DeltaVector(0, 0)).isApprox(qpsk().point(0), 1e-15));
  for (double t : {0.0, 0.25, 1.0, 7.5}) {
    const Vec2 x = point_from_delta(r, DeltaVector(t, t));
    CHECK((x - (1 + t) / r2 * Vec2(1, 1)).norm() < 1e-12);
    CHECK(x.norm() == doctest::Approx(1 + t));
  }
  CHECK((point_from_delta(r, DeltaVector(1, 0)) - Vec2(2 / r2, 1 / r2)).norm() < 1e-12);
  for (double d1 : {0.0, 0.3, 2.0})
    for (double d2 : {0.0, 0.7, 5.0})
      CHECK((point_from_delta(r, DeltaVector(d1, d2)) - Vec2((1 + d1) / r2, (1 + d2) / r2)).norm() < 1e-12);
}

TEST_CASE("DeltaVector rejects negative slacks") {
  CHECK_THROWS_AS(DeltaVector(-0.1, 0), DomainError);
  CHECK_THROWS_AS(DeltaVector(0, -1e-12), DomainError);
  CHECK_THROWS_AS(DeltaVector(std::nan(""), 0), DomainError);
  CHECK(DeltaVector(0, 1).strictly_below(DeltaVector(0.5, 2)));
  CHECK_FALSE(DeltaVector(0, 1).strictly_below(DeltaVector(0, 2)));
}

TEST_CASE("contains examples") {
  const Constellation q = qpsk();
  const DpcirRegion r = build_dpcir(q, 0);
  CHECK(contains(r, r.vertex));
  for (std::size_t j = 1; j < 4; ++j) {
    const Vec2 toward = (q.point(j) - q.point(0)).normalized();
    CHECK_FALSE(contains(r, r.vertex + 1e-6 * toward));
  }
  CHECK(contains(r, point_from_delta(r, DeltaVector(0.5, 0.5))));
}

TEST_CASE("vertex identity and row consistency") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  for (const auto& c : centered())
    for (const auto& r : build_all_dpcirs(c)) {
      CHECK((r.A * c.point(r.owner) - r.b - r.c).cwiseAbs().maxCoeff() < 1e-9);
      CHECK(r.vertex.isApprox(c.point(r.owner)));
      for (Eigen::Index k = 0; k < r.A.rows(); ++k) {
        const Vec2 a = c.point(r.owner) - c.point(r.neighbors[static_cast<std::size_t>(k)]);
        CHECK((r.A.row(k).transpose() - a).norm() < 1e-12);
        CHECK(std::abs(r.c(k) - a.squaredNorm() / 2.0) < 1e-12);
      }
      if (r.shape != RegionShape::Wedge) continue;
      for (int s = 0; s < 50; ++s) {
        const DeltaVector d(u(rng), u(rng));
        const Eigen::VectorXd slack = r.slack(point_from_delta(r, d));
        CHECK(std::abs(slack(static_cast<Eigen::Index>(r.boundary_rows->first)) - d.first()) < 1e-9);
        CHECK(std::abs(slack(static_cast<Eigen::Index>(r.boundary_rows->second)) - d.second()) < 1e-9);
        CHECK(slack.minCoeff() >= -1e-9);
      }
    }
}

TEST_CASE("boundary rows point at the boundary-cycle neighbors") {
  for (const auto& c : centered())
    for (const auto& r : build_all_dpcirs(c)) {
      CHECK(r.boundary_rows.has_value() == c.is_boundary(r.owner));
      if (!r.boundary_rows) continue;
      const auto nb = c.boundary_neighbors(r.owner);
      REQUIRE(nb);
      CHECK(r.neighbors[r.boundary_rows->first] == nb->first);
      CHECK(r.neighbors[r.boundary_rows->second] == nb->second);
    }
}

TEST_CASE("wedge edges are perpendicular to their boundary neighbors") {
  for (const auto& c : centered())
    for (const auto& r : build_all_dpcirs(c)) {
      if (r.shape == RegionShape::Wedge) {
        REQUIRE(r.edges.size() == 2);
        const std::size_t rows[2] = {r.boundary_rows->first, r.boundary_rows->second};
        for (std::size_t k = 0; k < 2; ++k) {
          const Vec2 a = c.point(r.owner) - c.point(r.neighbors[rows[k]]);
          CHECK(std::abs(r.edges[k].dot(a)) < 1e-9);
          CHECK(r.edges[k].norm() == doctest::Approx(1.0));
          CHECK((r.A * r.edges[k]).minCoeff() >= -1e-9);
        }
      } else if (r.shape == RegionShape::Ray) {
        REQUIRE(r.edges.size() == 1);
        for (std::size_t k : {r.boundary_rows->first, r.boundary_rows->second})
          CHECK(std::abs(r.edges[0].dot(c.point(r.owner) - c.point(r.neighbors[k]))) < 1e-9);
      }
    }
}

TEST_CASE("16-QAM edge points have ray regions") {
  const Constellation q = make_square_qam(16);
  std::size_t wedges = 0, rays = 0, points = 0;
  for (const auto& r : build_all_dpcirs(q)) {
    wedges += r.shape == RegionShape::Wedge;
    rays += r.shape == RegionShape::Ray;
    points += r.shape == RegionShape::Point;
    if (r.shape == RegionShape::Ray) {
      CHECK_THROWS_AS(point_from_delta(r, DeltaVector(0.1, 0.1)), DegenerateRegion);
      const Vec2 x = point_along_ray(r, 0.5);
      CHECK(r.contains(x));
      CHECK(x.norm() > r.vertex.norm());
    }
  }
  CHECK(wedges == 4);
  CHECK(rays == 8);
  CHECK(points == 4);
}

TEST_CASE("sampled region points keep their distances") {
  std::mt19937_64 rng(29);
  for (const auto& c : centered()) {
    const auto regions = build_all_dpcirs(c);
    for (const auto& r : regions) {
      const Vec2 xi = c.point(r.owner);
      for (int s = 0; s < 200; ++s) {
        const Vec2 x = sample(r, rng);
        CHECK(r.contains(x));
        // inside the owner's decision region
        CHECK(c.voronoi(r.owner).contains(x, 1e-9));
        const double moved = (x - xi).squaredNorm();
        for (std::size_t j = 0; j < c.size(); ++j) {
          if (j == r.owner) continue;
          const double gain = (x - c.point(j)).squaredNorm() - (xi - c.point(j)).squaredNorm();
          CHECK(gain >= moved * (1 - 1e-9) - 1e-9);
          if (moved > 1e-6) CHECK(gain > 0.0);
        }
        for (const auto& other : regions) {
          if (other.owner == r.owner) continue;
          const Vec2 y = sample(other, rng);
          CHECK((x - y).norm() >= (xi - c.point(other.owner)).norm() - 1e-9);
        }
      }
    }
  }
}

TEST_CASE("lemma 3 holds when the origin is inside the hull") {
  for (const auto& c : centered()) {
    REQUIRE(c.origin_in_hull());
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (!c.is_boundary(i)) continue;
      const Lemma3Report rep = check_lemma3(c, i, 400);
      CHECK(rep.holds);
      CHECK_FALSE(rep.witness);
      CHECK(rep.sampled > 0);
    }
  }
}

TEST_CASE("lemma 3 fails somewhere on shifted QPSK") {
  const Constellation s = Constellation::raw(oracle::shifted(qpsk().points(), {10, 10}));
  REQUIRE_FALSE(s.origin_in_hull());
  std::size_t failures = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const Lemma3Report rep = check_lemma3(s, i, 400);
    if (rep.holds) continue;
    ++failures;
    REQUIRE(rep.witness);
    CHECK(build_dpcir(s, i).contains(*rep.witness));
    CHECK(rep.witness->norm() < s.point(i).norm());
  }
  CHECK(failures >= 1);
}

TEST_CASE("lemma 3 fails for the near point of a one-sided pair") {
  const Constellation c = Constellation::raw({{1, 0}, {3, 0}});
  const Lemma3Report rep = check_lemma3(c, 0, 400);
  CHECK_FALSE(rep.holds);
  REQUIRE(rep.witness);
  CHECK(rep.witness->norm() < 1.0);
  // Slack 1 on the single row moves the point to (0.5, 0).
  const DpcirRegion r = build_dpcir(c, 0);
  const Vec2 toward(0.5, 0.0);
  CHECK(r.contains(toward));
  CHECK(std::abs(r.slack(toward)(0) - 1.0) < 1e-12);
  CHECK(toward.norm() < 1.0);
  CHECK(check_lemma3(c, 1, 400).holds);
  CHECK_THROWS_AS(check_theorem1(c, 0, 10), DegenerateRegion);
}

TEST_CASE("theorem 1 holds on every boundary point of centered constellations") {
  for (const auto& c : centered())
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (!c.is_boundary(i)) continue;
      const Theorem1Report rep = check_theorem1(c, i, 1000);
      CHECK(rep.monotone);
      CHECK(rep.trials == 1000);
      CHECK_FALSE(rep.witness);
    }
}

TEST_CASE("theorem 1 fails with a witness on shifted QPSK") {
  const Constellation s = Constellation::raw(oracle::shifted(qpsk().points(), {10, 10}));
  std::size_t failing = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const Theorem1Report rep = check_theorem1(s, i, 1000);
    if (rep.monotone) continue;
    ++failing;
    REQUIRE(rep.witness);
    CHECK(rep.witness->lower.strictly_below(rep.witness->upper));
    const DpcirRegion r = build_dpcir(s, i);
    CHECK(point_from_delta(r, rep.witness->lower).norm() == doctest::Approx(rep.witness->norm_lower));
    CHECK(rep.witness->norm_upper <= rep.witness->norm_lower + kStrictSlack);
  }
  CHECK(failing >= 1);
}

TEST_CASE("theorem 1 closed form on the QPSK corner") {
  const DpcirRegion r = build_dpcir(qpsk(), 0);
  CHECK(point_from_delta(r, DeltaVector(0, 0)).norm() == doctest::Approx(1.0));
  CHECK(point_from_delta(r, DeltaVector(1, 1)).norm() == doctest::Approx(2.0));
}

TEST_CASE("monotonicity needs a wedge opening of at most a right angle") {
  // Equilateral triangle around the origin: each hull angle is 60 degrees,
  // so the wedge opens 120 degrees and a large first slack makes the norm
  // dip as the second one grows.
  std::vector<Vec2> tri;
  for (int k = 0; k < 3; ++k)
    tri.emplace_back(std::cos(std::numbers::pi / 2 + 2 * std::numbers::pi * k / 3),
                     std::sin(std::numbers::pi / 2 + 2 * std::numbers::pi * k / 3));
  const Constellation c = Constellation::raw(tri);
  REQUIRE(c.origin_in_hull());
  const DpcirRegion r = build_dpcir(c, 0);
  REQUIRE(r.shape == RegionShape::Wedge);
  CHECK(r.edges[0].dot(r.edges[1]) == doctest::Approx(-0.5));
  const double n0 = point_from_delta(r, DeltaVector(3, 0)).norm();
  const double n1 = point_from_delta(r, DeltaVector(3, 0.5)).norm();
  CHECK(n0 == doctest::Approx(std::sqrt(7.0)));
  CHECK(n1 < n0);
  const Theorem1Report rep = check_theorem1(c, 0, 1000);
  CHECK_FALSE(rep.monotone);
  REQUIRE(rep.witness);
  CHECK(rep.witness->norm_upper <= rep.witness->norm_lower + kStrictSlack);
  // The norm bound itself is unaffected.
  CHECK(check_lemma3(c, 0, 900).holds);
}

TEST_CASE("random centered constellations: monotone on non-obtuse wedges") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int tested = 0, acute = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Vec2> pts;
    while (pts.size() < static_cast<std::size_t>(4 + trial % 8)) {
      const Vec2 p(u(rng), u(rng));
      bool far = true;
      for (const auto& q : pts) far = far && (p - q).norm() > 0.05;
      if (far) pts.push_back(p);
    }
    const Constellation c = Constellation::raw(pts);
    if (!c.origin_in_hull() || c.collinear()) continue;
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (!c.is_boundary(i)) continue;
      CHECK(check_lemma3(c, i, 100).holds);
      const DpcirRegion r = build_dpcir(c, i);
      if (r.shape == RegionShape::Wedge && r.edges[0].dot(r.edges[1]) < 0.0) {
        ++acute;
        continue;
      }
      ++tested;
      CHECK(check_theorem1(r, 200, static_cast<std::uint64_t>(trial)).monotone);
    }
  }
  CHECK(tested > 100);
  CHECK(acute > 0);
}

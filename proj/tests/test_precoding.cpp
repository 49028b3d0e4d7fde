// SPDX-License-Identifier: Apache-2.0
#include "oracles.hpp"
#include "slp/errors.hpp"
#include "slp/precoding.hpp"

#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

using namespace slp;

namespace {

std::shared_ptr<const Alphabet> qpsk() { return make_alphabet(make_psk(4, std::numbers::pi / 4)); }

ComplexChannel scalar_channel(std::complex<double> h) {
  ComplexChannel ch;
  ch.rows = Eigen::MatrixXcd::Constant(1, 1, h);
  return ch;
}

PrecodingInstance single_user(double pmax, double sigma = 1.0) {
  return make_instance(qpsk(), scalar_channel(1.0), SymbolAssignment({0}), sigma, pmax);
}

PrecodingInstance random_instance(const std::shared_ptr<const Alphabet>& a, std::size_t k, std::size_t n, double pmax,
                                  std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ComplexChannel ch = sample_channel(k, n, rng);
  SymbolAssignment sym = sample_symbols(k, a->size(), rng);
  return make_instance(a, ch, std::move(sym), 1.0, pmax);
}

// Every user's noiseless received signal lies in its scaled region.
double containment_gap(const PrecodingInstance& inst, const Eigen::VectorXd& u) {
  double worst = 0.0;
  for (std::size_t k = 0; k < inst.users(); ++k) {
    const DpcirRegion& r = inst.alphabet->regions[inst.symbols[k]];
    const Vec2 y = inst.channels[k].H * u;
    const Eigen::VectorXd need = inst.sigma * (r.b + r.c);
    const Eigen::VectorXd have = r.A * y;
    for (Eigen::Index j = 0; j < need.size(); ++j)
      worst = std::max(worst, (need(j) - have(j)) / (1.0 + std::abs(need(j))));
  }
  return worst;
}

double min_boundary_power(const PrecodingInstance& inst, const Eigen::VectorXd& u) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t k : inst.boundary_users()) m = std::min(m, (inst.channels[k].H * u).squaredNorm());
  return m;
}

}  // namespace

TEST_CASE("single-user joint optimum matches the closed form") {
  for (double pmax : {4.0, 9.0, 2.25, 100.0}) {
    const PrecodingInstance inst = single_user(pmax);
    const SlpSolution s = solve_joint(inst);
    REQUIRE(s.optimal());
    const double t = std::sqrt(pmax) - 1.0;
    CHECK(s.t == doctest::Approx(t).epsilon(1e-6));
    CHECK(s.min_power == doctest::Approx(pmax).epsilon(1e-6));
    CHECK(s.check.ok());
    CHECK(s.deltas[0].first() == doctest::Approx(t).epsilon(1e-6));
    CHECK(s.deltas[0].second() == doctest::Approx(t).epsilon(1e-6));
  }
  const SlpSolution s = solve_joint(single_user(4.0));
  CHECK(std::abs(s.t - 1.0) < 1e-6);
  CHECK(s.u_tilde.size() == 2);
  CHECK(s.u_tilde(0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-6));
  CHECK(s.u_tilde(1) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-6));
}

TEST_CASE("joint program layout") {
  const PrecodingInstance inst = single_user(4.0);
  const SlpProgram sp = build_joint(inst);
  CHECK(sp.formulation == Formulation::Joint);
  CHECK(sp.u.size == 2);
  CHECK(sp.program.equalities().size() == 2);
  CHECK(sp.program.lower_bounds().size() == 2);
  REQUIRE(sp.slots.size() == 1);
  CHECK(sp.slots[0].role == UserRole::Wedge);
  CHECK(sp.slots[0].delta1);
  CHECK(sp.slots[0].delta2);
  CHECK(sp.program.ball()->radius_sq == 4.0);
  CHECK_NOTHROW(sp.program.validate());
}

TEST_CASE("power budget at the vertex gives zero slack") {
  const SlpSolution s = solve_joint(single_user(1.0));
  REQUIRE(s.optimal());
  CHECK(std::abs(s.t) < 1e-6);
  CHECK((s.u_tilde - Eigen::Vector2d(1, 1) / std::sqrt(2.0)).norm() < 1e-5);
  CHECK(s.check.ok());
}

TEST_CASE("power budget below the vertex is infeasible") {
  for (double pmax : {0.9, 0.5, 0.0}) {
    const SlpSolution s = solve_joint(single_user(pmax));
    CHECK(s.status == conic::Status::Infeasible);
    CHECK_FALSE(s.diagnostic.empty());
  }
  // with sigma = 2 the vertex needs power 4
  CHECK(solve_joint(single_user(3.9, 2.0)).status == conic::Status::Infeasible);
  CHECK(solve_joint(single_user(4.1, 2.0)).optimal());
}

TEST_CASE("fixed form closed form") {
  const PrecodingInstance inst = single_user(4.0);
  const SlpSolution s = solve_fixed(inst, {0.0});
  REQUIRE(s.optimal());
  CHECK(s.formulation == Formulation::Fixed);
  // (1 + (1 + t)^2) / 2 = 4
  CHECK(std::abs(s.t - (std::sqrt(7.0) - 1.0)) < 1e-6);
  CHECK(s.deltas[0].first() == 0.0);
  CHECK(s.check.ok());

  for (double d1 : {0.5, 1.0, 1.5}) {
    const SlpSolution f = solve_fixed(inst, {d1});
    REQUIRE(f.optimal());
    CHECK(f.t == doctest::Approx(std::sqrt(8.0 - (1 + d1) * (1 + d1)) - 1.0).epsilon(1e-6));
    CHECK(f.deltas[0].first() == doctest::Approx(d1));
  }
}

TEST_CASE("fixed form with an unreachable first slack is infeasible") {
  const SlpSolution s = solve_fixed(single_user(1.0), {10.0});
  CHECK(s.status == conic::Status::Infeasible);
}

TEST_CASE("fixing the joint first slacks never lowers t") {
  auto a = make_alphabet(make_psk(8));
  int compared = 0;
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const PrecodingInstance inst = random_instance(a, 2 + seed % 3, 4, 10.0, seed);
    const SlpSolution j = solve_joint(inst);
    if (!j.optimal()) continue;
    std::vector<double> d1;
    for (std::size_t k : inst.boundary_users()) d1.push_back(j.deltas[k].first());
    const SlpSolution f = solve_fixed(inst, d1);
    REQUIRE(f.optimal());
    CHECK(f.t >= j.t - 1e-6);
    ++compared;
  }
  CHECK(compared > 30);
  const PrecodingInstance one = single_user(4.0);
  CHECK(solve_fixed(one, {1.0}).t >= solve_joint(one).t - 1e-6);
}

TEST_CASE("build_fixed rejects bad first slacks") {
  const PrecodingInstance inst = single_user(4.0);
  CHECK_THROWS_AS(build_fixed(inst, {-0.5}), DomainError);
  CHECK_THROWS_AS(build_fixed(inst, {}), DomainError);
  CHECK_THROWS_AS(build_fixed(inst, {0.0, 0.0}), DomainError);
  CHECK_THROWS_AS(build_fixed(inst, {std::nan("")}), DomainError);

  // 16-QAM edge symbol: its region is a ray and has no free first slack
  auto q = make_alphabet(make_square_qam(16));
  std::size_t edge = q->size();
  for (std::size_t i = 0; i < q->size(); ++i)
    if (q->regions[i].shape == RegionShape::Ray) edge = i;
  REQUIRE(edge < q->size());
  const PrecodingInstance ray = make_instance(q, scalar_channel(1.0), SymbolAssignment({edge}), 1.0, 10.0);
  CHECK(ray.role(0) == UserRole::Ray);
  CHECK(ray.wedge_users().empty());
  CHECK(ray.boundary_users().size() == 1);
  CHECK_THROWS_AS(build_fixed(ray, {0.5}), DomainError);
  const SlpSolution s = solve_fixed(ray, {0.0});
  REQUIRE(s.optimal());
  CHECK(s.deltas[0].first() == doctest::Approx(s.deltas[0].second()));
  const SlpSolution j = solve_joint(ray);
  REQUIRE(j.optimal());
  CHECK(j.min_power == doctest::Approx(10.0).epsilon(1e-5));
  CHECK(j.t == doctest::Approx(s.t).epsilon(1e-6));
}

TEST_CASE("make_instance validates its inputs") {
  const auto a = qpsk();
  CHECK_THROWS_AS(make_instance(a, scalar_channel(1.0), SymbolAssignment({4}), 1.0, 1.0), DomainError);
  CHECK_THROWS_AS(make_instance(a, scalar_channel(1.0), SymbolAssignment({0, 1}), 1.0, 1.0), DomainError);
  CHECK_THROWS_AS(make_instance(a, scalar_channel(1.0), SymbolAssignment({0}), 0.0, 1.0), DomainError);
  CHECK_THROWS_AS(make_instance(a, scalar_channel(1.0), SymbolAssignment({0}), 1.0, -1.0), DomainError);
  CHECK_THROWS_AS(make_instance(nullptr, scalar_channel(1.0), SymbolAssignment({0}), 1.0, 1.0), DomainError);
  const auto line = make_alphabet(Constellation::normalized({{-1, 0}, {0, 0}, {1, 0}}));
  CHECK_THROWS_AS(make_instance(line, scalar_channel(1.0), SymbolAssignment({0}), 1.0, 1.0), DomainError);
}

TEST_CASE("all-interior assignment pins every user") {
  const auto g = make_alphabet(Constellation::normalized(oracle::grid3x3()));
  std::mt19937_64 rng(4);
  const ComplexChannel ch = sample_channel(3, 4, rng);
  const PrecodingInstance inst = make_instance(g, ch, SymbolAssignment({4, 4, 4}), 1.0, 10.0);
  CHECK(inst.boundary_users().empty());
  const SlpSolution s = solve_joint(inst);
  REQUIRE(s.optimal());
  CHECK(s.all_interior);
  CHECK(s.t == 0.0);
  for (std::size_t k = 0; k < 3; ++k) CHECK((inst.channels[k].H * s.u_tilde).norm() < 1e-9);
  // minimum-norm solution of a homogeneous system
  CHECK(s.u_tilde.norm() < 1e-9);

  // a nonzero interior symbol on a 16-QAM grid
  const auto q = make_alphabet(make_square_qam(16));
  std::size_t inner = q->size();
  for (std::size_t i = 0; i < q->size(); ++i)
    if (q->regions[i].shape == RegionShape::Point) inner = i;
  const PrecodingInstance pin = make_instance(q, ch, SymbolAssignment({inner, inner, inner}), 1.0, 10.0);
  const SlpSolution p = solve_joint(pin);
  REQUIRE(p.optimal());
  CHECK(p.all_interior);
  Eigen::MatrixXd H(6, 8);
  Eigen::VectorXd rhs(6);
  for (std::size_t k = 0; k < 3; ++k) {
    H.middleRows(static_cast<Eigen::Index>(2 * k), 2) = pin.channels[k].H;
    rhs.segment(static_cast<Eigen::Index>(2 * k), 2) = q->constellation.point(inner);
  }
  CHECK((p.u_tilde - H.completeOrthogonalDecomposition().solve(rhs)).norm() < 1e-8);
  CHECK(p.check.ok());
}

TEST_CASE("joint solutions saturate the power budget and stay in their regions") {
  for (const auto& a : {make_alphabet(make_psk(8)), make_alphabet(make_square_qam(16)), make_alphabet(make_8opt())}) {
    int optimal = 0;
    for (std::uint64_t seed = 0; seed < 80; ++seed) {
      const std::size_t k = 1 + seed % 4;
      const double pmax = std::pow(10.0, static_cast<double>(seed % 5) / 2.0);
      const PrecodingInstance inst = random_instance(a, k, 4, pmax, 100 + seed);
      const SlpSolution s = solve_joint(inst);
      CHECK(s.status != conic::Status::NumericalFailure);
      if (!s.optimal()) continue;
      ++optimal;
      CHECK(s.check.ok());
      CHECK(containment_gap(inst, s.u_tilde) <= 1e-6);
      if (!s.all_interior) {
        CHECK(std::abs(s.u_tilde.squaredNorm() / pmax - 1.0) <= 1e-5);
        CHECK(s.min_power == doctest::Approx(min_boundary_power(inst, s.u_tilde)).epsilon(1e-12));
        for (std::size_t u : inst.boundary_users()) {
          CHECK(s.deltas[u].first() >= s.t - 1e-7);
          CHECK(s.deltas[u].second() >= s.t - 1e-7);
        }
      }
      const InvariantCheck again = verify_solution(build_joint(inst), s);
      CHECK(again.ok());
    }
    CHECK(optimal > 20);
  }
}

TEST_CASE("min power does not decrease with the budget") {
  const auto a = make_alphabet(make_psk(8));
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    std::mt19937_64 rng(seed);
    const std::size_t k = 2 + seed % 3;
    const ComplexChannel ch = sample_channel(k, 4, rng);
    const SymbolAssignment sym = sample_symbols(k, 8, rng);
    double prev = -1.0;
    for (double db = 0.0; db <= 20.0; db += 2.0) {
      const SlpSolution s = solve_joint(make_instance(a, ch, sym, 1.0, std::pow(10.0, db / 10.0)));
      if (!s.optimal()) {
        CHECK(prev < 0.0);  // once feasible, stays feasible
        continue;
      }
      CHECK(s.min_power >= prev - 1e-9 * (1 + prev));
      prev = s.min_power;
    }
  }
}

TEST_CASE("a common channel phase changes nothing") {
  const auto a = make_alphabet(make_psk(8));
  std::uniform_real_distribution<double> ang(0.0, 2 * std::numbers::pi);
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    std::mt19937_64 rng(seed + 700);
    const std::size_t k = 1 + seed % 4;
    ComplexChannel ch = sample_channel(k, 4, rng);
    const SymbolAssignment sym = sample_symbols(k, 8, rng);
    const SlpSolution s0 = solve_joint(make_instance(a, ch, sym, 1.0, 10.0));
    ch.rows *= std::polar(1.0, ang(rng));
    const SlpSolution s1 = solve_joint(make_instance(a, ch, sym, 1.0, 10.0));
    REQUIRE(s0.status == s1.status);
    if (!s0.optimal()) continue;
    CHECK(std::abs(s0.t - s1.t) < 1e-8);
    for (std::size_t u = 0; u < k; ++u) CHECK(std::abs(s0.per_user_power[u] - s1.per_user_power[u]) < 1e-8);
  }
}

TEST_CASE("exhaustive search over the default grid") {
  const auto a = make_alphabet(make_psk(8));
  const PrecodingInstance inst = random_instance(a, 4, 4, 100.0, 9);
  REQUIRE(inst.wedge_users().size() == 4);
  std::size_t seen = 0, violations = 0;
  const ExhaustiveResult ex = exhaustive_search(inst, make_grid(0.0, 0.5, 2.5),
                                                [&](const std::vector<double>& d1, const SlpSolution& s) {
                                                  ++seen;
                                                  CHECK(d1.size() == 4);
                                                  if (s.optimal() && !s.check.ok()) ++violations;
                                                });
  CHECK(ex.evaluated == 1296);
  CHECK(seen == 1296);
  CHECK(violations == 0);
  REQUIRE(ex.best.optimal());
  CHECK(ex.best.formulation == Formulation::Fixed);
  CHECK(ex.feasible <= ex.evaluated);
  CHECK(ex.best_delta1.size() == 4);
}

TEST_CASE("single-user exhaustive search") {
  const PrecodingInstance inst = single_user(4.0);
  const SlpSolution joint = solve_joint(inst);
  double best_min_slack = -1.0, arg = -1.0;
  const ExhaustiveResult ex =
      exhaustive_search(inst, {1.0, 0.0, 0.5}, [&](const std::vector<double>& d1, const SlpSolution& s) {
        REQUIRE(s.optimal());
        // power stays at the budget for every candidate
        CHECK(s.min_power == doctest::Approx(4.0).epsilon(1e-6));
        const double m = std::min(d1[0], s.t);
        if (m > best_min_slack) {
          best_min_slack = m;
          arg = d1[0];
        }
      });
  CHECK(ex.evaluated == 3);
  REQUIRE(ex.best.optimal());
  CHECK(ex.best.min_power >= joint.min_power - 1e-6);
  // equal achieved powers: the smallest grid value wins the tie
  CHECK(ex.best_delta1 == std::vector<double>{0.0});
  // the slack balance point sits at delta1 = 1, where the candidate equals the joint optimum
  CHECK(arg == 1.0);
  CHECK(best_min_slack == doctest::Approx(joint.t).epsilon(1e-6));
}

TEST_CASE("a one-point grid reduces to the fixed form at zero") {
  const auto a = make_alphabet(make_psk(8));
  const PrecodingInstance inst = random_instance(a, 3, 4, 10.0, 21);
  const ExhaustiveResult ex = exhaustive_search(inst, {0.0});
  const SlpSolution f = solve_fixed(inst, std::vector<double>(inst.boundary_users().size(), 0.0));
  CHECK(ex.evaluated == 1);
  REQUIRE(ex.best.optimal());
  REQUIRE(f.optimal());
  CHECK(ex.best.t == doctest::Approx(f.t));
  CHECK(ex.best.min_power == doctest::Approx(f.min_power));
}

TEST_CASE("exhaustive search errors and infeasibility") {
  const PrecodingInstance inst = single_user(4.0);
  CHECK_THROWS_AS(exhaustive_search(inst, {}), DomainError);
  CHECK_THROWS_AS(exhaustive_search(inst, {0.0, -1.0}), DomainError);
  const ExhaustiveResult none = exhaustive_search(single_user(1.0), {5.0, 10.0});
  CHECK(none.best.status == conic::Status::Infeasible);
  CHECK(none.feasible == 0);
  CHECK(none.evaluated == 2);
}

TEST_CASE("duplicate and unsorted grids are normalized") {
  const PrecodingInstance inst = single_user(4.0);
  CHECK(exhaustive_search(inst, {0.5, 0.0, 0.5, 0.0}).evaluated == 2);
}

TEST_CASE("make_grid") {
  CHECK(make_grid(0.0, 0.5, 2.5) == std::vector<double>{0.0, 0.5, 1.0, 1.5, 2.0, 2.5});
  CHECK(make_grid(0.0, 0.125, 3.0).size() == 25);
  CHECK(make_grid(1.0, 1.0, 1.0) == std::vector<double>{1.0});
  CHECK_THROWS_AS(make_grid(0.0, 0.0, 1.0), DomainError);
  CHECK_THROWS_AS(make_grid(1.0, 0.5, 0.0), DomainError);
}

TEST_CASE("exhaustive search on a fine grid is at least the joint min power") {
  const auto a = make_alphabet(make_psk(8));
  const std::vector<double> grid = make_grid(0.0, 0.125, 3.0);
  int compared = 0, below = 0;
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const std::size_t k = 2 + s % 3, n = 2 + (s / 3) % 3;
    const PrecodingInstance inst = random_instance(a, k, n, 10.0, 5000 + s);
    const SlpSolution j = solve_joint(inst);
    if (!j.optimal()) continue;
    ++compared;
    const ExhaustiveResult ex = exhaustive_search(inst, grid);
    const double gap = ex.best.optimal() ? ex.best.min_power - j.min_power : -j.min_power;
    CAPTURE(s);
    CAPTURE(gap);
    CHECK(gap >= -1e-6);
    if (gap < -1e-6) ++below;
    worst = std::min(worst, gap);
  }
  MESSAGE("compared " << compared << " instances, " << below << " below the joint solution, worst gap " << worst);
  CHECK(compared > 50);
}

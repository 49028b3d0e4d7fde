// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "slp/conic.hpp"
#include "slp/constellation.hpp"
#include "slp/dpcir.hpp"
#include "slp/signal_model.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace slp {

// A constellation together with the DPCIR of each of its points.
struct Alphabet {
  Constellation constellation;
  std::vector<DpcirRegion> regions;

  explicit Alphabet(Constellation c);
  std::size_t size() const { return constellation.size(); }
};

std::shared_ptr<const Alphabet> make_alphabet(Constellation c);

// How a user's received signal enters the program.
enum class UserRole {
  Interior,  // pinned to sigma * x_i
  Wedge,     // two boundary-row slacks delta_1, delta_2
  Ray,       // sigma * (x_i + s e) along the single infinite edge
};

const char* to_string(UserRole role);

struct PrecodingInstance {
  std::shared_ptr<const Alphabet> alphabet;
  std::vector<RealChannel> channels;  // one per user
  SymbolAssignment symbols;
  double sigma = 1.0;
  double pmax = 1.0;  // linear power budget on ||u~||^2

  std::size_t users() const { return channels.size(); }
  std::size_t antennas() const { return channels.empty() ? 0 : channels.front().antennas(); }
  UserRole role(std::size_t k) const;
  // Users with a symbol on bd(conv), in user order.
  std::vector<std::size_t> boundary_users() const;
  // Boundary users whose region is a wedge (the ones carrying a delta_1).
  std::vector<std::size_t> wedge_users() const;

  // Throws DomainError on inconsistent sizes, sigma <= 0, pmax < 0, symbol
  // indices out of range, or a collinear constellation.
  void validate() const;
};

PrecodingInstance make_instance(std::shared_ptr<const Alphabet> alphabet, const ComplexChannel& channel,
                                SymbolAssignment symbols, double sigma, double pmax);

enum class Formulation { Joint, Fixed };

const char* to_string(Formulation f);

// Where each user's slack variables live inside the conic program.
struct UserSlot {
  UserRole role = UserRole::Interior;
  std::size_t region = 0;
  std::optional<std::size_t> delta1;  // variable index, joint wedge users
  std::optional<std::size_t> delta2;  // variable index, wedge users
  std::optional<std::size_t> ray;     // variable index, ray users
  double fixed_delta1 = 0.0;          // fixed-form wedge users
};

// The instance must outlive the program.
struct SlpProgram {
  const PrecodingInstance* instance = nullptr;
  Formulation formulation = Formulation::Joint;
  conic::ConicProgram program;
  conic::VariableBlock u;
  std::size_t t = 0;
  std::vector<UserSlot> slots;
};

SlpProgram build_joint(const PrecodingInstance& instance);
// delta1 holds one entry per boundary user (instance.boundary_users() order).
// Entries of ray users must be zero since their boundary-row slacks vanish
// identically. Throws DomainError on negative or misplaced entries.
SlpProgram build_fixed(const PrecodingInstance& instance, const std::vector<double>& delta1);

// Recomputed from the returned point, independently of the solver.
struct InvariantCheck {
  double power_excess = 0.0;          // ||u~||^2 / pmax - 1, clipped at 0
  double equality_residual = 0.0;     // max |lhs - rhs| / (1 + |rhs|)
  double bound_violation = 0.0;       // max (t - delta) over the bounded slacks
  double containment_violation = 0.0; // max over users of sigma (b + c) - A H u~, relative

  bool ok() const;
};

struct SlpSolution {
  conic::Status status = conic::Status::NumericalFailure;
  Formulation formulation = Formulation::Joint;
  bool all_interior = false;  // no boundary users; t reported as 0
  bool relaxed = false;
  Eigen::VectorXd u_tilde;
  std::vector<DeltaVector> deltas;  // per user; interior users (0, 0), rays (s, s)
  double t = 0.0;
  std::vector<double> per_user_power;
  // min over boundary users of the received power (all users when none).
  double min_power = 0.0;
  InvariantCheck check;
  int newton_steps = 0;
  std::string diagnostic;

  bool optimal() const { return status == conic::Status::Optimal; }
};

SlpSolution solve(const SlpProgram& program, const conic::Options& options = {});
InvariantCheck verify_solution(const SlpProgram& program, const SlpSolution& solution);

SlpSolution solve_joint(const PrecodingInstance& instance);
SlpSolution solve_fixed(const PrecodingInstance& instance, const std::vector<double>& delta1);

struct ExhaustiveResult {
  SlpSolution best;
  std::vector<double> best_delta1;  // per boundary user
  std::size_t evaluated = 0;
  std::size_t feasible = 0;
};

// Called for every solved candidate: (delta1 per boundary user, solution).
using CandidateObserver = std::function<void(const std::vector<double>&, const SlpSolution&)>;

// Fixed-form solve for every combination of grid values over the wedge users,
// in lexicographic order of the sorted grid. The best candidate maximizes the
// achieved min power; ties (within 1e-9 relative) keep the lexicographically
// smallest combination.
// When no candidate is optimal, best carries the status Infeasible.
ExhaustiveResult exhaustive_search(const PrecodingInstance& instance, std::vector<double> grid,
                                   const CandidateObserver& observer = {});

// start, start + step, ... up to end (inclusive within step * 1e-9).
std::vector<double> make_grid(double start, double step, double end);

}  // namespace slp

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

// Solver-agnostic description of the programs built by the precoder:
//
//   maximize    x[t]
//   subject to  sum_j a_j x[v_j] = rhs            (linear equalities)
//               x[v] >= alpha * x[t] + beta        (componentwise bounds)
//               ||x[ball block]||^2 <= radius_sq   (one Euclidean ball)
//
// together with a small log-barrier interior-point solver for that class.
namespace slp::conic {

struct VariableBlock {
  std::string name;
  std::size_t offset = 0;
  std::size_t size = 0;

  std::size_t operator[](std::size_t k) const { return offset + k; }
};

struct Term {
  std::size_t variable = 0;
  double coeff = 0.0;
};

struct LinearEquality {
  std::vector<Term> terms;
  double rhs = 0.0;
};

// x[variable] >= t_coeff * x[objective] + constant
struct LowerBound {
  std::size_t variable = 0;
  double t_coeff = 0.0;
  double constant = 0.0;
};

struct Ball {
  std::size_t offset = 0;
  std::size_t size = 0;
  double radius_sq = 0.0;
};

class ConicProgram {
 public:
  VariableBlock add_block(std::string name, std::size_t size);
  void set_objective(std::size_t variable);
  void add_equality(LinearEquality eq);
  void add_lower_bound(const LowerBound& lb);
  void set_ball(const VariableBlock& block, double radius_sq);

  std::size_t num_variables() const { return num_variables_; }
  const std::vector<VariableBlock>& blocks() const { return blocks_; }
  std::optional<VariableBlock> block(std::string_view name) const;
  std::size_t objective() const { return objective_.value(); }
  bool has_objective() const { return objective_.has_value(); }
  const std::vector<LinearEquality>& equalities() const { return equalities_; }
  const std::vector<LowerBound>& lower_bounds() const { return bounds_; }
  const std::optional<Ball>& ball() const { return ball_; }

  // Throws std::invalid_argument unless: one ball, an objective variable
  // that appears in no equality and is never itself bounded, and all
  // variable references in range.
  void validate() const;

  // max_r |a_r^T x - rhs_r| / (1 + |rhs_r|)
  double equality_residual(const Eigen::VectorXd& x) const;

 private:
  std::size_t num_variables_ = 0;
  std::vector<VariableBlock> blocks_;
  std::optional<std::size_t> objective_;
  std::vector<LinearEquality> equalities_;
  std::vector<LowerBound> bounds_;
  std::optional<Ball> ball_;
};

enum class Status { Optimal, Infeasible, NumericalFailure };

const char* to_string(Status status);

// ActiveSet follows the minimum-norm point of the bounds as t increases
// until the ball becomes tight; it needs every bound to involve t with a
// positive coefficient. Barrier is a two-phase log-barrier method for the
// whole class. Auto picks ActiveSet when it applies and falls back to
// Barrier when it reports a degenerate path.
enum class Algorithm { Auto, ActiveSet, Barrier };

const char* to_string(Algorithm algorithm);

struct Options {
  // Stop when (number of barrier terms) / mu falls below this.
  double gap_tolerance = 1e-10;
  // Phase-I maximal slack below -feasibility_tolerance means infeasible;
  // within +-feasibility_tolerance the feasible set is treated as having
  // empty interior and is relaxed by relaxation before phase II.
  double feasibility_tolerance = 1e-9;
  double relaxation = 1e-9;
  int max_newton_steps = 600;
  Algorithm algorithm = Algorithm::Auto;
};

struct Result {
  Status status = Status::NumericalFailure;
  Eigen::VectorXd x;
  double objective = 0.0;
  Algorithm algorithm = Algorithm::Barrier;  // the one that produced the result
  int newton_steps = 0;                      // or active-set pivots
  bool relaxed = false;
  std::string diagnostic;
};

// When the objective variable is referenced by no bound and there are no
// bounds, the objective is unconstrained: the minimum-norm solution of the
// equalities is returned with the objective variable set to 0.
Result solve(const ConicProgram& program, const Options& options = {});

}  // namespace slp::conic

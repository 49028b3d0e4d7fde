// SPDX-License-Identifier: Apache-2.0
#include "slp/conic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace slp::conic {

VariableBlock ConicProgram::add_block(std::string name, std::size_t size) {
  VariableBlock b{std::move(name), num_variables_, size};
  num_variables_ += size;
  blocks_.push_back(b);
  return b;
}

void ConicProgram::set_objective(std::size_t variable) { objective_ = variable; }

void ConicProgram::add_equality(LinearEquality eq) { equalities_.push_back(std::move(eq)); }

void ConicProgram::add_lower_bound(const LowerBound& lb) { bounds_.push_back(lb); }

void ConicProgram::set_ball(const VariableBlock& block, double radius_sq) {
  if (ball_) throw std::invalid_argument("program already has a ball constraint");
  ball_ = Ball{block.offset, block.size, radius_sq};
}

std::optional<VariableBlock> ConicProgram::block(std::string_view name) const {
  for (const auto& b : blocks_)
    if (b.name == name) return b;
  return std::nullopt;
}

void ConicProgram::validate() const {
  if (!objective_ || *objective_ >= num_variables_) throw std::invalid_argument("program has no valid objective variable");
  if (!ball_) throw std::invalid_argument("program needs exactly one ball constraint");
  if (ball_->offset + ball_->size > num_variables_) throw std::invalid_argument("ball block out of range");
  if (!(ball_->radius_sq >= 0.0)) throw std::invalid_argument("ball radius must be nonnegative");
  if (ball_->offset <= *objective_ && *objective_ < ball_->offset + ball_->size)
    throw std::invalid_argument("objective variable may not lie in the ball block");
  for (const auto& eq : equalities_)
    for (const auto& term : eq.terms) {
      if (term.variable >= num_variables_) throw std::invalid_argument("equality references unknown variable");
      if (term.variable == *objective_ && term.coeff != 0.0)
        throw std::invalid_argument("objective variable may not appear in equalities");
    }
  for (const auto& lb : bounds_) {
    if (lb.variable >= num_variables_) throw std::invalid_argument("bound references unknown variable");
    if (lb.variable == *objective_) throw std::invalid_argument("objective variable may not be bounded directly");
    if (!(lb.t_coeff >= 0.0) || !std::isfinite(lb.t_coeff) || !std::isfinite(lb.constant))
      throw std::invalid_argument("bound coefficients must be finite with a nonnegative objective coefficient");
  }
}

double ConicProgram::equality_residual(const Eigen::VectorXd& x) const {
  double worst = 0.0;
  for (const auto& eq : equalities_) {
    double lhs = 0.0;
    for (const auto& term : eq.terms) lhs += term.coeff * x(static_cast<Eigen::Index>(term.variable));
    worst = std::max(worst, std::abs(lhs - eq.rhs) / (1.0 + std::abs(eq.rhs)));
  }
  return worst;
}

const char* to_string(Status status) {
  switch (status) {
    case Status::Optimal: return "optimal";
    case Status::Infeasible: return "infeasible";
    case Status::NumericalFailure: return "numerical_failure";
  }
  return "unknown";
}

const char* to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::Auto: return "auto";
    case Algorithm::ActiveSet: return "active_set";
    case Algorithm::Barrier: return "barrier";
  }
  return "unknown";
}

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// h(xi) = cap - ||C xi + d||^2 + l^T xi > 0
struct Quadratic {
  MatrixXd C;
  VectorXd d;
  VectorXd l;
  double cap = 0.0;

  double value(const VectorXd& xi) const { return cap - (C * xi + d).squaredNorm() + l.dot(xi); }
};

// maximize g^T xi + barrier, rows W xi + w0 > 0 and quadratics > 0.
struct Barrier {
  VectorXd g;
  MatrixXd W;
  VectorXd w0;
  std::vector<Quadratic> quads;

  Index dim() const { return g.size(); }
  double terms() const { return static_cast<double>(W.rows() + static_cast<Index>(quads.size())); }

  bool strictly_feasible(const VectorXd& xi) const {
    if (W.rows() > 0 && ((W * xi + w0).array() <= 0.0).any()) return false;
    return std::all_of(quads.begin(), quads.end(), [&](const Quadratic& q) { return q.value(xi) > 0.0; });
  }

  double value(const VectorXd& xi, double mu) const {
    double f = mu * g.dot(xi);
    if (W.rows() > 0) f += (W * xi + w0).array().log().sum();
    for (const auto& q : quads) f += std::log(q.value(xi));
    return f;
  }

  void derivatives(const VectorXd& xi, double mu, VectorXd& grad, MatrixXd& neg_hess) const {
    grad = mu * g;
    neg_hess.setZero(dim(), dim());
    if (W.rows() > 0) {
      const VectorXd inv = (W * xi + w0).cwiseInverse();
      grad.noalias() += W.transpose() * inv;
      const MatrixXd scaled = inv.asDiagonal() * W;
      neg_hess.noalias() += scaled.transpose() * scaled;
    }
    for (const auto& q : quads) {
      const VectorXd res = q.C * xi + q.d;
      const double h = q.cap - res.squaredNorm() + q.l.dot(xi);
      const VectorXd dh = -2.0 * q.C.transpose() * res + q.l;
      grad.noalias() += dh / h;
      neg_hess.noalias() += (2.0 / h) * q.C.transpose() * q.C;
      neg_hess.noalias() += (dh * dh.transpose()) / (h * h);
    }
  }
};

enum class BarrierExit { Converged, EarlyStop, Failed };

// Weight on the objective that best centers xi: argmin_mu of the Newton
// decrement of mu * g + grad(phi), clamped to a sane range.
double initial_weight(const Barrier& bar, const VectorXd& xi) {
  VectorXd grad;
  MatrixXd neg_hess;
  bar.derivatives(xi, 0.0, grad, neg_hess);
  Eigen::LDLT<MatrixXd> ldlt(neg_hess);
  if (ldlt.info() != Eigen::Success) return 1.0;
  const VectorXd hg = ldlt.solve(bar.g);
  const double denom = bar.g.dot(hg);
  if (!(denom > 0.0)) return 1.0;
  const double mu = grad.dot(hg) / denom;
  return std::clamp(std::isfinite(mu) ? mu : 1.0, 1e-3, 1e3);
}

// Barrier path following from a strictly feasible xi. `early` is checked after
// every Newton step.
template <typename Early>
BarrierExit follow_path(const Barrier& bar, VectorXd& xi, double gap_tol, int& budget, int& steps, Early early) {
  double mu = initial_weight(bar, xi);
  const double nu = std::max(1.0, bar.terms());
  VectorXd grad, step, trial;
  MatrixXd neg_hess;
  while (true) {
    const bool last = nu / mu < gap_tol;
    for (int inner = 0; inner < 80; ++inner) {
      if (budget-- <= 0) return BarrierExit::Failed;
      ++steps;
      bar.derivatives(xi, mu, grad, neg_hess);
      Eigen::LDLT<MatrixXd> ldlt(neg_hess);
      if (ldlt.info() != Eigen::Success) return BarrierExit::Failed;
      step = ldlt.solve(grad);
      if (!step.allFinite()) return BarrierExit::Failed;
      const double decrement = grad.dot(step);
      if (decrement < 0.0) return BarrierExit::Failed;
      if (decrement <= (last ? 1e-12 : 1e-3)) break;

      const double f0 = bar.value(xi, mu);
      double alpha = 1.0;
      bool moved = false;
      while (alpha > 1e-16) {
        trial = xi + alpha * step;
        if (bar.strictly_feasible(trial)) {
          const double f1 = bar.value(trial, mu);
          if (std::isfinite(f1) && f1 >= f0 + 0.01 * alpha * decrement) {
            moved = true;
            break;
          }
        }
        alpha *= 0.5;
      }
      if (!moved) break;
      xi.swap(trial);
      if (early(xi)) return BarrierExit::EarlyStop;
    }
    if (last) return BarrierExit::Converged;
    mu *= 20.0;
  }
}

struct Reduced {
  std::vector<Index> free_vars;  // all variables except the objective
  VectorXd x0;                   // particular solution over free_vars
  MatrixXd Z;                    // orthonormal null-space basis
  bool consistent = true;
};

Reduced eliminate_equalities(const ConicProgram& p) {
  Reduced red;
  const auto n = static_cast<Index>(p.num_variables());
  const auto t = static_cast<Index>(p.objective());
  std::vector<Index> pos(static_cast<std::size_t>(n), -1);
  for (Index v = 0; v < n; ++v)
    if (v != t) {
      pos[static_cast<std::size_t>(v)] = static_cast<Index>(red.free_vars.size());
      red.free_vars.push_back(v);
    }
  const auto ny = static_cast<Index>(red.free_vars.size());
  const auto me = static_cast<Index>(p.equalities().size());
  if (me == 0) {
    red.x0 = VectorXd::Zero(ny);
    red.Z = MatrixXd::Identity(ny, ny);
    return red;
  }
  MatrixXd F = MatrixXd::Zero(me, ny);
  VectorXd f(me);
  for (Index r = 0; r < me; ++r) {
    const auto& eq = p.equalities()[static_cast<std::size_t>(r)];
    for (const auto& term : eq.terms) F(r, pos[term.variable]) += term.coeff;
    f(r) = eq.rhs;
  }
  Eigen::JacobiSVD<MatrixXd> svd(F, Eigen::ComputeThinU | Eigen::ComputeFullV);
  const VectorXd& sv = svd.singularValues();
  const double cutoff = 1e-12 * std::max(1.0, sv.size() > 0 ? sv(0) : 0.0);
  Index rank = 0;
  while (rank < sv.size() && sv(rank) > cutoff) ++rank;
  const VectorXd coeffs = (svd.matrixU().leftCols(rank).transpose() * f).cwiseQuotient(sv.head(rank));
  red.x0 = svd.matrixV().leftCols(rank) * coeffs;
  red.Z = svd.matrixV().rightCols(ny - rank);
  red.consistent = (F * red.x0 - f).norm() <= 1e-9 * (1.0 + f.norm());
  return red;
}


struct PathOutcome {
  enum Kind { Solved, Infeasible, Unbounded, Degenerate } kind = Degenerate;
  VectorXd z;
  double t = 0.0;
  int pivots = 0;
  std::string why;
};

// maximize t s.t. Wz z + w0 >= alpha t (alpha > 0), ||C z + d||^2 <= R.
//
// f(t) = min { ||C z + d||^2 : Wz z + w0 >= alpha t } is nondecreasing and
// its minimizer z(t) is piecewise affine. Starting from the unconstrained
// minimizer, walk the pieces (adding rows as they become tight, dropping
// rows whose multiplier reaches zero) until f(t) = R.
PathOutcome follow_active_set(const MatrixXd& Wz, const VectorXd& w0, const VectorXd& alpha, const MatrixXd& C,
                              const VectorXd& d, double R, double tol) {
  PathOutcome out;
  const Index p = C.cols();
  const Index m = Wz.rows();
  const MatrixXd Q = 2.0 * C.transpose() * C;
  const VectorXd q = 2.0 * C.transpose() * d;
  Eigen::LDLT<MatrixXd> qf(Q);
  if (qf.info() != Eigen::Success || qf.vectorD().minCoeff() <= 1e-12 * std::max(1.0, Q.diagonal().maxCoeff())) {
    out.why = "power is not strictly convex in the free variables";
    return out;
  }
  const double r_tol = tol * (1.0 + R);
  std::vector<Index> active;
  std::vector<char> in_set(static_cast<std::size_t>(m), 0);
  VectorXd z0 = qf.solve(-q), z1 = VectorXd::Zero(p), l0, l1;
  if ((C * z0 + d).squaredNorm() > R + r_tol) {
    out.kind = PathOutcome::Infeasible;
    out.why = "the equality constraints keep every point outside the power budget";
    return out;
  }

  double tb = -std::numeric_limits<double>::infinity();
  const int max_pivots = 4 * static_cast<int>(m) + 8;
  for (; out.pivots <= max_pivots; ++out.pivots) {
    if (!active.empty()) {
      const auto a = static_cast<Index>(active.size());
      MatrixXd K = MatrixXd::Zero(p + a, p + a);
      MatrixXd rhs = MatrixXd::Zero(p + a, 2);
      K.topLeftCorner(p, p) = Q;
      rhs.col(0).head(p) = -q;
      for (Index k = 0; k < a; ++k) {
        const Index r = active[static_cast<std::size_t>(k)];
        K.block(0, p + k, p, 1) = -Wz.row(r).transpose();
        K.block(p + k, 0, 1, p) = Wz.row(r);
        rhs(p + k, 0) = -w0(r);
        rhs(p + k, 1) = alpha(r);
      }
      Eigen::FullPivLU<MatrixXd> lu(K);
      lu.setThreshold(1e-11);
      if (lu.rank() < p + a) {
        out.why = "tight bounds are linearly dependent";
        return out;
      }
      const MatrixXd sol = lu.solve(rhs);
      z0 = sol.col(0).head(p);
      z1 = sol.col(1).head(p);
      l0 = sol.col(0).tail(a);
      l1 = sol.col(1).tail(a);
    }

    // Drop a row whose multiplier is already negative at the breakpoint.
    if (std::isfinite(tb)) {
      Index worst = -1;
      double worst_val = -tol;
      for (Index k = 0; k < l0.size(); ++k) {
        const double lam = l0(k) + l1(k) * tb;
        if (lam < worst_val) {
          worst_val = lam;
          worst = k;
        }
      }
      if (worst >= 0) {
        in_set[static_cast<std::size_t>(active[static_cast<std::size_t>(worst)])] = 0;
        active.erase(active.begin() + worst);
        if (active.empty()) {
          z0 = qf.solve(-q);
          z1.setZero();
          l0.resize(0);
          l1.resize(0);
        }
        continue;
      }
    }

    // Next breakpoint.
    double t_next = std::numeric_limits<double>::infinity();
    std::vector<Index> adds;
    Index drop = -1;
    const VectorXd s0 = Wz * z0 + w0;
    const VectorXd s1 = Wz * z1 - alpha;
    for (Index r = 0; r < m; ++r) {
      if (in_set[static_cast<std::size_t>(r)] || !(s1(r) < 0.0)) continue;
      const double tr = std::isfinite(tb) ? std::max(tb, -s0(r) / s1(r)) : -s0(r) / s1(r);
      const double eps = 1e-12 * (1.0 + std::abs(tr));
      if (tr < t_next - eps) {
        t_next = tr;
        adds.assign(1, r);
      } else if (tr <= t_next + eps) {
        adds.push_back(r);
      }
    }
    for (Index k = 0; k < l0.size(); ++k) {
      if (!(l1(k) < 0.0)) continue;
      const double tr = std::max(tb, -l0(k) / l1(k));
      if (tr < t_next - 1e-12 * (1.0 + std::abs(tr))) {
        t_next = tr;
        adds.clear();
        drop = k;
      }
    }

    // Does the power reach R inside [tb, t_next]?
    const VectorXd e0 = C * z0 + d;
    const VectorXd e1 = C * z1;
    const double qa = e1.squaredNorm();
    const double qb = 2.0 * e0.dot(e1);
    if (std::isfinite(tb)) {
      // f(tb + tau) - R = qa tau^2 + b tau + c
      const double b = qb + 2.0 * qa * tb;
      const double c = (e0 + e1 * tb).squaredNorm() - R;
      const double disc = std::sqrt(std::max(0.0, b * b - 4.0 * qa * c));
      double tau = std::numeric_limits<double>::infinity();
      if (c >= 0.0)
        tau = (b > 0.0 || qa > 0.0) ? 0.0 : tau;
      else if (b + disc > 0.0)
        tau = -2.0 * c / (b + disc);
      if (tb + tau <= t_next) {
        out.t = tb + tau;
        out.z = z0 + z1 * out.t;
        break;
      }
    }
    if (!std::isfinite(t_next)) {
      out.kind = PathOutcome::Unbounded;
      out.why = "the power budget never binds: the objective is unbounded";
      return out;
    }
    tb = t_next;
    if (drop >= 0) {
      in_set[static_cast<std::size_t>(active[static_cast<std::size_t>(drop)])] = 0;
      active.erase(active.begin() + drop);
    }
    for (const Index r : adds) {
      active.push_back(r);
      in_set[static_cast<std::size_t>(r)] = 1;
    }
  }
  if (out.pivots > max_pivots) {
    out.why = "active-set path did not terminate";
    return out;
  }

  // Certificate: feasible rows, nonnegative multipliers whose weighted alpha
  // sum is positive, tight ball.
  const VectorXd slack = Wz * out.z + w0 - alpha * out.t;
  const double row_tol = tol * (1.0 + w0.cwiseAbs().maxCoeff() + std::abs(out.t));
  double weight = 0.0;
  for (Index k = 0; k < l0.size(); ++k) {
    const double lam = l0(k) + l1(k) * out.t;
    if (lam < -tol) {
      out.why = "negative multiplier at the optimum";
      return out;
    }
    weight += lam * alpha(active[static_cast<std::size_t>(k)]);
  }
  if ((slack.array() < -row_tol).any() || !(weight > 0.0) ||
      std::abs((C * out.z + d).squaredNorm() - R) > r_tol || !out.z.allFinite()) {
    out.why = "active-set optimality certificate failed";
    return out;
  }
  out.kind = PathOutcome::Solved;
  return out;
}

}  // namespace

Result solve(const ConicProgram& program, const Options& options) {
  program.validate();
  Result result;
  const auto n = static_cast<Index>(program.num_variables());
  const auto t_index = static_cast<Index>(program.objective());
  const Ball& ball = *program.ball();

  const Reduced red = eliminate_equalities(program);
  if (!red.consistent) {
    result.status = Status::Infeasible;
    result.diagnostic = "equality constraints are inconsistent";
    return result;
  }
  const Index p = red.Z.cols();
  const Index ny = static_cast<Index>(red.free_vars.size());
  std::vector<Index> pos(static_cast<std::size_t>(n), -1);
  for (Index k = 0; k < ny; ++k) pos[static_cast<std::size_t>(red.free_vars[static_cast<std::size_t>(k)])] = k;

  auto assemble = [&](const VectorXd& z, double t) {
    VectorXd x(n);
    const VectorXd y = red.x0 + red.Z * z;
    for (Index k = 0; k < ny; ++k) x(red.free_vars[static_cast<std::size_t>(k)]) = y(k);
    x(t_index) = t;
    return x;
  };

  // Ball block in reduced coordinates: ||Cb z + db||^2 <= radius_sq.
  const auto nb = static_cast<Index>(ball.size);
  MatrixXd Cb(nb, p);
  VectorXd db(nb);
  for (Index k = 0; k < nb; ++k) {
    const Index v = pos[ball.offset + static_cast<std::size_t>(k)];
    Cb.row(k) = red.Z.row(v);
    db(k) = red.x0(v);
  }

  const auto& bounds = program.lower_bounds();
  const bool t_referenced = std::any_of(bounds.begin(), bounds.end(), [](const LowerBound& b) { return b.t_coeff != 0.0; });
  if (!t_referenced) {
    if (!bounds.empty()) {
      result.status = Status::NumericalFailure;
      result.diagnostic = "objective is unbounded: no bound references the objective variable";
      return result;
    }
    // Unconstrained objective: minimum-norm point of the equality system.
    result.x = assemble(VectorXd::Zero(p), 0.0);
    result.objective = 0.0;
    const double power = db.squaredNorm();
    if (power > ball.radius_sq * (1.0 + options.feasibility_tolerance) + options.feasibility_tolerance) {
      result.status = Status::Infeasible;
      result.diagnostic = "minimum-norm solution of the equalities exceeds the power budget";
    } else {
      result.status = Status::Optimal;
      result.diagnostic = "objective unconstrained; minimum-norm solution returned";
    }
    return result;
  }

  // Bound rows in reduced coordinates: w^T z + w0 - alpha t >= 0.
  const auto m = static_cast<Index>(bounds.size());
  MatrixXd Wz(m, p);
  VectorXd w0(m), alpha(m);
  for (Index r = 0; r < m; ++r) {
    const auto& b = bounds[static_cast<std::size_t>(r)];
    const Index v = pos[b.variable];
    Wz.row(r) = red.Z.row(v);
    w0(r) = red.x0(v) - b.constant;
    alpha(r) = b.t_coeff;
  }
  const double reg_sq = 1e12 * (1.0 + red.x0.squaredNorm() + ball.radius_sq);

  // The equalities pin every variable: only t is left to choose.
  if (p == 0) {
    result.algorithm = options.algorithm == Algorithm::Barrier ? Algorithm::Barrier : Algorithm::ActiveSet;
    const double r_tol = options.feasibility_tolerance * (1.0 + ball.radius_sq);
    if (db.squaredNorm() > ball.radius_sq + r_tol) {
      result.status = Status::Infeasible;
      result.diagnostic = "the equality constraints keep every point outside the power budget";
      return result;
    }
    double t = std::numeric_limits<double>::infinity();
    for (Index r = 0; r < m; ++r) {
      if (alpha(r) > 0.0) {
        t = std::min(t, w0(r) / alpha(r));
      } else if (w0(r) < -options.feasibility_tolerance * (1.0 + std::abs(bounds[static_cast<std::size_t>(r)].constant))) {
        result.status = Status::Infeasible;
        result.diagnostic = "the equality constraints violate a bound that does not involve the objective";
        return result;
      }
    }
    result.status = Status::Optimal;
    result.x = assemble(VectorXd::Zero(0), t);
    result.objective = t;
    result.diagnostic = "equalities determine every variable";
    return result;
  }

  const bool has_t_free_rows = (alpha.array() <= 0.0).any();
  if (options.algorithm == Algorithm::ActiveSet && has_t_free_rows)
    throw std::invalid_argument("the active-set method needs every bound to involve the objective");
  if (options.algorithm != Algorithm::Barrier && !has_t_free_rows) {
    const PathOutcome path = follow_active_set(Wz, w0, alpha, Cb, db, ball.radius_sq, options.feasibility_tolerance);
    if (path.kind != PathOutcome::Degenerate || options.algorithm == Algorithm::ActiveSet) {
      result.algorithm = Algorithm::ActiveSet;
      result.newton_steps = path.pivots;
      result.diagnostic = path.why;
      switch (path.kind) {
        case PathOutcome::Solved:
          result.status = Status::Optimal;
          result.x = assemble(path.z, path.t);
          result.objective = path.t;
          break;
        case PathOutcome::Infeasible: result.status = Status::Infeasible; break;
        case PathOutcome::Unbounded:
        case PathOutcome::Degenerate: result.status = Status::NumericalFailure; break;
      }
      return result;
    }
  }

  result.algorithm = Algorithm::Barrier;
  int budget = options.max_newton_steps;
  int steps = 0;
  double radius_sq = ball.radius_sq;

  // Phase I over (z, s): maximize s with every t-free row and the ball
  // exceeding s. Rows that involve t can always be met by lowering t.
  auto phase_one = [&](VectorXd& z_out) -> std::optional<double> {
    std::vector<Index> rows0;
    for (Index r = 0; r < m; ++r)
      if (alpha(r) == 0.0) rows0.push_back(r);
    Barrier bar;
    bar.g = VectorXd::Zero(p + 1);
    bar.g(p) = 1.0;
    const auto m0 = static_cast<Index>(rows0.size());
    bar.W = MatrixXd::Zero(m0 + 1, p + 1);
    bar.w0 = VectorXd::Zero(m0 + 1);
    for (Index k = 0; k < m0; ++k) {
      bar.W.row(k).head(p) = Wz.row(rows0[static_cast<std::size_t>(k)]);
      bar.W(k, p) = -1.0;
      bar.w0(k) = w0(rows0[static_cast<std::size_t>(k)]);
    }
    bar.W(m0, p) = -1.0;  // s < 1
    bar.w0(m0) = 1.0;
    Quadratic qb{MatrixXd::Zero(nb, p + 1), db, VectorXd::Zero(p + 1), radius_sq};
    qb.C.leftCols(p) = Cb;
    qb.l(p) = -1.0;
    Quadratic qr{MatrixXd::Zero(p, p + 1), VectorXd::Zero(p), VectorXd::Zero(p + 1), reg_sq};
    qr.C.leftCols(p) = MatrixXd::Identity(p, p);
    bar.quads = {qb, qr};

    VectorXd xi = VectorXd::Zero(p + 1);
    xi.head(p) = z_out;
    double s0 = std::min(1.0, qb.value(xi));
    for (Index k = 0; k < m0; ++k) s0 = std::min(s0, bar.W.row(k).head(p).dot(z_out) + bar.w0(k));
    xi(p) = s0 - 1.0;
    const BarrierExit exit =
        follow_path(bar, xi, options.gap_tolerance, budget, steps, [&](const VectorXd& v) { return v(p) > 0.0; });
    if (exit == BarrierExit::Failed) return std::nullopt;
    z_out = xi.head(p);
    return xi(p);
  };

  // Point of the reduced space closest to the ball center.
  const VectorXd z_center = Cb.completeOrthogonalDecomposition().solve(-db);
  const double ball_slack = radius_sq - (Cb * z_center + db).squaredNorm();
  const double ball_scale = options.feasibility_tolerance * (1.0 + radius_sq);

  auto infeasible = [&](std::string why) {
    result.status = Status::Infeasible;
    result.diagnostic = std::move(why);
    result.newton_steps = steps;
    return result;
  };
  auto relax = [&] {
    result.relaxed = true;
    for (Index r = 0; r < m; ++r)
      if (alpha(r) == 0.0) w0(r) += options.relaxation * (1.0 + std::abs(w0(r)));
    radius_sq += options.relaxation * (1.0 + radius_sq);
  };

  VectorXd z = z_center;
  if (ball_slack < -ball_scale) return infeasible("the equality constraints keep every point outside the power budget");
  if (ball_slack <= ball_scale) relax();

  if (has_t_free_rows) {
    std::optional<double> s_star = phase_one(z);
    if (!s_star) {
      result.status = Status::NumericalFailure;
      result.diagnostic = "phase I did not converge";
      result.newton_steps = steps;
      return result;
    }
    if (*s_star <= 0.0) {
      if (*s_star < -options.feasibility_tolerance)
        return infeasible("no point satisfies the bounds within the power budget (max slack " + std::to_string(*s_star) + ")");
      if (!result.relaxed) relax();
      s_star = phase_one(z);
      if (!s_star || *s_star <= 0.0) return infeasible("feasible set has empty interior and relaxation did not recover it");
    }
  }

  // Phase II over (z, t).
  Barrier bar;
  bar.g = VectorXd::Zero(p + 1);
  bar.g(p) = 1.0;
  bar.W = MatrixXd::Zero(m, p + 1);
  bar.W.leftCols(p) = Wz;
  bar.W.col(p) = -alpha;
  bar.w0 = w0;
  Quadratic qb{MatrixXd::Zero(nb, p + 1), db, VectorXd::Zero(p + 1), radius_sq};
  qb.C.leftCols(p) = Cb;
  Quadratic qr{MatrixXd::Zero(p, p + 1), VectorXd::Zero(p), VectorXd::Zero(p + 1), reg_sq};
  qr.C.leftCols(p) = MatrixXd::Identity(p, p);
  bar.quads = {qb, qr};

  VectorXd xi(p + 1);
  xi.head(p) = z;
  double t0 = std::numeric_limits<double>::infinity();
  const VectorXd base = Wz * z + w0;
  for (Index r = 0; r < m; ++r)
    if (alpha(r) > 0.0) t0 = std::min(t0, base(r) / alpha(r));
  if (!std::isfinite(t0)) {
    result.status = Status::NumericalFailure;
    result.diagnostic = "objective is unbounded above";
    result.newton_steps = steps;
    return result;
  }
  xi(p) = t0 - 1.0;
  const BarrierExit exit = follow_path(bar, xi, options.gap_tolerance, budget, steps, [](const VectorXd&) { return false; });
  result.newton_steps = steps;
  if (exit == BarrierExit::Failed || !xi.allFinite()) {
    result.status = Status::NumericalFailure;
    result.diagnostic = "phase II did not converge";
    return result;
  }
  result.x = assemble(xi.head(p), xi(p));
  result.objective = xi(p);
  result.status = Status::Optimal;
  if (result.relaxed) result.diagnostic = "feasible set has empty interior; solved with relaxed bounds";
  return result;
}

}  // namespace slp::conic

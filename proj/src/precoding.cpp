// SPDX-License-Identifier: Apache-2.0
#include "slp/precoding.hpp"

#include "slp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace slp {

Alphabet::Alphabet(Constellation c) : constellation(std::move(c)), regions(build_all_dpcirs(constellation)) {}

std::shared_ptr<const Alphabet> make_alphabet(Constellation c) { return std::make_shared<const Alphabet>(std::move(c)); }

const char* to_string(UserRole role) {
  switch (role) {
    case UserRole::Interior: return "interior";
    case UserRole::Wedge: return "wedge";
    case UserRole::Ray: return "ray";
  }
  return "unknown";
}

const char* to_string(Formulation f) { return f == Formulation::Joint ? "joint" : "fixed"; }

UserRole PrecodingInstance::role(std::size_t k) const {
  const DpcirRegion& r = alphabet->regions.at(symbols[k]);
  switch (r.shape) {
    case RegionShape::Point: return UserRole::Interior;
    case RegionShape::Wedge: return UserRole::Wedge;
    case RegionShape::Ray: return UserRole::Ray;
    case RegionShape::Halfplane:
    case RegionShape::Line: break;
  }
  throw DomainError(std::string("symbol ") + std::to_string(symbols[k] + 1) + " has a " + to_string(r.shape) +
                    " region; collinear constellations are not supported by the precoder");
}

std::vector<std::size_t> PrecodingInstance::boundary_users() const {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < users(); ++k)
    if (role(k) != UserRole::Interior) out.push_back(k);
  return out;
}

std::vector<std::size_t> PrecodingInstance::wedge_users() const {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < users(); ++k)
    if (role(k) == UserRole::Wedge) out.push_back(k);
  return out;
}

void PrecodingInstance::validate() const {
  if (!alphabet) throw DomainError("instance has no constellation");
  if (channels.empty()) throw DomainError("instance needs at least one user");
  if (symbols.users() != channels.size())
    throw DomainError("got " + std::to_string(symbols.users()) + " symbols for " + std::to_string(channels.size()) + " users");
  const auto n = channels.front().H.cols();
  for (const auto& ch : channels)
    if (ch.H.cols() != n || n == 0) throw DomainError("all users need the same nonzero number of antennas");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("sigma must be positive and finite");
  if (!(pmax >= 0.0) || !std::isfinite(pmax)) throw DomainError("power budget must be nonnegative and finite");
  if (alphabet->constellation.collinear()) throw DomainError("collinear constellations are not supported by the precoder");
  for (std::size_t k = 0; k < symbols.users(); ++k)
    if (symbols[k] >= alphabet->size())
      throw DomainError("symbol index " + std::to_string(symbols[k] + 1) + " outside constellation of size " +
                        std::to_string(alphabet->size()));
}

PrecodingInstance make_instance(std::shared_ptr<const Alphabet> alphabet, const ComplexChannel& channel,
                                SymbolAssignment symbols, double sigma, double pmax) {
  PrecodingInstance inst;
  inst.alphabet = std::move(alphabet);
  inst.channels = realify(channel);
  inst.symbols = std::move(symbols);
  inst.sigma = sigma;
  inst.pmax = pmax;
  inst.validate();
  return inst;
}

namespace {

// coeffs^T H_k u~ - sigma * slack = sigma * rhs
void add_signal_row(conic::ConicProgram& p, const conic::VariableBlock& u, const RealChannel& ch, const Vec2& coeffs,
                    std::optional<std::size_t> slack, double slack_coeff, double rhs, double sigma) {
  conic::LinearEquality eq;
  const Eigen::RowVectorXd row = coeffs.transpose() * ch.H;
  eq.terms.reserve(u.size + 1);
  for (std::size_t j = 0; j < u.size; ++j) eq.terms.push_back({u[j], row(static_cast<Eigen::Index>(j))});
  if (slack) eq.terms.push_back({*slack, -sigma * slack_coeff});
  eq.rhs = sigma * rhs;
  p.add_equality(std::move(eq));
}

SlpProgram build(const PrecodingInstance& inst, Formulation form, const std::vector<double>* delta1) {
  inst.validate();
  SlpProgram sp;
  sp.instance = &inst;
  sp.formulation = form;
  auto& p = sp.program;
  sp.u = p.add_block("u", 2 * inst.antennas());
  const auto t_block = p.add_block("t", 1);
  sp.t = t_block[0];
  p.set_objective(sp.t);
  p.set_ball(sp.u, inst.pmax);

  std::size_t boundary_pos = 0;
  const auto& regions = inst.alphabet->regions;
  for (std::size_t k = 0; k < inst.users(); ++k) {
    UserSlot slot;
    slot.role = inst.role(k);
    slot.region = inst.symbols[k];
    const DpcirRegion& r = regions[slot.region];
    const RealChannel& ch = inst.channels[k];
    const std::string tag = std::to_string(k);

    switch (slot.role) {
      case UserRole::Interior: {
        add_signal_row(p, sp.u, ch, Vec2::UnitX(), std::nullopt, 0.0, r.vertex.x(), inst.sigma);
        add_signal_row(p, sp.u, ch, Vec2::UnitY(), std::nullopt, 0.0, r.vertex.y(), inst.sigma);
        break;
      }
      case UserRole::Wedge: {
        const auto r1 = static_cast<Eigen::Index>(r.boundary_rows->first);
        const auto r2 = static_cast<Eigen::Index>(r.boundary_rows->second);
        if (form == Formulation::Joint) {
          const auto blk = p.add_block("delta" + tag, 2);
          slot.delta1 = blk[0];
          slot.delta2 = blk[1];
        } else {
          slot.fixed_delta1 = (*delta1)[boundary_pos];
          slot.delta2 = p.add_block("delta" + tag, 1)[0];
        }
        add_signal_row(p, sp.u, ch, r.A.row(r1).transpose(), slot.delta1, 1.0, r.b(r1) + r.c(r1) + slot.fixed_delta1,
                       inst.sigma);
        add_signal_row(p, sp.u, ch, r.A.row(r2).transpose(), slot.delta2, 1.0, r.b(r2) + r.c(r2), inst.sigma);
        for (const auto v : {slot.delta1, slot.delta2})
          if (v) p.add_lower_bound({*v, 1.0, 0.0});
        ++boundary_pos;
        break;
      }
      case UserRole::Ray: {
        slot.ray = p.add_block("ray" + tag, 1)[0];
        const Vec2& e = r.edges.front();
        add_signal_row(p, sp.u, ch, Vec2::UnitX(), slot.ray, e.x(), r.vertex.x(), inst.sigma);
        add_signal_row(p, sp.u, ch, Vec2::UnitY(), slot.ray, e.y(), r.vertex.y(), inst.sigma);
        p.add_lower_bound({*slot.ray, 1.0, 0.0});
        ++boundary_pos;
        break;
      }
    }
    sp.slots.push_back(slot);
  }
  return sp;
}

double rel(double lhs, double rhs) { return std::abs(lhs - rhs) / (1.0 + std::abs(rhs)); }

}  // namespace

SlpProgram build_joint(const PrecodingInstance& instance) { return build(instance, Formulation::Joint, nullptr); }

SlpProgram build_fixed(const PrecodingInstance& instance, const std::vector<double>& delta1) {
  instance.validate();
  const auto boundary = instance.boundary_users();
  if (delta1.size() != boundary.size())
    throw DomainError("expected " + std::to_string(boundary.size()) + " delta1 values (one per boundary user), got " +
                      std::to_string(delta1.size()));
  for (std::size_t j = 0; j < delta1.size(); ++j) {
    if (!(delta1[j] >= 0.0) || !std::isfinite(delta1[j])) throw DomainError("delta1 values must be finite and nonnegative");
    if (instance.role(boundary[j]) == UserRole::Ray && delta1[j] != 0.0)
      throw DomainError("user " + std::to_string(boundary[j] + 1) +
                        " has a hull-edge symbol whose boundary-row slacks are identically zero; its delta1 must be 0");
  }
  return build(instance, Formulation::Fixed, &delta1);
}

bool InvariantCheck::ok() const {
  return power_excess <= 1e-7 && equality_residual <= 1e-6 && bound_violation <= 1e-7 && containment_violation <= 1e-6;
}

namespace {

double value(const Eigen::VectorXd& x, std::optional<std::size_t> v) {
  return v ? x(static_cast<Eigen::Index>(*v)) : 0.0;
}

InvariantCheck verify_point(const SlpProgram& sp, const Eigen::VectorXd& x, bool all_interior) {
  const PrecodingInstance& inst = *sp.instance;
  InvariantCheck chk;
  const Eigen::VectorXd u = x.segment(static_cast<Eigen::Index>(sp.u.offset), static_cast<Eigen::Index>(sp.u.size));
  const double t = x(static_cast<Eigen::Index>(sp.t));
  const double budget = std::max(inst.pmax, std::numeric_limits<double>::min());
  chk.power_excess = std::max(0.0, u.squaredNorm() / budget - 1.0);
  if (inst.pmax == 0.0 && u.squaredNorm() > 0.0) chk.power_excess = std::numeric_limits<double>::infinity();

  const double s = inst.sigma;
  for (std::size_t k = 0; k < sp.slots.size(); ++k) {
    const UserSlot& slot = sp.slots[k];
    const DpcirRegion& r = inst.alphabet->regions[slot.region];
    const Vec2 y = inst.channels[k].H * u;
    switch (slot.role) {
      case UserRole::Interior:
        chk.equality_residual = std::max({chk.equality_residual, rel(y.x(), s * r.vertex.x()), rel(y.y(), s * r.vertex.y())});
        break;
      case UserRole::Wedge: {
        const auto r1 = static_cast<Eigen::Index>(r.boundary_rows->first);
        const auto r2 = static_cast<Eigen::Index>(r.boundary_rows->second);
        const double d1 = slot.delta1 ? value(x, slot.delta1) : slot.fixed_delta1;
        const double d2 = value(x, slot.delta2);
        chk.equality_residual = std::max({chk.equality_residual, rel(r.A.row(r1).dot(y), s * (r.b(r1) + r.c(r1) + d1)),
                                          rel(r.A.row(r2).dot(y), s * (r.b(r2) + r.c(r2) + d2))});
        double viol = std::max(-d2, t - d2);
        if (slot.delta1) viol = std::max({viol, -d1, t - d1});
        if (!all_interior) chk.bound_violation = std::max(chk.bound_violation, viol);
        break;
      }
      case UserRole::Ray: {
        const double sr = value(x, slot.ray);
        const Vec2 target = s * (r.vertex + sr * r.edges.front());
        chk.equality_residual = std::max({chk.equality_residual, rel(y.x(), target.x()), rel(y.y(), target.y())});
        chk.bound_violation = std::max({chk.bound_violation, -sr, t - sr});
        break;
      }
    }
    for (Eigen::Index row = 0; row < r.A.rows(); ++row) {
      const double floor = s * (r.b(row) + r.c(row));
      chk.containment_violation = std::max(chk.containment_violation, (floor - r.A.row(row).dot(y)) / (1.0 + std::abs(floor)));
    }
  }
  return chk;
}

}  // namespace

SlpSolution solve(const SlpProgram& sp, const conic::Options& options) {
  const PrecodingInstance& inst = *sp.instance;
  const conic::Result res = conic::solve(sp.program, options);
  SlpSolution sol;
  sol.status = res.status;
  sol.formulation = sp.formulation;
  sol.relaxed = res.relaxed;
  sol.newton_steps = res.newton_steps;
  sol.diagnostic = res.diagnostic;
  sol.all_interior = std::none_of(sp.slots.begin(), sp.slots.end(), [](const UserSlot& s) { return s.role != UserRole::Interior; });
  if (!sol.optimal()) return sol;
  // Slacks are only bounded below by t, so a negative optimum means some
  // received signal cannot reach its region inside the budget.
  if (!sol.all_interior && res.objective < -options.feasibility_tolerance) {
    sol.status = conic::Status::Infeasible;
    sol.diagnostic = "optimal slack t = " + std::to_string(res.objective) +
                     " is negative: the regions cannot all be reached within the power budget";
    return sol;
  }

  const Eigen::VectorXd& x = res.x;
  sol.u_tilde = x.segment(static_cast<Eigen::Index>(sp.u.offset), static_cast<Eigen::Index>(sp.u.size));
  sol.t = sol.all_interior ? 0.0 : std::max(0.0, res.objective);
  sol.per_user_power.reserve(inst.users());
  double min_boundary = std::numeric_limits<double>::infinity();
  double min_all = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < sp.slots.size(); ++k) {
    const UserSlot& slot = sp.slots[k];
    const double power = received_power(inst.channels[k], sol.u_tilde);
    sol.per_user_power.push_back(power);
    min_all = std::min(min_all, power);
    if (slot.role != UserRole::Interior) min_boundary = std::min(min_boundary, power);
    const auto clip = [](double v) { return std::max(0.0, v); };
    switch (slot.role) {
      case UserRole::Interior: sol.deltas.emplace_back(); break;
      case UserRole::Wedge:
        sol.deltas.emplace_back(slot.delta1 ? clip(value(x, slot.delta1)) : slot.fixed_delta1, clip(value(x, slot.delta2)));
        break;
      case UserRole::Ray: {
        const double sr = clip(value(x, slot.ray));
        sol.deltas.emplace_back(sr, sr);
        break;
      }
    }
  }
  sol.min_power = sol.all_interior ? min_all : min_boundary;
  sol.check = verify_point(sp, x, sol.all_interior);
  return sol;
}

InvariantCheck verify_solution(const SlpProgram& sp, const SlpSolution& sol) {
  if (!sol.optimal()) return {};
  Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(sp.program.num_variables()));
  x.segment(static_cast<Eigen::Index>(sp.u.offset), static_cast<Eigen::Index>(sp.u.size)) = sol.u_tilde;
  x(static_cast<Eigen::Index>(sp.t)) = sol.t;
  for (std::size_t k = 0; k < sp.slots.size(); ++k) {
    const UserSlot& slot = sp.slots[k];
    if (slot.delta1) x(static_cast<Eigen::Index>(*slot.delta1)) = sol.deltas[k].first();
    if (slot.delta2) x(static_cast<Eigen::Index>(*slot.delta2)) = sol.deltas[k].second();
    if (slot.ray) x(static_cast<Eigen::Index>(*slot.ray)) = sol.deltas[k].first();
  }
  return verify_point(sp, x, sol.all_interior);
}

SlpSolution solve_joint(const PrecodingInstance& instance) { return solve(build_joint(instance)); }

SlpSolution solve_fixed(const PrecodingInstance& instance, const std::vector<double>& delta1) {
  return solve(build_fixed(instance, delta1));
}

std::vector<double> make_grid(double start, double step, double end) {
  if (!std::isfinite(start) || !std::isfinite(step) || !std::isfinite(end)) throw DomainError("grid bounds must be finite");
  if (!(step > 0.0)) throw DomainError("grid step must be positive");
  if (end < start) throw DomainError("grid end must not precede its start");
  std::vector<double> out;
  for (std::size_t k = 0;; ++k) {
    const double v = start + static_cast<double>(k) * step;
    if (v > end + step * 1e-9) break;
    out.push_back(v);
  }
  return out;
}

ExhaustiveResult exhaustive_search(const PrecodingInstance& instance, std::vector<double> grid,
                                   const CandidateObserver& observer) {
  instance.validate();
  if (grid.empty()) throw DomainError("exhaustive search needs a nonempty grid");
  for (double g : grid)
    if (!(g >= 0.0) || !std::isfinite(g)) throw DomainError("grid values must be finite and nonnegative");
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  const auto boundary = instance.boundary_users();
  std::vector<std::size_t> searched;  // positions in `boundary` of the wedge users
  for (std::size_t j = 0; j < boundary.size(); ++j)
    if (instance.role(boundary[j]) == UserRole::Wedge) searched.push_back(j);

  ExhaustiveResult out;
  out.best.status = conic::Status::Infeasible;
  out.best.diagnostic = "no grid candidate was feasible";
  std::vector<std::size_t> digits(searched.size(), 0);
  std::vector<double> delta1(boundary.size(), 0.0);
  while (true) {
    for (std::size_t j = 0; j < searched.size(); ++j) delta1[searched[j]] = grid[digits[j]];
    SlpSolution sol = solve_fixed(instance, delta1);
    ++out.evaluated;
    if (observer) observer(delta1, sol);
    if (sol.optimal()) {
      ++out.feasible;
      // Candidates within rounding of the incumbent count as ties.
      const double tie = 1e-9 * std::max(1.0, std::abs(out.best.min_power));
      if (out.feasible == 1 || sol.min_power > out.best.min_power + tie) {
        out.best = std::move(sol);
        out.best_delta1 = delta1;
      }
    }
    // Odometer increment, last wedge user fastest.
    std::size_t pos = searched.size();
    while (pos > 0) {
      --pos;
      if (++digits[pos] < grid.size()) break;
      digits[pos] = 0;
      if (pos == 0) return out;
    }
    if (searched.empty()) return out;
  }
}

}  // namespace slp

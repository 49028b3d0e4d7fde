// SPDX-License-Identifier: Apache-2.0
#include "cli.hpp"

#include "slp/errors.hpp"
#include "slp/harness.hpp"
#include "slp/io.hpp"
#include "slp/precoding.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <exception>
#include <fstream>
#include <ostream>
#include <string>

namespace slp::cli {

using nlohmann::json;

namespace {

struct DumpArgs {
  std::string constellation;
  std::size_t point = 0;
  bool raw_power = false;
};

void add_dump(CLI::App& parent, DumpArgs& args) {
  CLI::App* dump = parent.add_subcommand("dump", "Print the DPCIR of one constellation point as JSON");
  dump->add_option("--constellation", args.constellation, "Built-in name (qpsk, 8psk, 16qam, 8opt) or JSON file")->required();
  dump->add_option("--point", args.point, "1-based point label")->required()->check(CLI::PositiveNumber);
  dump->add_flag("--raw-power", args.raw_power, "Use file coordinates without unit-power normalization");
}

int run_dump(const DumpArgs& args, std::ostream& out) {
  const Constellation c = load_constellation(args.constellation, args.raw_power);
  if (args.point > c.size())
    throw DomainError("point " + std::to_string(args.point) + " outside constellation of size " + std::to_string(c.size()));
  const std::size_t i = args.point - 1;
  json j = to_json(build_dpcir(c, i));
  j["on_boundary"] = c.is_boundary(i);
  j["origin_in_hull"] = c.origin_in_hull();
  out << j.dump(2) << '\n';
  return 0;
}

struct SolveArgs {
  std::string constellation;
  std::string channels;
  std::string symbols;
  double sigma = 1.0;
  double pmax = 1.0;
  std::string method = "joint";
  std::string delta1;
  std::string grid = "0:0.5:2.5";
  bool raw_power = false;
};

json sinr_list(const SlpSolution& s, double sigma) {
  json out = json::array();
  for (double p : s.per_user_power) {
    const double v = sinr_db(p, sigma);
    out.push_back(std::isfinite(v) ? json(v) : json(nullptr));
  }
  return out;
}

int run_solve(const SolveArgs& a, std::ostream& out) {
  auto alphabet = make_alphabet(load_constellation(a.constellation, a.raw_power));
  const ComplexChannel channel = load_channel(a.channels);
  const PrecodingInstance inst =
      make_instance(alphabet, channel, parse_symbols(a.symbols, alphabet->size()), a.sigma, a.pmax);

  json j = json::object();
  SlpSolution sol;
  if (a.method == "joint") {
    sol = solve_joint(inst);
  } else if (a.method == "fixed") {
    std::vector<double> d1 = a.delta1.empty() ? std::vector<double>(inst.boundary_users().size(), 0.0)
                                              : parse_number_list(a.delta1);
    sol = solve_fixed(inst, d1);
    j["delta1"] = d1;
  } else {
    ExhaustiveResult ex = exhaustive_search(inst, parse_grid(a.grid));
    j["evaluated"] = ex.evaluated;
    j["feasible_candidates"] = ex.feasible;
    j["delta1"] = ex.best_delta1;
    sol = std::move(ex.best);
  }
  json s = to_json(sol);
  s.update(j);
  s["method"] = a.method;
  if (sol.optimal()) {
    s["per_user_sinr_db"] = sinr_list(sol, a.sigma);
    const double worst = sinr_db(sol.min_power, a.sigma);
    s["min_sinr_db"] = std::isfinite(worst) ? json(worst) : json(nullptr);
  }
  json roles = json::array();
  for (std::size_t k = 0; k < inst.users(); ++k) roles.push_back(to_string(inst.role(k)));
  s["user_roles"] = roles;
  out << s.dump(2) << '\n';
  return 0;
}

struct SweepArgs {
  std::string config;
  std::string log_slots;
  std::string out;
};

int run_sweep_cmd(const SweepArgs& a, std::ostream& out, std::ostream& err) {
  const SweepConfig cfg = SweepConfig::load(a.config);
  const SweepRun run = run_sweep(cfg);
  if (!a.log_slots.empty()) write_slot_log(run.slots, a.log_slots);
  if (a.out.empty())
    out << format_csv(run.result);
  else
    emit_csv(run.result, a.out);
  if (run.result.violations > 0)
    err << "warning: " << run.result.violations << " of " << run.result.checked
        << " optimal solutions failed the invariant check\n";
  return 0;
}

template <typename Body>
int guarded(CLI::App& app, int argc, const char* const* argv, std::ostream& out, std::ostream& err, Body body) {
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << '\n';
  } catch (const std::invalid_argument& e) {
    err << "invalid input: " << e.what() << '\n';
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  }
  return 2;
}

}  // namespace

int slp_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Symbol-level precoding with distance-preserving constructive interference regions"};
  app.require_subcommand(1);

  SolveArgs solve;
  CLI::App* s = app.add_subcommand("solve", "Solve one max-min SINR precoding problem and print the solution as JSON");
  s->add_option("--constellation", solve.constellation, "Built-in name or JSON file")->required();
  s->add_option("--channels", solve.channels, "JSON file: K rows of N [re, im] pairs")->required();
  s->add_option("--symbols", solve.symbols, "Comma-separated 1-based symbol labels, one per user")->required();
  s->add_option("--sigma", solve.sigma, "Noise standard deviation")->check(CLI::PositiveNumber);
  s->add_option("--pmax", solve.pmax, "Total power budget (linear)")->required()->check(CLI::NonNegativeNumber);
  s->add_option("--method", solve.method, "joint, fixed or exhaustive")
      ->check(CLI::IsMember({"joint", "fixed", "exhaustive"}));
  s->add_option("--delta1", solve.delta1, "Fixed method: comma-separated delta1 per boundary user (default all 0)");
  s->add_option("--grid", solve.grid, "Exhaustive method: delta1 grid start:step:end");
  s->add_flag("--raw-power", solve.raw_power, "Use file coordinates without unit-power normalization");

  SweepArgs sweep;
  CLI::App* w = app.add_subcommand("sweep", "Run a Monte Carlo sweep over the power budget and print CSV");
  w->add_option("--config", sweep.config, "JSON sweep configuration")->required();
  w->add_option("--log-slots", sweep.log_slots, "Write one JSON line per slot, power and method to this file");
  w->add_option("--out", sweep.out, "Write the CSV here instead of stdout");

  DumpArgs dump;
  CLI::App* d = app.add_subcommand("dpcir", "Inspect distance-preserving regions");
  d->require_subcommand(1);
  add_dump(*d, dump);

  return guarded(app, argc, argv, out, err, [&] {
    if (s->parsed()) return run_solve(solve, out);
    if (w->parsed()) return run_sweep_cmd(sweep, out, err);
    return run_dump(dump, out);
  });
}

int dpcir_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Distance-preserving constructive interference regions"};
  app.require_subcommand(1);
  DumpArgs dump;
  add_dump(app, dump);
  return guarded(app, argc, argv, out, err, [&] { return run_dump(dump, out); });
}

}  // namespace slp::cli

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "slp/precoding.hpp"
#include "slp/signal_model.hpp"

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace slp {

enum class Method { Joint, Exhaustive };

const char* to_string(Method m);
Method method_from_string(const std::string& name);

struct SweepConfig {
  std::size_t antennas = 4;
  std::size_t users = 4;
  double sigma = 1.0;
  std::string constellation = "8psk";
  bool raw_power = false;
  std::vector<double> pmax_dbw{0.0, 5.0, 10.0, 15.0, 20.0};
  std::size_t slots = 100;
  std::uint64_t seed = 1;
  std::vector<Method> methods{Method::Joint, Method::Exhaustive};
  std::vector<double> grid{0.0, 0.5, 1.0, 1.5, 2.0, 2.5};
  // When false every mean_ms is written as 0 so the CSV is reproducible.
  bool timing = true;
  // 0: hardware concurrency. SLP_THREADS caps either choice.
  std::size_t threads = 0;

  // Throws ConfigError.
  void validate() const;
  static SweepConfig from_json(const nlohmann::json& j);
  static SweepConfig load(const std::string& path);
  nlohmann::json to_json() const;
};

double dbw_to_watts(double dbw);

struct MethodOutcome {
  Method method = Method::Joint;
  double pmax_dbw = 0.0;
  bool feasible = false;
  double min_sinr_db = 0.0;         // over boundary users, meaningful when feasible
  conic::Status status = conic::Status::Infeasible;
  std::string diagnostic;
  double solve_ms = 0.0;
  std::size_t programs = 0;         // convex programs solved
  std::size_t checked = 0;          // optimal solutions passed through InvariantCheck
  std::size_t violations = 0;       // of those, how many failed
  std::vector<double> delta1;       // exhaustive: chosen delta1 per boundary user
};

struct SlotOutcome {
  std::size_t slot = 0;
  std::vector<std::size_t> symbols;
  std::vector<MethodOutcome> outcomes;  // pmax-major, then config.methods order
};

// Slot data: channel and symbols drawn from one mt19937_64 seeded with
// seed ^ slot, channel first.
struct SlotDraw {
  ComplexChannel channel;
  SymbolAssignment symbols;
};
SlotDraw draw_slot(const SweepConfig& config, std::size_t order, std::size_t slot);

MethodOutcome run_method(const PrecodingInstance& instance, Method method, const std::vector<double>& grid, bool timing);

SlotOutcome run_slot(const SweepConfig& config, const std::shared_ptr<const Alphabet>& alphabet, std::size_t slot);
SlotOutcome run_slot(const SweepConfig& config, const std::shared_ptr<const Alphabet>& alphabet, const SlotDraw& draw,
                     std::size_t slot);

struct SweepRow {
  double pmax_dbw = 0.0;
  Method method = Method::Joint;
  double mean_min_sinr_db = 0.0;
  double std_min_sinr_db = 0.0;
  std::size_t feasible = 0;
  std::size_t infeasible = 0;
  double mean_ms = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;  // pmax-major, then config.methods order
  std::size_t checked = 0;
  std::size_t violations = 0;
};

// Mean and sample standard deviation over feasible slots of each
// (pmax, method); slots are reduced in index order.
SweepResult aggregate(const SweepConfig& config, const std::vector<SlotOutcome>& slots);

struct SweepRun {
  SweepResult result;
  std::vector<SlotOutcome> slots;
};

std::size_t worker_count(const SweepConfig& config);
// Loads the constellation first so a bad name fails before any slot runs.
SweepRun run_sweep(const SweepConfig& config);

std::string format_csv(const SweepResult& result);
void emit_csv(const SweepResult& result, const std::string& path);
// Inverse of format_csv (feasible counts are not part of the CSV and read back as 0).
SweepResult parse_csv(const std::string& text);

// One JSON document per (slot, pmax, method), in slot order.
void write_slot_log(const std::vector<SlotOutcome>& slots, std::ostream& out);
void write_slot_log(const std::vector<SlotOutcome>& slots, const std::string& path);

}  // namespace slp

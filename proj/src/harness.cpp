// SPDX-License-Identifier: Apache-2.0
#include "slp/harness.hpp"

#include "slp/errors.hpp"
#include "slp/io.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>
#include <type_traits>

namespace slp {

using nlohmann::json;

const char* to_string(Method m) { return m == Method::Joint ? "joint" : "exhaustive"; }

Method method_from_string(const std::string& name) {
  if (name == "joint") return Method::Joint;
  if (name == "exhaustive") return Method::Exhaustive;
  throw ConfigError("unknown method '" + name + "' (expected joint or exhaustive)");
}

double dbw_to_watts(double dbw) { return std::pow(10.0, dbw / 10.0); }

void SweepConfig::validate() const {
  if (antennas == 0 || users == 0) throw ConfigError("N and K must be at least 1");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ConfigError("sigma must be positive");
  if (slots == 0) throw ConfigError("slots must be at least 1");
  if (pmax_dbw.empty()) throw ConfigError("the pmax grid is empty");
  for (std::size_t k = 0; k < pmax_dbw.size(); ++k) {
    if (!std::isfinite(pmax_dbw[k])) throw ConfigError("pmax values must be finite");
    if (k > 0 && !(pmax_dbw[k] > pmax_dbw[k - 1])) throw ConfigError("the pmax grid must be strictly increasing");
  }
  if (methods.empty()) throw ConfigError("no methods selected");
  for (std::size_t a = 0; a < methods.size(); ++a)
    for (std::size_t b = a + 1; b < methods.size(); ++b)
      if (methods[a] == methods[b]) throw ConfigError(std::string("method '") + to_string(methods[a]) + "' listed twice");
  const bool exhaustive = std::find(methods.begin(), methods.end(), Method::Exhaustive) != methods.end();
  if (exhaustive && grid.empty()) throw ConfigError("the exhaustive method needs a nonempty delta1 grid");
  for (double g : grid)
    if (!(g >= 0.0) || !std::isfinite(g)) throw ConfigError("delta1 grid values must be finite and nonnegative");
}

namespace {

template <typename T>
T field(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  if constexpr (std::is_unsigned_v<T> && !std::is_same_v<T, bool>)
    if (!j.at(key).is_number_unsigned())
      throw ConfigError(std::string("config field '") + key + "' must be a nonnegative integer");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config field '") + key + "': " + e.what());
  }
}

std::vector<double> number_range(const json& j, const char* key) {
  const json& v = j.at(key);
  if (v.is_array()) {
    std::vector<double> out;
    for (const auto& x : v) {
      if (!x.is_number()) throw ConfigError(std::string("config field '") + key + "' must hold numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }
  try {
    if (v.is_string()) return parse_grid(v.get<std::string>());
    if (v.is_object()) {
      const double stop = v.contains("stop") ? v.at("stop").get<double>() : v.at("end").get<double>();
      return make_grid(v.at("start").get<double>(), v.at("step").get<double>(), stop);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config field '") + key + "': " + e.what());
  } catch (const DomainError& e) {
    throw ConfigError(std::string("config field '") + key + "': " + e.what());
  }
  throw ConfigError(std::string("config field '") + key + "' must be a list, a start:step:end string or {start, step, stop}");
}

}  // namespace

SweepConfig SweepConfig::from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("sweep config must be a JSON object");
  static const std::vector<std::string> known{"N", "K", "sigma", "constellation", "raw_power", "pmax_dbw", "slots",
                                              "seed", "methods", "grid", "timing", "threads"};
  for (const auto& item : j.items())
    if (std::find(known.begin(), known.end(), item.key()) == known.end())
      throw ConfigError("unknown config field '" + item.key() + "'");
  SweepConfig c;
  c.antennas = field<std::size_t>(j, "N", c.antennas);
  c.users = field<std::size_t>(j, "K", c.users);
  c.sigma = field<double>(j, "sigma", c.sigma);
  c.constellation = field<std::string>(j, "constellation", c.constellation);
  c.raw_power = field<bool>(j, "raw_power", c.raw_power);
  c.slots = field<std::size_t>(j, "slots", c.slots);
  c.seed = field<std::uint64_t>(j, "seed", c.seed);
  c.timing = field<bool>(j, "timing", c.timing);
  c.threads = field<std::size_t>(j, "threads", c.threads);
  if (j.contains("pmax_dbw")) c.pmax_dbw = number_range(j, "pmax_dbw");
  if (j.contains("grid")) c.grid = number_range(j, "grid");
  if (j.contains("methods")) {
    c.methods.clear();
    for (const auto& name : field<std::vector<std::string>>(j, "methods", {})) c.methods.push_back(method_from_string(name));
  }
  c.validate();
  return c;
}

SweepConfig SweepConfig::load(const std::string& path) {
  try {
    return from_json(read_json_file(path));
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
}

json SweepConfig::to_json() const {
  std::vector<std::string> names;
  for (auto m : methods) names.emplace_back(to_string(m));
  return {{"N", antennas},   {"K", users},       {"sigma", sigma},   {"constellation", constellation},
          {"raw_power", raw_power}, {"pmax_dbw", pmax_dbw}, {"slots", slots}, {"seed", seed},
          {"methods", names}, {"grid", grid},    {"timing", timing}, {"threads", threads}};
}

SlotDraw draw_slot(const SweepConfig& config, std::size_t order, std::size_t slot) {
  std::mt19937_64 rng(config.seed ^ static_cast<std::uint64_t>(slot));
  SlotDraw d;
  d.channel = sample_channel(config.users, config.antennas, rng);
  d.symbols = sample_symbols(config.users, order, rng);
  return d;
}

MethodOutcome run_method(const PrecodingInstance& instance, Method method, const std::vector<double>& grid, bool timing) {
  MethodOutcome out;
  out.method = method;
  const auto start = std::chrono::steady_clock::now();
  SlpSolution best;
  if (method == Method::Joint) {
    best = solve_joint(instance);
    out.programs = 1;
    if (best.optimal()) {
      ++out.checked;
      if (!best.check.ok()) ++out.violations;
    }
  } else {
    auto observe = [&](const std::vector<double>&, const SlpSolution& s) {
      if (!s.optimal()) return;
      ++out.checked;
      if (!s.check.ok()) ++out.violations;
    };
    ExhaustiveResult ex = exhaustive_search(instance, grid, observe);
    out.programs = ex.evaluated;
    out.delta1 = ex.best_delta1;
    best = std::move(ex.best);
  }
  if (timing) out.solve_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  out.status = best.status;
  out.diagnostic = best.diagnostic;
  if (best.optimal() && best.all_interior) {
    out.diagnostic = "no user has a boundary symbol; the worst-user objective is undefined";
  } else if (best.optimal()) {
    out.feasible = true;
    out.min_sinr_db = sinr_db(best.min_power, instance.sigma);
  }
  return out;
}

SlotOutcome run_slot(const SweepConfig& config, const std::shared_ptr<const Alphabet>& alphabet, const SlotDraw& draw,
                     std::size_t slot) {
  SlotOutcome out;
  out.slot = slot;
  out.symbols = draw.symbols.indices();
  PrecodingInstance inst = make_instance(alphabet, draw.channel, draw.symbols, config.sigma, 1.0);
  for (double dbw : config.pmax_dbw) {
    inst.pmax = dbw_to_watts(dbw);
    for (Method m : config.methods) {
      MethodOutcome o = run_method(inst, m, config.grid, config.timing);
      o.pmax_dbw = dbw;
      out.outcomes.push_back(std::move(o));
    }
  }
  return out;
}

SlotOutcome run_slot(const SweepConfig& config, const std::shared_ptr<const Alphabet>& alphabet, std::size_t slot) {
  return run_slot(config, alphabet, draw_slot(config, alphabet->size(), slot), slot);
}

SweepResult aggregate(const SweepConfig& config, const std::vector<SlotOutcome>& slots) {
  SweepResult res;
  const std::size_t nm = config.methods.size();
  for (std::size_t p = 0; p < config.pmax_dbw.size(); ++p)
    for (std::size_t m = 0; m < nm; ++m) {
      SweepRow row;
      row.pmax_dbw = config.pmax_dbw[p];
      row.method = config.methods[m];
      double sum = 0.0, ms = 0.0;
      for (const auto& s : slots) {
        const MethodOutcome& o = s.outcomes.at(p * nm + m);
        ms += o.solve_ms;
        if (o.feasible) {
          ++row.feasible;
          sum += o.min_sinr_db;
        } else {
          ++row.infeasible;
        }
      }
      if (row.feasible > 0) row.mean_min_sinr_db = sum / static_cast<double>(row.feasible);
      if (row.feasible > 1) {
        double sq = 0.0;
        for (const auto& s : slots) {
          const MethodOutcome& o = s.outcomes[p * nm + m];
          if (o.feasible) sq += (o.min_sinr_db - row.mean_min_sinr_db) * (o.min_sinr_db - row.mean_min_sinr_db);
        }
        row.std_min_sinr_db = std::sqrt(sq / static_cast<double>(row.feasible - 1));
      }
      if (!slots.empty()) row.mean_ms = ms / static_cast<double>(slots.size());
      res.rows.push_back(row);
    }
  for (const auto& s : slots)
    for (const auto& o : s.outcomes) {
      res.checked += o.checked;
      res.violations += o.violations;
    }
  return res;
}

std::size_t worker_count(const SweepConfig& config) {
  std::size_t n = config.threads > 0 ? config.threads : std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("SLP_THREADS")) {
    char* end = nullptr;
    const unsigned long cap = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && cap > 0) n = std::min<std::size_t>(n, cap);
  }
  return std::max<std::size_t>(1, std::min(n, config.slots));
}

SweepRun run_sweep(const SweepConfig& config) {
  config.validate();
  std::shared_ptr<const Alphabet> alphabet;
  try {
    alphabet = make_alphabet(load_constellation(config.constellation, config.raw_power));
  } catch (const std::exception& e) {
    throw ConfigError("cannot load constellation: " + std::string(e.what()));
  }
  if (alphabet->constellation.collinear()) throw ConfigError("collinear constellations are not supported by the precoder");

  SweepRun run;
  run.slots.resize(config.slots);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    while (true) {
      const std::size_t slot = next.fetch_add(1);
      if (slot >= config.slots) return;
      try {
        run.slots[slot] = run_slot(config, alphabet, slot);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = config.slots;
      }
    }
  };
  const std::size_t workers = worker_count(config);
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  run.result = aggregate(config, run.slots);
  return run;
}

std::string format_csv(const SweepResult& result) {
  std::string out = "pmax_dbw,method,mean_min_sinr_db,std_min_sinr_db,infeasible,mean_ms\n";
  char line[256];
  for (const auto& r : result.rows) {
    std::snprintf(line, sizeof line, "%.6f,%s,%.6f,%.6f,%zu,%.6f\n", r.pmax_dbw, to_string(r.method), r.mean_min_sinr_db,
                  r.std_min_sinr_db, r.infeasible, r.mean_ms);
    out += line;
  }
  return out;
}

void emit_csv(const SweepResult& result, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << format_csv(result);
  out.flush();
  if (!out) throw IoError("failed writing '" + path + "'");
}

SweepResult parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "pmax_dbw,method,mean_min_sinr_db,std_min_sinr_db,infeasible,mean_ms")
    throw IoError("unexpected CSV header");
  SweepResult res;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) cells.push_back(cell);
    if (cells.size() != 6) throw IoError("CSV row has " + std::to_string(cells.size()) + " cells: " + line);
    try {
      SweepRow r;
      r.pmax_dbw = std::stod(cells[0]);
      r.method = method_from_string(cells[1]);
      r.mean_min_sinr_db = std::stod(cells[2]);
      r.std_min_sinr_db = std::stod(cells[3]);
      r.infeasible = std::stoul(cells[4]);
      r.mean_ms = std::stod(cells[5]);
      res.rows.push_back(r);
    } catch (const std::exception& e) {
      throw IoError("bad CSV row '" + line + "': " + e.what());
    }
  }
  return res;
}

void write_slot_log(const std::vector<SlotOutcome>& slots, std::ostream& out) {
  for (const auto& s : slots) {
    json symbols = json::array();
    for (auto i : s.symbols) symbols.push_back(i + 1);
    for (const auto& o : s.outcomes) {
      json line{{"slot", s.slot},
                {"symbols", symbols},
                {"pmax_dbw", o.pmax_dbw},
                {"method", to_string(o.method)},
                {"feasible", o.feasible},
                {"status", conic::to_string(o.status)},
                {"programs", o.programs},
                {"invariant_violations", o.violations},
                {"solve_ms", o.solve_ms}};
      line["min_sinr_db"] = o.feasible ? json(o.min_sinr_db) : json(nullptr);
      if (!o.delta1.empty()) line["delta1"] = o.delta1;
      if (!o.diagnostic.empty()) line["diagnostic"] = o.diagnostic;
      out << line.dump() << '\n';
    }
  }
}

void write_slot_log(const std::vector<SlotOutcome>& slots, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_slot_log(slots, out);
  if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace slp

// SPDX-License-Identifier: Apache-2.0
#include "slp/io.hpp"

#include "slp/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>

namespace slp {

using nlohmann::json;

const std::vector<std::string>& builtin_constellation_names() {
  static const std::vector<std::string> names{"qpsk", "8psk", "16qam", "8opt"};
  return names;
}

std::optional<Constellation> builtin_constellation(std::string_view name) {
  if (name == "qpsk") return make_psk(4, std::numbers::pi / 4.0);
  if (name == "8psk") return make_psk(8);
  if (name == "16qam") return make_square_qam(16);
  if (name == "8opt") return make_8opt();
  return std::nullopt;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw IoError("'" + path + "' is not valid JSON: " + e.what());
  }
}

namespace {

Vec2 pair_from_json(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
    throw IoError(where + ": expected a [re, im] pair, got " + v.dump());
  return {v[0].get<double>(), v[1].get<double>()};
}

double parse_double(std::string_view text) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
    throw DomainError("'" + std::string(text) + "' is not a number");
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? s.npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

json vec_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

}  // namespace

Constellation constellation_from_json(const json& j, bool raw_power) {
  if (!j.is_array()) throw IoError("constellation must be a JSON array of [re, im] pairs");
  std::vector<Vec2> pts;
  for (std::size_t k = 0; k < j.size(); ++k) pts.push_back(pair_from_json(j[k], "constellation point " + std::to_string(k + 1)));
  return raw_power ? Constellation::raw(std::move(pts)) : Constellation::normalized(std::move(pts));
}

Constellation load_constellation(const std::string& name_or_path, bool raw_power) {
  if (auto c = builtin_constellation(name_or_path)) return std::move(*c);
  std::ifstream probe(name_or_path);
  if (!probe) {
    std::string known;
    for (const auto& n : builtin_constellation_names()) known += (known.empty() ? "" : ", ") + n;
    throw IoError("'" + name_or_path + "' is neither a built-in constellation (" + known + ") nor a readable file");
  }
  return constellation_from_json(read_json_file(name_or_path), raw_power);
}

ComplexChannel channel_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw IoError("channels must be a nonempty array of user rows");
  const std::size_t n = j[0].is_array() ? j[0].size() : 0;
  if (n == 0) throw IoError("channel rows must be nonempty arrays of [re, im] pairs");
  ComplexChannel ch;
  ch.rows.resize(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < j.size(); ++k) {
    if (!j[k].is_array() || j[k].size() != n)
      throw IoError("channel row " + std::to_string(k + 1) + " must have " + std::to_string(n) + " entries");
    for (std::size_t a = 0; a < n; ++a) {
      const Vec2 v = pair_from_json(j[k][a], "channel entry (" + std::to_string(k + 1) + ", " + std::to_string(a + 1) + ")");
      if (!v.allFinite()) throw IoError("channel entries must be finite");
      ch.rows(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(a)) = {v.x(), v.y()};
    }
  }
  return ch;
}

ComplexChannel load_channel(const std::string& path) { return channel_from_json(read_json_file(path)); }

std::vector<double> parse_number_list(std::string_view csv) {
  std::vector<double> out;
  for (const auto part : split(csv, ',')) out.push_back(parse_double(part));
  return out;
}

SymbolAssignment parse_symbols(std::string_view csv, std::size_t order) {
  std::vector<std::size_t> idx;
  for (const double v : parse_number_list(csv)) {
    if (v != std::floor(v) || v < 1.0 || v > static_cast<double>(order))
      throw DomainError("symbol label " + std::to_string(v) + " is not in 1.." + std::to_string(order));
    idx.push_back(static_cast<std::size_t>(v) - 1);
  }
  return SymbolAssignment(std::move(idx));
}

std::vector<double> parse_grid(std::string_view spec) {
  const auto parts = split(spec, ':');
  if (parts.size() != 3) throw DomainError("grid must be written start:step:end, got '" + std::string(spec) + "'");
  return make_grid(parse_double(parts[0]), parse_double(parts[1]), parse_double(parts[2]));
}

json to_json(const DpcirRegion& r) {
  json rows = json::array();
  for (Eigen::Index k = 0; k < r.A.rows(); ++k) rows.push_back({r.A(k, 0), r.A(k, 1)});
  json neighbors = json::array();
  for (auto n : r.neighbors) neighbors.push_back(n + 1);
  json edges = json::array();
  for (const auto& e : r.edges) edges.push_back({e.x(), e.y()});
  json out{{"point", r.owner + 1},
           {"shape", to_string(r.shape)},
           {"vertex", {r.vertex.x(), r.vertex.y()}},
           {"A", rows},
           {"b", vec_json(r.b)},
           {"c", vec_json(r.c)},
           {"neighbors", neighbors},
           {"edges", edges}};
  out["boundary_rows"] = r.boundary_rows ? json{r.boundary_rows->first, r.boundary_rows->second} : json(nullptr);
  return out;
}

json to_json(const SlpSolution& s) {
  json out{{"status", conic::to_string(s.status)},
           {"formulation", to_string(s.formulation)},
           {"all_interior", s.all_interior},
           {"relaxed", s.relaxed},
           {"iterations", s.newton_steps}};
  if (!s.diagnostic.empty()) out["diagnostic"] = s.diagnostic;
  if (!s.optimal()) return out;
  out["t"] = s.t;
  out["u_tilde"] = vec_json(s.u_tilde);
  json u = json::array();
  for (const auto& z : unstack_real(s.u_tilde)) u.push_back({z.real(), z.imag()});
  out["u"] = u;
  json deltas = json::array();
  for (const auto& d : s.deltas) deltas.push_back({d.first(), d.second()});
  out["deltas"] = deltas;
  out["per_user_power"] = s.per_user_power;
  out["min_power"] = s.min_power;
  out["transmit_power"] = s.u_tilde.squaredNorm();
  out["invariants"] = {{"ok", s.check.ok()},
                       {"power_excess", s.check.power_excess},
                       {"equality_residual", s.check.equality_residual},
                       {"bound_violation", s.check.bound_violation},
                       {"containment_violation", s.check.containment_violation}};
  return out;
}

}  // namespace slp

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "slp/constellation.hpp"
#include "slp/dpcir.hpp"
#include "slp/precoding.hpp"
#include "slp/signal_model.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace slp {

// "qpsk", "8psk", "16qam" or "8opt"; nullopt for any other name.
std::optional<Constellation> builtin_constellation(std::string_view name);
const std::vector<std::string>& builtin_constellation_names();

// A built-in name, or a path to a JSON array of [re, im] pairs. Files are
// normalized to unit average power unless raw_power is set. Throws IoError
// or DegenerateConstellation.
Constellation load_constellation(const std::string& name_or_path, bool raw_power = false);
Constellation constellation_from_json(const nlohmann::json& j, bool raw_power = false);

// K rows of N [re, im] pairs.
ComplexChannel channel_from_json(const nlohmann::json& j);
ComplexChannel load_channel(const std::string& path);

// Comma-separated 1-based constellation labels.
SymbolAssignment parse_symbols(std::string_view csv, std::size_t order);
std::vector<double> parse_number_list(std::string_view csv);
// "start:step:end"
std::vector<double> parse_grid(std::string_view spec);

nlohmann::json read_json_file(const std::string& path);

nlohmann::json to_json(const DpcirRegion& region);
nlohmann::json to_json(const SlpSolution& solution);

}  // namespace slp

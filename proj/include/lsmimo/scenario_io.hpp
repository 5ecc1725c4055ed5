#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "lsmimo/scenario.hpp"

namespace lsmimo {

/// Strict JSON scenario reader: unknown keys anywhere are a ConfigError naming the key;
/// syntax errors report line and column.
Scenario parse_scenario_text(std::string_view text, const std::string& origin = "<memory>");
Scenario parse_scenario(const std::filesystem::path& path);

/// Every field written explicitly, keys sorted. parse(serialize(s)) == s.
std::string serialize_scenario(const Scenario& scenario);

/// FNV-1a 64 of serialize_scenario(), as 16 lowercase hex digits.
std::string scenario_hash(const Scenario& scenario);

std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace lsmimo

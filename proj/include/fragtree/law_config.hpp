#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <json.hpp>

#include "fragtree/split_law.hpp"

namespace fragtree {

/// Parses the law mini-grammar:
///
///   law      := "binary" | "mary:" int | "quad:" int | "simplex:" int
///             | "beta:" real "," real | "det:" weights | "lattice:" real ":" ints
///             | "empirical:" path
///   weights  := weight ("," weight)*
///   weight   := real | real "/" real
///
/// Throws LawConfigError on malformed input.
SplitLaw parse_law(std::string_view text);

/// Structured key-value form of a law. Numbers are stored at full precision
/// so law_from_json(law_to_json(law)) reproduces the same law.
nlohmann::json law_to_json(const SplitLaw& law);
SplitLaw law_from_json(const nlohmann::json& config);

/// Reads split vectors, one per line, comma or whitespace separated; lines
/// starting with '#' are comments.
SplitLaw load_empirical_law(const std::string& path);

/// FNV-1a hash of the canonical JSON form, printed as 16 hex digits.
std::string law_hash(const SplitLaw& law);

std::uint64_t fnv1a64(std::string_view text);
std::string hex64(std::uint64_t value);

}  // namespace fragtree

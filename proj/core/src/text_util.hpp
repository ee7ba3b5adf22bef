#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tbsynth::text {

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
std::vector<std::string> split_ws(std::string_view s);
bool starts_with(std::string_view s, std::string_view prefix);
bool ends_with(std::string_view s, std::string_view suffix);

// Shell-style glob with '*' and '?', case-insensitive.
bool glob_match(std::string_view pattern, std::string_view name);

// Splits an identifier on '_', digit runs and camelCase boundaries; lowercase.
std::vector<std::string> name_tokens(std::string_view name);

bool is_identifier(std::string_view s);

// "0x1A", "0b101", "26", "8'hFF", "'d12". Whitespace and '_' separators allowed.
std::optional<std::uint64_t> parse_unsigned(std::string_view s);

std::string hex(std::uint64_t v);  // "0x2c"
std::string sv_hex(std::uint64_t v, int width);  // "8'h2c"

std::uint64_t width_mask(int width);
bool fits_in_width(std::uint64_t v, int width);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace tbsynth::text

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace dpmeter {

// Formats with %.6g: the fixed text form used in every CSV/JSON the tool
// emits, so reruns are byte-identical.
std::string format_g6(double v);
// Formats with %.17g (round-trip exact); used in seed-derivation tags.
std::string format_g17(double v);

// Canonical hex: to_hex emits lowercase and from_hex accepts nothing else,
// so every byte sequence has exactly one spelling.
std::string to_hex(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> from_hex(const std::string& hex);  // throws Errc::kParse

// Writes to <path>.tmp then renames, so readers never observe a partial file.
void atomic_write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);  // throws Errc::kIo

// Splits "a,b,c" into trimmed non-empty tokens; throws Errc::kParse on an
// empty list or empty element.
std::vector<std::string> split_csv_list(const std::string& s);

}  // namespace dpmeter

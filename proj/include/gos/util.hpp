#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace gos {

enum class LogLevel { debug, info, warn, error, off };

// Process-wide diagnostics sink (stderr). Tests usually silence it.
void set_log_level(LogLevel level);
LogLevel log_level();
void log(LogLevel level, std::string_view message);
inline void log_warn(std::string_view message) { log(LogLevel::warn, message); }
inline void log_info(std::string_view message) { log(LogLevel::info, message); }

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

/// Splits one CSV record on commas. Double-quoted fields may contain commas
/// and escaped quotes ("").
std::vector<std::string> split_csv_record(std::string_view line);

/// Quotes a field only when it contains a comma, quote or newline.
std::string csv_escape(std::string_view field);

/// Lines of a text document with trailing '\r' removed. A final empty line
/// produced by a trailing newline is dropped.
std::vector<std::string> split_lines(std::string_view text);

/// 128 random bits from the OS entropy source, hex encoded.
std::string random_token();

/// SplitMix64 step; used to derive independent stream seeds from one seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

/// Shortest round-trip decimal representation of a double.
std::string format_double(double value);

}  // namespace gos

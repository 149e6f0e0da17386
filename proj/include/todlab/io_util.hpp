#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace todlab {

// Malformed or truncated file contents (wrong magic, bad CSV cell, ...).
struct format_error : std::runtime_error {
    explicit format_error(const std::string& what) : std::runtime_error(what) {}
};

std::string read_text_file(const std::filesystem::path& path);

// Whole-file atomic write: write to <path>.tmp in the same directory, then
// rename over the target.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

// Shortest decimal form that round-trips to the same double (via
// std::to_chars), so emitted CSV/JSON numbers are exact and reproducible.
std::string fmt_double(double v);

// Splits on a single-character delimiter; keeps empty fields.
std::vector<std::string> split(std::string_view line, char delim);

// Strict double/integer parsing of a whole field (no locale, no trailing
// junk). Throws format_error mentioning `context` on failure.
double parse_double(std::string_view field, const std::string& context);
long long parse_int(std::string_view field, const std::string& context);

}  // namespace todlab

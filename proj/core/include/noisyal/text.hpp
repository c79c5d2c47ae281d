#pragma once

// Byte-stable number formatting shared by every text artifact the toolkit
// writes. format_double emits the shortest decimal form that round-trips, so
// rewriting a file from parsed values reproduces it byte-for-byte.

#include <optional>
#include <string>

namespace noisyal {

std::string format_double(double v);

// Strict full-string parse; nullopt on trailing garbage or non-finite values.
std::optional<double> parse_double(const std::string& s);

} // namespace noisyal

#pragma once

#include <string>

namespace microdepth {

// Shortest round-trip decimal form (std::to_chars); the reason regenerated
// CSV artifacts are byte-identical.
std::string format_double(double v);

// Locale-independent strtod-style parse; throws invalid_dataset on junk.
double parse_double(const std::string& field, const std::string& context);

} // namespace microdepth

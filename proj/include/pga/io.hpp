#pragma once

#include <string>
#include <vector>

namespace pga {

// Shortest decimal rendering that round-trips the double exactly.
std::string format_double(double value);

// Quote a CSV field only when it needs it (comma, quote, newline).
std::string csv_escape(const std::string& field);

// Split one CSV line honoring double-quoted fields.
std::vector<std::string> csv_split(const std::string& line);

// Strict double/int parsing of a whole field; returns false on any junk.
bool parse_double(const std::string& field, double& out);
bool parse_int(const std::string& field, int& out);

}  // namespace pga

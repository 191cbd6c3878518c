#pragma once

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace riskphase::csv {

/// Reads one RFC 4180 record (quoted fields may contain commas, doubled
/// quotes and newlines). Returns nullopt at end of stream.
std::optional<std::vector<std::string>> read_row(std::istream& in);

/// Quotes a field when it contains a comma, quote or newline.
std::string escape(const std::string& field);
void write_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace riskphase::csv

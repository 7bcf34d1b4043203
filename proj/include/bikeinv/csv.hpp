#ifndef BIKEINV_CSV_HPP
#define BIKEINV_CSV_HPP

#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace bikeinv::csv {

/// Splits one RFC 4180 record. Quoted fields may contain commas and doubled
/// quotes; embedded newlines are not supported.
std::vector<std::string> split_record(std::string_view line);

/// Reads the next non-empty line that is not a '#' comment. Strips a
/// trailing '\r'. Returns false at end of stream.
bool next_record(std::istream& in, std::string& line, std::size_t& line_no);

/// Index of `name` in `header`, or -1.
int column_index(const std::vector<std::string>& header, std::string_view name);

std::string format_double(double v);

}  // namespace bikeinv::csv

#endif  // BIKEINV_CSV_HPP

#ifndef BIKEINV_COMMON_HPP
#define BIKEINV_COMMON_HPP

#include <chrono>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace bikeinv {

// Wall-clock station time. Trip files carry local time without a zone, so
// timestamps are kept naive and day boundaries fall on local midnight.
using Timestamp = std::chrono::sys_seconds;
using Date = std::chrono::sys_days;

using StationId = std::string;

/// Failure categories. The CLI maps them onto exit codes.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FormatError : public DataError {
 public:
  using DataError::DataError;
};

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses "YYYY-MM-DD HH:MM:SS" with an optional fractional-second suffix,
/// which is truncated. Also accepts a 'T' separator.
std::optional<Timestamp> parse_timestamp(std::string_view text);
std::optional<Date> parse_date(std::string_view text);

std::string format_timestamp(Timestamp t);
std::string format_date(Date d);

/// Monday = 0 ... Sunday = 6.
int day_of_week(Date d);

inline Date date_of(Timestamp t) { return std::chrono::floor<std::chrono::days>(t); }

/// Shifts by whole calendar months, clamping the day to the month's end.
Date add_months(Date d, int months);

/// 64-bit FNV-1a, used for config fingerprints.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

}  // namespace bikeinv

#endif  // BIKEINV_COMMON_HPP

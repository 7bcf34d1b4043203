#include <doctest.h>

#include <sstream>

#include "bikeinv/common.hpp"
#include "bikeinv/csv.hpp"

using namespace bikeinv;
using namespace std::chrono;

TEST_CASE("timestamps round trip and truncate fractions") {
  const auto t = parse_timestamp("2018-03-04 05:06:07.8910");
  REQUIRE(t);
  CHECK(format_timestamp(*t) == "2018-03-04 05:06:07");
  CHECK(parse_timestamp("2018-03-04T05:06:07") == t);
  CHECK_FALSE(parse_timestamp("2018-13-04 05:06:07"));
  CHECK_FALSE(parse_timestamp("yesterday"));
  CHECK_FALSE(parse_timestamp("2018-03-04 25:00:00"));
}

TEST_CASE("calendar helpers") {
  const Date monday{year{2018} / January / 1};
  CHECK(day_of_week(monday) == 0);
  CHECK(day_of_week(monday + days{6}) == 6);
  CHECK(format_date(add_months(monday, 9)) == "2018-10-01");
  CHECK(format_date(add_months(Date{year{2018} / January / 31}, 1)) == "2018-02-28");
  CHECK(date_of(*parse_timestamp("2018-05-06 23:59:59")) == Date{year{2018} / May / 6});
}

TEST_CASE("fnv1a64 matches the published test vectors") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(hex64(0xabcULL) == "0000000000000abc");
}

TEST_CASE("csv records") {
  CHECK(csv::split_record("a,\"b,c\",\"d\"\"e\"") == std::vector<std::string>{"a", "b,c", "d\"e"});
  CHECK(csv::split_record("x,,y") == std::vector<std::string>{"x", "", "y"});
  std::istringstream in("# note\n\nh1,h2\r\n1,2\n");
  std::string line;
  std::size_t no = 0;
  REQUIRE(csv::next_record(in, line, no));
  CHECK(line == "h1,h2");
  CHECK(no == 3);
  REQUIRE(csv::next_record(in, line, no));
  CHECK(line == "1,2");
  CHECK_FALSE(csv::next_record(in, line, no));
}

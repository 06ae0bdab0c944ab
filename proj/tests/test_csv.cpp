/*
 * Copyright 2026 The VeriGauge Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "test_support.hpp"
#include "verigauge/csv.hpp"
#include "verigauge/rng.hpp"

using namespace verigauge;

namespace {

std::vector<std::vector<std::string>> read_all(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::vector<std::string>> records;
  while (auto record = csv::read_record(in)) records.push_back(*record);
  return records;
}

}  // namespace

TEST_CASE("csv reads plain records") {
  auto records = read_all("a,b,c\n1,2,3\n");
  REQUIRE(records.size() == 2);
  CHECK(records[0] == std::vector<std::string>{"a", "b", "c"});
  CHECK(records[1] == std::vector<std::string>{"1", "2", "3"});
}

TEST_CASE("csv handles quoting per RFC 4180") {
  auto records = read_all("\"a,b\",\"say \"\"hi\"\"\",\"line\nbreak\"\n");
  REQUIRE(records.size() == 1);
  REQUIRE(records[0].size() == 3);
  CHECK(records[0][0] == "a,b");
  CHECK(records[0][1] == "say \"hi\"");
  CHECK(records[0][2] == "line\nbreak");
}

TEST_CASE("csv tolerates crlf and missing final newline") {
  auto records = read_all("a,b\r\nc,d");
  REQUIRE(records.size() == 2);
  CHECK(records[0] == std::vector<std::string>{"a", "b"});
  CHECK(records[1] == std::vector<std::string>{"c", "d"});
}

TEST_CASE("csv write-read round trip preserves awkward fields") {
  const std::vector<std::string> fields{"plain", "with,comma", "with\"quote",
                                        "with\nnewline", ""};
  std::ostringstream out;
  csv::write_record(out, fields);
  auto records = read_all(out.str());
  REQUIRE(records.size() == 1);
  CHECK(records[0] == fields);
}

TEST_CASE("escape_field quotes only when needed") {
  CHECK(csv::escape_field("plain") == "plain");
  CHECK(csv::escape_field("a,b") == "\"a,b\"");
  CHECK(csv::escape_field("a\"b") == "\"a\"\"b\"");
}

TEST_CASE("format_double round-trips doubles bit for bit") {
  Xoshiro256pp rng(2026);
  for (int k = 0; k < 2000; ++k) {
    // Mix magnitudes: raw 53-bit uniforms and wide exponents.
    double value = rng.uniform();
    if (k % 3 == 1) value = (value - 0.5) * 1e12;
    if (k % 3 == 2) value = (value + 1e-9) * 1e-200;
    const double back = csv::parse_double(csv::format_double(value));
    std::uint64_t a = 0;
    std::uint64_t b = 0;
    std::memcpy(&a, &value, sizeof value);
    std::memcpy(&b, &back, sizeof back);
    CHECK(a == b);
  }
}

TEST_CASE("format_double renders sentinels as +inf/-inf") {
  const double inf = std::numeric_limits<double>::infinity();
  CHECK(csv::format_double(inf) == "+inf");
  CHECK(csv::format_double(-inf) == "-inf");
  CHECK(csv::parse_double("+inf") == inf);
  CHECK(csv::parse_double("-inf") == -inf);
}

TEST_CASE("parse_double rejects garbage") {
  CHECK(vgtest::error_name_of([] { csv::parse_double("fish"); }) ==
        "FormatError");
  CHECK(vgtest::error_name_of([] { csv::parse_double(""); }) == "FormatError");
  CHECK(vgtest::error_name_of([] { csv::parse_double("1.5x"); }) ==
        "FormatError");
}

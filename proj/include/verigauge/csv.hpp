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

#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace verigauge::csv {

/// Reads one CSV record (RFC 4180: quoted fields may contain commas,
/// doubled quotes, and embedded line breaks). Returns nullopt at EOF.
std::optional<std::vector<std::string>> read_record(std::istream& in);

/// Writes one record, quoting fields only where RFC 4180 requires it.
void write_record(std::ostream& out, const std::vector<std::string>& fields);

/// Quotes a single field if needed.
std::string escape_field(const std::string& field);

/// Renders a double with 17 significant digits so that parsing the text
/// recovers the exact bit pattern. Infinities render as "+inf"/"-inf".
std::string format_double(double value);

/// Inverse of format_double; throws AuditError{FormatError} on garbage.
double parse_double(const std::string& text);

}  // namespace verigauge::csv

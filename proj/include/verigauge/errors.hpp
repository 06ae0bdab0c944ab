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

#include <stdexcept>
#include <string>
#include <string_view>

namespace verigauge {

enum class Errc {
  IoError,
  SchemaError,
  DuplicateImage,
  DimensionError,
  NonFiniteValue,
  FormatError,
  ConflictingScore,
  SelfPair,
  UnknownAttribute,
  MissingEmbedding,
  MissingScore,
  ZeroNorm,
  EmptyDistribution,
  TooFewPairs,
  DomainError,
  ConfigError,
  ValidationFailed,
};

std::string_view errc_name(Errc code);

/// Error thrown by all library operations; carries a stable code for
/// programmatic handling plus a human-readable message.
class AuditError : public std::runtime_error {
 public:
  AuditError(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

}  // namespace verigauge

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

#include "verigauge/errors.hpp"

namespace verigauge {

std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::IoError:
      return "IoError";
    case Errc::SchemaError:
      return "SchemaError";
    case Errc::DuplicateImage:
      return "DuplicateImage";
    case Errc::DimensionError:
      return "DimensionError";
    case Errc::NonFiniteValue:
      return "NonFiniteValue";
    case Errc::FormatError:
      return "FormatError";
    case Errc::ConflictingScore:
      return "ConflictingScore";
    case Errc::SelfPair:
      return "SelfPair";
    case Errc::UnknownAttribute:
      return "UnknownAttribute";
    case Errc::MissingEmbedding:
      return "MissingEmbedding";
    case Errc::MissingScore:
      return "MissingScore";
    case Errc::ZeroNorm:
      return "ZeroNorm";
    case Errc::EmptyDistribution:
      return "EmptyDistribution";
    case Errc::TooFewPairs:
      return "TooFewPairs";
    case Errc::DomainError:
      return "DomainError";
    case Errc::ConfigError:
      return "ConfigError";
    case Errc::ValidationFailed:
      return "ValidationFailed";
  }
  return "UnknownError";
}

}  // namespace verigauge

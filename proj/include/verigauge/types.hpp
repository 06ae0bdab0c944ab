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

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace verigauge {

/// One image of one subject. Demographic attributes are subject-level
/// properties; per-image variation within a subject is a validation error.
struct ImageRecord {
  std::string image_id;
  std::string subject_id;
  std::map<std::string, std::string> attributes;
};

/// Parsed metadata file: the records plus the attribute column names from
/// the header (a column may exist with every cell empty, so the header is
/// kept explicitly).
struct Dataset {
  std::vector<ImageRecord> records;
  std::vector<std::string> attribute_names;

  bool has_attribute(const std::string& name) const;
};

/// Fixed-dimension float32 vectors keyed by image id. Values are stored
/// exactly as read; normalization, if any, happens inside the similarity
/// metric.
struct EmbeddingSet {
  std::uint32_t dimension = 0;
  std::unordered_map<std::string, std::vector<float>> entries;
};

/// Unordered image pair in canonical form (a < b lexicographically).
struct ImagePair {
  std::string a;
  std::string b;

  static ImagePair make(std::string x, std::string y) {
    if (y < x) std::swap(x, y);
    return ImagePair{std::move(x), std::move(y)};
  }

  auto operator<=>(const ImagePair&) const = default;
};

struct ImagePairHash {
  std::size_t operator()(const ImagePair& p) const {
    const std::size_t ha = std::hash<std::string>{}(p.a);
    const std::size_t hb = std::hash<std::string>{}(p.b);
    return ha ^ (hb + 0x9E3779B97F4A7C15ULL + (ha << 6) + (ha >> 2));
  }
};

/// Similarity scores keyed by unordered image pair.
struct ScoreTable {
  std::unordered_map<ImagePair, double, ImagePairHash> entries;
};

/// One diagnostic finding from dataset validation.
struct Finding {
  std::string code;
  std::string message;
};

struct GroupTally {
  std::size_t subjects = 0;
  std::size_t images = 0;
};

/// Result of validate_dataset. Any error entry means downstream modules
/// must reject the dataset; warnings are advisory and echoed into reports.
struct ValidationReport {
  // attribute name -> attribute value -> counts
  std::map<std::string, std::map<std::string, GroupTally>> attribute_groups;
  std::vector<Finding> warnings;
  std::vector<Finding> errors;

  bool ok() const { return errors.empty(); }
};

}  // namespace verigauge

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

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "verigauge/types.hpp"

namespace verigauge {

/// Demographic constraints applied to impostor pairs: under a non-empty
/// policy, both subjects of every impostor pair must agree on each listed
/// attribute. Genuine pairs are same-subject, hence never constrained.
struct YokingPolicy {
  std::vector<std::string> constrained_attributes;

  bool empty() const { return constrained_attributes.empty(); }
  /// "none" or "race+gender" style display name.
  std::string name() const;
};

struct PairSet {
  std::vector<ImagePair> genuine;
  std::vector<ImagePair> impostor;
  YokingPolicy policy;
  /// Subjects dropped because they lack a constrained attribute.
  std::size_t excluded_subjects = 0;
};

/// All unordered pairs of distinct images sharing a subject, in canonical
/// lexicographic order.
std::vector<ImagePair> enumerate_genuine_pairs(const Dataset& dataset);

struct ImpostorEnumeration {
  std::vector<ImagePair> pairs;
  std::size_t excluded_subjects = 0;
};

/// All unordered cross-subject image pairs whose subjects agree on every
/// constrained attribute, in canonical order. Throws UnknownAttribute if the
/// policy names an attribute absent from the metadata header.
ImpostorEnumeration enumerate_impostor_pairs(const Dataset& dataset,
                                             const YokingPolicy& policy);

PairSet build_pair_set(const Dataset& dataset, const YokingPolicy& policy);

struct StratifiedPairs {
  std::map<std::string, PairSet> groups;
  /// Impostor pairs whose subjects differ on the stratification attribute.
  PairSet cross_group;
  /// Pairs dropped because a subject lacks the attribute.
  std::size_t dropped_missing_attribute = 0;
};

/// Partitions a pair set by the subjects' value of `attribute`. Pairs
/// homogeneous on the attribute land in their group; heterogeneous impostor
/// pairs land in the reported cross-group bucket.
StratifiedPairs stratify_pairs(const PairSet& pairs, const Dataset& dataset,
                               const std::string& attribute);

/// Seeded uniform subsample without replacement, returned in canonical
/// order. count >= pairs.size() returns the input unchanged.
std::vector<ImagePair> subsample_pairs(std::span<const ImagePair> pairs,
                                       std::size_t count, std::uint64_t seed);

/// Export: `id_a,id_b,label` with label in {genuine, impostor}.
void write_pair_list_csv(std::ostream& out, const PairSet& pairs);

}  // namespace verigauge

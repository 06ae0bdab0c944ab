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

#include <cstddef>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "verigauge/scoring.hpp"
#include "verigauge/types.hpp"

namespace verigauge {

/// Difficulty tiering plan. tier_names runs easiest to hardest; the edges
/// are quantile fractions over each label's pairs, so |tier_names| must be
/// |quantile_edges| + 1.
struct TierSpec {
  std::vector<std::string> tier_names{"good", "bad", "ugly"};
  std::vector<double> quantile_edges{1.0 / 3.0, 2.0 / 3.0};

  /// Throws ConfigError unless names are distinct and nonempty, edges are
  /// strictly ascending inside (0, 1), and the counts line up.
  void validate() const;
};

struct TieredPairs {
  std::map<ImagePair, std::string> assignment;
  std::map<std::string, std::size_t> per_tier_counts;
  /// Easiest to hardest, as configured.
  std::vector<std::string> tier_names;
};

/// Ranks each label by reference score and cuts nearest-rank quantile
/// blocks: genuine ascending (a low-similarity genuine pair is hard to
/// verify) and impostor descending (a high-similarity impostor pair is hard
/// to reject), so the first block of each ranking is the hardest tier. Ties
/// in reference score are ordered by canonical pair and never straddle a
/// boundary; the full tie run lands in the harder tier. Throws TooFewPairs
/// when either label holds fewer pairs than tiers.
TieredPairs assign_difficulty_tiers(const ScoredPairSet& reference,
                                    const TierSpec& spec);

struct TierSummaryRow {
  std::string tier;
  std::size_t n_pairs = 0;
  /// Distinct subjects appearing in the tier's pairs.
  std::size_t n_identities = 0;
  /// Subject counts per value of the summarized attribute.
  std::map<std::string, std::size_t> per_group;
  /// Subjects lacking the attribute; per_group totals plus this equal
  /// n_identities.
  std::size_t missing_attribute = 0;
};

/// Per-tier pair, identity, and demographic-group counts. Rows follow the
/// configured tier order. `attribute` may be empty to skip the per-group
/// breakdown.
std::vector<TierSummaryRow> tier_summary(const TieredPairs& tiers,
                                         const Dataset& dataset,
                                         const std::string& attribute);

/// One line per tier, e.g. "good: 385 identities, 120 pairs".
std::string render_tier_summary(const std::vector<TierSummaryRow>& rows);

/// Splits a scored set by tier; every tier name keys an entry even when
/// empty. A pair absent from the assignment raises DomainError.
std::map<std::string, ScoredPairSet> split_by_tier(const ScoredPairSet& scored,
                                                   const TieredPairs& tiers);

/// Export: `id_a,id_b,label,tier` for every pair of the scored set.
void write_tier_csv(std::ostream& out, const ScoredPairSet& scored,
                    const TieredPairs& tiers);

}  // namespace verigauge

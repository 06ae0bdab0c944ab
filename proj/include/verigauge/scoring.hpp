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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "verigauge/pairing.hpp"
#include "verigauge/types.hpp"

namespace verigauge {

enum class Metric {
  Cosine,
  Dot,
  NegEuclidean,
};

std::string_view metric_name(Metric metric);
Metric metric_from_name(std::string_view name);

/// Similarity between two equal-dimension vectors; higher = more similar,
/// symmetric in (a, b). Cosine normalizes internally and lands in [-1, 1];
/// it rejects zero-norm inputs with ZeroNorm. Mismatched dimensions raise
/// DimensionError.
double similarity(std::span<const double> a, std::span<const double> b,
                  Metric metric);
/// Float32 inputs are widened exactly; results match the double overload on
/// the widened values bit for bit.
double similarity(std::span<const float> a, std::span<const float> b,
                  Metric metric);

struct ScoredPair {
  ImagePair pair;
  double score = 0.0;
};

/// The two score distributions a verification audit runs on: one list per
/// label, every score finite, pair membership matching the originating
/// PairSet.
struct ScoredPairSet {
  std::vector<ScoredPair> genuine;
  std::vector<ScoredPair> impostor;
  YokingPolicy policy;
  std::string metric_name;

  std::vector<double> genuine_scores() const;
  std::vector<double> impostor_scores() const;
};

/// Scores every pair via `similarity`, preserving pair order. Throws
/// MissingEmbedding naming the first image without a vector.
ScoredPairSet score_pairs(const PairSet& pairs, const EmbeddingSet& embeddings,
                          Metric metric);

/// Joins precomputed scores by unordered pair key; metric_name becomes
/// "external". Throws MissingScore naming the first absent pair.
ScoredPairSet attach_scores(const PairSet& pairs, const ScoreTable& table);

/// Export: `id_a,id_b,label,score` with 17-significant-digit scores so a
/// read-back is bit-exact.
void write_scored_pairs_csv(std::ostream& out, const ScoredPairSet& scored);
ScoredPairSet read_scored_pairs_csv(std::istream& in);
ScoredPairSet load_scored_pairs_csv(const std::string& path);
void save_scored_pairs_csv(const std::string& path,
                           const ScoredPairSet& scored);

}  // namespace verigauge

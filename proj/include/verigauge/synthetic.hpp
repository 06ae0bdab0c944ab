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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "verigauge/scoring.hpp"
#include "verigauge/types.hpp"

namespace verigauge {

struct EmbeddingSpec {
  std::uint32_t dimension = 0;
  /// Spread of subject centers around the group anchor on the unit sphere.
  /// Tighter dispersion makes impostors more alike, the ground-truth bias
  /// knob.
  double center_dispersion = 0.0;
  /// Spread of a subject's images around its center; 0 makes every genuine
  /// pair identical.
  double within_subject_sd = 0.0;
};

struct GroupSpec {
  std::string group_label;
  std::uint64_t n_subjects = 0;
  std::uint64_t images_per_subject = 0;
  double genuine_mean = 0.0;
  double genuine_sd = 1.0;
  double impostor_mean = 0.0;
  double impostor_sd = 1.0;
  std::optional<EmbeddingSpec> embedding_spec;
};

struct ScenarioSpec {
  std::vector<GroupSpec> groups;
  /// How far the cross-group impostor mean sits below the groups' own
  /// impostor means: the heterogeneity that yoking removes.
  double cross_group_impostor_mean_offset = 0.0;
  std::uint64_t seed = 0;

  /// Throws ConfigError unless labels are distinct and nonempty, score sds
  /// are positive, counts are >= 1, and any embedding specs are sane.
  void validate() const;
};

/// Strict JSON codec: unknown fields raise SchemaError, malformed JSON
/// raises FormatError, invariant violations raise ConfigError.
ScenarioSpec scenario_from_json_text(const std::string& text);
std::string scenario_to_json_text(const ScenarioSpec& spec);
ScenarioSpec load_scenario(const std::string& path);

struct SyntheticScores {
  std::map<std::string, ScoredPairSet> per_group;
  /// Impostor-only bucket pairing subjects from different groups.
  ScoredPairSet cross_group;
};

/// Draws Gaussian score samples per group per label, plus cross-group
/// impostors whose mean is the two groups' impostor-mean midpoint minus the
/// configured offset. Pair ids follow "<label>_s<subject>_i<image>"; output
/// is a pure function of the scenario, seed included.
SyntheticScores generate_scores(const ScenarioSpec& spec);

struct SyntheticPopulation {
  Dataset dataset;
  EmbeddingSet embeddings;
};

/// Draws subject centers on the unit sphere around a per-group anchor and
/// images as renormalized noisy copies of their center. Metadata carries
/// each group label under attribute "race". Requires embedding_spec on
/// every group (ConfigError) with one shared dimension (DimensionError).
SyntheticPopulation generate_embeddings(const ScenarioSpec& spec);

/// Phi((mu_g - mu_i) / sqrt(sd_g^2 + sd_i^2)): the exact AUC of two Gaussian
/// score families. Nonpositive sd raises DomainError.
double analytic_auc(double mu_g, double sd_g, double mu_i, double sd_i);

std::string make_image_id(const std::string& group_label,
                          std::uint64_t subject, std::uint64_t image);
std::string make_subject_id(const std::string& group_label,
                            std::uint64_t subject);

}  // namespace verigauge

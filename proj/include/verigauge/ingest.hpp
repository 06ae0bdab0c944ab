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
#include <vector>

#include "verigauge/types.hpp"

namespace verigauge {

enum class EmbeddingFormat { Csv, Packed };

EmbeddingFormat embedding_format_from_name(const std::string& name);

/// Parses a metadata CSV with header `image_id,subject_id,<attr>...`.
/// Empty attribute cells mean "attribute absent". Throws DuplicateImage,
/// SchemaError, or IoError.
Dataset load_metadata(const std::string& path);
Dataset read_metadata(std::istream& in, const std::string& origin);

/// Inverse of read_metadata; absent attributes render as empty cells.
void write_metadata(std::ostream& out, const Dataset& dataset);
void save_metadata(const std::string& path, const Dataset& dataset);

/// Loads embeddings from CSV (`image_id,v0,...,v{d-1}`) or from the packed
/// binary layout (magic "VGE1", little-endian u32 dimension, u64 count,
/// u32-length-prefixed JSON id manifest, then count*dimension float32).
EmbeddingSet load_embeddings(const std::string& path, EmbeddingFormat format);
EmbeddingSet read_embeddings_csv(std::istream& in, const std::string& origin);
EmbeddingSet read_embeddings_packed(std::istream& in,
                                    const std::string& origin);

void write_embeddings_csv(std::ostream& out, const EmbeddingSet& set);
void write_embeddings_packed(std::ostream& out, const EmbeddingSet& set);
void save_embeddings(const std::string& path, const EmbeddingSet& set,
                     EmbeddingFormat format);

/// Parses a score CSV with header `probe_id,gallery_id,score`; rows (a,b,s)
/// and (b,a,s) collapse to one unordered entry. Throws ConflictingScore when
/// duplicate pairs disagree by more than 1e-9, SelfPair on (a,a) rows.
ScoreTable load_scores(const std::string& path);
ScoreTable read_scores(std::istream& in, const std::string& origin);
void write_scores(std::ostream& out, const ScoreTable& table);
void save_scores(const std::string& path, const ScoreTable& table);

/// Absolute tolerance for (a,b)/(b,a) score symmetry.
inline constexpr double kScoreSymmetryTolerance = 1e-9;

/// Audits dataset health before any metric is computed. Intra-subject
/// attribute conflicts are errors; small groups, missing audited attributes,
/// and groups whose impostor pool cannot resolve `smallest_far_target`
/// are warnings.
ValidationReport validate_dataset(const Dataset& dataset,
                                  std::span<const std::string> audited,
                                  double smallest_far_target = 1e-4);

}  // namespace verigauge

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

#include "verigauge/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "verigauge/csv.hpp"
#include "verigauge/errors.hpp"

namespace verigauge {

namespace {

template <typename T>
double similarity_impl(std::span<const T> a, std::span<const T> b,
                       Metric metric) {
  if (a.size() != b.size())
    throw AuditError(Errc::DimensionError,
                     "similarity inputs have dimensions " +
                         std::to_string(a.size()) + " and " +
                         std::to_string(b.size()));
  double result = 0.0;
  switch (metric) {
    case Metric::Cosine: {
      double dot = 0.0, na2 = 0.0, nb2 = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) {
        const double x = static_cast<double>(a[i]);
        const double y = static_cast<double>(b[i]);
        dot += x * y;
        na2 += x * x;
        nb2 += y * y;
      }
      if (na2 == 0.0 || nb2 == 0.0)
        throw AuditError(Errc::ZeroNorm,
                         "cosine similarity of a zero-norm vector");
      result = dot / (std::sqrt(na2) * std::sqrt(nb2));
      result = std::clamp(result, -1.0, 1.0);
      break;
    }
    case Metric::Dot: {
      double dot = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i)
        dot += static_cast<double>(a[i]) * static_cast<double>(b[i]);
      result = dot;
      break;
    }
    case Metric::NegEuclidean: {
      double d2 = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) {
        const double diff =
            static_cast<double>(a[i]) - static_cast<double>(b[i]);
        d2 += diff * diff;
      }
      result = -std::sqrt(d2);
      break;
    }
  }
  if (!std::isfinite(result))
    throw AuditError(Errc::NonFiniteValue, "similarity overflowed");
  return result;
}

const std::vector<float>& embedding_of(const EmbeddingSet& embeddings,
                                       const std::string& image_id) {
  auto it = embeddings.entries.find(image_id);
  if (it == embeddings.entries.end())
    throw AuditError(Errc::MissingEmbedding,
                     "no embedding for image " + image_id);
  return it->second;
}

}  // namespace

std::string_view metric_name(Metric metric) {
  switch (metric) {
    case Metric::Cosine:
      return "cosine";
    case Metric::Dot:
      return "dot";
    case Metric::NegEuclidean:
      return "neg_euclidean";
  }
  return "unknown";
}

Metric metric_from_name(std::string_view name) {
  if (name == "cosine") return Metric::Cosine;
  if (name == "dot") return Metric::Dot;
  if (name == "neg_euclidean") return Metric::NegEuclidean;
  throw AuditError(Errc::ConfigError,
                   "unknown metric '" + std::string(name) + "'");
}

double similarity(std::span<const double> a, std::span<const double> b,
                  Metric metric) {
  return similarity_impl(a, b, metric);
}

double similarity(std::span<const float> a, std::span<const float> b,
                  Metric metric) {
  return similarity_impl(a, b, metric);
}

std::vector<double> ScoredPairSet::genuine_scores() const {
  std::vector<double> scores;
  scores.reserve(genuine.size());
  for (const auto& sp : genuine) scores.push_back(sp.score);
  return scores;
}

std::vector<double> ScoredPairSet::impostor_scores() const {
  std::vector<double> scores;
  scores.reserve(impostor.size());
  for (const auto& sp : impostor) scores.push_back(sp.score);
  return scores;
}

ScoredPairSet score_pairs(const PairSet& pairs, const EmbeddingSet& embeddings,
                          Metric metric) {
  ScoredPairSet out;
  out.policy = pairs.policy;
  out.metric_name = std::string(metric_name(metric));
  const auto score_list = [&](const std::vector<ImagePair>& list,
                              std::vector<ScoredPair>& dest) {
    dest.reserve(list.size());
    for (const auto& pair : list) {
      const auto& va = embedding_of(embeddings, pair.a);
      const auto& vb = embedding_of(embeddings, pair.b);
      dest.push_back(ScoredPair{
          pair, similarity(std::span<const float>(va),
                           std::span<const float>(vb), metric)});
    }
  };
  score_list(pairs.genuine, out.genuine);
  score_list(pairs.impostor, out.impostor);
  return out;
}

ScoredPairSet attach_scores(const PairSet& pairs, const ScoreTable& table) {
  ScoredPairSet out;
  out.policy = pairs.policy;
  out.metric_name = "external";
  const auto join = [&](const std::vector<ImagePair>& list,
                        std::vector<ScoredPair>& dest) {
    dest.reserve(list.size());
    for (const auto& pair : list) {
      auto it = table.entries.find(ImagePair::make(pair.a, pair.b));
      if (it == table.entries.end())
        throw AuditError(Errc::MissingScore,
                         "no score for pair (" + pair.a + ", " + pair.b + ")");
      dest.push_back(ScoredPair{pair, it->second});
    }
  };
  join(pairs.genuine, out.genuine);
  join(pairs.impostor, out.impostor);
  return out;
}

void write_scored_pairs_csv(std::ostream& out, const ScoredPairSet& scored) {
  csv::write_record(out, {"id_a", "id_b", "label", "score"});
  for (const auto& sp : scored.genuine)
    csv::write_record(
        out, {sp.pair.a, sp.pair.b, "genuine", csv::format_double(sp.score)});
  for (const auto& sp : scored.impostor)
    csv::write_record(
        out, {sp.pair.a, sp.pair.b, "impostor", csv::format_double(sp.score)});
}

ScoredPairSet read_scored_pairs_csv(std::istream& in) {
  auto header = csv::read_record(in);
  if (!header || *header != std::vector<std::string>{"id_a", "id_b", "label",
                                                     "score"})
    throw AuditError(Errc::SchemaError,
                     "scored-pair CSV must start with header "
                     "id_a,id_b,label,score");
  ScoredPairSet out;
  out.metric_name = "external";
  std::size_t row = 1;
  while (auto record = csv::read_record(in)) {
    ++row;
    if (record->size() != 4)
      throw AuditError(Errc::SchemaError,
                       "row " + std::to_string(row) + " has " +
                           std::to_string(record->size()) + " fields");
    const std::string& a = (*record)[0];
    const std::string& b = (*record)[1];
    const std::string& label = (*record)[2];
    const double score = csv::parse_double((*record)[3]);
    if (!std::isfinite(score))
      throw AuditError(Errc::NonFiniteValue,
                       "non-finite score at row " + std::to_string(row));
    if (a == b)
      throw AuditError(Errc::SelfPair,
                       "pair of image with itself at row " +
                           std::to_string(row));
    const ScoredPair sp{ImagePair{a, b}, score};
    if (label == "genuine") {
      out.genuine.push_back(sp);
    } else if (label == "impostor") {
      out.impostor.push_back(sp);
    } else {
      throw AuditError(Errc::SchemaError,
                       "row " + std::to_string(row) + " has label '" + label +
                           "', expected genuine or impostor");
    }
  }
  return out;
}

ScoredPairSet load_scored_pairs_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw AuditError(Errc::IoError, "cannot open " + path);
  return read_scored_pairs_csv(in);
}

void save_scored_pairs_csv(const std::string& path,
                           const ScoredPairSet& scored) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw AuditError(Errc::IoError, "cannot open " + path);
  write_scored_pairs_csv(out, scored);
  if (!out.flush()) throw AuditError(Errc::IoError, "write failed: " + path);
}

}  // namespace verigauge

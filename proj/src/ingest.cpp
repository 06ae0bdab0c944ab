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

#include "verigauge/ingest.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "verigauge/csv.hpp"
#include "verigauge/errors.hpp"

namespace verigauge {

namespace {

constexpr char kPackedMagic[4] = {'V', 'G', 'E', '1'};

std::ifstream open_input(const std::string& path, bool binary) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw AuditError(Errc::IoError, "cannot open " + path);
  return in;
}

std::ofstream open_output(const std::string& path, bool binary) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw AuditError(Errc::IoError, "cannot write " + path);
  return out;
}

void put_u32_le(std::ostream& out, std::uint32_t v) {
  char bytes[4];
  for (int i = 0; i < 4; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(bytes, 4);
}

void put_u64_le(std::ostream& out, std::uint64_t v) {
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(bytes, 8);
}

std::uint32_t get_u32_le(std::istream& in, const std::string& origin) {
  unsigned char bytes[4];
  if (!in.read(reinterpret_cast<char*>(bytes), 4))
    throw AuditError(Errc::FormatError, origin + ": truncated header");
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | bytes[i];
  return v;
}

std::uint64_t get_u64_le(std::istream& in, const std::string& origin) {
  unsigned char bytes[8];
  if (!in.read(reinterpret_cast<char*>(bytes), 8))
    throw AuditError(Errc::FormatError, origin + ": truncated header");
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | bytes[i];
  return v;
}

float get_f32_le(const unsigned char* bytes) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | bytes[i];
  return std::bit_cast<float>(v);
}

void put_f32_le(std::ostream& out, float f) {
  const std::uint32_t v = std::bit_cast<std::uint32_t>(f);
  char bytes[4];
  for (int i = 0; i < 4; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(bytes, 4);
}

std::vector<std::string> sorted_ids(const EmbeddingSet& set) {
  std::vector<std::string> ids;
  ids.reserve(set.entries.size());
  for (const auto& [id, vec] : set.entries) ids.push_back(id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

}  // namespace

bool Dataset::has_attribute(const std::string& name) const {
  return std::find(attribute_names.begin(), attribute_names.end(), name) !=
         attribute_names.end();
}

EmbeddingFormat embedding_format_from_name(const std::string& name) {
  if (name == "csv") return EmbeddingFormat::Csv;
  if (name == "packed") return EmbeddingFormat::Packed;
  throw AuditError(Errc::ConfigError, "unknown embedding format: " + name);
}

Dataset read_metadata(std::istream& in, const std::string& origin) {
  auto header = csv::read_record(in);
  if (!header || header->size() < 2)
    throw AuditError(Errc::SchemaError, origin + ": missing header row");
  if ((*header)[0] != "image_id" || (*header)[1] != "subject_id")
    throw AuditError(Errc::SchemaError,
                     origin + ": header must start image_id,subject_id");

  Dataset dataset;
  dataset.attribute_names.assign(header->begin() + 2, header->end());
  {
    std::set<std::string> seen(dataset.attribute_names.begin(),
                               dataset.attribute_names.end());
    if (seen.size() != dataset.attribute_names.size())
      throw AuditError(Errc::SchemaError,
                       origin + ": duplicate attribute column");
  }

  std::unordered_set<std::string> ids;
  std::size_t line = 1;
  while (auto row = csv::read_record(in)) {
    ++line;
    if (row->size() == 1 && (*row)[0].empty()) continue;  // trailing newline
    if (row->size() != header->size())
      throw AuditError(Errc::SchemaError,
                       origin + ": row " + std::to_string(line) + " has " +
                           std::to_string(row->size()) + " fields, expected " +
                           std::to_string(header->size()));
    ImageRecord record;
    record.image_id = (*row)[0];
    record.subject_id = (*row)[1];
    if (record.image_id.empty() || record.subject_id.empty())
      throw AuditError(Errc::SchemaError,
                       origin + ": empty id on row " + std::to_string(line));
    if (!ids.insert(record.image_id).second)
      throw AuditError(Errc::DuplicateImage,
                       origin + ": duplicate image_id " + record.image_id);
    for (std::size_t k = 0; k < dataset.attribute_names.size(); ++k) {
      const std::string& value = (*row)[k + 2];
      if (!value.empty()) record.attributes[dataset.attribute_names[k]] = value;
    }
    dataset.records.push_back(std::move(record));
  }
  return dataset;
}

Dataset load_metadata(const std::string& path) {
  auto in = open_input(path, false);
  return read_metadata(in, path);
}

void write_metadata(std::ostream& out, const Dataset& dataset) {
  std::vector<std::string> row{"image_id", "subject_id"};
  row.insert(row.end(), dataset.attribute_names.begin(),
             dataset.attribute_names.end());
  csv::write_record(out, row);
  for (const auto& record : dataset.records) {
    row.assign({record.image_id, record.subject_id});
    for (const auto& name : dataset.attribute_names) {
      const auto it = record.attributes.find(name);
      row.push_back(it == record.attributes.end() ? std::string() : it->second);
    }
    csv::write_record(out, row);
  }
}

void save_metadata(const std::string& path, const Dataset& dataset) {
  auto out = open_output(path, false);
  write_metadata(out, dataset);
}

EmbeddingSet read_embeddings_csv(std::istream& in, const std::string& origin) {
  auto header = csv::read_record(in);
  if (!header || header->empty() || (*header)[0] != "image_id")
    throw AuditError(Errc::SchemaError,
                     origin + ": header must be image_id,v0,...");
  if (header->size() < 2)
    throw AuditError(Errc::DimensionError, origin + ": no value columns");

  EmbeddingSet set;
  set.dimension = static_cast<std::uint32_t>(header->size() - 1);
  std::size_t line = 1;
  while (auto row = csv::read_record(in)) {
    ++line;
    if (row->size() == 1 && (*row)[0].empty()) continue;
    if (row->size() != header->size())
      throw AuditError(Errc::DimensionError,
                       origin + ": row " + std::to_string(line) + " has " +
                           std::to_string(row->size() - 1) +
                           " values, expected " +
                           std::to_string(set.dimension));
    std::vector<float> vec(set.dimension);
    for (std::size_t k = 0; k < set.dimension; ++k) {
      const double v = csv::parse_double((*row)[k + 1]);
      if (!std::isfinite(v))
        throw AuditError(Errc::NonFiniteValue,
                         origin + ": non-finite value on row " +
                             std::to_string(line));
      vec[k] = static_cast<float>(v);
    }
    if (!set.entries.emplace((*row)[0], std::move(vec)).second)
      throw AuditError(Errc::DuplicateImage,
                       origin + ": duplicate image_id " + (*row)[0]);
  }
  return set;
}

EmbeddingSet read_embeddings_packed(std::istream& in,
                                    const std::string& origin) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kPackedMagic, 4) != 0)
    throw AuditError(Errc::FormatError, origin + ": unknown magic bytes");

  EmbeddingSet set;
  set.dimension = get_u32_le(in, origin);
  if (set.dimension == 0)
    throw AuditError(Errc::DimensionError, origin + ": zero dimension");
  const std::uint64_t count = get_u64_le(in, origin);

  const std::uint32_t manifest_len = get_u32_le(in, origin);
  std::string manifest_text(manifest_len, '\0');
  if (!in.read(manifest_text.data(), manifest_len))
    throw AuditError(Errc::FormatError, origin + ": truncated manifest");
  nlohmann::json manifest =
      nlohmann::json::parse(manifest_text, nullptr, /*allow_exceptions=*/false);
  if (manifest.is_discarded() || !manifest.is_array() ||
      manifest.size() != count)
    throw AuditError(Errc::FormatError, origin + ": bad id manifest");

  std::vector<unsigned char> raw(static_cast<std::size_t>(set.dimension) * 4);
  for (std::uint64_t i = 0; i < count; ++i) {
    if (!in.read(reinterpret_cast<char*>(raw.data()),
                 static_cast<std::streamsize>(raw.size())))
      throw AuditError(Errc::FormatError, origin + ": truncated vector block");
    if (!manifest[i].is_string())
      throw AuditError(Errc::FormatError, origin + ": non-string id");
    std::vector<float> vec(set.dimension);
    for (std::uint32_t k = 0; k < set.dimension; ++k) {
      vec[k] = get_f32_le(raw.data() + std::size_t{4} * k);
      if (!std::isfinite(vec[k]))
        throw AuditError(Errc::NonFiniteValue,
                         origin + ": non-finite component in vector " +
                             std::to_string(i));
    }
    if (!set.entries.emplace(manifest[i].get<std::string>(), std::move(vec))
             .second)
      throw AuditError(Errc::DuplicateImage,
                       origin + ": duplicate id in manifest");
  }
  return set;
}

EmbeddingSet load_embeddings(const std::string& path, EmbeddingFormat format) {
  auto in = open_input(path, format == EmbeddingFormat::Packed);
  return format == EmbeddingFormat::Csv ? read_embeddings_csv(in, path)
                                        : read_embeddings_packed(in, path);
}

void write_embeddings_csv(std::ostream& out, const EmbeddingSet& set) {
  std::vector<std::string> header{"image_id"};
  for (std::uint32_t k = 0; k < set.dimension; ++k)
    header.push_back("v" + std::to_string(k));
  csv::write_record(out, header);
  for (const auto& id : sorted_ids(set)) {
    std::vector<std::string> row{id};
    for (float v : set.entries.at(id))
      row.push_back(csv::format_double(static_cast<double>(v)));
    csv::write_record(out, row);
  }
}

void write_embeddings_packed(std::ostream& out, const EmbeddingSet& set) {
  out.write(kPackedMagic, 4);
  put_u32_le(out, set.dimension);
  put_u64_le(out, set.entries.size());
  const auto ids = sorted_ids(set);
  const std::string manifest = nlohmann::json(ids).dump();
  put_u32_le(out, static_cast<std::uint32_t>(manifest.size()));
  out.write(manifest.data(), static_cast<std::streamsize>(manifest.size()));
  for (const auto& id : ids)
    for (float v : set.entries.at(id)) put_f32_le(out, v);
}

void save_embeddings(const std::string& path, const EmbeddingSet& set,
                     EmbeddingFormat format) {
  auto out = open_output(path, format == EmbeddingFormat::Packed);
  format == EmbeddingFormat::Csv ? write_embeddings_csv(out, set)
                                 : write_embeddings_packed(out, set);
}

ScoreTable read_scores(std::istream& in, const std::string& origin) {
  auto header = csv::read_record(in);
  if (!header || header->size() != 3 || (*header)[0] != "probe_id" ||
      (*header)[1] != "gallery_id" || (*header)[2] != "score")
    throw AuditError(Errc::SchemaError,
                     origin + ": header must be probe_id,gallery_id,score");

  ScoreTable table;
  std::size_t line = 1;
  while (auto row = csv::read_record(in)) {
    ++line;
    if (row->size() == 1 && (*row)[0].empty()) continue;
    if (row->size() != 3)
      throw AuditError(Errc::SchemaError,
                       origin + ": malformed row " + std::to_string(line));
    if ((*row)[0] == (*row)[1])
      throw AuditError(Errc::SelfPair,
                       origin + ": self-pair " + (*row)[0] + " on row " +
                           std::to_string(line));
    const double score = csv::parse_double((*row)[2]);
    if (!std::isfinite(score))
      throw AuditError(Errc::NonFiniteValue,
                       origin + ": non-finite score on row " +
                           std::to_string(line));
    auto key = ImagePair::make((*row)[0], (*row)[1]);
    auto [it, inserted] = table.entries.emplace(std::move(key), score);
    if (!inserted && std::abs(it->second - score) > kScoreSymmetryTolerance)
      throw AuditError(Errc::ConflictingScore,
                       origin + ": pair (" + it->first.a + "," + it->first.b +
                           ") scored " + csv::format_double(it->second) +
                           " and " + csv::format_double(score));
  }
  return table;
}

ScoreTable load_scores(const std::string& path) {
  auto in = open_input(path, false);
  return read_scores(in, path);
}

void write_scores(std::ostream& out, const ScoreTable& table) {
  csv::write_record(out, {"probe_id", "gallery_id", "score"});
  std::vector<const ImagePair*> keys;
  keys.reserve(table.entries.size());
  for (const auto& [pair, score] : table.entries) keys.push_back(&pair);
  std::sort(keys.begin(), keys.end(),
            [](const ImagePair* x, const ImagePair* y) { return *x < *y; });
  for (const ImagePair* pair : keys)
    csv::write_record(
        out, {pair->a, pair->b, csv::format_double(table.entries.at(*pair))});
}

void save_scores(const std::string& path, const ScoreTable& table) {
  auto out = open_output(path, false);
  write_scores(out, table);
}

ValidationReport validate_dataset(const Dataset& dataset,
                                  std::span<const std::string> audited,
                                  double smallest_far_target) {
  ValidationReport report;

  // Subject-level views. The first record of a subject fixes its attribute
  // map; later records must match exactly.
  std::map<std::string, const ImageRecord*> subject_proto;
  std::map<std::string, std::size_t> subject_images;
  std::set<std::string> conflicted;
  for (const auto& record : dataset.records) {
    ++subject_images[record.subject_id];
    auto [it, inserted] = subject_proto.emplace(record.subject_id, &record);
    if (!inserted && it->second->attributes != record.attributes &&
        conflicted.insert(record.subject_id).second) {
      report.errors.push_back(
          {"AttributeConflict",
           "subject " + record.subject_id +
               " has images with differing attribute maps (demographics are "
               "subject-level)"});
    }
  }
  const std::size_t n_subjects = subject_proto.size();

  for (const std::string& attribute : audited) {
    if (!dataset.has_attribute(attribute)) {
      report.warnings.push_back(
          {"UnknownAttribute",
           "audited attribute '" + attribute + "' is not a metadata column"});
      continue;
    }
    auto& groups = report.attribute_groups[attribute];
    std::size_t missing = 0;
    // value -> images per subject in that group
    std::map<std::string, std::map<std::string, std::size_t>> group_subjects;
    for (const auto& [subject, proto] : subject_proto) {
      auto it = proto->attributes.find(attribute);
      if (it == proto->attributes.end()) {
        ++missing;
        continue;
      }
      group_subjects[it->second][subject] = subject_images[subject];
    }
    for (const auto& [value, subjects] : group_subjects) {
      GroupTally tally;
      tally.subjects = subjects.size();
      std::size_t images = 0;
      std::size_t same_subject_pairs = 0;
      for (const auto& [subject, count] : subjects) {
        images += count;
        same_subject_pairs += count * (count - 1) / 2;
      }
      tally.images = images;
      groups[value] = tally;

      if (n_subjects > 0 &&
          static_cast<double>(tally.subjects) < 0.05 * n_subjects) {
        report.warnings.push_back(
            {"SmallGroup", "attribute " + attribute + "=" + value +
                               " covers only " + std::to_string(tally.subjects) +
                               " of " + std::to_string(n_subjects) +
                               " subjects (<5%)"});
      }
      const std::size_t impostor_pairs =
          images * (images - 1) / 2 - same_subject_pairs;
      const double needed = 1.0 / smallest_far_target;
      if (static_cast<double>(impostor_pairs) < needed) {
        report.warnings.push_back(
            {"InsufficientImpostors",
             "attribute " + attribute + "=" + value + " has " +
                 std::to_string(impostor_pairs) +
                 " impostor pairs, fewer than 1/" +
                 csv::format_double(smallest_far_target) + " = " +
                 csv::format_double(needed) +
                 " needed for the smallest FAR target"});
      }
    }
    if (missing > 0) {
      report.warnings.push_back(
          {"MissingAttribute",
           std::to_string(missing) + " subject(s) lack audited attribute '" +
               attribute + "' and are excluded from stratified analyses"});
    }
  }
  return report;
}

}  // namespace verigauge

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

#include <cstdint>
#include <cstring>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "test_support.hpp"
#include "verigauge/ingest.hpp"
#include "verigauge/rng.hpp"
#include "verigauge/types.hpp"

using namespace verigauge;
using vgtest::error_name_of;

namespace {

Dataset parse_metadata(const std::string& text) {
  std::istringstream in(text);
  return read_metadata(in, "test");
}

EmbeddingSet parse_embeddings_csv(const std::string& text) {
  std::istringstream in(text);
  return read_embeddings_csv(in, "test");
}

ScoreTable parse_scores(const std::string& text) {
  std::istringstream in(text);
  return read_scores(in, "test");
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<char>((v >> (8 * k)) & 0xFF));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int k = 0; k < 8; ++k) out.push_back(static_cast<char>((v >> (8 * k)) & 0xFF));
}

void put_f32(std::string& out, float v) {
  std::uint32_t bits = 0;
  std::memcpy(&bits, &v, sizeof bits);
  put_u32(out, bits);
}

}  // namespace

TEST_CASE("metadata: three rows with a race column parse directly") {
  const auto dataset = parse_metadata(
      "image_id,subject_id,race\n"
      "i1,s1,X\n"
      "i2,s1,X\n"
      "i3,s2,Y\n");
  REQUIRE(dataset.records.size() == 3);
  CHECK(dataset.attribute_names == std::vector<std::string>{"race"});
  CHECK(dataset.records[0].image_id == "i1");
  CHECK(dataset.records[0].subject_id == "s1");
  CHECK(dataset.records[0].attributes.at("race") == "X");
  CHECK(dataset.records[2].attributes.at("race") == "Y");
  for (const auto& record : dataset.records)
    CHECK(record.attributes.size() == 1);
}

TEST_CASE("metadata: duplicate image_id is rejected") {
  CHECK(error_name_of([] {
          parse_metadata("image_id,subject_id\ni1,s1\ni1,s2\n");
        }) == "DuplicateImage");
}

TEST_CASE("metadata: header without subject_id is a schema violation") {
  CHECK(error_name_of([] {
          parse_metadata("image_id,race\ni1,X\n");
        }) == "SchemaError");
}

TEST_CASE("metadata: empty attribute cell means attribute absent") {
  const auto dataset = parse_metadata(
      "image_id,subject_id,race\n"
      "i1,s1,\n"
      "i2,s2,X\n");
  CHECK(dataset.records[0].attributes.empty());
  CHECK(dataset.records[1].attributes.count("race") == 1);
}

TEST_CASE("metadata: write-read round trip preserves the dataset") {
  const auto dataset = vgtest::make_dataset(
      {"race", "gender"},
      {{"i1", "s1", {{"race", "X"}, {"gender", "F"}}},
       {"i2", "s1", {{"race", "X"}, {"gender", "F"}}},
       {"i3", "s2", {{"race", "Y"}}}});
  std::ostringstream out;
  write_metadata(out, dataset);
  const auto back = parse_metadata(out.str());
  REQUIRE(back.records.size() == dataset.records.size());
  CHECK(back.attribute_names == dataset.attribute_names);
  for (std::size_t k = 0; k < dataset.records.size(); ++k) {
    CHECK(back.records[k].image_id == dataset.records[k].image_id);
    CHECK(back.records[k].subject_id == dataset.records[k].subject_id);
    CHECK(back.records[k].attributes == dataset.records[k].attributes);
  }
}

TEST_CASE("embeddings csv: two rows of four values parse directly") {
  const auto set = parse_embeddings_csv(
      "image_id,v0,v1,v2,v3\n"
      "i1,1,2,3,4\n"
      "i2,0.5,-0.5,0.25,-0.25\n");
  CHECK(set.dimension == 4);
  REQUIRE(set.entries.size() == 2);
  CHECK(set.entries.at("i1") == std::vector<float>{1.0f, 2.0f, 3.0f, 4.0f});
  CHECK(set.entries.at("i2") ==
        std::vector<float>{0.5f, -0.5f, 0.25f, -0.25f});
}

TEST_CASE("embeddings csv: ragged rows are a dimension error") {
  CHECK(error_name_of([] {
          parse_embeddings_csv(
              "image_id,v0,v1,v2,v3\n"
              "i1,1,2,3,4\n"
              "i2,1,2,3,4,5\n");
        }) == "DimensionError");
}

TEST_CASE("embeddings csv: non-finite components are rejected") {
  CHECK(error_name_of([] {
          parse_embeddings_csv("image_id,v0\ni1,nan\n");
        }) == "NonFiniteValue");
  CHECK(error_name_of([] {
          parse_embeddings_csv("image_id,v0\ni1,inf\n");
        }) == "NonFiniteValue");
}

TEST_CASE("embeddings packed: write-read round trip is bit exact") {
  EmbeddingSet set;
  set.dimension = 3;
  Xoshiro256pp rng(404);
  for (int k = 0; k < 17; ++k) {
    std::vector<float> v(3);
    for (auto& x : v)
      x = static_cast<float>(rng.uniform() * 2.0 - 1.0);
    set.entries.emplace("img" + std::to_string(k), std::move(v));
  }

  std::ostringstream out(std::ios::binary);
  write_embeddings_packed(out, set);
  std::istringstream in(out.str(), std::ios::binary);
  const auto back = read_embeddings_packed(in, "test");

  CHECK(back.dimension == set.dimension);
  REQUIRE(back.entries.size() == set.entries.size());
  for (const auto& [id, v] : set.entries) {
    REQUIRE(back.entries.count(id) == 1);
    const auto& w = back.entries.at(id);
    REQUIRE(w.size() == v.size());
    // Bitwise, not approximate: the layout stores raw IEEE-754 words.
    CHECK(std::memcmp(w.data(), v.data(), v.size() * sizeof(float)) == 0);
  }
}

TEST_CASE("embeddings packed: hand-assembled bytes parse to known vectors") {
  std::string bytes = "VGE1";
  put_u32(bytes, 2);  // dimension
  put_u64(bytes, 2);  // count
  const std::string manifest = "[\"a\",\"b\"]";
  put_u32(bytes, static_cast<std::uint32_t>(manifest.size()));
  bytes += manifest;
  put_f32(bytes, 1.5f);
  put_f32(bytes, -2.25f);
  put_f32(bytes, 0.0f);
  put_f32(bytes, 3.75f);

  std::istringstream in(bytes, std::ios::binary);
  const auto set = read_embeddings_packed(in, "test");
  CHECK(set.dimension == 2);
  CHECK(set.entries.at("a") == std::vector<float>{1.5f, -2.25f});
  CHECK(set.entries.at("b") == std::vector<float>{0.0f, 3.75f});
}

TEST_CASE("embeddings packed: wrong magic is a format error") {
  std::string bytes = "VGEX";
  put_u32(bytes, 1);
  put_u64(bytes, 0);
  put_u32(bytes, 2);
  bytes += "[]";
  CHECK(error_name_of([&] {
          std::istringstream in(bytes, std::ios::binary);
          read_embeddings_packed(in, "test");
        }) == "FormatError");
}

TEST_CASE("embeddings packed: truncated payload is rejected") {
  EmbeddingSet set;
  set.dimension = 2;
  set.entries.emplace("a", std::vector<float>{1.0f, 2.0f});
  std::ostringstream out(std::ios::binary);
  write_embeddings_packed(out, set);
  const std::string whole = out.str();
  CHECK(error_name_of([&] {
          std::istringstream in(whole.substr(0, whole.size() - 3),
                                std::ios::binary);
          read_embeddings_packed(in, "test");
        }) == "FormatError");
}

TEST_CASE("embeddings: save/load dispatches on format") {
  vgtest::TempDir dir;
  EmbeddingSet set;
  set.dimension = 2;
  set.entries.emplace("a", std::vector<float>{0.5f, -1.0f});

  save_embeddings(dir.str("e.csv"), set, EmbeddingFormat::Csv);
  const auto via_csv = load_embeddings(dir.str("e.csv"), EmbeddingFormat::Csv);
  CHECK(via_csv.entries.at("a") == set.entries.at("a"));

  save_embeddings(dir.str("e.vge"), set, EmbeddingFormat::Packed);
  const auto via_packed =
      load_embeddings(dir.str("e.vge"), EmbeddingFormat::Packed);
  CHECK(via_packed.entries.at("a") == set.entries.at("a"));

  CHECK(error_name_of(
            [&] { load_embeddings(dir.str("missing.csv"), EmbeddingFormat::Csv); }) ==
        "IoError");
}

TEST_CASE("scores: two plain rows make two entries") {
  const auto table = parse_scores(
      "probe_id,gallery_id,score\n"
      "i1,i2,0.8\n"
      "i3,i4,0.2\n");
  REQUIRE(table.entries.size() == 2);
  CHECK(table.entries.at(ImagePair::make("i1", "i2")) == 0.8);
  CHECK(table.entries.at(ImagePair::make("i3", "i4")) == 0.2);
}

TEST_CASE("scores: (a,b) and (b,a) collapse to one unordered entry") {
  const auto table = parse_scores(
      "probe_id,gallery_id,score\n"
      "i1,i2,0.8\n"
      "i2,i1,0.8\n");
  REQUIRE(table.entries.size() == 1);
  CHECK(table.entries.at(ImagePair::make("i1", "i2")) == 0.8);
}

TEST_CASE("scores: contradictory duplicates are rejected") {
  CHECK(error_name_of([] {
          parse_scores(
              "probe_id,gallery_id,score\n"
              "i1,i2,0.8\n"
              "i2,i1,0.3\n");
        }) == "ConflictingScore");
}

TEST_CASE("scores: near-duplicates within 1e-9 collapse quietly") {
  const auto table = parse_scores(
      "probe_id,gallery_id,score\n"
      "i1,i2,0.8\n"
      "i2,i1,0.8000000001\n");
  CHECK(table.entries.size() == 1);
}

TEST_CASE("scores: self pairs are rejected") {
  CHECK(error_name_of([] {
          parse_scores("probe_id,gallery_id,score\ni1,i1,0.9\n");
        }) == "SelfPair");
}

TEST_CASE("scores: write-read round trip recovers the exact table") {
  ScoreTable table;
  Xoshiro256pp rng(7);
  for (int k = 0; k < 50; ++k)
    table.entries.emplace(
        ImagePair::make("p" + std::to_string(k), "q" + std::to_string(k)),
        rng.uniform() * 2.0 - 1.0);
  std::ostringstream out;
  write_scores(out, table);
  const auto back = parse_scores(out.str());
  REQUIRE(back.entries.size() == table.entries.size());
  for (const auto& [pair, score] : table.entries) {
    REQUIRE(back.entries.count(pair) == 1);
    CHECK(back.entries.at(pair) == score);  // exact: 17-digit rendering
  }
}

TEST_CASE("validate: intra-subject attribute conflict is an error") {
  const auto dataset = vgtest::make_dataset(
      {"race"}, {{"i1", "s1", {{"race", "X"}}}, {"i2", "s1", {{"race", "Y"}}}});
  const std::vector<std::string> audited{"race"};
  const auto report = validate_dataset(dataset, audited);
  REQUIRE(report.errors.size() == 1);
  CHECK(report.errors[0].code == "AttributeConflict");
  CHECK_FALSE(report.ok());
}

TEST_CASE("validate: a group under 5% of subjects draws SmallGroup") {
  std::vector<vgtest::MetaRow> rows;
  for (int s = 0; s < 100; ++s) {
    const std::string label = s < 3 ? "Z" : "X";
    rows.push_back({"i" + std::to_string(s), "s" + std::to_string(s),
                    {{"race", label}}});
  }
  const auto dataset = vgtest::make_dataset({"race"}, rows);
  const std::vector<std::string> audited{"race"};
  const auto report = validate_dataset(dataset, audited);
  CHECK(report.ok());
  bool small_z = false;
  for (const auto& warning : report.warnings)
    if (warning.code == "SmallGroup" &&
        warning.message.find("race=Z") != std::string::npos)
      small_z = true;
  CHECK(small_z);
  CHECK(report.attribute_groups.at("race").at("Z").subjects == 3);
  CHECK(report.attribute_groups.at("race").at("X").subjects == 97);
}

TEST_CASE("validate: 190 impostor pairs cannot support FAR 1e-4") {
  // 20 single-image subjects give C(20,2) = 190 impostor pairs.
  std::vector<vgtest::MetaRow> rows;
  for (int s = 0; s < 20; ++s)
    rows.push_back({"i" + std::to_string(s), "s" + std::to_string(s),
                    {{"race", "X"}}});
  const auto dataset = vgtest::make_dataset({"race"}, rows);
  const std::vector<std::string> audited{"race"};
  const auto report = validate_dataset(dataset, audited, 1e-4);
  bool insufficient = false;
  for (const auto& warning : report.warnings)
    if (warning.code == "InsufficientImpostors" &&
        warning.message.find("190") != std::string::npos)
      insufficient = true;
  CHECK(insufficient);

  // The same pool is fine for a 1e-2 target (needs only 100 pairs).
  const auto relaxed = validate_dataset(dataset, audited, 1e-2);
  for (const auto& warning : relaxed.warnings)
    CHECK(warning.code != "InsufficientImpostors");
}

TEST_CASE("validate: missing audited attribute draws a warning") {
  const auto dataset = vgtest::make_dataset(
      {"race"}, {{"i1", "s1", {{"race", "X"}}}, {"i2", "s2", {}}});
  const std::vector<std::string> audited{"race"};
  const auto report = validate_dataset(dataset, audited);
  bool missing = false;
  for (const auto& warning : report.warnings)
    if (warning.code == "MissingAttribute") missing = true;
  CHECK(missing);
}

TEST_CASE("validate: conflict-free dataset has no errors") {
  const auto dataset = vgtest::make_dataset(
      {"race"},
      {{"i1", "s1", {{"race", "X"}}}, {"i2", "s1", {{"race", "X"}}}});
  const std::vector<std::string> audited{"race"};
  CHECK(validate_dataset(dataset, audited).errors.empty());
}

TEST_CASE("validate: fuzzed conflicts are always flagged, clean sets never") {
  Xoshiro256pp rng(13);
  for (int round = 0; round < 200; ++round) {
    const int n_subjects = 2 + static_cast<int>(rng.uniform_below(6));
    std::vector<vgtest::MetaRow> rows;
    int image = 0;
    for (int s = 0; s < n_subjects; ++s) {
      const int n_images = 1 + static_cast<int>(rng.uniform_below(3));
      const std::string value = rng.uniform_below(2) ? "X" : "Y";
      for (int i = 0; i < n_images; ++i)
        rows.push_back({"i" + std::to_string(image++),
                        "s" + std::to_string(s),
                        {{"race", value}}});
    }
    const bool tamper =
        rng.uniform_below(2) == 1 && rows.size() >= 2;
    std::string victim;
    if (tamper) {
      // Flip one image of some multi-image subject, if there is one.
      for (auto& row : rows) {
        std::size_t siblings = 0;
        for (const auto& other : rows)
          if (other.subject == row.subject) ++siblings;
        if (siblings >= 2) {
          row.attributes["race"] =
              row.attributes["race"] == "X" ? "Y" : "X";
          victim = row.subject;
          break;
        }
      }
    }
    const auto dataset = vgtest::make_dataset({"race"}, rows);
    const std::vector<std::string> audited{"race"};
    const auto report = validate_dataset(dataset, audited);
    if (!victim.empty()) {
      REQUIRE(!report.errors.empty());
      CHECK(report.errors[0].code == "AttributeConflict");
    } else {
      CHECK(report.errors.empty());
    }
  }
}

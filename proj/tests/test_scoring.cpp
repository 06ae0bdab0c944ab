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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "test_support.hpp"
#include "verigauge/metrics.hpp"
#include "verigauge/pairing.hpp"
#include "verigauge/rng.hpp"
#include "verigauge/scoring.hpp"
#include "verigauge/types.hpp"

using namespace verigauge;
using vgtest::error_name_of;

namespace {

std::vector<double> random_vector(std::size_t dim, Xoshiro256pp& rng) {
  std::vector<double> v(dim);
  for (auto& x : v) x = rng.uniform() * 2.0 - 1.0;
  return v;
}

}  // namespace

TEST_CASE("cosine of a nonzero vector with itself is exactly 1") {
  const std::vector<double> v{0.3, -1.7, 2.5};
  CHECK(similarity(v, v, Metric::Cosine) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("cosine of orthogonal axes is 0") {
  const std::vector<double> a{1.0, 0.0};
  const std::vector<double> b{0.0, 1.0};
  CHECK(similarity(a, b, Metric::Cosine) == 0.0);
}

TEST_CASE("neg_euclidean of (1,2) and (4,6) is -5") {
  const std::vector<double> a{1.0, 2.0};
  const std::vector<double> b{4.0, 6.0};
  CHECK(similarity(a, b, Metric::NegEuclidean) == doctest::Approx(-5.0));
}

TEST_CASE("dot product metric is the plain inner product") {
  const std::vector<double> a{1.0, 2.0, 3.0};
  const std::vector<double> b{4.0, -5.0, 6.0};
  CHECK(similarity(a, b, Metric::Dot) == doctest::Approx(12.0));
}

TEST_CASE("zero vector under cosine is rejected") {
  const std::vector<double> z{0.0, 0.0};
  const std::vector<double> v{1.0, 0.0};
  CHECK(error_name_of([&] { similarity(z, v, Metric::Cosine); }) == "ZeroNorm");
  CHECK(error_name_of([&] { similarity(v, z, Metric::Cosine); }) == "ZeroNorm");
}

TEST_CASE("dimension mismatch is rejected for every metric") {
  const std::vector<double> a{1.0, 2.0};
  const std::vector<double> b{1.0, 2.0, 3.0};
  for (auto metric : {Metric::Cosine, Metric::Dot, Metric::NegEuclidean})
    CHECK(error_name_of([&] { similarity(a, b, metric); }) ==
          "DimensionError");
}

TEST_CASE("cosine stays within [-1, 1] and is symmetric") {
  Xoshiro256pp rng(321);
  for (int round = 0; round < 2000; ++round) {
    const auto dim = 1 + rng.uniform_below(8);
    auto a = random_vector(dim, rng);
    auto b = random_vector(dim, rng);
    a[0] += 1e-3;  // keep away from the zero vector
    b[0] += 1e-3;
    for (auto metric : {Metric::Cosine, Metric::Dot, Metric::NegEuclidean}) {
      const double ab = similarity(a, b, metric);
      const double ba = similarity(b, a, metric);
      CHECK(ab == ba);
    }
    const double c = similarity(a, b, Metric::Cosine);
    CHECK(c >= -1.0);
    CHECK(c <= 1.0);
  }
}

TEST_CASE("cosine is scale invariant within 1e-12") {
  Xoshiro256pp rng(654);
  for (int round = 0; round < 1000; ++round) {
    const auto dim = 2 + rng.uniform_below(6);
    auto a = random_vector(dim, rng);
    auto b = random_vector(dim, rng);
    a[0] += 1.0;
    b[1] += 1.0;
    const double k = 0.25 + rng.uniform() * 10.0;
    auto ka = a;
    for (auto& x : ka) x *= k;
    CHECK(std::abs(similarity(ka, b, Metric::Cosine) -
                   similarity(a, b, Metric::Cosine)) < 1e-12);
  }
}

TEST_CASE("float inputs widen exactly to the double result") {
  Xoshiro256pp rng(987);
  for (int round = 0; round < 500; ++round) {
    std::vector<float> af(4);
    std::vector<float> bf(4);
    for (auto& x : af) x = static_cast<float>(rng.uniform() * 2.0 - 1.0);
    for (auto& x : bf) x = static_cast<float>(rng.uniform() * 2.0 - 1.0);
    af[0] += 1.0f;
    bf[0] += 1.0f;
    std::vector<double> ad(af.begin(), af.end());
    std::vector<double> bd(bf.begin(), bf.end());
    for (auto metric : {Metric::Cosine, Metric::Dot, Metric::NegEuclidean})
      CHECK(similarity(std::span<const float>(af), std::span<const float>(bf),
                       metric) == similarity(ad, bd, metric));
  }
}

TEST_CASE("score_pairs scores each pair exactly like standalone similarity") {
  const auto dataset = vgtest::make_dataset({}, {{"i1", "s1", {}},
                                                 {"i2", "s1", {}},
                                                 {"i3", "s2", {}},
                                                 {"i4", "s3", {}}});
  EmbeddingSet embeddings;
  embeddings.dimension = 3;
  Xoshiro256pp rng(55);
  for (const auto& record : dataset.records) {
    std::vector<float> v(3);
    for (auto& x : v) x = static_cast<float>(rng.uniform() + 0.1);
    embeddings.entries.emplace(record.image_id, std::move(v));
  }

  const auto pairs = build_pair_set(dataset, YokingPolicy{});
  REQUIRE(pairs.genuine.size() == 1);
  REQUIRE(pairs.impostor.size() == 5);
  const auto scored = score_pairs(pairs, embeddings, Metric::Cosine);
  REQUIRE(scored.genuine.size() == 1);
  REQUIRE(scored.impostor.size() == 5);
  CHECK(scored.metric_name == "cosine");

  for (const auto& list : {scored.genuine, scored.impostor})
    for (const auto& sp : list) {
      const auto& va = embeddings.entries.at(sp.pair.a);
      const auto& vb = embeddings.entries.at(sp.pair.b);
      CHECK(sp.score == similarity(std::span<const float>(va),
                                   std::span<const float>(vb),
                                   Metric::Cosine));
    }
}

TEST_CASE("score_pairs preserves pair order under permutation") {
  EmbeddingSet embeddings;
  embeddings.dimension = 2;
  for (int k = 0; k < 6; ++k)
    embeddings.entries.emplace(
        "i" + std::to_string(k),
        std::vector<float>{static_cast<float>(k + 1), 1.0f});

  PairSet pairs;
  pairs.impostor = {ImagePair::make("i0", "i1"), ImagePair::make("i2", "i3"),
                    ImagePair::make("i4", "i5")};
  const auto scored = score_pairs(pairs, embeddings, Metric::Cosine);

  PairSet shuffled = pairs;
  std::rotate(shuffled.impostor.begin(), shuffled.impostor.begin() + 1,
              shuffled.impostor.end());
  const auto scored2 = score_pairs(shuffled, embeddings, Metric::Cosine);

  REQUIRE(scored.impostor.size() == 3);
  REQUIRE(scored2.impostor.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(scored2.impostor[k].pair == shuffled.impostor[k]);
    // The same pair gets the same score wherever it sits in the list.
    for (const auto& sp : scored.impostor)
      if (sp.pair == scored2.impostor[k].pair)
        CHECK(sp.score == scored2.impostor[k].score);
  }
}

TEST_CASE("missing embedding is reported by image id") {
  EmbeddingSet embeddings;
  embeddings.dimension = 2;
  embeddings.entries.emplace("i1", std::vector<float>{1.0f, 0.0f});

  PairSet pairs;
  pairs.genuine = {ImagePair::make("i1", "i9")};
  CHECK(error_name_of([&] {
          score_pairs(pairs, embeddings, Metric::Cosine);
        }) == "MissingEmbedding");
  try {
    score_pairs(pairs, embeddings, Metric::Cosine);
  } catch (const AuditError& e) {
    CHECK(std::string(e.what()).find("i9") != std::string::npos);
  }
}

TEST_CASE("identical embeddings everywhere degenerate to AUC one half") {
  const auto dataset = vgtest::make_dataset({}, {{"i1", "s1", {}},
                                                 {"i2", "s1", {}},
                                                 {"i3", "s2", {}},
                                                 {"i4", "s2", {}}});
  EmbeddingSet embeddings;
  embeddings.dimension = 2;
  for (const auto& record : dataset.records)
    embeddings.entries.emplace(record.image_id,
                               std::vector<float>{0.6f, 0.8f});
  const auto scored = score_pairs(build_pair_set(dataset, YokingPolicy{}),
                                  embeddings, Metric::Cosine);
  const auto g = scored.genuine_scores();
  const auto i = scored.impostor_scores();
  for (double s : g) CHECK(s == g[0]);
  for (double s : i) CHECK(s == g[0]);
  CHECK(auc(roc_curve(g, i)) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("attach_scores joins by unordered key") {
  PairSet pairs;
  pairs.genuine = {ImagePair::make("i1", "i2")};
  ScoreTable table;
  table.entries.emplace(ImagePair::make("i1", "i2"), 0.8);
  const auto scored = attach_scores(pairs, table);
  REQUIRE(scored.genuine.size() == 1);
  CHECK(scored.genuine[0].score == 0.8);
  CHECK(scored.metric_name == "external");
}

TEST_CASE("attach_scores accepts a table keyed in the reverse order") {
  PairSet pairs;
  pairs.impostor = {ImagePair::make("i1", "i2")};
  ScoreTable table;
  // make() canonicalizes, so insertion order (i2, i1) still joins (i1, i2).
  table.entries.emplace(ImagePair::make("i2", "i1"), 0.4);
  const auto scored = attach_scores(pairs, table);
  REQUIRE(scored.impostor.size() == 1);
  CHECK(scored.impostor[0].score == 0.4);
}

TEST_CASE("attach_scores reports the first missing pair") {
  PairSet pairs;
  pairs.genuine = {ImagePair::make("i1", "i2")};
  ScoreTable table;
  CHECK(error_name_of([&] { attach_scores(pairs, table); }) == "MissingScore");
}

TEST_CASE("scored-pair export round-trips scores bit for bit") {
  Xoshiro256pp rng(246);
  std::vector<double> genuine;
  std::vector<double> impostor;
  for (int k = 0; k < 40; ++k) genuine.push_back(rng.uniform() * 3.0 - 1.0);
  for (int k = 0; k < 60; ++k) impostor.push_back(rng.uniform() * 3.0 - 2.0);
  const auto scored = vgtest::make_scored(genuine, impostor);

  std::ostringstream out;
  write_scored_pairs_csv(out, scored);
  std::istringstream in(out.str());
  const auto back = read_scored_pairs_csv(in);

  REQUIRE(back.genuine.size() == scored.genuine.size());
  REQUIRE(back.impostor.size() == scored.impostor.size());
  for (std::size_t k = 0; k < back.genuine.size(); ++k) {
    CHECK(back.genuine[k].pair == scored.genuine[k].pair);
    CHECK(back.genuine[k].score == scored.genuine[k].score);
  }
  for (std::size_t k = 0; k < back.impostor.size(); ++k)
    CHECK(back.impostor[k].score == scored.impostor[k].score);
}

TEST_CASE("metric names round-trip and unknown names are rejected") {
  CHECK(metric_name(Metric::Cosine) == "cosine");
  CHECK(metric_from_name("cosine") == Metric::Cosine);
  CHECK(metric_from_name("dot") == Metric::Dot);
  CHECK(metric_from_name("neg_euclidean") == Metric::NegEuclidean);
  CHECK(error_name_of([] { metric_from_name("manhattan"); }) == "ConfigError");
}

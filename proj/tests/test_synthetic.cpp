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
#include <map>
#include <string>
#include <vector>

#include "doctest.h"
#include "test_support.hpp"
#include "verigauge/metrics.hpp"
#include "verigauge/pairing.hpp"
#include "verigauge/scoring.hpp"
#include "verigauge/synthetic.hpp"

using namespace verigauge;
using vgtest::error_name_of;

namespace {

GroupSpec score_group(const std::string& label, std::uint64_t subjects,
                      std::uint64_t images, double g_mean, double g_sd,
                      double i_mean, double i_sd) {
  GroupSpec group;
  group.group_label = label;
  group.n_subjects = subjects;
  group.images_per_subject = images;
  group.genuine_mean = g_mean;
  group.genuine_sd = g_sd;
  group.impostor_mean = i_mean;
  group.impostor_sd = i_sd;
  return group;
}

double group_auc(const ScoredPairSet& set) {
  return auc(roc_curve(set.genuine_scores(), set.impostor_scores()));
}

}  // namespace

TEST_CASE("scenario json round-trips exactly") {
  ScenarioSpec spec;
  spec.seed = 991;
  spec.cross_group_impostor_mean_offset = 0.25;
  spec.groups.push_back(score_group("alpha", 12, 3, 1.5, 0.5, 0.0, 1.0));
  auto beta = score_group("beta", 9, 2, 1.25, 0.75, -0.25, 1.25);
  beta.embedding_spec = EmbeddingSpec{8, 0.4, 0.1};
  spec.groups.push_back(beta);

  const auto text = scenario_to_json_text(spec);
  const auto back = scenario_from_json_text(text);
  CHECK(back.seed == spec.seed);
  CHECK(back.cross_group_impostor_mean_offset ==
        spec.cross_group_impostor_mean_offset);
  REQUIRE(back.groups.size() == 2);
  CHECK(back.groups[0].group_label == "alpha");
  CHECK(back.groups[1].genuine_sd == 0.75);
  REQUIRE(back.groups[1].embedding_spec.has_value());
  CHECK(back.groups[1].embedding_spec->dimension == 8);
  CHECK(back.groups[1].embedding_spec->center_dispersion == 0.4);
  // Serializing again reproduces identical bytes.
  CHECK(scenario_to_json_text(back) == text);
}

TEST_CASE("scenario json rejects unknown fields and bad shapes") {
  CHECK(error_name_of([] {
          scenario_from_json_text("{\"groups\": [], \"seed\": 1, \"x\": 2}");
        }) == "SchemaError");
  CHECK(error_name_of([] { scenario_from_json_text("{nope"); }) ==
        "FormatError");
  // Duplicate labels violate a scenario invariant.
  CHECK(error_name_of([] {
          scenario_from_json_text(
              "{\"seed\": 1, \"groups\": ["
              "{\"group_label\": \"a\", \"n_subjects\": 2, "
              "\"images_per_subject\": 2, \"genuine_mean\": 1.0, "
              "\"genuine_sd\": 1.0, \"impostor_mean\": 0.0, "
              "\"impostor_sd\": 1.0},"
              "{\"group_label\": \"a\", \"n_subjects\": 2, "
              "\"images_per_subject\": 2, \"genuine_mean\": 1.0, "
              "\"genuine_sd\": 1.0, \"impostor_mean\": 0.0, "
              "\"impostor_sd\": 1.0}]}");
        }) == "ConfigError");
  // Nonpositive sd.
  CHECK(error_name_of([] {
          scenario_from_json_text(
              "{\"seed\": 1, \"groups\": ["
              "{\"group_label\": \"a\", \"n_subjects\": 2, "
              "\"images_per_subject\": 2, \"genuine_mean\": 1.0, "
              "\"genuine_sd\": 0.0, \"impostor_mean\": 0.0, "
              "\"impostor_sd\": 1.0}]}");
        }) == "ConfigError");
}

TEST_CASE("generate_scores is a pure function of the scenario") {
  ScenarioSpec spec;
  spec.seed = 321;
  spec.cross_group_impostor_mean_offset = 0.2;
  spec.groups.push_back(score_group("a", 10, 3, 1.0, 1.0, 0.0, 1.0));
  spec.groups.push_back(score_group("b", 8, 2, 1.2, 0.9, -0.1, 1.1));

  const auto once = generate_scores(spec);
  const auto twice = generate_scores(spec);
  REQUIRE(once.per_group.size() == 2);
  for (const auto& [label, set] : once.per_group) {
    const auto& other = twice.per_group.at(label);
    REQUIRE(set.genuine.size() == other.genuine.size());
    for (std::size_t k = 0; k < set.genuine.size(); ++k) {
      CHECK(set.genuine[k].pair == other.genuine[k].pair);
      CHECK(set.genuine[k].score == other.genuine[k].score);
    }
    for (std::size_t k = 0; k < set.impostor.size(); ++k)
      CHECK(set.impostor[k].score == other.impostor[k].score);
  }
  REQUIRE(once.cross_group.impostor.size() ==
          twice.cross_group.impostor.size());
  for (std::size_t k = 0; k < once.cross_group.impostor.size(); ++k)
    CHECK(once.cross_group.impostor[k].score ==
          twice.cross_group.impostor[k].score);

  ScenarioSpec reseeded = spec;
  reseeded.seed = 322;
  const auto different = generate_scores(reseeded);
  CHECK(different.per_group.at("a").genuine[0].score !=
        once.per_group.at("a").genuine[0].score);
}

TEST_CASE("generate_scores emits the counted pair structure") {
  ScenarioSpec spec;
  spec.seed = 17;
  spec.groups.push_back(score_group("a", 10, 3, 1.0, 1.0, 0.0, 1.0));
  spec.groups.push_back(score_group("b", 4, 2, 1.0, 1.0, 0.0, 1.0));
  const auto scores = generate_scores(spec);

  // Genuine: n_subjects * C(images, 2); impostors match the genuine count
  // unless availability caps them; cross count is the smaller group's.
  CHECK(scores.per_group.at("a").genuine.size() == 10 * 3);
  CHECK(scores.per_group.at("a").impostor.size() == 30);
  CHECK(scores.per_group.at("b").genuine.size() == 4);
  CHECK(scores.per_group.at("b").impostor.size() == 4);
  CHECK(scores.cross_group.impostor.size() == 4);
  CHECK(scores.cross_group.genuine.empty());

  // Pair ids follow the documented layout.
  CHECK(scores.per_group.at("a").genuine[0].pair.a == "a_s0_i0");
  CHECK(scores.per_group.at("a").genuine[0].pair.b == "a_s0_i1");
}

TEST_CASE("indistinguishable populations land near AUC one half") {
  ScenarioSpec spec;
  spec.seed = 5150;
  // 50000 subjects x C(3,2) = 150000 scores per label (>= 1e5).
  spec.groups.push_back(score_group("g", 50000, 3, 0.7, 1.0, 0.7, 1.0));
  const auto scores = generate_scores(spec);
  const auto& set = scores.per_group.at("g");
  REQUIRE(set.genuine.size() >= 100000);
  CHECK(std::abs(group_auc(set) - 0.5) < 0.01);
}

TEST_CASE("unit-separation gaussians at 1e6 samples match Phi(1/sqrt 2)") {
  ScenarioSpec spec;
  spec.seed = 777;
  // 1e6 subjects x C(2,2) = 1e6 scores per label.
  spec.groups.push_back(score_group("g", 1000000, 2, 1.0, 1.0, 0.0, 1.0));
  const auto scores = generate_scores(spec);
  const auto& set = scores.per_group.at("g");
  REQUIRE(set.genuine.size() == 1000000);
  REQUIRE(set.impostor.size() == 1000000);
  CHECK(std::abs(group_auc(set) - 0.76025) < 0.002);
}

TEST_CASE("cross-group impostors sit below the within-group means") {
  ScenarioSpec spec;
  spec.seed = 2024;
  spec.cross_group_impostor_mean_offset = 0.5;
  // 3000 cross draws at sd 1.0 put the sample mean well inside 0.05.
  spec.groups.push_back(score_group("a", 1000, 3, 2.0, 1.0, 0.2, 1.0));
  spec.groups.push_back(score_group("b", 1000, 3, 2.0, 1.0, -0.2, 1.0));
  const auto scores = generate_scores(spec);

  double cross_mean = 0.0;
  for (const auto& sp : scores.cross_group.impostor) cross_mean += sp.score;
  cross_mean /= static_cast<double>(scores.cross_group.impostor.size());
  // Midpoint of (0.2, -0.2) is 0; offset 0.5 puts the cross mean near -0.5.
  CHECK(std::abs(cross_mean - (-0.5)) < 0.05);

  // Every cross pair joins the two groups.
  for (const auto& sp : scores.cross_group.impostor) {
    const bool a_side = sp.pair.a.rfind("a_", 0) == 0;
    const bool b_side = sp.pair.b.rfind("b_", 0) == 0;
    const bool flipped = sp.pair.a.rfind("b_", 0) == 0 &&
                         sp.pair.b.rfind("a_", 0) == 0;
    CHECK(((a_side && b_side) || flipped));
  }
}

TEST_CASE("yoking direction: pooled impostors flatter the audited system") {
  // Cross-group impostors score lower by construction, so adding them
  // inflates AUC relative to the within-group (yoked) impostor set.
  ScenarioSpec spec;
  spec.cross_group_impostor_mean_offset = 0.3;
  spec.groups.push_back(score_group("a", 60, 3, 1.6, 0.8, 0.0, 1.0));
  spec.groups.push_back(score_group("b", 60, 3, 1.6, 0.8, 0.0, 1.0));
  int agree = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    spec.seed = seed;
    const auto scores = generate_scores(spec);
    std::vector<double> genuine;
    std::vector<double> yoked;
    for (const auto& [label, set] : scores.per_group) {
      for (const auto& sp : set.genuine) genuine.push_back(sp.score);
      for (const auto& sp : set.impostor) yoked.push_back(sp.score);
    }
    auto pooled = yoked;
    for (const auto& sp : scores.cross_group.impostor)
      pooled.push_back(sp.score);
    const double unyoked_auc = auc(roc_curve(genuine, pooled));
    const double yoked_auc = auc(roc_curve(genuine, yoked));
    if (unyoked_auc >= yoked_auc) ++agree;
  }
  CHECK(agree >= 19);
}

TEST_CASE("impostor mean delta surfaces as a threshold shift") {
  // Two independent samples whose impostor means differ by 0.35. The
  // calibrated thresholds differ by that delta plus order-statistic noise;
  // tolerances are ~4 standard errors of the two-sample quantile gap.
  ScenarioSpec spec;
  spec.seed = 31;
  spec.groups.push_back(score_group("a", 100000, 2, 3.0, 1.0, 0.0, 1.0));
  spec.groups.push_back(score_group("b", 100000, 2, 3.0, 1.0, 0.35, 1.0));
  const auto scores = generate_scores(spec);
  const auto a = scores.per_group.at("a").impostor_scores();
  const auto b = scores.per_group.at("b").impostor_scores();
  REQUIRE(a.size() == 100000);
  REQUIRE(b.size() == 100000);

  CHECK(std::abs(threshold_shift(a, b, 1e-2) - 0.35) < 0.07);
  CHECK(std::abs(threshold_shift(a, b, 1e-3) - 0.35) < 0.17);
}

TEST_CASE("generate_embeddings: zero within-subject noise gives genuine "
          "cosine 1") {
  ScenarioSpec spec;
  spec.seed = 11;
  auto group = score_group("solo", 6, 3, 0.0, 1.0, 0.0, 1.0);
  group.embedding_spec = EmbeddingSpec{16, 0.5, 0.0};
  spec.groups.push_back(group);

  const auto population = generate_embeddings(spec);
  CHECK(population.embeddings.dimension == 16);
  CHECK(population.dataset.records.size() == 18);
  CHECK(population.dataset.attribute_names ==
        std::vector<std::string>{"race"});

  const auto pairs = build_pair_set(population.dataset, YokingPolicy{});
  const auto scored = score_pairs(pairs, population.embeddings, Metric::Cosine);
  for (const auto& sp : scored.genuine)
    CHECK(sp.score == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("generate_embeddings: identical group specs give matching AUCs") {
  ScenarioSpec spec;
  spec.seed = 404;
  for (const char* label : {"p", "q"}) {
    auto group = score_group(label, 200, 4, 0.0, 1.0, 0.0, 1.0);
    group.embedding_spec = EmbeddingSpec{32, 0.35, 0.25};
    spec.groups.push_back(group);
  }
  const auto population = generate_embeddings(spec);
  const auto pairs = build_pair_set(population.dataset, YokingPolicy{{"race"}});
  const auto strata =
      stratify_pairs(pairs, population.dataset, "race");
  const auto scored_p = score_pairs(strata.groups.at("p"),
                                    population.embeddings, Metric::Cosine);
  const auto scored_q = score_pairs(strata.groups.at("q"),
                                    population.embeddings, Metric::Cosine);
  const double auc_p = group_auc(scored_p);
  const double auc_q = group_auc(scored_q);
  CHECK(std::abs(auc_p - auc_q) < 0.01);
}

TEST_CASE("generate_embeddings: tighter dispersion lowers separability") {
  // Monte-Carlo over seeds: the group whose subject centers crowd together
  // produces more similar impostors, hence lower AUC.
  int ordered = 0;
  const int rounds = 25;
  for (int round = 0; round < rounds; ++round) {
    ScenarioSpec spec;
    spec.seed = static_cast<std::uint64_t>(round) + 1000;
    auto wide = score_group("wide", 40, 3, 0.0, 1.0, 0.0, 1.0);
    wide.embedding_spec = EmbeddingSpec{24, 0.5, 0.2};
    auto tight = score_group("tight", 40, 3, 0.0, 1.0, 0.0, 1.0);
    tight.embedding_spec = EmbeddingSpec{24, 0.25, 0.2};
    spec.groups.push_back(wide);
    spec.groups.push_back(tight);

    const auto population = generate_embeddings(spec);
    const auto pairs =
        build_pair_set(population.dataset, YokingPolicy{{"race"}});
    const auto strata = stratify_pairs(pairs, population.dataset, "race");
    const auto scored_wide = score_pairs(strata.groups.at("wide"),
                                         population.embeddings, Metric::Cosine);
    const auto scored_tight = score_pairs(
        strata.groups.at("tight"), population.embeddings, Metric::Cosine);
    if (group_auc(scored_tight) < group_auc(scored_wide)) ++ordered;
  }
  CHECK(ordered >= 23);
}

TEST_CASE("generate_embeddings requires an embedding spec everywhere") {
  ScenarioSpec spec;
  spec.seed = 3;
  spec.groups.push_back(score_group("a", 3, 2, 0.0, 1.0, 0.0, 1.0));
  CHECK(error_name_of([&] { generate_embeddings(spec); }) == "ConfigError");
}

TEST_CASE("analytic_auc hits the closed-form values") {
  CHECK(analytic_auc(0.7, 1.3, 0.7, 0.9) == 0.5);
  CHECK(std::abs(analytic_auc(1.0, 1.0, 0.0, 1.0) - 0.76025) < 5e-6);
  CHECK(std::abs(analytic_auc(2.0, 1.0, 0.0, 1.0) - 0.92135) < 5e-6);
  // Unequal variances pool: Phi(1 / sqrt(2^2 + 1^2)) = Phi(1/sqrt(5)).
  CHECK(analytic_auc(1.0, 2.0, 0.0, 1.0) ==
        doctest::Approx(0.6726395769907114).epsilon(1e-9));
  CHECK(error_name_of([] { analytic_auc(1.0, 0.0, 0.0, 1.0); }) ==
        "DomainError");
  CHECK(error_name_of([] { analytic_auc(1.0, 1.0, 0.0, -2.0); }) ==
        "DomainError");
}

TEST_CASE("synthetic ids join group, subject, and image") {
  CHECK(make_image_id("east", 12, 3) == "east_s12_i3");
  CHECK(make_subject_id("east", 12) == "east_s12");
}

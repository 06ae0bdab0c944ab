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

#include "verigauge/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "verigauge/errors.hpp"
#include "verigauge/rng.hpp"

namespace verigauge {

namespace {

using nlohmann::json;

// Stream-tag layout per group index ig: genuine = 3*ig, impostor = 3*ig+1,
// embeddings = 3*ig+2. Cross-group buckets use 3*G + p where p indexes the
// unordered group pairs in spec order. Keeping tags disjoint lets any subset
// of streams be generated independently (or in parallel) with identical
// output.
std::uint64_t genuine_tag(std::size_t ig) { return 3 * ig; }
std::uint64_t impostor_tag(std::size_t ig) { return 3 * ig + 1; }
std::uint64_t embedding_tag(std::size_t ig) { return 3 * ig + 2; }

void require_finite(double value, const char* what) {
  if (!std::isfinite(value))
    throw AuditError(Errc::ConfigError,
                     std::string(what) + " must be finite");
}

void reject_unknown_fields(const json& obj,
                           std::initializer_list<const char*> allowed,
                           const char* where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* name) {
          return it.key() == name;
        }) == allowed.end())
      throw AuditError(Errc::SchemaError, "unknown field '" + it.key() +
                                              "' in " + where);
  }
}

const json& require_field(const json& obj, const char* name,
                          const char* where) {
  auto it = obj.find(name);
  if (it == obj.end())
    throw AuditError(Errc::SchemaError, std::string("missing field '") +
                                            name + "' in " + where);
  return *it;
}

double number_field(const json& obj, const char* name, const char* where) {
  const json& value = require_field(obj, name, where);
  if (!value.is_number())
    throw AuditError(Errc::SchemaError, std::string("field '") + name +
                                            "' in " + where +
                                            " must be a number");
  return value.get<double>();
}

std::uint64_t integer_field(const json& obj, const char* name,
                            const char* where) {
  const json& value = require_field(obj, name, where);
  if (value.is_number_unsigned()) return value.get<std::uint64_t>();
  if (value.is_number_integer())
    return static_cast<std::uint64_t>(value.get<std::int64_t>());
  throw AuditError(Errc::SchemaError, std::string("field '") + name +
                                          "' in " + where +
                                          " must be an integer");
}

std::string string_field(const json& obj, const char* name,
                         const char* where) {
  const json& value = require_field(obj, name, where);
  if (!value.is_string())
    throw AuditError(Errc::SchemaError, std::string("field '") + name +
                                            "' in " + where +
                                            " must be a string");
  return value.get<std::string>();
}

GroupSpec group_from_json(const json& obj) {
  if (!obj.is_object())
    throw AuditError(Errc::SchemaError, "each group must be a JSON object");
  reject_unknown_fields(obj,
                        {"group_label", "n_subjects", "images_per_subject",
                         "genuine_mean", "genuine_sd", "impostor_mean",
                         "impostor_sd", "embedding_spec"},
                        "group");
  GroupSpec group;
  group.group_label = string_field(obj, "group_label", "group");
  group.n_subjects = integer_field(obj, "n_subjects", "group");
  group.images_per_subject = integer_field(obj, "images_per_subject", "group");
  group.genuine_mean = number_field(obj, "genuine_mean", "group");
  group.genuine_sd = number_field(obj, "genuine_sd", "group");
  group.impostor_mean = number_field(obj, "impostor_mean", "group");
  group.impostor_sd = number_field(obj, "impostor_sd", "group");
  if (auto it = obj.find("embedding_spec"); it != obj.end()) {
    if (!it->is_object())
      throw AuditError(Errc::SchemaError,
                       "embedding_spec must be a JSON object");
    reject_unknown_fields(
        *it, {"dimension", "center_dispersion", "within_subject_sd"},
        "embedding_spec");
    EmbeddingSpec espec;
    espec.dimension = static_cast<std::uint32_t>(
        integer_field(*it, "dimension", "embedding_spec"));
    espec.center_dispersion =
        number_field(*it, "center_dispersion", "embedding_spec");
    espec.within_subject_sd =
        number_field(*it, "within_subject_sd", "embedding_spec");
    group.embedding_spec = espec;
  }
  return group;
}

// Draws a vector of iid standard normal components.
std::vector<double> gauss_vector(std::size_t dimension,
                                 GaussianStream& stream) {
  std::vector<double> v(dimension);
  for (auto& x : v) x = stream.next();
  return v;
}

double norm_of(const std::vector<double>& v) {
  double sum = 0.0;
  for (double x : v) sum += x * x;
  return std::sqrt(sum);
}

void normalize_in_place(std::vector<double>& v) {
  const double norm = norm_of(v);
  for (auto& x : v) x /= norm;
}

}  // namespace

std::string make_subject_id(const std::string& group_label,
                            std::uint64_t subject) {
  return group_label + "_s" + std::to_string(subject);
}

std::string make_image_id(const std::string& group_label,
                          std::uint64_t subject, std::uint64_t image) {
  return make_subject_id(group_label, subject) + "_i" + std::to_string(image);
}

void ScenarioSpec::validate() const {
  if (groups.empty())
    throw AuditError(Errc::ConfigError, "scenario needs at least one group");
  require_finite(cross_group_impostor_mean_offset,
                 "cross_group_impostor_mean_offset");
  std::vector<std::string> labels;
  for (const auto& group : groups) {
    if (group.group_label.empty())
      throw AuditError(Errc::ConfigError, "empty group label");
    labels.push_back(group.group_label);
    if (group.n_subjects < 1 || group.images_per_subject < 1)
      throw AuditError(Errc::ConfigError,
                       "group '" + group.group_label +
                           "' needs n_subjects >= 1 and "
                           "images_per_subject >= 1");
    require_finite(group.genuine_mean, "genuine_mean");
    require_finite(group.impostor_mean, "impostor_mean");
    require_finite(group.genuine_sd, "genuine_sd");
    require_finite(group.impostor_sd, "impostor_sd");
    if (!(group.genuine_sd > 0.0) || !(group.impostor_sd > 0.0))
      throw AuditError(Errc::ConfigError,
                       "group '" + group.group_label +
                           "' needs positive score sds");
    if (group.embedding_spec) {
      const EmbeddingSpec& espec = *group.embedding_spec;
      if (espec.dimension < 1)
        throw AuditError(Errc::ConfigError,
                         "embedding dimension must be >= 1");
      require_finite(espec.center_dispersion, "center_dispersion");
      require_finite(espec.within_subject_sd, "within_subject_sd");
      if (espec.center_dispersion < 0.0 || espec.within_subject_sd < 0.0)
        throw AuditError(Errc::ConfigError,
                         "embedding dispersions must be >= 0");
    }
  }
  std::sort(labels.begin(), labels.end());
  if (std::adjacent_find(labels.begin(), labels.end()) != labels.end())
    throw AuditError(Errc::ConfigError, "group labels must be distinct");
}

ScenarioSpec scenario_from_json_text(const std::string& text) {
  const json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded())
    throw AuditError(Errc::FormatError, "scenario is not valid JSON");
  if (!doc.is_object())
    throw AuditError(Errc::SchemaError, "scenario must be a JSON object");
  reject_unknown_fields(
      doc, {"groups", "cross_group_impostor_mean_offset", "seed"}, "scenario");

  ScenarioSpec spec;
  const json& groups = require_field(doc, "groups", "scenario");
  if (!groups.is_array())
    throw AuditError(Errc::SchemaError, "'groups' must be an array");
  for (const auto& entry : groups) spec.groups.push_back(group_from_json(entry));
  if (auto it = doc.find("cross_group_impostor_mean_offset"); it != doc.end()) {
    if (!it->is_number())
      throw AuditError(Errc::SchemaError,
                       "'cross_group_impostor_mean_offset' must be a number");
    spec.cross_group_impostor_mean_offset = it->get<double>();
  }
  spec.seed = integer_field(doc, "seed", "scenario");
  spec.validate();
  return spec;
}

std::string scenario_to_json_text(const ScenarioSpec& spec) {
  json doc;
  doc["seed"] = spec.seed;
  doc["cross_group_impostor_mean_offset"] =
      spec.cross_group_impostor_mean_offset;
  doc["groups"] = json::array();
  for (const auto& group : spec.groups) {
    json g;
    g["group_label"] = group.group_label;
    g["n_subjects"] = group.n_subjects;
    g["images_per_subject"] = group.images_per_subject;
    g["genuine_mean"] = group.genuine_mean;
    g["genuine_sd"] = group.genuine_sd;
    g["impostor_mean"] = group.impostor_mean;
    g["impostor_sd"] = group.impostor_sd;
    if (group.embedding_spec) {
      json e;
      e["dimension"] = group.embedding_spec->dimension;
      e["center_dispersion"] = group.embedding_spec->center_dispersion;
      e["within_subject_sd"] = group.embedding_spec->within_subject_sd;
      g["embedding_spec"] = e;
    }
    doc["groups"].push_back(g);
  }
  return doc.dump(2) + "\n";
}

ScenarioSpec load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw AuditError(Errc::IoError, "cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return scenario_from_json_text(buffer.str());
}

SyntheticScores generate_scores(const ScenarioSpec& spec) {
  spec.validate();
  SyntheticScores out;
  out.cross_group.metric_name = "synthetic";

  std::vector<std::size_t> impostor_counts(spec.groups.size(), 0);
  for (std::size_t ig = 0; ig < spec.groups.size(); ++ig) {
    const GroupSpec& g = spec.groups[ig];
    const std::uint64_t n = g.n_subjects;
    const std::uint64_t k = g.images_per_subject;
    const std::uint64_t per_subject = k * (k - 1) / 2;

    ScoredPairSet set;
    set.metric_name = "synthetic";
    GaussianStream genuine_stream(derive_subseed(spec.seed, genuine_tag(ig)));
    set.genuine.reserve(n * per_subject);
    for (std::uint64_t s = 0; s < n; ++s)
      for (std::uint64_t i = 0; i < k; ++i)
        for (std::uint64_t j = i + 1; j < k; ++j)
          set.genuine.push_back(
              ScoredPair{ImagePair::make(make_image_id(g.group_label, s, i),
                                         make_image_id(g.group_label, s, j)),
                         genuine_stream.next(g.genuine_mean, g.genuine_sd)});

    // One impostor draw per genuine draw, over distinct cross-subject image
    // pairs enumerated by subject distance; availability caps the count when
    // the group is tiny.
    const std::uint64_t target = n * per_subject;
    GaussianStream impostor_stream(
        derive_subseed(spec.seed, impostor_tag(ig)));
    set.impostor.reserve(target);
    std::uint64_t emitted = 0;
    for (std::uint64_t d = 1; d < n && emitted < target; ++d)
      for (std::uint64_t u = 0; u + d < n && emitted < target; ++u)
        for (std::uint64_t a = 0; a < k && emitted < target; ++a)
          for (std::uint64_t b = 0; b < k && emitted < target; ++b) {
            set.impostor.push_back(ScoredPair{
                ImagePair::make(make_image_id(g.group_label, u, a),
                                make_image_id(g.group_label, u + d, b)),
                impostor_stream.next(g.impostor_mean, g.impostor_sd)});
            ++emitted;
          }
    impostor_counts[ig] = set.impostor.size();
    out.per_group.emplace(g.group_label, std::move(set));
  }

  std::uint64_t pair_index = 0;
  for (std::size_t ia = 0; ia < spec.groups.size(); ++ia) {
    for (std::size_t ib = ia + 1; ib < spec.groups.size(); ++ib, ++pair_index) {
      const GroupSpec& ga = spec.groups[ia];
      const GroupSpec& gb = spec.groups[ib];
      const std::size_t count =
          std::min(impostor_counts[ia], impostor_counts[ib]);
      const double mean = 0.5 * (ga.impostor_mean + gb.impostor_mean) -
                          spec.cross_group_impostor_mean_offset;
      const double sd = 0.5 * (ga.impostor_sd + gb.impostor_sd);
      GaussianStream stream(derive_subseed(
          spec.seed, 3 * spec.groups.size() + pair_index));
      for (std::size_t m = 0; m < count; ++m) {
        std::uint64_t rest = m;
        const std::uint64_t u = rest % ga.n_subjects;
        rest /= ga.n_subjects;
        const std::uint64_t v = rest % gb.n_subjects;
        rest /= gb.n_subjects;
        const std::uint64_t a = rest % ga.images_per_subject;
        const std::uint64_t b =
            (rest / ga.images_per_subject) % gb.images_per_subject;
        out.cross_group.impostor.push_back(ScoredPair{
            ImagePair::make(make_image_id(ga.group_label, u, a),
                            make_image_id(gb.group_label, v, b)),
            stream.next(mean, sd)});
      }
    }
  }
  return out;
}

SyntheticPopulation generate_embeddings(const ScenarioSpec& spec) {
  spec.validate();
  std::uint32_t dimension = 0;
  for (const auto& group : spec.groups) {
    if (!group.embedding_spec)
      throw AuditError(Errc::ConfigError,
                       "group '" + group.group_label +
                           "' has no embedding_spec");
    if (dimension == 0) {
      dimension = group.embedding_spec->dimension;
    } else if (group.embedding_spec->dimension != dimension) {
      throw AuditError(Errc::DimensionError,
                       "groups disagree on embedding dimension");
    }
  }

  SyntheticPopulation pop;
  pop.dataset.attribute_names = {"race"};
  pop.embeddings.dimension = dimension;

  for (std::size_t ig = 0; ig < spec.groups.size(); ++ig) {
    const GroupSpec& g = spec.groups[ig];
    const EmbeddingSpec& espec = *g.embedding_spec;
    GaussianStream stream(derive_subseed(spec.seed, embedding_tag(ig)));

    // Unit vectors from the stream; a vanishing norm is retried so the
    // output stays well-defined for every seed.
    const auto draw_unit = [&](const std::vector<double>& base,
                               double scale) {
      for (;;) {
        std::vector<double> v = gauss_vector(dimension, stream);
        for (std::size_t c = 0; c < dimension; ++c)
          v[c] = base.empty() ? v[c] : base[c] + scale * v[c];
        if (norm_of(v) > 1e-12) {
          normalize_in_place(v);
          return v;
        }
      }
    };

    const std::vector<double> anchor = draw_unit({}, 1.0);
    for (std::uint64_t s = 0; s < g.n_subjects; ++s) {
      const std::vector<double> center =
          draw_unit(anchor, espec.center_dispersion);
      const std::string subject_id = make_subject_id(g.group_label, s);
      for (std::uint64_t i = 0; i < g.images_per_subject; ++i) {
        const std::vector<double> image =
            draw_unit(center, espec.within_subject_sd);
        ImageRecord record;
        record.image_id = make_image_id(g.group_label, s, i);
        record.subject_id = subject_id;
        record.attributes["race"] = g.group_label;
        std::vector<float> stored(dimension);
        for (std::size_t c = 0; c < dimension; ++c)
          stored[c] = static_cast<float>(image[c]);
        pop.embeddings.entries.emplace(record.image_id, std::move(stored));
        pop.dataset.records.push_back(std::move(record));
      }
    }
  }
  return pop;
}

double analytic_auc(double mu_g, double sd_g, double mu_i, double sd_i) {
  if (!(sd_g > 0.0) || !(sd_i > 0.0))
    throw AuditError(Errc::DomainError,
                     "analytic AUC needs positive standard deviations");
  const double z = (mu_g - mu_i) / std::sqrt(sd_g * sd_g + sd_i * sd_i);
  return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

}  // namespace verigauge

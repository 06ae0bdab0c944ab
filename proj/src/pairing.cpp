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

#include "verigauge/pairing.hpp"

#include <algorithm>
#include <ostream>
#include <set>
#include <unordered_map>

#include "verigauge/csv.hpp"
#include "verigauge/errors.hpp"
#include "verigauge/rng.hpp"

namespace verigauge {

namespace {

struct ImageView {
  const ImageRecord* record;
  std::int64_t subject = -1;   // dense subject index
  std::int64_t yoke_key = -1;  // dense key over constrained attribute tuple, -1 = excluded
};

// Images sorted by id so the i<j loop emits pairs in canonical order.
std::vector<const ImageRecord*> sorted_images(const Dataset& dataset) {
  std::vector<const ImageRecord*> images;
  images.reserve(dataset.records.size());
  for (const auto& record : dataset.records) images.push_back(&record);
  std::sort(images.begin(), images.end(),
            [](const ImageRecord* x, const ImageRecord* y) {
              return x->image_id < y->image_id;
            });
  return images;
}

}  // namespace

std::string YokingPolicy::name() const {
  if (constrained_attributes.empty()) return "none";
  std::string out;
  for (const auto& attribute : constrained_attributes) {
    if (!out.empty()) out.push_back('+');
    out += attribute;
  }
  return out;
}

std::vector<ImagePair> enumerate_genuine_pairs(const Dataset& dataset) {
  const auto images = sorted_images(dataset);
  std::vector<ImagePair> pairs;
  for (std::size_t i = 0; i < images.size(); ++i) {
    for (std::size_t j = i + 1; j < images.size(); ++j) {
      if (images[i]->subject_id == images[j]->subject_id)
        pairs.push_back(ImagePair{images[i]->image_id, images[j]->image_id});
    }
  }
  return pairs;
}

ImpostorEnumeration enumerate_impostor_pairs(const Dataset& dataset,
                                             const YokingPolicy& policy) {
  {
    std::set<std::string> seen;
    for (const auto& attribute : policy.constrained_attributes) {
      if (!seen.insert(attribute).second)
        throw AuditError(Errc::ConfigError,
                         "yoking policy repeats attribute " + attribute);
      if (!dataset.has_attribute(attribute))
        throw AuditError(Errc::UnknownAttribute,
                         "yoking attribute '" + attribute +
                             "' is not a metadata column");
    }
  }

  const auto images = sorted_images(dataset);
  std::vector<ImageView> views(images.size());
  std::unordered_map<std::string, std::int64_t> subject_index;
  std::unordered_map<std::string, std::int64_t> key_index;
  std::set<std::string> excluded;

  for (std::size_t i = 0; i < images.size(); ++i) {
    views[i].record = images[i];
    auto [sit, _] = subject_index.emplace(
        images[i]->subject_id,
        static_cast<std::int64_t>(subject_index.size()));
    views[i].subject = sit->second;

    std::string key;
    bool complete = true;
    for (const auto& attribute : policy.constrained_attributes) {
      auto ait = images[i]->attributes.find(attribute);
      if (ait == images[i]->attributes.end()) {
        complete = false;
        break;
      }
      key.push_back('\x1f');  // unit separator keeps tuples unambiguous
      key += ait->second;
    }
    if (!complete) {
      excluded.insert(images[i]->subject_id);
      views[i].yoke_key = -1;
    } else {
      auto [kit, _k] =
          key_index.emplace(key, static_cast<std::int64_t>(key_index.size()));
      views[i].yoke_key = kit->second;
    }
  }

  ImpostorEnumeration result;
  result.excluded_subjects = excluded.size();
  for (std::size_t i = 0; i < views.size(); ++i) {
    if (views[i].yoke_key < 0) continue;
    for (std::size_t j = i + 1; j < views.size(); ++j) {
      if (views[j].yoke_key < 0) continue;
      if (views[i].subject != views[j].subject &&
          views[i].yoke_key == views[j].yoke_key)
        result.pairs.push_back(ImagePair{views[i].record->image_id,
                                         views[j].record->image_id});
    }
  }
  return result;
}

PairSet build_pair_set(const Dataset& dataset, const YokingPolicy& policy) {
  PairSet set;
  set.policy = policy;
  set.genuine = enumerate_genuine_pairs(dataset);
  auto impostors = enumerate_impostor_pairs(dataset, policy);
  set.impostor = std::move(impostors.pairs);
  set.excluded_subjects = impostors.excluded_subjects;
  return set;
}

StratifiedPairs stratify_pairs(const PairSet& pairs, const Dataset& dataset,
                               const std::string& attribute) {
  std::unordered_map<std::string, const std::string*> value_by_image;
  for (const auto& record : dataset.records) {
    auto it = record.attributes.find(attribute);
    value_by_image[record.image_id] =
        it == record.attributes.end() ? nullptr : &it->second;
  }
  const auto lookup = [&](const std::string& image_id) {
    auto it = value_by_image.find(image_id);
    return it == value_by_image.end() ? nullptr : it->second;
  };

  StratifiedPairs result;
  result.cross_group.policy = pairs.policy;
  const auto group_of = [&](const std::string& value) -> PairSet& {
    auto [it, inserted] = result.groups.try_emplace(value);
    if (inserted) it->second.policy = pairs.policy;
    return it->second;
  };

  for (const auto& pair : pairs.genuine) {
    const std::string* value = lookup(pair.a);
    if (value == nullptr) {
      ++result.dropped_missing_attribute;
      continue;
    }
    group_of(*value).genuine.push_back(pair);
  }
  for (const auto& pair : pairs.impostor) {
    const std::string* va = lookup(pair.a);
    const std::string* vb = lookup(pair.b);
    if (va == nullptr || vb == nullptr) {
      ++result.dropped_missing_attribute;
      continue;
    }
    if (*va == *vb) {
      group_of(*va).impostor.push_back(pair);
    } else {
      result.cross_group.impostor.push_back(pair);
    }
  }
  return result;
}

std::vector<ImagePair> subsample_pairs(std::span<const ImagePair> pairs,
                                       std::size_t count, std::uint64_t seed) {
  std::vector<ImagePair> out(pairs.begin(), pairs.end());
  if (count >= out.size()) return out;
  Xoshiro256pp rng(seed);
  // Partial Fisher-Yates: the first `count` slots become the sample.
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j =
        i + static_cast<std::size_t>(rng.uniform_below(out.size() - i));
    std::swap(out[i], out[j]);
  }
  out.resize(count);
  std::sort(out.begin(), out.end());
  return out;
}

void write_pair_list_csv(std::ostream& out, const PairSet& pairs) {
  csv::write_record(out, {"id_a", "id_b", "label"});
  for (const auto& pair : pairs.genuine)
    csv::write_record(out, {pair.a, pair.b, "genuine"});
  for (const auto& pair : pairs.impostor)
    csv::write_record(out, {pair.a, pair.b, "impostor"});
}

}  // namespace verigauge

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

#include "verigauge/partition.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "verigauge/csv.hpp"
#include "verigauge/errors.hpp"

namespace verigauge {

namespace {

// Tiers one label's pairs. `order` must already be sorted hardest-first;
// block j then maps to tier_names[T-1-j] because tier_names runs easiest to
// hardest.
void assign_label(const std::vector<const ScoredPair*>& order,
                  const TierSpec& spec, TieredPairs& out) {
  const std::size_t n = order.size();
  std::vector<std::size_t> cuts;
  cuts.reserve(spec.quantile_edges.size());
  for (double q : spec.quantile_edges) {
    auto cut = static_cast<std::size_t>(
        std::ceil(q * static_cast<double>(n)));
    cut = std::min(cut, n);
    // A tie run never straddles a boundary: push the cut past it so the run
    // stays whole in the harder (earlier) block.
    while (cut > 0 && cut < n &&
           order[cut]->score == order[cut - 1]->score)
      ++cut;
    if (!cuts.empty()) cut = std::max(cut, cuts.back());
    cuts.push_back(cut);
  }
  std::size_t begin = 0;
  for (std::size_t block = 0; block < spec.tier_names.size(); ++block) {
    const std::size_t end =
        block < cuts.size() ? cuts[block] : n;
    const std::string& tier =
        spec.tier_names[spec.tier_names.size() - 1 - block];
    for (std::size_t k = begin; k < end; ++k) {
      out.assignment.emplace(order[k]->pair, tier);
      ++out.per_tier_counts[tier];
    }
    begin = end;
  }
}

}  // namespace

void TierSpec::validate() const {
  if (tier_names.empty() || tier_names.size() != quantile_edges.size() + 1)
    throw AuditError(Errc::ConfigError,
                     "tier spec needs one more tier name than quantile edge");
  std::set<std::string> seen;
  for (const auto& name : tier_names) {
    if (name.empty())
      throw AuditError(Errc::ConfigError, "empty tier name");
    if (!seen.insert(name).second)
      throw AuditError(Errc::ConfigError, "duplicate tier name '" + name + "'");
  }
  double prev = 0.0;
  for (double q : quantile_edges) {
    if (!(q > prev) || !(q < 1.0))
      throw AuditError(Errc::ConfigError,
                       "quantile edges must ascend strictly inside (0, 1)");
    prev = q;
  }
}

TieredPairs assign_difficulty_tiers(const ScoredPairSet& reference,
                                    const TierSpec& spec) {
  spec.validate();
  if (reference.genuine.size() < spec.tier_names.size() ||
      reference.impostor.size() < spec.tier_names.size())
    throw AuditError(Errc::TooFewPairs,
                     "tiering needs at least " +
                         std::to_string(spec.tier_names.size()) +
                         " pairs per label, got " +
                         std::to_string(reference.genuine.size()) +
                         " genuine and " +
                         std::to_string(reference.impostor.size()) +
                         " impostor");

  TieredPairs out;
  out.tier_names = spec.tier_names;
  for (const auto& name : spec.tier_names) out.per_tier_counts[name] = 0;

  std::vector<const ScoredPair*> order;
  order.reserve(reference.genuine.size());
  for (const auto& sp : reference.genuine) order.push_back(&sp);
  std::sort(order.begin(), order.end(),
            [](const ScoredPair* x, const ScoredPair* y) {
              if (x->score != y->score) return x->score < y->score;
              return x->pair < y->pair;
            });
  assign_label(order, spec, out);

  order.clear();
  order.reserve(reference.impostor.size());
  for (const auto& sp : reference.impostor) order.push_back(&sp);
  std::sort(order.begin(), order.end(),
            [](const ScoredPair* x, const ScoredPair* y) {
              if (x->score != y->score) return x->score > y->score;
              return x->pair < y->pair;
            });
  assign_label(order, spec, out);
  return out;
}

std::vector<TierSummaryRow> tier_summary(const TieredPairs& tiers,
                                         const Dataset& dataset,
                                         const std::string& attribute) {
  std::unordered_map<std::string, const ImageRecord*> by_image;
  for (const auto& record : dataset.records)
    by_image.emplace(record.image_id, &record);

  std::map<std::string, std::set<std::string>> subjects_per_tier;
  std::map<std::string, std::size_t> pairs_per_tier;
  for (const auto& [pair, tier] : tiers.assignment) {
    ++pairs_per_tier[tier];
    for (const std::string* image_id : {&pair.a, &pair.b}) {
      auto it = by_image.find(*image_id);
      if (it != by_image.end())
        subjects_per_tier[tier].insert(it->second->subject_id);
    }
  }

  std::unordered_map<std::string, const std::string*> subject_value;
  if (!attribute.empty()) {
    for (const auto& record : dataset.records) {
      auto it = record.attributes.find(attribute);
      subject_value[record.subject_id] =
          it == record.attributes.end() ? nullptr : &it->second;
    }
  }

  std::vector<TierSummaryRow> rows;
  rows.reserve(tiers.tier_names.size());
  for (const auto& tier : tiers.tier_names) {
    TierSummaryRow row;
    row.tier = tier;
    row.n_pairs = pairs_per_tier[tier];
    const auto& subjects = subjects_per_tier[tier];
    row.n_identities = subjects.size();
    if (!attribute.empty()) {
      for (const auto& subject : subjects) {
        auto it = subject_value.find(subject);
        const std::string* value =
            it == subject_value.end() ? nullptr : it->second;
        if (value == nullptr) {
          ++row.missing_attribute;
        } else {
          ++row.per_group[*value];
        }
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string render_tier_summary(const std::vector<TierSummaryRow>& rows) {
  std::ostringstream out;
  for (const auto& row : rows) {
    out << row.tier << ": " << row.n_identities << " identities, "
        << row.n_pairs << " pairs";
    if (!row.per_group.empty() || row.missing_attribute > 0) {
      out << " [";
      bool first = true;
      for (const auto& [value, count] : row.per_group) {
        if (!first) out << ", ";
        out << value << " " << count;
        first = false;
      }
      if (row.missing_attribute > 0) {
        if (!first) out << ", ";
        out << "missing " << row.missing_attribute;
      }
      out << "]";
    }
    out << "\n";
  }
  return out.str();
}

std::map<std::string, ScoredPairSet> split_by_tier(const ScoredPairSet& scored,
                                                   const TieredPairs& tiers) {
  std::map<std::string, ScoredPairSet> out;
  for (const auto& tier : tiers.tier_names) {
    ScoredPairSet empty;
    empty.policy = scored.policy;
    empty.metric_name = scored.metric_name;
    out.emplace(tier, std::move(empty));
  }
  const auto tier_of = [&](const ImagePair& pair) -> const std::string& {
    auto it = tiers.assignment.find(pair);
    if (it == tiers.assignment.end())
      throw AuditError(Errc::DomainError,
                       "pair (" + pair.a + ", " + pair.b +
                           ") has no tier assignment");
    return it->second;
  };
  for (const auto& sp : scored.genuine) out.at(tier_of(sp.pair)).genuine.push_back(sp);
  for (const auto& sp : scored.impostor)
    out.at(tier_of(sp.pair)).impostor.push_back(sp);
  return out;
}

void write_tier_csv(std::ostream& out, const ScoredPairSet& scored,
                    const TieredPairs& tiers) {
  csv::write_record(out, {"id_a", "id_b", "label", "tier"});
  const auto tier_of = [&](const ImagePair& pair) -> const std::string& {
    auto it = tiers.assignment.find(pair);
    if (it == tiers.assignment.end())
      throw AuditError(Errc::DomainError,
                       "pair (" + pair.a + ", " + pair.b +
                           ") has no tier assignment");
    return it->second;
  };
  for (const auto& sp : scored.genuine)
    csv::write_record(out, {sp.pair.a, sp.pair.b, "genuine", tier_of(sp.pair)});
  for (const auto& sp : scored.impostor)
    csv::write_record(out,
                      {sp.pair.a, sp.pair.b, "impostor", tier_of(sp.pair)});
}

}  // namespace verigauge

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

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "verigauge/errors.hpp"
#include "verigauge/scoring.hpp"
#include "verigauge/types.hpp"

namespace vgtest {

/// Runs fn and reports which AuditError code it threw, or "none". Keeps
/// error assertions printable on failure.
template <typename Fn>
std::string error_name_of(Fn&& fn) {
  try {
    std::forward<Fn>(fn)();
  } catch (const verigauge::AuditError& e) {
    return std::string(verigauge::errc_name(e.code()));
  }
  return "none";
}

/// Self-deleting scratch directory.
class TempDir {
 public:
  TempDir() {
    static std::atomic<unsigned> counter{0};
    const auto base = std::filesystem::temp_directory_path();
    for (;;) {
      auto candidate =
          base / ("vgtest_" + std::to_string(::getpid()) + "_" +
                  std::to_string(counter.fetch_add(1)));
      std::error_code ec;
      if (std::filesystem::create_directory(candidate, ec)) {
        path_ = candidate;
        break;
      }
    }
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }

  const std::filesystem::path& path() const { return path_; }
  std::string str(const std::string& name = "") const {
    return name.empty() ? path_.string() : (path_ / name).string();
  }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

/// Brute-force concordance statistic: P(g > i) + 1/2 P(g == i) over the
/// full cross product. The independent oracle for trapezoidal AUC.
inline double concordance(const std::vector<double>& genuine,
                          const std::vector<double>& impostor) {
  long double favorable = 0.0L;
  for (double g : genuine)
    for (double i : impostor) {
      if (g > i)
        favorable += 1.0L;
      else if (g == i)
        favorable += 0.5L;
    }
  return static_cast<double>(
      favorable / (static_cast<long double>(genuine.size()) *
                   static_cast<long double>(impostor.size())));
}

/// Wraps bare score lists in a ScoredPairSet with synthesized pair ids, so
/// metric-level tests can drive set-level interfaces.
inline verigauge::ScoredPairSet make_scored(
    const std::vector<double>& genuine, const std::vector<double>& impostor,
    const std::string& metric = "external") {
  verigauge::ScoredPairSet set;
  set.metric_name = metric;
  for (std::size_t k = 0; k < genuine.size(); ++k)
    set.genuine.push_back(
        {verigauge::ImagePair::make("g" + std::to_string(k) + "a",
                                    "g" + std::to_string(k) + "b"),
         genuine[k]});
  for (std::size_t k = 0; k < impostor.size(); ++k)
    set.impostor.push_back(
        {verigauge::ImagePair::make("i" + std::to_string(k) + "a",
                                    "i" + std::to_string(k) + "b"),
         impostor[k]});
  return set;
}

struct MetaRow {
  std::string image;
  std::string subject;
  std::map<std::string, std::string> attributes;
};

inline verigauge::Dataset make_dataset(
    const std::vector<std::string>& attribute_names,
    const std::vector<MetaRow>& rows) {
  verigauge::Dataset dataset;
  dataset.attribute_names = attribute_names;
  for (const auto& row : rows)
    dataset.records.push_back({row.image, row.subject, row.attributes});
  return dataset;
}

}  // namespace vgtest

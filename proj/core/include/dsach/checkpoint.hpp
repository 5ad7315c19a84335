// Copyright 2026 The dsach Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <map>
#include <nlohmann/json.hpp>
#include <span>
#include <string>
#include <vector>

#include "dsach/adam.hpp"
#include "dsach/mlp.hpp"

namespace dsach::nn {

/// Checkpoint on disk is a pair of files sharing a stem:
///   <stem>.bin   concatenated little-endian IEEE-754 float64 arrays
///   <stem>.json  manifest: {"format", "version", "blob", "arrays": [{name, offset, count}], "meta"}
/// Offsets and counts are in elements, not bytes.
class CheckpointWriter {
 public:
  void add_array(const std::string& name, std::span<const double> values);
  nlohmann::json& meta() { return meta_; }
  void write(const std::filesystem::path& stem) const;

 private:
  std::vector<std::pair<std::string, std::vector<double>>> arrays_;
  nlohmann::json meta_ = nlohmann::json::object();
};

class CheckpointReader {
 public:
  static CheckpointReader load(const std::filesystem::path& stem);

  bool has_array(const std::string& name) const { return arrays_.contains(name); }
  const std::vector<double>& array(const std::string& name) const;
  const nlohmann::json& meta() const { return meta_; }

 private:
  std::map<std::string, std::vector<double>> arrays_;
  nlohmann::json meta_;
};

nlohmann::json to_json(const MlpSpec& spec);
MlpSpec mlp_spec_from_json(const nlohmann::json& j);

/// Scalar optimizer fields only; the moment vectors go into the blob.
nlohmann::json optimizer_meta(const OptimizerState& s);
void add_optimizer(CheckpointWriter& w, const std::string& name, const OptimizerState& s);
OptimizerState read_optimizer(const CheckpointReader& r, const std::string& name);

void write_le_doubles(std::ostream& os, std::span<const double> values);
std::vector<double> read_le_doubles(std::istream& is, std::size_t count);

}  // namespace dsach::nn

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

#include "dsach/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <fstream>

#include "dsach/errors.hpp"

namespace dsach::nn {
namespace {

constexpr const char* kFormat = "dsach-checkpoint";
constexpr int kVersion = 1;

std::filesystem::path with_suffix(const std::filesystem::path& stem, const char* suffix) {
  auto p = stem;
  p += suffix;
  return p;
}

}  // namespace

void write_le_doubles(std::ostream& os, std::span<const double> values) {
  std::array<char, 8> buf{};
  for (double v : values) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    for (int b = 0; b < 8; ++b) {
      buf[b] = static_cast<char>(bits & 0xFFu);
      bits >>= 8;
    }
    os.write(buf.data(), 8);
  }
}

std::vector<double> read_le_doubles(std::istream& is, std::size_t count) {
  std::vector<double> out(count);
  std::array<unsigned char, 8> buf{};
  for (std::size_t i = 0; i < count; ++i) {
    is.read(reinterpret_cast<char*>(buf.data()), 8);
    if (!is) throw ConfigError("checkpoint blob is truncated");
    std::uint64_t bits = 0;
    for (int b = 7; b >= 0; --b) bits = (bits << 8) | buf[b];
    out[i] = std::bit_cast<double>(bits);
  }
  return out;
}

void CheckpointWriter::add_array(const std::string& name, std::span<const double> values) {
  for (const auto& [n, _] : arrays_) {
    if (n == name) throw ConfigError("checkpoint: duplicate array '" + name + "'");
  }
  arrays_.emplace_back(name, std::vector<double>(values.begin(), values.end()));
}

void CheckpointWriter::write(const std::filesystem::path& stem) const {
  if (stem.has_parent_path()) std::filesystem::create_directories(stem.parent_path());
  const auto blob_path = with_suffix(stem, ".bin");
  std::ofstream blob(blob_path, std::ios::binary | std::ios::trunc);
  if (!blob) throw ConfigError("cannot open " + blob_path.string() + " for writing");
  nlohmann::json manifest;
  manifest["format"] = kFormat;
  manifest["version"] = kVersion;
  manifest["blob"] = blob_path.filename().string();
  manifest["arrays"] = nlohmann::json::array();
  std::size_t offset = 0;
  for (const auto& [name, values] : arrays_) {
    write_le_doubles(blob, values);
    manifest["arrays"].push_back({{"name", name}, {"offset", offset}, {"count", values.size()}});
    offset += values.size();
  }
  manifest["meta"] = meta_;
  std::ofstream js(with_suffix(stem, ".json"), std::ios::trunc);
  js << manifest.dump(2) << '\n';
}

CheckpointReader CheckpointReader::load(const std::filesystem::path& stem) {
  const auto manifest_path = with_suffix(stem, ".json");
  std::ifstream js(manifest_path);
  if (!js) throw ConfigError("cannot open checkpoint manifest " + manifest_path.string());
  nlohmann::json manifest;
  try {
    js >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed checkpoint manifest: " + std::string(e.what()));
  }
  if (manifest.value("format", "") != kFormat || manifest.value("version", 0) != kVersion) {
    throw ConfigError("unsupported checkpoint format in " + manifest_path.string());
  }
  auto blob_path = stem.parent_path() / manifest.at("blob").get<std::string>();
  std::ifstream blob(blob_path, std::ios::binary);
  if (!blob) throw ConfigError("cannot open checkpoint blob " + blob_path.string());

  CheckpointReader r;
  for (const auto& a : manifest.at("arrays")) {
    const auto offset = a.at("offset").get<std::size_t>();
    const auto count = a.at("count").get<std::size_t>();
    blob.seekg(static_cast<std::streamoff>(offset * 8));
    r.arrays_[a.at("name").get<std::string>()] = read_le_doubles(blob, count);
  }
  r.meta_ = manifest.value("meta", nlohmann::json::object());
  return r;
}

const std::vector<double>& CheckpointReader::array(const std::string& name) const {
  auto it = arrays_.find(name);
  if (it == arrays_.end()) throw ConfigError("checkpoint has no array '" + name + "'");
  return it->second;
}

nlohmann::json to_json(const MlpSpec& spec) {
  nlohmann::json acts = nlohmann::json::array();
  for (auto a : spec.activations) acts.push_back(to_string(a));
  return {{"input", spec.input}, {"hidden", spec.hidden}, {"output", spec.output},
          {"activations", acts}};
}

MlpSpec mlp_spec_from_json(const nlohmann::json& j) {
  MlpSpec s;
  try {
    s.input = j.at("input").get<std::size_t>();
    s.hidden = j.at("hidden").get<std::vector<std::size_t>>();
    s.output = j.at("output").get<std::size_t>();
    for (const auto& a : j.at("activations")) s.activations.push_back(activation_from_string(a));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed network spec: " + std::string(e.what()));
  }
  s.validate();
  return s;
}

nlohmann::json optimizer_meta(const OptimizerState& s) {
  return {{"step", s.step}, {"beta1", s.beta1}, {"beta2", s.beta2}, {"eps", s.eps}};
}

void add_optimizer(CheckpointWriter& w, const std::string& name, const OptimizerState& s) {
  w.add_array(name + ".m", s.m);
  w.add_array(name + ".v", s.v);
  w.meta()["optimizers"][name] = optimizer_meta(s);
}

OptimizerState read_optimizer(const CheckpointReader& r, const std::string& name) {
  OptimizerState s;
  s.m = r.array(name + ".m");
  s.v = r.array(name + ".v");
  const auto& j = r.meta().at("optimizers").at(name);
  s.step = j.at("step").get<std::uint64_t>();
  s.beta1 = j.at("beta1").get<double>();
  s.beta2 = j.at("beta2").get<double>();
  s.eps = j.at("eps").get<double>();
  return s;
}

}  // namespace dsach::nn

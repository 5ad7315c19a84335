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

#include "dsach/param_vector.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dsach/errors.hpp"

namespace dsach::nn {

ParamLayout::ParamLayout(std::vector<ParamBlock> blocks) : blocks_(std::move(blocks)) {
  std::size_t offset = 0;
  for (auto& b : blocks_) {
    if (b.rows == 0 || b.cols == 0) {
      throw ConfigError("parameter block '" + b.name + "' has an empty shape");
    }
    b.offset = offset;
    offset += b.size();
  }
  total_ = offset;
}

bool ParamLayout::operator==(const ParamLayout& other) const {
  if (blocks_.size() != other.blocks_.size()) return false;
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const auto& a = blocks_[i];
    const auto& b = other.blocks_[i];
    if (a.name != b.name || a.rows != b.rows || a.cols != b.cols || a.offset != b.offset) {
      return false;
    }
  }
  return true;
}

namespace detail {

FlatVector::FlatVector(LayoutPtr layout)
    : layout_(std::move(layout)), values_(layout_ ? layout_->total_size() : 0, 0.0) {}

FlatVector::FlatVector(LayoutPtr layout, std::vector<double> values)
    : layout_(std::move(layout)), values_(std::move(values)) {
  if (layout_ && layout_->total_size() != values_.size()) {
    throw ConfigError("vector length " + std::to_string(values_.size()) +
                      " does not match layout size " + std::to_string(layout_->total_size()));
  }
}

FlatVector::FlatVector(std::vector<double> values) : values_(std::move(values)) {}

bool FlatVector::all_finite() const {
  for (double v : values_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace detail

GradientVector GradientVector::zeros_like(const ParamVector& params) {
  if (params.layout()) return GradientVector(params.layout());
  return GradientVector(std::vector<double>(params.size(), 0.0));
}

void GradientVector::set_zero() { std::fill(values_.begin(), values_.end(), 0.0); }

void GradientVector::require_finite(const std::string& context) const {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (std::isfinite(values_[i])) continue;
    std::string where = "index " + std::to_string(i);
    if (layout_) {
      for (const auto& b : layout_->blocks()) {
        if (i >= b.offset && i < b.offset + b.size()) {
          where = "block '" + b.name + "'";
          break;
        }
      }
    }
    throw NumericalError(context + ": non-finite gradient in " + where);
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ConfigError("dot: length mismatch " + std::to_string(a.size()) + " vs " +
                      std::to_string(b.size()));
  }
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  if (x.size() != y.size()) throw ConfigError("axpy: length mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

}  // namespace dsach::nn

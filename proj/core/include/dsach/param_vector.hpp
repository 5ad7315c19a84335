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

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace dsach::nn {

/// One weight matrix or bias vector inside a flat parameter vector.
struct ParamBlock {
  std::string name;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t offset = 0;

  std::size_t size() const { return rows * cols; }
};

/// Immutable map from flat indices to network tensors.
class ParamLayout {
 public:
  ParamLayout() = default;
  explicit ParamLayout(std::vector<ParamBlock> blocks);

  const std::vector<ParamBlock>& blocks() const { return blocks_; }
  std::size_t total_size() const { return total_; }
  bool operator==(const ParamLayout& other) const;

 private:
  std::vector<ParamBlock> blocks_;
  std::size_t total_ = 0;
};

using LayoutPtr = std::shared_ptr<const ParamLayout>;

namespace detail {

// Shared storage for ParamVector and GradientVector. The layout pointer may be
// null for plain flat vectors (e.g. gradients built directly in tests).
class FlatVector {
 public:
  FlatVector() = default;
  explicit FlatVector(LayoutPtr layout);
  FlatVector(LayoutPtr layout, std::vector<double> values);
  explicit FlatVector(std::vector<double> values);

  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  const LayoutPtr& layout() const { return layout_; }

  std::span<double> span() { return values_; }
  std::span<const double> span() const { return values_; }
  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  bool all_finite() const;

 protected:
  LayoutPtr layout_;
  std::vector<double> values_;
};

}  // namespace detail

/// Flat real vector of network weights and biases.
class ParamVector : public detail::FlatVector {
 public:
  using FlatVector::FlatVector;
};

/// Gradient with the same length and layout as a ParamVector.
class GradientVector : public detail::FlatVector {
 public:
  using FlatVector::FlatVector;

  static GradientVector zeros_like(const ParamVector& params);
  void set_zero();
  /// Throws NumericalError naming the first offending block if any entry is
  /// non-finite.
  void require_finite(const std::string& context) const;
};

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> a);
/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);

}  // namespace dsach::nn

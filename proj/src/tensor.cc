// Copyright 2026 The HSD Authors.
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

#include "hsd/tensor.h"

#include <charconv>
#include <cmath>
#include <functional>
#include <numeric>

#include "hsd/errors.h"

namespace hsd {

std::size_t ShapeSize(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

std::string ShapeString(const Shape& shape) {
  std::string out = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) out += ", ";
    out += std::to_string(shape[i]);
  }
  return out + ")";
}

Tensor::Tensor(Shape shape, double fill)
    : shape_(std::move(shape)), data_(ShapeSize(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != ShapeSize(shape_)) {
    throw NumericError("tensor data length " + std::to_string(data_.size()) +
                       " does not match shape " + ShapeString(shape_));
  }
}

Tensor Tensor::Vector(std::vector<double> values) {
  const std::size_t n = values.size();
  return Tensor({n}, std::move(values));
}

Tensor Tensor::Matrix(
    std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t cols = rows.size() == 0 ? 0 : rows.begin()->size();
  std::vector<double> data;
  for (const auto& row : rows) {
    if (row.size() != cols) throw NumericError("ragged matrix literal");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Tensor({rows.size(), cols}, std::move(data));
}

Tensor Tensor::Reshaped(Shape shape) const {
  return Tensor(std::move(shape), data_);
}

void Tensor::Fill(double value) { std::fill(data_.begin(), data_.end(), value); }

bool Tensor::AllFinite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

std::string FormatExact(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value,
                           std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

double ParseDouble(std::string_view token) {
  double value = 0.0;
  const char* begin = token.data();
  const char* end = token.data() + token.size();
  if (!token.empty() && token.front() == '+') ++begin;
  auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc() || res.ptr != end || token.empty()) {
    throw InputError("invalid number '" + std::string(token) + "'");
  }
  return value;
}

}  // namespace hsd

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

#ifndef HSD_OPTIM_H_
#define HSD_OPTIM_H_

#include <span>

#include "hsd/autodiff.h"

namespace hsd {

struct AdamConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  // Throws InputError when a constant is out of range.
  void Validate() const;
};

// One bias-corrected Adam update of param.value using grad:
//   m <- b1 m + (1 - b1) g,  v <- b2 v + (1 - b2) g^2,  t <- t + 1
//   value -= lr * (m / (1 - b1^t)) / (sqrt(v / (1 - b2^t)) + eps)
// Throws NumericError on shape mismatch or non-finite gradient entries.
void AdamStep(Parameter& param, const Tensor& grad, const AdamConfig& cfg);

// Applies AdamStep with each trainable parameter's accumulated grad, then
// clears the grads.
void AdamUpdate(std::span<Parameter* const> params, const AdamConfig& cfg);

}  // namespace hsd

#endif  // HSD_OPTIM_H_

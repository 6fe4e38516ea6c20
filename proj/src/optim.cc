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

#include "hsd/optim.h"

#include <cmath>

#include "hsd/errors.h"

namespace hsd {

void AdamConfig::Validate() const {
  if (!(learning_rate > 0)) throw InputError("learning_rate must be positive");
  if (!(beta1 > 0 && beta1 < 1)) throw InputError("beta1 must be in (0, 1)");
  if (!(beta2 > 0 && beta2 < 1)) throw InputError("beta2 must be in (0, 1)");
  if (!(epsilon > 0)) throw InputError("epsilon must be positive");
}

void AdamStep(Parameter& param, const Tensor& grad, const AdamConfig& cfg) {
  if (grad.shape() != param.value.shape()) {
    throw NumericError("adam: gradient shape " + ShapeString(grad.shape()) +
                       " does not match parameter '" + param.name + "' shape " +
                       ShapeString(param.value.shape()));
  }
  if (!grad.AllFinite()) throw NumericError("non-finite gradient");
  if (param.adam_m.shape() != param.value.shape()) {
    param.adam_m = Tensor(param.value.shape());
  }
  if (param.adam_v.shape() != param.value.shape()) {
    param.adam_v = Tensor(param.value.shape());
  }
  ++param.step_count;
  const double t = static_cast<double>(param.step_count);
  const double m_correction = 1.0 - std::pow(cfg.beta1, t);
  const double v_correction = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < grad.size(); ++i) {
    const double g = grad[i];
    double& m = param.adam_m[i];
    double& v = param.adam_v[i];
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * g * g;
    const double m_hat = m / m_correction;
    const double v_hat = v / v_correction;
    param.value[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
  }
}

void AdamUpdate(std::span<Parameter* const> params, const AdamConfig& cfg) {
  for (Parameter* p : params) {
    if (!p->trainable) continue;
    if (p->grad.shape() != p->value.shape()) p->grad = Tensor(p->value.shape());
    AdamStep(*p, p->grad, cfg);
    p->ZeroGrad();
  }
}

}  // namespace hsd

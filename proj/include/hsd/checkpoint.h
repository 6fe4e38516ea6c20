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

#ifndef HSD_CHECKPOINT_H_
#define HSD_CHECKPOINT_H_

// Named-tensor container. Text layout, one record per tensor:
//
//   hsd-params 1
//   count <n>
//   tensor <name> <rank> <dim_0> ... <dim_{rank-1}>
//   <value_0> <value_1> ...            (17 significant digits)
//   ...
//   end
//
// Values are printed with 17 significant digits so reading them back
// reproduces every double bit for bit.

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "hsd/tensor.h"

namespace hsd {

struct NamedTensor {
  std::string name;
  Tensor value;

  bool operator==(const NamedTensor&) const = default;
};

void WriteTensors(std::ostream& out, const std::vector<NamedTensor>& tensors);
// Throws InputError describing the first malformed record.
std::vector<NamedTensor> ReadTensors(std::istream& in);

}  // namespace hsd

#endif  // HSD_CHECKPOINT_H_

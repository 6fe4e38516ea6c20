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

#include "hsd/checkpoint.h"

#include <set>
#include <sstream>

#include "hsd/errors.h"

namespace hsd {
namespace {

constexpr const char* kMagic = "hsd-params";
constexpr int kVersion = 1;

std::string NextWord(std::istream& in, const char* what) {
  std::string word;
  if (!(in >> word)) {
    throw InputError(std::string("checkpoint: unexpected end of input reading ") +
                     what);
  }
  return word;
}

std::size_t NextCount(std::istream& in, const char* what) {
  const std::string word = NextWord(in, what);
  std::size_t pos = 0;
  unsigned long long value = 0;
  try {
    value = std::stoull(word, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != word.size() || word.empty() || word[0] == '-') {
    throw InputError(std::string("checkpoint: invalid ") + what + " '" + word +
                     "'");
  }
  return static_cast<std::size_t>(value);
}

void Expect(std::istream& in, const std::string& keyword) {
  const std::string word = NextWord(in, keyword.c_str());
  if (word != keyword) {
    throw InputError("checkpoint: expected '" + keyword + "', found '" + word +
                     "'");
  }
}

}  // namespace

void WriteTensors(std::ostream& out, const std::vector<NamedTensor>& tensors) {
  out << kMagic << ' ' << kVersion << '\n';
  out << "count " << tensors.size() << '\n';
  for (const auto& [name, value] : tensors) {
    out << "tensor " << name << ' ' << value.rank();
    for (std::size_t d : value.shape()) out << ' ' << d;
    out << '\n';
    for (std::size_t i = 0; i < value.size(); ++i) {
      if (i > 0) out << ' ';
      out << FormatExact(value[i]);
    }
    out << '\n';
  }
  out << "end\n";
}

std::vector<NamedTensor> ReadTensors(std::istream& in) {
  Expect(in, kMagic);
  const std::size_t version = NextCount(in, "version");
  if (version != kVersion) {
    throw InputError("checkpoint: unsupported version " +
                     std::to_string(version));
  }
  Expect(in, "count");
  const std::size_t count = NextCount(in, "tensor count");
  std::vector<NamedTensor> tensors;
  std::set<std::string> names;
  for (std::size_t k = 0; k < count; ++k) {
    Expect(in, "tensor");
    NamedTensor t;
    t.name = NextWord(in, "tensor name");
    if (!names.insert(t.name).second) {
      throw InputError("checkpoint: duplicate tensor '" + t.name + "'");
    }
    const std::size_t rank = NextCount(in, "rank");
    Shape shape(rank);
    for (auto& d : shape) d = NextCount(in, "dimension");
    std::vector<double> data(ShapeSize(shape));
    for (auto& v : data) v = ParseDouble(NextWord(in, "tensor value"));
    t.value = Tensor(std::move(shape), std::move(data));
    tensors.push_back(std::move(t));
  }
  Expect(in, "end");
  return tensors;
}

}  // namespace hsd

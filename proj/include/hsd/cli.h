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

#ifndef HSD_CLI_H_
#define HSD_CLI_H_

#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace hsd {

// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitInput = 2;

// Flat "key = value" settings with '#' comments. Later Set() calls win.
class RunConfig {
 public:
  static RunConfig Parse(const std::string& text);
  static RunConfig Load(const std::string& path);

  void Set(const std::string& key, const std::string& value) {
    values_[key] = value;
  }
  bool Has(const std::string& key) const { return values_.count(key) > 0; }
  std::string Get(const std::string& key, const std::string& fallback = "") const;
  const std::map<std::string, std::string>& values() const { return values_; }

  // Sorted "key = value" lines.
  std::string Render() const;

 private:
  std::map<std::string, std::string> values_;
};

// Entry point of the hsd tool; returns the process exit code.
int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err);

}  // namespace hsd

#endif  // HSD_CLI_H_

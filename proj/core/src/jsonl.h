// Copyright 2026 The Mnemo Authors
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

#ifndef MNEMO_SRC_JSONL_H_
#define MNEMO_SRC_JSONL_H_

#include <filesystem>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "mnemo/error.h"
#include "mnemo/text.h"

namespace mnemo::detail {

// Calls `fn(json, line_number)` for each non-blank line. Any exception from
// parsing or from `fn` is rethrown as kParseError carrying the line number.
template <typename Fn>
void for_each_json_line(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIoError, "cannot open " + path.string());
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (text::is_blank(line)) continue;
    try {
      fn(nlohmann::json::parse(line), number);
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::kParseError, e.what(), number);
    } catch (const Error& e) {
      if (e.code() == Errc::kIoError) throw;
      throw Error(e.code(), e.detail(), number);
    }
  }
  if (in.bad()) throw Error(Errc::kIoError, "read failed for " + path.string());
}

inline std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::kIoError, "cannot write " + path.string());
  return out;
}

}  // namespace mnemo::detail

#endif  // MNEMO_SRC_JSONL_H_

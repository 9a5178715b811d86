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

#ifndef MNEMO_MEMORY_STORE_H_
#define MNEMO_MEMORY_STORE_H_

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mnemo/dialogue.h"

namespace mnemo {

// Ordered collection of dialogue histories keyed by id.
//
// On disk a store is line-delimited JSON: one Dialogue object per line, in
// insertion order. Unknown fields are rejected on load. Single writer; a
// loaded store may be shared read-only across threads.
class MemoryStore {
 public:
  MemoryStore() = default;

  // Validates and appends. Throws kDuplicateId or kInvalidDialogue.
  const std::string& add(Dialogue dialogue);

  const Dialogue* find(std::string_view id) const;
  bool contains(std::string_view id) const { return find(id) != nullptr; }
  std::size_t size() const { return dialogues_.size(); }
  bool empty() const { return dialogues_.empty(); }
  const std::vector<Dialogue>& dialogues() const { return dialogues_; }

  // Throws kIoError if the file cannot be opened, kParseError (with line
  // number) on a malformed record.
  static MemoryStore load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  friend bool operator==(const MemoryStore& a, const MemoryStore& b) {
    return a.dialogues_ == b.dialogues_;
  }

 private:
  std::vector<Dialogue> dialogues_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Bundles are stored one per line as {anchor_id, dialogues}; the anchor id
// doubles as the bundle id.
std::vector<HistoryBundle> load_bundles(const std::filesystem::path& path);
void save_bundles(const std::vector<HistoryBundle>& bundles,
                  const std::filesystem::path& path);

}  // namespace mnemo

#endif  // MNEMO_MEMORY_STORE_H_

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

#include "mnemo/memory_store.h"

#include <nlohmann/json.hpp>

#include "jsonl.h"
#include "mnemo/error.h"

namespace mnemo {

const std::string& MemoryStore::add(Dialogue dialogue) {
  validate(dialogue);
  if (index_.contains(dialogue.id)) {
    throw Error(Errc::kDuplicateId, dialogue.id);
  }
  index_.emplace(dialogue.id, dialogues_.size());
  dialogues_.push_back(std::move(dialogue));
  return dialogues_.back().id;
}

const Dialogue* MemoryStore::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  return it == index_.end() ? nullptr : &dialogues_[it->second];
}

MemoryStore MemoryStore::load(const std::filesystem::path& path) {
  MemoryStore store;
  detail::for_each_json_line(path, [&](const nlohmann::json& j, std::size_t) {
    store.add(j.get<Dialogue>());
  });
  return store;
}

void MemoryStore::save(const std::filesystem::path& path) const {
  auto out = detail::open_for_write(path);
  for (const auto& d : dialogues_) out << nlohmann::json(d).dump() << '\n';
  if (!out) throw Error(Errc::kIoError, "write failed for " + path.string());
}

std::vector<HistoryBundle> load_bundles(const std::filesystem::path& path) {
  std::vector<HistoryBundle> bundles;
  detail::for_each_json_line(path, [&](const nlohmann::json& j, std::size_t) {
    auto b = j.get<HistoryBundle>();
    validate(b);
    bundles.push_back(std::move(b));
  });
  return bundles;
}

void save_bundles(const std::vector<HistoryBundle>& bundles,
                  const std::filesystem::path& path) {
  auto out = detail::open_for_write(path);
  for (const auto& b : bundles) out << nlohmann::json(b).dump() << '\n';
  if (!out) throw Error(Errc::kIoError, "write failed for " + path.string());
}

}  // namespace mnemo

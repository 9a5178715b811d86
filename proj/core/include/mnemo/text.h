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

#ifndef MNEMO_TEXT_H_
#define MNEMO_TEXT_H_

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

// UTF-8 helpers shared by the store, summarizer and corpus statistics.
namespace mnemo::text {

// Decodes UTF-8; malformed sequences decode to U+FFFD one byte at a time.
std::u32string decode_utf8(std::string_view bytes);
std::string encode_utf8(std::u32string_view code_points);

// Number of code points.
std::size_t char_count(std::string_view bytes);

std::string_view trim(std::string_view s);
bool is_blank(std::string_view s);

// Cuts `s` to at most `cap` code points. When a cut is needed it happens at
// the last whitespace before the cap; text without such whitespace (e.g. CJK)
// is cut hard at the cap. The result is trimmed.
std::string truncate_at_word(std::string_view s, std::size_t cap);

// CJK ideographs, kana, hangul, CJK punctuation and full-width forms.
bool is_cjk(char32_t cp);

// One token per CJK code point; everything else splits on whitespace.
// "你好 world" -> {"你", "好", "world"}.
std::vector<std::string> tokenize_mixed(std::string_view s);

// True if `haystack` contains any substring of `needle_source` that is at
// least `min_chars` code points long.
bool shares_substring(std::string_view haystack, std::string_view needle_source,
                      std::size_t min_chars);

}  // namespace mnemo::text

#endif  // MNEMO_TEXT_H_

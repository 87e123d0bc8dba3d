// Copyright 2026 The Mnemos Authors.
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

#ifndef MNEMOS_TEXT_H_
#define MNEMOS_TEXT_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace mnemos {

// Corpus-wide tokenization: split on whitespace, strip leading and trailing
// ASCII punctuation, lowercase ASCII letters. Chunks that are all punctuation
// produce no token. Non-ASCII bytes pass through untouched.
std::vector<std::string> Tokenize(std::string_view text);

std::size_t TokenCount(std::string_view text);

// Cuts `text` right after its `max_tokens`-th token; the result satisfies
// TokenCount(result) <= max_tokens and keeps the original spelling.
std::string TruncateTokens(std::string_view text, std::size_t max_tokens);

std::string_view Trim(std::string_view text);

std::string Join(const std::vector<std::string>& parts, std::string_view sep);

// 64-bit FNV-1a. Stable across platforms and runs, unlike std::hash.
std::uint64_t Fnv1a64(std::string_view data,
                      std::uint64_t seed = 0xcbf29ce484222325ULL);

std::string HexDigest(std::uint64_t value);

// Encodes one Unicode code point as UTF-8.
std::string EncodeUtf8(char32_t code_point);

}  // namespace mnemos

#endif  // MNEMOS_TEXT_H_

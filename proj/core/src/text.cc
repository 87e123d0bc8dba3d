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

#include "mnemos/text.h"

#include <cctype>
#include <cstdio>

namespace mnemos {
namespace {

bool IsSpace(unsigned char c) { return c < 0x80 && std::isspace(c); }
bool IsPunct(unsigned char c) { return c < 0x80 && std::ispunct(c); }

// Calls fn(begin, end) with byte offsets of each kept token in `text`.
template <typename Fn>
void ForEachToken(std::string_view text, Fn&& fn) {
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    while (i < n && IsSpace(text[i])) ++i;
    std::size_t start = i;
    while (i < n && !IsSpace(text[i])) ++i;
    std::size_t end = i;
    while (start < end && IsPunct(text[start])) ++start;
    while (end > start && IsPunct(text[end - 1])) --end;
    if (start < end) fn(start, end, i);
  }
}

}  // namespace

std::vector<std::string> Tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  ForEachToken(text, [&](std::size_t begin, std::size_t end, std::size_t) {
    std::string token(text.substr(begin, end - begin));
    for (char& c : token) {
      if (static_cast<unsigned char>(c) < 0x80) {
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      }
    }
    tokens.push_back(std::move(token));
  });
  return tokens;
}

std::size_t TokenCount(std::string_view text) {
  std::size_t count = 0;
  ForEachToken(text, [&](std::size_t, std::size_t, std::size_t) { ++count; });
  return count;
}

std::string TruncateTokens(std::string_view text, std::size_t max_tokens) {
  std::size_t count = 0;
  std::size_t cut = text.size();
  bool done = false;
  ForEachToken(text, [&](std::size_t, std::size_t, std::size_t chunk_end) {
    if (done) return;
    if (++count == max_tokens) {
      cut = chunk_end;
      done = true;
    }
  });
  if (max_tokens == 0) cut = 0;
  if (count <= max_tokens && !done) return std::string(Trim(text));
  return std::string(Trim(text.substr(0, cut)));
}

std::string_view Trim(std::string_view text) {
  std::size_t begin = 0;
  std::size_t end = text.size();
  while (begin < end && IsSpace(text[begin])) ++begin;
  while (end > begin && IsSpace(text[end - 1])) --end;
  return text.substr(begin, end - begin);
}

std::string Join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += sep;
    out += parts[i];
  }
  return out;
}

std::uint64_t Fnv1a64(std::string_view data, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string HexDigest(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(value));
  return buf;
}

std::string EncodeUtf8(char32_t cp) {
  std::string out;
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
  return out;
}

}  // namespace mnemos

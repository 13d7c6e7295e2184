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
//
// \file
// Error types, text normalization, token-boundary search and the
// deterministic random source shared by every stage.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dialaug {

enum class ErrorKind {
  kIo,
  kParse,
  kSchema,
  kInvariant,
  kAlternation,
  kInsufficientData,
  kEmptyBank,
  kNoCompleteDialogue,
  kUncoverableLabel,
  kResidualPlaceholder,
};

std::string_view ErrorKindName(ErrorKind kind);

// All library failures surface as this exception. Corpus errors carry the
// offending dialogue id and pair index when known.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message,
        std::string dialogue_id = {},
        std::optional<std::size_t> pair_index = std::nullopt);

  ErrorKind kind() const { return kind_; }
  const std::string& dialogue_id() const { return dialogue_id_; }
  std::optional<std::size_t> pair_index() const { return pair_index_; }

 private:
  ErrorKind kind_;
  std::string dialogue_id_;
  std::optional<std::size_t> pair_index_;
};

// Lowercases ASCII, collapses whitespace runs to one space and trims.
std::string NormalizeText(std::string_view text);

// True when c is an ASCII letter or digit, or any byte of a multi-byte
// UTF-8 sequence (so accented words are not split).
inline bool IsWordChar(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') ||
         (c >= 'A' && c <= 'Z') || c >= 0x80;
}

struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;  // one past the last byte

  std::size_t size() const { return end - begin; }
  bool Overlaps(const Span& o) const { return begin < o.end && o.begin < end; }
  bool Contains(const Span& o) const {
    return begin <= o.begin && o.end <= end;
  }
  bool operator==(const Span&) const = default;
};

// All non-overlapping left-to-right occurrences of needle in text that sit
// between word boundaries.
std::vector<Span> FindTokenOccurrences(std::string_view text,
                                       std::string_view needle);

inline bool ContainsToken(std::string_view text, std::string_view needle) {
  return !FindTokenOccurrences(text, needle).empty();
}

// 64-bit FNV-1a.
std::uint64_t Fnv1a64(std::string_view bytes,
                      std::uint64_t basis = 0xcbf29ce484222325ULL);

std::uint64_t SplitMix64(std::uint64_t x);

// mt19937_64 with a portable bounded draw; std distributions are not
// specified bit-for-bit across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t Next() { return engine_(); }

  // Uniform in [0, bound). bound must be > 0.
  std::uint64_t Uniform(std::uint64_t bound);

  template <typename T>
  void Shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(Uniform(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace dialaug

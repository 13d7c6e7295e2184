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

#include "dialaug/common.hpp"


namespace dialaug {

std::string_view ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kIo: return "IoError";
    case ErrorKind::kParse: return "ParseError";
    case ErrorKind::kSchema: return "SchemaError";
    case ErrorKind::kInvariant: return "InvariantError";
    case ErrorKind::kAlternation: return "AlternationError";
    case ErrorKind::kInsufficientData: return "InsufficientData";
    case ErrorKind::kEmptyBank: return "EmptyBank";
    case ErrorKind::kNoCompleteDialogue: return "NoCompleteDialogue";
    case ErrorKind::kUncoverableLabel: return "UncoverableLabel";
    case ErrorKind::kResidualPlaceholder: return "ResidualPlaceholder";
  }
  return "Error";
}

namespace {

std::string FormatMessage(ErrorKind kind, const std::string& message,
                          const std::string& dialogue_id,
                          std::optional<std::size_t> pair_index) {
  std::string out(ErrorKindName(kind));
  out += ": ";
  out += message;
  if (!dialogue_id.empty()) {
    out += " (dialogue ";
    out += dialogue_id;
    if (pair_index) out += ", pair " + std::to_string(*pair_index);
    out += ")";
  }
  return out;
}

bool IsSpace(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

}  // namespace

Error::Error(ErrorKind kind, const std::string& message,
             std::string dialogue_id, std::optional<std::size_t> pair_index)
    : std::runtime_error(
          FormatMessage(kind, message, dialogue_id, pair_index)),
      kind_(kind),
      dialogue_id_(std::move(dialogue_id)),
      pair_index_(pair_index) {}

std::string NormalizeText(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (unsigned char c : text) {
    if (IsSpace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    if (c >= 'A' && c <= 'Z') c = static_cast<unsigned char>(c - 'A' + 'a');
    out.push_back(static_cast<char>(c));
  }
  return out;
}

std::vector<Span> FindTokenOccurrences(std::string_view text,
                                       std::string_view needle) {
  std::vector<Span> hits;
  if (needle.empty() || needle.size() > text.size()) return hits;
  const bool word_start = IsWordChar(static_cast<unsigned char>(needle.front()));
  const bool word_end = IsWordChar(static_cast<unsigned char>(needle.back()));
  std::size_t pos = text.find(needle);
  while (pos != std::string_view::npos) {
    std::size_t end = pos + needle.size();
    // A boundary is only required where the needle itself ends in a word
    // character; "cam" must not match inside "camera".
    bool left_ok = !word_start || pos == 0 ||
                   !IsWordChar(static_cast<unsigned char>(text[pos - 1]));
    bool right_ok = !word_end || end == text.size() ||
                    !IsWordChar(static_cast<unsigned char>(text[end]));
    if (left_ok && right_ok) {
      hits.push_back({pos, end});
      pos = text.find(needle, end);
    } else {
      pos = text.find(needle, pos + 1);
    }
  }
  return hits;
}

std::uint64_t Fnv1a64(std::string_view bytes, std::uint64_t basis) {
  std::uint64_t h = basis;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t Rng::Uniform(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("Rng::Uniform: zero bound");
  // Draws below 2^64 mod bound are rejected so every residue is equally
  // likely.
  const std::uint64_t threshold = (0 - bound) % bound;
  std::uint64_t draw;
  do {
    draw = engine_();
  } while (draw < threshold);
  return draw % bound;
}

}  // namespace dialaug

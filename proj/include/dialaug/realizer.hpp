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
// Surface realization: fills dialogue templates with harvested slot values
// and regenerates belief-state annotations.

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "dialaug/composer.hpp"
#include "dialaug/delex.hpp"
#include "dialaug/template_bank.hpp"

namespace dialaug {

// One value per assignable label, used for the whole dialogue.
using Assignment = std::map<SlotLabel, std::string>;

enum class RealizationMode { kExhaustive, kSampled };

RealizationMode ParseRealizationMode(std::string_view name);
std::string_view RealizationModeName(RealizationMode mode);

struct RealizationBudget {
  RealizationMode mode = RealizationMode::kExhaustive;
  std::size_t cap = 100;  // assignments per dialogue template (sampled)
  double ratio = 10.0;    // synthetic dialogues per seed dialogue
  std::uint64_t seed = 0;

  void Validate() const;
};

// Mixed-radix view of the Cartesian product over a template's assignable
// labels. The first label is the most significant digit.
class AssignmentSpace {
 public:
  // Throws Error(kUncoverableLabel) naming a label without values.
  AssignmentSpace(const DialogueTemplate& dt, const SlotValueDict& dict);

  const LabelSet& labels() const { return labels_; }
  // Product size; nullopt when it does not fit in 64 bits.
  std::optional<std::uint64_t> size() const { return size_; }

  std::vector<std::uint32_t> Digits(std::uint64_t index) const;
  std::vector<std::uint32_t> RandomDigits(Rng& rng) const;
  // Two distinct labels would receive equal value text.
  bool Collides(const std::vector<std::uint32_t>& digits) const;
  Assignment Make(const std::vector<std::uint32_t>& digits) const;

 private:
  LabelSet labels_;
  std::vector<const std::vector<std::string>*> values_;
  std::optional<std::uint64_t> size_;
};

// Exhaustive: the full collision-free product in lexicographic order.
// Sampled: min(cap, collision-free product size) distinct assignments drawn
// uniformly with budget.seed, in draw order.
std::vector<Assignment> EnumerateAssignments(const DialogueTemplate& dt,
                                             const SlotValueDict& dict,
                                             const RealizationBudget& budget);

struct SyntheticDialogue {
  Dialogue dialogue;
  std::vector<TemplateId> template_path;
  std::set<std::string> source_dialogues;
  Assignment assignment;
};

// Each pair keeps its template's label set. Non-reserved values of
// assignable labels come from the assignment, everything else keeps the
// template's original value. Throws Error(kResidualPlaceholder) if a
// placeholder in the text has no assigned value.
SyntheticDialogue Realize(const DialogueTemplate& dt, const Assignment& a,
                          const TemplateBank& bank);

// Each assignable label takes the first non-reserved value it has along
// the path; realizing a seed dialogue's own path with it reproduces the
// seed.
Assignment IdentityAssignment(const DialogueTemplate& dt,
                              const TemplateBank& bank);

// Text and annotations of every pair, without the id.
// Copies labels dropped between consecutive pairs into the later belief
// state. Returns the number of entries added.
std::size_t CarryForward(Dialogue& dialogue);

std::string ContentKey(const Dialogue& dialogue);

struct GenerateResult {
  std::vector<SyntheticDialogue> dialogues;
  std::size_t requested = 0;
  bool space_exhausted = false;
  std::size_t duplicates_dropped = 0;
  std::size_t labels_carried = 0;  // belief entries added by CarryForward
  std::vector<std::string> uncoverable;  // skipped templates, one message each
};

// Round-robin over a seeded order of dialogue templates, one assignment per
// template per round, until round(ratio * |seed|) new dialogues exist or the
// space runs out. Each dialogue goes through CarryForward before the
// duplicate check against seed and earlier output. Output is identical for
// any thread count.
GenerateResult Generate(const Corpus& seed_corpus, const TemplateBank& bank,
                        const std::vector<DialogueTemplate>& dts,
                        const SlotValueDict& dict,
                        const RealizationBudget& budget, unsigned threads = 1);

}  // namespace dialaug

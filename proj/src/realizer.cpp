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

#include "dialaug/realizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <numeric>
#include <stdexcept>
#include <thread>
#include <unordered_set>

namespace dialaug {

RealizationMode ParseRealizationMode(std::string_view name) {
  if (name == "exhaustive") return RealizationMode::kExhaustive;
  if (name == "sampled") return RealizationMode::kSampled;
  throw std::invalid_argument("unknown realization mode '" +
                              std::string(name) + "'");
}

std::string_view RealizationModeName(RealizationMode mode) {
  return mode == RealizationMode::kExhaustive ? "exhaustive" : "sampled";
}

void RealizationBudget::Validate() const {
  if (cap < 1) throw std::invalid_argument("cap must be >= 1");
  if (!(ratio > 0.0)) throw std::invalid_argument("ratio must be > 0");
}

AssignmentSpace::AssignmentSpace(const DialogueTemplate& dt,
                                 const SlotValueDict& dict)
    : labels_(dt.assignable_labels) {
  std::uint64_t size = 1;
  bool overflow = false;
  for (const auto& label : labels_) {
    const auto& values = dict.Values(label);
    if (values.empty()) {
      throw Error(ErrorKind::kUncoverableLabel,
                  "no dictionary value for '" + label.str() + "'");
    }
    values_.push_back(&values);
    if (!overflow && __builtin_mul_overflow(size, values.size(), &size)) {
      overflow = true;
    }
  }
  if (!overflow) size_ = size;
}

std::vector<std::uint32_t> AssignmentSpace::Digits(std::uint64_t index) const {
  std::vector<std::uint32_t> digits(labels_.size());
  for (std::size_t i = labels_.size(); i-- > 0;) {
    const std::uint64_t radix = values_[i]->size();
    digits[i] = static_cast<std::uint32_t>(index % radix);
    index /= radix;
  }
  return digits;
}

std::vector<std::uint32_t> AssignmentSpace::RandomDigits(Rng& rng) const {
  std::vector<std::uint32_t> digits(labels_.size());
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    digits[i] = static_cast<std::uint32_t>(rng.Uniform(values_[i]->size()));
  }
  return digits;
}

bool AssignmentSpace::Collides(const std::vector<std::uint32_t>& digits) const {
  for (std::size_t i = 0; i < digits.size(); ++i) {
    for (std::size_t j = i + 1; j < digits.size(); ++j) {
      if ((*values_[i])[digits[i]] == (*values_[j])[digits[j]]) return true;
    }
  }
  return false;
}

Assignment AssignmentSpace::Make(
    const std::vector<std::uint32_t>& digits) const {
  Assignment a;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    a.emplace(labels_[i], (*values_[i])[digits[i]]);
  }
  return a;
}

namespace {

constexpr std::uint64_t kSmallSpace = 1u << 16;

// Every collision-free digit vector, lexicographic.
std::vector<std::vector<std::uint32_t>> AllDigits(const AssignmentSpace& space,
                                                  std::uint64_t total) {
  std::vector<std::vector<std::uint32_t>> out;
  for (std::uint64_t i = 0; i < total; ++i) {
    auto digits = space.Digits(i);
    if (!space.Collides(digits)) out.push_back(std::move(digits));
  }
  return out;
}

std::vector<std::vector<std::uint32_t>> SampleDigits(
    const AssignmentSpace& space, std::size_t cap, Rng& rng) {
  const auto total = space.size();
  if (total && *total <= std::max<std::uint64_t>(4 * cap, kSmallSpace)) {
    auto all = AllDigits(space, *total);
    const std::size_t take = std::min(cap, all.size());
    for (std::size_t i = 0; i < take; ++i) {
      std::size_t j = i + static_cast<std::size_t>(rng.Uniform(all.size() - i));
      std::swap(all[i], all[j]);
    }
    all.resize(take);
    return all;
  }
  // Large space: rejection sampling over the index space.
  std::vector<std::vector<std::uint32_t>> out;
  std::set<std::vector<std::uint32_t>> seen;
  const std::size_t max_attempts = 64 * cap + 1024;
  for (std::size_t attempt = 0; attempt < max_attempts && out.size() < cap;
       ++attempt) {
    auto digits = total ? space.Digits(rng.Uniform(*total))
                        : space.RandomDigits(rng);
    if (space.Collides(digits) || !seen.insert(digits).second) continue;
    out.push_back(std::move(digits));
  }
  return out;
}

}  // namespace

std::vector<Assignment> EnumerateAssignments(const DialogueTemplate& dt,
                                             const SlotValueDict& dict,
                                             const RealizationBudget& budget) {
  budget.Validate();
  AssignmentSpace space(dt, dict);
  std::vector<Assignment> out;
  if (budget.mode == RealizationMode::kExhaustive) {
    if (!space.size()) {
      throw std::length_error("assignment space exceeds 2^64 entries");
    }
    for (const auto& digits : AllDigits(space, *space.size())) {
      out.push_back(space.Make(digits));
    }
    return out;
  }
  Rng rng(budget.seed);
  for (const auto& digits : SampleDigits(space, budget.cap, rng)) {
    out.push_back(space.Make(digits));
  }
  return out;
}

namespace {

std::string FillPlaceholders(std::string_view text,
                             const TurnPairTemplate& t, const Assignment& a) {
  std::string out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    if (text[pos] == '[') {
      const Substitution* hit = nullptr;
      for (const auto& sub : t.subs) {
        if (sub.occurrences == 0) continue;
        const std::string token = sub.label.Placeholder();
        if (text.compare(pos, token.size(), token) == 0) {
          hit = &sub;
          break;
        }
      }
      if (hit) {
        auto it = a.find(hit->label);
        if (it == a.end()) {
          throw Error(ErrorKind::kResidualPlaceholder,
                      "assignment does not cover " + hit->label.Placeholder() +
                          " in template " + std::to_string(t.id));
        }
        out += it->second;
        pos += hit->label.Placeholder().size();
        continue;
      }
    }
    out.push_back(text[pos++]);
  }
  return out;
}

std::string SyntheticId(const DialogueTemplate& dt, const Assignment& a) {
  std::string key;
  for (TemplateId id : dt.template_ids) key += std::to_string(id) + ",";
  key += "|";
  for (const auto& [label, value] : a) key += label.str() + "=" + value + ";";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "syn-%016llx",
                static_cast<unsigned long long>(Fnv1a64(key)));
  return buf;
}

}  // namespace

SyntheticDialogue Realize(const DialogueTemplate& dt, const Assignment& a,
                          const TemplateBank& bank) {
  SyntheticDialogue out;
  out.template_path = dt.template_ids;
  out.source_dialogues = dt.provenance;
  out.assignment = a;

  Dialogue& d = out.dialogue;
  d.id = SyntheticId(dt, out.assignment);
  const std::set<SlotLabel> assignable(dt.assignable_labels.begin(),
                                       dt.assignable_labels.end());
  for (std::size_t k = 0; k < dt.template_ids.size(); ++k) {
    const TurnPairTemplate& t = bank.at(dt.template_ids[k]);
    TurnPair pair;
    pair.index = k;
    pair.system_utterance = FillPlaceholders(t.delex_system, t, a);
    pair.user_utterance = FillPlaceholders(t.delex_user, t, a);
    for (const auto& [label, original] : t.cur_belief) {
      auto it = a.find(label);
      if (assignable.count(label) && it != a.end() &&
          !bank.policy().IsReserved(original)) {
        pair.belief.Insert(label, it->second);
      } else {
        pair.belief.Insert(label, original);
      }
    }
    d.pairs.push_back(std::move(pair));
  }
  d.domains = d.MentionedDomains();
  return out;
}

Assignment IdentityAssignment(const DialogueTemplate& dt,
                              const TemplateBank& bank) {
  Assignment a;
  const std::set<SlotLabel> assignable(dt.assignable_labels.begin(),
                                       dt.assignable_labels.end());
  for (TemplateId id : dt.template_ids) {
    for (const auto& [label, value] : bank.at(id).cur_belief) {
      if (assignable.count(label) && !a.count(label) &&
          !bank.policy().IsReserved(value)) {
        a.emplace(label, value);
      }
    }
  }
  return a;
}

std::size_t CarryForward(Dialogue& dialogue) {
  std::size_t carried = 0;
  for (std::size_t i = 1; i < dialogue.pairs.size(); ++i) {
    const BeliefState& prev = dialogue.pairs[i - 1].belief;
    BeliefState& cur = dialogue.pairs[i].belief;
    for (const auto& [label, value] : prev) {
      if (cur.Insert(label, value)) ++carried;
    }
  }
  return carried;
}

std::string ContentKey(const Dialogue& dialogue) {
  std::string key;
  for (const auto& pair : dialogue.pairs) {
    key += pair.system_utterance;
    key += '\x1f';
    key += pair.user_utterance;
    key += '\x1f';
    for (const auto& [label, value] : pair.belief) {
      key += label.str();
      key += '=';
      key += value;
      key += '\x1d';
    }
    key += '\x1e';
  }
  return key;
}

namespace {

// Lazily yields assignments of one dialogue template.
class AssignmentStream {
 public:
  AssignmentStream(const DialogueTemplate& dt, const SlotValueDict& dict,
                   const RealizationBudget& budget, std::uint64_t seed)
      : space_(dt, dict), rng_(seed) {
    if (budget.mode == RealizationMode::kSampled) {
      kind_ = Kind::kList;
      listed_ = SampleDigits(space_, budget.cap, rng_);
    } else if (!space_.size()) {
      kind_ = Kind::kUnbounded;
    } else {
      // Affine bijection k -> (mul * k + add) mod total visits every index
      // once in a seeded order.
      kind_ = Kind::kAffine;
      total_ = *space_.size();
      if (total_ > 1) {
        do {
          mul_ = 1 + rng_.Uniform(total_ - 1);
        } while (std::gcd(mul_, total_) != 1);
        add_ = rng_.Uniform(total_);
      }
    }
  }

  std::optional<Assignment> Next() {
    switch (kind_) {
      case Kind::kList:
        if (position_ >= listed_.size()) return std::nullopt;
        return space_.Make(listed_[position_++]);
      case Kind::kAffine:
        while (position_ < total_) {
          const unsigned __int128 idx =
              (static_cast<unsigned __int128>(mul_) * position_ + add_) %
              total_;
          ++position_;
          auto digits = space_.Digits(static_cast<std::uint64_t>(idx));
          if (!space_.Collides(digits)) return space_.Make(digits);
        }
        return std::nullopt;
      case Kind::kUnbounded:
        // Product too large to index: distinct random draws until they
        // keep failing.
        for (int attempt = 0; attempt < 4096; ++attempt) {
          auto digits = space_.RandomDigits(rng_);
          if (space_.Collides(digits) || !seen_.insert(digits).second) {
            continue;
          }
          return space_.Make(digits);
        }
        return std::nullopt;
    }
    return std::nullopt;
  }

 private:
  enum class Kind { kList, kAffine, kUnbounded };

  AssignmentSpace space_;
  Rng rng_;
  Kind kind_ = Kind::kAffine;
  std::vector<std::vector<std::uint32_t>> listed_;
  std::uint64_t total_ = 1;
  std::uint64_t mul_ = 1;
  std::uint64_t add_ = 0;
  std::uint64_t position_ = 0;
  std::set<std::vector<std::uint32_t>> seen_;
};

}  // namespace

GenerateResult Generate(const Corpus& seed_corpus, const TemplateBank& bank,
                        const std::vector<DialogueTemplate>& dts,
                        const SlotValueDict& dict,
                        const RealizationBudget& budget, unsigned threads) {
  budget.Validate();
  threads = std::max(1u, threads);
  GenerateResult result;
  result.requested = static_cast<std::size_t>(std::llround(
      budget.ratio * static_cast<double>(seed_corpus.dialogues.size())));

  std::unordered_set<std::string> seen;
  std::unordered_set<std::string> ids;
  for (const auto& d : seed_corpus.dialogues) {
    seen.insert(ContentKey(d));
    Dialogue carried = d;
    if (CarryForward(carried) > 0) seen.insert(ContentKey(carried));
    ids.insert(d.id);
  }

  std::vector<std::size_t> order(dts.size());
  std::iota(order.begin(), order.end(), 0);
  Rng order_rng(budget.seed);
  order_rng.Shuffle(order);

  struct Active {
    std::size_t dt;
    AssignmentStream stream;
  };
  std::vector<Active> active;
  for (std::size_t i : order) {
    try {
      const std::uint64_t seed =
          SplitMix64(budget.seed ^ SplitMix64(static_cast<std::uint64_t>(i)));
      active.push_back({i, AssignmentStream(dts[i], dict, budget, seed)});
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kUncoverableLabel) throw;
      result.uncoverable.push_back("dialogue template " + std::to_string(i) +
                                   ": " + e.what());
    }
  }

  struct Job {
    std::size_t dt;
    Assignment assignment;
    std::optional<SyntheticDialogue> output;
  };
  const std::size_t chunk_size = 256 * static_cast<std::size_t>(threads);

  auto realize_jobs = [&](std::vector<Job>& jobs) {
    const unsigned workers = static_cast<unsigned>(
        std::min<std::size_t>(threads, jobs.size()));
    if (workers <= 1) {
      for (auto& job : jobs) {
        job.output = Realize(dts[job.dt], job.assignment, bank);
      }
      return;
    }
    std::vector<std::exception_ptr> errors(workers);
    {
      std::vector<std::jthread> pool;
      const std::size_t per = (jobs.size() + workers - 1) / workers;
      for (unsigned w = 0; w < workers; ++w) {
        const std::size_t begin = w * per;
        const std::size_t end = std::min(jobs.size(), begin + per);
        if (begin >= end) break;
        pool.emplace_back([&, w, begin, end] {
          try {
            for (std::size_t j = begin; j < end; ++j) {
              jobs[j].output =
                  Realize(dts[jobs[j].dt], jobs[j].assignment, bank);
            }
          } catch (...) {
            errors[w] = std::current_exception();
          }
        });
      }
    }
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  };

  auto done = [&] { return result.dialogues.size() >= result.requested; };

  while (!done() && !active.empty()) {
    std::vector<Active> still_active;
    still_active.reserve(active.size());
    for (std::size_t start = 0; start < active.size() && !done();
         start += chunk_size) {
      const std::size_t stop = std::min(active.size(), start + chunk_size);
      std::vector<Job> jobs;
      for (std::size_t i = start; i < stop; ++i) {
        if (auto a = active[i].stream.Next()) {
          jobs.push_back({active[i].dt, std::move(*a), std::nullopt});
          still_active.push_back(std::move(active[i]));
        }
      }
      realize_jobs(jobs);
      for (auto& job : jobs) {
        if (done()) break;
        SyntheticDialogue& syn = *job.output;
        result.labels_carried += CarryForward(syn.dialogue);
        if (!seen.insert(ContentKey(syn.dialogue)).second) {
          ++result.duplicates_dropped;
          continue;
        }
        std::string id = syn.dialogue.id;
        for (int suffix = 2; !ids.insert(id).second; ++suffix) {
          id = syn.dialogue.id + "-" + std::to_string(suffix);
        }
        syn.dialogue.id = std::move(id);
        result.dialogues.push_back(std::move(syn));
      }
    }
    if (done()) break;
    active = std::move(still_active);
  }
  result.space_exhausted = !done();
  return result;
}

}  // namespace dialaug

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

#include "dialaug/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <sstream>

#include "json.hpp"

namespace dialaug {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

bool IsLabelToken(std::string_view token) {
  if (token.empty()) return false;
  for (unsigned char c : token) {
    if (c <= ' ' || c == '[' || c == ']') return false;
  }
  return true;
}

}  // namespace

SlotLabel::SlotLabel(std::string_view domain, std::string_view name)
    : text_(std::string(domain) + "-" + std::string(name)),
      dash_(domain.size()) {
  if (!IsLabelToken(domain) || !IsLabelToken(name) ||
      domain.find('-') != std::string_view::npos) {
    throw Error(ErrorKind::kInvariant,
                "malformed slot label '" + text_ + "'");
  }
}

SlotLabel SlotLabel::Parse(std::string_view canonical) {
  std::size_t dash = canonical.find('-');
  if (dash == std::string_view::npos) {
    throw Error(ErrorKind::kInvariant,
                "slot label '" + std::string(canonical) + "' has no '-'");
  }
  return SlotLabel(canonical.substr(0, dash), canonical.substr(dash + 1));
}

bool IsReservedValue(std::string_view value) {
  return std::find(kReservedValues.begin(), kReservedValues.end(), value) !=
         kReservedValues.end();
}

std::string LabelSetString(const LabelSet& labels) {
  std::string out = "{";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (i) out += ",";
    out += labels[i].str();
  }
  return out + "}";
}

bool BeliefState::Insert(const SlotLabel& label, std::string value) {
  return entries_.emplace(label, std::move(value)).second;
}

const std::string* BeliefState::Find(const SlotLabel& label) const {
  auto it = entries_.find(label);
  return it == entries_.end() ? nullptr : &it->second;
}

LabelSet BeliefState::Labels() const {
  LabelSet out;
  out.reserve(entries_.size());
  for (const auto& [label, value] : entries_) out.push_back(label);
  return out;
}

std::set<std::string> Dialogue::MentionedDomains() const {
  std::set<std::string> out;
  for (const auto& pair : pairs) {
    for (const auto& [label, value] : pair.belief) {
      out.emplace(label.domain());
    }
  }
  return out;
}

std::size_t Corpus::PairCount() const {
  std::size_t n = 0;
  for (const auto& d : dialogues) n += d.pairs.size();
  return n;
}

std::vector<TurnPair> PairTurns(const std::vector<RawTurn>& turns,
                                std::string_view dialogue_id) {
  std::vector<TurnPair> pairs;
  std::string pending_system;
  for (std::size_t t = 0; t < turns.size(); ++t) {
    const RawTurn& turn = turns[t];
    const std::size_t pair_index = (t + 1) / 2;
    const Speaker expected = (t % 2 == 0) ? Speaker::kUser : Speaker::kSystem;
    if (turn.speaker != expected) {
      throw Error(ErrorKind::kAlternation,
                  t == 0 ? "dialogue must open with a user turn"
                         : "two consecutive turns by the same speaker",
                  std::string(dialogue_id), pair_index);
    }
    if (turn.speaker == Speaker::kSystem) {
      pending_system = turn.text;
      continue;
    }
    if (!turn.belief) {
      throw Error(ErrorKind::kSchema, "user turn without belief annotation",
                  std::string(dialogue_id), pair_index);
    }
    TurnPair pair;
    pair.index = pairs.size();
    pair.system_utterance = std::move(pending_system);
    pending_system.clear();
    pair.user_utterance = turn.text;
    pair.belief = *turn.belief;
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

InputSchema ParseInputSchema(std::string_view name) {
  if (name == "auto") return InputSchema::kAuto;
  if (name == "native") return InputSchema::kNative;
  if (name == "multiwoz") return InputSchema::kMultiWoz;
  throw Error(ErrorKind::kSchema,
              "unknown input schema '" + std::string(name) + "'");
}

namespace {

// Tracks object keys while parsing; nlohmann/json silently keeps the last
// of several equal keys, which would hide duplicate slot labels.
class DuplicateKeyTracker {
 public:
  bool operator()(int /*depth*/, json::parse_event_t event, json& parsed) {
    switch (event) {
      case json::parse_event_t::object_start:
        OnValueStart();
        frames_.push_back({true, 0, {}});
        break;
      case json::parse_event_t::array_start:
        OnValueStart();
        frames_.push_back({false, 0, {}});
        break;
      case json::parse_event_t::object_end:
      case json::parse_event_t::array_end:
        frames_.pop_back();
        break;
      case json::parse_event_t::key:
        if (!frames_.back().keys.insert(parsed.get<std::string>()).second &&
            !duplicate_) {
          duplicate_ = parsed.get<std::string>();
          for (const auto& f : frames_) {
            if (!f.is_object) duplicate_path_.push_back(f.count - 1);
          }
        }
        break;
      case json::parse_event_t::value:
        OnValueStart();
        break;
    }
    return true;
  }

  const std::optional<std::string>& duplicate() const { return duplicate_; }
  // Element index inside each enclosing array, outermost first.
  const std::vector<std::size_t>& duplicate_path() const {
    return duplicate_path_;
  }

 private:
  struct Frame {
    bool is_object;
    std::size_t count;
    std::set<std::string> keys;
  };

  void OnValueStart() {
    if (!frames_.empty() && !frames_.back().is_object) ++frames_.back().count;
  }

  std::vector<Frame> frames_;
  std::optional<std::string> duplicate_;
  std::vector<std::size_t> duplicate_path_;
};

json ParseJson(std::string_view text, DuplicateKeyTracker& tracker) {
  try {
    return json::parse(text.begin(), text.end(), std::ref(tracker));
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::kParse, e.what());
  }
}

const json& Require(const json& obj, const char* key, std::string_view id,
                    std::optional<std::size_t> pair = std::nullopt) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw Error(ErrorKind::kSchema, std::string("missing field '") + key + "'",
                std::string(id), pair);
  }
  return *it;
}

std::string RequireString(const json& obj, const char* key,
                          std::string_view id,
                          std::optional<std::size_t> pair = std::nullopt) {
  const json& v = Require(obj, key, id, pair);
  if (!v.is_string()) {
    throw Error(ErrorKind::kSchema,
                std::string("field '") + key + "' must be a string",
                std::string(id), pair);
  }
  return v.get<std::string>();
}

SlotLabel ParseLabel(std::string_view key, std::string_view id,
                     std::size_t pair) {
  try {
    return SlotLabel::Parse(NormalizeText(key));
  } catch (const Error& e) {
    throw Error(ErrorKind::kInvariant, e.what(), std::string(id), pair);
  }
}

BeliefState ParseNativeBelief(const json& obj, std::string_view id,
                              std::size_t pair) {
  if (!obj.is_object()) {
    throw Error(ErrorKind::kSchema, "belief must be an object",
                std::string(id), pair);
  }
  BeliefState belief;
  for (const auto& [key, value] : obj.items()) {
    SlotLabel label = ParseLabel(key, id, pair);
    if (!value.is_string()) {
      throw Error(ErrorKind::kSchema,
                  "belief value for '" + label.str() + "' must be a string",
                  std::string(id), pair);
    }
    std::string text = NormalizeText(value.get<std::string>());
    if (text.empty()) {
      throw Error(ErrorKind::kInvariant,
                  "empty belief value for '" + label.str() + "'",
                  std::string(id), pair);
    }
    if (!belief.Insert(label, std::move(text))) {
      throw Error(ErrorKind::kInvariant,
                  "duplicate slot label '" + label.str() + "'",
                  std::string(id), pair);
    }
  }
  return belief;
}

void CheckDialogueInvariants(const Dialogue& d) {
  if (d.pairs.empty()) {
    throw Error(ErrorKind::kInvariant, "dialogue has no turn pairs", d.id);
  }
  for (const auto& pair : d.pairs) {
    for (const auto& [label, value] : pair.belief) {
      if (!d.domains.count(std::string(label.domain()))) {
        throw Error(ErrorKind::kInvariant,
                    "label '" + label.str() + "' outside declared domains",
                    d.id, pair.index);
      }
    }
  }
}

Dialogue ParseNativeDialogue(const json& obj, std::size_t position) {
  if (!obj.is_object()) {
    throw Error(ErrorKind::kSchema, "dialogue #" + std::to_string(position) +
                                        " is not an object");
  }
  auto id_it = obj.find("id");
  if (id_it == obj.end() || !id_it->is_string()) {
    throw Error(ErrorKind::kSchema, "dialogue #" + std::to_string(position) +
                                        " lacks a string 'id'");
  }
  Dialogue d;
  d.id = id_it->get<std::string>();
  const json& domains = Require(obj, "domains", d.id);
  if (!domains.is_array()) {
    throw Error(ErrorKind::kSchema, "'domains' must be an array", d.id);
  }
  for (const auto& dom : domains) {
    if (!dom.is_string()) {
      throw Error(ErrorKind::kSchema, "domain entries must be strings", d.id);
    }
    std::string token = NormalizeText(dom.get<std::string>());
    if (token.empty() || token.find(' ') != std::string::npos) {
      throw Error(ErrorKind::kInvariant, "malformed domain token", d.id);
    }
    d.domains.insert(std::move(token));
  }
  const json& turns = Require(obj, "turns", d.id);
  if (!turns.is_array()) {
    throw Error(ErrorKind::kSchema, "'turns' must be an array", d.id);
  }
  std::vector<RawTurn> raw;
  raw.reserve(turns.size());
  for (std::size_t t = 0; t < turns.size(); ++t) {
    const std::size_t pair = (t + 1) / 2;
    const json& turn = turns[t];
    if (!turn.is_object()) {
      throw Error(ErrorKind::kSchema, "turn is not an object", d.id, pair);
    }
    RawTurn rt;
    std::string speaker = RequireString(turn, "speaker", d.id, pair);
    if (speaker == "user") {
      rt.speaker = Speaker::kUser;
    } else if (speaker == "system") {
      rt.speaker = Speaker::kSystem;
    } else {
      throw Error(ErrorKind::kSchema, "unknown speaker '" + speaker + "'",
                  d.id, pair);
    }
    rt.text = NormalizeText(RequireString(turn, "text", d.id, pair));
    auto belief = turn.find("belief");
    if (rt.speaker == Speaker::kUser) {
      if (belief == turn.end()) {
        throw Error(ErrorKind::kSchema, "user turn lacks 'belief'", d.id,
                    pair);
      }
      rt.belief = ParseNativeBelief(*belief, d.id, pair);
    } else if (belief != turn.end()) {
      throw Error(ErrorKind::kSchema, "system turn carries 'belief'", d.id,
                  pair);
    }
    raw.push_back(std::move(rt));
  }
  d.pairs = PairTurns(raw, d.id);
  CheckDialogueInvariants(d);
  return d;
}

std::string NormalizeMultiWozValue(std::string value) {
  value = NormalizeText(value);
  if (value == "dont care" || value == "don't care" ||
      value == "do n't care" || value == "do not care" ||
      value == "dontcare") {
    return "dontcare";
  }
  return value;
}

std::string NormalizeMultiWozSlot(std::string_view section,
                                  std::string_view key) {
  std::string name = NormalizeText(key);
  if (section == "book" && name.rfind("book ", 0) == 0) name.erase(0, 5);
  name.erase(std::remove(name.begin(), name.end(), ' '), name.end());
  return name;
}

BeliefState ParseMultiWozMetadata(const json& metadata, std::string_view id,
                                  std::size_t pair) {
  BeliefState belief;
  if (!metadata.is_object()) return belief;
  for (const auto& [domain, sections] : metadata.items()) {
    if (!sections.is_object()) continue;
    std::string dom = NormalizeText(domain);
    for (const char* section : {"semi", "book"}) {
      auto sec = sections.find(section);
      if (sec == sections.end() || !sec->is_object()) continue;
      for (const auto& [key, raw] : sec->items()) {
        if (key == "booked") continue;
        std::string value;
        if (raw.is_string()) {
          value = raw.get<std::string>();
        } else if (raw.is_array() && !raw.empty() && raw[0].is_string()) {
          value = raw[0].get<std::string>();
        } else {
          continue;
        }
        value = NormalizeMultiWozValue(std::move(value));
        if (value.empty() || value == "not mentioned" || value == "none") {
          continue;
        }
        std::string name = NormalizeMultiWozSlot(section, key);
        if (name.empty()) continue;
        try {
          belief.Insert(SlotLabel(dom, name), std::move(value));
        } catch (const Error& e) {
          throw Error(ErrorKind::kInvariant, e.what(), std::string(id), pair);
        }
      }
    }
  }
  return belief;
}

// MultiWOZ 2.x data.json: {"<file>.json": {"log": [{"text", "metadata"}]}}.
// Even log entries are user turns; the metadata on the following system
// entry is the belief state after that user turn.
Dialogue ConvertMultiWozDialogue(const std::string& key, const json& obj) {
  Dialogue d;
  d.id = key;
  auto log_it = obj.find("log");
  if (log_it == obj.end() || !log_it->is_array()) {
    throw Error(ErrorKind::kSchema, "MultiWOZ dialogue lacks 'log'", d.id);
  }
  const json& log = *log_it;
  std::vector<RawTurn> raw;
  BeliefState last;
  for (std::size_t t = 0; t < log.size(); ++t) {
    const std::size_t pair = (t + 1) / 2;
    RawTurn rt;
    rt.speaker = (t % 2 == 0) ? Speaker::kUser : Speaker::kSystem;
    rt.text = NormalizeText(RequireString(log[t], "text", d.id, pair));
    if (rt.speaker == Speaker::kUser) {
      if (t + 1 < log.size()) {
        auto meta = log[t + 1].find("metadata");
        if (meta == log[t + 1].end()) {
          throw Error(ErrorKind::kSchema, "system turn lacks 'metadata'",
                      d.id, pair);
        }
        last = ParseMultiWozMetadata(*meta, d.id, pair);
      }
      rt.belief = last;
    }
    raw.push_back(std::move(rt));
  }
  d.pairs = PairTurns(raw, d.id);
  d.domains = d.MentionedDomains();
  CheckDialogueInvariants(d);
  return d;
}

void ThrowDuplicate(const DuplicateKeyTracker& tracker, const json& root,
                    InputSchema schema) {
  const auto& path = tracker.duplicate_path();
  std::string id;
  std::optional<std::size_t> pair;
  if (schema == InputSchema::kNative && !path.empty() && root.is_array() &&
      path[0] < root.size()) {
    const json& d = root[path[0]];
    if (d.is_object() && d.contains("id") && d["id"].is_string()) {
      id = d["id"].get<std::string>();
    }
    if (path.size() >= 2) pair = (path[1] + 1) / 2;
  }
  throw Error(ErrorKind::kInvariant,
              "duplicate key '" + *tracker.duplicate() + "'", id, pair);
}

}  // namespace

Corpus ParseCorpus(std::string_view json_text, InputSchema schema,
                   std::string source) {
  DuplicateKeyTracker tracker;
  json root = ParseJson(json_text, tracker);
  if (schema == InputSchema::kAuto) {
    schema = root.is_object() ? InputSchema::kMultiWoz : InputSchema::kNative;
  }
  if (tracker.duplicate()) ThrowDuplicate(tracker, root, schema);

  Corpus corpus;
  corpus.source = std::move(source);
  if (schema == InputSchema::kNative) {
    if (!root.is_array()) {
      throw Error(ErrorKind::kSchema, "native corpus must be a JSON array");
    }
    corpus.dialogues.reserve(root.size());
    for (std::size_t i = 0; i < root.size(); ++i) {
      corpus.dialogues.push_back(ParseNativeDialogue(root[i], i));
    }
  } else {
    if (!root.is_object()) {
      throw Error(ErrorKind::kSchema, "MultiWOZ data must be a JSON object");
    }
    for (const auto& [key, obj] : root.items()) {
      corpus.dialogues.push_back(ConvertMultiWozDialogue(key, obj));
    }
  }
  std::set<std::string_view> ids;
  for (const auto& d : corpus.dialogues) {
    if (!ids.insert(d.id).second) {
      throw Error(ErrorKind::kInvariant, "duplicate dialogue id", d.id);
    }
  }
  return corpus;
}

std::string ReadTextFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorKind::kIo, "cannot open '" + path.string() + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void WriteTextFile(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorKind::kIo, "cannot write '" + path.string() + "'");
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw Error(ErrorKind::kIo, "write failed for '" + path.string() + "'");
  }
}

Corpus LoadCorpus(const std::filesystem::path& path, InputSchema schema) {
  std::string text = ReadTextFile(path);
  try {
    return ParseCorpus(text, schema, path.string());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kParse) {
      throw Error(ErrorKind::kParse, path.string() + ": " + e.what());
    }
    throw;
  }
}

std::string SerializeDialogues(const std::vector<Dialogue>& dialogues) {
  ordered_json root = ordered_json::array();
  for (const auto& d : dialogues) {
    ordered_json obj;
    obj["id"] = d.id;
    obj["domains"] = ordered_json::array();
    for (const auto& dom : d.domains) obj["domains"].push_back(dom);
    ordered_json turns = ordered_json::array();
    for (const auto& pair : d.pairs) {
      if (pair.index > 0) {
        turns.push_back({{"speaker", "system"},
                         {"text", pair.system_utterance}});
      }
      ordered_json belief = ordered_json::object();
      for (const auto& [label, value] : pair.belief) belief[label.str()] = value;
      ordered_json user;
      user["speaker"] = "user";
      user["text"] = pair.user_utterance;
      user["belief"] = std::move(belief);
      turns.push_back(std::move(user));
    }
    obj["turns"] = std::move(turns);
    root.push_back(std::move(obj));
  }
  return root.dump(2, ' ', false, ordered_json::error_handler_t::replace) +
         "\n";
}

std::string SerializeCorpus(const Corpus& corpus) {
  return SerializeDialogues(corpus.dialogues);
}

std::size_t ValidationReport::ErrorCount() const {
  return static_cast<std::size_t>(
      std::count_if(violations.begin(), violations.end(), [](const auto& v) {
        return v.severity == Severity::kError;
      }));
}

std::size_t ValidationReport::WarningCount() const {
  return violations.size() - ErrorCount();
}

namespace {

// "[domain-name]" where domain is one the dialogue mentions or declares.
std::optional<std::string> FindResidualPlaceholder(
    std::string_view text, const std::set<std::string>& domains) {
  std::size_t open = text.find('[');
  while (open != std::string_view::npos) {
    std::size_t close = text.find(']', open + 1);
    if (close == std::string_view::npos) break;
    std::string_view inner = text.substr(open + 1, close - open - 1);
    std::size_t dash = inner.find('-');
    if (dash != std::string_view::npos && dash > 0 && dash + 1 < inner.size() &&
        inner.find(' ') == std::string_view::npos &&
        domains.count(std::string(inner.substr(0, dash)))) {
      return std::string(text.substr(open, close - open + 1));
    }
    open = text.find('[', open + 1);
  }
  return std::nullopt;
}

}  // namespace

ValidationReport ValidateDialogue(const Dialogue& dialogue, bool strict) {
  ValidationReport report;
  report.dialogue_id = dialogue.id;
  auto add = [&](Severity sev, std::string code, std::string message,
                 std::optional<std::size_t> pair) {
    report.violations.push_back(
        {sev, std::move(code), std::move(message), pair});
  };
  const Severity soft = strict ? Severity::kError : Severity::kWarning;

  if (dialogue.pairs.empty()) {
    add(Severity::kError, "no_pairs", "dialogue has no turn pairs",
        std::nullopt);
  }
  std::set<std::string> domains = dialogue.domains;
  for (std::size_t i = 0; i < dialogue.pairs.size(); ++i) {
    const TurnPair& pair = dialogue.pairs[i];
    if (pair.index != i) {
      add(Severity::kError, "index_gap", "pair indices not contiguous", i);
    }
    if (i == 0 && !pair.system_utterance.empty()) {
      add(Severity::kError, "system_opening",
          "first pair has a system utterance", i);
    }
    if (pair.user_utterance.empty()) {
      add(Severity::kError, "empty_user_utterance", "empty user utterance", i);
    }
    for (const auto& [label, value] : pair.belief) {
      if (!dialogue.domains.count(std::string(label.domain()))) {
        add(Severity::kError, "unknown_domain",
            "label '" + label.str() + "' outside declared domains", i);
      }
      domains.emplace(label.domain());
    }
    if (i > 0) {
      for (const auto& [label, value] : dialogue.pairs[i - 1].belief) {
        if (!pair.belief.Contains(label)) {
          add(soft, "non_cumulative",
              "label '" + label.str() + "' dropped after pair " +
                  std::to_string(i - 1),
              i);
        }
      }
    }
  }
  for (const auto& pair : dialogue.pairs) {
    for (const std::string* text :
         {&pair.system_utterance, &pair.user_utterance}) {
      if (auto token = FindResidualPlaceholder(*text, domains)) {
        add(soft, "residual_placeholder",
            "unfilled placeholder " + *token, pair.index);
      }
    }
  }
  return report;
}

Corpus SampleShots(const Corpus& corpus, std::size_t n,
                   std::string_view domain, std::uint64_t seed,
                   bool single_domain) {
  if (n == 0) {
    throw Error(ErrorKind::kInsufficientData, "shot count must be >= 1");
  }
  std::vector<const Dialogue*> eligible;
  for (const auto& d : corpus.dialogues) {
    std::set<std::string> mentioned = d.MentionedDomains();
    bool in_domain = mentioned.count(std::string(domain)) != 0;
    if (in_domain && (!single_domain || mentioned.size() == 1)) {
      eligible.push_back(&d);
    }
  }
  if (eligible.size() < n) {
    throw Error(ErrorKind::kInsufficientData,
                "requested " + std::to_string(n) + " dialogues in domain '" +
                    std::string(domain) + "' but only " +
                    std::to_string(eligible.size()) + " are eligible");
  }
  std::sort(eligible.begin(), eligible.end(),
            [](const Dialogue* a, const Dialogue* b) { return a->id < b->id; });
  Rng rng(seed);
  // Partial Fisher-Yates over the id-ordered candidates.
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t j = i + static_cast<std::size_t>(rng.Uniform(eligible.size() - i));
    std::swap(eligible[i], eligible[j]);
  }
  eligible.resize(n);
  std::sort(eligible.begin(), eligible.end(),
            [](const Dialogue* a, const Dialogue* b) { return a->id < b->id; });
  Corpus out;
  out.source = corpus.source;
  for (const Dialogue* d : eligible) out.dialogues.push_back(*d);
  return out;
}

}  // namespace dialaug

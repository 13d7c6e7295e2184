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

#include "dialaug/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <set>
#include <sstream>
#include <stdexcept>

#include "dialaug/delex.hpp"
#include "dialaug/template_bank.hpp"
#include "json.hpp"

namespace dialaug {

using nlohmann::ordered_json;

namespace {

template <typename T>
T ParseUnsigned(std::string_view key, std::string_view value) {
  T out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(),
                                   out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw std::invalid_argument("bad value '" + std::string(value) +
                                "' for " + std::string(key));
  }
  return out;
}

double ParseDouble(std::string_view key, std::string_view value) {
  try {
    std::size_t used = 0;
    double out = std::stod(std::string(value), &used);
    if (used == value.size()) return out;
  } catch (const std::exception&) {
  }
  throw std::invalid_argument("bad value '" + std::string(value) + "' for " +
                              std::string(key));
}

bool ParseBool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") {
    return true;
  }
  if (value == "false" || value == "0" || value == "no" || value == "off") {
    return false;
  }
  throw std::invalid_argument("bad boolean '" + std::string(value) +
                              "' for " + std::string(key));
}

std::vector<std::string> SplitList(std::string_view value) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= value.size()) {
    std::size_t comma = value.find(',', start);
    if (comma == std::string_view::npos) comma = value.size();
    std::string item = NormalizeText(value.substr(start, comma - start));
    if (!item.empty()) out.push_back(std::move(item));
    start = comma + 1;
  }
  return out;
}

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' ||
                        s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

}  // namespace

void RunConfig::Set(std::string_view raw_key, std::string_view value) {
  std::string key(raw_key);
  while (!key.empty() && key.front() == '-') key.erase(0, 1);
  std::replace(key.begin(), key.end(), '_', '-');
  if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
    value = value.substr(1, value.size() - 2);
  }

  if (key == "input") {
    input = value;
  } else if (key == "output") {
    output = value;
  } else if (key == "format") {
    ParseInputSchema(value);
    input_format = value;
  } else if (key == "domain") {
    domain = NormalizeText(value);
  } else if (key == "shots") {
    shots = ParseUnsigned<std::size_t>(key, value);
  } else if (key == "seed") {
    seed = ParseUnsigned<std::uint64_t>(key, value);
  } else if (key == "ratio") {
    ratio = ParseDouble(key, value);
  } else if (key == "link-semantics") {
    link_semantics = ParseLinkSemantics(value);
  } else if (key == "max-depth") {
    limits.max_depth = ParseUnsigned<std::size_t>(key, value);
  } else if (key == "max-nodes") {
    limits.max_nodes = ParseUnsigned<std::size_t>(key, value);
  } else if (key == "reuse") {
    limits.reuse = ParseUnsigned<std::size_t>(key, value);
  } else if (key == "categorical") {
    categorical = SplitList(value);
  } else if (key == "tau") {
    tau = ParseDouble(key, value);
  } else if (key == "mode") {
    mode = ParseRealizationMode(value);
  } else if (key == "cap") {
    cap = ParseUnsigned<std::size_t>(key, value);
  } else if (key == "include-seed") {
    include_seed = ParseBool(key, value);
  } else if (key == "strict") {
    strict = ParseBool(key, value);
  } else if (key == "single-domain") {
    single_domain = ParseBool(key, value);
  } else if (key == "threads") {
    threads = ParseUnsigned<unsigned>(key, value);
  } else if (key == "provenance") {
    provenance = value;
  } else if (key == "bank-dump") {
    bank_dump = value;
  } else if (key == "tree-dump") {
    tree_dump = value;
  } else if (key == "json") {
    json = ParseBool(key, value);
  } else {
    throw std::invalid_argument("unknown config key '" + std::string(raw_key) +
                                "'");
  }
}

std::string RunConfig::ToJson() const {
  ordered_json j;
  j["input"] = input;
  j["output"] = output;
  j["format"] = input_format;
  j["domain"] = domain;
  j["shots"] = shots;
  j["seed"] = seed;
  j["ratio"] = ratio;
  j["link-semantics"] = LinkSemanticsName(link_semantics);
  j["max-depth"] = limits.max_depth;
  j["max-nodes"] = limits.max_nodes;
  j["reuse"] = limits.reuse;
  j["categorical"] = categorical;
  j["tau"] = tau;
  j["mode"] = RealizationModeName(mode);
  j["cap"] = cap;
  j["include-seed"] = include_seed;
  j["strict"] = strict;
  j["single-domain"] = single_domain;
  return j.dump();
}

std::vector<std::pair<std::string, std::string>> ReadConfigFile(
    const std::filesystem::path& path) {
  std::vector<std::pair<std::string, std::string>> out;
  std::istringstream in(ReadTextFile(path));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (auto hash = view.find('#'); hash != std::string_view::npos) {
      view = view.substr(0, hash);
    }
    view = Trim(view);
    if (view.empty() || view.front() == '[') continue;
    std::size_t eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorKind::kSchema, path.string() + ":" +
                                          std::to_string(line_no) +
                                          ": expected key = value");
    }
    out.emplace_back(std::string(Trim(view.substr(0, eq))),
                     std::string(Trim(view.substr(eq + 1))));
  }
  return out;
}

namespace {

int ExitCodeFor(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::kInsufficientData:
    case ErrorKind::kEmptyBank:
    case ErrorKind::kNoCompleteDialogue:
      return kExitInfeasible;
    default:
      return kExitIo;
  }
}

std::string YesNo(bool b) { return b ? "yes" : "no"; }

ordered_json ProvenanceJson(const RunConfig& config,
                            const std::vector<SyntheticDialogue>& dialogues) {
  ordered_json root;
  root["config"] = ordered_json::parse(config.ToJson());
  ordered_json entries = ordered_json::object();
  for (const auto& syn : dialogues) {
    ordered_json entry;
    entry["template_path"] = syn.template_path;
    entry["source_dialogues"] = ordered_json::array();
    for (const auto& id : syn.source_dialogues) {
      entry["source_dialogues"].push_back(id);
    }
    entry["assignment"] = ordered_json::object();
    for (const auto& [label, value] : syn.assignment) {
      entry["assignment"][label.str()] = value;
    }
    entries[syn.dialogue.id] = std::move(entry);
  }
  root["dialogues"] = std::move(entries);
  return root;
}

}  // namespace

int RunIngest(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    if (config.output.empty()) {
      throw Error(ErrorKind::kIo, "ingest needs --output");
    }
    Corpus corpus =
        LoadCorpus(config.input, ParseInputSchema(config.input_format));
    WriteTextFile(config.output, SerializeCorpus(corpus));
    std::map<std::string, std::pair<std::size_t, std::size_t>> per_domain;
    for (const auto& d : corpus.dialogues) {
      for (const auto& dom : d.MentionedDomains()) {
        per_domain[dom].first += 1;
        per_domain[dom].second += d.pairs.size();
      }
    }
    for (const auto& [dom, counts] : per_domain) {
      out << dom << ": " << counts.first << " dialogues, " << counts.second
          << " pairs\n";
    }
    out << "total: " << corpus.dialogues.size() << " dialogues, "
        << corpus.PairCount() << " pairs -> " << config.output << "\n";
    return kExitOk;
  } catch (const Error& e) {
    err << "error [ingest]: " << e.what() << "\n";
    return kExitIo;
  }
}

int RunAugment(const RunConfig& config, std::ostream& out, std::ostream& err,
               AugmentSummary* summary_out) {
  AugmentSummary summary;
  std::string stage = "load";
  try {
    if (config.output.empty()) {
      throw Error(ErrorKind::kIo, "augment needs --output");
    }
    config.limits.Validate();
    RealizationBudget budget{config.mode, config.cap, config.ratio,
                             config.seed};
    budget.Validate();
    Corpus corpus =
        LoadCorpus(config.input, ParseInputSchema(config.input_format));

    stage = "validate";
    std::size_t excluded = 0;
    std::erase_if(corpus.dialogues, [&](const Dialogue& d) {
      bool bad = !ValidateDialogue(d, config.strict).ok();
      excluded += bad;
      return bad;
    });
    if (excluded > 0) {
      err << "warning [validate]: excluded " << excluded
          << " dialogue(s) failing " << (config.strict ? "strict " : "")
          << "validation\n";
    }

    stage = "sample";
    Corpus seed = SampleShots(corpus, config.shots, config.domain, config.seed,
                              config.single_domain);
    summary.seed_dialogues = seed.dialogues.size();
    out << "[sample] " << seed.dialogues.size() << " of "
        << corpus.dialogues.size() << " dialogues (domain=" << config.domain
        << ", seed=" << config.seed << ")\n";

    stage = "dictionary";
    ClassifyConfig classify;
    classify.tau = config.tau;
    for (const auto& label : config.categorical) {
      classify.overrides.insert(SlotLabel::Parse(label));
    }
    CategoricalPolicy policy = ClassifySlots(seed, classify);
    SlotValueDict dict = HarvestValues(seed, policy);
    summary.categorical_labels = policy.labels.size();
    summary.dictionary_labels = dict.size();
    out << "[dictionary] labels=" << dict.size()
        << " categorical=" << policy.labels.size() << "\n";

    stage = "bank";
    TemplateBank bank = TemplateBank::Build(seed, policy);
    summary.templates_built = bank.size();
    summary.templates_rejected = bank.rejections().size();
    summary.total_pairs = bank.total_pairs();
    out << "[bank] templates=" << bank.size()
        << " rejected=" << bank.rejections().size()
        << " pairs=" << bank.total_pairs() << " roots=" << bank.roots().size()
        << " terminals=" << bank.terminals().size() << "\n";
    if (!config.bank_dump.empty()) {
      WriteTextFile(config.bank_dump, bank.DumpJson());
    }

    stage = "tree";
    TemplateTree tree =
        GrowTree(bank, config.limits, config.link_semantics, config.threads);
    summary.tree_nodes = tree.size();
    summary.tree_truncated = tree.truncated;
    out << "[tree] nodes=" << tree.size() << " depth=" << tree.MaxDepth()
        << " truncated=" << YesNo(tree.truncated) << "\n";
    if (tree.truncated) {
      err << "warning [tree]: BudgetExceeded: " << tree.truncation_reason
          << "\n";
    }
    if (!config.tree_dump.empty()) {
      WriteTextFile(config.tree_dump, tree.DumpJsonLines());
    }

    stage = "compose";
    auto dts = ExtractDialogueTemplates(tree, bank);
    summary.dialogue_templates = dts.size();
    out << "[compose] dialogue_templates=" << dts.size() << "\n";

    stage = "realize";
    GenerateResult gen = Generate(seed, bank, dts, dict, budget, config.threads);
    summary.requested = gen.requested;
    summary.emitted = gen.dialogues.size();
    summary.space_exhausted = gen.space_exhausted;
    out << "[realize] requested=" << gen.requested
        << " emitted=" << gen.dialogues.size()
        << " duplicates_dropped=" << gen.duplicates_dropped
        << " labels_carried=" << gen.labels_carried << "\n";
    for (const auto& msg : gen.uncoverable) {
      err << "warning [realize]: skipped " << msg << "\n";
    }
    if (gen.space_exhausted) {
      err << "warning [realize]: SpaceExhausted: only "
          << gen.dialogues.size() << " distinct dialogues exist, "
          << gen.requested << " requested\n";
    }

    stage = "output";
    std::vector<Dialogue> dialogues;
    if (config.include_seed) {
      dialogues = seed.dialogues;
    }
    for (const auto& syn : gen.dialogues) dialogues.push_back(syn.dialogue);
    WriteTextFile(config.output, SerializeDialogues(dialogues));
    if (!config.provenance.empty()) {
      WriteTextFile(config.provenance,
                    ProvenanceJson(config, gen.dialogues).dump(2) + "\n");
    }
    out << "[output] " << dialogues.size() << " dialogues -> "
        << config.output << "\n";
    if (summary_out) *summary_out = summary;
    return kExitOk;
  } catch (const Error& e) {
    err << "error [" << stage << "]: " << e.what() << "\n";
    if (summary_out) *summary_out = summary;
    return ExitCodeFor(e);
  } catch (const std::invalid_argument& e) {
    err << "error [" << stage << "]: " << e.what() << "\n";
    if (summary_out) *summary_out = summary;
    return kExitIo;
  }
}

CorpusStats ComputeStats(const Corpus& corpus) {
  CorpusStats stats;
  stats.dialogues = corpus.dialogues.size();
  stats.pairs = corpus.PairCount();
  struct Acc {
    std::size_t dialogues = 0;
    std::size_t pairs = 0;
    std::map<SlotLabel, std::set<std::string>> values;
  };
  std::map<std::string, Acc> acc;
  for (const auto& d : corpus.dialogues) {
    std::set<SlotLabel> mentioned;
    for (const auto& pair : d.pairs) {
      for (const auto& [label, value] : pair.belief) {
        mentioned.insert(label);
        acc[std::string(label.domain())].values[label].insert(value);
      }
    }
    for (const auto& dom : d.MentionedDomains()) {
      acc[dom].dialogues += 1;
      acc[dom].pairs += d.pairs.size();
    }
    for (const auto& label : mentioned) stats.slot_fills[label] += 1;
  }
  for (const auto& [dom, a] : acc) {
    DomainStats row;
    row.domain = dom;
    row.dialogues = a.dialogues;
    if (a.dialogues) {
      row.turns_per_dialogue =
          2.0 * static_cast<double>(a.pairs) / static_cast<double>(a.dialogues);
    }
    std::size_t values = 0;
    for (const auto& [label, set] : a.values) {
      row.slots.push_back(label);
      values += set.size();
    }
    if (!a.values.empty()) {
      row.values_per_slot =
          static_cast<double>(values) / static_cast<double>(a.values.size());
    }
    stats.domains.push_back(std::move(row));
  }
  return stats;
}

std::string FormatStats(const CorpusStats& stats, bool with_fills) {
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-12s %10s %15s %12s  %s\n", "domain",
                "dialogues", "turns/dialogue", "values/slot", "slots");
  out += buf;
  for (const auto& row : stats.domains) {
    std::string slots;
    for (const auto& l : row.slots) {
      if (!slots.empty()) slots += ",";
      slots += l.name();
    }
    std::snprintf(buf, sizeof(buf), "%-12s %10zu %15.2f %12.2f  ",
                  row.domain.c_str(), row.dialogues, row.turns_per_dialogue,
                  row.values_per_slot);
    out += buf;
    out += slots + "\n";
  }
  std::snprintf(buf, sizeof(buf), "total: %zu dialogues, %zu pairs\n",
                stats.dialogues, stats.pairs);
  out += buf;
  if (with_fills && !stats.slot_fills.empty()) {
    out += "slot fills (dialogues mentioning each slot):\n";
    for (const auto& [label, n] : stats.slot_fills) {
      std::snprintf(buf, sizeof(buf), "  %-32s %zu\n", label.str().c_str(), n);
      out += buf;
    }
  }
  return out;
}

std::string StatsJson(const CorpusStats& stats) {
  ordered_json j;
  j["dialogues"] = stats.dialogues;
  j["pairs"] = stats.pairs;
  j["domains"] = ordered_json::array();
  for (const auto& row : stats.domains) {
    ordered_json r;
    r["domain"] = row.domain;
    r["dialogues"] = row.dialogues;
    r["turns_per_dialogue"] = row.turns_per_dialogue;
    r["values_per_slot"] = row.values_per_slot;
    r["slots"] = ordered_json::array();
    for (const auto& l : row.slots) r["slots"].push_back(l.str());
    j["domains"].push_back(std::move(r));
  }
  j["slot_fills"] = ordered_json::object();
  for (const auto& [label, n] : stats.slot_fills) j["slot_fills"][label.str()] = n;
  return j.dump(2) + "\n";
}

int RunStats(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    Corpus corpus =
        LoadCorpus(config.input, ParseInputSchema(config.input_format));
    CorpusStats stats = ComputeStats(corpus);
    if (config.json) {
      out << StatsJson(stats);
    } else {
      bool synthetic = std::any_of(
          corpus.dialogues.begin(), corpus.dialogues.end(),
          [](const Dialogue& d) { return d.id.rfind("syn-", 0) == 0; });
      out << FormatStats(stats, synthetic);
    }
    return kExitOk;
  } catch (const Error& e) {
    err << "error [stats]: " << e.what() << "\n";
    return kExitIo;
  }
}

int RunValidate(const RunConfig& config, std::ostream& out, std::ostream& err) {
  Corpus corpus;
  try {
    corpus = LoadCorpus(config.input, ParseInputSchema(config.input_format));
  } catch (const Error& e) {
    err << "error [validate]: " << e.what() << "\n";
    return kExitIo;
  }
  std::size_t errors = 0;
  std::size_t warnings = 0;
  ordered_json violations = ordered_json::array();
  for (const auto& d : corpus.dialogues) {
    ValidationReport report = ValidateDialogue(d, config.strict);
    errors += report.ErrorCount();
    warnings += report.WarningCount();
    for (const auto& v : report.violations) {
      const char* sev = v.severity == Severity::kError ? "error" : "warning";
      if (config.json) {
        ordered_json item;
        item["dialogue"] = d.id;
        item["pair"] = v.pair_index ? ordered_json(*v.pair_index)
                                    : ordered_json(nullptr);
        item["severity"] = sev;
        item["code"] = v.code;
        item["message"] = v.message;
        violations.push_back(std::move(item));
      } else {
        out << d.id;
        if (v.pair_index) out << " pair " << *v.pair_index;
        out << ": " << sev << " " << v.code << ": " << v.message << "\n";
      }
    }
  }
  if (config.json) {
    ordered_json j;
    j["dialogues"] = corpus.dialogues.size();
    j["strict"] = config.strict;
    j["errors"] = errors;
    j["warnings"] = warnings;
    j["violations"] = std::move(violations);
    out << j.dump(2) << "\n";
  } else {
    out << "validated " << corpus.dialogues.size() << " dialogues: " << errors
        << " errors, " << warnings << " warnings\n";
  }
  return errors == 0 ? kExitOk : kExitValidation;
}

}  // namespace dialaug

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

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

#include "corpus_gen.hpp"
#include "dialaug/composer.hpp"
#include "doctest.h"
#include "json.hpp"
#include "oracle.hpp"

using namespace dialaug;

namespace {

const std::string kFixtures = DIALAUG_FIXTURES;

TemplateBank BankOf(const Corpus& c) {
  return TemplateBank::Build(c, ClassifySlots(c, {}));
}

oracle::Labels CategoricalNames(const TemplateBank& bank) {
  oracle::Labels out;
  for (const auto& l : bank.policy().labels) out.insert(l.str());
  return out;
}

std::vector<std::vector<TemplateId>> Paths(
    const std::vector<DialogueTemplate>& dts) {
  std::vector<std::vector<TemplateId>> out;
  for (const auto& dt : dts) out.push_back(dt.template_ids);
  return out;
}

bool SameTree(const TemplateTree& a, const TemplateTree& b) {
  if (a.size() != b.size() || a.truncated != b.truncated) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.nodes[i].template_id != b.nodes[i].template_id ||
        a.nodes[i].parent != b.nodes[i].parent ||
        a.nodes[i].depth != b.nodes[i].depth) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("growth limits validation") {
  GrowthLimits ok;
  CHECK_NOTHROW(ok.Validate());
  GrowthLimits zero;
  zero.max_depth = 0;
  CHECK_THROWS_AS(zero.Validate(), std::invalid_argument);
  zero = {};
  zero.reuse = 0;
  CHECK_THROWS_AS(zero.Validate(), std::invalid_argument);
}

TEST_CASE("toy corpus tree") {
  Corpus t2 = LoadCorpus(kFixtures + "/t2.json");
  TemplateBank bank = BankOf(t2);

  SUBCASE("full growth") {
    TemplateTree tree = GrowTree(bank, {});
    CHECK(tree.size() == 14);
    CHECK_FALSE(tree.truncated);
    CHECK(tree.MaxDepth() == 3);
    auto dts = ExtractDialogueTemplates(tree, bank);
    REQUIRE(dts.size() == 8);
    CHECK(dts[0].template_ids == std::vector<TemplateId>{0, 1, 2});
    CHECK(dts[7].template_ids == std::vector<TemplateId>{3, 4, 5});
    CHECK(dts[1].template_ids == std::vector<TemplateId>{0, 1, 5});
    CHECK(dts[1].provenance == std::set<std::string>{"D1", "D2"});
    CHECK(dts[0].provenance == std::set<std::string>{"D1"});
    CHECK(dts[0].slot_labels.size() == 2);
    CHECK(dts[0].assignable_labels == dts[0].slot_labels);
  }
  SUBCASE("depth limit") {
    GrowthLimits limits;
    limits.max_depth = 2;
    TemplateTree tree = GrowTree(bank, limits);
    CHECK(tree.size() == 6);
    CHECK(tree.truncated);
    try {
      ExtractDialogueTemplates(tree, bank);
      FAIL("expected NoCompleteDialogue");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kNoCompleteDialogue);
    }
  }
  SUBCASE("node budget keeps a deterministic prefix") {
    GrowthLimits limits;
    limits.max_nodes = 9;
    TemplateTree tree = GrowTree(bank, limits);
    CHECK(tree.size() == 9);
    CHECK(tree.truncated);
    CHECK(tree.truncation_reason.find("budget") != std::string::npos);
    TemplateTree full = GrowTree(bank, {});
    for (std::size_t i = 0; i < tree.size(); ++i) {
      CHECK(tree.nodes[i].template_id == full.nodes[i].template_id);
      CHECK(tree.nodes[i].parent == full.nodes[i].parent);
    }
  }
  SUBCASE("tree dump") {
    TemplateTree tree = GrowTree(bank, {});
    std::string dump = tree.DumpJsonLines();
    CHECK(std::count(dump.begin(), dump.end(), '\n') == 14);
    auto first = nlohmann::json::parse(dump.substr(0, dump.find('\n')));
    CHECK(first["parent_id"].is_null());
    CHECK(first["depth"] == 1);
  }
}

TEST_CASE("reuse bound holds on every path") {
  Corpus mini = LoadCorpus(kFixtures + "/train_mini.json");
  TemplateBank bank = BankOf(mini);
  for (std::size_t reuse : {1u, 2u}) {
    GrowthLimits limits;
    limits.reuse = reuse;
    limits.max_depth = 6;
    TemplateTree tree = GrowTree(bank, limits);
    for (const auto& node : tree.nodes) {
      auto path = tree.PathTo(node.id);
      CHECK(path.size() == node.depth);
      std::map<TemplateId, std::size_t> uses;
      for (TemplateId id : path) CHECK(++uses[id] <= reuse);
      for (std::size_t i = 1; i < path.size(); ++i) {
        CHECK(CheckLink(bank.at(path[i - 1]), bank.at(path[i]),
                        LinkSemantics::kEquality));
      }
      CHECK(bank.at(path.front()).IsRoot());
    }
  }
}

TEST_CASE("thread count does not change the tree") {
  Corpus mini = LoadCorpus(kFixtures + "/train_mini.json");
  TemplateBank bank = BankOf(mini);
  GrowthLimits limits;
  limits.reuse = 2;
  TemplateTree one = GrowTree(bank, limits, LinkSemantics::kEquality, 1);
  for (unsigned threads : {2u, 3u, 8u}) {
    CHECK(SameTree(one, GrowTree(bank, limits, LinkSemantics::kEquality, threads)));
  }
  limits.max_nodes = 37;
  TemplateTree cut = GrowTree(bank, limits, LinkSemantics::kEquality, 1);
  CHECK(SameTree(cut, GrowTree(bank, limits, LinkSemantics::kEquality, 4)));
}

TEST_CASE("superset growth includes every equality path") {
  Corpus mini = LoadCorpus(kFixtures + "/train_mini.json");
  TemplateBank bank = BankOf(mini);
  auto eq = Paths(ExtractDialogueTemplates(GrowTree(bank, {}), bank));
  auto sup = Paths(ExtractDialogueTemplates(
      GrowTree(bank, {}, LinkSemantics::kSuperset), bank));
  CHECK(sup.size() >= eq.size());
  CHECK(std::includes(sup.begin(), sup.end(), eq.begin(), eq.end()));
}

TEST_CASE("tree matches brute-force enumeration on random banks") {
  gen::Options opt;
  opt.dialogues = 3;
  opt.max_pairs = 4;
  int compared = 0;
  for (std::uint64_t seed = 0; seed < 150; ++seed) {
    std::string text = gen::RandomCorpus(seed, opt);
    Corpus c = ParseCorpus(text, InputSchema::kNative, "gen");
    std::optional<TemplateBank> built;
    try {
      built = BankOf(c);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kEmptyBank);
      continue;
    }
    const TemplateBank& bank = *built;
    REQUIRE(bank.size() <= 12);

    auto ts = oracle::Templates(oracle::ParseFixture(text), CategoricalNames(bank));
    REQUIRE(ts.size() == bank.size());
    for (std::size_t depth : {2u, 3u, 8u}) {
      for (std::size_t reuse : {1u, 2u}) {
        GrowthLimits limits;
        limits.max_depth = depth;
        limits.reuse = reuse;
        TemplateTree tree = GrowTree(bank, limits);
        oracle::Enumeration e = oracle::Enumerate(ts, depth, reuse);
        CHECK(tree.size() == e.nodes);
        CHECK(tree.truncated == e.depth_cut);
        std::vector<std::vector<TemplateId>> expected;
        for (const auto& p : e.complete) {
          expected.emplace_back(p.begin(), p.end());
        }
        if (expected.empty()) {
          CHECK_THROWS_AS(ExtractDialogueTemplates(tree, bank), Error);
        } else {
          CHECK(Paths(ExtractDialogueTemplates(tree, bank)) == expected);
        }
        ++compared;
      }
    }
  }
  CHECK(compared > 300);
}

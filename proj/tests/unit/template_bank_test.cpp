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
#include <set>
#include <stdexcept>

#include "dialaug/template_bank.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace dialaug;

namespace {

const std::string kFixtures = DIALAUG_FIXTURES;

SlotLabel L(const char* s) { return SlotLabel::Parse(s); }

const LabelSet kDest = {L("train-destination")};
const LabelSet kDayDest = {L("train-day"), L("train-destination")};

}  // namespace

TEST_CASE("templates of one dialogue carry neighbour label sets") {
  Corpus t2 = LoadCorpus(kFixtures + "/t2.json");
  DialogueTemplates made = MakeTemplates(t2.dialogues[0], CategoricalPolicy{});
  REQUIRE(made.templates.size() == 3);
  CHECK(made.rejections.empty());
  const auto& p0 = made.templates[0];
  const auto& p1 = made.templates[1];
  const auto& p2 = made.templates[2];
  CHECK(p0.function == FunctionKey{std::nullopt, kDest, kDayDest});
  CHECK(p1.function == FunctionKey{kDest, kDayDest, kDayDest});
  CHECK(p2.function == FunctionKey{kDayDest, kDayDest, std::nullopt});
  CHECK(p0.IsRoot());
  CHECK_FALSE(p0.IsTerminal());
  CHECK(p2.IsTerminal());
  CHECK(p0.delex_user == "i need a train to [train-destination]");
  CHECK(p1.delex_user == "[train-day] please");
  CHECK(p1.delex_system == "what day will you travel ?");
  CHECK(p2.delex_user == "no thanks , bye");
  CHECK(p1.prev_belief == t2.dialogues[0].pairs[0].belief);
  CHECK(p1.next_belief == t2.dialogues[0].pairs[2].belief);
  CHECK(p1.source.dialogue_id == "D1");
  CHECK(p1.source.pair_index == 1);
}

TEST_CASE("a single-pair dialogue is both root and terminal") {
  Dialogue d;
  d.id = "solo";
  d.domains = {"train"};
  TurnPair p;
  p.user_utterance = "a train to ely";
  p.belief.Insert(L("train-destination"), "ely");
  d.pairs.push_back(p);
  DialogueTemplates made = MakeTemplates(d, {});
  REQUIRE(made.templates.size() == 1);
  CHECK(made.templates[0].IsRoot());
  CHECK(made.templates[0].IsTerminal());
}

TEST_CASE("rejected pairs leave neighbours with original context") {
  Corpus mini = LoadCorpus(kFixtures + "/train_mini.json");
  const Dialogue* collided = nullptr;
  for (const auto& d : mini.dialogues) {
    if (d.id == "mw-007") collided = &d;
  }
  REQUIRE(collided);
  DialogueTemplates made = MakeTemplates(*collided, ClassifySlots(mini, {}));
  CHECK(made.rejections.size() == 2);
  for (const auto& r : made.rejections) {
    CHECK(r.rejection.reason == RejectionReason::kValueCollision);
  }
  REQUIRE(made.templates.size() == collided->pairs.size() - 2);
  const auto& first = made.templates.front();
  CHECK(first.source.pair_index == 0);
  CHECK(first.function.next == collided->pairs[1].belief.Labels());
}

TEST_CASE("bank over the toy corpus") {
  Corpus t2 = LoadCorpus(kFixtures + "/t2.json");
  TemplateBank bank = TemplateBank::Build(t2, ClassifySlots(t2, {}));
  CHECK(bank.size() == 6);
  CHECK(bank.roots() == std::vector<TemplateId>{0, 3});
  CHECK(bank.terminals() == std::vector<TemplateId>{2, 5});
  CHECK(bank.total_pairs() == 6);
  CHECK(bank.rejections().empty());

  CHECK(bank.Successors(bank.at(0)) == std::vector<TemplateId>{1, 4});
  CHECK(bank.Successors(bank.at(4)) == std::vector<TemplateId>{2, 5});
  CHECK(bank.Successors(bank.at(2)).empty());
  CHECK(bank.ByPrev(std::nullopt) == std::vector<TemplateId>{0, 3});
  CHECK(bank.ByPrev(kDest) == std::vector<TemplateId>{1, 4});
  CHECK(bank.ByPrev(LabelSet{L("hotel-area")}).empty());
}

TEST_CASE("bank index invariants") {
  Corpus mini = LoadCorpus(kFixtures + "/train_mini.json");
  TemplateBank bank = TemplateBank::Build(mini, ClassifySlots(mini, {}));
  std::size_t indexed = 0;
  for (const auto& [key, ids] : bank.by_prev()) {
    for (TemplateId id : ids) {
      CHECK(bank.at(id).function.prev == key);
      ++indexed;
    }
  }
  CHECK(indexed == bank.size());
  for (const auto& t : bank.templates()) {
    CHECK(bank.at(t.id).id == t.id);
    for (TemplateId s : bank.Successors(t)) {
      CHECK(CheckLink(t, bank.at(s), LinkSemantics::kEquality));
    }
    for (const auto& u : bank.templates()) {
      if (t.IsTerminal()) break;
      bool listed = false;
      for (TemplateId s : bank.Successors(t)) listed = listed || s == u.id;
      CHECK(listed == CheckLink(t, u, LinkSemantics::kEquality));
    }
  }
  CHECK(bank.size() + bank.rejections().size() == bank.total_pairs());
}

TEST_CASE("all pairs rejected gives an empty bank") {
  const char* text = R"([{"id":"x","domains":["train"],"turns":[
    {"speaker":"user","text":"london to london","belief":{"train-departure":"london","train-destination":"london"}}]}])";
  Corpus c = ParseCorpus(text, InputSchema::kNative, "x");
  try {
    TemplateBank::Build(c, {});
    FAIL("expected EmptyBank");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kEmptyBank);
  }
}

TEST_CASE("link checks") {
  Corpus t2 = LoadCorpus(kFixtures + "/t2.json");
  TemplateBank bank = TemplateBank::Build(t2, {});
  CHECK(CheckLink(bank.at(0), bank.at(4), LinkSemantics::kEquality));
  CHECK_FALSE(CheckLink(bank.at(0), bank.at(2), LinkSemantics::kEquality));
  CHECK_FALSE(CheckLink(bank.at(0), bank.at(3), LinkSemantics::kEquality));
  CHECK_THROWS_AS(CheckLink(bank.at(2), bank.at(5), LinkSemantics::kEquality),
                  std::logic_error);

  TurnPairTemplate a;
  a.function = {std::nullopt, kDest, kDayDest};
  TurnPairTemplate wider;
  wider.function = {LabelSet{L("hotel-area"), L("train-destination")},
                    {L("hotel-area"), L("train-day"), L("train-destination")},
                    std::nullopt};
  CHECK_FALSE(CheckLink(a, wider, LinkSemantics::kEquality));
  CHECK(CheckLink(a, wider, LinkSemantics::kSuperset));
  CHECK_FALSE(CheckLink(a, a, LinkSemantics::kSuperset));

  CHECK(ParseLinkSemantics("superset") == LinkSemantics::kSuperset);
  CHECK(LinkSemanticsName(LinkSemantics::kEquality) == "equality");
  CHECK_THROWS_AS(ParseLinkSemantics("fuzzy"), std::invalid_argument);
}

TEST_CASE("superset successors contain equality successors") {
  Corpus mini = LoadCorpus(kFixtures + "/train_mini.json");
  TemplateBank bank = TemplateBank::Build(mini, ClassifySlots(mini, {}));
  for (const auto& t : bank.templates()) {
    auto eq = bank.Successors(t, LinkSemantics::kEquality);
    auto sup = bank.Successors(t, LinkSemantics::kSuperset);
    CHECK(std::includes(sup.begin(), sup.end(), eq.begin(), eq.end()));
  }
}

TEST_CASE("bank dump") {
  Corpus t2 = LoadCorpus(kFixtures + "/t2.json");
  TemplateBank bank = TemplateBank::Build(t2, {});
  auto dump = nlohmann::json::parse(bank.DumpJson());
  REQUIRE(dump.size() == 6);
  CHECK(dump[0]["function"]["prev"] == "__null__");
  CHECK(dump[0]["function"]["cur"] == nlohmann::json::array({"train-destination"}));
  CHECK(dump[2]["function"]["next"] == "__null__");
  CHECK(dump[3]["source"]["dialogue"] == "D2");
  CHECK(dump[4]["delex_user"] == "on [train-day]");
}

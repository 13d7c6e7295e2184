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
// Test-only brute-force reference. Reads fixture JSON directly and
// re-derives templates, link legality, tree size, complete paths and the
// realization space without using the library's code paths.

#pragma once

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

namespace oracle {

using Belief = std::map<std::string, std::string>;
using Labels = std::set<std::string>;

struct Pair {
  std::string sys;
  std::string user;
  Belief belief;
};

struct Dlg {
  std::string id;
  std::vector<Pair> pairs;
};

inline std::vector<Dlg> ParseFixture(const std::string& text) {
  auto root = nlohmann::json::parse(text);
  std::vector<Dlg> out;
  for (const auto& d : root) {
    Dlg dlg;
    dlg.id = d["id"].get<std::string>();
    std::string pending;
    for (const auto& t : d["turns"]) {
      if (t["speaker"] == "system") {
        pending = t["text"].get<std::string>();
        continue;
      }
      Pair p;
      p.sys = pending;
      pending.clear();
      p.user = t["text"].get<std::string>();
      for (const auto& [k, v] : t["belief"].items()) {
        p.belief[k] = v.get<std::string>();
      }
      dlg.pairs.push_back(std::move(p));
    }
    out.push_back(std::move(dlg));
  }
  std::sort(out.begin(), out.end(),
            [](const Dlg& a, const Dlg& b) { return a.id < b.id; });
  return out;
}

inline std::vector<Dlg> ReadFixture(const std::string& path) {
  std::ifstream in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  return ParseFixture(buf.str());
}

inline bool Reserved(const std::string& v) {
  return v == "dontcare" || v == "none" || v == "yes" || v == "no";
}

inline Labels KeysOf(const Belief& b) {
  Labels out;
  for (const auto& [k, v] : b) out.insert(k);
  return out;
}

struct Tmpl {
  std::string dialogue;
  std::size_t index = 0;
  const Pair* pair = nullptr;
  std::optional<Labels> prev;
  Labels cur;
  std::optional<Labels> next;
};

// A pair is kept unless two non-categorical labels share a non-reserved
// value.
inline bool Collides(const Belief& b, const Labels& categorical) {
  std::set<std::string> seen;
  for (const auto& [k, v] : b) {
    if (categorical.count(k) || Reserved(v)) continue;
    if (!seen.insert(v).second) return true;
  }
  return false;
}

inline std::vector<Tmpl> Templates(const std::vector<Dlg>& dlgs,
                                   const Labels& categorical = {}) {
  std::vector<Tmpl> out;
  for (const auto& d : dlgs) {
    for (std::size_t i = 0; i < d.pairs.size(); ++i) {
      if (Collides(d.pairs[i].belief, categorical)) continue;
      Tmpl t;
      t.dialogue = d.id;
      t.index = i;
      t.pair = &d.pairs[i];
      t.cur = KeysOf(d.pairs[i].belief);
      if (i > 0) t.prev = KeysOf(d.pairs[i - 1].belief);
      if (i + 1 < d.pairs.size()) t.next = KeysOf(d.pairs[i + 1].belief);
      out.push_back(std::move(t));
    }
  }
  return out;
}

// A may follow B under label-set equality.
inline bool Follows(const Tmpl& b, const Tmpl& a) {
  return b.next && a.prev && a.cur == *b.next && *a.prev == b.cur;
}

struct Enumeration {
  std::size_t nodes = 0;
  std::vector<std::vector<std::size_t>> complete;  // template indices
  bool depth_cut = false;
};

// Depth-first enumeration of every legal prefix; each prefix is one tree
// node.
inline Enumeration Enumerate(const std::vector<Tmpl>& ts,
                             std::size_t max_depth, std::size_t reuse) {
  Enumeration e;
  std::vector<std::size_t> path;
  auto uses = [&](std::size_t id) {
    return static_cast<std::size_t>(std::count(path.begin(), path.end(), id));
  };
  std::function<void()> dfs = [&] {
    ++e.nodes;
    const Tmpl& last = ts[path.back()];
    if (!last.next) {
      e.complete.push_back(path);
      return;
    }
    for (std::size_t j = 0; j < ts.size(); ++j) {
      if (!Follows(last, ts[j]) || uses(j) >= reuse) continue;
      if (path.size() >= max_depth) {
        e.depth_cut = true;
        continue;
      }
      path.push_back(j);
      dfs();
      path.pop_back();
    }
  };
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (ts[i].prev) continue;
    path = {i};
    dfs();
  }
  std::sort(e.complete.begin(), e.complete.end());
  return e;
}

// First-observation ordered values per label, reserved values excluded.
inline std::map<std::string, std::vector<std::string>> Dictionary(
    const std::vector<Dlg>& dlgs, const Labels& categorical = {}) {
  std::map<std::string, std::vector<std::string>> dict;
  for (const auto& d : dlgs) {
    for (const auto& p : d.pairs) {
      for (const auto& [k, v] : p.belief) {
        if (categorical.count(k) || Reserved(v)) continue;
        auto& vals = dict[k];
        if (std::find(vals.begin(), vals.end(), v) == vals.end()) {
          vals.push_back(v);
        }
      }
    }
  }
  return dict;
}

// Cartesian product over labels, minus assignments giving two labels the
// same value.
inline std::vector<std::map<std::string, std::string>> Product(
    const std::vector<std::string>& labels,
    const std::map<std::string, std::vector<std::string>>& dict) {
  std::vector<std::map<std::string, std::string>> out{{}};
  for (const auto& label : labels) {
    std::vector<std::map<std::string, std::string>> next;
    for (const auto& partial : out) {
      for (const auto& v : dict.at(label)) {
        auto a = partial;
        a[label] = v;
        next.push_back(std::move(a));
      }
    }
    out = std::move(next);
  }
  std::vector<std::map<std::string, std::string>> kept;
  for (auto& a : out) {
    std::set<std::string> vals;
    for (const auto& [k, v] : a) vals.insert(v);
    if (vals.size() == a.size()) kept.push_back(std::move(a));
  }
  return kept;
}

inline bool WordChar(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

// Replaces whole-word occurrences of `from` with `to`.
inline std::string ReplaceWord(const std::string& text, const std::string& from,
                               const std::string& to) {
  std::string out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    bool left = pos == 0 || !WordChar(text[pos - 1]);
    std::size_t end = pos + from.size();
    if (left && text.compare(pos, from.size(), from) == 0 &&
        (end == text.size() || !WordChar(text[end]))) {
      out += to;
      pos = end;
    } else {
      out += text[pos++];
    }
  }
  return out;
}

// Full content of every realization of every complete path, as strings.
// Uses direct value substitution on the original pair texts.
inline std::set<std::string> RealizationSpace(
    const std::vector<Tmpl>& ts, const Enumeration& e,
    const std::map<std::string, std::vector<std::string>>& dict) {
  std::set<std::string> space;
  for (const auto& path : e.complete) {
    std::set<std::string> label_set;
    for (std::size_t i : path) {
      for (const auto& [k, v] : ts[i].pair->belief) label_set.insert(k);
    }
    std::vector<std::string> labels(label_set.begin(), label_set.end());
    for (const auto& a : Product(labels, dict)) {
      std::string content;
      Belief running;
      for (std::size_t i : path) {
        std::string sys = ts[i].pair->sys;
        std::string user = ts[i].pair->user;
        for (const auto& [k, v] : ts[i].pair->belief) {
          sys = ReplaceWord(sys, v, "\x01" + k + "\x01");
          user = ReplaceWord(user, v, "\x01" + k + "\x01");
        }
        for (const auto& [k, v] : a) {
          sys = ReplaceWord(sys, "\x01" + k + "\x01", v);
          user = ReplaceWord(user, "\x01" + k + "\x01", v);
        }
        for (const auto& [k, v] : ts[i].pair->belief) {
          running.emplace(k, a.at(k));
        }
        content += sys + "\x1f" + user + "\x1f";
        for (const auto& [k, v] : running) content += k + "=" + v + "\x1d";
        content += "\x1e";
      }
      space.insert(content);
    }
  }
  return space;
}

inline std::string SeedContent(const Dlg& d) {
  std::string content;
  for (const auto& p : d.pairs) {
    content += p.sys + "\x1f" + p.user + "\x1f";
    for (const auto& [k, v] : p.belief) content += k + "=" + v + "\x1d";
    content += "\x1e";
  }
  return content;
}

}  // namespace oracle

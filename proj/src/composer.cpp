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

#include "dialaug/composer.hpp"

#include <algorithm>
#include <stdexcept>
#include <thread>

#include "json.hpp"

namespace dialaug {

void GrowthLimits::Validate() const {
  if (max_depth < 1 || max_nodes < 1 || reuse < 1) {
    throw std::invalid_argument("growth limits must all be >= 1");
  }
}

std::size_t TemplateTree::MaxDepth() const {
  std::size_t depth = 0;
  for (const auto& n : nodes) depth = std::max(depth, n.depth);
  return depth;
}

std::vector<TemplateId> TemplateTree::PathTo(std::size_t node) const {
  std::vector<TemplateId> path;
  std::optional<std::size_t> cur = node;
  while (cur) {
    path.push_back(nodes[*cur].template_id);
    cur = nodes[*cur].parent;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

std::string TemplateTree::DumpJsonLines() const {
  std::string out;
  for (const auto& n : nodes) {
    nlohmann::ordered_json rec;
    rec["node_id"] = n.id;
    rec["parent_id"] = n.parent ? nlohmann::ordered_json(*n.parent)
                                : nlohmann::ordered_json(nullptr);
    rec["template_id"] = n.template_id;
    rec["depth"] = n.depth;
    out += rec.dump();
    out += '\n';
  }
  return out;
}

namespace {

std::size_t UsesOnPath(const std::vector<TreeNode>& nodes, std::size_t node,
                       TemplateId id) {
  std::size_t uses = 0;
  std::optional<std::size_t> cur = node;
  while (cur) {
    if (nodes[*cur].template_id == id) ++uses;
    cur = nodes[*cur].parent;
  }
  return uses;
}

// Children (template ids) for each parent in [begin, end) of the frontier.
void ExpandRange(const std::vector<TreeNode>& nodes,
                 const std::vector<std::vector<TemplateId>>& successors,
                 const std::vector<std::size_t>& frontier, std::size_t begin,
                 std::size_t end, std::size_t reuse,
                 std::vector<std::vector<TemplateId>>& out) {
  for (std::size_t i = begin; i < end; ++i) {
    const TreeNode& parent = nodes[frontier[i]];
    for (TemplateId id : successors[parent.template_id]) {
      if (UsesOnPath(nodes, parent.id, id) < reuse) out[i].push_back(id);
    }
  }
}

}  // namespace

TemplateTree GrowTree(const TemplateBank& bank, const GrowthLimits& limits,
                      LinkSemantics semantics, unsigned threads) {
  limits.Validate();
  if (bank.size() == 0) {
    throw Error(ErrorKind::kEmptyBank, "cannot grow a tree from an empty bank");
  }
  threads = std::max(1u, threads);

  std::vector<std::vector<TemplateId>> successors(bank.size());
  for (const auto& t : bank.templates()) {
    successors[t.id] = bank.Successors(t, semantics);
  }

  TemplateTree tree;
  auto add_node = [&](TemplateId id, std::optional<std::size_t> parent,
                      std::size_t depth) {
    tree.nodes.push_back({tree.nodes.size(), id, parent, depth});
    tree.child_count.push_back(0);
    if (parent) ++tree.child_count[*parent];
  };
  auto trip_budget = [&] {
    tree.truncated = true;
    tree.truncation_reason = "node budget of " +
                             std::to_string(limits.max_nodes) + " exceeded";
  };

  std::vector<std::size_t> frontier;
  for (TemplateId id : bank.roots()) {
    if (tree.nodes.size() >= limits.max_nodes) {
      trip_budget();
      return tree;
    }
    frontier.push_back(tree.nodes.size());
    add_node(id, std::nullopt, 1);
  }

  std::size_t depth = 1;
  while (!frontier.empty()) {
    std::vector<std::vector<TemplateId>> children(frontier.size());
    const unsigned workers = static_cast<unsigned>(
        std::min<std::size_t>(threads, frontier.size()));
    if (workers <= 1) {
      ExpandRange(tree.nodes, successors, frontier, 0, frontier.size(),
                  limits.reuse, children);
    } else {
      std::vector<std::jthread> pool;
      const std::size_t chunk = (frontier.size() + workers - 1) / workers;
      for (unsigned w = 0; w < workers; ++w) {
        std::size_t begin = w * chunk;
        std::size_t end = std::min(frontier.size(), begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&, begin, end] {
          ExpandRange(tree.nodes, successors, frontier, begin, end,
                      limits.reuse, children);
        });
      }
    }

    bool any_child = std::any_of(children.begin(), children.end(),
                                 [](const auto& c) { return !c.empty(); });
    if (!any_child) break;
    if (depth >= limits.max_depth) {
      tree.truncated = true;
      tree.truncation_reason =
          "depth limit of " + std::to_string(limits.max_depth) + " reached";
      break;
    }

    std::vector<std::size_t> next;
    bool budget_hit = false;
    for (std::size_t i = 0; i < frontier.size() && !budget_hit; ++i) {
      for (TemplateId id : children[i]) {
        if (tree.nodes.size() >= limits.max_nodes) {
          budget_hit = true;
          break;
        }
        next.push_back(tree.nodes.size());
        add_node(id, frontier[i], depth + 1);
      }
    }
    if (budget_hit) {
      trip_budget();
      break;
    }
    frontier = std::move(next);
    ++depth;
  }
  return tree;
}

DialogueTemplate MakeDialogueTemplate(std::vector<TemplateId> ids,
                                      const TemplateBank& bank) {
  DialogueTemplate dt;
  std::set<SlotLabel> labels;
  std::set<SlotLabel> assignable;
  for (TemplateId id : ids) {
    const TurnPairTemplate& t = bank.at(id);
    dt.provenance.insert(t.source.dialogue_id);
    for (const auto& [label, value] : t.cur_belief) {
      labels.insert(label);
      if (bank.policy().IsDelexicalizable(label, value)) {
        assignable.insert(label);
      }
    }
  }
  dt.template_ids = std::move(ids);
  dt.slot_labels.assign(labels.begin(), labels.end());
  dt.assignable_labels.assign(assignable.begin(), assignable.end());
  return dt;
}

std::vector<DialogueTemplate> ExtractDialogueTemplates(
    const TemplateTree& tree, const TemplateBank& bank) {
  std::vector<std::vector<TemplateId>> paths;
  for (const auto& node : tree.nodes) {
    if (tree.child_count[node.id] != 0) continue;
    if (!bank.at(node.template_id).IsTerminal()) continue;
    paths.push_back(tree.PathTo(node.id));
  }
  if (paths.empty()) {
    throw Error(ErrorKind::kNoCompleteDialogue,
                "no path of the template tree reaches a terminal template" +
                    std::string(tree.truncated
                                    ? " (" + tree.truncation_reason + ")"
                                    : ""));
  }
  std::sort(paths.begin(), paths.end());
  std::vector<DialogueTemplate> out;
  out.reserve(paths.size());
  for (auto& path : paths) {
    out.push_back(MakeDialogueTemplate(std::move(path), bank));
  }
  return out;
}

}  // namespace dialaug

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
// Breadth-first growth of the template tree and extraction of dialogue
// templates (root-to-terminal paths).

#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dialaug/template_bank.hpp"

namespace dialaug {

struct GrowthLimits {
  std::size_t max_depth = 8;      // pairs per dialogue
  std::size_t max_nodes = 200000;
  std::size_t reuse = 1;          // uses of one template id per path

  // Throws std::invalid_argument if a limit is zero.
  void Validate() const;
};

struct TreeNode {
  std::size_t id = 0;
  TemplateId template_id = 0;
  std::optional<std::size_t> parent;  // absent below the synthetic root
  std::size_t depth = 1;              // the synthetic root has depth 0
};

struct TemplateTree {
  std::vector<TreeNode> nodes;  // BFS order; node id == index
  std::vector<std::size_t> child_count;
  bool truncated = false;
  std::string truncation_reason;

  std::size_t size() const { return nodes.size(); }
  std::size_t MaxDepth() const;
  std::vector<TemplateId> PathTo(std::size_t node) const;
  // One {node_id, parent_id, template_id, depth} record per line.
  std::string DumpJsonLines() const;
};

// Level 1 holds every root template (next-state condition ignored); each
// later level expands all active nodes with every linkable template.
// Children are ordered by parent then template id whatever the thread
// count. A tripped depth or node budget sets `truncated`.
TemplateTree GrowTree(const TemplateBank& bank, const GrowthLimits& limits,
                      LinkSemantics semantics = LinkSemantics::kEquality,
                      unsigned threads = 1);

struct DialogueTemplate {
  std::vector<TemplateId> template_ids;
  LabelSet slot_labels;  // union of current-state labels along the path
  // Non-categorical labels holding a non-reserved value somewhere on the
  // path; these are the labels an Assignment fills.
  LabelSet assignable_labels;
  std::set<std::string> provenance;  // source dialogue ids
};

DialogueTemplate MakeDialogueTemplate(std::vector<TemplateId> ids,
                                      const TemplateBank& bank);

// Paths whose leaf template is terminal, in lexicographic id order.
// Throws Error(kNoCompleteDialogue) when there is none.
std::vector<DialogueTemplate> ExtractDialogueTemplates(
    const TemplateTree& tree, const TemplateBank& bank);

}  // namespace dialaug

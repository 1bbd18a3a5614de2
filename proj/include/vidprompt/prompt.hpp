// Copyright 2026 The vidprompt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Few-shot prompt assembly. A prompt is
//
//   <instruction>
//   <blank line>
//   <example block>          (each ends with "<suffix> <annotation>")
//   <blank line>
//   ...
//   <query block>            (ends with "<suffix> ", generation starts here)
//
// Blocks are separated by exactly one blank line.

#include "vidprompt/fewshot.hpp"

namespace vidprompt {

inline constexpr std::string_view kVlepQuestion = "What is more likely to happen next?";

inline std::string_view task_suffix(TaskKind task) {
  switch (task) {
    case TaskKind::caption:
    case TaskKind::caption_with_asr:
      return "Video Caption:";
    case TaskKind::qa:
    case TaskKind::vlep:
      return "Answer:";
  }
  throw Error("invalid TaskKind");
}

inline std::string_view default_instruction(TaskKind task) {
  switch (task) {
    case TaskKind::caption:
      return "Generate a video caption based on the objects, events, attributes and frame captions. Example:";
    case TaskKind::caption_with_asr:
      return "Generate a video caption based on the objects, events, attributes, frame captions and subtitle. "
             "Example:";
    case TaskKind::qa:
      return "Answer the question based on the objects, events, attributes and frame captions. Example:";
    case TaskKind::vlep:
      return "Predict what is more likely to happen next based on the objects, events, attributes, frame "
             "captions and subtitle. Example:";
  }
  throw Error("invalid TaskKind");
}

struct FewShotPrompt {
  std::string instruction;
  std::vector<std::string> context;  // rendered, annotated example blocks
  std::string query;                 // rendered query block
  std::string suffix;
  std::string rendered;
};

struct PromptStats {
  std::size_t char_count = 0;  // bytes of UTF-8
  std::size_t line_count = 0;
  std::size_t example_count = 0;

  bool operator==(const PromptStats&) const = default;
};

/// Renders one instance. Pass `with_annotation = false` for the query.
inline std::string render_block(const LabeledExample& item, TaskKind task, bool with_annotation,
                                MarkerStyle style = MarkerStyle::temporal) {
  const auto& repr = item.representation;
  std::vector<std::string> lines;
  for (auto kind : kAllVocabKinds) lines.push_back(render_token_line(kind, repr.tokens_of(kind), style));
  lines.push_back(render_caption_lines(repr.frame_captions, style));

  const bool has_asr = repr.asr && !trim_view(*repr.asr).empty();
  const bool needs_asr = task == TaskKind::caption_with_asr || task == TaskKind::vlep;
  if (needs_asr && !has_asr) {
    throw Error("render_block: '" + item.example_id + "' needs a subtitle for task " + std::string(to_string(task)));
  }
  if (has_asr && task != TaskKind::caption) lines.push_back("Subtitle: " + trim(*repr.asr));

  if (task == TaskKind::qa) {
    if (!item.question || trim_view(*item.question).empty()) {
      throw Error("render_block: '" + item.example_id + "' has no question");
    }
    lines.push_back("Question: " + trim(*item.question));
  }
  if (task == TaskKind::vlep) {
    if (item.candidates.size() != 2) {
      throw Error("render_block: '" + item.example_id + "' needs exactly two candidate events");
    }
    lines.push_back("Option A: " + trim(item.candidates[0]));
    lines.push_back("Option B: " + trim(item.candidates[1]));
    lines.push_back("Question: " + std::string(kVlepQuestion));
  }

  std::string last(task_suffix(task));
  last += ' ';
  if (with_annotation) {
    if (trim_view(item.annotation).empty()) {
      throw Error("render_block: in-context example '" + item.example_id + "' has no annotation");
    }
    last += trim(item.annotation);
  }
  lines.push_back(std::move(last));
  return join(lines, "\n");
}

inline FewShotPrompt assemble(std::string instruction, std::vector<std::string> examples, std::string query,
                              std::string suffix = {}) {
  FewShotPrompt p{std::move(instruction), std::move(examples), std::move(query), std::move(suffix), {}};
  p.rendered = p.instruction;
  for (const auto& block : p.context) {
    p.rendered += "\n\n";
    p.rendered += block;
  }
  p.rendered += "\n\n";
  p.rendered += p.query;
  return p;
}

/// Renders the examples and the query and assembles them with the task's
/// default instruction unless one is given.
inline FewShotPrompt build_prompt(TaskKind task, std::span<const LabeledExample> examples,
                                  const LabeledExample& query, MarkerStyle style = MarkerStyle::temporal,
                                  std::optional<std::string> instruction = std::nullopt) {
  std::vector<std::string> blocks;
  for (const auto& ex : examples) blocks.push_back(render_block(ex, task, true, style));
  return assemble(instruction.value_or(std::string(default_instruction(task))), std::move(blocks),
                  render_block(query, task, false, style), std::string(task_suffix(task)));
}

inline PromptStats prompt_stats(const FewShotPrompt& p) {
  PromptStats s;
  s.char_count = p.rendered.size();
  s.line_count = p.rendered.empty() ? 0 : 1 + static_cast<std::size_t>(std::count(p.rendered.begin(), p.rendered.end(), '\n'));
  s.example_count = p.context.size();
  return s;
}

}  // namespace vidprompt

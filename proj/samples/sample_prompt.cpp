// Copyright 2026 The vidprompt Authors
// SPDX-License-Identifier: Apache-2.0

// Builds a zero-shot captioning prompt from hand-written per-frame tokens
// and captions, then prints it.

#include <iostream>

#include "vidprompt/vidprompt.hpp"

int main() {
  using namespace vidprompt;

  PerFrameTokens per_frame;
  auto add = [&](int frame, VocabKind kind, std::vector<std::pair<std::string, double>> scored) {
    auto& list = per_frame[{frame, kind}];
    int rank = 1;
    for (auto& [phrase, score] : scored) list.push_back({phrase, kind, score, frame, rank++});
  };
  add(0, VocabKind::object, {{"bath toy", 0.31}, {"bathtub", 0.30}});
  add(1, VocabKind::object, {{"rubber duck", 0.29}, {"bath toy", 0.27}});
  add(2, VocabKind::object, {{"towel", 0.28}, {"bathtub", 0.26}});
  add(1, VocabKind::event, {{"playing in water", 0.25}});
  add(2, VocabKind::attribute, {{"wet", 0.22}});

  std::vector<FrameCaption> captions = {
      {0, "a toddler playing in a bathtub filled with toys", 0.61},
      {1, "a child holding a rubber duck", 0.58},
      {2, "a towel hanging next to the tub", 0.52},
  };

  LabeledExample query;
  query.example_id = "demo";
  query.representation = build_representation("demo", captions, per_frame, std::nullopt);

  auto prompt = build_prompt(TaskKind::caption, {}, query);
  std::cout << prompt.rendered << "\n";
  auto stats = prompt_stats(prompt);
  std::cerr << stats.char_count << " bytes, " << stats.line_count << " lines\n";
}

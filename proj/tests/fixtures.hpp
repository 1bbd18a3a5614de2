// Copyright 2026 The vidprompt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Hand-built representations and prompts shared by the unit tests and the
// acceptance binary.

#include <string>
#include <vector>

#include "vidprompt/vidprompt.hpp"

namespace fixture {

using namespace vidprompt;

struct Scene {
  std::vector<std::string> objects, events, attributes, captions;
  std::optional<std::string> asr;
};

/// Tokens are listed in temporal order; scores and ranks are synthetic.
inline VideoRepresentation make_repr(const std::string& id, const Scene& s) {
  VideoRepresentation r;
  r.video_id = id;
  auto fill = [&](VocabKind kind, const std::vector<std::string>& phrases) {
    auto& list = r.tokens[kind];
    for (std::size_t i = 0; i < phrases.size(); ++i) {
      list.push_back({phrases[i], kind, 0.3 - 0.01 * static_cast<double>(i), 1, 1, static_cast<double>(10 * i)});
    }
  };
  fill(VocabKind::object, s.objects);
  fill(VocabKind::event, s.events);
  fill(VocabKind::attribute, s.attributes);
  for (std::size_t i = 0; i < s.captions.size(); ++i) {
    r.frame_captions.push_back({static_cast<int>(10 + 20 * i), s.captions[i], 0.5});
  }
  r.asr = s.asr;
  return r;
}

inline LabeledExample example(const std::string& id, const Scene& s, std::string annotation) {
  LabeledExample ex;
  ex.example_id = id;
  ex.representation = make_repr(id, s);
  ex.annotation = std::move(annotation);
  ex.references = {ex.annotation};
  return ex;
}

struct PromptCase {
  TaskKind task;
  std::vector<LabeledExample> context;
  LabeledExample query;
};

inline PromptCase caption_case() {
  PromptCase c{TaskKind::caption, {}, {}};
  c.context.push_back(example("ctx-dog",
                              {{"dog", "frisbee", "grass"},
                               {"throwing frisbee", "catching frisbee"},
                               {"green", "fast"},
                               {"a man throwing a frisbee", "a dog jumping to catch a frisbee"},
                               std::nullopt},
                              "a dog catches a frisbee in the park"));
  c.context.push_back(example("ctx-cake",
                              {{"cake", "icing bag", "flower", "table"},
                               {"piping frosting", "decorating a cake"},
                               {"pink", "sweet", "colorful"},
                               {"a cake on a table", "a hand holding an icing bag", "a finished cake with flowers"},
                               std::nullopt},
                              "a woman decorates a cake with pink frosting flowers"));
  c.query = example("query-bath",
                    {{"bath toy", "bathtub", "rubber duck", "towel"},
                     {"playing with toys", "splashing water"},
                     {"wet", "soapy"},
                     {"a toddler playing in a bathtub filled with toys", "a rubber duck floating in the water",
                      "a child splashing water in the tub", "a towel next to the bathtub"},
                     "look at the duck"},
                    "");
  return c;
}

inline PromptCase caption_asr_case() {
  PromptCase c{TaskKind::caption_with_asr, {}, {}};
  c.context.push_back(example("ctx-onion",
                              {{"onion", "knife", "cutting board"},
                               {"cutting onion"},
                               {"sliced"},
                               {"an onion on a cutting board", "a knife cutting an onion"},
                               "keep your fingers tucked in"},
                              "slice the onion"));
  c.query = example("query-pasta",
                    {{"pot", "pasta", "stove"},
                     {"boiling water", "stirring pasta"},
                     {"hot"},
                     {"a pot on a stove", "pasta being poured into boiling water", "a spoon stirring pasta"},
                     "add a pinch of salt and stir"},
                    "");
  return c;
}

inline PromptCase qa_case() {
  PromptCase c{TaskKind::qa, {}, {}};
  auto ex = example("ctx-guitar",
                    {{"guitar", "microphone", "stage"}, {"playing guitar"}, {"loud"},
                     {"a man on a stage with a guitar", "a man playing guitar on stage"}, std::nullopt},
                    "guitar");
  ex.question = "what is the man playing?";
  c.context.push_back(ex);
  c.query = example("query-dog",
                    {{"dog", "frisbee"}, {"running on grass"}, {"fast"},
                     {"a dog on a lawn", "a dog running fast"}, std::nullopt},
                    "");
  c.query.question = "what is the dog doing?";
  return c;
}

inline PromptCase vlep_case() {
  PromptCase c{TaskKind::vlep, {}, {}};
  auto ex = example("ctx-door",
                    {{"door", "woman", "hallway"}, {"opening door"}, {"dark"},
                     {"a woman walks down a hallway", "a woman reaches for a door handle"},
                     "Is anyone home?"},
                    "The woman opens the door.");
  ex.candidates = {"The woman opens the door.", "The woman sits down on the floor."};
  ex.answer_index = 0;
  c.context.push_back(ex);
  c.query = example("query-phone",
                    {{"phone", "man", "couch"}, {"ringing phone"}, {"surprised"},
                     {"a man sitting on a couch", "a phone ringing on a table"},
                     "Who could be calling this late?"},
                    "");
  c.query.candidates = {"The man answers the phone.", "The man throws the phone away."};
  return c;
}

inline PromptCase prompt_case(TaskKind task) {
  switch (task) {
    case TaskKind::caption:
      return caption_case();
    case TaskKind::caption_with_asr:
      return caption_asr_case();
    case TaskKind::qa:
      return qa_case();
    case TaskKind::vlep:
      return vlep_case();
  }
  throw Error("bad task");
}

inline std::string render(const PromptCase& c, MarkerStyle style = MarkerStyle::temporal) {
  return build_prompt(c.task, c.context, c.query, style).rendered;
}

/// The sunset scene: the sun is visible before the night sky. The sunrise
/// scene is the same video played backwards.
inline LabeledExample sunset_query() {
  return example("sunset",
                 {{"sun", "cloud", "night sky"},
                  {"sun moving", "sky darkening"},
                  {"orange", "dark"},
                  {"the sun above the horizon", "the sun touching the hills", "a dark night sky with stars"},
                  std::nullopt},
                 "");
}

inline LabeledExample sunrise_query() {
  auto q = sunset_query();
  q.example_id = "sunrise";
  q.representation = reverse_order(q.representation);
  return q;
}

}  // namespace fixture

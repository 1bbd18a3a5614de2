// Copyright 2026 The vidprompt Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "prompt_checks.hpp"
#include "test_util.hpp"

using namespace vidprompt;

namespace {

std::string golden_name(TaskKind task) { return "prompt_" + std::string(to_string(task)) + ".txt"; }

}  // namespace

class GoldenPrompt : public ::testing::TestWithParam<TaskKind> {};

TEST_P(GoldenPrompt, ByteMatchesCommittedGolden) {
  auto rendered = fixture::render(fixture::prompt_case(GetParam()));
  EXPECT_TRUE(vptest::matches_golden(golden_name(GetParam()), rendered)) << rendered;
}

TEST_P(GoldenPrompt, StaticDiffersOnlyAtMarkers) {
  auto c = fixture::prompt_case(GetParam());
  auto temporal = fixture::render(c);
  auto stat = fixture::render(c, MarkerStyle::none);
  EXPECT_NE(temporal, stat);
  EXPECT_EQ(vptest::strip_markers(temporal), stat);
}

TEST_P(GoldenPrompt, AssemblyIsConcatenation) {
  auto c = fixture::prompt_case(GetParam());
  auto p = build_prompt(c.task, c.context, c.query);
  std::string expected = std::string(default_instruction(c.task));
  for (const auto& ex : c.context) expected += "\n\n" + render_block(ex, c.task, true);
  expected += "\n\n" + render_block(c.query, c.task, false);
  EXPECT_EQ(p.rendered, expected);
  EXPECT_EQ(p.context.size(), c.context.size());
  EXPECT_EQ(p.suffix, task_suffix(c.task));
  auto tail = std::string(task_suffix(c.task)) + " ";
  EXPECT_EQ(p.rendered.substr(p.rendered.size() - tail.size()), tail);

  auto stats = prompt_stats(p);
  EXPECT_EQ(stats.char_count, p.rendered.size());
  EXPECT_EQ(stats.line_count, vptest::split_lines(p.rendered).size());
  EXPECT_EQ(stats.example_count, c.context.size());
}

INSTANTIATE_TEST_SUITE_P(AllTasks, GoldenPrompt,
                         ::testing::Values(TaskKind::caption, TaskKind::caption_with_asr, TaskKind::qa, TaskKind::vlep),
                         [](const auto& info) { return std::string(to_string(info.param)); });

TEST(Prompt, AssociativeOverContextSplits) {
  auto c = fixture::caption_case();
  auto whole = build_prompt(c.task, c.context, c.query).rendered;
  std::vector<std::string> blocks;
  for (const auto& ex : c.context) blocks.push_back(render_block(ex, c.task, true));
  auto q = render_block(c.query, c.task, false);
  auto instr = std::string(default_instruction(c.task));
  // instruction + (b1 + b2 + q) == (instruction + b1) + (b2 + q)
  auto left = assemble(instr, {blocks[0]}, blocks[1]).rendered;
  EXPECT_EQ(left + "\n\n" + q, whole);
  EXPECT_EQ(assemble(instr, blocks, q).rendered, whole);
}

TEST(Prompt, ZeroShotHasInstructionAndQueryOnly) {
  auto c = fixture::caption_case();
  auto p = build_prompt(c.task, {}, c.query);
  EXPECT_EQ(p.rendered, std::string(default_instruction(c.task)) + "\n\n" + render_block(c.query, c.task, false));
  EXPECT_EQ(prompt_stats(p).example_count, 0u);
}

TEST(Prompt, CustomInstruction) {
  auto c = fixture::caption_case();
  auto p = build_prompt(c.task, c.context, c.query, MarkerStyle::temporal, std::string("Describe the video."));
  EXPECT_EQ(p.rendered.rfind("Describe the video.\n\n", 0), 0u);
}

TEST(Prompt, CaptionInstructionIsVerbatim) {
  EXPECT_EQ(default_instruction(TaskKind::caption),
            "Generate a video caption based on the objects, events, attributes and frame captions. Example:");
}

TEST(Prompt, SubtitlePlacement) {
  auto c = fixture::caption_case();
  ASSERT_TRUE(c.query.representation.asr);
  EXPECT_EQ(render_block(c.query, TaskKind::caption, false).find("Subtitle:"), std::string::npos);
  EXPECT_NE(render_block(c.query, TaskKind::caption_with_asr, false).find("Subtitle: look at the duck"),
            std::string::npos);
  c.query.representation.asr.reset();
  EXPECT_THROW(render_block(c.query, TaskKind::caption_with_asr, false), Error);
  c.query.question = "what?";
  EXPECT_EQ(render_block(c.query, TaskKind::qa, false).find("Subtitle:"), std::string::npos);
}

TEST(Prompt, BlockValidation) {
  auto qa = fixture::qa_case();
  qa.query.question.reset();
  EXPECT_THROW(render_block(qa.query, TaskKind::qa, false), Error);
  auto vlep = fixture::vlep_case();
  vlep.query.candidates.pop_back();
  EXPECT_THROW(render_block(vlep.query, TaskKind::vlep, false), Error);
  auto cap = fixture::caption_case();
  cap.context[0].annotation = "";
  EXPECT_THROW(render_block(cap.context[0], TaskKind::caption, true), Error);
}

TEST(Prompt, VlepBlockLayout) {
  auto c = fixture::vlep_case();
  auto lines = vptest::split_lines(render_block(c.query, TaskKind::vlep, false));
  ASSERT_EQ(lines.size(), 9u);
  EXPECT_EQ(lines[4], "Subtitle: Who could be calling this late?");
  EXPECT_EQ(lines[5], "Option A: The man answers the phone.");
  EXPECT_EQ(lines[6], "Option B: The man throws the phone away.");
  EXPECT_EQ(lines[7], "Question: What is more likely to happen next?");
  EXPECT_EQ(lines[8], "Answer: ");
}

TEST(Prompt, SunsetSunriseDifferOnlyInOrder) {
  auto ctx = fixture::caption_case().context;
  auto sunset = build_prompt(TaskKind::caption, ctx, fixture::sunset_query()).rendered;
  auto sunrise = build_prompt(TaskKind::caption, ctx, fixture::sunrise_query()).rendered;
  EXPECT_TRUE(vptest::matches_golden("prompt_sunset.txt", sunset));
  EXPECT_TRUE(vptest::matches_golden("prompt_sunrise.txt", sunrise));
  std::string why;
  EXPECT_TRUE(vptest::differs_only_by_reordering(sunset, sunrise, &why)) << why;
  // the static variants differ in the same lines, so only markers tell time apart
  auto s1 = build_prompt(TaskKind::caption, ctx, fixture::sunset_query(), MarkerStyle::none).rendered;
  auto s2 = build_prompt(TaskKind::caption, ctx, fixture::sunrise_query(), MarkerStyle::none).rendered;
  EXPECT_TRUE(vptest::differs_only_by_reordering(s1, s2, &why)) << why;
}

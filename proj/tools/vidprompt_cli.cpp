// Copyright 2026 The vidprompt Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "CLI11.hpp"
#include "vidprompt/vidprompt.hpp"

namespace {

struct Overrides {
  std::optional<std::string> task, dataset, output_dir, vocab_dir, endpoint, cache_dir;
  std::optional<std::size_t> M, N, parallelism;
  std::vector<std::uint64_t> seeds;
  std::optional<int> caption_frames, token_frames, top_k, top_m, must_rank_within, max_tokens;
  std::optional<double> dedup_threshold, temperature;
  bool one_frame = false, reversed = false, static_markers = false;
};

void add_overrides(CLI::App& app, Overrides& o) {
  app.add_option("--task", o.task, "caption | caption_with_asr | qa | vlep");
  app.add_option("--dataset", o.dataset, "dataset JSON");
  app.add_option("--output-dir", o.output_dir, "output directory");
  app.add_option("--vocab-dir", o.vocab_dir, "embedded vocabulary store directory");
  app.add_option("--endpoint", o.endpoint, "default endpoint for http providers");
  app.add_option("--cache-dir", o.cache_dir, "response cache directory");
  app.add_option("--M", o.M, "support set size");
  app.add_option("--N", o.N, "in-context examples per prompt (0 = zero-shot)");
  app.add_option("--seeds", o.seeds, "support sampling seeds");
  app.add_option("--parallelism", o.parallelism, "concurrent provider calls");
  app.add_option("--caption-frames", o.caption_frames, "frames captioned per video");
  app.add_option("--token-frames", o.token_frames, "frames tokenized per video");
  app.add_option("--top-k", o.top_k, "visual tokens per frame and kind");
  app.add_option("--top-m", o.top_m, "video-level tokens kept per kind");
  app.add_option("--must-rank-within", o.must_rank_within, "best per-frame rank a kept token needs");
  app.add_option("--dedup-threshold", o.dedup_threshold, "cosine threshold for vocabulary dedup");
  app.add_option("--temperature", o.temperature, "completion temperature");
  app.add_option("--max-tokens", o.max_tokens, "completion length limit");
  app.add_flag("--one-frame", o.one_frame, "ablation: middle frame only");
  app.add_flag("--reversed", o.reversed, "ablation: reverse token and caption order");
  app.add_flag("--static-markers", o.static_markers, "ablation: drop temporal markers");
}

void apply(vidprompt::RunConfig& c, const Overrides& o) {
  if (o.task) c.task = vidprompt::parse_task_kind(*o.task);
  if (o.dataset) c.dataset = std::filesystem::absolute(*o.dataset).string();
  if (o.output_dir) c.output_dir = std::filesystem::absolute(*o.output_dir).string();
  if (o.vocab_dir) c.vocab_dir = std::filesystem::absolute(*o.vocab_dir).string();
  if (o.endpoint) c.providers.endpoint = *o.endpoint;
  if (o.cache_dir) c.providers.cache_dir = std::filesystem::absolute(*o.cache_dir).string();
  if (o.M) c.M = *o.M;
  if (o.N) c.N = *o.N;
  if (!o.seeds.empty()) c.seeds = o.seeds;
  if (o.parallelism) c.providers.parallelism = *o.parallelism;
  if (o.caption_frames) c.caption_frames = *o.caption_frames;
  if (o.token_frames) c.token_frames = *o.token_frames;
  if (o.top_k) c.top_k = *o.top_k;
  if (o.top_m) c.top_m = *o.top_m;
  if (o.must_rank_within) c.must_rank_within = *o.must_rank_within;
  if (o.dedup_threshold) c.dedup_threshold = *o.dedup_threshold;
  if (o.temperature) c.temperature = *o.temperature;
  if (o.max_tokens) c.max_tokens = *o.max_tokens;
  if (o.one_frame) c.ablations.one_frame = true;
  if (o.reversed) c.ablations.reversed = true;
  if (o.static_markers) c.ablations.static_markers = true;
  c.validate();
}

}  // namespace

int main(int argc, char** argv) {
  using namespace vidprompt;
  CLI::App app{"Few-shot video-to-text prompting pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  Overrides overrides;
  bool quiet = false;
  app.add_option("-c,--config", config_path, "run configuration (JSON)")->required();
  app.add_flag("-q,--quiet", quiet, "only print errors");
  add_overrides(app, overrides);

  using Command = cli::CommandResult (*)(const RunConfig&);
  std::vector<std::pair<CLI::App*, Command>> commands = {
      {app.add_subcommand("build-vocab", "clean, dedup and embed the visual-token vocabularies"), &cli::cmd_build_vocab},
      {app.add_subcommand("represent", "build one textual representation per video"), &cli::cmd_represent},
      {app.add_subcommand("run", "assemble prompts and collect predictions per seed"), &cli::cmd_run},
      {app.add_subcommand("eval", "score predictions and write the evaluation report"), &cli::cmd_eval},
      {app.add_subcommand("pseudo-label", "caption unlabeled videos with greedy decoding"), &cli::cmd_pseudo_label},
  };
  auto* show = app.add_subcommand("show-config", "print the effective configuration");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  if (quiet) {
    set_log_sink([](LogLevel level, std::string_view msg) {
      if (level == LogLevel::error) std::cerr << "[error] " << msg << '\n';
    });
  }

  try {
    auto cfg = load_run_config(config_path);
    apply(cfg, overrides);
    if (show->parsed()) {
      std::cout << to_json(cfg).dump(2) << '\n';
      return 0;
    }
    for (const auto& [sub, fn] : commands) {
      if (!sub->parsed()) continue;
      auto result = fn(cfg);
      for (const auto& f : result.failures) std::cerr << "failed: " << f << '\n';
      if (!quiet) std::cerr << sub->get_name() << ": " << (result.exit_code == 0 ? "ok" : "partial failure") << '\n';
      return result.exit_code;
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}

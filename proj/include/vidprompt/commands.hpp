// Copyright 2026 The vidprompt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// The pipeline stages behind the command-line tool. Each command reads a
// RunConfig, writes its artifacts under the output directory and returns an
// exit code: 0 success, 1 partial failure. Configuration and I/O problems
// throw ConfigError, which the tool maps to exit code 2.
//
// Output layout:
//   vocab/{objects,events,attributes}.json, vocab/stats.json
//   repr/<video_id>.json, repr/manifest.json
//   run/seed_<s>/predictions.jsonl, run/seed_<s>/manifest.json, run/seed_<s>/prompts/<id>.txt
//   eval/report.json
//   pseudo_labels.tsv, pseudo_labels_manifest.json

#include "vidprompt/config.hpp"

namespace vidprompt::cli {

namespace fs = std::filesystem;

struct CommandResult {
  int exit_code = 0;
  std::vector<std::string> failures;
};

inline std::string dump_pretty(const json& j) { return j.dump(2) + "\n"; }

inline json base_manifest(const RunConfig& cfg, const Providers& providers, std::string_view command) {
  return {{"command", std::string(command)},
          {"config_hash", config_hash(cfg)},
          {"task", std::string(to_string(cfg.task))},
          {"providers", providers.identities()}};
}

/// Keeps file names portable: anything outside [A-Za-z0-9._-] becomes '_'.
inline std::string safe_file_name(std::string_view id) {
  std::string out;
  for (char c : id) {
    auto u = static_cast<unsigned char>(c);
    out += (std::isalnum(u) || c == '.' || c == '_' || c == '-') ? c : '_';
  }
  if (out.empty() || out == "." || out == "..") out = "_" + out;
  return out;
}

// ---------------------------------------------------------------------------

struct VocabStats {
  std::string source;
  std::size_t original = 0;
  std::size_t cleaned = 0;
  std::optional<std::size_t> structured;  // events only
  std::size_t final_size = 0;
};

inline json to_json(const VocabStats& s) {
  json j = {{"source", s.source}, {"original", s.original}, {"cleaned", s.cleaned}, {"final", s.final_size}};
  if (s.structured) j["after_structure_filter"] = *s.structured;
  return j;
}

inline CommandResult cmd_build_vocab(const RunConfig& cfg) {
  auto providers = make_providers(cfg);
  if (!providers.vocab_embedder) throw ConfigError("build-vocab needs providers.vocab_embedder");
  const auto dir = cfg.vocab_store_dir();
  json stats = json::object();
  std::size_t built = 0;

  auto non_blank = [](const std::vector<std::string>& lines) {
    return static_cast<std::size_t>(
        std::count_if(lines.begin(), lines.end(), [](const auto& l) { return !trim_view(l).empty(); }));
  };

  for (auto kind : kAllVocabKinds) {
    const std::string* src = kind == VocabKind::object  ? &cfg.vocab.objects
                             : kind == VocabKind::event ? &cfg.vocab.events
                                                        : &cfg.vocab.attributes;
    if (src->empty()) continue;
    const auto path = cfg.resolve(*src);
    VocabStats st;
    st.source = fs::path(*src).filename().string();
    auto raw = read_lines(path);
    st.original = non_blank(raw);

    std::vector<std::string> blocked;
    if (kind == VocabKind::object && !cfg.vocab.object_blocklist.empty()) {
      blocked = read_lines(cfg.resolve(cfg.vocab.object_blocklist));
    }
    Vocabulary vocab{kind, clean_phrases(raw, blocked), st.source};
    st.cleaned = vocab.phrases.size();

    if (kind == VocabKind::event) {
      std::unique_ptr<StructureAnnotator> annotator;
      if (cfg.vocab.event_annotations.empty()) {
        annotator = std::make_unique<HeuristicStructureAnnotator>();
      } else {
        annotator = std::make_unique<FileStructureAnnotator>(
            FileStructureAnnotator::from_file(cfg.resolve(cfg.vocab.event_annotations)));
      }
      vocab.phrases = filter_events(vocab.phrases, *annotator);
      st.structured = vocab.phrases.size();
    }
    if (kind != VocabKind::object) {
      if (!providers.sentence_embedder) throw ConfigError("build-vocab needs providers.sentence_embedder for dedup");
      vocab.phrases = dedup_by_similarity(vocab.phrases, *providers.sentence_embedder, cfg.dedup_threshold);
    }
    if (vocab.phrases.empty()) throw ConfigError("no phrases left for " + std::string(plural_key(kind)));
    st.final_size = vocab.phrases.size();
    save_vocab_embedding(embed_vocab(vocab, *providers.vocab_embedder),
                         dir / (std::string(plural_key(kind)) + ".json"));
    stats[std::string(plural_key(kind))] = to_json(st);
    ++built;
  }
  if (built == 0) throw ConfigError("build-vocab: no phrase sources configured");
  auto manifest = base_manifest(cfg, providers, "build-vocab");
  manifest["stats"] = stats;
  manifest["dedup_threshold"] = cfg.dedup_threshold;
  write_file_atomic(dir / "stats.json", dump_pretty(manifest));
  return {};
}

inline std::map<VocabKind, VocabEmbedding> load_vocab_stores(const RunConfig& cfg) {
  std::map<VocabKind, VocabEmbedding> out;
  for (auto kind : kAllVocabKinds) {
    auto path = cfg.vocab_store_dir() / (std::string(plural_key(kind)) + ".json");
    if (fs::exists(path)) out.emplace(kind, load_vocab_embedding(path));
  }
  if (out.empty()) throw ConfigError("no vocabulary stores under " + cfg.vocab_store_dir().string());
  return out;
}

// ---------------------------------------------------------------------------

inline CommandResult cmd_represent(const RunConfig& cfg) {
  auto providers = make_providers(cfg);
  if (!providers.image_embedder || !providers.captioner) {
    throw ConfigError("represent needs providers.image_embedder and providers.captioner");
  }
  if (cfg.dataset.empty()) throw ConfigError("represent needs a dataset");
  const auto ds = load_dataset(cfg.resolve(cfg.dataset));
  const auto vocabs = load_vocab_stores(cfg);

  // Unique videos in first-seen order.
  std::vector<const DatasetItem*> videos;
  std::set<std::string> seen;
  for (const auto* split : {&ds.train, &ds.test}) {
    for (const auto& item : *split) {
      if (seen.insert(item.video_id).second) videos.push_back(&item);
    }
  }

  RepresentationOptions ropts;
  ropts.one_frame = cfg.ablations.one_frame;
  ropts.reversed = cfg.ablations.reversed;
  ropts.aggregation = {cfg.top_m, cfg.must_rank_within};
  RepresentProviders rp{providers.image_embedder.get(), providers.captioner.get(), providers.frame_extractor.get()};

  const auto dir = cfg.out() / "repr";
  std::vector<std::optional<std::string>> errors(videos.size());
  parallel_for(videos.size(), cfg.providers.parallelism, [&](std::size_t i) {
    const auto& item = *videos[i];
    try {
      auto repr = represent_video(item, vocabs, rp, {cfg.caption_frames, cfg.token_frames}, cfg.top_k, ropts);
      write_file_atomic(dir / (safe_file_name(item.video_id) + ".json"), dump_pretty(to_json(repr)));
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });

  CommandResult result;
  json failed = json::object();
  json ids = json::array();
  for (std::size_t i = 0; i < videos.size(); ++i) {
    if (errors[i]) {
      failed[videos[i]->video_id] = *errors[i];
      result.failures.push_back(videos[i]->video_id + ": " + *errors[i]);
      log(LogLevel::warning, "represent: " + result.failures.back());
    } else {
      ids.push_back(videos[i]->video_id);
    }
  }
  auto manifest = base_manifest(cfg, providers, "represent");
  manifest["videos"] = ids;
  manifest["failures"] = failed;
  manifest["ablations"] = {{"one_frame", cfg.ablations.one_frame}, {"reversed", cfg.ablations.reversed}};
  manifest["frames"] = {{"caption", cfg.caption_frames}, {"token", cfg.token_frames}};
  manifest["aggregation"] = {{"top_k", cfg.top_k}, {"top_m", cfg.top_m}, {"must_rank_within", cfg.must_rank_within}};
  write_file_atomic(dir / "manifest.json", dump_pretty(manifest));
  result.exit_code = result.failures.empty() ? 0 : 1;
  return result;
}

struct LoadedSplit {
  std::vector<LabeledExample> examples;
  std::vector<DatasetItem> items;  // aligned with examples
  std::vector<std::string> missing;
};

/// Pairs dataset rows with their stored representations; rows without one
/// are reported in `missing`.
inline LoadedSplit load_split(const RunConfig& cfg, const std::vector<DatasetItem>& items) {
  LoadedSplit out;
  std::map<std::string, VideoRepresentation> cache;
  for (const auto& item : items) {
    auto it = cache.find(item.video_id);
    if (it == cache.end()) {
      auto path = cfg.out() / "repr" / (safe_file_name(item.video_id) + ".json");
      if (!fs::exists(path)) {
        out.missing.push_back(item.id);
        continue;
      }
      it = cache.emplace(item.video_id, representation_from_json(read_json_file(path))).first;
    }
    out.examples.push_back(make_example(item, it->second, cfg.task));
    out.items.push_back(item);
  }
  return out;
}

inline RunOptions run_options(const RunConfig& cfg, std::uint64_t seed) {
  RunOptions o;
  o.M = cfg.M;
  o.N = cfg.N;
  o.seed = seed;
  o.one_frame = cfg.ablations.one_frame;
  o.reversed = cfg.ablations.reversed;
  o.static_markers = cfg.ablations.static_markers;
  o.params = {cfg.temperature, cfg.max_tokens, cfg.stop};
  o.parallelism = cfg.providers.parallelism;
  o.instruction = cfg.instruction;
  return o;
}

inline fs::path seed_dir(const RunConfig& cfg, std::uint64_t seed) {
  return cfg.out() / "run" / ("seed_" + std::to_string(seed));
}

inline CommandResult cmd_run(const RunConfig& cfg) {
  auto providers = make_providers(cfg);
  if (!providers.completion) throw ConfigError("run needs providers.completion");
  if (cfg.N > 0 && !providers.sentence_embedder) throw ConfigError("run needs providers.sentence_embedder");
  if (cfg.dataset.empty()) throw ConfigError("run needs a dataset");
  const auto ds = load_dataset(cfg.resolve(cfg.dataset));
  auto train = load_split(cfg, ds.train);
  auto test = load_split(cfg, ds.test);
  if (test.examples.empty()) throw ConfigError("run: no test instances with representations");

  CommandResult result;
  for (const auto& id : test.missing) result.failures.push_back(id + ": no representation");
  HashingTextEmbedder unused(1);
  TextEmbedder& sentence = providers.sentence_embedder ? *providers.sentence_embedder : unused;

  for (auto seed : cfg.seeds) {
    auto run = run_task(train.examples, test.examples, cfg.task, run_options(cfg, seed), sentence,
                        *providers.completion);
    const auto dir = seed_dir(cfg, seed);
    const std::string manifest_name = "seed_" + std::to_string(seed) + "/manifest.json";

    std::string lines;
    for (const auto& ex : test.examples) {
      auto it = run.predictions.find(ex.example_id);
      if (it == run.predictions.end()) continue;
      json line = {{"id", ex.example_id},
                   {"video_id", ex.representation.video_id},
                   {"prompt_manifest_ref", manifest_name + "#" + ex.example_id},
                   {"prediction", it->second}};
      lines += line.dump() + "\n";
    }
    write_file_atomic(dir / "predictions.jsonl", lines);

    json prompts = json::array();
    for (const auto& rec : run.prompts) {
      const auto file = "prompts/" + safe_file_name(rec.id) + ".txt";
      write_file_atomic(dir / file, rec.prompt);
      prompts.push_back({{"id", rec.id},
                         {"video_id", rec.video_id},
                         {"example_ids", rec.example_ids},
                         {"prompt_file", file},
                         {"prompt_sha256", sha256_hex(rec.prompt)},
                         {"char_count", rec.stats.char_count},
                         {"line_count", rec.stats.line_count},
                         {"example_count", rec.stats.example_count}});
    }
    auto manifest = base_manifest(cfg, providers, "run");
    manifest["seed"] = seed;
    manifest["M"] = cfg.M;
    manifest["N"] = cfg.N;
    manifest["support_ids"] = run.support_ids;
    manifest["prompts"] = prompts;
    manifest["failures"] = run.failures;
    manifest["params"] = run_options(cfg, seed).params.to_json();
    manifest["ablations"] = {{"one_frame", cfg.ablations.one_frame},
                             {"reversed", cfg.ablations.reversed},
                             {"static_markers", cfg.ablations.static_markers}};
    write_file_atomic(dir / "manifest.json", dump_pretty(manifest));
    for (const auto& [id, err] : run.failures) {
      result.failures.push_back("seed " + std::to_string(seed) + " " + id + ": " + err);
    }
  }
  result.exit_code = result.failures.empty() ? 0 : 1;
  return result;
}

inline std::map<std::string, std::string> read_predictions(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read predictions: " + path.string());
  std::map<std::string, std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (trim_view(line).empty()) continue;
    try {
      auto j = json::parse(line);
      auto id = j.contains("id") ? j["id"].get<std::string>() : j.at("video_id").get<std::string>();
      out[id] = j.at("prediction").get<std::string>();
    } catch (const json::exception& e) {
      throw ConfigError("bad prediction line in " + path.string() + ": " + e.what());
    }
  }
  return out;
}

inline CommandResult cmd_eval(const RunConfig& cfg) {
  auto providers = make_providers(cfg);
  if (cfg.dataset.empty()) throw ConfigError("eval needs a dataset");
  const auto ds = load_dataset(cfg.resolve(cfg.dataset));
  if (ds.test.empty()) throw ConfigError("eval: dataset has no test split");
  std::set<std::string> gold_ids;
  for (const auto& g : ds.test) gold_ids.insert(g.id);

  CommandResult result;
  std::vector<std::map<std::string, double>> per_seed;
  for (auto seed : cfg.seeds) {
    auto preds = read_predictions(seed_dir(cfg, seed) / "predictions.jsonl");
    for (const auto& [id, p] : preds) {
      if (!gold_ids.contains(id)) throw ConfigError("eval: prediction '" + id + "' has no gold instance");
    }
    for (const auto& id : gold_ids) {
      if (!preds.contains(id)) result.failures.push_back("seed " + std::to_string(seed) + " " + id + ": no prediction");
    }
    per_seed.push_back(evaluate_run(cfg.task, preds, ds.test, providers.sentence_embedder.get()));
  }
  auto report = make_report(cfg.task, cfg.seeds, per_seed);
  auto doc = to_json(report);
  doc["config_hash"] = config_hash(cfg);
  doc["instances"] = ds.test.size();
  doc["missing_predictions"] = result.failures;
  write_file_atomic(cfg.out() / "eval" / "report.json", dump_pretty(doc));
  result.exit_code = result.failures.empty() ? 0 : 1;
  return result;
}

/// Captions every test-split video (the unlabeled pool) using the train
/// split as the labeled support pool. Uses the first configured seed.
inline CommandResult cmd_pseudo_label(const RunConfig& cfg) {
  auto providers = make_providers(cfg);
  if (!providers.completion) throw ConfigError("pseudo-label needs providers.completion");
  if (cfg.N > 0 && !providers.sentence_embedder) throw ConfigError("pseudo-label needs providers.sentence_embedder");
  if (cfg.dataset.empty()) throw ConfigError("pseudo-label needs a dataset");
  auto task = cfg.task == TaskKind::caption_with_asr ? TaskKind::caption_with_asr : TaskKind::caption;
  RunConfig caption_cfg = cfg;
  caption_cfg.task = task;
  const auto ds = load_dataset(cfg.resolve(cfg.dataset));
  auto train = load_split(caption_cfg, ds.train);

  // One query per video.
  std::vector<DatasetItem> videos;
  std::set<std::string> seen;
  for (const auto& item : ds.test) {
    if (seen.insert(item.video_id).second) {
      auto v = item;
      v.id = item.video_id;
      videos.push_back(std::move(v));
    }
  }
  auto pool = load_split(caption_cfg, videos);
  HashingTextEmbedder unused(1);
  TextEmbedder& sentence = providers.sentence_embedder ? *providers.sentence_embedder : unused;
  auto res = generate_pseudo_labels(train.examples, pool.examples, run_options(cfg, cfg.seeds.front()), sentence,
                                    *providers.completion, task);
  for (const auto& id : pool.missing) res.failures[id] = "no representation";

  write_file_atomic(cfg.out() / "pseudo_labels.tsv", pseudo_labels_tsv(res.captions));
  auto manifest = base_manifest(cfg, providers, "pseudo-label");
  manifest["seed"] = cfg.seeds.front();
  manifest["params"] = res.params.to_json();
  manifest["labeled"] = res.captions.size();
  manifest["failures"] = res.failures;
  write_file_atomic(cfg.out() / "pseudo_labels_manifest.json", dump_pretty(manifest));

  CommandResult result;
  for (const auto& [id, err] : res.failures) result.failures.push_back(id + ": " + err);
  result.exit_code = result.failures.empty() ? 0 : 1;
  return result;
}

}  // namespace vidprompt::cli

// Copyright 2026 The vidprompt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Dataset records, representation building through providers, task runs,
// evaluation reports and pseudo-label generation.

#include "vidprompt/metrics.hpp"
#include "vidprompt/prompt.hpp"

namespace vidprompt {

/// One dataset row. `id` names the instance (a QA question, a caption
/// target); several instances may share a `video_id`.
struct DatasetItem {
  std::string id;
  std::string video_id;
  long long num_frames = 0;
  std::optional<std::string> video_path;
  std::optional<std::string> asr;
  std::vector<std::string> references;  // caption golds
  std::optional<std::string> question;
  std::optional<std::string> answer;
  std::vector<std::string> candidates;
  std::optional<std::size_t> answer_index;

  /// The gold target text an in-context example shows after the suffix.
  std::string annotation(TaskKind task) const {
    switch (task) {
      case TaskKind::caption:
      case TaskKind::caption_with_asr:
        return references.empty() ? std::string{} : references.front();
      case TaskKind::qa:
        return answer.value_or("");
      case TaskKind::vlep:
        if (answer_index && *answer_index < candidates.size()) return candidates[*answer_index];
        return {};
    }
    return {};
  }
};

struct Dataset {
  std::vector<DatasetItem> train;
  std::vector<DatasetItem> test;
};

inline DatasetItem dataset_item_from_json(const json& j) {
  DatasetItem d;
  d.video_id = j.at("video_id").get<std::string>();
  d.id = j.value("id", d.video_id);
  d.num_frames = j.value("num_frames", 0LL);
  auto opt_str = [&](const char* key) -> std::optional<std::string> {
    if (j.contains(key) && !j[key].is_null()) return j[key].get<std::string>();
    return std::nullopt;
  };
  d.video_path = opt_str("video_path");
  d.asr = opt_str("asr");
  d.question = opt_str("question");
  d.answer = opt_str("answer");
  if (j.contains("references")) d.references = j["references"].get<std::vector<std::string>>();
  if (j.contains("candidates")) d.candidates = j["candidates"].get<std::vector<std::string>>();
  if (j.contains("answer_index") && !j["answer_index"].is_null()) d.answer_index = j["answer_index"].get<std::size_t>();
  return d;
}

inline Dataset load_dataset(const std::filesystem::path& path) {
  auto j = read_json_file(path);
  Dataset ds;
  for (const char* split : {"train", "test"}) {
    if (!j.contains(split)) continue;
    auto& out = std::string_view(split) == "train" ? ds.train : ds.test;
    std::set<std::string> ids;
    for (const auto& item : j[split]) {
      out.push_back(dataset_item_from_json(item));
      if (!ids.insert(out.back().id).second) {
        throw ConfigError("dataset " + path.string() + ": duplicate id '" + out.back().id + "' in " + split);
      }
    }
  }
  return ds;
}

inline LabeledExample make_example(const DatasetItem& item, const VideoRepresentation& repr, TaskKind task) {
  LabeledExample ex;
  ex.example_id = item.id;
  ex.representation = repr;
  ex.annotation = item.annotation(task);
  ex.question = item.question;
  ex.candidates = item.candidates;
  ex.answer_index = item.answer_index;
  ex.references = item.references;
  return ex;
}

// ---------------------------------------------------------------------------
// Building representations through providers

struct FrameCounts {
  int caption_frames = 4;
  int token_frames = 8;
};

struct RepresentProviders {
  ImageEmbedder* image_embedder = nullptr;
  CaptionProvider* captioner = nullptr;
  FrameExtractor* frame_extractor = nullptr;  // optional; used when a video_path is set
};

/// Frame reference for mocks: "<video_id>/<frame_index>".
inline std::string frame_ref(const std::string& video_id, int frame_index) {
  return video_id + "/" + std::to_string(frame_index);
}

inline VideoRepresentation represent_video(const DatasetItem& item,
                                           const std::map<VocabKind, VocabEmbedding>& vocabs,
                                           const RepresentProviders& providers, FrameCounts counts, int top_k,
                                           RepresentationOptions opts) {
  if (!providers.image_embedder || !providers.captioner) throw ConfigError("represent_video: providers missing");
  const auto token_idx = sample_frame_indices(item.num_frames, counts.token_frames);
  const auto caption_idx = sample_frame_indices(item.num_frames, counts.caption_frames);

  auto refs_for = [&](const std::vector<int>& idx, std::string_view level) {
    std::vector<std::string> refs;
    if (providers.frame_extractor && item.video_path) {
      refs = providers.frame_extractor->extract_frames(*item.video_path, static_cast<int>(idx.size()), level);
    } else {
      for (int i : idx) refs.push_back(frame_ref(item.video_id, i));
    }
    return refs;
  };

  std::vector<FrameEmbedding> frames;
  const auto token_refs = refs_for(token_idx, "token");
  for (std::size_t i = 0; i < token_idx.size(); ++i) {
    frames.push_back({token_idx[i], providers.image_embedder->embed_image(token_refs[i])});
  }
  auto per_frame = tokenize_video(frames, vocabs, top_k);

  std::vector<FrameCaption> captions;
  const auto caption_refs = refs_for(caption_idx, "caption");
  for (std::size_t i = 0; i < caption_idx.size(); ++i) {
    auto c = providers.captioner->caption_frame(caption_refs[i]);
    captions.push_back({caption_idx[i], c.caption, c.filter_score});
  }
  opts.frame_count = item.num_frames;
  return build_representation(item.video_id, std::move(captions), per_frame, item.asr, opts);
}

// ---------------------------------------------------------------------------
// Task runs

struct RunOptions {
  std::size_t M = 10;
  std::size_t N = 5;
  std::uint64_t seed = 0;
  bool one_frame = false;
  bool reversed = false;
  bool static_markers = false;
  CompletionParams params;
  std::size_t parallelism = 4;
  std::optional<std::string> instruction;
};

struct PromptRecord {
  std::string id;
  std::string video_id;
  std::vector<std::string> example_ids;  // in prompt order
  std::string prompt;
  PromptStats stats;
};

struct TaskRun {
  TaskKind task = TaskKind::caption;
  std::uint64_t seed = 0;
  std::size_t M = 0;
  std::size_t N = 0;
  std::vector<std::string> support_ids;
  std::vector<PromptRecord> prompts;               // one per query, dataset order
  std::map<std::string, std::string> predictions;  // id -> generated text
  std::map<std::string, std::string> failures;     // id -> error message
};

namespace detail {
inline VideoRepresentation apply_run_ablations(VideoRepresentation r, const RunOptions& opts) {
  if (opts.one_frame && !r.one_frame) {
    throw ConfigError("representation '" + r.video_id + "' was built without the one_frame ablation");
  }
  if (!opts.one_frame && r.one_frame) {
    throw ConfigError("representation '" + r.video_id + "' was built with the one_frame ablation");
  }
  if (r.reversed != opts.reversed) r = reverse_order(std::move(r));
  return r;
}
}  // namespace detail

/// Builds a prompt for every query, completes it and records the prediction.
/// Provider failures are recorded per query; the run continues.
inline TaskRun run_task(std::span<const LabeledExample> train, std::span<const LabeledExample> queries, TaskKind task,
                        const RunOptions& opts, TextEmbedder& embedder, CompletionProvider& llm) {
  TaskRun run;
  run.task = task;
  run.seed = opts.seed;
  run.M = opts.M;
  run.N = opts.N;

  SupportSet support;
  if (opts.N > 0 && !train.empty()) {
    std::vector<LabeledExample> prepared;
    for (const auto& ex : train) {
      auto copy = ex;
      copy.representation = detail::apply_run_ablations(copy.representation, opts);
      prepared.push_back(std::move(copy));
    }
    support = sample_support(prepared, opts.M, opts.seed);
    run.support_ids = support.example_ids();
  }
  const auto style = opts.static_markers ? MarkerStyle::none : MarkerStyle::temporal;

  struct Slot {
    std::optional<PromptRecord> record;
    std::optional<std::string> prediction;
    std::optional<std::string> failure;
  };
  std::vector<Slot> slots(queries.size());
  parallel_for(queries.size(), opts.parallelism, [&](std::size_t i) {
    auto query = queries[i];
    auto& slot = slots[i];
    try {
      query.representation = detail::apply_run_ablations(query.representation, opts);
      std::vector<LabeledExample> context;
      if (opts.N > 0 && !support.examples.empty()) {
        context = select_in_context(support, example_key(query, task), opts.N, task, embedder);
      }
      auto prompt = build_prompt(task, context, query, style, opts.instruction);
      PromptRecord rec{query.example_id, query.representation.video_id, {}, prompt.rendered, prompt_stats(prompt)};
      for (const auto& c : context) rec.example_ids.push_back(c.example_id);
      slot.record = std::move(rec);
      slot.prediction = trim(llm.complete(prompt.rendered, opts.params));
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      slot.failure = e.what();
    }
  });
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const auto& id = queries[i].example_id;
    auto& slot = slots[i];
    if (slot.record) run.prompts.push_back(std::move(*slot.record));
    if (slot.prediction) run.predictions[id] = std::move(*slot.prediction);
    if (slot.failure) {
      log(LogLevel::warning, "run_task: '" + id + "' failed: " + *slot.failure);
      run.failures[id] = std::move(*slot.failure);
    }
  }
  return run;
}

// ---------------------------------------------------------------------------
// Evaluation

/// Corpus metrics for one run. Missing predictions score as empty strings
/// for captioning and as wrong answers for QA/VLEP.
inline std::map<std::string, double> evaluate_run(TaskKind task, const std::map<std::string, std::string>& predictions,
                                                  std::span<const DatasetItem> golds, TextEmbedder* embedder = nullptr) {
  if (golds.empty()) throw Error("evaluate_run: no gold instances");
  std::map<std::string, double> out;
  switch (task) {
    case TaskKind::caption:
    case TaskKind::caption_with_asr: {
      std::vector<std::string> hyps;
      std::vector<std::vector<std::string>> refs;
      for (const auto& g : golds) {
        if (g.references.empty()) throw Error("evaluate_run: '" + g.id + "' has no reference captions");
        auto it = predictions.find(g.id);
        hyps.push_back(it == predictions.end() ? std::string{} : it->second);
        refs.push_back(g.references);
      }
      out["BLEU-4"] = bleu4(hyps, refs);
      out["ROUGE-L"] = rouge_l(hyps, refs);
      if (golds.size() >= 2) out["CIDEr-D"] = cider_d(hyps, refs);
      break;
    }
    case TaskKind::qa: {
      std::map<std::string, std::string> gold_answers;
      for (const auto& g : golds) {
        if (!g.answer) throw Error("evaluate_run: '" + g.id + "' has no gold answer");
        gold_answers[g.id] = *g.answer;
      }
      out["accuracy"] = qa_accuracy(predictions, gold_answers);
      break;
    }
    case TaskKind::vlep: {
      if (!embedder) throw ConfigError("evaluate_run: VLEP needs a text embedder for candidate mapping");
      std::size_t hits = 0;
      for (const auto& g : golds) {
        if (!g.answer_index || g.candidates.empty()) throw Error("evaluate_run: '" + g.id + "' has no gold candidate");
        auto it = predictions.find(g.id);
        if (it == predictions.end() || trim_view(it->second).empty()) continue;
        if (map_to_candidate(it->second, g.candidates, *embedder) == *g.answer_index) ++hits;
      }
      out["accuracy"] = static_cast<double>(hits) / static_cast<double>(golds.size());
      break;
    }
  }
  return out;
}

struct MetricSummary {
  std::vector<double> per_seed;
  double mean = 0.0;
  double std = 0.0;
};

struct EvalReport {
  TaskKind task = TaskKind::caption;
  std::vector<std::uint64_t> seeds;
  std::map<std::string, MetricSummary> metrics;
  std::vector<std::string> unavailable;  // metrics this build does not compute
};

inline EvalReport make_report(TaskKind task, const std::vector<std::uint64_t>& seeds,
                              const std::vector<std::map<std::string, double>>& per_seed) {
  if (seeds.size() != per_seed.size() || seeds.empty()) throw Error("make_report: one metric set per seed required");
  EvalReport r;
  r.task = task;
  r.seeds = seeds;
  for (const auto& [name, v] : per_seed.front()) {
    MetricSummary m;
    for (const auto& s : per_seed) {
      auto it = s.find(name);
      if (it == s.end()) throw Error("make_report: metric " + name + " missing for a seed");
      m.per_seed.push_back(it->second);
    }
    auto ms = mean_std(m.per_seed);
    m.mean = ms.mean;
    m.std = ms.std;
    r.metrics[name] = std::move(m);
  }
  if (task == TaskKind::caption || task == TaskKind::caption_with_asr) r.unavailable.push_back("METEOR");
  return r;
}

inline json to_json(const EvalReport& r) {
  json metrics = json::object();
  for (const auto& [name, m] : r.metrics) {
    metrics[name] = {{"per_seed", m.per_seed}, {"mean", m.mean}, {"std", m.std}};
  }
  return {{"task", std::string(to_string(r.task))},
          {"seeds", r.seeds},
          {"metrics", metrics},
          {"unavailable", r.unavailable}};
}

// ---------------------------------------------------------------------------
// Pseudo labels

struct PseudoLabelResult {
  std::map<std::string, std::string> captions;  // video id -> caption
  std::map<std::string, std::string> failures;
  CompletionParams params;  // as actually used; temperature is always 0
};

/// Captions unlabeled videos with the captioning prompt under greedy
/// decoding, whatever temperature the caller configured.
inline PseudoLabelResult generate_pseudo_labels(std::span<const LabeledExample> labeled,
                                                std::span<const LabeledExample> videos, RunOptions opts,
                                                TextEmbedder& embedder, CompletionProvider& llm,
                                                TaskKind task = TaskKind::caption) {
  if (task != TaskKind::caption && task != TaskKind::caption_with_asr) {
    throw ConfigError("pseudo labels are captions; task must be caption or caption_with_asr");
  }
  opts.params.temperature = 0.0;
  auto run = run_task(labeled, videos, task, opts, embedder, llm);
  PseudoLabelResult out;
  out.params = opts.params;
  out.failures = std::move(run.failures);
  for (auto& [id, text] : run.predictions) {
    if (trim_view(text).empty()) {
      out.failures[id] = "empty generation";
    } else {
      out.captions[id] = std::move(text);
    }
  }
  return out;
}

/// "video_id<TAB>caption" lines sorted by id; tabs and newlines inside
/// captions become spaces.
inline std::string pseudo_labels_tsv(const std::map<std::string, std::string>& captions) {
  std::string out;
  for (const auto& [id, caption] : captions) {
    std::string clean = caption;
    for (auto& c : clean) {
      if (c == '\t' || c == '\n' || c == '\r') c = ' ';
    }
    out += id + "\t" + trim(clean) + "\n";
  }
  return out;
}

}  // namespace vidprompt

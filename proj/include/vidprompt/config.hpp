// Copyright 2026 The vidprompt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Run configuration (one JSON file) and provider construction from it.

#include "vidprompt/tasks.hpp"

namespace vidprompt {

/// How to obtain one provider. `kind` is one of:
///   text:       "hashing" (dim), "table" (path), "http" (dim, model, endpoint)
///   image:      "table" (path; scenes use the vocabulary embedder), "http" (dim, model, endpoint)
///   captioner:  "table" (path), "http" (model, endpoint)
///   completion: "scripted" (path), "http" (model, endpoint)
///   frames:     "http" (endpoint)
struct ProviderSpec {
  std::string kind;
  std::string path;
  std::size_t dim = 0;
  std::string model;
  std::string endpoint;

  bool empty() const { return kind.empty(); }
  bool operator==(const ProviderSpec&) const = default;
};

struct ProvidersConfig {
  ProviderSpec vocab_embedder;     // text side of the image-text encoder
  ProviderSpec sentence_embedder;  // dedup, example selection, candidate mapping
  ProviderSpec image_embedder;
  ProviderSpec captioner;
  ProviderSpec completion;
  ProviderSpec frame_extractor;
  std::string endpoint;  // default for http providers; falls back to VIDPROMPT_ENDPOINT
  std::string cache_dir;
  std::size_t parallelism = 4;

  bool operator==(const ProvidersConfig&) const = default;
};

struct VocabSources {
  std::string objects;
  std::string events;
  std::string attributes;
  std::string object_blocklist;
  std::string event_annotations;  // precomputed verb/argument labels; heuristic when empty

  bool operator==(const VocabSources&) const = default;
};

struct Ablations {
  bool one_frame = false;
  bool reversed = false;
  bool static_markers = false;

  bool operator==(const Ablations&) const = default;
};

struct RunConfig {
  TaskKind task = TaskKind::caption;
  std::string dataset;
  VocabSources vocab;
  std::string vocab_dir;  // embedded stores; defaults to <output_dir>/vocab
  ProvidersConfig providers;
  std::size_t M = 10;
  std::size_t N = 5;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  int caption_frames = 4;
  int token_frames = 8;
  int top_k = 5;
  int top_m = 4;
  int must_rank_within = 2;
  double dedup_threshold = 0.9;
  Ablations ablations;
  double temperature = 0.0;
  int max_tokens = 64;
  std::vector<std::string> stop{"\n"};
  std::optional<std::string> instruction;
  std::string output_dir = "out";

  std::filesystem::path base_dir;  // relative paths resolve here; not serialized

  bool operator==(const RunConfig&) const = default;

  std::filesystem::path resolve(const std::string& p) const {
    if (p.empty()) return {};
    std::filesystem::path path(p);
    return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
  }
  std::filesystem::path out() const { return resolve(output_dir); }
  std::filesystem::path vocab_store_dir() const {
    return vocab_dir.empty() ? out() / "vocab" : resolve(vocab_dir);
  }

  void validate() const {
    if (M < 1) throw ConfigError("M must be >= 1");
    if (seeds.empty()) throw ConfigError("at least one seed is required");
    if (caption_frames < 1 || token_frames < 1) throw ConfigError("frame counts must be >= 1");
    if (top_k < 1 || top_m < 1 || must_rank_within < 1) throw ConfigError("top_k, top_m, must_rank_within must be >= 1");
    if (!(dedup_threshold > 0.0 && dedup_threshold <= 1.0)) throw ConfigError("dedup_threshold must be in (0, 1]");
    if (temperature < 0.0) throw ConfigError("temperature must be >= 0");
    if (max_tokens < 1) throw ConfigError("max_tokens must be >= 1");
    if (providers.parallelism < 1) throw ConfigError("parallelism must be >= 1");
  }
};

inline json to_json(const ProviderSpec& s) {
  json j = json::object();
  if (s.empty()) return j;
  j["kind"] = s.kind;
  if (!s.path.empty()) j["path"] = s.path;
  if (s.dim) j["dim"] = s.dim;
  if (!s.model.empty()) j["model"] = s.model;
  if (!s.endpoint.empty()) j["endpoint"] = s.endpoint;
  return j;
}

inline ProviderSpec provider_spec_from_json(const json& j) {
  ProviderSpec s;
  if (j.is_null() || j.empty()) return s;
  s.kind = j.at("kind").get<std::string>();
  s.path = j.value("path", "");
  s.dim = j.value("dim", std::size_t{0});
  s.model = j.value("model", "");
  s.endpoint = j.value("endpoint", "");
  return s;
}

inline json to_json(const RunConfig& c) {
  json j;
  j["task"] = std::string(to_string(c.task));
  j["dataset"] = c.dataset;
  j["vocab"] = {{"objects", c.vocab.objects},
                {"events", c.vocab.events},
                {"attributes", c.vocab.attributes},
                {"object_blocklist", c.vocab.object_blocklist},
                {"event_annotations", c.vocab.event_annotations}};
  j["vocab_dir"] = c.vocab_dir;
  j["providers"] = {{"vocab_embedder", to_json(c.providers.vocab_embedder)},
                    {"sentence_embedder", to_json(c.providers.sentence_embedder)},
                    {"image_embedder", to_json(c.providers.image_embedder)},
                    {"captioner", to_json(c.providers.captioner)},
                    {"completion", to_json(c.providers.completion)},
                    {"frame_extractor", to_json(c.providers.frame_extractor)},
                    {"endpoint", c.providers.endpoint},
                    {"cache_dir", c.providers.cache_dir},
                    {"parallelism", c.providers.parallelism}};
  j["M"] = c.M;
  j["N"] = c.N;
  j["seeds"] = c.seeds;
  j["caption_frames"] = c.caption_frames;
  j["token_frames"] = c.token_frames;
  j["top_k"] = c.top_k;
  j["top_m"] = c.top_m;
  j["must_rank_within"] = c.must_rank_within;
  j["dedup_threshold"] = c.dedup_threshold;
  j["ablations"] = {{"one_frame", c.ablations.one_frame},
                    {"reversed", c.ablations.reversed},
                    {"static_markers", c.ablations.static_markers}};
  j["temperature"] = c.temperature;
  j["max_tokens"] = c.max_tokens;
  j["stop"] = c.stop;
  j["instruction"] = c.instruction ? json(*c.instruction) : json(nullptr);
  j["output_dir"] = c.output_dir;
  return j;
}

/// Missing keys keep their defaults; unknown top-level keys are rejected.
inline RunConfig run_config_from_json(const json& j) {
  static const std::set<std::string> known = {
      "task",  "dataset", "vocab",          "vocab_dir",       "providers",   "M",          "N",
      "seeds", "caption_frames", "token_frames", "top_k",      "top_m",       "must_rank_within",
      "dedup_threshold", "ablations", "temperature", "max_tokens", "stop", "instruction", "output_dir"};
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, v] : j.items()) {
    if (!known.contains(key)) throw ConfigError("unknown config key '" + key + "'");
  }
  RunConfig c;
  try {
    if (j.contains("task")) c.task = parse_task_kind(j["task"].get<std::string>());
    c.dataset = j.value("dataset", c.dataset);
    if (j.contains("vocab")) {
      const auto& v = j["vocab"];
      c.vocab.objects = v.value("objects", "");
      c.vocab.events = v.value("events", "");
      c.vocab.attributes = v.value("attributes", "");
      c.vocab.object_blocklist = v.value("object_blocklist", "");
      c.vocab.event_annotations = v.value("event_annotations", "");
    }
    c.vocab_dir = j.value("vocab_dir", c.vocab_dir);
    if (j.contains("providers")) {
      const auto& p = j["providers"];
      auto spec = [&](const char* key) { return p.contains(key) ? provider_spec_from_json(p[key]) : ProviderSpec{}; };
      c.providers.vocab_embedder = spec("vocab_embedder");
      c.providers.sentence_embedder = spec("sentence_embedder");
      c.providers.image_embedder = spec("image_embedder");
      c.providers.captioner = spec("captioner");
      c.providers.completion = spec("completion");
      c.providers.frame_extractor = spec("frame_extractor");
      c.providers.endpoint = p.value("endpoint", "");
      c.providers.cache_dir = p.value("cache_dir", "");
      c.providers.parallelism = p.value("parallelism", c.providers.parallelism);
    }
    c.M = j.value("M", c.M);
    c.N = j.value("N", c.N);
    if (j.contains("seeds")) c.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
    c.caption_frames = j.value("caption_frames", c.caption_frames);
    c.token_frames = j.value("token_frames", c.token_frames);
    c.top_k = j.value("top_k", c.top_k);
    c.top_m = j.value("top_m", c.top_m);
    c.must_rank_within = j.value("must_rank_within", c.must_rank_within);
    c.dedup_threshold = j.value("dedup_threshold", c.dedup_threshold);
    if (j.contains("ablations")) {
      const auto& a = j["ablations"];
      c.ablations.one_frame = a.value("one_frame", false);
      c.ablations.reversed = a.value("reversed", false);
      c.ablations.static_markers = a.value("static_markers", false);
    }
    c.temperature = j.value("temperature", c.temperature);
    c.max_tokens = j.value("max_tokens", c.max_tokens);
    if (j.contains("stop")) c.stop = j["stop"].get<std::vector<std::string>>();
    if (j.contains("instruction") && !j["instruction"].is_null()) c.instruction = j["instruction"].get<std::string>();
    c.output_dir = j.value("output_dir", c.output_dir);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  }
  c.validate();
  return c;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  auto c = run_config_from_json(read_json_file(path));
  c.base_dir = path.parent_path();
  return c;
}

inline std::string config_hash(const RunConfig& c) { return sha256_hex(to_json(c).dump()); }

// ---------------------------------------------------------------------------

struct Providers {
  std::shared_ptr<TextEmbedder> vocab_embedder;
  std::shared_ptr<TextEmbedder> sentence_embedder;
  std::shared_ptr<ImageEmbedder> image_embedder;
  std::shared_ptr<CaptionProvider> captioner;
  std::shared_ptr<CompletionProvider> completion;
  std::shared_ptr<FrameExtractor> frame_extractor;

  json identities() const {
    json j = json::object();
    if (vocab_embedder) j["vocab_embedder"] = vocab_embedder->identity().str();
    if (sentence_embedder) j["sentence_embedder"] = sentence_embedder->identity().str();
    if (image_embedder) j["image_embedder"] = image_embedder->identity().str();
    if (captioner) j["captioner"] = captioner->identity().str();
    if (completion) j["completion"] = completion->identity().str();
    return j;
  }
};

inline Providers make_providers(const RunConfig& cfg) {
  const auto& pc = cfg.providers;
  auto http = [&](const ProviderSpec& s) {
    HttpOptions o;
    o.endpoint = s.endpoint.empty() ? pc.endpoint : s.endpoint;
    return HttpOptions::from_env(o);
  };
  std::shared_ptr<DiskCache> cache;
  if (!pc.cache_dir.empty()) cache = std::make_shared<DiskCache>(cfg.resolve(pc.cache_dir));

  auto text = [&](const ProviderSpec& s) -> std::shared_ptr<TextEmbedder> {
    if (s.empty()) return nullptr;
    std::shared_ptr<TextEmbedder> e;
    if (s.kind == "hashing") {
      e = std::make_shared<HashingTextEmbedder>(s.dim ? s.dim : 256);
    } else if (s.kind == "table") {
      e = TableTextEmbedder::from_file(cfg.resolve(s.path));
    } else if (s.kind == "http") {
      if (!s.dim) throw ConfigError("http text embedder needs dim");
      e = std::make_shared<HttpTextEmbedder>(http(s), s.dim, s.model.empty() ? "remote" : s.model);
    } else {
      throw ConfigError("unknown text embedder kind '" + s.kind + "'");
    }
    if (cache && s.kind == "http") e = std::make_shared<CachingTextEmbedder>(e, cache);
    return e;
  };

  Providers p;
  p.vocab_embedder = text(pc.vocab_embedder);
  p.sentence_embedder = text(pc.sentence_embedder);
  if (!pc.image_embedder.empty()) {
    const auto& s = pc.image_embedder;
    if (s.kind == "table") {
      p.image_embedder = TableImageEmbedder::from_file(cfg.resolve(s.path), p.vocab_embedder);
    } else if (s.kind == "http") {
      if (!s.dim) throw ConfigError("http image embedder needs dim");
      p.image_embedder = std::make_shared<HttpImageEmbedder>(http(s), s.dim, s.model.empty() ? "remote" : s.model);
    } else {
      throw ConfigError("unknown image embedder kind '" + s.kind + "'");
    }
  }
  if (!pc.captioner.empty()) {
    const auto& s = pc.captioner;
    if (s.kind == "table") {
      p.captioner = TableCaptionProvider::from_file(cfg.resolve(s.path));
    } else if (s.kind == "http") {
      p.captioner = std::make_shared<HttpCaptionProvider>(http(s), s.model.empty() ? "remote" : s.model);
    } else {
      throw ConfigError("unknown captioner kind '" + s.kind + "'");
    }
  }
  if (!pc.completion.empty()) {
    const auto& s = pc.completion;
    if (s.kind == "scripted") {
      p.completion = ScriptedCompletionProvider::from_file(cfg.resolve(s.path));
    } else if (s.kind == "http") {
      p.completion = std::make_shared<HttpCompletionProvider>(http(s), s.model.empty() ? "remote" : s.model);
    } else {
      throw ConfigError("unknown completion kind '" + s.kind + "'");
    }
    if (cache) p.completion = std::make_shared<CachingCompletionProvider>(p.completion, cache);
  }
  if (!pc.frame_extractor.empty()) {
    if (pc.frame_extractor.kind != "http") throw ConfigError("frame extractor must be http");
    p.frame_extractor = std::make_shared<HttpFrameExtractor>(http(pc.frame_extractor));
  }
  return p;
}

}  // namespace vidprompt

// Copyright 2026 The vidprompt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Contracts for every external model call (text/image embedding, frame
// captioning, LLM completion), file-backed mocks, HTTP clients speaking the
// sidecar wire protocol, and a content-addressed on-disk response cache.

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <sstream>
#include <thread>

#include <openssl/evp.h>

#include "httplib.h"
#include "json.hpp"
#include "vidprompt/common.hpp"

namespace vidprompt {

using json = nlohmann::json;

/// Failure reaching a backend (connection refused, timeout, ...).
class TransportError : public Error {
 public:
  using Error::Error;
};

/// Backend answered with an error payload or an unusable response.
class ProviderError : public Error {
 public:
  ProviderError(std::string msg, int status = 0) : Error(std::move(msg)), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

struct ProviderIdentity {
  std::string provider;
  std::string model;

  std::string str() const { return provider + "/" + model; }
  bool operator==(const ProviderIdentity&) const = default;
};

inline std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("sha256 failed");
  }
  std::ostringstream os;
  for (unsigned i = 0; i < len; ++i) {
    os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return os.str();
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read file: " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline json read_json_file(const std::filesystem::path& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError("invalid JSON in " + path.string() + ": " + e.what());
  }
}

/// Write-temp-then-rename so readers never observe a partial file.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view data) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  static std::atomic<std::uint64_t> counter{0};
  auto tmp = path;
  tmp += ".tmp." + std::to_string(counter.fetch_add(1)) + "." +
         std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write file: " + tmp.string());
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw ConfigError("short write: " + tmp.string());
  }
  fs::rename(tmp, path);
}

// ---------------------------------------------------------------------------
// Provider interfaces

class TextEmbedder {
 public:
  virtual ~TextEmbedder() = default;
  virtual ProviderIdentity identity() const = 0;
  virtual std::size_t dim() const = 0;
  /// Order-aligned unit-norm vectors, one per input.
  virtual std::vector<Vector> embed_text(std::span<const std::string> batch) = 0;

  Vector embed_one(const std::string& text) {
    auto out = embed_text(std::span<const std::string>(&text, 1));
    return std::move(out.at(0));
  }
};

class ImageEmbedder {
 public:
  virtual ~ImageEmbedder() = default;
  virtual ProviderIdentity identity() const = 0;
  virtual std::size_t dim() const = 0;
  virtual Vector embed_image(const std::string& frame_ref) = 0;
};

struct CaptionResult {
  std::string caption;
  double filter_score = 0.0;
};

class CaptionProvider {
 public:
  virtual ~CaptionProvider() = default;
  virtual ProviderIdentity identity() const = 0;
  virtual CaptionResult caption_frame(const std::string& frame_ref) = 0;
};

struct CompletionParams {
  double temperature = 0.0;
  int max_tokens = 64;
  std::vector<std::string> stop;

  json to_json() const {
    return {{"temperature", temperature}, {"max_tokens", max_tokens}, {"stop", stop}};
  }
};

/// Truncate at the earliest occurrence of any stop sequence.
inline std::string apply_stop(std::string text, std::span<const std::string> stop) {
  std::size_t cut = text.size();
  for (const auto& s : stop) {
    if (s.empty()) continue;
    auto pos = text.find(s);
    if (pos != std::string::npos) cut = std::min(cut, pos);
  }
  text.resize(cut);
  return text;
}

class CompletionProvider {
 public:
  virtual ~CompletionProvider() = default;
  virtual ProviderIdentity identity() const = 0;

  std::string complete(const std::string& prompt, const CompletionParams& params) {
    if (prompt.empty()) throw Error("complete: empty prompt");
    if (params.temperature < 0.0) throw ConfigError("complete: temperature must be >= 0");
    if (params.max_tokens <= 0) throw ConfigError("complete: max_tokens must be > 0");
    return apply_stop(complete_raw(prompt, params), params.stop);
  }

 protected:
  virtual std::string complete_raw(const std::string& prompt, const CompletionParams& params) = 0;
};

/// Lists frame references for a video (served by the sidecar).
class FrameExtractor {
 public:
  virtual ~FrameExtractor() = default;
  virtual std::vector<std::string> extract_frames(const std::string& video_path, int n,
                                                  std::string_view level) = 0;
};

namespace detail {
inline Vector checked_unit(std::span<const float> v, std::size_t dim, const std::string& what) {
  if (v.size() != dim) {
    throw ProviderError("dimension drift for " + what + ": expected " + std::to_string(dim) +
                        ", got " + std::to_string(v.size()));
  }
  try {
    return normalized(v);
  } catch (const Error& e) {
    throw ProviderError(what + ": " + e.what());
  }
}

inline Vector vector_from_json(const json& j) {
  if (!j.is_array()) throw ProviderError("expected a numeric array");
  Vector v;
  v.reserve(j.size());
  for (const auto& x : j) {
    if (!x.is_number()) throw ProviderError("expected a numeric array");
    v.push_back(x.get<float>());
  }
  return v;
}
}  // namespace detail

// ---------------------------------------------------------------------------
// File-backed mocks

/// Looks texts up in a JSON table: {"model", "dim", "vectors": {text: [...]}}.
class TableTextEmbedder : public TextEmbedder {
 public:
  explicit TableTextEmbedder(const json& table) {
    model_ = table.value("model", "table");
    dim_ = table.at("dim").get<std::size_t>();
    if (dim_ == 0) throw ConfigError("text embedding table: dim must be > 0");
    for (const auto& [key, vec] : table.at("vectors").items()) {
      table_.emplace(key, detail::checked_unit(detail::vector_from_json(vec), dim_, key));
    }
  }

  static std::unique_ptr<TableTextEmbedder> from_file(const std::filesystem::path& path) {
    return std::make_unique<TableTextEmbedder>(read_json_file(path));
  }

  ProviderIdentity identity() const override { return {"table-text", model_}; }
  std::size_t dim() const override { return dim_; }

  std::vector<Vector> embed_text(std::span<const std::string> batch) override {
    if (batch.empty()) throw Error("embed_text: empty batch");
    calls_.fetch_add(1);
    std::vector<Vector> out;
    out.reserve(batch.size());
    for (const auto& text : batch) {
      auto it = table_.find(text);
      if (it == table_.end()) throw ProviderError("text embedding table has no entry for '" + text + "'");
      out.push_back(it->second);
    }
    return out;
  }

  std::size_t calls() const { return calls_.load(); }

 private:
  std::string model_;
  std::size_t dim_ = 0;
  std::map<std::string, Vector> table_;
  std::atomic<std::size_t> calls_{0};
};

/// Offline bag-of-features text embedder.
///
/// Features are lowercase alphanumeric word unigrams (weight 1.0) and the
/// character trigrams of each word padded with '#' (weight 0.5). Each feature
/// is hashed with 64-bit FNV-1a; bucket = hash % dim, sign = bit 32 of the
/// hash. The summed vector is L2-normalized. Text without any alphanumeric
/// character has no features and is rejected.
class HashingTextEmbedder : public TextEmbedder {
 public:
  explicit HashingTextEmbedder(std::size_t dim = 256) : dim_(dim) {
    if (dim_ == 0) throw ConfigError("hashing embedder: dim must be > 0");
  }

  ProviderIdentity identity() const override { return {"hashing-text", "fnv1a-d" + std::to_string(dim_)}; }
  std::size_t dim() const override { return dim_; }

  std::vector<Vector> embed_text(std::span<const std::string> batch) override {
    if (batch.empty()) throw Error("embed_text: empty batch");
    std::vector<Vector> out;
    out.reserve(batch.size());
    for (const auto& text : batch) out.push_back(embed(text));
    return out;
  }

  static std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ull;
    }
    return h;
  }

 private:
  Vector embed(const std::string& text) const {
    std::vector<double> acc(dim_, 0.0);
    auto add = [&](std::string_view feature, double weight) {
      auto h = fnv1a(feature);
      double sign = ((h >> 32) & 1u) ? -1.0 : 1.0;
      acc[h % dim_] += sign * weight;
    };
    std::vector<std::string> words;
    std::string cur;
    for (char c : text) {
      auto u = static_cast<unsigned char>(c);
      if (std::isalnum(u) || u >= 128) {
        cur.push_back(static_cast<char>(std::tolower(u)));
      } else if (!cur.empty()) {
        words.push_back(std::move(cur));
        cur.clear();
      }
    }
    if (!cur.empty()) words.push_back(std::move(cur));
    if (words.empty()) throw ProviderError("hashing embedder: no features in '" + text + "'");
    for (const auto& w : words) {
      add("w:" + w, 1.0);
      std::string padded = "#" + w + "#";
      for (std::size_t i = 0; i + 3 <= padded.size(); ++i) add("c:" + padded.substr(i, 3), 0.5);
    }
    Vector v(dim_);
    for (std::size_t i = 0; i < dim_; ++i) v[i] = static_cast<float>(acc[i]);
    try {
      return normalized(v);
    } catch (const Error&) {
      throw ProviderError("hashing embedder: features cancelled out for '" + text + "'");
    }
  }

  std::size_t dim_;
};

/// Image embeddings from a JSON table.
///
/// Schema: {"model", "dim", "vectors": {frame_ref: [...]}, "scenes": {frame_ref:
/// text}}. A "scenes" entry is embedded with the attached text embedder, which
/// puts synthetic frames in the same space as the vocabulary.
class TableImageEmbedder : public ImageEmbedder {
 public:
  explicit TableImageEmbedder(const json& table, std::shared_ptr<TextEmbedder> scene_embedder = nullptr)
      : scene_embedder_(std::move(scene_embedder)) {
    model_ = table.value("model", "table");
    if (table.contains("dim")) {
      dim_ = table.at("dim").get<std::size_t>();
    } else if (scene_embedder_) {
      dim_ = scene_embedder_->dim();
    } else {
      throw ConfigError("image embedding table: missing dim");
    }
    if (dim_ == 0) throw ConfigError("image embedding table: dim must be > 0");
    if (table.contains("vectors")) {
      for (const auto& [key, vec] : table.at("vectors").items()) {
        vectors_.emplace(key, detail::checked_unit(detail::vector_from_json(vec), dim_, key));
      }
    }
    if (table.contains("scenes")) {
      if (!scene_embedder_) throw ConfigError("image embedding table has scenes but no text embedder");
      if (scene_embedder_->dim() != dim_) throw ConfigError("scene embedder dim differs from table dim");
      for (const auto& [key, text] : table.at("scenes").items()) scenes_.emplace(key, text.get<std::string>());
    }
  }

  static std::unique_ptr<TableImageEmbedder> from_file(const std::filesystem::path& path,
                                                       std::shared_ptr<TextEmbedder> scene_embedder = nullptr) {
    return std::make_unique<TableImageEmbedder>(read_json_file(path), std::move(scene_embedder));
  }

  ProviderIdentity identity() const override {
    std::string model = model_;
    if (scene_embedder_) model += "+" + scene_embedder_->identity().str();
    return {"table-image", model};
  }
  std::size_t dim() const override { return dim_; }

  Vector embed_image(const std::string& frame_ref) override {
    calls_.fetch_add(1);
    if (auto it = vectors_.find(frame_ref); it != vectors_.end()) return it->second;
    if (auto it = scenes_.find(frame_ref); it != scenes_.end()) {
      return detail::checked_unit(scene_embedder_->embed_one(it->second), dim_, frame_ref);
    }
    throw ProviderError("image embedding table has no entry for '" + frame_ref + "'");
  }

  std::size_t calls() const { return calls_.load(); }

 private:
  std::string model_;
  std::size_t dim_ = 0;
  std::shared_ptr<TextEmbedder> scene_embedder_;
  std::map<std::string, Vector> vectors_;
  std::map<std::string, std::string> scenes_;
  std::atomic<std::size_t> calls_{0};
};

/// Picks the highest-scoring candidate; earlier candidates win exact ties.
inline CaptionResult select_caption(std::span<const CaptionResult> candidates) {
  if (candidates.empty()) throw ProviderError("no caption candidates");
  const CaptionResult* best = nullptr;
  for (const auto& c : candidates) {
    if (trim_view(c.caption).empty()) continue;
    if (!std::isfinite(c.filter_score)) throw ProviderError("non-finite filter score");
    if (!best || c.filter_score > best->filter_score) best = &c;
  }
  if (!best) throw ProviderError("all caption candidates are empty");
  return *best;
}

/// Captions from a JSON table: {"model", "captions": {frame_ref: {caption,
/// filter_score} | [{caption, filter_score}, ...]}}.
class TableCaptionProvider : public CaptionProvider {
 public:
  explicit TableCaptionProvider(const json& table) {
    model_ = table.value("model", "table");
    for (const auto& [key, entry] : table.at("captions").items()) {
      std::vector<CaptionResult> cands;
      auto parse = [](const json& e) {
        return CaptionResult{e.at("caption").get<std::string>(), e.value("filter_score", 0.0)};
      };
      if (entry.is_array()) {
        for (const auto& e : entry) cands.push_back(parse(e));
      } else {
        cands.push_back(parse(entry));
      }
      table_.emplace(key, std::move(cands));
    }
  }

  static std::unique_ptr<TableCaptionProvider> from_file(const std::filesystem::path& path) {
    return std::make_unique<TableCaptionProvider>(read_json_file(path));
  }

  ProviderIdentity identity() const override { return {"table-caption", model_}; }

  CaptionResult caption_frame(const std::string& frame_ref) override {
    calls_.fetch_add(1);
    auto it = table_.find(frame_ref);
    if (it == table_.end()) throw ProviderError("caption table has no entry for '" + frame_ref + "'");
    return select_caption(it->second);
  }

  std::size_t calls() const { return calls_.load(); }

 private:
  std::string model_;
  std::map<std::string, std::vector<CaptionResult>> table_;
  std::atomic<std::size_t> calls_{0};
};

/// Scripted LLM: {"model", "by_hash": {sha256(prompt): text}, "rules":
/// [{"contains", "text"}], "default": text}.
///
/// Lookup order: exact prompt hash, then the first rule whose "contains"
/// string occurs in the query block (text after the last blank line), then
/// "default". No match is an error.
class ScriptedCompletionProvider : public CompletionProvider {
 public:
  explicit ScriptedCompletionProvider(const json& script) {
    model_ = script.value("model", "scripted");
    if (script.contains("by_hash")) {
      for (const auto& [k, v] : script.at("by_hash").items()) by_hash_.emplace(k, v.get<std::string>());
    }
    if (script.contains("rules")) {
      for (const auto& r : script.at("rules")) {
        rules_.emplace_back(r.at("contains").get<std::string>(), r.at("text").get<std::string>());
      }
    }
    if (script.contains("default")) default_ = script.at("default").get<std::string>();
  }

  static std::unique_ptr<ScriptedCompletionProvider> from_file(const std::filesystem::path& path) {
    return std::make_unique<ScriptedCompletionProvider>(read_json_file(path));
  }

  ProviderIdentity identity() const override { return {"scripted-completion", model_}; }
  std::size_t calls() const { return calls_.load(); }

 protected:
  std::string complete_raw(const std::string& prompt, const CompletionParams&) override {
    calls_.fetch_add(1);
    if (auto it = by_hash_.find(sha256_hex(prompt)); it != by_hash_.end()) return it->second;
    auto cut = prompt.rfind("\n\n");
    std::string_view query = cut == std::string::npos ? std::string_view(prompt)
                                                      : std::string_view(prompt).substr(cut + 2);
    for (const auto& [needle, text] : rules_) {
      if (query.find(needle) != std::string_view::npos) return text;
    }
    if (default_) return *default_;
    throw ProviderError("scripted completion has no response for prompt " + sha256_hex(prompt));
  }

 private:
  std::string model_;
  std::map<std::string, std::string> by_hash_;
  std::vector<std::pair<std::string, std::string>> rules_;
  std::optional<std::string> default_;
  std::atomic<std::size_t> calls_{0};
};

// ---------------------------------------------------------------------------
// Content-addressed cache

/// One JSON file per entry at <root>/<h[0:2]>/<h[2:4]>/<h>.json holding
/// {key, created_at, value}. Writes are atomic.
class DiskCache {
 public:
  explicit DiskCache(std::filesystem::path root) : root_(std::move(root)) {}

  static std::string make_key(const ProviderIdentity& id, const json& request) {
    return sha256_hex(id.str() + "\n" + request.dump());
  }

  std::filesystem::path entry_path(const std::string& key) const {
    return root_ / key.substr(0, 2) / key.substr(2, 2) / (key + ".json");
  }

  std::optional<std::string> get(const std::string& key) const {
    auto path = entry_path(key);
    if (!std::filesystem::exists(path)) return std::nullopt;
    try {
      auto entry = json::parse(read_file(path));
      if (entry.at("key").get<std::string>() != key) return std::nullopt;
      return entry.at("value").get<std::string>();
    } catch (const std::exception& e) {
      log(LogLevel::warning, "ignoring corrupt cache entry " + path.string() + ": " + e.what());
      return std::nullopt;
    }
  }

  void put(const std::string& key, const std::string& value) const {
    auto now = std::chrono::duration_cast<std::chrono::seconds>(
                   std::chrono::system_clock::now().time_since_epoch())
                   .count();
    json entry = {{"key", key}, {"created_at", now}, {"value", value}};
    write_file_atomic(entry_path(key), entry.dump());
  }

  const std::filesystem::path& root() const { return root_; }

 private:
  std::filesystem::path root_;
};

class CachingCompletionProvider : public CompletionProvider {
 public:
  CachingCompletionProvider(std::shared_ptr<CompletionProvider> inner, std::shared_ptr<DiskCache> cache)
      : inner_(std::move(inner)), cache_(std::move(cache)) {}

  ProviderIdentity identity() const override { return inner_->identity(); }
  std::size_t hits() const { return hits_.load(); }

 protected:
  std::string complete_raw(const std::string& prompt, const CompletionParams& params) override {
    json request = params.to_json();
    request["prompt"] = prompt;
    auto key = DiskCache::make_key(inner_->identity(), request);
    if (auto hit = cache_->get(key)) {
      hits_.fetch_add(1);
      return *hit;
    }
    // Stop handling happens in the outer complete(); cache the raw text.
    CompletionParams no_stop = params;
    no_stop.stop.clear();
    auto text = inner_->complete(prompt, no_stop);
    cache_->put(key, text);
    return text;
  }

 private:
  std::shared_ptr<CompletionProvider> inner_;
  std::shared_ptr<DiskCache> cache_;
  std::atomic<std::size_t> hits_{0};
};

class CachingTextEmbedder : public TextEmbedder {
 public:
  CachingTextEmbedder(std::shared_ptr<TextEmbedder> inner, std::shared_ptr<DiskCache> cache)
      : inner_(std::move(inner)), cache_(std::move(cache)) {}

  ProviderIdentity identity() const override { return inner_->identity(); }
  std::size_t dim() const override { return inner_->dim(); }

  std::vector<Vector> embed_text(std::span<const std::string> batch) override {
    if (batch.empty()) throw Error("embed_text: empty batch");
    json request = {{"texts", std::vector<std::string>(batch.begin(), batch.end())}};
    auto key = DiskCache::make_key(inner_->identity(), request);
    if (auto hit = cache_->get(key)) {
      return json::parse(*hit).get<std::vector<Vector>>();
    }
    auto out = inner_->embed_text(batch);
    cache_->put(key, json(out).dump());
    return out;
  }

 private:
  std::shared_ptr<TextEmbedder> inner_;
  std::shared_ptr<DiskCache> cache_;
};

// ---------------------------------------------------------------------------
// HTTP clients for the sidecar wire protocol

struct HttpOptions {
  std::string endpoint;  // e.g. "http://127.0.0.1:8765"
  std::string api_key;
  int attempts = 3;
  std::chrono::milliseconds backoff{200};
  std::chrono::seconds timeout{120};

  /// Fills endpoint/api_key from VIDPROMPT_ENDPOINT / VIDPROMPT_API_KEY when unset.
  static HttpOptions from_env(HttpOptions base) {
    if (base.endpoint.empty()) {
      if (const char* e = std::getenv("VIDPROMPT_ENDPOINT")) base.endpoint = e;
    }
    if (base.api_key.empty()) {
      if (const char* k = std::getenv("VIDPROMPT_API_KEY")) base.api_key = k;
    }
    return base;
  }
  static HttpOptions from_env() { return from_env(HttpOptions{}); }
};

/// JSON-over-POST client. Transport failures are retried with exponential
/// backoff; a non-2xx answer is surfaced immediately with its status.
class HttpJsonClient {
 public:
  explicit HttpJsonClient(HttpOptions opts) : opts_(std::move(opts)) {
    if (opts_.endpoint.empty()) throw ConfigError("HTTP provider: no endpoint configured");
    if (opts_.attempts < 1) throw ConfigError("HTTP provider: attempts must be >= 1");
  }

  json post(const std::string& path, const json& body) {
    httplib::Client client(opts_.endpoint);
    client.set_connection_timeout(opts_.timeout);
    client.set_read_timeout(opts_.timeout);
    client.set_write_timeout(opts_.timeout);
    httplib::Headers headers;
    if (!opts_.api_key.empty()) headers.emplace("Authorization", "Bearer " + opts_.api_key);
    const std::string payload = body.dump();
    auto delay = opts_.backoff;
    std::string last_error;
    for (int attempt = 1; attempt <= opts_.attempts; ++attempt) {
      requests_.fetch_add(1);
      auto res = client.Post(path, headers, payload, "application/json");
      if (!res) {
        last_error = httplib::to_string(res.error());
        if (attempt < opts_.attempts) {
          std::this_thread::sleep_for(delay);
          delay *= 2;
        }
        continue;
      }
      if (res->status < 200 || res->status >= 300) {
        std::string detail = res->body;
        try {
          auto err = json::parse(res->body);
          if (err.contains("error")) detail = err["error"].is_string() ? err["error"].get<std::string>() : err["error"].dump();
        } catch (const json::exception&) {
        }
        throw ProviderError(path + " returned HTTP " + std::to_string(res->status) + ": " + detail, res->status);
      }
      try {
        return json::parse(res->body);
      } catch (const json::parse_error& e) {
        throw ProviderError(path + " returned invalid JSON: " + e.what(), res->status);
      }
    }
    throw TransportError(path + ": transport failure after " + std::to_string(opts_.attempts) +
                         " attempts: " + last_error);
  }

  const HttpOptions& options() const { return opts_; }
  std::size_t requests() const { return requests_.load(); }

 private:
  HttpOptions opts_;
  std::atomic<std::size_t> requests_{0};
};

namespace detail {
/// Frame references prefixed "b64:" carry inline image data; anything else is a path.
inline json image_request(const std::string& frame_ref) {
  if (frame_ref.rfind("b64:", 0) == 0) return {{"image_b64", frame_ref.substr(4)}};
  return {{"path", frame_ref}};
}
}  // namespace detail

class HttpTextEmbedder : public TextEmbedder {
 public:
  HttpTextEmbedder(HttpOptions opts, std::size_t dim, std::string model = "remote")
      : client_(std::move(opts)), dim_(dim), model_(std::move(model)) {}

  ProviderIdentity identity() const override { return {"http-text", model_}; }
  std::size_t dim() const override { return dim_; }

  std::vector<Vector> embed_text(std::span<const std::string> batch) override {
    if (batch.empty()) throw Error("embed_text: empty batch");
    auto res = client_.post("/embed_text", {{"texts", std::vector<std::string>(batch.begin(), batch.end())}});
    if (res.at("dim").get<std::size_t>() != dim_) throw ProviderError("/embed_text: dim drift");
    const auto& rows = res.at("vectors");
    if (rows.size() != batch.size()) throw ProviderError("/embed_text: vector count mismatch");
    std::vector<Vector> out;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      out.push_back(detail::checked_unit(detail::vector_from_json(rows[i]), dim_, batch[i]));
    }
    return out;
  }

  HttpJsonClient& client() { return client_; }

 private:
  HttpJsonClient client_;
  std::size_t dim_;
  std::string model_;
};

class HttpImageEmbedder : public ImageEmbedder {
 public:
  HttpImageEmbedder(HttpOptions opts, std::size_t dim, std::string model = "remote")
      : client_(std::move(opts)), dim_(dim), model_(std::move(model)) {}

  ProviderIdentity identity() const override { return {"http-image", model_}; }
  std::size_t dim() const override { return dim_; }

  Vector embed_image(const std::string& frame_ref) override {
    auto res = client_.post("/embed_image", detail::image_request(frame_ref));
    if (res.at("dim").get<std::size_t>() != dim_) throw ProviderError("/embed_image: dim drift");
    return detail::checked_unit(detail::vector_from_json(res.at("vector")), dim_, frame_ref);
  }

 private:
  HttpJsonClient client_;
  std::size_t dim_;
  std::string model_;
};

class HttpCaptionProvider : public CaptionProvider {
 public:
  explicit HttpCaptionProvider(HttpOptions opts, std::string model = "remote")
      : client_(std::move(opts)), model_(std::move(model)) {}

  ProviderIdentity identity() const override { return {"http-caption", model_}; }

  CaptionResult caption_frame(const std::string& frame_ref) override {
    auto res = client_.post("/caption", detail::image_request(frame_ref));
    CaptionResult out{res.at("caption").get<std::string>(), res.at("filter_score").get<double>()};
    if (trim_view(out.caption).empty()) throw ProviderError("/caption: empty caption");
    if (!std::isfinite(out.filter_score)) throw ProviderError("/caption: non-finite filter_score");
    return out;
  }

 private:
  HttpJsonClient client_;
  std::string model_;
};

class HttpCompletionProvider : public CompletionProvider {
 public:
  explicit HttpCompletionProvider(HttpOptions opts, std::string model = "remote")
      : client_(std::move(opts)), model_(std::move(model)) {}

  ProviderIdentity identity() const override { return {"http-completion", model_}; }
  HttpJsonClient& client() { return client_; }

 protected:
  std::string complete_raw(const std::string& prompt, const CompletionParams& params) override {
    json body = params.to_json();
    body["prompt"] = prompt;
    return client_.post("/complete", body).at("text").get<std::string>();
  }

 private:
  HttpJsonClient client_;
  std::string model_;
};

class HttpFrameExtractor : public FrameExtractor {
 public:
  explicit HttpFrameExtractor(HttpOptions opts) : client_(std::move(opts)) {}

  std::vector<std::string> extract_frames(const std::string& video_path, int n,
                                          std::string_view level) override {
    auto res = client_.post("/extract_frames",
                            {{"video_path", video_path}, {"n", n}, {"level", std::string(level)}});
    auto paths = res.at("frame_paths").get<std::vector<std::string>>();
    if (static_cast<int>(paths.size()) != n) throw ProviderError("/extract_frames: frame count mismatch");
    return paths;
  }

 private:
  HttpJsonClient client_;
};

// ---------------------------------------------------------------------------

/// Runs fn(i) for i in [0, n) on up to `parallelism` threads. Callers write
/// results into pre-sized slots so order is restored by index. The first
/// exception thrown by any task is rethrown after all workers join.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t parallelism, Fn&& fn) {
  if (n == 0) return;
  parallelism = std::clamp<std::size_t>(parallelism, 1, n);
  if (parallelism == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> workers;
    for (std::size_t w = 0; w < parallelism; ++w) {
      workers.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
          }
        }
      });
    }
  }
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace vidprompt

// Copyright 2026 The vidprompt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Support-set sampling and similarity-based in-context example selection.

#include "vidprompt/providers.hpp"
#include "vidprompt/represent.hpp"

namespace vidprompt {

/// One annotated (or, for queries, unannotated) task instance.
struct LabeledExample {
  std::string example_id;
  VideoRepresentation representation;
  std::string annotation;               // caption, answer, or future event
  std::optional<std::string> question;  // qa
  std::vector<std::string> candidates;  // vlep: the two possible future events
  std::optional<std::size_t> answer_index;  // vlep gold candidate
  std::vector<std::string> references;  // captioning golds, annotation is references[0]
};

struct SupportSet {
  std::vector<LabeledExample> examples;
  std::uint64_t seed = 0;
  std::size_t M = 0;

  std::vector<std::string> example_ids() const {
    std::vector<std::string> ids;
    for (const auto& e : examples) ids.push_back(e.example_id);
    return ids;
  }
};

/// SplitMix64 (Steele, Lea, Flood). Fixed so sampled support sets are
/// reproducible across platforms and standard-library versions.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, bound) by rejection of the biased low range.
  std::uint64_t below(std::uint64_t bound) {
    if (bound == 0) throw Error("SplitMix64::below: bound must be > 0");
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      auto r = next();
      if (r >= threshold) return r % bound;
    }
  }

 private:
  std::uint64_t state_;
};

/// Partial Fisher-Yates: position i swaps with i + below(n - i), for i < M.
/// The first min(M, n) entries, in draw order, form the support set.
inline SupportSet sample_support(std::span<const LabeledExample> dataset, std::size_t M, std::uint64_t seed) {
  if (M < 1) throw ConfigError("sample_support: M must be >= 1");
  if (dataset.empty()) throw Error("sample_support: empty dataset");
  std::vector<std::size_t> order(dataset.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  SplitMix64 rng(seed);
  const std::size_t take = std::min(M, dataset.size());
  for (std::size_t i = 0; i < take; ++i) {
    auto j = i + static_cast<std::size_t>(rng.below(order.size() - i));
    std::swap(order[i], order[j]);
  }
  SupportSet out{{}, seed, M};
  for (std::size_t i = 0; i < take; ++i) {
    if (trim_view(dataset[order[i]].annotation).empty()) {
      throw Error("sample_support: example '" + dataset[order[i]].example_id + "' has no annotation");
    }
    out.examples.push_back(dataset[order[i]]);
  }
  return out;
}

inline std::string joined_captions(const VideoRepresentation& r) {
  std::vector<std::string> texts;
  for (const auto& c : r.frame_captions) texts.push_back(trim(c.text));
  return join(texts, " ");
}

/// Text compared against the query when selecting in-context examples.
inline std::string example_key(const LabeledExample& ex, TaskKind task) {
  switch (task) {
    case TaskKind::qa:
      if (!ex.question || trim_view(*ex.question).empty()) {
        throw Error("example_key: '" + ex.example_id + "' has no question");
      }
      return *ex.question;
    case TaskKind::caption:
    case TaskKind::caption_with_asr: {
      auto key = joined_captions(ex.representation);
      if (key.empty()) throw Error("example_key: '" + ex.example_id + "' has no frame captions");
      return key;
    }
    case TaskKind::vlep: {
      auto key = joined_captions(ex.representation);
      if (key.empty()) throw Error("example_key: '" + ex.example_id + "' has no frame captions");
      if (!ex.representation.asr || trim_view(*ex.representation.asr).empty()) {
        throw Error("example_key: '" + ex.example_id + "' has no dialogue");
      }
      return key + " " + trim(*ex.representation.asr);
    }
  }
  throw Error("invalid TaskKind");
}

struct ScoredExample {
  const LabeledExample* example;
  double similarity;
};

/// Picks the N support examples most similar to the query key and returns
/// them least-similar first, so the best match sits next to the query.
/// Membership ties favour the smaller example_id; output order is
/// (similarity asc, example_id asc).
inline std::vector<ScoredExample> score_in_context(const SupportSet& support, const std::string& query_key,
                                                   std::size_t N, TaskKind task, TextEmbedder& embedder) {
  if (N < 1) throw ConfigError("select_in_context: N must be >= 1");
  if (trim_view(query_key).empty()) throw Error("select_in_context: empty query key");
  if (support.examples.empty()) return {};
  std::vector<std::string> texts{query_key};
  for (const auto& ex : support.examples) texts.push_back(example_key(ex, task));
  auto vectors = embedder.embed_text(texts);
  if (vectors.size() != texts.size()) throw Error("select_in_context: embedder returned wrong count");
  std::vector<ScoredExample> scored;
  for (std::size_t i = 0; i < support.examples.size(); ++i) {
    scored.push_back({&support.examples[i], cosine(vectors[0], vectors[i + 1])});
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return a.example->example_id < b.example->example_id;
  });
  if (scored.size() > N) scored.resize(N);
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.similarity != b.similarity) return a.similarity < b.similarity;
    return a.example->example_id < b.example->example_id;
  });
  return scored;
}

inline std::vector<LabeledExample> select_in_context(const SupportSet& support, const std::string& query_key,
                                                     std::size_t N, TaskKind task, TextEmbedder& embedder) {
  std::vector<LabeledExample> out;
  for (const auto& s : score_in_context(support, query_key, N, task, embedder)) out.push_back(*s.example);
  return out;
}

/// Audit record: {"seed", "M", "example_ids"}.
inline json to_json(const SupportSet& s) {
  return {{"seed", s.seed}, {"M", s.M}, {"example_ids", s.example_ids()}};
}

}  // namespace vidprompt

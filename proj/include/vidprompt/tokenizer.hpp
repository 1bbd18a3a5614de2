// Copyright 2026 The vidprompt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Retrieval-based visual tokenization: score every vocabulary phrase against
// a frame embedding and keep the top-k per (frame, kind).

#include <map>

#include "vidprompt/vocab.hpp"

namespace vidprompt {

struct FrameEmbedding {
  int frame_index = 0;
  Vector vector;
};

struct TokenScore {
  std::string phrase;
  VocabKind kind = VocabKind::object;
  double score = 0.0;
  int frame_index = 0;
  int rank = 0;  // 1-based within (frame, kind)

  bool operator==(const TokenScore&) const = default;
};

using FrameKey = std::pair<int, VocabKind>;
using PerFrameTokens = std::map<FrameKey, std::vector<TokenScore>>;

/// Centered-uniform sampling of n indices out of `total` frames:
/// index_i = floor(i*T/n + T/(2n)).
inline std::vector<int> sample_frame_indices(long long total, int n) {
  if (n < 1) throw ConfigError("frame count must be >= 1");
  if (total < 1) throw ConfigError("video has no decodable frames");
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    // (2iT + T) / 2n in integers, exact floor for non-negative values.
    long long num = 2LL * i * total + total;
    out.push_back(static_cast<int>(num / (2LL * n)));
  }
  return out;
}

/// Top-k phrases by cosine score; ties go to the lexicographically smaller phrase.
inline std::vector<TokenScore> tokenize_frame(const FrameEmbedding& frame, const VocabEmbedding& vocab,
                                              int k = 5) {
  if (k < 1) throw ConfigError("tokenize_frame: k must be >= 1");
  if (frame.vector.size() != vocab.dim) {
    throw Error("tokenize_frame: frame dim " + std::to_string(frame.vector.size()) +
                " != vocabulary dim " + std::to_string(vocab.dim));
  }
  std::vector<std::pair<double, std::size_t>> scored;
  scored.reserve(vocab.size());
  const std::span<const float> fv(frame.vector);
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    scored.emplace_back(cosine(fv, std::span<const float>(vocab.vectors[i])), i);
  }
  auto better = [&](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return vocab.phrases[a.second] < vocab.phrases[b.second];
  };
  const auto take = std::min<std::size_t>(static_cast<std::size_t>(k), scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take), scored.end(), better);
  std::vector<TokenScore> out;
  out.reserve(take);
  for (std::size_t r = 0; r < take; ++r) {
    out.push_back({vocab.phrases[scored[r].second], vocab.kind, scored[r].first, frame.frame_index,
                   static_cast<int>(r + 1)});
  }
  return out;
}

/// Applies tokenize_frame to every frame and every vocabulary independently.
inline PerFrameTokens tokenize_video(std::span<const FrameEmbedding> frames,
                                     const std::map<VocabKind, VocabEmbedding>& vocabs, int k = 5) {
  for (std::size_t i = 1; i < frames.size(); ++i) {
    if (frames[i].frame_index <= frames[i - 1].frame_index) {
      throw Error("tokenize_video: frames must be sorted by unique frame_index");
    }
  }
  PerFrameTokens out;
  for (const auto& f : frames) {
    for (const auto& [kind, vocab] : vocabs) out[{f.frame_index, kind}] = tokenize_frame(f, vocab, k);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Frame-embedding store: {"dim", "frames": [{"video_id", "frame_index", "vector"}]}

using FrameStore = std::map<std::string, std::vector<FrameEmbedding>>;

inline json frame_store_to_json(const FrameStore& store, std::size_t dim) {
  json frames = json::array();
  for (const auto& [video, list] : store) {
    for (const auto& f : list) {
      frames.push_back({{"video_id", video}, {"frame_index", f.frame_index}, {"vector", f.vector}});
    }
  }
  return {{"dim", dim}, {"frames", frames}};
}

inline FrameStore frame_store_from_json(const json& j) {
  const auto dim = j.at("dim").get<std::size_t>();
  FrameStore store;
  for (const auto& f : j.at("frames")) {
    FrameEmbedding fe{f.at("frame_index").get<int>(), f.at("vector").get<Vector>()};
    if (fe.vector.size() != dim) throw Error("frame store: bad vector width");
    store[f.at("video_id").get<std::string>()].push_back(std::move(fe));
  }
  for (auto& [video, list] : store) {
    std::sort(list.begin(), list.end(), [](const auto& a, const auto& b) { return a.frame_index < b.frame_index; });
    for (std::size_t i = 1; i < list.size(); ++i) {
      if (list[i].frame_index == list[i - 1].frame_index) {
        throw Error("frame store: duplicate frame " + std::to_string(list[i].frame_index) + " for " + video);
      }
    }
  }
  return store;
}

}  // namespace vidprompt

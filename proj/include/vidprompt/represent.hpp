// Copyright 2026 The vidprompt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Video-level textual representation: aggregated visual tokens, frame
// captions and optional ASR, plus the temporal-marker line renderers.

#include "vidprompt/tokenizer.hpp"

namespace vidprompt {

struct FrameCaption {
  int frame_index = 0;
  std::string text;
  std::optional<double> filter_score;

  bool operator==(const FrameCaption&) const = default;
};

struct AggregatedToken {
  std::string phrase;
  VocabKind kind = VocabKind::object;
  double best_score = 0.0;
  int best_rank = 0;
  int frequency = 0;
  double temporal_indicator = 0.0;

  bool operator==(const AggregatedToken&) const = default;
};

using TokenMap = std::map<VocabKind, std::vector<AggregatedToken>>;

struct VideoRepresentation {
  std::string video_id;
  std::vector<FrameCaption> frame_captions;
  TokenMap tokens;  // always holds all three kinds
  std::optional<std::string> asr;
  bool reversed = false;
  bool one_frame = false;

  const std::vector<AggregatedToken>& tokens_of(VocabKind kind) const {
    static const std::vector<AggregatedToken> empty;
    auto it = tokens.find(kind);
    return it == tokens.end() ? empty : it->second;
  }

  bool operator==(const VideoRepresentation&) const = default;
};

struct AggregationOptions {
  int top_m = 4;
  int must_rank_within = 2;
};

/// Merges per-frame top-k lists into video-level tokens, per kind:
///  1. one entry per phrase: max score, min rank, frame count, mean frame index
///  2. rank by best_score desc, then frequency desc (then phrase asc)
///  3. keep the first top_m
///  4. drop entries never ranked within must_rank_within in any frame
///  5. order by temporal_indicator asc, then best_score desc (then phrase asc)
inline TokenMap aggregate_tokens(const PerFrameTokens& per_frame, AggregationOptions opts = {}) {
  if (opts.top_m < 1) throw ConfigError("aggregate_tokens: top_m must be >= 1");
  if (opts.must_rank_within < 1) throw ConfigError("aggregate_tokens: must_rank_within must be >= 1");

  struct Acc {
    AggregatedToken token;
    double index_sum = 0.0;
  };
  std::map<VocabKind, std::map<std::string, Acc>> merged;
  for (const auto& [key, list] : per_frame) {
    for (const auto& t : list) {
      if (t.rank < 1) throw Error("aggregate_tokens: invalid rank for '" + t.phrase + "'");
      auto [it, fresh] = merged[t.kind].try_emplace(t.phrase);
      auto& acc = it->second;
      if (fresh) {
        acc.token = {t.phrase, t.kind, t.score, t.rank, 0, 0.0};
      } else {
        acc.token.best_score = std::max(acc.token.best_score, t.score);
        acc.token.best_rank = std::min(acc.token.best_rank, t.rank);
      }
      acc.token.frequency += 1;
      acc.index_sum += t.frame_index;
    }
  }

  TokenMap out;
  for (auto kind : kAllVocabKinds) {
    auto& list = out[kind];
    auto it = merged.find(kind);
    if (it == merged.end()) continue;
    std::vector<AggregatedToken> cands;
    for (auto& [phrase, acc] : it->second) {
      acc.token.temporal_indicator = acc.index_sum / acc.token.frequency;
      cands.push_back(acc.token);
    }
    std::sort(cands.begin(), cands.end(), [](const auto& a, const auto& b) {
      if (a.best_score != b.best_score) return a.best_score > b.best_score;
      if (a.frequency != b.frequency) return a.frequency > b.frequency;
      return a.phrase < b.phrase;
    });
    if (cands.size() > static_cast<std::size_t>(opts.top_m)) cands.resize(static_cast<std::size_t>(opts.top_m));
    for (auto& c : cands) {
      if (c.best_rank <= opts.must_rank_within) list.push_back(std::move(c));
    }
    std::sort(list.begin(), list.end(), [](const auto& a, const auto& b) {
      if (a.temporal_indicator != b.temporal_indicator) return a.temporal_indicator < b.temporal_indicator;
      if (a.best_score != b.best_score) return a.best_score > b.best_score;
      return a.phrase < b.phrase;
    });
  }
  return out;
}

/// "First," ... "Finally," with middle slots alternating "Then,"/"After that,".
inline std::vector<std::string> temporal_markers(int n) {
  if (n < 0) throw Error("temporal_markers: n must be >= 0");
  std::vector<std::string> out;
  if (n == 0) return out;
  out.emplace_back("First,");
  if (n == 1) return out;
  for (int slot = 1; slot < n - 1; ++slot) out.emplace_back(slot % 2 == 1 ? "Then," : "After that,");
  out.emplace_back("Finally,");
  return out;
}

/// Static variant drops the markers, keeping everything else byte-identical.
enum class MarkerStyle { temporal, none };

inline std::string_view kind_label(VocabKind kind) {
  switch (kind) {
    case VocabKind::object:
      return "Objects";
    case VocabKind::event:
      return "Events";
    case VocabKind::attribute:
      return "Attributes";
  }
  throw Error("invalid VocabKind");
}

namespace detail {
inline std::string render_marked_line(std::string_view label, std::span<const std::string> items,
                                      MarkerStyle style) {
  std::string line(label);
  line += ":";
  if (items.empty()) return line + " none.";
  auto markers = temporal_markers(static_cast<int>(items.size()));
  for (std::size_t i = 0; i < items.size(); ++i) {
    line += ' ';
    if (style == MarkerStyle::temporal) {
      line += markers[i];
      line += ' ';
    }
    line += items[i];
    if (items[i].empty() || items[i].back() != '.') line += '.';
  }
  return line;
}
}  // namespace detail

inline std::string render_token_line(VocabKind kind, std::span<const AggregatedToken> tokens,
                                     MarkerStyle style = MarkerStyle::temporal) {
  std::vector<std::string> phrases;
  for (const auto& t : tokens) phrases.push_back(t.phrase);
  return detail::render_marked_line(kind_label(kind), phrases, style);
}

inline std::string render_caption_lines(std::span<const FrameCaption> captions,
                                        MarkerStyle style = MarkerStyle::temporal) {
  std::vector<std::string> texts;
  for (const auto& c : captions) texts.push_back(trim(c.text));
  return detail::render_marked_line("Frame Captions", texts, style);
}

// ---------------------------------------------------------------------------

struct RepresentationOptions {
  bool reversed = false;
  bool one_frame = false;
  AggregationOptions aggregation;
  std::optional<long long> frame_count;  // when known, indices must fall below it
};

/// Reverses caption and token order and flips the flag; applying it twice
/// restores the input.
inline VideoRepresentation reverse_order(VideoRepresentation repr) {
  std::reverse(repr.frame_captions.begin(), repr.frame_captions.end());
  for (auto& [kind, list] : repr.tokens) std::reverse(list.begin(), list.end());
  repr.reversed = !repr.reversed;
  return repr;
}

inline VideoRepresentation build_representation(std::string video_id, std::vector<FrameCaption> captions,
                                                 const PerFrameTokens& per_frame_tokens,
                                                 std::optional<std::string> asr,
                                                 const RepresentationOptions& opts = {}) {
  std::sort(captions.begin(), captions.end(),
            [](const auto& a, const auto& b) { return a.frame_index < b.frame_index; });
  for (std::size_t i = 0; i < captions.size(); ++i) {
    if (trim_view(captions[i].text).empty()) {
      throw Error(video_id + ": empty caption for frame " + std::to_string(captions[i].frame_index));
    }
    if (i && captions[i].frame_index == captions[i - 1].frame_index) {
      throw Error(video_id + ": duplicate caption for frame " + std::to_string(captions[i].frame_index));
    }
  }
  std::vector<int> token_frames;
  for (const auto& [key, list] : per_frame_tokens) {
    for (const auto& t : list) {
      if (t.frame_index != key.first || t.kind != key.second) {
        throw Error(video_id + ": token '" + t.phrase + "' filed under frame " + std::to_string(key.first) +
                    " but carries frame " + std::to_string(t.frame_index));
      }
    }
    if (token_frames.empty() || token_frames.back() != key.first) token_frames.push_back(key.first);
  }
  auto check_range = [&](int idx) {
    if (idx < 0 || (opts.frame_count && idx >= *opts.frame_count)) {
      throw Error(video_id + ": frame index " + std::to_string(idx) + " outside the video");
    }
  };
  for (const auto& c : captions) check_range(c.frame_index);
  for (int f : token_frames) check_range(f);

  PerFrameTokens selected;
  if (opts.one_frame) {
    if (!captions.empty()) captions = {captions[captions.size() / 2]};
    if (!token_frames.empty()) {
      const int middle = token_frames[token_frames.size() / 2];
      for (const auto& [key, list] : per_frame_tokens) {
        if (key.first == middle) selected.emplace(key, list);
      }
    }
  }

  VideoRepresentation repr;
  repr.video_id = std::move(video_id);
  repr.frame_captions = std::move(captions);
  repr.tokens = aggregate_tokens(opts.one_frame ? selected : per_frame_tokens, opts.aggregation);
  repr.asr = std::move(asr);
  repr.one_frame = opts.one_frame;
  if (opts.reversed) repr = reverse_order(std::move(repr));
  return repr;
}

// ---------------------------------------------------------------------------
// JSON: {video_id, captions[], tokens{objects[],events[],attributes[]}, asr, flags}

inline json to_json(const VideoRepresentation& r) {
  json captions = json::array();
  for (const auto& c : r.frame_captions) {
    json cj = {{"frame_index", c.frame_index}, {"text", c.text}};
    cj["filter_score"] = c.filter_score ? json(*c.filter_score) : json(nullptr);
    captions.push_back(std::move(cj));
  }
  json tokens = json::object();
  for (auto kind : kAllVocabKinds) {
    json list = json::array();
    for (const auto& t : r.tokens_of(kind)) {
      list.push_back({{"phrase", t.phrase},
                      {"best_score", t.best_score},
                      {"best_rank", t.best_rank},
                      {"frequency", t.frequency},
                      {"temporal_indicator", t.temporal_indicator}});
    }
    tokens[std::string(plural_key(kind))] = std::move(list);
  }
  return {{"video_id", r.video_id},
          {"captions", captions},
          {"tokens", tokens},
          {"asr", r.asr ? json(*r.asr) : json(nullptr)},
          {"flags", {{"reversed", r.reversed}, {"one_frame", r.one_frame}}}};
}

inline VideoRepresentation representation_from_json(const json& j) {
  VideoRepresentation r;
  r.video_id = j.at("video_id").get<std::string>();
  for (const auto& c : j.at("captions")) {
    FrameCaption fc{c.at("frame_index").get<int>(), c.at("text").get<std::string>(), std::nullopt};
    if (c.contains("filter_score") && !c["filter_score"].is_null()) fc.filter_score = c["filter_score"].get<double>();
    r.frame_captions.push_back(std::move(fc));
  }
  const auto& tokens = j.at("tokens");
  for (auto kind : kAllVocabKinds) {
    auto& list = r.tokens[kind];
    auto key = std::string(plural_key(kind));
    if (!tokens.contains(key)) continue;
    for (const auto& t : tokens.at(key)) {
      list.push_back({t.at("phrase").get<std::string>(), kind, t.at("best_score").get<double>(),
                      t.at("best_rank").get<int>(), t.at("frequency").get<int>(),
                      t.at("temporal_indicator").get<double>()});
    }
  }
  if (j.contains("asr") && !j["asr"].is_null()) r.asr = j["asr"].get<std::string>();
  if (j.contains("flags")) {
    r.reversed = j["flags"].value("reversed", false);
    r.one_frame = j["flags"].value("one_frame", false);
  }
  return r;
}

}  // namespace vidprompt

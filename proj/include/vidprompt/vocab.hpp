// Copyright 2026 The vidprompt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Visual-token vocabularies: loading and cleaning phrase lists, selecting
// event phrases by verb/argument structure, near-duplicate removal by
// embedding similarity, and embedded vocabulary stores.

#include <bit>
#include <cstring>
#include <set>
#include <unordered_set>

#include "vidprompt/common.hpp"
#include "vidprompt/providers.hpp"

namespace vidprompt {

struct Vocabulary {
  VocabKind kind = VocabKind::object;
  std::vector<std::string> phrases;
  std::string source_label;
};

struct VocabEmbedding {
  VocabKind kind = VocabKind::object;
  std::size_t dim = 0;
  std::vector<std::string> phrases;
  std::vector<Vector> vectors;  // row i embeds phrases[i]

  std::size_t size() const { return phrases.size(); }
  bool operator==(const VocabEmbedding&) const = default;
};

/// Drops blank entries and normalized duplicates (first occurrence wins);
/// entries whose normalized form is in `blocklist` are removed too.
inline std::vector<std::string> clean_phrases(std::span<const std::string> raw,
                                              std::span<const std::string> blocklist = {}) {
  std::unordered_set<std::string> blocked;
  for (const auto& b : blocklist) {
    auto n = normalize_phrase(b);
    if (!n.empty()) blocked.insert(std::move(n));
  }
  std::unordered_set<std::string> seen;
  std::vector<std::string> out;
  for (const auto& line : raw) {
    auto phrase = trim(line);
    if (phrase.empty()) continue;
    auto key = normalize_phrase(phrase);
    if (blocked.contains(key)) continue;
    if (!seen.insert(std::move(key)).second) continue;
    out.push_back(std::move(phrase));
  }
  return out;
}

inline std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read phrase file: " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  if (!lines.empty() && lines.front().rfind("\xEF\xBB\xBF", 0) == 0) lines.front().erase(0, 3);
  return lines;
}

/// Loads one phrase per line. The optional blocklist file uses the same format.
inline Vocabulary load_phrases(const std::filesystem::path& path, VocabKind kind,
                               const std::optional<std::filesystem::path>& blocklist = std::nullopt) {
  auto raw = read_lines(path);
  std::vector<std::string> blocked;
  if (blocklist) blocked = read_lines(*blocklist);
  Vocabulary vocab{kind, clean_phrases(raw, blocked), path.filename().string()};
  if (vocab.phrases.empty()) throw ConfigError("no phrases left after cleaning " + path.string());
  return vocab;
}

// ---------------------------------------------------------------------------
// Event filtering

struct PhraseStructure {
  std::vector<std::string> verbs;
  std::vector<std::string> arguments;
};

/// Labels verbs and arguments in a phrase. May throw for phrases it cannot label.
class StructureAnnotator {
 public:
  virtual ~StructureAnnotator() = default;
  virtual PhraseStructure annotate(const std::string& phrase) const = 0;
};

/// Precomputed labels: {phrase: {"verbs": [...], "arguments": [...]}}.
class FileStructureAnnotator : public StructureAnnotator {
 public:
  explicit FileStructureAnnotator(const json& table) {
    for (const auto& [phrase, entry] : table.items()) {
      labels_.emplace(phrase, PhraseStructure{entry.value("verbs", std::vector<std::string>{}),
                                              entry.value("arguments", std::vector<std::string>{})});
    }
  }

  static FileStructureAnnotator from_file(const std::filesystem::path& path) {
    return FileStructureAnnotator(read_json_file(path));
  }

  PhraseStructure annotate(const std::string& phrase) const override {
    auto it = labels_.find(phrase);
    if (it == labels_.end()) throw Error("no structure labels for '" + phrase + "'");
    return it->second;
  }

 private:
  std::map<std::string, PhraseStructure> labels_;
};

/// Closed-class lexicon heuristic. A word is a verb when it (or its
/// lowercase form) is in the bundled verb list; every other word that is not
/// a function word counts as an argument.
class HeuristicStructureAnnotator : public StructureAnnotator {
 public:
  HeuristicStructureAnnotator() : verbs_(default_verbs()), stopwords_(default_stopwords()) {}
  HeuristicStructureAnnotator(std::set<std::string> verbs, std::set<std::string> stopwords)
      : verbs_(std::move(verbs)), stopwords_(std::move(stopwords)) {}

  PhraseStructure annotate(const std::string& phrase) const override {
    PhraseStructure out;
    for (auto& raw : split_whitespace(phrase)) {
      std::string w;
      for (char c : ascii_lower(raw)) {
        if (!is_ascii_punct(c) || c == '-' || c == '\'') w.push_back(c);
      }
      if (w.empty()) continue;
      if (verbs_.contains(w)) {
        out.verbs.push_back(w);
      } else if (!stopwords_.contains(w)) {
        out.arguments.push_back(w);
      }
    }
    return out;
  }

  static std::set<std::string> default_verbs() {
    static const char* base[] = {
        "add",    "bake",   "blow",   "boil",   "bounce", "brush",  "build",  "carry",  "catch",
        "chase",  "chop",   "clap",   "clean",  "climb",  "close",  "cook",   "cover",  "cross",
        "cut",    "dance",  "dig",    "dive",   "draw",   "drink",  "drive",  "drop",   "eat",
        "feed",   "fill",   "fix",    "fly",    "fold",   "fry",    "grab",   "grill",  "hang",
        "hit",    "hold",   "hug",    "jump",   "kick",   "kiss",   "knead",  "laugh",  "lay",
        "lift",   "load",   "make",   "melt",   "mix",    "move",   "open",   "paint",  "peel",
        "pick",   "place",  "play",   "pour",   "pull",   "push",   "put",    "read",   "ride",
        "roll",   "row",    "run",    "serve",  "sew",    "shake",  "shoot",  "sing",   "sit",
        "skate",  "ski",    "sleep",  "slice",  "smile",  "speak",  "spread", "stand",  "stir",
        "surf",   "sweep",  "swim",   "swing",  "take",   "talk",   "taste",  "throw",  "tie",
        "touch",  "turn",   "type",   "walk",   "wash",   "watch",  "wave",   "wear",   "whisk",
        "wipe",   "write",  "decorate", "splash", "pipe", "show",   "use",    "kneel",  "lean",   "look",
        "ring",   "set",    "sail",   "shave",  "sprinkle", "squeeze", "wrap", "rise",   "sink",
        "shine",  "spin",   "toss",   "fish",   "hunt",   "kayak",  "paddle", "repair"};
    static const char* irregular[] = {
        "ate",   "blew",  "blown",  "bought", "brought", "built",  "caught", "cooked", "cutting",
        "dug",   "drank", "drawn",  "drew",   "driven",  "drove",  "eaten",  "fed",    "flew",
        "flown", "held",  "hung",   "laid",   "made",    "ran",    "rode",   "sang",   "sat",
        "shook", "shot",  "slept",  "spoke",  "stood",   "swam",   "swung",  "taken",  "threw",
        "thrown", "took", "wore",   "worn",   "written", "wrote",  "risen",  "rose",   "set",
        "put",   "cut",   "hit",    "spun",   "sunk",    "sank",   "shone",  "dove",   "ridden"};
    std::set<std::string> out;
    for (const char* b : base) {
      std::string v = b;
      out.insert(v);
      out.insert(v + "s");
      out.insert(v + "ed");
      out.insert(v + "ing");
      if (v.back() == 'e') {
        auto stem = v.substr(0, v.size() - 1);
        out.insert(stem + "ing");
        out.insert(v + "d");
      }
      // consonant doubling: cut -> cutting, run -> running
      if (v.size() >= 3) {
        auto is_vowel = [](char c) { return std::string_view("aeiou").find(c) != std::string_view::npos; };
        char a = v[v.size() - 3], b2 = v[v.size() - 2], c = v.back();
        if (!is_vowel(a) && is_vowel(b2) && !is_vowel(c) && c != 'w' && c != 'x' && c != 'y') {
          out.insert(v + c + "ing");
          out.insert(v + c + "ed");
        }
      }
      if (v.back() == 'y') out.insert(v.substr(0, v.size() - 1) + "ies");
      if (v.back() == 'h' || v.back() == 's' || v.back() == 'x') out.insert(v + "es");
    }
    for (const char* w : irregular) out.insert(w);
    return out;
  }

  static std::set<std::string> default_stopwords() {
    return {"a",    "an",  "the", "of",  "in",   "on",   "at",  "to",   "for",  "with", "by",
            "from", "up",  "down", "out", "over", "under", "into", "onto", "and", "or",  "is",
            "are",  "was", "were", "be",  "been", "being", "it",  "its",  "this", "that", "some",
            "very", "his", "her",  "their", "my", "your",  "our", "as",   "off",  "away", "back"};
  }

 private:
  std::set<std::string> verbs_;
  std::set<std::string> stopwords_;
};

/// Keeps phrases with at least one verb and one argument. A phrase the
/// annotator throws on is dropped with a warning.
inline std::vector<std::string> filter_events(std::span<const std::string> phrases,
                                              const StructureAnnotator& annotator) {
  std::vector<std::string> out;
  for (const auto& p : phrases) {
    try {
      auto s = annotator.annotate(p);
      if (!s.verbs.empty() && !s.arguments.empty()) out.push_back(p);
    } catch (const std::exception& e) {
      log(LogLevel::warning, "filter_events: dropping '" + p + "': " + e.what());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Similarity dedup and embedding

/// Greedy single pass in input order: a phrase survives iff its cosine
/// similarity to every already-kept phrase is <= threshold.
inline std::vector<std::string> dedup_by_similarity(std::span<const std::string> phrases,
                                                    TextEmbedder& embedder, double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw ConfigError("dedup threshold must be in (0, 1], got " + std::to_string(threshold));
  }
  if (phrases.empty()) return {};
  std::vector<Vector> vectors;
  try {
    vectors = embedder.embed_text(phrases);
  } catch (const Error& batch_error) {
    // Re-embed one by one to name the failing phrase.
    for (const auto& p : phrases) {
      try {
        embedder.embed_one(p);
      } catch (const std::exception& e) {
        throw Error("dedup_by_similarity: embedding failed for '" + p + "': " + e.what());
      }
    }
    throw;
  }
  if (vectors.size() != phrases.size()) throw Error("dedup_by_similarity: embedder returned wrong count");
  std::vector<std::size_t> kept;
  std::vector<std::string> out;
  for (std::size_t i = 0; i < phrases.size(); ++i) {
    bool keep = true;
    for (auto j : kept) {
      if (cosine(vectors[i], vectors[j]) > threshold) {
        keep = false;
        break;
      }
    }
    if (keep) {
      kept.push_back(i);
      out.push_back(phrases[i]);
    }
  }
  return out;
}

inline VocabEmbedding embed_vocab(const Vocabulary& vocab, TextEmbedder& embedder) {
  const std::size_t dim = embedder.dim();
  if (dim == 0) throw Error("embed_vocab: embedder dim is 0");
  VocabEmbedding out{vocab.kind, dim, vocab.phrases, {}};
  if (vocab.phrases.empty()) return out;
  auto rows = embedder.embed_text(vocab.phrases);
  if (rows.size() != vocab.phrases.size()) throw Error("embed_vocab: embedder returned wrong count");
  out.vectors.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != dim) {
      throw Error("embed_vocab: dimension mismatch for '" + vocab.phrases[i] + "'");
    }
    try {
      out.vectors.push_back(normalized(rows[i]));
    } catch (const Error& e) {
      throw Error("embed_vocab: '" + vocab.phrases[i] + "': " + e.what());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Embedded vocabulary store
//
// JSON: {"kind", "dim", "phrases": [...], "vectors": [[...], ...]}.
// Binary (little-endian): "VPVE" u32 version=1, u32 kind, u32 dim, u32 count,
// then count x (u32 byte length, UTF-8 bytes), then count*dim float32.

inline json to_json(const VocabEmbedding& v) {
  return {{"kind", std::string(to_string(v.kind))},
          {"dim", v.dim},
          {"phrases", v.phrases},
          {"vectors", v.vectors}};
}

inline void validate(const VocabEmbedding& v) {
  if (v.dim == 0) throw Error("vocabulary store: dim must be > 0");
  if (v.vectors.size() != v.phrases.size()) throw Error("vocabulary store: row count != phrase count");
  for (std::size_t i = 0; i < v.vectors.size(); ++i) {
    if (v.vectors[i].size() != v.dim) throw Error("vocabulary store: bad row width at " + std::to_string(i));
  }
}

inline VocabEmbedding vocab_embedding_from_json(const json& j) {
  VocabEmbedding v;
  v.kind = parse_vocab_kind(j.at("kind").get<std::string>());
  v.dim = j.at("dim").get<std::size_t>();
  v.phrases = j.at("phrases").get<std::vector<std::string>>();
  v.vectors = j.at("vectors").get<std::vector<Vector>>();
  validate(v);
  return v;
}

namespace detail {
inline void put_u32(std::string& out, std::uint32_t x) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((x >> (8 * i)) & 0xFF));
}
inline std::uint32_t get_u32(std::string_view in, std::size_t& pos) {
  if (pos + 4 > in.size()) throw Error("vocabulary store: truncated");
  std::uint32_t x = 0;
  for (int i = 0; i < 4; ++i) x |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  pos += 4;
  return x;
}
}  // namespace detail

inline std::string to_binary(const VocabEmbedding& v) {
  validate(v);
  std::string out = "VPVE";
  detail::put_u32(out, 1);
  detail::put_u32(out, static_cast<std::uint32_t>(v.kind));
  detail::put_u32(out, static_cast<std::uint32_t>(v.dim));
  detail::put_u32(out, static_cast<std::uint32_t>(v.phrases.size()));
  for (const auto& p : v.phrases) {
    detail::put_u32(out, static_cast<std::uint32_t>(p.size()));
    out += p;
  }
  for (const auto& row : v.vectors) {
    for (float x : row) detail::put_u32(out, std::bit_cast<std::uint32_t>(x));
  }
  return out;
}

inline VocabEmbedding vocab_embedding_from_binary(std::string_view data) {
  if (data.substr(0, 4) != "VPVE") throw Error("vocabulary store: bad magic");
  std::size_t pos = 4;
  if (detail::get_u32(data, pos) != 1) throw Error("vocabulary store: unsupported version");
  VocabEmbedding v;
  auto kind = detail::get_u32(data, pos);
  if (kind > 2) throw Error("vocabulary store: bad kind");
  v.kind = static_cast<VocabKind>(kind);
  v.dim = detail::get_u32(data, pos);
  auto count = detail::get_u32(data, pos);
  for (std::uint32_t i = 0; i < count; ++i) {
    auto len = detail::get_u32(data, pos);
    if (pos + len > data.size()) throw Error("vocabulary store: truncated");
    v.phrases.emplace_back(data.substr(pos, len));
    pos += len;
  }
  v.vectors.assign(count, Vector(v.dim));
  for (auto& row : v.vectors) {
    for (auto& x : row) x = std::bit_cast<float>(detail::get_u32(data, pos));
  }
  if (pos != data.size()) throw Error("vocabulary store: trailing bytes");
  validate(v);
  return v;
}

/// Format chosen by extension: ".bin" is binary, anything else JSON.
inline void save_vocab_embedding(const VocabEmbedding& v, const std::filesystem::path& path) {
  if (path.extension() == ".bin") {
    write_file_atomic(path, to_binary(v));
  } else {
    validate(v);
    write_file_atomic(path, to_json(v).dump() + "\n");
  }
}

inline VocabEmbedding load_vocab_embedding(const std::filesystem::path& path) {
  if (path.extension() == ".bin") return vocab_embedding_from_binary(read_file(path));
  return vocab_embedding_from_json(read_json_file(path));
}

}  // namespace vidprompt

// Copyright 2026 The vidprompt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iostream>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <unicode/unistr.h>

namespace vidprompt {

/// Base error for everything the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed configuration, missing files and other caller mistakes.
class ConfigError : public Error {
 public:
  using Error::Error;
};

using Vector = std::vector<float>;

enum class VocabKind { object, event, attribute };

inline constexpr VocabKind kAllVocabKinds[] = {VocabKind::object, VocabKind::event,
                                               VocabKind::attribute};

inline std::string_view to_string(VocabKind kind) {
  switch (kind) {
    case VocabKind::object:
      return "object";
    case VocabKind::event:
      return "event";
    case VocabKind::attribute:
      return "attribute";
  }
  throw Error("invalid VocabKind");
}

/// Plural key used in JSON documents and config files ("objects", ...).
inline std::string_view plural_key(VocabKind kind) {
  switch (kind) {
    case VocabKind::object:
      return "objects";
    case VocabKind::event:
      return "events";
    case VocabKind::attribute:
      return "attributes";
  }
  throw Error("invalid VocabKind");
}

inline VocabKind parse_vocab_kind(std::string_view text) {
  for (auto kind : kAllVocabKinds) {
    if (text == to_string(kind) || text == plural_key(kind)) return kind;
  }
  throw ConfigError("unknown vocabulary kind '" + std::string(text) + "'");
}

enum class TaskKind { caption, caption_with_asr, qa, vlep };

inline constexpr TaskKind kAllTaskKinds[] = {TaskKind::caption, TaskKind::caption_with_asr,
                                             TaskKind::qa, TaskKind::vlep};

inline std::string_view to_string(TaskKind task) {
  switch (task) {
    case TaskKind::caption:
      return "caption";
    case TaskKind::caption_with_asr:
      return "caption_with_asr";
    case TaskKind::qa:
      return "qa";
    case TaskKind::vlep:
      return "vlep";
  }
  throw Error("invalid TaskKind");
}

inline TaskKind parse_task_kind(std::string_view text) {
  for (auto task : kAllTaskKinds) {
    if (text == to_string(task)) return task;
  }
  throw ConfigError("unknown task '" + std::string(text) + "'");
}

// ---------------------------------------------------------------------------
// Logging

enum class LogLevel { debug, info, warning, error };

using LogSink = std::function<void(LogLevel, std::string_view)>;

namespace detail {
inline LogSink& log_sink() {
  static LogSink sink = [](LogLevel level, std::string_view msg) {
    static constexpr const char* names[] = {"debug", "info", "warning", "error"};
    std::clog << "[" << names[static_cast<int>(level)] << "] " << msg << '\n';
  };
  return sink;
}
inline std::mutex& log_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace detail

/// Replace the process-wide log sink. Returns the previous one.
inline LogSink set_log_sink(LogSink sink) {
  std::lock_guard lock(detail::log_mutex());
  auto prev = std::move(detail::log_sink());
  detail::log_sink() = std::move(sink);
  return prev;
}

inline void log(LogLevel level, std::string_view msg) {
  std::lock_guard lock(detail::log_mutex());
  if (detail::log_sink()) detail::log_sink()(level, msg);
}

// ---------------------------------------------------------------------------
// Text helpers

inline std::string_view trim_view(std::string_view s) {
  constexpr std::string_view ws = " \t\r\n\f\v";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

inline std::string trim(std::string_view s) { return std::string(trim_view(s)); }

/// Unicode full case folding (ICU) of the trimmed input.
inline std::string normalize_phrase(std::string_view s) {
  auto t = trim_view(s);
  icu::UnicodeString u =
      icu::UnicodeString::fromUTF8(icu::StringPiece(t.data(), static_cast<int32_t>(t.size())));
  u.foldCase();
  std::string out;
  u.toUTF8String(out);
  return out;
}

inline std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

inline bool is_ascii_punct(char c) {
  auto u = static_cast<unsigned char>(c);
  return u < 128 && std::ispunct(u) != 0;
}

inline std::vector<std::string> split_whitespace(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

inline std::string join(std::span<const std::string> parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Vector math

/// Cosine similarity with 64-bit accumulation.
template <typename A, typename B>
double cosine(std::span<const A> a, std::span<const B> b) {
  if (a.size() != b.size()) {
    throw Error("cosine: dimension mismatch (" + std::to_string(a.size()) + " vs " +
                std::to_string(b.size()) + ")");
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = static_cast<double>(a[i]);
    const double y = static_cast<double>(b[i]);
    dot += x * y;
    na += x * x;
    nb += y * y;
  }
  if (na == 0.0 || nb == 0.0) throw Error("cosine: zero vector");
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

inline double cosine(const Vector& a, const Vector& b) {
  return cosine(std::span<const float>(a), std::span<const float>(b));
}

inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  return cosine(std::span<const double>(a), std::span<const double>(b));
}

inline double l2_norm(std::span<const float> v) {
  double s = 0.0;
  for (float x : v) s += static_cast<double>(x) * static_cast<double>(x);
  return std::sqrt(s);
}

/// L2-normalize. Throws on zero or non-finite input.
inline Vector normalized(std::span<const float> v) {
  for (float x : v) {
    if (!std::isfinite(x)) throw Error("non-finite value in embedding");
  }
  const double n = l2_norm(v);
  if (n == 0.0) throw Error("cannot normalize a zero vector");
  Vector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = static_cast<float>(static_cast<double>(v[i]) / n);
  }
  return out;
}

}  // namespace vidprompt

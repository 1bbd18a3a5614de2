// Copyright 2026 The vidprompt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Corpus-level captioning metrics (BLEU-4, ROUGE-L, CIDEr-D), QA accuracy,
// candidate mapping for multiple-choice outputs, and Recall@k.
//
// Constants follow the usual captioning-evaluation conventions:
//   BLEU-4   uniform weights over n = 1..4, clipped counts pooled over the
//            corpus, closest reference length (shorter on ties), brevity
//            penalty exp(1 - r/c) when c <= r, and 0 when any n has no match.
//   ROUGE-L  F-measure with beta = 1.2 from the best LCS precision and the
//            best LCS recall over an instance's references; corpus mean.
//   CIDEr-D  n = 1..4, tf-idf with document frequency over reference sets,
//            idf = log(N) - log(max(1, df)), clipped numerator
//            min(hyp, ref) * ref, Gaussian length penalty with sigma = 6
//            (length counted in bigrams), mean over n and references, x10.

#include <array>
#include <numeric>
#include <set>

#include "vidprompt/providers.hpp"

namespace vidprompt {

/// Lowercases and splits on whitespace after separating each ASCII
/// punctuation character into its own token.
inline std::vector<std::string> caption_tokens(std::string_view text) {
  std::string spaced;
  spaced.reserve(text.size() * 2);
  for (char c : ascii_lower(text)) {
    if (is_ascii_punct(c)) {
      spaced += ' ';
      spaced += c;
      spaced += ' ';
    } else {
      spaced += c;
    }
  }
  return split_whitespace(spaced);
}

using NGram = std::vector<std::string>;
using NGramCounts = std::map<NGram, int>;

inline NGramCounts ngram_counts(std::span<const std::string> tokens, std::size_t n) {
  NGramCounts out;
  if (tokens.size() < n) return out;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) out[NGram(tokens.begin() + i, tokens.begin() + i + n)] += 1;
  return out;
}

namespace detail {
inline void check_corpus(std::size_t hyps, std::size_t refs, const char* who) {
  if (hyps == 0) throw Error(std::string(who) + ": empty corpus");
  if (hyps != refs) throw Error(std::string(who) + ": hypotheses and references are not aligned");
}
}  // namespace detail

inline double bleu4(std::span<const std::string> hypotheses, std::span<const std::vector<std::string>> references) {
  detail::check_corpus(hypotheses.size(), references.size(), "bleu4");
  constexpr std::size_t kMaxN = 4;
  std::array<double, kMaxN> matched{}, total{};
  double hyp_len = 0.0, ref_len = 0.0;
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    if (references[i].empty()) throw Error("bleu4: instance " + std::to_string(i) + " has no references");
    auto hyp = caption_tokens(hypotheses[i]);
    std::vector<std::vector<std::string>> refs;
    for (const auto& r : references[i]) refs.push_back(caption_tokens(r));

    hyp_len += static_cast<double>(hyp.size());
    std::size_t best = refs[0].size();
    for (const auto& r : refs) {
      auto d = [&](std::size_t len) { return len > hyp.size() ? len - hyp.size() : hyp.size() - len; };
      if (d(r.size()) < d(best) || (d(r.size()) == d(best) && r.size() < best)) best = r.size();
    }
    ref_len += static_cast<double>(best);

    for (std::size_t n = 1; n <= kMaxN; ++n) {
      auto hc = ngram_counts(hyp, n);
      NGramCounts max_ref;
      for (const auto& r : refs) {
        for (const auto& [g, c] : ngram_counts(r, n)) max_ref[g] = std::max(max_ref[g], c);
      }
      for (const auto& [g, c] : hc) {
        auto it = max_ref.find(g);
        matched[n - 1] += std::min(c, it == max_ref.end() ? 0 : it->second);
        total[n - 1] += c;
      }
    }
  }
  double log_sum = 0.0;
  for (std::size_t n = 0; n < kMaxN; ++n) {
    if (total[n] == 0.0 || matched[n] == 0.0) return 0.0;
    log_sum += std::log(matched[n] / total[n]);
  }
  const double bp = hyp_len > ref_len ? 1.0 : std::exp(1.0 - ref_len / hyp_len);
  return bp * std::exp(log_sum / kMaxN);
}

inline std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

inline constexpr double kRougeBeta = 1.2;

inline double rouge_l_instance(std::string_view hypothesis, std::span<const std::string> references) {
  if (references.empty()) throw Error("rouge_l: instance has no references");
  auto hyp = caption_tokens(hypothesis);
  double best_p = 0.0, best_r = 0.0;
  for (const auto& r : references) {
    auto ref = caption_tokens(r);
    const double lcs = static_cast<double>(lcs_length(hyp, ref));
    if (!hyp.empty()) best_p = std::max(best_p, lcs / static_cast<double>(hyp.size()));
    if (!ref.empty()) best_r = std::max(best_r, lcs / static_cast<double>(ref.size()));
  }
  if (best_p == 0.0 || best_r == 0.0) return 0.0;
  const double b2 = kRougeBeta * kRougeBeta;
  return (1.0 + b2) * best_p * best_r / (best_r + b2 * best_p);
}

inline double rouge_l(std::span<const std::string> hypotheses, std::span<const std::vector<std::string>> references) {
  detail::check_corpus(hypotheses.size(), references.size(), "rouge_l");
  double sum = 0.0;
  for (std::size_t i = 0; i < hypotheses.size(); ++i) sum += rouge_l_instance(hypotheses[i], references[i]);
  return sum / static_cast<double>(hypotheses.size());
}

inline constexpr double kCiderSigma = 6.0;

/// CIDEr-D over the corpus; also returns per-instance scores when asked.
inline double cider_d(std::span<const std::string> hypotheses, std::span<const std::vector<std::string>> references,
                      std::vector<double>* per_instance = nullptr) {
  detail::check_corpus(hypotheses.size(), references.size(), "cider_d");
  if (hypotheses.size() < 2) throw Error("cider_d: need at least 2 instances for document frequencies");
  constexpr std::size_t kMaxN = 4;

  struct Counts {
    std::array<NGramCounts, kMaxN> by_n;
  };
  auto count_all = [](const std::string& text) {
    auto toks = caption_tokens(text);
    Counts c;
    for (std::size_t n = 1; n <= kMaxN; ++n) c.by_n[n - 1] = ngram_counts(toks, n);
    return c;
  };

  std::vector<Counts> hyp_counts;
  std::vector<std::vector<Counts>> ref_counts;
  std::map<NGram, double> df;
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    if (references[i].empty()) throw Error("cider_d: instance " + std::to_string(i) + " has no references");
    hyp_counts.push_back(count_all(hypotheses[i]));
    std::vector<Counts> refs;
    std::set<NGram> seen;
    for (const auto& r : references[i]) {
      refs.push_back(count_all(r));
      for (const auto& by_n : refs.back().by_n) {
        for (const auto& [g, c] : by_n) seen.insert(g);
      }
    }
    for (const auto& g : seen) df[g] += 1.0;
    ref_counts.push_back(std::move(refs));
  }
  const double log_docs = std::log(static_cast<double>(hypotheses.size()));

  struct Vec {
    std::array<std::map<NGram, double>, kMaxN> w;
    std::array<double, kMaxN> norm{};
    double length = 0.0;
  };
  auto to_vec = [&](const Counts& c) {
    Vec v;
    for (std::size_t n = 0; n < kMaxN; ++n) {
      double sq = 0.0;
      for (const auto& [g, tf] : c.by_n[n]) {
        auto it = df.find(g);
        const double d = std::log(std::max(1.0, it == df.end() ? 0.0 : it->second));
        const double w = tf * (log_docs - d);
        v.w[n][g] = w;
        sq += w * w;
        if (n == 1) v.length += tf;
      }
      v.norm[n] = std::sqrt(sq);
    }
    return v;
  };
  auto sim = [](const Vec& h, const Vec& r) {
    const double delta = h.length - r.length;
    std::array<double, kMaxN> val{};
    for (std::size_t n = 0; n < kMaxN; ++n) {
      for (const auto& [g, hw] : h.w[n]) {
        auto it = r.w[n].find(g);
        if (it != r.w[n].end()) val[n] += std::min(hw, it->second) * it->second;
      }
      if (h.norm[n] != 0.0 && r.norm[n] != 0.0) val[n] /= h.norm[n] * r.norm[n];
      val[n] *= std::exp(-(delta * delta) / (2.0 * kCiderSigma * kCiderSigma));
    }
    return val;
  };

  double total = 0.0;
  if (per_instance) per_instance->clear();
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    auto hv = to_vec(hyp_counts[i]);
    std::array<double, kMaxN> acc{};
    for (const auto& rc : ref_counts[i]) {
      auto s = sim(hv, to_vec(rc));
      for (std::size_t n = 0; n < kMaxN; ++n) acc[n] += s[n];
    }
    double mean = 0.0;
    for (double a : acc) mean += a;
    mean /= static_cast<double>(kMaxN);
    mean /= static_cast<double>(ref_counts[i].size());
    mean *= 10.0;
    if (per_instance) per_instance->push_back(mean);
    total += mean;
  }
  return total / static_cast<double>(hypotheses.size());
}

// ---------------------------------------------------------------------------

/// Lowercase, drop ASCII punctuation, collapse whitespace, strip leading articles.
inline std::string normalize_answer(std::string_view text) {
  std::string cleaned;
  for (char c : ascii_lower(text)) {
    if (!is_ascii_punct(c)) cleaned += c;
  }
  auto words = split_whitespace(cleaned);
  std::size_t start = 0;
  while (start < words.size() && (words[start] == "a" || words[start] == "an" || words[start] == "the")) ++start;
  return join(std::span<const std::string>(words).subspan(start), " ");
}

/// Exact match after normalize_answer. Golds without a prediction count as wrong.
inline double qa_accuracy(const std::map<std::string, std::string>& predictions,
                          const std::map<std::string, std::string>& golds) {
  if (golds.empty()) throw Error("qa_accuracy: no gold answers");
  std::size_t hits = 0;
  for (const auto& [id, gold] : golds) {
    auto it = predictions.find(id);
    if (it != predictions.end() && normalize_answer(it->second) == normalize_answer(gold)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(golds.size());
}

/// Index of the candidate closest to the generated text; ties go to the lower index.
inline std::size_t map_to_candidate(const std::string& generated, std::span<const std::string> candidates,
                                    TextEmbedder& embedder) {
  if (candidates.empty()) throw Error("map_to_candidate: no candidates");
  std::vector<std::string> texts{generated};
  texts.insert(texts.end(), candidates.begin(), candidates.end());
  auto vecs = embedder.embed_text(texts);
  if (vecs.size() != texts.size()) throw Error("map_to_candidate: embedder returned wrong count");
  std::size_t best = 0;
  double best_sim = cosine(vecs[0], vecs[1]);
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const double s = cosine(vecs[0], vecs[i + 1]);
    if (s > best_sim) {
      best_sim = s;
      best = i;
    }
  }
  return best;
}

/// Fraction of queries whose gold item ranks in the top k of its row
/// (descending similarity, lower item index first on ties).
inline double recall_at_k(const std::vector<std::vector<double>>& similarity, std::span<const std::size_t> gold,
                          std::size_t k) {
  if (k < 1) throw Error("recall_at_k: k must be >= 1");
  if (similarity.size() != gold.size()) throw Error("recall_at_k: one gold index per query required");
  if (similarity.empty()) throw Error("recall_at_k: no queries");
  std::size_t hits = 0;
  for (std::size_t q = 0; q < similarity.size(); ++q) {
    const auto& row = similarity[q];
    if (gold[q] >= row.size()) throw Error("recall_at_k: gold index out of range for query " + std::to_string(q));
    const double g = row[gold[q]];
    std::size_t ahead = 0;
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (row[j] > g || (row[j] == g && j < gold[q])) ++ahead;
    }
    if (ahead < k) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(similarity.size());
}

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

/// Mean and sample standard deviation (n - 1); a single value has std 0.
inline MeanStd mean_std(std::span<const double> values) {
  if (values.empty()) throw Error("mean_std: no values");
  const double n = static_cast<double>(values.size());
  // offsets from the first value keep identical inputs exact
  double offset = 0.0;
  for (double v : values) offset += v - values[0];
  const double mean = values[0] + offset / n;
  if (values.size() == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1.0))};
}

}  // namespace vidprompt

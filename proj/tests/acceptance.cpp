// Copyright 2026 The vidprompt Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit when any
// line fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "prompt_checks.hpp"
#include "test_util.hpp"

using namespace vidprompt;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
  std::set<std::string> seen;

  // one message per distinct prefix (text before the first ':')
  void fail(const std::string& why) {
    if (seen.insert(why.substr(0, why.find(':'))).second) detail += (detail.empty() ? "" : "; ") + why;
    ok = false;
  }
  void expect(bool cond, const std::string& why) {
    if (!cond) fail(why);
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double x, int precision = 3) {
  std::ostringstream s;
  s.precision(precision);
  s << x;
  return s.str();
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) out += (out.empty() ? "" : " | ") + s;
  return "[" + out + "]";
}

// ---------------------------------------------------------------------------

Outcome tokenization() {
  Outcome o;
  std::mt19937_64 rng(2024);
  std::normal_distribution<float> g;
  auto unit = [&](std::size_t dim) {
    Vector v(dim);
    for (auto& x : v) x = g(rng);
    return normalized(v);
  };
  const auto t0 = Clock::now();
  for (int c = 0; c < 100 && o.ok; ++c) {
    VocabEmbedding vocab{VocabKind::object, 8, {}, {}};
    for (int i = 0; i < 50; ++i) {
      vocab.phrases.push_back("phrase-" + std::to_string(i));
      vocab.vectors.push_back(unit(8));
    }
    auto frame = unit(8);
    auto got = tokenize_frame({3, frame}, vocab, 5);
    auto want = oracle::top_k(frame, vocab, 5);
    std::vector<std::string> names;
    for (const auto& t : got) names.push_back(t.phrase);
    o.expect(names == want, "case " + std::to_string(c) + ": got " + join(names) + " want " + join(want));
  }
  const double secs = seconds_since(t0);
  o.expect(secs < 1.0, "took " + fmt(secs) + " s");
  if (o.ok) o.detail = "100 cases, " + fmt(secs * 1000, 3) + " ms";
  return o;
}

Outcome aggregation() {
  Outcome o;
  std::size_t cases = 0;
  oracle::for_each_two_frame_case(oracle::aggregation_tables(), [&](const PerFrameTokens& per_frame) {
    ++cases;
    auto got = aggregate_tokens(per_frame, {4, 2});
    const auto& list = got.at(VocabKind::object);
    std::vector<std::string> names;
    for (const auto& t : list) names.push_back(t.phrase);
    auto want = oracle::aggregate(per_frame, VocabKind::object, 4, 2);
    o.expect(names == want, "case " + std::to_string(cases) + ": got " + join(names) + " want " + join(want));
    o.expect(list.size() <= 4, "more than 4 tokens");
    for (std::size_t i = 0; i < list.size(); ++i) {
      o.expect(list[i].best_rank <= 2, list[i].phrase + " has best rank " + std::to_string(list[i].best_rank));
      if (i) o.expect(list[i - 1].temporal_indicator <= list[i].temporal_indicator, "not sorted by mean frame index");
    }
  });
  if (o.ok) o.detail = std::to_string(cases) + " cases";
  return o;
}

Outcome temporal_templates() {
  Outcome o;
  using V = std::vector<std::string>;
  o.expect(temporal_markers(3) == V{"First,", "Then,", "Finally,"}, "markers(3) = " + join(temporal_markers(3)));
  o.expect(temporal_markers(4) == V{"First,", "Then,", "After that,", "Finally,"},
           "markers(4) = " + join(temporal_markers(4)));
  for (int n = 0; n <= 12; ++n) {
    auto m = temporal_markers(n);
    o.expect(static_cast<int>(m.size()) == n, "markers(" + std::to_string(n) + ") has wrong length");
    if (n >= 1) o.expect(m.front() == "First,", "markers(" + std::to_string(n) + ") does not start with First");
    if (n >= 2) o.expect(m.back() == "Finally,", "markers(" + std::to_string(n) + ") does not end with Finally");
    for (int i = 1; i + 1 < n; ++i) {
      o.expect(m[static_cast<std::size_t>(i)] == "Then," || m[static_cast<std::size_t>(i)] == "After that,",
               "markers(" + std::to_string(n) + ") has an unexpected middle marker");
    }
  }
  return o;
}

Outcome golden_prompts() {
  Outcome o;
  for (auto task : kAllTaskKinds) {
    const auto name = "prompt_" + std::string(to_string(task)) + ".txt";
    const auto path = vptest::data_dir() / "golden" / name;
    o.expect(fs::exists(path) && read_file(path) == fixture::render(fixture::prompt_case(task)),
             name + " does not match");
  }
  auto ctx = fixture::caption_case().context;
  auto sunset = build_prompt(TaskKind::caption, ctx, fixture::sunset_query()).rendered;
  auto sunrise = build_prompt(TaskKind::caption, ctx, fixture::sunrise_query()).rendered;
  o.expect(read_file(vptest::data_dir() / "golden" / "prompt_sunset.txt") == sunset, "sunset golden differs");
  o.expect(read_file(vptest::data_dir() / "golden" / "prompt_sunrise.txt") == sunrise, "sunrise golden differs");
  std::string why;
  o.expect(vptest::differs_only_by_reordering(sunset, sunrise, &why), "sunset/sunrise: " + why);
  if (o.ok) o.detail = "4 tasks + sunset/sunrise";
  return o;
}

Outcome in_context_selection() {
  Outcome o;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<LabeledExample> data;
    for (int i = 0; i < 10; ++i) {
      auto id = "ex" + std::to_string(100 + i);
      data.push_back(fixture::example(id, {{"obj"}, {}, {}, {"caption " + id}, std::nullopt}, "annotation " + id));
    }
    std::vector<double> w(data.size());
    for (auto& x : w) x = std::round(u(rng) * 8) / 8;
    w[static_cast<std::size_t>(trial) % w.size()] += 0.01;
    json vectors = json::object();
    for (std::size_t i = 0; i < data.size(); ++i) {
      std::vector<double> e(data.size(), 0.0);
      e[i] = 1.0;
      vectors[example_key(data[i], TaskKind::caption)] = e;
    }
    vectors["query"] = w;
    TableTextEmbedder embedder(json{{"dim", data.size()}, {"vectors", vectors}});
    const std::size_t N = 1 + static_cast<std::size_t>(trial) % 6;

    auto support = sample_support(data, 10, static_cast<std::uint64_t>(trial));
    auto got = select_in_context(support, "query", N, TaskKind::caption, embedder);
    auto again = select_in_context(sample_support(data, 10, static_cast<std::uint64_t>(trial)), "query", N,
                                   TaskKind::caption, embedder);

    double norm = 0;
    for (double x : w) norm += x * x;
    std::vector<std::pair<double, std::string>> scored;
    for (std::size_t i = 0; i < data.size(); ++i) scored.emplace_back(w[i] / std::sqrt(norm), data[i].example_id);
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    scored.resize(N);
    std::sort(scored.begin(), scored.end());

    std::vector<std::string> got_ids, want_ids, again_ids;
    for (const auto& e : got) got_ids.push_back(e.example_id);
    for (const auto& e : again) again_ids.push_back(e.example_id);
    for (const auto& s : scored) want_ids.push_back(s.second);
    o.expect(got_ids == want_ids, "trial " + std::to_string(trial) + ": got " + join(got_ids) + " want " +
                                      join(want_ids));
    o.expect(got_ids == again_ids, "trial " + std::to_string(trial) + " is not deterministic");
    auto scores = score_in_context(support, "query", N, TaskKind::caption, embedder);
    for (std::size_t i = 1; i < scores.size(); ++i) {
      o.expect(scores[i - 1].similarity <= scores[i].similarity, "not ascending by similarity");
    }
  }
  if (o.ok) o.detail = "200 one-hot trials";
  return o;
}

/// Random phrase sets where a higher threshold keeps fewer phrases.
std::optional<std::string> dedup_monotonicity_counterexample(TextEmbedder& e) {
  std::mt19937_64 rng(31);
  const std::vector<std::string> words{"dog", "dogs", "run", "running", "cake", "cakes", "sun", "rising",
                                       "toy", "toys", "wet", "water", "red", "bright", "sky", "blue"};
  for (int set_no = 0; set_no < 2000; ++set_no) {
    std::vector<std::string> set;
    const auto n = 3 + rng() % 10;
    while (set.size() < n) {
      auto p = words[rng() % words.size()] + " " + words[rng() % words.size()];
      if (std::find(set.begin(), set.end(), p) == set.end()) set.push_back(p);
    }
    std::size_t prev = 0;
    double prev_t = 0;
    for (int step = 1; step <= 20; ++step) {
      const double t = step / 20.0;
      const auto size = dedup_by_similarity(set, e, t).size();
      if (size < prev) {
        return join(set) + " keeps " + std::to_string(prev) + " at " + fmt(prev_t) + " but " + std::to_string(size) +
               " at " + fmt(t);
      }
      prev = size;
      prev_t = t;
    }
  }
  return std::nullopt;
}

Outcome dedup() {
  Outcome o;
  HashingTextEmbedder hashing(256);
  const auto attributes = clean_phrases(read_lines(vptest::data_dir() / "e2e" / "attributes.txt"));
  const auto events = clean_phrases(read_lines(vptest::data_dir() / "e2e" / "events.txt"));

  for (const auto* set : {&attributes, &events}) {
    for (double t : {0.3, 0.5, 0.7, 0.9}) {
      auto once = dedup_by_similarity(*set, hashing, t);
      o.expect(dedup_by_similarity(once, hashing, t) == once, "not idempotent at " + fmt(t));
    }
  }
  if (auto cex = dedup_monotonicity_counterexample(hashing)) o.fail("not monotone in threshold: " + *cex);

  const std::vector<std::string> pair{"facing upward", "facing upwards"};
  if (const char* table = std::getenv("VIDPROMPT_DEDUP_TABLE")) {
    auto real = TableTextEmbedder::from_file(table);
    auto kept = dedup_by_similarity(attributes, *real, 0.9);
    const bool removed = std::find(kept.begin(), kept.end(), "facing upwards") == kept.end() &&
                         std::find(kept.begin(), kept.end(), "facing upward") != kept.end();
    o.expect(removed, "embedding table " + std::string(table) + " keeps both facing upward/upwards");
  } else {
    auto v = hashing.embed_text(pair);
    o.fail("facing upward/upwards not removed: no real embedder available (set VIDPROMPT_DEDUP_TABLE); "
           "hashing embedder cosine " + fmt(cosine(v[0], v[1])) + " <= 0.9");
  }
  return o;
}

struct Corpus {
  std::vector<std::string> hyps;
  std::vector<std::vector<std::string>> refs;
};

Outcome metrics() {
  Outcome o;
  auto j = read_json_file(vptest::data_dir() / "metrics" / "toy_corpus.json");
  Corpus c{j["hypotheses"].get<std::vector<std::string>>(), j["references"].get<std::vector<std::vector<std::string>>>()};
  auto near = [&](double got, double want, double tol, const std::string& what) {
    o.expect(std::abs(got - want) <= tol, what + ": " + fmt(got, 17) + " vs " + fmt(want, 17));
  };

  std::vector<std::vector<std::string>> self;
  for (const auto& h : c.hyps) self.push_back({h});
  near(bleu4(c.hyps, self), 1.0, 1e-9, "BLEU-4 on identical corpus");

  // hand-computed: p1..p4 = 10/12, 6/10, 3/8, 1/6 with equal lengths
  near(bleu4(std::vector<std::string>{"the cat sat on the mat", "a dog runs in the park"},
             std::vector<std::vector<std::string>>{{"the cat is on the mat"}, {"a dog runs in a park"}}),
       std::pow(10.0 / 12 * 6.0 / 10 * 3.0 / 8 * 1.0 / 6, 0.25), 1e-9, "BLEU-4 hand");
  // hand-computed: LCS 2, P = 2/3, R = 1, beta 1.2
  near(rouge_l_instance("a b c", std::vector<std::string>{"a c"}), (1 + 1.44) * (2.0 / 3) / (1 + 1.44 * (2.0 / 3)), 1e-9,
       "ROUGE-L hand");

  near(bleu4(c.hyps, c.refs), j["BLEU-4"].get<double>(), 1e-9, "BLEU-4 reference");
  near(rouge_l(c.hyps, c.refs), oracle::rouge_l(c.hyps, c.refs), 1e-9, "ROUGE-L brute force");
  near(rouge_l(c.hyps, c.refs), j["ROUGE-L"].get<double>(), 1e-9, "ROUGE-L reference");
  near(cider_d(c.hyps, c.refs), oracle::cider_d(c.hyps, c.refs), 1e-9, "CIDEr-D dense oracle");
  near(cider_d(c.hyps, c.refs), j["CIDEr-D"].get<double>(), 1e-9, "CIDEr-D reference");

  std::vector<std::vector<double>> eye(8, std::vector<double>(8, 0.0));
  std::vector<std::size_t> gold(8);
  for (std::size_t i = 0; i < 8; ++i) {
    eye[i][i] = 1.0;
    gold[i] = i;
  }
  near(recall_at_k(eye, gold, 1), 1.0, 0.0, "recall@1 identity");

  const double b = bleu4(c.hyps, c.refs), r = rouge_l(c.hyps, c.refs), d = cider_d(c.hyps, c.refs);
  const double rk = recall_at_k(eye, gold, 3);
  std::mt19937_64 rng(17);
  for (int i = 0; i < 20; ++i) {
    std::vector<std::size_t> order(c.hyps.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    Corpus s;
    for (auto k : order) {
      s.hyps.push_back(c.hyps[k]);
      auto refs = c.refs[k];
      std::shuffle(refs.begin(), refs.end(), rng);
      s.refs.push_back(refs);
    }
    near(bleu4(s.hyps, s.refs), b, 1e-9, "BLEU-4 shuffle " + std::to_string(i));
    near(rouge_l(s.hyps, s.refs), r, 1e-9, "ROUGE-L shuffle " + std::to_string(i));
    near(cider_d(s.hyps, s.refs), d, 1e-9, "CIDEr-D shuffle " + std::to_string(i));

    std::vector<std::size_t> perm(8);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::vector<double>> sim;
    std::vector<std::size_t> g;
    for (auto k : perm) {
      sim.push_back(eye[k]);
      g.push_back(gold[k]);
    }
    near(recall_at_k(sim, g, 3), rk, 0.0, "recall@3 shuffle " + std::to_string(i));
  }
  if (o.ok) o.detail = "BLEU-4 " + fmt(b, 10) + ", ROUGE-L " + fmt(r, 10) + ", CIDEr-D " + fmt(d, 10);
  return o;
}

// ---------------------------------------------------------------------------

bool uses_network(const RunConfig& cfg) {
  const auto& p = cfg.providers;
  for (const auto* s : {&p.vocab_embedder, &p.sentence_embedder, &p.image_embedder, &p.captioner, &p.completion,
                        &p.frame_extractor}) {
    if (s->kind == "http") return true;
  }
  return false;
}

void pipeline(const RunConfig& cfg, Outcome& o) {
  using namespace vidprompt::cli;
  o.expect(cmd_build_vocab(cfg).exit_code == 0, "build-vocab failed");
  o.expect(cmd_represent(cfg).exit_code == 0, "represent failed");
  o.expect(cmd_run(cfg).exit_code == 0, "run failed");
  o.expect(cmd_eval(cfg).exit_code == 0, "eval failed");
}

Outcome end_to_end() {
  Outcome o;
  const auto t0 = Clock::now();
  std::vector<std::map<std::string, std::string>> snapshots;
  for (int i = 0; i < 3; ++i) {
    vptest::TempDir dir("accept");
    auto cfg = load_run_config(vptest::stage_e2e(dir.path()));
    o.expect(!uses_network(cfg), "fixture config uses a network provider");
    pipeline(cfg, o);
    snapshots.push_back(vptest::snapshot(cfg.out()));
  }
  const double secs = seconds_since(t0);
  o.expect(!snapshots[0].empty(), "no outputs");
  for (int i = 1; i < 3; ++i) {
    if (snapshots[static_cast<std::size_t>(i)] == snapshots[0]) continue;
    std::string which = "file sets differ";
    for (const auto& [path, bytes] : snapshots[0]) {
      auto it = snapshots[static_cast<std::size_t>(i)].find(path);
      if (it == snapshots[static_cast<std::size_t>(i)].end() || it->second != bytes) {
        which = path;
        break;
      }
    }
    o.fail("run " + std::to_string(i + 1) + " differs: " + which);
  }
  o.expect(secs < 10.0, "took " + fmt(secs) + " s");
  if (o.ok) o.detail = "3 runs, " + std::to_string(snapshots[0].size()) + " files each, " + fmt(secs) + " s";
  return o;
}

/// Loads the stored representations of the staged fixture by video id.
std::map<std::string, LabeledExample> stored_examples(const RunConfig& cfg) {
  auto ds = load_dataset(cfg.resolve(cfg.dataset));
  std::map<std::string, LabeledExample> out;
  for (const auto* split : {&ds.train, &ds.test}) {
    for (const auto& ex : cli::load_split(cfg, *split).examples) out.emplace(ex.example_id, ex);
  }
  return out;
}

Outcome ablation_plumbing() {
  Outcome o;
  std::size_t one_frame_prompts = 0, reversed_prompts = 0;
  {
    vptest::TempDir dir("onefr");
    auto cfg = load_run_config(vptest::stage_e2e(dir.path()));
    cfg.ablations.one_frame = true;
    pipeline(cfg, o);
    for (auto seed : cfg.seeds) {
      auto manifest = read_json_file(cli::seed_dir(cfg, seed) / "manifest.json");
      for (const auto& p : manifest["prompts"]) {
        ++one_frame_prompts;
        auto text = read_file(cli::seed_dir(cfg, seed) / p["prompt_file"].get<std::string>());
        std::size_t blocks = 0;
        for (const auto& line : vptest::split_lines(text)) {
          if (!line.starts_with("Frame Captions:")) continue;
          ++blocks;
          o.expect(vptest::line_items(line).size() == 1, "one_frame prompt line has several captions: " + line);
        }
        o.expect(blocks == p["example_ids"].size() + 1, "one_frame prompt is missing caption lines");
      }
    }
  }
  {
    vptest::TempDir dir("rev");
    auto cfg = load_run_config(vptest::stage_e2e(dir.path()));
    pipeline(cfg, o);  // representations stored in forward order
    cfg.ablations.reversed = true;
    o.expect(cli::cmd_run(cfg).exit_code == 0, "reversed run failed");
    auto stored = stored_examples(cfg);
    for (auto seed : cfg.seeds) {
      auto manifest = read_json_file(cli::seed_dir(cfg, seed) / "manifest.json");
      for (const auto& p : manifest["prompts"]) {
        ++reversed_prompts;
        std::vector<LabeledExample> context;
        for (const auto& id : p["example_ids"]) {
          auto ex = stored.at(id.get<std::string>());
          ex.representation = reverse_order(ex.representation);
          context.push_back(ex);
        }
        auto query = stored.at(p["id"].get<std::string>());
        query.representation = reverse_order(query.representation);
        auto want = build_prompt(cfg.task, context, query, MarkerStyle::temporal).rendered;
        auto got = read_file(cli::seed_dir(cfg, seed) / p["prompt_file"].get<std::string>());
        o.expect(got == want, "reversed prompt for " + p["id"].get<std::string>() + " differs from reversed rendering");
      }
    }
  }
  o.expect(one_frame_prompts > 0 && reversed_prompts > 0, "no prompts checked");
  if (o.ok) {
    o.detail = std::to_string(one_frame_prompts) + " one_frame prompts, " + std::to_string(reversed_prompts) +
               " reversed prompts";
  }
  return o;
}

}  // namespace

int main() {
  // provider warnings would interleave with the report
  set_log_sink([](LogLevel, std::string_view) {});

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"tokenization oracle", tokenization},
      {"aggregation oracle", aggregation},
      {"temporal templates", temporal_templates},
      {"golden prompts", golden_prompts},
      {"in-context selection", in_context_selection},
      {"dedup", dedup},
      {"metrics", metrics},
      {"end-to-end determinism", end_to_end},
      {"ablation plumbing", ablation_plumbing},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    failed += o.ok ? 0 : 1;
    std::printf("%s %s%s%s\n", o.ok ? "PASS" : "FAIL", name.c_str(), o.detail.empty() ? "" : ": ",
                o.detail.c_str());
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failed), criteria.size());
  return failed == 0 ? 0 : 1;
}

// Copyright 2026 The kurag Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Acceptance run: prints one PASS/FAIL line per criterion and exits
// nonzero if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "crud_workload.hpp"
#include "kurag/app/config.hpp"
#include "kurag/core/segmenter.hpp"
#include "kurag/eval.hpp"
#include "kurag/query_pipeline.hpp"
#include "kurag/reasoner.hpp"
#include "kurag/vector_index.hpp"
#include "planted.hpp"
#include "test_support.hpp"

namespace kurag::acceptance {
namespace {

using namespace kurag::testing_support;
using Clock = std::chrono::steady_clock;

struct Verdict {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Sentence with exactly `tokens` tokens: (tokens - 1) words and a period.
std::string sentence_of(std::size_t tokens, std::mt19937_64& rng) {
  static const char* kWords[] = {"river", "stone", "tower", "lift", "deck",
                                 "span",  "harbor", "engine", "north", "gate"};
  std::string s;
  for (std::size_t i = 0; i + 1 < tokens; ++i) {
    if (i) s += ' ';
    s += kWords[rng() % 10];
  }
  return s + '.';
}

Verdict chunker() {
  std::mt19937_64 rng(20260101);
  std::size_t bad_order = 0, over_budget = 0, bad_flag = 0, chunks_seen = 0;
  auto t0 = Clock::now();
  for (int trial = 0; trial < 1000; ++trial) {
    std::size_t budget = 1 + rng() % 200;
    std::vector<std::string> sentences;
    std::vector<std::size_t> sizes;
    std::size_t n = rng() % 40;
    for (std::size_t i = 0; i < n; ++i) {
      sizes.push_back(2 + rng() % 80);
      sentences.push_back(sentence_of(sizes.back(), rng));
    }
    auto chunks = segment_passage(text::join(sentences, rng() % 2 ? " " : "\n  "), budget);
    std::vector<std::string> rebuilt;
    std::size_t pos = 0;
    for (const auto& c : chunks) {
      ++chunks_seen;
      std::size_t tokens = 0;
      for (std::size_t k = 0; k < c.sentences.size(); ++k) tokens += sizes[pos + k];
      if (c.oversized) {
        if (c.sentences.size() != 1 || tokens <= budget) ++bad_flag;
      } else if (tokens > budget) {
        ++over_budget;
      }
      pos += c.sentences.size();
      rebuilt.insert(rebuilt.end(), c.sentences.begin(), c.sentences.end());
    }
    if (rebuilt != sentences) ++bad_order;
  }
  double secs = seconds_since(t0);
  bool ok = bad_order == 0 && over_budget == 0 && bad_flag == 0 && secs < 10.0;
  return {ok, fmt("1000 passages, %zu chunks, reconstruction failures=%zu, over budget=%zu, "
                  "bad oversize flags=%zu, %.3f s (limit 10 s)",
                  chunks_seen, bad_order, over_budget, bad_flag, secs)};
}

Verdict index_exactness() {
  std::size_t mismatches = 0, checks = 0;
  auto t0 = Clock::now();
  for (std::size_t dim : {8u, 512u}) {
    std::mt19937_64 rng(dim * 7919);
    VectorIndex index(dim);
    std::vector<IndexEntry> entries;
    for (EntryId i = 0; i < 1000; ++i) {
      entries.push_back({i, random_unit(dim, rng)});
      index.insert(entries.back());
    }
    for (int q = 0; q < 200; ++q) {
      auto query = random_unit(dim, rng);
      for (std::size_t k : {1u, 3u, 10u}) {
        ++checks;
        if (ids_of(index.search_topk(query, k)) != ids_of(brute_force_topk(entries, query, k))) {
          ++mismatches;
        }
      }
    }
  }
  return {mismatches == 0, fmt("%zu searches at dims {8, 512}, k in {1, 3, 10}: %zu mismatches, %.3f s",
                               checks, mismatches, seconds_since(t0))};
}

Verdict crud_prune() {
  std::size_t ops_total = 0, pruned = 0, violations = 0, state_mismatch = 0;
  for (std::uint64_t seed : {101u, 202u, 303u}) {
    CrudWorkload w(seed);
    auto enc = std::make_shared<MockEncoder>(CrudWorkload::kDim);
    KnowledgeStore store(w.config(), enc);
    auto st = run_crud_workload(w, store, 600);
    ops_total += st.ops;
    pruned += st.pruned;
    violations += st.violations.size();
    store.check_integrity();
    auto got = canonicalize(store);
    if (!(got == w.expected()) || !(got == canonicalize(w.rebuild(enc)))) ++state_mismatch;
  }
  bool ok = violations == 0 && state_mismatch == 0 && ops_total >= 500 && pruned > 0;
  return {ok, fmt("%zu ops over 3 seeds, %zu units pruned, prune violations=%zu, "
                  "final states differing from rebuild oracle=%zu",
                  ops_total, pruned, violations, state_mismatch)};
}

Verdict planted_end_to_end() {
  auto t0 = Clock::now();
  PlantedHarness h(make_planted_suite(50, false));
  PipelineConfig pipeline;
  ReasonerConfig reasoner;
  std::size_t ku_hits = 0, chunk_hits = 0, correct = 0;
  const std::size_t n = h.suite.items.size();
  for (std::size_t i = 0; i < n; ++i) {
    auto answer_chunk = h.answer_chunk(i);
    auto out = answer_query(h.query(i), h.store, h.backends, pipeline, reasoner, AnswerMode::kKuRag);
    if (!out.ok()) continue;
    {
      auto view = h.store.read();
      for (const auto& u : out.trace.units) {
        const auto* unit = view.unit(u.ku_id);
        if (unit && std::find(unit->chunk_ids.begin(), unit->chunk_ids.end(), answer_chunk) !=
                        unit->chunk_ids.end()) {
          ++ku_hits;
          break;
        }
      }
    }
    for (const auto& hit : out.trace.chunks.hits) {
      if (hit.chunk_id == answer_chunk) {
        ++chunk_hits;
        break;
      }
    }
    correct += out.state.final_answer == h.suite.gold(i);
  }
  double secs = seconds_since(t0);
  bool ok = ku_hits == n && chunk_hits == n && correct == n && secs < 5.0;
  return {ok, fmt("%zu entities: KU hit@3 %zu/%zu, chunk hit@3 %zu/%zu, accuracy %zu/%zu, "
                  "%.3f s including KB build (limit 5 s)",
                  n, ku_hits, n, chunk_hits, n, correct, n, secs)};
}

Verdict kcc_protocol() {
  PlantedHarness h(make_planted_suite(20, true));
  std::size_t corrections = 0, keeps = 0, resolved = 0, shape_ok = 0;
  for (std::size_t i = 0; i < h.suite.items.size(); ++i) {
    bool keep = h.suite.entities[i].country_question;
    (keep ? keeps : corrections) += 1;
    auto out = answer_query(h.query(i), h.store, h.backends, PipelineConfig{}, ReasonerConfig{},
                            AnswerMode::kKuRag);
    const auto& s = out.state;
    std::string expected_initial = keep ? kTrueCountry : "unknown";
    if (out.ok() && s.initial_answer == expected_initial && s.final_answer == h.suite.gold(i)) {
      ++resolved;
    }
    if (out.ok() && transcript_violations(s, true).empty()) ++shape_ok;
  }
  std::size_t n = h.suite.items.size();
  bool ok = corrections == 10 && keeps == 10 && resolved == n && shape_ok == n;
  return {ok, fmt("%zu correction + %zu keep cases: %zu/%zu resolved per script, "
                  "transcript shape holds in %zu/%zu",
                  corrections, keeps, resolved, n, shape_ok, n)};
}

EvalReport run_mode(AnswerMode mode, std::size_t workers) {
  PlantedHarness h(make_planted_suite(50, true));
  EvalOptions opts;
  opts.mode = mode;
  opts.workers = workers;
  return run_eval(h.suite.items, h.store, h.backends, PipelineConfig{}, ReasonerConfig{}, opts);
}

Verdict ablation_direction() {
  auto kurag = run_mode(AnswerMode::kKuRag, 4).accuracy;
  auto no_ku = run_mode(AnswerMode::kNoKu, 4).accuracy;
  auto no_kcc = run_mode(AnswerMode::kNoKcc, 4).accuracy;
  return {kurag > no_ku && kurag > no_kcc,
          fmt("adversarial 50-entity suite: kurag=%.3f, no_ku=%.3f, no_kcc=%.3f", kurag, no_ku, no_kcc)};
}

Verdict defaults() {
  PipelineConfig p;
  auto from_empty = PipelineConfig::from_json(nlohmann::json::object());
  auto app = app::AppConfig::from_json({{"backends", {{"mllm", {{"kind", "mock"}, {"script", "s.json"}}}}}});
  bool ok = p.ku_topk == 3 && p.chunk_topk == 3 && from_empty.ku_topk == 3 &&
            from_empty.chunk_topk == 3 && app.pipeline.ku_topk == 3 && app.pipeline.chunk_topk == 3;
  return {ok, fmt("ku_topk=%zu chunk_topk=%zu (struct), %zu/%zu (empty config)", p.ku_topk,
                  p.chunk_topk, app.pipeline.ku_topk, app.pipeline.chunk_topk)};
}

Verdict determinism() {
  std::string a, b;
  for (auto mode : {AnswerMode::kKuRag, AnswerMode::kNoKcc, AnswerMode::kNoKu}) {
    auto r1 = run_mode(mode, 4);
    auto r2 = run_mode(mode, 1);
    a += r1.to_json().dump(2) + r1.summary_csv();
    b += r2.to_json().dump(2) + r2.summary_csv();
  }
  return {a == b, fmt("three modes, two independent runs (4 and 1 workers): %zu vs %zu report bytes, %s",
                      a.size(), b.size(), a == b ? "identical" : "different")};
}

}  // namespace
}  // namespace kurag::acceptance

int main() {
  using namespace kurag::acceptance;
  spdlog::set_level(spdlog::level::off);
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
      {"chunker_properties", chunker},
      {"index_exactness", index_exactness},
      {"crud_prune", crud_prune},
      {"planted_end_to_end", planted_end_to_end},
      {"kcc_protocol", kcc_protocol},
      {"ablation_direction", ablation_direction},
      {"default_topk", defaults},
      {"determinism", determinism},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    std::printf("%s %s: %s\n", v.pass ? "PASS" : "FAIL", name, v.detail.c_str());
    std::fflush(stdout);
    failed += !v.pass;
  }
  return failed == 0 ? 0 : 1;
}

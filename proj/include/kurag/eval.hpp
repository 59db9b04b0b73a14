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

#pragma once

// Accuracy evaluation over JSON-lines datasets. Each line holds
//   {"item_id": ..., "image": <ref>, "question": ..., "gold_answers": [...]}
// Reports carry no timings so runs against deterministic backends are
// byte-identical.

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "kurag/errors.hpp"
#include "kurag/reasoner.hpp"
#include "kurag/util/text.hpp"

namespace kurag {

struct EvalItem {
  std::string item_id;
  std::string image;  // empty for text-only items
  std::string question;
  std::vector<std::string> gold_answers;

  void validate() const {
    if (item_id.empty()) throw ValidationError("eval item needs an item_id");
    if (text::trim(question).empty()) throw ValidationError("eval item " + item_id + " has no question");
    if (gold_answers.empty()) throw ValidationError("eval item " + item_id + " has no gold answers");
  }

  static EvalItem from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ValidationError("eval item must be a JSON object");
    for (const auto& [key, _] : j.items()) {
      if (key != "item_id" && key != "image" && key != "question" && key != "gold_answers") {
        throw ValidationError("unknown eval item key '" + key + "'");
      }
    }
    EvalItem it;
    it.item_id = j.at("item_id").get<std::string>();
    it.image = j.value("image", std::string());
    it.question = j.at("question").get<std::string>();
    it.gold_answers = j.at("gold_answers").get<std::vector<std::string>>();
    it.validate();
    return it;
  }

  nlohmann::json to_json() const {
    return {{"item_id", item_id}, {"image", image}, {"question", question},
            {"gold_answers", gold_answers}};
  }
};

// Blank lines are skipped; errors name the 1-based line.
inline std::vector<EvalItem> parse_eval_jsonl(std::istream& in) {
  std::vector<EvalItem> items;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      items.push_back(EvalItem::from_json(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      throw ValidationError("dataset line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return items;
}

inline std::vector<EvalItem> load_eval_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open dataset " + path.string());
  return parse_eval_jsonl(in);
}

// Lowercase, strip punctuation, collapse whitespace, drop a leading article.
inline std::string normalize_answer(std::string_view s) {
  auto w = text::words(s);
  if (!w.empty() && (w.front() == "a" || w.front() == "an" || w.front() == "the")) {
    w.erase(w.begin());
  }
  return text::join(w, " ");
}

// Returns the first gold that matches after normalization.
inline std::optional<std::string> matching_gold(std::string_view predicted,
                                                const std::vector<std::string>& golds) {
  if (golds.empty()) throw PreconditionError("score_answer needs at least one gold answer");
  auto p = normalize_answer(predicted);
  for (const auto& g : golds) {
    if (normalize_answer(g) == p) return g;
  }
  return std::nullopt;
}

inline bool score_answer(std::string_view predicted, const std::vector<std::string>& golds) {
  return matching_gold(predicted, golds).has_value();
}

struct EvalRecord {
  std::string item_id;
  std::string predicted;
  std::optional<std::string> matched_gold;
  bool correct = false;
  std::string error;

  nlohmann::json to_json() const {
    nlohmann::json j = {{"item_id", item_id},
                        {"predicted", predicted},
                        {"matched_gold", matched_gold ? nlohmann::json(*matched_gold) : nlohmann::json()},
                        {"correct", correct}};
    if (!error.empty()) j["error"] = error;
    return j;
  }
};

struct EvalReport {
  std::string mode;
  std::size_t n = 0;
  std::size_t correct = 0;
  double accuracy = 0.0;
  bool empty = true;
  std::vector<EvalRecord> per_item;

  nlohmann::json to_json() const {
    auto items = nlohmann::json::array();
    for (const auto& r : per_item) items.push_back(r.to_json());
    return {{"mode", mode}, {"n", n}, {"correct", correct}, {"accuracy", accuracy},
            {"empty", empty}, {"per_item", std::move(items)}};
  }

  std::string summary_csv() const {
    std::ostringstream out;
    out << "mode,n,correct,accuracy\n" << mode << ',' << n << ',' << correct << ',' << accuracy << '\n';
    return out.str();
  }
};

struct EvalOptions {
  AnswerMode mode = AnswerMode::kKuRag;
  std::size_t workers = 1;
  // Resolves EvalItem::image; defaults to the backends' image loader.
  ImageLoader image_loader;
};

// Runs every item through answer_query. Item failures (including image
// load errors) are recorded as incorrect and the run continues.
inline EvalReport run_eval(const std::vector<EvalItem>& dataset, const KnowledgeStore& store,
                           const Backends& backends, const PipelineConfig& pipeline,
                           const ReasonerConfig& reasoner, const EvalOptions& options) {
  EvalReport report;
  report.mode = to_string(options.mode);
  report.n = dataset.size();
  report.empty = dataset.empty();
  report.per_item.resize(dataset.size());
  const ImageLoader& loader = options.image_loader ? options.image_loader : backends.image_loader;

  auto run_one = [&](std::size_t i) {
    const auto& item = dataset[i];
    EvalRecord& rec = report.per_item[i];
    rec.item_id = item.item_id;
    try {
      item.validate();
      VisualQuery q{std::nullopt, item.question};
      if (!item.image.empty()) {
        if (!loader) throw PreconditionError("no image loader for item images");
        q.image = ImageData{item.image, loader(item.image)};
      }
      auto outcome = answer_query(q, store, backends, pipeline, reasoner, options.mode);
      if (!outcome.ok()) {
        rec.error = *outcome.failed_stage + ": " + outcome.error;
        return;
      }
      rec.predicted = outcome.state.final_answer;
      rec.matched_gold = matching_gold(rec.predicted, item.gold_answers);
      rec.correct = rec.matched_gold.has_value();
    } catch (const std::exception& e) {
      rec.error = e.what();
    }
  };

  std::size_t workers = std::clamp<std::size_t>(options.workers, 1, std::max<std::size_t>(dataset.size(), 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < dataset.size(); ++i) run_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < dataset.size(); i = next++) run_one(i);
      });
    }
    for (auto& t : pool) t.join();
  }

  std::stable_sort(report.per_item.begin(), report.per_item.end(),
                   [](const EvalRecord& a, const EvalRecord& b) { return a.item_id < b.item_id; });
  for (const auto& r : report.per_item) report.correct += r.correct;
  report.accuracy = report.n ? static_cast<double>(report.correct) / static_cast<double>(report.n) : 0.0;
  return report;
}

}  // namespace kurag

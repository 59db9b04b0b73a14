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

// Synthetic knowledge base with planted answers, shared by the unit and
// acceptance suites.
//
// Each entity gets one document (title = name, one tagged image, four
// one-sentence chunks) and one query image carrying the same tag. Two
// question types exist:
//   year     the answer sits only in the knowledge base; the scripted model
//            replies "unknown" until it sees the passage.
//   country  the model already knows the answer from the query image; the
//            knowledge base holds a stale distractor.
// In adversarial suites odd items are country questions and an imageless
// decoy document mimics the caption-level wording of year questions.

#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kurag/backends/mock.hpp"
#include "kurag/backends/scripted_mllm.hpp"
#include "kurag/core/knowledge_store.hpp"
#include "kurag/eval.hpp"
#include "kurag/reasoner.hpp"

namespace kurag::testing_support {

inline constexpr const char* kYearQuestion = "In what year was it opened?";
inline constexpr const char* kCountryQuestion = "Which country is it located in?";
inline constexpr const char* kStaleCountry = "Ruritania";
inline constexpr const char* kTrueCountry = "Freedonia";
inline constexpr const char* kDecoyYear = "1111";
inline constexpr std::size_t kPlantedDim = 512;

struct PlantedEntity {
  std::string name;
  std::string doc_id;
  std::string tag;
  std::string year;
  bool country_question = false;
  std::string kb_image_ref;
  std::string query_image_ref;
  std::string answer_sentence;
};

struct PlantedSuite {
  std::vector<PlantedEntity> entities;
  std::vector<Document> docs;
  std::map<std::string, std::string> images;
  std::vector<EvalItem> items;  // items[i] asks about entities[i]
  nlohmann::json script;

  StoreConfig store_config() const {
    StoreConfig c;
    c.embedding_dim = kPlantedDim;
    c.max_chunk_tokens = 12;
    return c;
  }

  ImageLoader loader() const {
    return [this](const std::string& ref) {
      auto it = images.find(ref);
      if (it == images.end()) throw NotFoundError("no planted image " + ref);
      return it->second;
    };
  }

  std::string gold(std::size_t i) const {
    return entities[i].country_question ? kTrueCountry : entities[i].year;
  }
};

inline const std::vector<std::string>& planted_prefixes() {
  static const std::vector<std::string> kPrefixes = {
      "Karnin",  "Belmor",   "Cadwick",  "Dunmere", "Elstow",  "Farrow",   "Glenby",
      "Harlan",  "Iverly",   "Jessop",   "Kestrel", "Lorwyn",  "Marrick",  "Nethby",
      "Ormond",  "Pelham",   "Quorra",   "Rendal",  "Saxton",  "Thorne",   "Upland",
      "Varden",  "Wexley",   "Yarrow",   "Zeller",  "Ashby",   "Brixham",  "Corvin",
      "Dalston", "Emberly",  "Fenwick",  "Garston", "Hollis",  "Ingram",   "Jarvik",
      "Kendle",  "Lindum",   "Moxley",   "Norwell", "Oakham",  "Prescot",  "Ravel",
      "Stanmore", "Tilbury", "Ulverton", "Vessel",  "Whitmore", "Yelland", "Zorbas",
      "Alden"};
  return kPrefixes;
}

inline PlantedSuite make_planted_suite(std::size_t n, bool adversarial) {
  static const char* kNouns[] = {"Bridge", "Tower", "Abbey", "Gate", "Mill"};
  const auto& prefixes = planted_prefixes();
  if (n > prefixes.size()) throw PreconditionError("at most 50 planted entities");
  PlantedSuite s;
  std::set<std::size_t> used_slots;
  for (std::size_t i = 0; i < n; ++i) {
    PlantedEntity e;
    e.name = prefixes[i] + " " + kNouns[i % 5];
    char id[16];
    std::snprintf(id, sizeof id, "e%02zu", i);
    e.doc_id = id;
    // Tags get a numeric suffix until their basis slot is free, so all
    // entity images are mutually orthogonal.
    for (int k = 0;; ++k) {
      e.tag = k == 0 ? e.doc_id : e.doc_id + "." + std::to_string(k);
      if (used_slots.insert(tag_slot(e.tag, kPlantedDim)).second) break;
    }
    e.year = std::to_string(1850 + i);
    e.country_question = adversarial && i % 2 == 1;
    e.kb_image_ref = "kb/" + e.doc_id + ".png";
    e.query_image_ref = "query/" + e.doc_id + ".png";
    e.answer_sentence = e.name + " was opened in the year " + e.year + ".";
    s.images[e.kb_image_ref] = make_tag(e.tag) + " archive photograph";
    s.images[e.query_image_ref] = make_tag(e.tag) + " visitor snapshot" +
                                  (e.country_question ? " known:" + e.doc_id : "");

    Document d;
    d.doc_id = e.doc_id;
    d.title = e.name;
    d.body = e.name + " is a landmark in the old quarter. " + e.answer_sentence + " " + e.name +
             " is located in " + kStaleCountry + ". Many visitors walk along its stone paths.";
    d.image_refs = {e.kb_image_ref};
    s.docs.push_back(d);

    char item_id[16];
    std::snprintf(item_id, sizeof item_id, "q%02zu", i);
    s.items.push_back({item_id, e.query_image_ref,
                       e.country_question ? kCountryQuestion : kYearQuestion,
                       {e.country_question ? kTrueCountry : e.year}});
    s.entities.push_back(std::move(e));
  }
  if (adversarial) {
    Document decoy;
    decoy.doc_id = "decoy";
    decoy.title = "Crossing notes";
    // Three chunks, each closer to "a bridge" + year question than any
    // entity chunk.
    decoy.body = std::string("A bridge. In what year was it opened? A bridge was opened in the year ") +
                 kDecoyYear + ". In what year was a bridge opened? In " + kDecoyYear + ".";
    s.docs.push_back(decoy);
  }

  auto rules = nlohmann::json::array();
  rules.push_back({{"when", {{"contains", {std::string(kCaptionPrompt)}}}}, {"reply", "a bridge"}});
  for (const auto& e : s.entities) {
    if (!e.country_question) continue;
    rules.push_back({{"when",
                      {{"assistant_turns", 0},
                       {"image_contains", {"known:" + e.doc_id}},
                       {"not_contains", {"[["}}}},
                     {"reply", kTrueCountry}});
  }
  const std::string kc(kKcAwarePrompt);
  rules.push_back({{"when", {{"contains", {kc}}, {"history_contains", {kCountryQuestion}}}},
                   {"reply", "{last_assistant}"}});
  rules.push_back({{"when",
                    {{"contains", {kc}},
                     {"history_contains", {kYearQuestion}},
                     {"regex", "opened in the year (\\d{4})"}}},
                   {"reply", "$1"}});
  rules.push_back({{"when", {{"contains", {kCountryQuestion}}, {"regex", "located in (\\w+)"}}},
                   {"reply", "$1"}});
  rules.push_back({{"when", {{"contains", {kYearQuestion}}, {"regex", "opened in the year (\\d{4})"}}},
                   {"reply", "$1"}});
  s.script = {{"rules", rules}, {"default", "unknown"}};
  return s;
}

// A populated store plus the mock backends that go with it.
struct PlantedHarness {
  PlantedSuite suite;
  std::shared_ptr<MockEncoder> encoder;
  KnowledgeStore store;
  Backends backends;

  explicit PlantedHarness(PlantedSuite s)
      : suite(std::move(s)),
        encoder(std::make_shared<MockEncoder>(kPlantedDim)),
        store(suite.store_config(), encoder) {
    for (const auto& d : suite.docs) store.ingest_document(d, suite.loader());
    backends.detector = std::make_shared<MockDetector>();
    backends.mllm = std::make_shared<ScriptedMLLM>(ChatScript::from_json(suite.script));
    backends.image_loader = suite.loader();
  }

  VisualQuery query(std::size_t i) const {
    const auto& item = suite.items[i];
    return {ImageData{item.image, suite.images.at(item.image)}, item.question};
  }

  // The chunk that carries the planted answer for entity i.
  ChunkId answer_chunk(std::size_t i) const {
    auto view = store.read();
    const auto& e = suite.entities[i];
    const auto* rec = view.document(e.doc_id);
    for (auto id : rec->chunk_ids) {
      auto t = view.chunk(id)->text();
      bool hit = e.country_question ? t.find("located in") != std::string::npos
                                    : t == e.answer_sentence;
      if (hit) return id;
    }
    throw NotFoundError("planted answer chunk missing for " + e.doc_id);
  }
};

// Empty when the transcript has the expected shape:
//   chain:       user(Q) -> A_0 -> user(passage + correction prompt) -> A
//   single turn: user(passage + Q) -> A
// The first chain turn must carry only the question and its image.
inline std::vector<std::string> transcript_violations(const DialogueState& s, bool chain) {
  std::vector<std::string> v;
  const auto& t = s.transcript;
  auto expect_role = [&](std::size_t i, Role r) {
    if (t[i].role != r) v.push_back("turn " + std::to_string(i) + " has role " + to_string(t[i].role));
  };
  std::size_t want = chain ? 4 : 2;
  if (t.size() != want) {
    v.push_back("expected " + std::to_string(want) + " turns, got " + std::to_string(t.size()));
    return v;
  }
  for (std::size_t i = 0; i < want; ++i) expect_role(i, i % 2 ? Role::kAssistant : Role::kUser);
  if (t.back().text != s.final_answer) v.push_back("final answer differs from last reply");
  const std::string kc(kKcAwarePrompt);
  if (chain) {
    if (t[0].text != s.question.text) v.push_back("first turn is not the bare question");
    std::vector<std::string> q_images;
    if (s.question.image) q_images.push_back(s.question.image->ref);
    if (t[0].image_refs != q_images) v.push_back("first turn images differ from the query image");
    if (!s.initial_answer || t[1].text != *s.initial_answer) v.push_back("A_0 not recorded");
    auto& corr = t[2].text;
    if (corr.size() < kc.size() || corr.compare(corr.size() - kc.size(), kc.size(), kc) != 0) {
      v.push_back("second user turn does not end with the correction prompt");
    }
  } else {
    if (s.initial_answer) v.push_back("single-turn run recorded an initial answer");
    if (t[0].text.find(kc) != std::string::npos) v.push_back("single turn carries the correction prompt");
    auto& q = s.question.text;
    if (t[0].text.size() < q.size() || t[0].text.compare(t[0].text.size() - q.size(), q.size(), q) != 0) {
      v.push_back("single turn does not end with the question");
    }
  }
  return v;
}

}  // namespace kurag::testing_support

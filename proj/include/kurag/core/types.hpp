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

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kurag/errors.hpp"
#include "kurag/util/text.hpp"

namespace kurag {

using ChunkId = std::int64_t;
using ImageId = std::int64_t;

enum class KuKind { kEntity, kEvent, kRule, kTopic, kOther };

inline const char* to_string(KuKind k) {
  switch (k) {
    case KuKind::kEntity: return "entity";
    case KuKind::kEvent: return "event";
    case KuKind::kRule: return "rule";
    case KuKind::kTopic: return "topic";
    case KuKind::kOther: return "other";
  }
  return "other";
}

inline KuKind ku_kind_from_string(const std::string& s) {
  if (s == "entity") return KuKind::kEntity;
  if (s == "event") return KuKind::kEvent;
  if (s == "rule") return KuKind::kRule;
  if (s == "topic") return KuKind::kTopic;
  if (s == "other") return KuKind::kOther;
  throw ValidationError("unknown KU kind '" + s + "'");
}

// One source record of the knowledge base.
struct Document {
  std::string doc_id;
  std::string title;
  std::string body;
  std::vector<std::string> image_refs;
  std::vector<std::string> ku_names;  // explicit KU names; bypass extraction
  KuKind kind = KuKind::kEntity;

  void validate() const {
    if (doc_id.empty()) throw ValidationError("document has empty doc_id");
    if (text::trim(body).empty() && image_refs.empty()) {
      throw ValidationError("document " + doc_id + " has neither text nor images");
    }
  }

  // Corpus line schema: doc_id, title, text, images, optional ku_names and kind.
  static Document from_json(const nlohmann::json& j) {
    static const char* kKeys[] = {"doc_id", "title", "text", "images", "ku_names", "kind"};
    if (!j.is_object()) throw ValidationError("document must be a JSON object");
    for (const auto& [key, _] : j.items()) {
      bool known = false;
      for (const char* k : kKeys) known = known || key == k;
      if (!known) throw ValidationError("unknown document field '" + key + "'");
    }
    Document d;
    try {
      d.doc_id = j.at("doc_id").get<std::string>();
      d.title = j.value("title", std::string());
      d.body = j.value("text", std::string());
      d.image_refs = j.value("images", std::vector<std::string>{});
      d.ku_names = j.value("ku_names", std::vector<std::string>{});
      if (j.contains("kind")) d.kind = ku_kind_from_string(j["kind"].get<std::string>());
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(std::string("bad document: ") + e.what());
    }
    d.validate();
    return d;
  }

  nlohmann::json to_json() const {
    return {{"doc_id", doc_id}, {"title", title},       {"text", body},
            {"images", image_refs}, {"ku_names", ku_names}, {"kind", to_string(kind)}};
  }
};

// Consecutive sentences of one document, packed under a token budget.
struct Chunk {
  ChunkId chunk_id = 0;
  std::string doc_id;
  std::vector<std::string> sentences;
  std::size_t token_count = 0;
  bool oversized = false;  // a single sentence longer than the budget

  std::string text() const { return text::join(sentences, " "); }

  bool operator==(const Chunk&) const = default;
};

// Matching end: name + image_ids. Detail end: chunk_ids.
struct KnowledgeUnit {
  std::string ku_id;
  std::string name;
  std::vector<ImageId> image_ids;
  std::vector<ChunkId> chunk_ids;
  KuKind kind = KuKind::kEntity;

  bool operator==(const KnowledgeUnit&) const = default;

  nlohmann::json to_json() const {
    return {{"ku_id", ku_id}, {"name", name}, {"image_ids", image_ids},
            {"chunk_ids", chunk_ids}, {"kind", to_string(kind)}};
  }

  static KnowledgeUnit from_json(const nlohmann::json& j) {
    KnowledgeUnit u;
    u.ku_id = j.at("ku_id").get<std::string>();
    u.name = j.at("name").get<std::string>();
    u.image_ids = j.at("image_ids").get<std::vector<ImageId>>();
    u.chunk_ids = j.at("chunk_ids").get<std::vector<ChunkId>>();
    u.kind = ku_kind_from_string(j.at("kind").get<std::string>());
    return u;
  }
};

struct StoreConfig {
  std::size_t max_chunk_tokens = 200;
  double alpha = 0.85;
  std::size_t embedding_dim = 512;
  // Also mine capitalized multi-word spans in the body for KU names.
  bool extract_body_names = true;

  void validate() const {
    if (max_chunk_tokens < 1) throw ValidationError("max_chunk_tokens must be >= 1");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ValidationError("alpha must be in [0, 1]");
    if (embedding_dim < 1) throw ValidationError("embedding_dim must be >= 1");
  }

  nlohmann::json to_json() const {
    return {{"max_chunk_tokens", max_chunk_tokens}, {"alpha", alpha},
            {"embedding_dim", embedding_dim}, {"extract_body_names", extract_body_names}};
  }

  static StoreConfig from_json(const nlohmann::json& j) {
    static const char* kKeys[] = {"max_chunk_tokens", "alpha", "embedding_dim",
                                  "extract_body_names"};
    for (const auto& [key, _] : j.items()) {
      bool known = false;
      for (const char* k : kKeys) known = known || key == k;
      if (!known) throw ValidationError("unknown store config key '" + key + "'");
    }
    StoreConfig c;
    c.max_chunk_tokens = j.value("max_chunk_tokens", c.max_chunk_tokens);
    c.alpha = j.value("alpha", c.alpha);
    c.embedding_dim = j.value("embedding_dim", c.embedding_dim);
    c.extract_body_names = j.value("extract_body_names", c.extract_body_names);
    c.validate();
    return c;
  }
};

// Audit record of one change to the KU set during ingestion.
struct KuMutation {
  enum class Action { kCreated, kAppended };

  Action action = Action::kCreated;
  std::string ku_id;
  std::string name;
  std::vector<ChunkId> chunk_ids;  // detail-end entries added
  std::vector<ImageId> image_ids;  // matching-end images added
  double similarity = 0.0;         // best match score; 0 for an empty store

  nlohmann::json to_json() const {
    return {{"action", action == Action::kCreated ? "created" : "appended"},
            {"ku_id", ku_id},
            {"name", name},
            {"chunk_ids", chunk_ids},
            {"image_ids", image_ids},
            {"similarity", similarity}};
  }
};

}  // namespace kurag

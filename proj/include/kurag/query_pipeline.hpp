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

// Query side of retrieval: pick the query-relevant image region, match it
// to knowledge units, rewrite the question with the matched unit's name,
// and rank chunks inside the matched units' detail ends.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "kurag/backends/interfaces.hpp"
#include "kurag/core/knowledge_store.hpp"
#include "kurag/errors.hpp"
#include "kurag/util/text.hpp"
#include "kurag/vector_index.hpp"

namespace kurag {

struct VisualQuery {
  std::optional<ImageData> image;  // absent only in text-only runs
  std::string text;

  void validate() const {
    if (text::trim(text).empty()) throw ValidationError("query text must be non-empty");
  }
};

struct PipelineConfig {
  double gamma = 0.25;
  std::size_t ku_topk = 3;
  std::size_t chunk_topk = 3;
  // Rank chunks with the raw question vector instead of the rewritten one.
  bool use_raw_query_vector = false;

  void validate() const {
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw ValidationError("gamma must be in [0, 1]");
    if (ku_topk < 1 || chunk_topk < 1) throw ValidationError("top-k values must be >= 1");
  }

  nlohmann::json to_json() const {
    return {{"gamma", gamma}, {"ku_topk", ku_topk}, {"chunk_topk", chunk_topk},
            {"use_raw_query_vector", use_raw_query_vector}};
  }

  static PipelineConfig from_json(const nlohmann::json& j) {
    static const char* kKeys[] = {"gamma", "ku_topk", "chunk_topk", "use_raw_query_vector"};
    for (const auto& [key, _] : j.items()) {
      bool known = false;
      for (const char* k : kKeys) known = known || key == k;
      if (!known) throw ValidationError("unknown pipeline config key '" + key + "'");
    }
    PipelineConfig c;
    c.gamma = j.value("gamma", c.gamma);
    c.ku_topk = j.value("ku_topk", c.ku_topk);
    c.chunk_topk = j.value("chunk_topk", c.chunk_topk);
    c.use_raw_query_vector = j.value("use_raw_query_vector", c.use_raw_query_vector);
    c.validate();
    return c;
  }
};

struct ObjectSelection {
  enum class Source { kObject, kWholeImage };

  Embedding vector;
  Source source = Source::kWholeImage;
  std::optional<std::size_t> object_index;
  std::vector<double> object_scores;  // text-to-crop cosine per detection
  std::string reason;
};

// Embeds every detected crop and the question text. When exactly one crop
// scores above gamma its embedding is used; with zero or several above
// gamma the whole image is embedded instead. Detector failures fall back to
// the whole image.
inline ObjectSelection select_query_object(const VisualQuery& query,
                                           const DetectorBackend& detector,
                                           const EncoderBackend& encoder, double gamma,
                                           std::vector<std::string>* warnings = nullptr) {
  if (!query.image) throw PreconditionError("select_query_object needs a query image");
  ObjectSelection sel;
  std::vector<Detection> detections;
  try {
    detections = detector.detect(*query.image);
  } catch (const std::exception& e) {
    std::string msg = std::string("detector failed, using whole image: ") + e.what();
    spdlog::warn("{}", msg);
    if (warnings) warnings->push_back(msg);
  }
  if (!detections.empty()) {
    auto text_vec = encoder.embed_text(query.text);
    std::vector<Embedding> crops;
    for (const auto& d : detections) {
      crops.push_back(encoder.embed_image(d.crop));
      sel.object_scores.push_back(cosine(text_vec, crops.back()));
    }
    std::vector<std::size_t> above;
    for (std::size_t i = 0; i < sel.object_scores.size(); ++i) {
      if (sel.object_scores[i] > gamma) above.push_back(i);
    }
    if (above.size() == 1) {
      sel.source = ObjectSelection::Source::kObject;
      sel.object_index = above.front();
      sel.vector = std::move(crops[above.front()]);
      sel.reason = "one object above gamma";
      return sel;
    }
    sel.reason = above.empty() ? "no object above gamma" : "several objects above gamma";
  } else {
    sel.reason = "no detections";
  }
  sel.vector = encoder.embed_image(query.image->bytes);
  return sel;
}

struct UnitMatch {
  std::string ku_id;
  std::string name;
  double score = 0.0;
};

// C_ku: the union of the matched units' detail ends, in unit rank order.
// Each chunk remembers the best-ranked unit that holds it.
struct DetailEndSet {
  std::vector<ChunkId> chunk_ids;
  std::map<ChunkId, std::string> owner;

  bool empty() const { return chunk_ids.empty(); }
};

// Scores every unit by the best cosine between the query vector and its
// matching-end images, and keeps the top `ku_topk`. Units without images
// cannot match. Ties go to the smaller ku_id.
inline std::vector<UnitMatch> match_knowledge_units(const KnowledgeStore::ReadView& view,
                                                    const Embedding& query_vec,
                                                    std::size_t ku_topk) {
  if (ku_topk < 1) throw ValidationError("ku_topk must be >= 1");
  const auto& images = view.image_index();
  std::vector<UnitMatch> out;
  if (images.size() == 0) return out;
  std::map<std::string, double> best;
  for (const auto& hit : images.search_topk(query_vec, images.size())) {
    for (const auto* u : view.units_for_image(hit.entry_id)) {
      auto [it, inserted] = best.emplace(u->ku_id, hit.score);
      if (!inserted) it->second = std::max(it->second, hit.score);
    }
  }
  for (const auto& [id, score] : best) out.push_back({id, view.unit(id)->name, score});
  std::sort(out.begin(), out.end(), [](const UnitMatch& a, const UnitMatch& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.ku_id < b.ku_id;
  });
  if (out.size() > ku_topk) out.resize(ku_topk);
  return out;
}

inline DetailEndSet combine_detail_ends(const KnowledgeStore::ReadView& view,
                                        const std::vector<UnitMatch>& units) {
  DetailEndSet set;
  for (const auto& m : units) {
    const auto* u = view.unit(m.ku_id);
    if (!u) throw IntegrityError("matched unit " + m.ku_id + " is gone");
    for (auto c : u->chunk_ids) {
      if (set.owner.emplace(c, u->ku_id).second) set.chunk_ids.push_back(c);
    }
  }
  return set;
}

inline constexpr std::string_view kSep = "[SEP]";

struct RewrittenQuery {
  std::string raw;
  std::string rewritten;
  std::vector<std::string> keywords;
};

// "<question> [SEP] <unit name> [SEP] <keyword, keyword, ...>". Keywords
// are the question's content words. Stray separators in the inputs are
// dropped so the result holds exactly two.
inline RewrittenQuery rewrite_query(const std::string& question, const std::string& unit_name) {
  if (text::trim(question).empty()) throw PreconditionError("question must be non-empty");
  auto scrub = [](std::string s) {
    std::size_t pos;
    while ((pos = s.find(kSep)) != std::string::npos) s.erase(pos, kSep.size());
    return std::string(text::trim(s));
  };
  RewrittenQuery rq;
  rq.raw = question;
  rq.keywords = text::content_words(question);
  rq.rewritten = scrub(question) + " " + std::string(kSep) + " " + scrub(unit_name) + " " +
                 std::string(kSep) + " " + text::join(rq.keywords, ", ");
  return rq;
}

struct RetrievedHit {
  ChunkId chunk_id = 0;
  std::string ku_id;  // empty when the chunk belongs to no unit
  double score = 0.0;

  bool operator==(const RetrievedHit&) const = default;
};

struct RetrievedChunkSet {
  std::vector<RetrievedHit> hits;
};

// Ranks only the chunks in `c_ku` against the rewritten question (or the
// raw one when `use_raw_query_vector` is set).
inline RetrievedChunkSet retrieve_chunks(const KnowledgeStore::ReadView& view,
                                         const RewrittenQuery& rq, const DetailEndSet& c_ku,
                                         std::size_t chunk_topk, bool use_raw_query_vector = false) {
  if (c_ku.empty()) throw PreconditionError("retrieve_chunks needs a non-empty C_ku");
  if (chunk_topk < 1) throw ValidationError("chunk_topk must be >= 1");
  bool any = false;
  for (auto id : c_ku.chunk_ids) any = any || view.chunk(id) != nullptr;
  if (!any) throw IntegrityError("every chunk id in C_ku is dangling");
  auto q = view.encoder().embed_text(use_raw_query_vector ? rq.raw : rq.rewritten);
  RetrievedChunkSet out;
  for (const auto& h : view.chunk_index().search_subset(q, c_ku.chunk_ids, chunk_topk)) {
    out.hits.push_back({h.entry_id, c_ku.owner.at(h.entry_id), h.score});
  }
  return out;
}

// Text-only retrieval over every chunk in the store. Used when no unit
// matches and by the caption-based ablation.
inline RetrievedChunkSet retrieve_unscoped(const KnowledgeStore::ReadView& view,
                                           const std::string& query_text,
                                           std::size_t chunk_topk) {
  if (chunk_topk < 1) throw ValidationError("chunk_topk must be >= 1");
  RetrievedChunkSet out;
  if (view.chunk_index().size() == 0) return out;
  auto q = view.encoder().embed_text(query_text);
  for (const auto& h : view.chunk_index().search_topk(q, chunk_topk)) {
    auto owners = view.units_for_chunk(h.entry_id);
    out.hits.push_back({h.entry_id, owners.empty() ? std::string() : owners.front()->ku_id,
                        h.score});
  }
  return out;
}

// Everything the retrieval half produced for one question.
struct RetrievalTrace {
  std::optional<ObjectSelection> selection;
  std::vector<UnitMatch> units;
  RewrittenQuery rewritten;
  RetrievedChunkSet chunks;
  bool text_only = false;
  std::vector<std::string> warnings;

  nlohmann::json to_json() const {
    nlohmann::json j;
    if (selection) {
      j["selection"] = {
          {"source", selection->source == ObjectSelection::Source::kObject ? "object"
                                                                           : "whole_image"},
          {"object_index", selection->object_index ? nlohmann::json(*selection->object_index)
                                                   : nlohmann::json()},
          {"object_scores", selection->object_scores},
          {"reason", selection->reason}};
    }
    auto units_j = nlohmann::json::array();
    for (const auto& u : units) {
      units_j.push_back({{"ku_id", u.ku_id}, {"name", u.name}, {"score", u.score}});
    }
    j["units"] = std::move(units_j);
    j["rewritten_query"] = rewritten.rewritten;
    j["keywords"] = rewritten.keywords;
    auto hits = nlohmann::json::array();
    for (const auto& h : chunks.hits) {
      hits.push_back({{"chunk_id", h.chunk_id}, {"ku_id", h.ku_id}, {"score", h.score}});
    }
    j["chunks"] = std::move(hits);
    j["text_only"] = text_only;
    j["warnings"] = warnings;
    return j;
  }
};

// Runs selection, unit matching, rewrite and retrieval against one read
// view. With no query image, or when no unit matches, retrieval falls back
// to unscoped text search with an unnamed rewrite. `stage`, when given,
// tracks the step in progress so callers can attribute failures.
inline RetrievalTrace retrieve_evidence(const KnowledgeStore::ReadView& view,
                                        const VisualQuery& query, const DetectorBackend& detector,
                                        const PipelineConfig& config,
                                        std::string* stage = nullptr) {
  auto enter = [&](const char* name) {
    if (stage) *stage = name;
  };
  query.validate();
  RetrievalTrace trace;
  if (query.image) {
    enter("select_object");
    trace.selection = select_query_object(query, detector, view.encoder(), config.gamma,
                                          &trace.warnings);
    enter("match_units");
    trace.units = match_knowledge_units(view, trace.selection->vector, config.ku_topk);
  }
  enter("rewrite");
  auto c_ku = combine_detail_ends(view, trace.units);
  trace.rewritten = rewrite_query(query.text, trace.units.empty() ? "" : trace.units.front().name);
  enter("retrieve");
  if (c_ku.empty()) {
    trace.text_only = true;
    if (query.image) trace.warnings.push_back("no knowledge unit matched; text-only retrieval");
    trace.chunks = retrieve_unscoped(
        view, config.use_raw_query_vector ? trace.rewritten.raw : trace.rewritten.rewritten,
        config.chunk_topk);
  } else {
    trace.chunks = retrieve_chunks(view, trace.rewritten, c_ku, config.chunk_topk,
                                   config.use_raw_query_vector);
  }
  return trace;
}

}  // namespace kurag

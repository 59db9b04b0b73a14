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

// The knowledge store: documents, chunks, knowledge units (KUs) and the
// two vector indexes (chunk vectors and image vectors).
//
// A KU links a query to knowledge through its matching end (name plus
// images) and carries the knowledge itself through its detail end (the
// ids of the chunks it covers). Invariants kept by every mutation:
//   - every chunk id in a KU resolves to a stored chunk;
//   - no KU has an empty detail end;
//   - an image vector is indexed iff at least one KU references it.
//
// Mutations are serialized behind a single-writer lock. Readers take a
// ReadView, which holds a shared lock for its lifetime.

#include <algorithm>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kurag/backends/interfaces.hpp"
#include "kurag/core/segmenter.hpp"
#include "kurag/core/types.hpp"
#include "kurag/errors.hpp"
#include "kurag/util/files.hpp"
#include "kurag/util/text.hpp"
#include "kurag/vector_index.hpp"

namespace kurag {

using ImageLoader = std::function<std::string(const std::string& ref)>;

inline ImageLoader file_image_loader() {
  return [](const std::string& ref) { return files::read_all(ref); };
}

struct ImageRecord {
  ImageId image_id = 0;
  std::string ref;
  std::string doc_id;
};

struct StoreStats {
  std::size_t documents = 0;
  std::size_t chunks = 0;
  std::size_t units = 0;
  std::size_t chunk_vectors = 0;
  std::size_t image_vectors = 0;

  nlohmann::json to_json() const {
    return {{"documents", documents}, {"chunks", chunks}, {"units", units},
            {"chunk_vectors", chunk_vectors}, {"image_vectors", image_vectors}};
  }
};

struct IngestResult {
  std::vector<Chunk> chunks;
  std::vector<KuMutation> mutations;
  std::vector<ImageId> image_ids;  // images that ended up on some KU
};

class KnowledgeStore {
 public:
  static constexpr int kFormatVersion = 1;

  KnowledgeStore(StoreConfig config, std::shared_ptr<const EncoderBackend> encoder)
      : config_(config),
        encoder_(std::move(encoder)),
        chunk_index_(config.embedding_dim),
        image_index_(config.embedding_dim) {
    config_.validate();
    if (!encoder_) throw ValidationError("knowledge store needs an encoder");
    if (encoder_->dim() != config_.embedding_dim) {
      throw DimensionError(config_.embedding_dim, encoder_->dim());
    }
  }

  KnowledgeStore(KnowledgeStore&& other) noexcept
      : config_(other.config_),
        encoder_(std::move(other.encoder_)),
        docs_(std::move(other.docs_)),
        doc_order_(std::move(other.doc_order_)),
        chunks_(std::move(other.chunks_)),
        units_(std::move(other.units_)),
        unit_order_(std::move(other.unit_order_)),
        images_(std::move(other.images_)),
        image_owners_(std::move(other.image_owners_)),
        slug_counters_(std::move(other.slug_counters_)),
        next_chunk_id_(other.next_chunk_id_),
        next_image_id_(other.next_image_id_),
        chunk_index_(std::move(other.chunk_index_)),
        image_index_(std::move(other.image_index_)) {}

  KnowledgeStore(const KnowledgeStore&) = delete;
  KnowledgeStore& operator=(const KnowledgeStore&) = delete;

  struct DocRecord {
    Document doc;
    std::vector<ChunkId> chunk_ids;
    std::vector<ImageId> image_ids;
  };

  // Consistent read access; holds the shared lock until destroyed. Do not
  // call other store methods from a thread that holds a view.
  class ReadView {
   public:
    const StoreConfig& config() const { return s_->config_; }
    const EncoderBackend& encoder() const { return *s_->encoder_; }
    const VectorIndex& chunk_index() const { return s_->chunk_index_; }
    const VectorIndex& image_index() const { return s_->image_index_; }

    const Chunk* chunk(ChunkId id) const {
      auto it = s_->chunks_.find(id);
      return it == s_->chunks_.end() ? nullptr : &it->second;
    }
    const KnowledgeUnit* unit(const std::string& id) const {
      auto it = s_->units_.find(id);
      return it == s_->units_.end() ? nullptr : &it->second;
    }
    const DocRecord* document(const std::string& id) const {
      auto it = s_->docs_.find(id);
      return it == s_->docs_.end() ? nullptr : &it->second;
    }
    const ImageRecord* image(ImageId id) const {
      auto it = s_->images_.find(id);
      return it == s_->images_.end() ? nullptr : &it->second;
    }

    // KUs in creation order.
    std::vector<const KnowledgeUnit*> units() const {
      std::vector<const KnowledgeUnit*> out;
      for (const auto& id : s_->unit_order_) out.push_back(&s_->units_.at(id));
      return out;
    }

    // Documents in ingestion order.
    std::vector<const DocRecord*> documents() const {
      std::vector<const DocRecord*> out;
      for (const auto& id : s_->doc_order_) out.push_back(&s_->docs_.at(id));
      return out;
    }

    std::vector<const Chunk*> chunks() const {
      std::vector<const Chunk*> out;
      for (const auto& [_, c] : s_->chunks_) out.push_back(&c);
      return out;
    }

    // KUs whose detail end holds `id`, in creation order.
    std::vector<const KnowledgeUnit*> units_for_chunk(ChunkId id) const {
      std::vector<const KnowledgeUnit*> out;
      for (const auto* u : units()) {
        if (std::find(u->chunk_ids.begin(), u->chunk_ids.end(), id) != u->chunk_ids.end()) {
          out.push_back(u);
        }
      }
      return out;
    }

    // KUs whose matching end holds image `id`, in creation order.
    std::vector<const KnowledgeUnit*> units_for_image(ImageId id) const {
      std::vector<const KnowledgeUnit*> out;
      auto it = s_->image_owners_.find(id);
      if (it == s_->image_owners_.end()) return out;
      for (const auto* u : units()) {
        if (it->second.count(u->ku_id)) out.push_back(u);
      }
      return out;
    }

    StoreStats stats() const {
      return {s_->docs_.size(), s_->chunks_.size(), s_->units_.size(),
              s_->chunk_index_.size(), s_->image_index_.size()};
    }

   private:
    friend class KnowledgeStore;
    explicit ReadView(const KnowledgeStore* s) : lock_(s->mutex_), s_(s) {}
    std::shared_lock<std::shared_mutex> lock_;
    const KnowledgeStore* s_;
  };

  ReadView read() const { return ReadView(this); }

  const StoreConfig& config() const noexcept { return config_; }
  std::shared_ptr<const EncoderBackend> encoder() const { return encoder_; }

  // `images` holds the bytes for doc.image_refs, in the same order.
  IngestResult ingest_document(const Document& doc, const std::vector<ImageData>& images) {
    doc.validate();
    if (images.size() != doc.image_refs.size()) {
      throw PreconditionError("document " + doc.doc_id + ": expected " +
                              std::to_string(doc.image_refs.size()) + " images, got " +
                              std::to_string(images.size()));
    }
    // Encoding happens outside the write lock; it may be a network call.
    auto pieces = segment_passage(doc.body, config_.max_chunk_tokens);
    std::vector<Embedding> chunk_vecs;
    chunk_vecs.reserve(pieces.size());
    for (const auto& p : pieces) chunk_vecs.push_back(encoder_->embed_text(p.text()));
    std::vector<Embedding> image_vecs;
    image_vecs.reserve(images.size());
    for (const auto& img : images) image_vecs.push_back(encoder_->embed_image(img.bytes));
    auto candidates = candidate_names(doc, pieces);

    std::unique_lock lock(mutex_);
    if (docs_.count(doc.doc_id)) {
      throw ConflictError("document " + doc.doc_id + " already ingested");
    }
    IngestResult result;
    DocRecord rec{doc, {}, {}};
    for (std::size_t i = 0; i < pieces.size(); ++i) {
      auto& c = pieces[i];
      c.chunk_id = next_chunk_id_++;
      c.doc_id = doc.doc_id;
      chunk_index_.insert({c.chunk_id, chunk_vecs[i]});
      chunks_.emplace(c.chunk_id, c);
      rec.chunk_ids.push_back(c.chunk_id);
    }
    std::vector<PendingImage> pending;
    for (std::size_t i = 0; i < images.size(); ++i) {
      pending.push_back({next_image_id_++, images[i].ref, image_vecs[i]});
    }
    docs_.emplace(doc.doc_id, rec);
    doc_order_.push_back(doc.doc_id);

    for (const auto& cand : candidates) {
      std::vector<ChunkId> ids;
      for (auto pos : cand.chunk_positions) ids.push_back(pieces[pos].chunk_id);
      if (ids.empty()) continue;
      static const std::vector<PendingImage> kNone;
      result.mutations.push_back(link_or_create_locked(
          cand.name, cand.with_images ? pending : kNone, ids, doc.kind, doc.doc_id));
    }
    auto& stored = docs_.at(doc.doc_id);
    for (const auto& p : pending) {
      if (images_.count(p.id)) stored.image_ids.push_back(p.id);
    }
    result.image_ids = stored.image_ids;
    result.chunks = std::move(pieces);
    return result;
  }

  IngestResult ingest_document(const Document& doc, const ImageLoader& loader) {
    std::vector<ImageData> images;
    for (const auto& ref : doc.image_refs) images.push_back({ref, loader(ref)});
    return ingest_document(doc, images);
  }

  // Attaches `chunk_ids` to the best-matching KU when its similarity
  // reaches alpha, else creates a KU named `name`. Similarity is the max
  // of name similarity and, when `image_vec` is given, the image cosine
  // against each KU's matching-end images.
  KuMutation link_or_create_unit(const std::string& name,
                                 const std::optional<Embedding>& image_vec,
                                 const std::vector<ChunkId>& chunk_ids,
                                 KuKind kind = KuKind::kEntity) {
    if (chunk_ids.empty()) throw PreconditionError("new_chunk_ids must be non-empty");
    std::unique_lock lock(mutex_);
    for (auto id : chunk_ids) {
      if (!chunks_.count(id)) throw IntegrityError("unknown chunk id " + std::to_string(id));
    }
    std::vector<Embedding> probes;
    if (image_vec) probes.push_back(*image_vec);
    auto best = best_match_locked(name, probes);
    return apply_match_locked(best, name, {}, chunk_ids, kind);
  }

  // Returns the ids of KUs removed because their detail end emptied.
  std::vector<std::string> delete_chunk_and_prune(ChunkId chunk_id) {
    std::unique_lock lock(mutex_);
    return delete_chunk_locked(chunk_id);
  }

  std::vector<std::string> delete_document(const std::string& doc_id) {
    std::unique_lock lock(mutex_);
    auto it = docs_.find(doc_id);
    if (it == docs_.end()) throw NotFoundError("no document " + doc_id);
    auto ids = it->second.chunk_ids;
    std::vector<std::string> pruned;
    for (auto id : ids) {
      auto p = delete_chunk_locked(id);
      pruned.insert(pruned.end(), p.begin(), p.end());
    }
    if (docs_.count(doc_id)) retire_document_locked(doc_id);
    return pruned;
  }

  KnowledgeUnit lookup_unit(const std::string& ku_id) const {
    std::shared_lock lock(mutex_);
    auto it = units_.find(ku_id);
    if (it == units_.end()) throw NotFoundError("no knowledge unit " + ku_id);
    return it->second;
  }

  StoreStats stats() const { return read().stats(); }

  // Everything but the vectors, in a stable order.
  nlohmann::json manifest() const {
    std::shared_lock lock(mutex_);
    return manifest_locked();
  }

  // Writes store.json, chunks.vec and images.vec under `dir`.
  void save(const std::filesystem::path& dir) const {
    std::shared_lock lock(mutex_);
    std::filesystem::create_directories(dir);
    chunk_index_.persist(dir / "chunks.vec");
    image_index_.persist(dir / "images.vec");
    files::write_atomic(dir / "store.json", manifest_locked().dump(2) + "\n");
  }

  static bool exists(const std::filesystem::path& dir) {
    return std::filesystem::exists(dir / "store.json");
  }

  static KnowledgeStore load(const std::filesystem::path& dir,
                             std::shared_ptr<const EncoderBackend> encoder) {
    if (!exists(dir)) throw NotFoundError("no store at " + dir.string());
    nlohmann::json m;
    auto text = files::read_all(dir / "store.json");
    try {
      m = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw FormatError(std::string("store.json: ") + e.what(), e.byte);
    }
    if (m.value("format_version", 0) != kFormatVersion) {
      throw FormatError("unsupported store format_version", 0);
    }
    KnowledgeStore s(StoreConfig::from_json(m.at("config")), std::move(encoder));
    try {
      s.next_chunk_id_ = m.at("next_chunk_id").get<ChunkId>();
      s.next_image_id_ = m.at("next_image_id").get<ImageId>();
      s.slug_counters_ = m.at("slug_counters").get<std::map<std::string, int>>();
      for (const auto& d : m.at("documents")) {
        DocRecord rec;
        rec.doc = Document::from_json(d.at("document"));
        rec.chunk_ids = d.at("chunk_ids").get<std::vector<ChunkId>>();
        rec.image_ids = d.at("image_ids").get<std::vector<ImageId>>();
        s.doc_order_.push_back(rec.doc.doc_id);
        s.docs_.emplace(rec.doc.doc_id, std::move(rec));
      }
      for (const auto& c : m.at("chunks")) {
        Chunk ch;
        ch.chunk_id = c.at("chunk_id").get<ChunkId>();
        ch.doc_id = c.at("doc_id").get<std::string>();
        ch.sentences = c.at("sentences").get<std::vector<std::string>>();
        ch.token_count = c.at("token_count").get<std::size_t>();
        ch.oversized = c.at("oversized").get<bool>();
        s.chunks_.emplace(ch.chunk_id, std::move(ch));
      }
      for (const auto& u : m.at("units")) {
        auto unit = KnowledgeUnit::from_json(u);
        for (auto img : unit.image_ids) s.image_owners_[img].insert(unit.ku_id);
        s.unit_order_.push_back(unit.ku_id);
        s.units_.emplace(unit.ku_id, std::move(unit));
      }
      for (const auto& i : m.at("images")) {
        ImageRecord r{i.at("image_id").get<ImageId>(), i.at("ref").get<std::string>(),
                      i.at("doc_id").get<std::string>()};
        s.images_.emplace(r.image_id, std::move(r));
      }
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(std::string("store.json: ") + e.what(), 0);
    }
    s.chunk_index_ = VectorIndex::load(dir / "chunks.vec");
    s.image_index_ = VectorIndex::load(dir / "images.vec");
    if (s.chunk_index_.dim() != s.config_.embedding_dim ||
        s.image_index_.dim() != s.config_.embedding_dim) {
      throw DimensionError(s.config_.embedding_dim, s.chunk_index_.dim());
    }
    s.check_integrity();
    return s;
  }

  // Throws IntegrityError when any store invariant is broken.
  void check_integrity() const {
    for (const auto& [id, u] : units_) {
      if (u.chunk_ids.empty()) throw IntegrityError("KU " + id + " has an empty detail end");
      for (auto c : u.chunk_ids) {
        if (!chunks_.count(c)) {
          throw IntegrityError("KU " + id + " references missing chunk " + std::to_string(c));
        }
      }
      for (auto img : u.image_ids) {
        if (!images_.count(img) || !image_index_.contains(img)) {
          throw IntegrityError("KU " + id + " references missing image " + std::to_string(img));
        }
      }
    }
    for (const auto& [id, _] : chunks_) {
      if (!chunk_index_.contains(id)) {
        throw IntegrityError("chunk " + std::to_string(id) + " has no vector");
      }
    }
    if (chunk_index_.size() != chunks_.size()) {
      throw IntegrityError("chunk index holds vectors for unknown chunks");
    }
    for (const auto& [img, _] : images_) {
      auto it = image_owners_.find(img);
      if (it == image_owners_.end() || it->second.empty()) {
        throw IntegrityError("image " + std::to_string(img) + " is not on any KU");
      }
    }
    if (image_index_.size() != images_.size()) {
      throw IntegrityError("image index and image records disagree");
    }
  }

 private:
  struct Candidate {
    std::string name;
    std::vector<std::size_t> chunk_positions;
    bool with_images = false;
  };

  struct PendingImage {
    ImageId id;
    std::string ref;
    Embedding vector;
  };

  struct Match {
    std::string ku_id;  // empty when the store has no KUs
    double score = 0.0;
  };

  // Explicit ku_names win. Otherwise the title covers every chunk and
  // carries the document's images; capitalized body spans cover the
  // chunks that mention them.
  std::vector<Candidate> candidate_names(const Document& doc,
                                         const std::vector<Chunk>& pieces) const {
    std::vector<Candidate> out;
    std::vector<std::size_t> all(pieces.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    if (!doc.ku_names.empty()) {
      for (const auto& n : doc.ku_names) {
        if (!text::normalize(n).empty()) out.push_back({n, all, true});
      }
      return out;
    }
    if (!text::normalize(doc.title).empty()) out.push_back({doc.title, all, true});
    if (config_.extract_body_names) {
      for (const auto& span : text::capitalized_spans(doc.body)) {
        Candidate c{span, {}, false};
        for (std::size_t i = 0; i < pieces.size(); ++i) {
          if (pieces[i].text().find(span) != std::string::npos) c.chunk_positions.push_back(i);
        }
        out.push_back(std::move(c));
      }
    }
    return out;
  }

  Match best_match_locked(const std::string& name, const std::vector<Embedding>& probes) const {
    Match best{"", -1.0};
    for (const auto& id : unit_order_) {
      const auto& u = units_.at(id);
      double s = text::name_similarity(name, u.name);
      if (!probes.empty()) {
        for (auto img : u.image_ids) {
          auto v = image_index_.get(img);
          if (!v) continue;
          for (const auto& p : probes) s = std::max(s, cosine(p, *v));
        }
      }
      if (s > best.score) best = {id, s};
    }
    if (best.ku_id.empty()) best.score = 0.0;
    return best;
  }

  KuMutation link_or_create_locked(const std::string& name,
                                   const std::vector<PendingImage>& images,
                                   const std::vector<ChunkId>& chunk_ids, KuKind kind,
                                   const std::string& doc_id) {
    std::vector<Embedding> probes;
    for (const auto& p : images) probes.push_back(p.vector);
    auto best = best_match_locked(name, probes);
    return apply_match_locked(best, name, images, chunk_ids, kind, doc_id);
  }

  KuMutation apply_match_locked(const Match& best, const std::string& name,
                                const std::vector<PendingImage>& images,
                                const std::vector<ChunkId>& chunk_ids, KuKind kind,
                                const std::string& doc_id = {}) {
    KuMutation m;
    m.similarity = best.score;
    KnowledgeUnit* target = nullptr;
    if (!best.ku_id.empty() && best.score >= config_.alpha) {
      target = &units_.at(best.ku_id);
      m.action = KuMutation::Action::kAppended;
    } else {
      KnowledgeUnit u;
      u.ku_id = next_ku_id(name);
      u.name = name;
      u.kind = kind;
      unit_order_.push_back(u.ku_id);
      target = &units_.emplace(u.ku_id, std::move(u)).first->second;
      m.action = KuMutation::Action::kCreated;
    }
    m.ku_id = target->ku_id;
    m.name = target->name;
    for (auto id : chunk_ids) {
      if (std::find(target->chunk_ids.begin(), target->chunk_ids.end(), id) ==
          target->chunk_ids.end()) {
        target->chunk_ids.push_back(id);
        m.chunk_ids.push_back(id);
      }
    }
    for (const auto& p : images) {
      if (std::find(target->image_ids.begin(), target->image_ids.end(), p.id) !=
          target->image_ids.end()) {
        continue;
      }
      if (!images_.count(p.id)) {
        image_index_.insert({p.id, p.vector});
        images_.emplace(p.id, ImageRecord{p.id, p.ref, doc_id});
      }
      target->image_ids.push_back(p.id);
      image_owners_[p.id].insert(target->ku_id);
      m.image_ids.push_back(p.id);
    }
    return m;
  }

  std::string next_ku_id(const std::string& name) {
    auto slug = text::slugify(name);
    int n = ++slug_counters_[slug];
    return n == 1 ? slug : slug + "-" + std::to_string(n);
  }

  std::vector<std::string> delete_chunk_locked(ChunkId chunk_id) {
    auto it = chunks_.find(chunk_id);
    if (it == chunks_.end()) {
      throw NotFoundError("no chunk with id " + std::to_string(chunk_id));
    }
    std::string doc_id = it->second.doc_id;
    chunk_index_.remove(chunk_id);
    chunks_.erase(it);
    auto& rec = docs_.at(doc_id);
    std::erase(rec.chunk_ids, chunk_id);

    std::vector<std::string> pruned;
    for (const auto& id : std::vector<std::string>(unit_order_)) {
      auto& u = units_.at(id);
      std::erase(u.chunk_ids, chunk_id);
      if (u.chunk_ids.empty()) {
        remove_unit_locked(id);
        pruned.push_back(id);
      }
    }
    // A document with no chunks left is gone from the knowledge base; its
    // images leave every matching end with it.
    if (rec.chunk_ids.empty()) retire_document_locked(doc_id);
    return pruned;
  }

  void retire_document_locked(const std::string& doc_id) {
    auto rec = docs_.at(doc_id);
    for (auto img : rec.image_ids) {
      auto owners = image_owners_[img];
      for (const auto& ku : owners) {
        if (auto u = units_.find(ku); u != units_.end()) std::erase(u->second.image_ids, img);
      }
      image_owners_[img].clear();
      release_image_locked(img);
    }
    docs_.erase(doc_id);
    std::erase(doc_order_, doc_id);
  }

  void remove_unit_locked(const std::string& id) {
    auto u = units_.at(id);
    units_.erase(id);
    std::erase(unit_order_, id);
    for (auto img : u.image_ids) {
      image_owners_[img].erase(id);
      release_image_locked(img);
    }
  }

  void release_image_locked(ImageId img) {
    auto it = image_owners_.find(img);
    if (it != image_owners_.end() && !it->second.empty()) return;
    image_owners_.erase(img);
    if (image_index_.contains(img)) image_index_.remove(img);
    images_.erase(img);
    for (auto& [_, rec] : docs_) std::erase(rec.image_ids, img);
  }

  nlohmann::json manifest_locked() const {
    nlohmann::json m;
    m["format_version"] = kFormatVersion;
    m["config"] = config_.to_json();
    m["next_chunk_id"] = next_chunk_id_;
    m["next_image_id"] = next_image_id_;
    m["slug_counters"] = slug_counters_;
    auto docs = nlohmann::json::array();
    for (const auto& id : doc_order_) {
      const auto& rec = docs_.at(id);
      docs.push_back({{"document", rec.doc.to_json()},
                      {"chunk_ids", rec.chunk_ids},
                      {"image_ids", rec.image_ids}});
    }
    m["documents"] = std::move(docs);
    auto chunks = nlohmann::json::array();
    for (const auto& [id, c] : chunks_) {
      chunks.push_back({{"chunk_id", id}, {"doc_id", c.doc_id}, {"sentences", c.sentences},
                        {"token_count", c.token_count}, {"oversized", c.oversized}});
    }
    m["chunks"] = std::move(chunks);
    auto units = nlohmann::json::array();
    for (const auto& id : unit_order_) units.push_back(units_.at(id).to_json());
    m["units"] = std::move(units);
    auto images = nlohmann::json::array();
    for (const auto& [id, r] : images_) {
      images.push_back({{"image_id", id}, {"ref", r.ref}, {"doc_id", r.doc_id}});
    }
    m["images"] = std::move(images);
    return m;
  }

  StoreConfig config_;
  std::shared_ptr<const EncoderBackend> encoder_;
  std::map<std::string, DocRecord> docs_;
  std::vector<std::string> doc_order_;
  std::map<ChunkId, Chunk> chunks_;
  std::map<std::string, KnowledgeUnit> units_;
  std::vector<std::string> unit_order_;
  std::map<ImageId, ImageRecord> images_;
  std::map<ImageId, std::set<std::string>> image_owners_;
  std::map<std::string, int> slug_counters_;
  ChunkId next_chunk_id_ = 0;
  ImageId next_image_id_ = 0;
  VectorIndex chunk_index_;
  VectorIndex image_index_;
  mutable std::shared_mutex mutex_;
};

}  // namespace kurag

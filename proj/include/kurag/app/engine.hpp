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

// Operations shared by the CLI and the HTTP service. Every handler returns
// the JSON body both front ends emit, so the two stay byte-compatible.

#include <filesystem>
#include <istream>
#include <memory>
#include <mutex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "kurag/app/config.hpp"
#include "kurag/core/knowledge_store.hpp"
#include "kurag/eval.hpp"
#include "kurag/reasoner.hpp"
#include "kurag/util/files.hpp"

namespace kurag::app {

// Resolves relative refs against `base`, reading from disk.
inline ImageLoader relative_file_loader(fs::path base) {
  return [base = std::move(base)](const std::string& ref) {
    fs::path p(ref);
    return files::read_all(p.is_absolute() ? p : base / p);
  };
}

class Engine {
 public:
  enum class OpenMode { kCreateIfMissing, kMustExist };

  Engine(AppConfig config, std::shared_ptr<const EncoderBackend> encoder, Backends backends,
         OpenMode mode)
      : config_(std::move(config)), backends_(std::move(backends)) {
    store_dir_ = config_.resolve(config_.store_dir);
    if (KnowledgeStore::exists(store_dir_)) {
      store_ = std::make_unique<KnowledgeStore>(KnowledgeStore::load(store_dir_, std::move(encoder)));
    } else if (mode == OpenMode::kCreateIfMissing) {
      store_ = std::make_unique<KnowledgeStore>(config_.store, std::move(encoder));
    } else {
      throw NotFoundError("no knowledge store at " + store_dir_.string() +
                          "; run `kurag ingest` first");
    }
    if (!backends_.image_loader) backends_.image_loader = file_image_loader();
  }

  static Engine from_config(const AppConfig& config, OpenMode mode) {
    Backends b{make_detector(config), make_mllm(config), file_image_loader()};
    return Engine(config, make_encoder(config), std::move(b), mode);
  }

  const AppConfig& config() const noexcept { return config_; }
  const KnowledgeStore& store() const noexcept { return *store_; }
  const fs::path& store_dir() const noexcept { return store_dir_; }

  // Ingests a JSONL corpus. Every line is parsed and its images read before
  // anything is written, so a bad line leaves the store untouched. Image
  // refs are stored as absolute paths resolved against `base_dir`.
  nlohmann::json ingest_jsonl(std::istream& in, const fs::path& base_dir) {
    struct Pending {
      Document doc;
      std::vector<ImageData> images;
    };
    std::vector<Pending> batch;
    std::set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (text::trim(line).empty()) continue;
      const std::string where = "corpus line " + std::to_string(line_no) + ": ";
      Pending p;
      try {
        p.doc = Document::from_json(nlohmann::json::parse(line));
      } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(where + "invalid JSON: " + e.what());
      } catch (const ValidationError& e) {
        throw ValidationError(where + e.what());
      }
      if (!seen.insert(p.doc.doc_id).second) {
        throw ConflictError(where + "duplicate doc_id " + p.doc.doc_id + " within the corpus");
      }
      if (store_->read().document(p.doc.doc_id)) {
        throw ConflictError(where + "document " + p.doc.doc_id + " already ingested");
      }
      for (auto& ref : p.doc.image_refs) {
        fs::path path(ref);
        if (!path.is_absolute()) path = fs::absolute(base_dir / path).lexically_normal();
        ref = path.string();
        try {
          p.images.push_back({ref, files::read_all(path)});
        } catch (const files::FileError& e) {
          throw ValidationError(where + e.what());
        }
      }
      batch.push_back(std::move(p));
    }

    nlohmann::json mutations = nlohmann::json::array();
    std::size_t chunks = 0, done = 0;
    try {
      for (const auto& p : batch) {
        auto r = store_->ingest_document(p.doc, p.images);
        chunks += r.chunks.size();
        for (const auto& m : r.mutations) mutations.push_back(m.to_json());
        ++done;
      }
    } catch (const std::exception& e) {
      persist();
      spdlog::error("ingest stopped after {} of {} documents: {}", done, batch.size(), e.what());
      throw;
    }
    persist();
    return {{"documents", done}, {"chunks", chunks}, {"mutations", std::move(mutations)},
            {"store", store_->stats().to_json()}};
  }

  nlohmann::json ingest_jsonl_text(const std::string& body, const fs::path& base_dir) {
    std::istringstream in(body);
    return ingest_jsonl(in, base_dir);
  }

  QueryOutcome query(const VisualQuery& q, AnswerMode mode) const {
    return answer_query(q, *store_, backends_, config_.pipeline, config_.reasoner, mode);
  }

  nlohmann::json get_unit(const std::string& ku_id) const {
    auto view = store_->read();
    const auto* u = view.unit(ku_id);
    if (!u) throw NotFoundError("no knowledge unit " + ku_id);
    nlohmann::json chunks = nlohmann::json::array();
    for (auto id : u->chunk_ids) {
      const auto* c = view.chunk(id);
      if (!c) throw IntegrityError("unit " + ku_id + " references missing chunk " + std::to_string(id));
      chunks.push_back({{"chunk_id", id}, {"doc_id", c->doc_id}, {"text", c->text()}});
    }
    nlohmann::json images = nlohmann::json::array();
    for (auto id : u->image_ids) {
      const auto* img = view.image(id);
      if (!img) throw IntegrityError("unit " + ku_id + " references missing image " + std::to_string(id));
      images.push_back({{"image_id", id}, {"ref", img->ref}});
    }
    auto j = u->to_json();
    j["chunks"] = std::move(chunks);
    j["images"] = std::move(images);
    return j;
  }

  nlohmann::json delete_chunk(ChunkId id) {
    auto pruned = store_->delete_chunk_and_prune(id);
    persist();
    return {{"deleted_chunk", id}, {"pruned_units", pruned}};
  }

  EvalReport eval(const std::vector<EvalItem>& items, AnswerMode mode, const fs::path& image_base) const {
    EvalOptions opts;
    opts.mode = mode;
    opts.workers = config_.eval.workers;
    opts.image_loader = relative_file_loader(image_base);
    return run_eval(items, *store_, backends_, config_.pipeline, config_.reasoner, opts);
  }

  nlohmann::json health() const {
    return {{"status", "ok"},
            {"store", store_->stats().to_json()},
            {"backends", {{"encoder", config_.encoder.kind},
                          {"detector", config_.detector.kind},
                          {"mllm", config_.mllm.kind}}}};
  }

  void persist() const {
    std::lock_guard lock(*persist_mutex_);
    store_->save(store_dir_);
  }

 private:
  AppConfig config_;
  Backends backends_;
  fs::path store_dir_;
  std::unique_ptr<KnowledgeStore> store_;
  std::unique_ptr<std::mutex> persist_mutex_ = std::make_unique<std::mutex>();
};

}  // namespace kurag::app

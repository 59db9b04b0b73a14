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

// Exact (flat) cosine similarity index. One instance holds chunk vectors,
// another holds image vectors. Search is a full scan; results are ordered
// by score descending with ties broken by ascending id, which makes every
// query reproducible and directly comparable against a brute-force scan.

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "kurag/embedding.hpp"
#include "kurag/errors.hpp"
#include "kurag/util/files.hpp"

namespace kurag {

using EntryId = std::int64_t;

struct IndexEntry {
  EntryId entry_id = 0;
  Embedding vector;
};

struct ScoredHit {
  EntryId entry_id = 0;
  double score = 0.0;

  bool operator==(const ScoredHit&) const = default;
};

// Ranking order shared by every search in the library.
inline bool ranks_before(const ScoredHit& a, const ScoredHit& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.entry_id < b.entry_id;
}

class VectorIndex {
 public:
  static constexpr std::uint32_t kFormatVersion = 1;
  static constexpr char kMagic[4] = {'K', 'U', 'V', 'I'};

  explicit VectorIndex(std::size_t dim) : dim_(dim) {
    if (dim == 0) throw ValidationError("vector index dim must be >= 1");
  }

  VectorIndex(const VectorIndex& other) {
    std::shared_lock lock(other.mutex_);
    dim_ = other.dim_;
    rows_ = other.rows_;
    slot_ = other.slot_;
  }

  VectorIndex& operator=(const VectorIndex& other) {
    if (this == &other) return *this;
    std::scoped_lock lock(mutex_, other.mutex_);
    dim_ = other.dim_;
    rows_ = other.rows_;
    slot_ = other.slot_;
    return *this;
  }

  std::size_t dim() const noexcept { return dim_; }

  std::size_t size() const {
    std::shared_lock lock(mutex_);
    return rows_.size();
  }

  void insert(const IndexEntry& entry) {
    check_dim(entry.vector);
    std::unique_lock lock(mutex_);
    if (slot_.count(entry.entry_id)) {
      throw ConflictError("duplicate index entry id " +
                          std::to_string(entry.entry_id));
    }
    slot_.emplace(entry.entry_id, rows_.size());
    rows_.push_back(Row{entry.entry_id, entry.vector, inverse_norm(entry.vector)});
  }

  void remove(EntryId id) {
    std::unique_lock lock(mutex_);
    auto it = slot_.find(id);
    if (it == slot_.end()) {
      throw NotFoundError("no index entry with id " + std::to_string(id));
    }
    std::size_t pos = it->second;
    slot_.erase(it);
    if (pos + 1 != rows_.size()) {
      rows_[pos] = std::move(rows_.back());
      slot_[rows_[pos].id] = pos;
    }
    rows_.pop_back();
  }

  bool contains(EntryId id) const {
    std::shared_lock lock(mutex_);
    return slot_.count(id) != 0;
  }

  std::optional<Embedding> get(EntryId id) const {
    std::shared_lock lock(mutex_);
    auto it = slot_.find(id);
    if (it == slot_.end()) return std::nullopt;
    return rows_[it->second].vector;
  }

  std::vector<EntryId> ids() const {
    std::shared_lock lock(mutex_);
    std::vector<EntryId> out;
    out.reserve(rows_.size());
    for (const auto& r : rows_) out.push_back(r.id);
    std::sort(out.begin(), out.end());
    return out;
  }

  // Cosine score of one stored entry against `query`.
  std::optional<double> score(const Embedding& query, EntryId id) const {
    check_dim(query);
    std::shared_lock lock(mutex_);
    auto it = slot_.find(id);
    if (it == slot_.end()) return std::nullopt;
    return score_row(rows_[it->second], query.values, inverse_norm(query));
  }

  std::vector<ScoredHit> search_topk(const Embedding& query, std::size_t k) const {
    if (k == 0) throw ValidationError("k must be >= 1");
    check_dim(query);
    std::shared_lock lock(mutex_);
    double qinv = inverse_norm(query);
    std::vector<ScoredHit> hits;
    hits.reserve(rows_.size());
    for (const auto& r : rows_) {
      hits.push_back({r.id, score_row(r, query.values, qinv)});
    }
    return take_top(std::move(hits), k);
  }

  // Like search_topk, but only entries whose id is in `allowed` compete.
  // Ids missing from the index are skipped.
  std::vector<ScoredHit> search_subset(const Embedding& query,
                                       const std::vector<EntryId>& allowed,
                                       std::size_t k) const {
    if (k == 0) throw ValidationError("k must be >= 1");
    check_dim(query);
    std::shared_lock lock(mutex_);
    double qinv = inverse_norm(query);
    std::vector<ScoredHit> hits;
    std::vector<EntryId> seen = allowed;
    std::sort(seen.begin(), seen.end());
    seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
    for (EntryId id : seen) {
      auto it = slot_.find(id);
      if (it == slot_.end()) continue;
      hits.push_back({id, score_row(rows_[it->second], query.values, qinv)});
    }
    return take_top(std::move(hits), k);
  }

  // Writes `path` (vector blob) and `path`.json (manifest), each atomically.
  //
  // Blob layout, little-endian:
  //   magic "KUVI" | u32 format_version | u32 dim | u64 count |
  //   count x (i64 id | dim x f32)
  void persist(const std::filesystem::path& path) const {
    std::string blob;
    nlohmann::json manifest;
    {
      std::shared_lock lock(mutex_);
      std::vector<const Row*> ordered;
      ordered.reserve(rows_.size());
      for (const auto& r : rows_) ordered.push_back(&r);
      std::sort(ordered.begin(), ordered.end(),
                [](const Row* a, const Row* b) { return a->id < b->id; });

      blob.append(kMagic, 4);
      put_u32(blob, kFormatVersion);
      put_u32(blob, static_cast<std::uint32_t>(dim_));
      put_u64(blob, ordered.size());
      auto ids = nlohmann::json::array();
      for (const Row* r : ordered) {
        put_u64(blob, static_cast<std::uint64_t>(r->id));
        for (float v : r->vector.values) {
          std::uint32_t bits;
          std::memcpy(&bits, &v, 4);
          put_u32(blob, bits);
        }
        ids.push_back(r->id);
      }
      manifest["format_version"] = kFormatVersion;
      manifest["dim"] = dim_;
      manifest["count"] = ordered.size();
      manifest["ids"] = std::move(ids);
      manifest["blob"] = path.filename().string();
    }
    files::write_atomic(path, blob);
    files::write_atomic(manifest_path(path), manifest.dump(2) + "\n");
  }

  static VectorIndex load(const std::filesystem::path& path) {
    auto blob = files::read_all(path);
    std::size_t off = 0;
    auto need = [&](std::size_t n, const char* what) {
      if (blob.size() - off < n) {
        throw FormatError(std::string("truncated vector blob while reading ") + what,
                          off);
      }
    };
    need(4, "magic");
    if (std::memcmp(blob.data(), kMagic, 4) != 0) {
      throw FormatError("bad vector blob magic", 0);
    }
    off = 4;
    need(4, "format_version");
    auto version = get_u32(blob, off);
    if (version != kFormatVersion) {
      throw FormatError("unsupported vector blob version " + std::to_string(version),
                        off - 4);
    }
    need(4, "dim");
    auto dim = get_u32(blob, off);
    if (dim == 0) throw FormatError("vector blob dim is zero", off - 4);
    need(8, "count");
    auto count = get_u64(blob, off);
    VectorIndex index(dim);
    for (std::uint64_t i = 0; i < count; ++i) {
      need(8, "entry id");
      auto id = static_cast<EntryId>(get_u64(blob, off));
      need(static_cast<std::size_t>(dim) * 4, "entry vector");
      IndexEntry e{id, {}};
      e.vector.values.resize(dim);
      for (std::uint32_t d = 0; d < dim; ++d) {
        std::uint32_t bits = get_u32(blob, off);
        std::memcpy(&e.vector.values[d], &bits, 4);
      }
      e.vector.normalized = std::abs(e.vector.norm() - 1.0) <= 1e-6;
      if (index.slot_.count(id)) {
        throw FormatError("duplicate id " + std::to_string(id) + " in vector blob",
                          off - 8 - static_cast<std::size_t>(dim) * 4);
      }
      index.insert(e);
    }
    if (off != blob.size()) throw FormatError("trailing bytes in vector blob", off);

    auto mpath = manifest_path(path);
    if (std::filesystem::exists(mpath)) {
      auto text = files::read_all(mpath);
      nlohmann::json m;
      try {
        m = nlohmann::json::parse(text);
      } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(std::string("vector manifest: ") + e.what(), e.byte);
      }
      if (m.value("format_version", 0u) != kFormatVersion ||
          m.value("dim", 0u) != dim || m.value("count", std::uint64_t{0}) != count) {
        throw FormatError("vector manifest disagrees with blob header", 0);
      }
    }
    return index;
  }

  static std::filesystem::path manifest_path(std::filesystem::path p) {
    p += ".json";
    return p;
  }

 private:
  struct Row {
    EntryId id;
    Embedding vector;
    double inv_norm;
  };

  void check_dim(const Embedding& e) const {
    if (e.dim() != dim_) throw DimensionError(dim_, e.dim());
  }

  static double inverse_norm(const Embedding& e) {
    double n = e.norm();
    return n == 0.0 ? 0.0 : 1.0 / n;
  }

  static double score_row(const Row& r, std::span<const float> q, double qinv) {
    return dot(r.vector.values, q) * r.inv_norm * qinv;
  }

  static std::vector<ScoredHit> take_top(std::vector<ScoredHit> hits,
                                         std::size_t k) {
    auto n = std::min(k, hits.size());
    std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(n),
                      hits.end(), ranks_before);
    hits.resize(n);
    return hits;
  }

  static void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out += static_cast<char>((v >> (8 * i)) & 0xff);
  }
  static void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out += static_cast<char>((v >> (8 * i)) & 0xff);
  }
  static std::uint32_t get_u32(const std::string& in, std::size_t& off) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[off + i])) << (8 * i);
    }
    off += 4;
    return v;
  }
  static std::uint64_t get_u64(const std::string& in, std::size_t& off) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[off + i])) << (8 * i);
    }
    off += 8;
    return v;
  }

  std::size_t dim_;
  std::vector<Row> rows_;
  std::unordered_map<EntryId, std::size_t> slot_;
  mutable std::shared_mutex mutex_;
};

}  // namespace kurag

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

// Builds the multimodal passage handed to the chat model: retrieved chunks
// are grouped under their unit's image as "[Image][[Name][Chunk Text]...]"
// items, in retrieval order. Raster mode additionally renders the items
// into a single stacked PNG for backends that accept only one image.

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "kurag/core/knowledge_store.hpp"
#include "kurag/errors.hpp"
#include "kurag/query_pipeline.hpp"
#include "kurag/util/font.hpp"
#include "kurag/util/hash.hpp"
#include "kurag/util/png.hpp"

namespace kurag {

struct AlignedEvidence {
  std::optional<ImageId> image_id;  // empty for units without images
  std::string image_ref;
  std::string ku_id;
  std::string ku_name;
  std::vector<std::string> texts;
  std::vector<ChunkId> chunk_ids;

  nlohmann::json to_json() const {
    return {{"image_id", image_id ? nlohmann::json(*image_id) : nlohmann::json()},
            {"image_ref", image_ref},
            {"ku_id", ku_id},
            {"ku_name", ku_name},
            {"texts", texts},
            {"chunk_ids", chunk_ids}};
  }
};

enum class PassageMode { kStructured, kRaster };

inline PassageMode passage_mode_from_string(const std::string& s) {
  if (s == "structured") return PassageMode::kStructured;
  if (s == "raster") return PassageMode::kRaster;
  throw ValidationError("passage mode must be 'structured' or 'raster', got '" + s + "'");
}

inline const char* to_string(PassageMode m) {
  return m == PassageMode::kRaster ? "raster" : "structured";
}

struct MultimodalPassage {
  std::vector<AlignedEvidence> items;
  std::optional<std::string> raster_png;
  std::vector<std::string> warnings;

  bool empty() const { return items.empty(); }
};

// One item per distinct image (or per unit when the unit has no image);
// hits sharing an image merge their texts in rank order. A unit's first
// matching-end image represents it.
inline std::vector<AlignedEvidence> align_and_fuse(const KnowledgeStore::ReadView& view,
                                                   const RetrievedChunkSet& hits) {
  std::vector<AlignedEvidence> items;
  auto find_item = [&](const AlignedEvidence& key) -> AlignedEvidence* {
    for (auto& it : items) {
      if (key.image_id ? it.image_id == key.image_id
                       : (!it.image_id && it.ku_id == key.ku_id && it.ku_name == key.ku_name)) {
        return &it;
      }
    }
    return nullptr;
  };
  for (const auto& h : hits.hits) {
    const auto* chunk = view.chunk(h.chunk_id);
    if (!chunk) throw IntegrityError("retrieved chunk " + std::to_string(h.chunk_id) + " is gone");
    AlignedEvidence key;
    if (!h.ku_id.empty()) {
      const auto* u = view.unit(h.ku_id);
      if (!u) throw IntegrityError("retrieved unit " + h.ku_id + " is gone");
      key.ku_id = u->ku_id;
      key.ku_name = u->name;
      if (!u->image_ids.empty()) {
        key.image_id = u->image_ids.front();
        if (const auto* rec = view.image(*key.image_id)) key.image_ref = rec->ref;
      }
    } else {
      const auto* doc = view.document(chunk->doc_id);
      key.ku_name = doc ? doc->doc.title : chunk->doc_id;
    }
    auto* item = find_item(key);
    if (!item) {
      items.push_back(key);
      item = &items.back();
    }
    item->texts.push_back(chunk->text());
    item->chunk_ids.push_back(chunk->chunk_id);
  }
  return items;
}

// Text rendering of the passage used in chat turns. Images are numbered in
// the order they are attached to the turn.
inline std::string passage_text(const MultimodalPassage& mp) {
  std::string out;
  int image_no = 0;
  for (const auto& item : mp.items) {
    if (!out.empty()) out += '\n';
    out += item.image_id ? "[Image " + std::to_string(++image_no) + "]" : std::string("[No image]");
    out += "[[" + item.ku_name + "]";
    for (const auto& t : item.texts) out += "[" + t + "]";
    out += "]";
  }
  return out;
}

namespace raster {

inline constexpr int kPanelWidth = 768;
inline constexpr int kMargin = 8;
inline constexpr int kScale = 2;
inline constexpr int kCellWidth = (font::kGlyphWidth + 1) * kScale;
inline constexpr int kCellHeight = (font::kGlyphHeight + 1) * kScale;
inline constexpr int kMaxImageHeight = 480;
inline constexpr int kPlaceholderHeight = 96;
inline constexpr int kSeparator = 2;

inline int chars_per_line() { return (kPanelWidth - 2 * kMargin) / kCellWidth; }

inline std::vector<std::string> wrap(const std::string& s, std::size_t width) {
  std::vector<std::string> lines;
  std::string cur;
  std::string word;
  auto push_word = [&](std::string w) {
    while (w.size() > width) {
      if (!cur.empty()) {
        lines.push_back(cur);
        cur.clear();
      }
      lines.push_back(w.substr(0, width));
      w = w.substr(width);
    }
    if (w.empty()) return;
    if (cur.empty()) {
      cur = w;
    } else if (cur.size() + 1 + w.size() <= width) {
      cur += ' ' + w;
    } else {
      lines.push_back(cur);
      cur = w;
    }
  };
  for (char c : s) {
    if (text::is_space_byte(static_cast<unsigned char>(c))) {
      if (!word.empty()) push_word(std::move(word));
      word.clear();
    } else {
      word += c;
    }
  }
  if (!word.empty()) push_word(std::move(word));
  if (!cur.empty()) lines.push_back(cur);
  return lines;
}

inline void draw_text(RgbImage& img, int x, int y, const std::string& s) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto& g = font::glyph(s[i]);
    int ox = x + static_cast<int>(i) * kCellWidth;
    for (int col = 0; col < font::kGlyphWidth; ++col) {
      for (int row = 0; row < font::kGlyphHeight; ++row) {
        if (g[col] & (1u << row)) {
          img.fill_rect(ox + col * kScale, y + row * kScale, kScale, kScale, 0, 0, 0);
        }
      }
    }
  }
}

// Image area of a panel: the decoded picture scaled to the panel width,
// or a tinted placeholder labelled with the image reference.
inline RgbImage image_area(const std::optional<std::string>& bytes, const std::string& ref) {
  const int inner = kPanelWidth - 2 * kMargin;
  if (bytes) {
    if (auto decoded = decode_png(*bytes); decoded && decoded->width > 0 && decoded->height > 0) {
      int w = inner;
      int h = static_cast<int>(static_cast<long long>(decoded->height) * inner / decoded->width);
      if (h > kMaxImageHeight) {
        h = kMaxImageHeight;
        w = static_cast<int>(static_cast<long long>(decoded->width) * kMaxImageHeight /
                             decoded->height);
      }
      return decoded->resized(std::max(w, 1), std::max(h, 1));
    }
  }
  std::uint64_t seed = hash::fnv1a(bytes ? *bytes : ref);
  auto tint = [&](int shift) { return static_cast<std::uint8_t>(160 + ((seed >> shift) & 63)); };
  RgbImage area(inner, kPlaceholderHeight);
  area.fill_rect(0, 0, inner, kPlaceholderHeight, tint(0), tint(8), tint(16));
  auto label = "image " + ref;
  if (label.size() > static_cast<std::size_t>(chars_per_line())) {
    label.resize(static_cast<std::size_t>(chars_per_line()));
  }
  draw_text(area, 0, (kPlaceholderHeight - kCellHeight) / 2, label);
  return area;
}

inline RgbImage render_panel(const AlignedEvidence& item,
                             const std::optional<std::string>& image_bytes) {
  std::vector<std::string> lines;
  auto width = static_cast<std::size_t>(chars_per_line());
  for (auto& l : wrap("[" + item.ku_name + "]", width)) lines.push_back(std::move(l));
  for (const auto& t : item.texts) {
    for (auto& l : wrap(t, width)) lines.push_back(std::move(l));
  }
  std::optional<RgbImage> area;
  if (item.image_id) area = image_area(image_bytes, item.image_ref);
  int area_h = area ? area->height + kMargin : 0;
  int height = kMargin + area_h + static_cast<int>(lines.size()) * kCellHeight + kMargin + kSeparator;
  RgbImage panel(kPanelWidth, height);
  int y = kMargin;
  if (area) {
    panel.blit(*area, kMargin, y);
    y += area_h;
  }
  for (const auto& l : lines) {
    draw_text(panel, kMargin, y, l);
    y += kCellHeight;
  }
  panel.fill_rect(0, height - kSeparator, kPanelWidth, kSeparator, 128, 128, 128);
  return panel;
}

inline RgbImage stack(const std::vector<RgbImage>& panels) {
  int h = 0;
  for (const auto& p : panels) h += p.height;
  RgbImage out(kPanelWidth, h);
  int y = 0;
  for (const auto& p : panels) {
    out.blit(p, 0, y);
    y += p.height;
  }
  return out;
}

}  // namespace raster

// Structured mode keeps the items as separate image+text evidence. Raster
// mode also renders them into one PNG; if rendering fails the passage
// stays structured and records a warning.
inline MultimodalPassage stitch_passage(std::vector<AlignedEvidence> items, PassageMode mode,
                                        const ImageLoader& loader = {}) {
  if (items.empty()) throw PreconditionError("stitch_passage needs at least one item");
  MultimodalPassage mp;
  mp.items = std::move(items);
  if (mode == PassageMode::kRaster) {
    try {
      std::vector<RgbImage> panels;
      for (const auto& item : mp.items) {
        std::optional<std::string> bytes;
        if (item.image_id && loader && !item.image_ref.empty()) {
          try {
            bytes = loader(item.image_ref);
          } catch (const std::exception& e) {
            mp.warnings.push_back("could not load " + item.image_ref + ": " + e.what());
          }
        }
        panels.push_back(raster::render_panel(item, bytes));
      }
      mp.raster_png = encode_png(raster::stack(panels));
    } catch (const std::exception& e) {
      std::string msg = std::string("raster rendering failed, using structured passage: ") + e.what();
      spdlog::warn("{}", msg);
      mp.warnings.push_back(msg);
      mp.raster_png.reset();
    }
  }
  return mp;
}

}  // namespace kurag

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

// Deterministic in-process stand-ins for the encoder and the detector.
//
// The mock encoder recognizes markers of the form "@@entity:<name>@@" in
// either text or image bytes. Inputs carrying markers map to the
// normalized sum of one standard basis vector per distinct marker name, so
// a tagged caption and a tagged image of the same entity embed identically.
// Distinct names are orthogonal unless their basis slots collide (the
// mock holds at most `dim` distinct names; see tag_slot()).
//
// Untagged text is embedded as a bag of words: each lowercased word
// contributes a hash-seeded pseudo-random vector, so lexical overlap shows
// up as cosine similarity. Untagged image bytes hash as a whole.

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "kurag/backends/interfaces.hpp"
#include "kurag/errors.hpp"
#include "kurag/util/files.hpp"
#include "kurag/util/hash.hpp"
#include "kurag/util/text.hpp"

namespace kurag {

inline constexpr std::string_view kTagOpen = "@@entity:";
inline constexpr std::string_view kTagClose = "@@";

inline std::string make_tag(std::string_view name) {
  return std::string(kTagOpen) + std::string(name) + std::string(kTagClose);
}

// Marker names in order of first appearance, deduplicated.
inline std::vector<std::string> find_tags(std::string_view input) {
  std::vector<std::string> names;
  std::set<std::string> seen;
  std::size_t pos = 0;
  while ((pos = input.find(kTagOpen, pos)) != std::string_view::npos) {
    auto start = pos + kTagOpen.size();
    auto end = input.find(kTagClose, start);
    if (end == std::string_view::npos) break;
    std::string name(input.substr(start, end - start));
    if (!name.empty() && seen.insert(name).second) names.push_back(name);
    pos = end + kTagClose.size();
  }
  return names;
}

inline std::size_t tag_slot(std::string_view name, std::size_t dim) {
  return static_cast<std::size_t>(hash::fnv1a(name) % dim);
}

enum class MockInput { kText, kImage };

inline Embedding mock_embed(std::string_view input, std::size_t dim,
                            MockInput kind = MockInput::kText) {
  if (dim < 2) throw ValidationError("mock encoder dim must be >= 2");
  std::vector<double> raw(dim, 0.0);
  auto tags = find_tags(input);
  if (!tags.empty()) {
    for (const auto& t : tags) raw[tag_slot(t, dim)] += 1.0;
    return Embedding::unit(std::move(raw));
  }
  auto add_seeded = [&](std::uint64_t seed) {
    std::uint64_t state = seed;
    for (auto& v : raw) v += hash::unit_uniform(state);
  };
  if (kind == MockInput::kText) {
    auto ws = text::words(input);
    for (const auto& w : ws) add_seeded(hash::fnv1a(w, 0x6b75726167ULL));
    if (ws.empty()) add_seeded(hash::fnv1a(input));
  } else {
    add_seeded(hash::fnv1a(input, 0x696d616765ULL));
  }
  auto e = Embedding::unit(std::move(raw));
  if (!e.normalized) {
    // Degenerate all-zero sum; fall back to a fixed direction.
    e.values.assign(dim, 0.0f);
    e.values[0] = 1.0f;
    e.normalized = true;
  }
  return e;
}

class MockEncoder final : public EncoderBackend {
 public:
  explicit MockEncoder(std::size_t dim) : dim_(dim) {
    if (dim < 2) throw ValidationError("mock encoder dim must be >= 2");
  }

  Embedding embed_text(std::string_view text) const override {
    return mock_embed(text, dim_, MockInput::kText);
  }
  Embedding embed_image(std::string_view bytes) const override {
    return mock_embed(bytes, dim_, MockInput::kImage);
  }
  std::size_t dim() const override { return dim_; }

 private:
  std::size_t dim_;
};

// Width and height from a PNG header, or 1x1 for anything else.
inline std::pair<std::int64_t, std::int64_t> sniff_image_size(std::string_view bytes) {
  static constexpr unsigned char kPng[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (bytes.size() >= 24 && std::equal(kPng, kPng + 8, bytes.begin(),
                                       [](unsigned char a, char b) {
                                         return a == static_cast<unsigned char>(b);
                                       })) {
    auto be32 = [&](std::size_t off) {
      std::int64_t v = 0;
      for (int i = 0; i < 4; ++i) v = (v << 8) | static_cast<unsigned char>(bytes[off + i]);
      return v;
    };
    return {be32(16), be32(20)};
  }
  return {1, 1};
}

// Planted detections for one image.
//
//   {"width": W, "height": H,
//    "objects": [{"box": [x, y, w, h], "crop": "<crop bytes as text>"}, ...]}
//
// "crop_file" may replace "crop"; it is resolved relative to the sidecar.
struct DetectionAnnotation {
  std::int64_t width = 1;
  std::int64_t height = 1;
  std::vector<Detection> objects;

  static DetectionAnnotation from_json(const nlohmann::json& j,
                                       const std::filesystem::path& base_dir = {}) {
    DetectionAnnotation a;
    a.width = j.at("width").get<std::int64_t>();
    a.height = j.at("height").get<std::int64_t>();
    for (const auto& o : j.value("objects", nlohmann::json::array())) {
      Detection d;
      const auto& b = o.at("box");
      if (!b.is_array() || b.size() != 4) {
        throw ValidationError("annotation box must be [x, y, w, h]");
      }
      d.box = {b[0].get<std::int64_t>(), b[1].get<std::int64_t>(),
               b[2].get<std::int64_t>(), b[3].get<std::int64_t>()};
      if (o.contains("crop")) {
        d.crop = o["crop"].get<std::string>();
      } else if (o.contains("crop_file")) {
        d.crop = files::read_all(base_dir / o["crop_file"].get<std::string>());
      }
      a.objects.push_back(std::move(d));
    }
    return a;
  }
};

// Reads planted boxes from "<image ref>.boxes.json" (or from annotations
// registered in memory); otherwise reports the whole image as one object.
class MockDetector final : public DetectorBackend {
 public:
  MockDetector() = default;
  explicit MockDetector(std::unordered_map<std::string, DetectionAnnotation> planted)
      : planted_(std::move(planted)) {}

  std::vector<Detection> detect(const ImageData& image) const override {
    std::optional<DetectionAnnotation> ann;
    if (auto it = planted_.find(image.ref); it != planted_.end()) {
      ann = it->second;
    } else if (!image.ref.empty()) {
      std::filesystem::path sidecar = image.ref + ".boxes.json";
      std::error_code ec;
      if (std::filesystem::exists(sidecar, ec)) {
        auto j = nlohmann::json::parse(files::read_all(sidecar));
        ann = DetectionAnnotation::from_json(j, sidecar.parent_path());
      }
    }
    if (!ann) {
      auto [w, h] = sniff_image_size(image.bytes);
      return {Detection{{0, 0, w, h}, image.bytes}};
    }
    for (const auto& d : ann->objects) {
      if (!d.box.within(ann->width, ann->height)) {
        throw Error("planted box outside image bounds for " + image.ref);
      }
    }
    return ann->objects;
  }

 private:
  std::unordered_map<std::string, DetectionAnnotation> planted_;
};

}  // namespace kurag

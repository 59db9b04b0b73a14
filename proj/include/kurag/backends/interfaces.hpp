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

// Interfaces over the three external models the engine depends on: a
// shared text/image encoder, an instance detector, and a multimodal chat
// model. Every implementation must be safe to call from several threads.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "kurag/embedding.hpp"

namespace kurag {

// Raw image bytes plus the reference (path, URL or store id) they came
// from. The reference is what transcripts record.
struct ImageData {
  std::string ref;
  std::string bytes;
};

struct BoundingBox {
  std::int64_t x = 0;
  std::int64_t y = 0;
  std::int64_t width = 0;
  std::int64_t height = 0;

  bool within(std::int64_t image_width, std::int64_t image_height) const {
    return x >= 0 && y >= 0 && width >= 0 && height >= 0 &&
           x + width <= image_width && y + height <= image_height;
  }

  bool operator==(const BoundingBox&) const = default;
};

struct Detection {
  BoundingBox box;
  std::string crop;  // encoded crop bytes
};

class EncoderBackend {
 public:
  virtual ~EncoderBackend() = default;
  virtual Embedding embed_text(std::string_view text) const = 0;
  virtual Embedding embed_image(std::string_view bytes) const = 0;
  virtual std::size_t dim() const = 0;
};

class DetectorBackend {
 public:
  virtual ~DetectorBackend() = default;
  virtual std::vector<Detection> detect(const ImageData& image) const = 0;
};

enum class Role { kSystem, kUser, kAssistant };

inline const char* to_string(Role r) {
  switch (r) {
    case Role::kSystem: return "system";
    case Role::kUser: return "user";
    case Role::kAssistant: return "assistant";
  }
  return "user";
}

struct ChatTurn {
  Role role = Role::kUser;
  std::string text;
  std::vector<ImageData> images;
};

using ChatHistory = std::vector<ChatTurn>;

class MLLMBackend {
 public:
  virtual ~MLLMBackend() = default;
  // Stateless: everything the model sees is in `history`.
  virtual std::string chat(const ChatHistory& history) const = 0;
};

}  // namespace kurag

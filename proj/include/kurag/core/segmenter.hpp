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

#include <string_view>
#include <vector>

#include "kurag/core/types.hpp"
#include "kurag/errors.hpp"
#include "kurag/util/text.hpp"

namespace kurag {

// Greedy sentence packing: each chunk takes as many of the remaining
// sentences as fit in `max_tokens`. A sentence that alone exceeds the
// budget becomes its own chunk with `oversized` set; it is never split.
// Returned chunks carry no ids yet.
inline std::vector<Chunk> segment_sentences(const std::vector<std::string>& sentences,
                                            std::size_t max_tokens) {
  if (max_tokens < 1) throw PreconditionError("max_tokens must be >= 1");
  std::vector<Chunk> out;
  Chunk cur;
  auto flush = [&] {
    if (!cur.sentences.empty()) out.push_back(std::move(cur));
    cur = Chunk{};
  };
  for (const auto& s : sentences) {
    auto n = text::count_tokens(s);
    if (n > max_tokens) {
      flush();
      cur.sentences.push_back(s);
      cur.token_count = n;
      cur.oversized = true;
      flush();
      continue;
    }
    if (!cur.sentences.empty() && cur.token_count + n > max_tokens) flush();
    cur.sentences.push_back(s);
    cur.token_count += n;
  }
  flush();
  return out;
}

inline std::vector<Chunk> segment_passage(std::string_view body, std::size_t max_tokens) {
  if (max_tokens < 1) throw PreconditionError("max_tokens must be >= 1");
  return segment_sentences(text::split_sentences(body), max_tokens);
}

}  // namespace kurag

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

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "kurag/errors.hpp"

namespace kurag {

// A dense embedding. Text and image encoders share one space, so the same
// type carries chunk, image, crop and query vectors.
struct Embedding {
  std::vector<float> values;
  bool normalized = false;

  std::size_t dim() const noexcept { return values.size(); }

  double norm() const {
    double s = 0.0;
    for (float v : values) s += static_cast<double>(v) * v;
    return std::sqrt(s);
  }

  static Embedding unit(std::vector<double> raw) {
    double s = 0.0;
    for (double v : raw) s += v * v;
    Embedding e;
    e.values.resize(raw.size());
    if (s > 0.0) {
      double inv = 1.0 / std::sqrt(s);
      for (std::size_t i = 0; i < raw.size(); ++i) {
        e.values[i] = static_cast<float>(raw[i] * inv);
      }
      e.normalized = true;
    }
    return e;
  }

  bool operator==(const Embedding&) const = default;
};

inline double dot(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) throw DimensionError(a.size(), b.size());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    s += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  }
  return s;
}

// Cosine similarity; 0 when either side is the zero vector.
inline double cosine(const Embedding& a, const Embedding& b) {
  double d = dot(a.values, b.values);
  double na = a.norm();
  double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return d / (na * nb);
}

}  // namespace kurag

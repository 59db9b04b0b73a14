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

#include <string>

#include <nlohmann/json.hpp>

#include "kurag/errors.hpp"

namespace kurag {

// One backend block of the application config:
//   {"kind": "mock" | "http", "base_url", "model", "api_key_env",
//    "timeout_ms", "max_retries", "initial_backoff_ms", "dim", "script"}
// `script` is the rule file for the mock chat model; `dim` declares the
// output width of an http encoder.
struct BackendConfig {
  std::string kind = "mock";
  std::string base_url;
  std::string model;
  std::string api_key_env;
  int timeout_ms = 30000;
  int max_retries = 3;
  int initial_backoff_ms = 200;
  std::size_t dim = 0;
  std::string script;

  static BackendConfig from_json(const nlohmann::json& j) {
    static const char* kKeys[] = {"kind", "base_url", "model", "api_key_env",
                                  "timeout_ms", "max_retries", "initial_backoff_ms",
                                  "dim", "script"};
    if (!j.is_object()) throw ValidationError("backend config must be an object");
    for (const auto& [key, _] : j.items()) {
      bool known = false;
      for (const char* k : kKeys) known = known || key == k;
      if (!known) throw ValidationError("unknown backend config key '" + key + "'");
    }
    BackendConfig c;
    c.kind = j.value("kind", c.kind);
    c.base_url = j.value("base_url", c.base_url);
    c.model = j.value("model", c.model);
    c.api_key_env = j.value("api_key_env", c.api_key_env);
    c.timeout_ms = j.value("timeout_ms", c.timeout_ms);
    c.max_retries = j.value("max_retries", c.max_retries);
    c.initial_backoff_ms = j.value("initial_backoff_ms", c.initial_backoff_ms);
    c.dim = j.value("dim", c.dim);
    c.script = j.value("script", c.script);
    c.validate();
    return c;
  }

  nlohmann::json to_json() const {
    return {{"kind", kind},
            {"base_url", base_url},
            {"model", model},
            {"api_key_env", api_key_env},
            {"timeout_ms", timeout_ms},
            {"max_retries", max_retries},
            {"initial_backoff_ms", initial_backoff_ms},
            {"dim", dim},
            {"script", script}};
  }

  void validate() const {
    if (kind != "mock" && kind != "http") {
      throw ValidationError("backend kind must be 'mock' or 'http', got '" + kind + "'");
    }
    if (kind == "http" && base_url.empty()) {
      throw ValidationError("http backend requires base_url");
    }
    if (timeout_ms <= 0) throw ValidationError("timeout_ms must be positive");
    if (max_retries < 0) throw ValidationError("max_retries must be >= 0");
    if (initial_backoff_ms < 0) throw ValidationError("initial_backoff_ms must be >= 0");
  }
};

}  // namespace kurag

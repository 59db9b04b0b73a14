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

// Application config file and backend construction.
//
//   {
//     "store_dir": "store",
//     "store": {StoreConfig},
//     "pipeline": {PipelineConfig},
//     "reasoner": {ReasonerConfig},
//     "backends": {"encoder": {...}, "detector": {...}, "mllm": {...}},
//     "service": {"bind": "127.0.0.1", "port": 8080},
//     "eval": {"workers": 4, "accuracy_floor": 0.0}
//   }
//
// Relative paths (store_dir, mock chat scripts) resolve against the
// directory holding the config file. Secrets come only from environment
// variables named by `api_key_env`.

#include <filesystem>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "kurag/backends/config.hpp"
#include "kurag/backends/http.hpp"
#include "kurag/backends/mock.hpp"
#include "kurag/backends/scripted_mllm.hpp"
#include "kurag/core/types.hpp"
#include "kurag/errors.hpp"
#include "kurag/query_pipeline.hpp"
#include "kurag/reasoner.hpp"
#include "kurag/util/files.hpp"

namespace kurag::app {

namespace fs = std::filesystem;

namespace detail {

inline void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> keys,
                           const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + " must be an object");
  for (const auto& [key, _] : j.items()) {
    bool known = false;
    for (const char* k : keys) known = known || key == k;
    if (!known) throw ValidationError("unknown key '" + key + "' in " + where);
  }
}

}  // namespace detail

struct ServiceConfig {
  std::string bind = "127.0.0.1";
  int port = 8080;
};

struct EvalSettings {
  std::size_t workers = 4;
  double accuracy_floor = 0.0;
};

struct AppConfig {
  fs::path base_dir = ".";
  fs::path store_dir = "store";
  StoreConfig store;
  PipelineConfig pipeline;
  ReasonerConfig reasoner;
  BackendConfig encoder;
  BackendConfig detector;
  BackendConfig mllm;
  ServiceConfig service;
  EvalSettings eval;

  fs::path resolve(const fs::path& p) const {
    return p.is_absolute() ? p : (base_dir / p).lexically_normal();
  }

  static AppConfig from_json(const nlohmann::json& j, const fs::path& base_dir = ".") {
    detail::reject_unknown(j, {"store_dir", "store", "pipeline", "reasoner", "backends", "service", "eval"},
                           "config");
    AppConfig c;
    c.base_dir = base_dir;
    try {
      c.store_dir = j.value("store_dir", std::string("store"));
      if (j.contains("store")) c.store = StoreConfig::from_json(j["store"]);
      if (j.contains("pipeline")) c.pipeline = PipelineConfig::from_json(j["pipeline"]);
      if (j.contains("reasoner")) c.reasoner = ReasonerConfig::from_json(j["reasoner"]);
      if (j.contains("backends")) {
        const auto& b = j["backends"];
        detail::reject_unknown(b, {"encoder", "detector", "mllm"}, "backends");
        if (b.contains("encoder")) c.encoder = BackendConfig::from_json(b["encoder"]);
        if (b.contains("detector")) c.detector = BackendConfig::from_json(b["detector"]);
        if (b.contains("mllm")) c.mllm = BackendConfig::from_json(b["mllm"]);
      }
      if (j.contains("service")) {
        const auto& s = j["service"];
        detail::reject_unknown(s, {"bind", "port"}, "service");
        c.service.bind = s.value("bind", c.service.bind);
        c.service.port = s.value("port", c.service.port);
      }
      if (j.contains("eval")) {
        const auto& e = j["eval"];
        detail::reject_unknown(e, {"workers", "accuracy_floor"}, "eval");
        c.eval.workers = e.value("workers", c.eval.workers);
        c.eval.accuracy_floor = e.value("accuracy_floor", c.eval.accuracy_floor);
      }
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(std::string("bad config value: ") + e.what());
    }
    c.validate();
    return c;
  }

  static AppConfig load(const fs::path& path) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(files::read_all(path));
    } catch (const nlohmann::json::parse_error& e) {
      throw ValidationError("config " + path.string() + ": " + e.what());
    }
    return from_json(j, path.has_parent_path() ? path.parent_path() : fs::path("."));
  }

  void validate() const {
    if (service.port < 0 || service.port > 65535) throw ValidationError("service.port out of range");
    if (eval.workers < 1) throw ValidationError("eval.workers must be >= 1");
    if (eval.accuracy_floor < 0.0 || eval.accuracy_floor > 1.0) {
      throw ValidationError("eval.accuracy_floor must be in [0, 1]");
    }
    if (mllm.kind == "mock" && mllm.script.empty()) {
      throw ValidationError("mock mllm backend needs a script file");
    }
  }

  nlohmann::json to_json() const {
    return {{"store_dir", store_dir.string()},
            {"store", store.to_json()},
            {"pipeline", pipeline.to_json()},
            {"reasoner", reasoner.to_json()},
            {"backends", {{"encoder", encoder.to_json()},
                          {"detector", detector.to_json()},
                          {"mllm", mllm.to_json()}}},
            {"service", {{"bind", service.bind}, {"port", service.port}}},
            {"eval", {{"workers", eval.workers}, {"accuracy_floor", eval.accuracy_floor}}}};
  }
};

inline std::shared_ptr<EncoderBackend> make_encoder(const AppConfig& c) {
  if (c.encoder.kind == "mock") return std::make_shared<MockEncoder>(c.store.embedding_dim);
  return std::make_shared<HttpEncoder>(c.encoder, c.encoder.dim ? c.encoder.dim : c.store.embedding_dim);
}

inline std::shared_ptr<DetectorBackend> make_detector(const AppConfig& c) {
  if (c.detector.kind == "mock") return std::make_shared<MockDetector>();
  return std::make_shared<HttpDetector>(c.detector);
}

inline std::shared_ptr<MLLMBackend> make_mllm(const AppConfig& c) {
  if (c.mllm.kind == "mock") {
    auto path = c.resolve(c.mllm.script);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(files::read_all(path));
    } catch (const nlohmann::json::parse_error& e) {
      throw ValidationError("chat script " + path.string() + ": " + e.what());
    }
    return std::make_shared<ScriptedMLLM>(ChatScript::from_json(j));
  }
  return std::make_shared<HttpMLLM>(c.mllm);
}

}  // namespace kurag::app

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

// HTTP front end over Engine.
//
//   POST   /ingest      JSONL corpus body
//   POST   /query       multipart: image (file, optional), question, mode
//   GET    /ku/:id
//   DELETE /chunk/:id
//   POST   /eval        {"mode", "items": [...]} or {"mode", "dataset": path}
//   GET    /healthz
//
// Errors are {"error": {"kind", "message"}} with 400 for bad input, 404,
// 409, 502 for backend transport failures and 500 otherwise.

#include <string>

#include <httplib.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "kurag/app/engine.hpp"

namespace kurag::app {

inline int http_status(ErrorKind k) {
  switch (k) {
    case ErrorKind::kValidation:
    case ErrorKind::kPrecondition:
    case ErrorKind::kDimension:
    case ErrorKind::kFormat:
      return 400;
    case ErrorKind::kNotFound: return 404;
    case ErrorKind::kConflict: return 409;
    case ErrorKind::kTransport: return 502;
    case ErrorKind::kIntegrity:
    case ErrorKind::kInternal:
      return 500;
  }
  return 500;
}

class Service {
 public:
  explicit Service(Engine& engine) : engine_(engine) { routes(); }

  httplib::Server& server() { return server_; }

  // Blocks until stop().
  bool listen(const std::string& host, int port) {
    spdlog::info("listening on {}:{}", host, port);
    return server_.listen(host, port);
  }

  int bind_any(const std::string& host) { return server_.bind_to_any_port(host); }
  bool listen_after_bind() { return server_.listen_after_bind(); }
  void stop() { server_.stop(); }

 private:
  static void send_json(httplib::Response& res, int status, const nlohmann::json& j) {
    res.status = status;
    res.set_content(j.dump(2) + "\n", "application/json");
  }

  static void send_error(httplib::Response& res, const std::exception& e) {
    auto kind = dynamic_cast<const nlohmann::json::exception*>(&e) ? ErrorKind::kValidation : classify(e);
    send_json(res, http_status(kind), {{"error", {{"kind", to_string(kind)}, {"message", e.what()}}}});
  }

  template <typename F>
  static httplib::Server::Handler guarded(F f) {
    return [f](const httplib::Request& req, httplib::Response& res) {
      try {
        f(req, res);
      } catch (const std::exception& e) {
        send_error(res, e);
      }
    };
  }

  static ChunkId parse_chunk_id(const std::string& s) {
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size() || s.empty()) throw ValidationError("chunk id must be an integer, got '" + s + "'");
    return v;
  }

  static nlohmann::json parse_body(const httplib::Request& req) {
    try {
      return nlohmann::json::parse(req.body);
    } catch (const nlohmann::json::parse_error& e) {
      throw ValidationError(std::string("request body is not JSON: ") + e.what());
    }
  }

  void routes() {
    server_.Get("/healthz", guarded([this](const httplib::Request&, httplib::Response& res) {
      send_json(res, 200, engine_.health());
    }));

    server_.Post("/ingest", guarded([this](const httplib::Request& req, httplib::Response& res) {
      send_json(res, 200, engine_.ingest_jsonl_text(req.body, engine_.config().base_dir));
    }));

    server_.Post("/query", guarded([this](const httplib::Request& req, httplib::Response& res) {
      if (!req.is_multipart_form_data()) throw ValidationError("query must be multipart/form-data");
      if (!req.has_file("question")) throw ValidationError("missing 'question' field");
      VisualQuery q;
      q.text = req.get_file_value("question").content;
      if (req.has_file("image")) {
        auto f = req.get_file_value("image");
        if (f.content.empty()) throw ValidationError("uploaded image is empty");
        q.image = ImageData{f.filename.empty() ? "upload" : f.filename, f.content};
      }
      auto mode = AnswerMode::kKuRag;
      if (req.has_file("mode")) mode = answer_mode_from_string(req.get_file_value("mode").content);
      auto outcome = engine_.query(q, mode);
      send_json(res, outcome.ok() ? 200 : http_status(outcome.error_kind), outcome.to_json());
    }));

    server_.Get("/ku/:id", guarded([this](const httplib::Request& req, httplib::Response& res) {
      send_json(res, 200, engine_.get_unit(req.path_params.at("id")));
    }));

    server_.Delete("/chunk/:id", guarded([this](const httplib::Request& req, httplib::Response& res) {
      send_json(res, 200, engine_.delete_chunk(parse_chunk_id(req.path_params.at("id"))));
    }));

    server_.Post("/eval", guarded([this](const httplib::Request& req, httplib::Response& res) {
      auto body = parse_body(req);
      if (!body.is_object()) throw ValidationError("eval body must be an object");
      auto mode = answer_mode_from_string(body.value("mode", std::string("kurag")));
      std::vector<EvalItem> items;
      fs::path image_base = engine_.config().base_dir;
      if (body.contains("dataset")) {
        fs::path path = engine_.config().resolve(body["dataset"].get<std::string>());
        items = load_eval_dataset(path);
        image_base = path.parent_path();
      } else if (body.contains("items") && body["items"].is_array()) {
        for (const auto& j : body["items"]) items.push_back(EvalItem::from_json(j));
      } else {
        throw ValidationError("eval body needs 'items' or 'dataset'");
      }
      send_json(res, 200, engine_.eval(items, mode, image_base).to_json());
    }));
  }

  Engine& engine_;
  httplib::Server server_;
};

}  // namespace kurag::app

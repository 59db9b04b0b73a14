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

// HTTP clients for OpenAI-style model servers. Wire schemas are
// documented in docs/wire_schemas.md; golden request bodies live in
// tests/golden/.
//
//   POST {base_url}/chat/completions
//   POST {base_url}/embeddings
//   POST {base_url}/detect

#include <chrono>
#include <cstdlib>
#include <string>
#include <string_view>
#include <thread>
#include <utility>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "kurag/backends/config.hpp"
#include "kurag/backends/interfaces.hpp"
#include "kurag/errors.hpp"
#include "kurag/util/base64.hpp"

namespace kurag {

namespace wire {

inline std::string sniff_mime(std::string_view bytes) {
  if (bytes.size() >= 8 && bytes.substr(1, 3) == "PNG") return "image/png";
  if (bytes.size() >= 3 && static_cast<unsigned char>(bytes[0]) == 0xff &&
      static_cast<unsigned char>(bytes[1]) == 0xd8) {
    return "image/jpeg";
  }
  if (bytes.size() >= 6 && (bytes.substr(0, 6) == "GIF87a" || bytes.substr(0, 6) == "GIF89a")) {
    return "image/gif";
  }
  if (bytes.size() >= 12 && bytes.substr(0, 4) == "RIFF" && bytes.substr(8, 4) == "WEBP") {
    return "image/webp";
  }
  return "application/octet-stream";
}

inline std::string data_url(std::string_view bytes) {
  return "data:" + sniff_mime(bytes) + ";base64," + base64::encode(bytes);
}

// User turns carry a content array (images first, then text); assistant
// and system turns carry plain string content.
inline nlohmann::json chat_request_body(const std::string& model,
                                        const ChatHistory& history) {
  auto messages = nlohmann::json::array();
  for (const auto& turn : history) {
    nlohmann::json m;
    m["role"] = to_string(turn.role);
    if (turn.role == Role::kUser) {
      auto content = nlohmann::json::array();
      for (const auto& img : turn.images) {
        content.push_back({{"type", "image_url"},
                           {"image_url", {{"url", data_url(img.bytes)}}}});
      }
      content.push_back({{"type", "text"}, {"text", turn.text}});
      m["content"] = std::move(content);
    } else {
      m["content"] = turn.text;
    }
    messages.push_back(std::move(m));
  }
  return {{"model", model}, {"messages", std::move(messages)}, {"temperature", 0}};
}

inline std::string parse_chat_response(const nlohmann::json& j) {
  try {
    const auto& content = j.at("choices").at(0).at("message").at("content");
    if (content.is_string()) return content.get<std::string>();
    // Some servers echo content arrays back.
    std::string out;
    for (const auto& part : content) {
      if (part.value("type", "") == "text") out += part.at("text").get<std::string>();
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw TransportError(TransportFailure::kMalformed,
                         std::string("chat response: ") + e.what());
  }
}

inline nlohmann::json embed_text_request_body(const std::string& model,
                                              std::string_view text) {
  return {{"model", model}, {"input", nlohmann::json::array({std::string(text)})}};
}

inline nlohmann::json embed_image_request_body(const std::string& model,
                                               std::string_view bytes) {
  return {{"model", model},
          {"input", nlohmann::json::array({{{"image", data_url(bytes)}}})}};
}

// Returns a unit-normalized vector; rejects a width other than `dim`
// when `dim` is nonzero.
inline Embedding parse_embedding_response(const nlohmann::json& j, std::size_t dim) {
  std::vector<double> raw;
  try {
    raw = j.at("data").at(0).at("embedding").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw TransportError(TransportFailure::kMalformed,
                         std::string("embedding response: ") + e.what());
  }
  if (dim != 0 && raw.size() != dim) throw DimensionError(dim, raw.size());
  auto e = Embedding::unit(std::move(raw));
  if (!e.normalized) {
    throw TransportError(TransportFailure::kMalformed, "embedding response is the zero vector");
  }
  return e;
}

inline nlohmann::json detect_request_body(const std::string& model,
                                          std::string_view bytes) {
  return {{"model", model}, {"image", base64::encode(bytes)}};
}

inline std::vector<Detection> parse_detect_response(const nlohmann::json& j) {
  std::vector<Detection> out;
  try {
    auto width = j.at("width").get<std::int64_t>();
    auto height = j.at("height").get<std::int64_t>();
    for (const auto& o : j.at("objects")) {
      const auto& b = o.at("box");
      Detection d;
      d.box = {b.at(0).get<std::int64_t>(), b.at(1).get<std::int64_t>(),
               b.at(2).get<std::int64_t>(), b.at(3).get<std::int64_t>()};
      if (!d.box.within(width, height)) {
        throw TransportError(TransportFailure::kMalformed, "detection box outside image");
      }
      d.crop = base64::decode(o.at("crop").get<std::string>());
      out.push_back(std::move(d));
    }
  } catch (const nlohmann::json::exception& e) {
    throw TransportError(TransportFailure::kMalformed,
                         std::string("detect response: ") + e.what());
  }
  return out;
}

}  // namespace wire

// POSTs JSON with exponential backoff. Connection failures, timeouts, 429
// and 5xx are retried up to `max_retries` times; other statuses fail fast.
class HttpTransport {
 public:
  explicit HttpTransport(BackendConfig config) : config_(std::move(config)) {
    config_.validate();
    auto scheme_end = config_.base_url.find("://");
    auto path_start = config_.base_url.find('/', scheme_end == std::string::npos
                                                     ? 0
                                                     : scheme_end + 3);
    if (path_start == std::string::npos) {
      host_ = config_.base_url;
    } else {
      host_ = config_.base_url.substr(0, path_start);
      prefix_ = config_.base_url.substr(path_start);
      while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
    }
  }

  const BackendConfig& config() const noexcept { return config_; }

  nlohmann::json post_json(const std::string& path, const nlohmann::json& body) const {
    const std::string payload = body.dump();
    httplib::Headers headers;
    if (!config_.api_key_env.empty()) {
      if (const char* key = std::getenv(config_.api_key_env.c_str())) {
        headers.emplace("Authorization", std::string("Bearer ") + key);
      }
    }
    int delay_ms = config_.initial_backoff_ms;
    for (int attempt = 0;; ++attempt) {
      auto outcome = attempt_once(prefix_ + path, headers, payload);
      if (outcome.ok) return std::move(outcome.body);
      if (!outcome.retryable || attempt >= config_.max_retries) throw outcome.error;
      std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms));
      delay_ms = delay_ms * 2;
    }
  }

 private:
  struct Outcome {
    bool ok = false;
    bool retryable = false;
    nlohmann::json body;
    TransportError error{TransportFailure::kConnection, ""};
  };

  Outcome attempt_once(const std::string& path, const httplib::Headers& headers,
                       const std::string& payload) const {
    httplib::Client cli(host_);
    auto timeout = std::chrono::milliseconds(config_.timeout_ms);
    cli.set_connection_timeout(timeout);
    cli.set_read_timeout(timeout);
    cli.set_write_timeout(timeout);
    Outcome out;
    auto res = cli.Post(path, headers, payload, "application/json");
    if (!res) {
      auto err = res.error();
      bool timed_out = err == httplib::Error::Read || err == httplib::Error::ConnectionTimeout;
      out.retryable = true;
      out.error = TransportError(timed_out ? TransportFailure::kTimeout
                                           : TransportFailure::kConnection,
                                 host_ + path + ": " + httplib::to_string(err));
      return out;
    }
    if (res->status < 200 || res->status >= 300) {
      out.retryable = res->status == 429 || res->status >= 500;
      out.error = TransportError(TransportFailure::kHttpStatus,
                                 host_ + path + " returned HTTP " +
                                     std::to_string(res->status),
                                 res->status);
      return out;
    }
    try {
      out.body = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::parse_error& e) {
      out.error = TransportError(TransportFailure::kMalformed,
                                 host_ + path + ": " + e.what());
      return out;
    }
    out.ok = true;
    return out;
  }

  BackendConfig config_;
  std::string host_;
  std::string prefix_;
};

inline std::string http_chat(const HttpTransport& transport, const ChatHistory& history) {
  if (history.empty()) throw PreconditionError("chat history is empty");
  auto body = wire::chat_request_body(transport.config().model, history);
  return wire::parse_chat_response(transport.post_json("/chat/completions", body));
}

class HttpMLLM final : public MLLMBackend {
 public:
  explicit HttpMLLM(BackendConfig config) : transport_(std::move(config)) {}
  std::string chat(const ChatHistory& history) const override {
    return http_chat(transport_, history);
  }

 private:
  HttpTransport transport_;
};

class HttpEncoder final : public EncoderBackend {
 public:
  HttpEncoder(BackendConfig config, std::size_t dim)
      : transport_(std::move(config)), dim_(dim) {
    if (dim_ == 0) throw ValidationError("http encoder needs a declared dim");
  }

  Embedding embed_text(std::string_view text) const override {
    auto body = wire::embed_text_request_body(transport_.config().model, text);
    return wire::parse_embedding_response(transport_.post_json("/embeddings", body), dim_);
  }
  Embedding embed_image(std::string_view bytes) const override {
    auto body = wire::embed_image_request_body(transport_.config().model, bytes);
    return wire::parse_embedding_response(transport_.post_json("/embeddings", body), dim_);
  }
  std::size_t dim() const override { return dim_; }

 private:
  HttpTransport transport_;
  std::size_t dim_;
};

class HttpDetector final : public DetectorBackend {
 public:
  explicit HttpDetector(BackendConfig config) : transport_(std::move(config)) {}

  std::vector<Detection> detect(const ImageData& image) const override {
    auto body = wire::detect_request_body(transport_.config().model, image.bytes);
    return wire::parse_detect_response(transport_.post_json("/detect", body));
  }

 private:
  HttpTransport transport_;
};

}  // namespace kurag

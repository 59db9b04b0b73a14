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

// Answer generation. The default protocol is a two-turn knowledge
// correction chain: the model first answers the bare question (A_0), then
// sees the retrieved passage plus a correction prompt with (Q, A_0) in its
// history and either revises or repeats its answer (A).

#include <chrono>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "kurag/backends/interfaces.hpp"
#include "kurag/core/knowledge_store.hpp"
#include "kurag/errors.hpp"
#include "kurag/passage.hpp"
#include "kurag/query_pipeline.hpp"

namespace kurag {

// Sent verbatim with the passage in the second turn.
inline constexpr std::string_view kKcAwarePrompt =
    "The initial answer has already been provided. The new image information may either be "
    "related or unrelated to the previous input. If this new information conflicts with the "
    "initial answer, please update the response accordingly. If no changes are needed, simply "
    "output the initial answer again.";

inline constexpr std::string_view kCaptionPrompt =
    "Describe the main subject of this image in one short phrase.";

enum class AnswerMode { kKuRag, kNoKcc, kNoKu };

inline const char* to_string(AnswerMode m) {
  switch (m) {
    case AnswerMode::kKuRag: return "kurag";
    case AnswerMode::kNoKcc: return "no_kcc";
    case AnswerMode::kNoKu: return "no_ku";
  }
  return "kurag";
}

inline AnswerMode answer_mode_from_string(const std::string& s) {
  if (s == "kurag") return AnswerMode::kKuRag;
  if (s == "no_kcc") return AnswerMode::kNoKcc;
  if (s == "no_ku") return AnswerMode::kNoKu;
  throw ValidationError("mode must be one of kurag, no_kcc, no_ku; got '" + s + "'");
}

// Single-turn prompt alternatives kept for ablation runs only.
enum class PromptVariant { kNone, kOwnKnowledgeFirst, kFocusFirstImage, kSelfReflect };

inline PromptVariant prompt_variant_from_string(const std::string& s) {
  if (s == "none") return PromptVariant::kNone;
  if (s == "own_knowledge_first") return PromptVariant::kOwnKnowledgeFirst;
  if (s == "focus_first_image") return PromptVariant::kFocusFirstImage;
  if (s == "self_reflect") return PromptVariant::kSelfReflect;
  throw ValidationError("unknown experimental prompt '" + s + "'");
}

inline const char* to_string(PromptVariant v) {
  switch (v) {
    case PromptVariant::kNone: return "none";
    case PromptVariant::kOwnKnowledgeFirst: return "own_knowledge_first";
    case PromptVariant::kFocusFirstImage: return "focus_first_image";
    case PromptVariant::kSelfReflect: return "self_reflect";
  }
  return "none";
}

inline std::string_view variant_instruction(PromptVariant v) {
  switch (v) {
    case PromptVariant::kOwnKnowledgeFirst:
      return "Answer from what you already know. Consult the additional images only when you "
             "cannot answer without them.";
    case PromptVariant::kFocusFirstImage:
      return "The question is about the subject of the first image. Treat later images as "
             "background material.";
    case PromptVariant::kSelfReflect:
      return "First answer the question from your own knowledge, then check that answer against "
             "the additional images and revise it only if they contradict it. Output only the "
             "final answer.";
    case PromptVariant::kNone: break;
  }
  return "";
}

struct ReasonerConfig {
  PassageMode passage_mode = PassageMode::kStructured;
  PromptVariant experimental_prompt = PromptVariant::kNone;

  nlohmann::json to_json() const {
    return {{"passage_mode", to_string(passage_mode)},
            {"experimental_prompt", to_string(experimental_prompt)}};
  }

  static ReasonerConfig from_json(const nlohmann::json& j) {
    for (const auto& [key, _] : j.items()) {
      if (key != "passage_mode" && key != "experimental_prompt") {
        throw ValidationError("unknown reasoner config key '" + key + "'");
      }
    }
    ReasonerConfig c;
    if (j.contains("passage_mode")) {
      c.passage_mode = passage_mode_from_string(j["passage_mode"].get<std::string>());
    }
    if (j.contains("experimental_prompt")) {
      c.experimental_prompt = prompt_variant_from_string(j["experimental_prompt"].get<std::string>());
    }
    return c;
  }
};

struct TranscriptTurn {
  Role role = Role::kUser;
  std::string text;
  std::vector<std::string> image_refs;
  double elapsed_ms = 0.0;  // model latency, on assistant turns
};

struct DialogueState {
  VisualQuery question;
  std::optional<std::string> initial_answer;
  std::string final_answer;
  ChatHistory history;
  std::vector<TranscriptTurn> transcript;
  std::vector<std::string> warnings;

  std::size_t assistant_turns() const {
    std::size_t n = 0;
    for (const auto& t : transcript) n += t.role == Role::kAssistant;
    return n;
  }

  nlohmann::json to_json() const {
    auto turns = nlohmann::json::array();
    for (const auto& t : transcript) {
      nlohmann::json jt = {{"role", to_string(t.role)}, {"text", t.text}, {"images", t.image_refs}};
      if (t.role == Role::kAssistant) jt["elapsed_ms"] = t.elapsed_ms;
      turns.push_back(std::move(jt));
    }
    return {{"question",
             {{"text", question.text},
              {"image", question.image ? nlohmann::json(question.image->ref) : nlohmann::json()}}},
            {"initial_answer", initial_answer ? nlohmann::json(*initial_answer) : nlohmann::json()},
            {"final_answer", final_answer},
            {"turns", std::move(turns)},
            {"warnings", warnings}};
  }
};

namespace detail {

inline std::vector<std::string> refs_of(const std::vector<ImageData>& images) {
  std::vector<std::string> out;
  for (const auto& i : images) out.push_back(i.ref);
  return out;
}

inline void push_user(DialogueState& s, ChatTurn turn) {
  s.transcript.push_back({Role::kUser, turn.text, refs_of(turn.images), 0.0});
  s.history.push_back(std::move(turn));
}

inline std::string ask(DialogueState& s, const MLLMBackend& mllm) {
  auto start = std::chrono::steady_clock::now();
  auto reply = mllm.chat(s.history);
  double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  s.transcript.push_back({Role::kAssistant, reply, {}, ms});
  s.history.push_back({Role::kAssistant, reply, {}});
  return reply;
}

inline std::vector<ImageData> query_images(const VisualQuery& q) {
  if (!q.image) return {};
  return {*q.image};
}

// Images for the passage turn: the rendered raster when present, else one
// image per item that has one.
inline std::vector<ImageData> passage_images(const MultimodalPassage& mp, const ImageLoader& loader,
                                             std::vector<std::string>& warnings) {
  if (mp.raster_png) return {ImageData{"passage.png", *mp.raster_png}};
  std::vector<ImageData> out;
  for (const auto& item : mp.items) {
    if (!item.image_id) continue;
    ImageData img{item.image_ref, {}};
    if (loader) {
      try {
        img.bytes = loader(item.image_ref);
      } catch (const std::exception& e) {
        warnings.push_back("could not load passage image " + item.image_ref + ": " + e.what());
      }
    }
    out.push_back(std::move(img));
  }
  return out;
}

inline std::string passage_block(const MultimodalPassage& mp) {
  // Raster passages carry names and texts inside the picture.
  return mp.raster_png ? std::string() : passage_text(mp);
}

}  // namespace detail

// First chain turn: the bare question, nothing retrieved.
inline std::string initial_answer(DialogueState& state, const MLLMBackend& mllm) {
  state.question.validate();
  detail::push_user(state, {Role::kUser, state.question.text, detail::query_images(state.question)});
  state.initial_answer = detail::ask(state, mllm);
  state.final_answer = *state.initial_answer;
  return *state.initial_answer;
}

// Second chain turn: passage evidence plus the correction prompt, with
// (Q, A_0) already in the history. An empty passage keeps A_0.
inline std::string corrected_answer(DialogueState& state, const MultimodalPassage& mp,
                                    const MLLMBackend& mllm, const ImageLoader& loader = {}) {
  if (!state.initial_answer) throw PreconditionError("corrected_answer needs an initial answer");
  if (mp.empty()) {
    state.warnings.push_back("empty passage; keeping the initial answer");
    spdlog::warn("empty passage for '{}'; keeping the initial answer", state.question.text);
    state.final_answer = *state.initial_answer;
    return state.final_answer;
  }
  ChatTurn turn{Role::kUser, {}, detail::passage_images(mp, loader, state.warnings)};
  auto block = detail::passage_block(mp);
  turn.text = block.empty() ? std::string(kKcAwarePrompt) : block + "\n\n" + std::string(kKcAwarePrompt);
  detail::push_user(state, std::move(turn));
  state.final_answer = detail::ask(state, mllm);
  return state.final_answer;
}

// One turn holding the question and the passage together.
inline DialogueState answer_without_kcc(const VisualQuery& q, const MultimodalPassage& mp,
                                        const MLLMBackend& mllm, const ImageLoader& loader = {},
                                        PromptVariant variant = PromptVariant::kNone) {
  q.validate();
  DialogueState state;
  state.question = q;
  ChatTurn turn{Role::kUser, {}, detail::query_images(q)};
  auto extra = detail::passage_images(mp, loader, state.warnings);
  turn.images.insert(turn.images.end(), extra.begin(), extra.end());
  std::string text;
  if (variant != PromptVariant::kNone) text += std::string(variant_instruction(variant)) + "\n\n";
  if (!mp.empty()) {
    auto block = detail::passage_block(mp);
    if (!block.empty()) text += block + "\n\n";
  }
  text += q.text;
  turn.text = std::move(text);
  detail::push_user(state, std::move(turn));
  state.final_answer = detail::ask(state, mllm);
  return state;
}

struct Backends {
  std::shared_ptr<const DetectorBackend> detector;
  std::shared_ptr<const MLLMBackend> mllm;
  ImageLoader image_loader;
};

struct QueryOutcome {
  AnswerMode mode = AnswerMode::kKuRag;
  DialogueState state;
  RetrievalTrace trace;
  MultimodalPassage passage;
  std::optional<std::string> caption;
  std::optional<std::string> failed_stage;
  ErrorKind error_kind = ErrorKind::kInternal;
  std::string error;

  bool ok() const { return !failed_stage; }

  nlohmann::json to_json() const {
    auto items = nlohmann::json::array();
    for (const auto& i : passage.items) items.push_back(i.to_json());
    nlohmann::json j = {{"mode", to_string(mode)},
                        {"answer", state.final_answer},
                        {"ok", ok()},
                        {"transcript", state.to_json()},
                        {"retrieval", trace.to_json()},
                        {"passage", std::move(items)},
                        {"passage_warnings", passage.warnings}};
    if (caption) j["caption"] = *caption;
    if (failed_stage) {
      j["error"] = {{"stage", *failed_stage}, {"kind", to_string(error_kind)}, {"message", error}};
    }
    return j;
  }
};

// Full pipeline for one question.
//   kurag   select object, match units, rewrite, retrieve, assemble, chain
//   no_kcc  same retrieval, single-turn answer
//   no_ku   caption the image, unscoped text retrieval, chain
// A stage failure stops the run; the outcome names the stage.
inline QueryOutcome answer_query(const VisualQuery& q, const KnowledgeStore& store,
                                 const Backends& backends, const PipelineConfig& pipeline,
                                 const ReasonerConfig& reasoner, AnswerMode mode) {
  QueryOutcome out;
  out.mode = mode;
  out.state.question = q;
  std::string stage = "validate";
  try {
    q.validate();
    if (!backends.mllm) throw ValidationError("no chat backend configured");
    if (!backends.detector) throw ValidationError("no detector backend configured");
    const bool chain = mode != AnswerMode::kNoKcc && reasoner.experimental_prompt == PromptVariant::kNone;

    if (chain) {
      stage = "initial_answer";
      initial_answer(out.state, *backends.mllm);
    }

    std::vector<AlignedEvidence> items;
    {
      auto view = store.read();
      if (mode == AnswerMode::kNoKu) {
        std::string query_text = q.text;
        if (q.image) {
          stage = "caption";
          out.caption = backends.mllm->chat({ChatTurn{Role::kUser, std::string(kCaptionPrompt), {*q.image}}});
          query_text = *out.caption + " " + q.text;
        }
        stage = "retrieve";
        out.trace.text_only = true;
        out.trace.rewritten.raw = q.text;
        out.trace.rewritten.rewritten = query_text;
        out.trace.chunks = retrieve_unscoped(view, query_text, pipeline.chunk_topk);
      } else {
        out.trace = retrieve_evidence(view, q, *backends.detector, pipeline, &stage);
      }
      stage = "assemble";
      items = align_and_fuse(view, out.trace.chunks);
    }
    if (!items.empty()) {
      out.passage = stitch_passage(std::move(items), reasoner.passage_mode, backends.image_loader);
    }

    if (chain) {
      stage = "correct";
      corrected_answer(out.state, out.passage, *backends.mllm, backends.image_loader);
    } else {
      stage = "answer";
      auto variant = mode == AnswerMode::kNoKcc ? PromptVariant::kNone : reasoner.experimental_prompt;
      auto warnings = std::move(out.state.warnings);
      out.state = answer_without_kcc(q, out.passage, *backends.mllm, backends.image_loader, variant);
      out.state.warnings.insert(out.state.warnings.begin(), warnings.begin(), warnings.end());
    }
  } catch (const std::exception& e) {
    out.failed_stage = stage;
    out.error_kind = classify(e);
    out.error = e.what();
    spdlog::error("query failed at stage {}: {}", stage, e.what());
  }
  return out;
}

}  // namespace kurag

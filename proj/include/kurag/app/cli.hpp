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

// Command-line front end. Exit codes: 0 success, 1 internal or backend
// failure (and eval accuracy below the floor), 2 usage or input error.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "kurag/app/engine.hpp"
#include "kurag/app/service.hpp"

namespace kurag::app {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitUsage = 2;

inline int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::kValidation:
    case ErrorKind::kPrecondition:
    case ErrorKind::kNotFound:
    case ErrorKind::kConflict:
    case ErrorKind::kDimension:
    case ErrorKind::kFormat:
      return kExitUsage;
    case ErrorKind::kIntegrity:
    case ErrorKind::kTransport:
    case ErrorKind::kInternal:
      return kExitInternal;
  }
  return kExitInternal;
}

inline std::string ingest_summary_line(const nlohmann::json& result) {
  const auto& s = result.at("store");
  auto vectors = s.at("chunk_vectors").get<std::size_t>() + s.at("image_vectors").get<std::size_t>();
  return std::to_string(s.at("documents").get<std::size_t>()) + " docs, " +
         std::to_string(s.at("chunks").get<std::size_t>()) + " chunks, " +
         std::to_string(s.at("units").get<std::size_t>()) + " KUs, " + std::to_string(vectors) +
         " vectors";
}

namespace detail {

inline void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << text;
}

inline std::string read_input_file(const fs::path& path, const std::string& what) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) throw ValidationError(what + " not found: " + path.string());
  return files::read_all(path);
}

}  // namespace detail

// `out` receives results, `err` receives diagnostics.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"kurag: knowledge-unit retrieval for visual question answering"};
  app.require_subcommand(1);
  std::string config_path = "kurag.json";
  bool verbose = false;
  app.add_option("-c,--config", config_path, "Path to the JSON config file")->capture_default_str();
  app.add_flag("-v,--verbose", verbose, "Log progress to stderr");

  auto* ingest = app.add_subcommand("ingest", "Ingest a JSONL corpus into the store");
  std::string corpus_path;
  ingest->add_option("corpus", corpus_path, "Corpus file, one document per line")->required();

  auto* query = app.add_subcommand("query", "Answer one visual question");
  std::string image_path, question, mode_name = "kurag", transcript_path;
  bool query_json = false;
  query->add_option("--image", image_path, "Query image file");
  query->add_option("--question", question, "Question text")->required();
  query->add_option("--mode", mode_name, "kurag, no_kcc or no_ku")->capture_default_str();
  query->add_option("--transcript", transcript_path, "Write the dialogue transcript JSON here");
  query->add_flag("--json", query_json, "Print the full outcome JSON instead of the answer");

  auto* eval = app.add_subcommand("eval", "Score a JSONL dataset");
  std::string dataset_path, eval_mode = "kurag", report_path, csv_path;
  std::optional<double> floor;
  eval->add_option("dataset", dataset_path, "Dataset file, one item per line")->required();
  eval->add_option("--mode", eval_mode, "kurag, no_kcc or no_ku")->capture_default_str();
  eval->add_option("--out", report_path, "Write the JSON report here");
  eval->add_option("--csv", csv_path, "Write the CSV summary here");
  eval->add_option("--floor", floor, "Fail when accuracy is below this value");

  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  std::optional<std::string> bind;
  std::optional<int> port;
  serve->add_option("--bind", bind, "Bind address (overrides config)");
  serve->add_option("--port", port, "Port (overrides config)");

  auto* ku = app.add_subcommand("ku", "Inspect knowledge units");
  ku->require_subcommand(1);
  auto* ku_show = ku->add_subcommand("show", "Print one knowledge unit");
  std::string ku_id;
  ku_show->add_option("id", ku_id, "Knowledge unit id")->required();

  auto* chunk = app.add_subcommand("chunk", "Manage chunks");
  chunk->require_subcommand(1);
  auto* chunk_delete = chunk->add_subcommand("delete", "Delete a chunk and prune emptied units");
  ChunkId chunk_id = 0;
  chunk_delete->add_option("id", chunk_id, "Chunk id")->required();

  auto* stats = app.add_subcommand("stats", "Print store statistics");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  if (!spdlog::get("kurag")) spdlog::set_default_logger(spdlog::stderr_color_mt("kurag"));
  spdlog::set_level(verbose ? spdlog::level::info : spdlog::level::warn);

  try {
    std::error_code ec;
    if (!fs::is_regular_file(config_path, ec)) throw ValidationError("config not found: " + config_path);
    auto config = AppConfig::load(config_path);
    auto open_engine = [&](Engine::OpenMode m) { return Engine::from_config(config, m); };

    if (*ingest) {
      std::ifstream in(corpus_path);
      if (!in) throw ValidationError("corpus not found: " + corpus_path);
      auto engine = open_engine(Engine::OpenMode::kCreateIfMissing);
      auto result = engine.ingest_jsonl(in, fs::path(corpus_path).parent_path());
      out << ingest_summary_line(result) << "\n";
      return kExitOk;
    }

    if (*query) {
      auto mode = answer_mode_from_string(mode_name);
      VisualQuery q;
      q.text = question;
      if (!image_path.empty()) q.image = ImageData{image_path, detail::read_input_file(image_path, "image")};
      auto engine = open_engine(Engine::OpenMode::kMustExist);
      auto outcome = engine.query(q, mode);
      if (!transcript_path.empty()) detail::write_file(transcript_path, outcome.state.to_json().dump(2) + "\n");
      if (query_json) out << outcome.to_json().dump(2) << "\n";
      if (!outcome.ok()) {
        err << "error: query failed at " << *outcome.failed_stage << ": " << outcome.error << "\n";
        return exit_code(outcome.error_kind);
      }
      if (!query_json) out << outcome.state.final_answer << "\n";
      return kExitOk;
    }

    if (*eval) {
      auto mode = answer_mode_from_string(eval_mode);
      auto items = load_eval_dataset(dataset_path);
      auto engine = open_engine(Engine::OpenMode::kMustExist);
      auto report = engine.eval(items, mode, fs::path(dataset_path).parent_path());
      if (!report_path.empty()) detail::write_file(report_path, report.to_json().dump(2) + "\n");
      if (!csv_path.empty()) detail::write_file(csv_path, report.summary_csv());
      out << report.summary_csv();
      double threshold = floor.value_or(config.eval.accuracy_floor);
      if (report.accuracy < threshold) {
        err << "error: accuracy " << report.accuracy << " is below the floor " << threshold << "\n";
        return kExitInternal;
      }
      return kExitOk;
    }

    if (*serve) {
      auto engine = open_engine(Engine::OpenMode::kCreateIfMissing);
      Service service(engine);
      if (!service.listen(bind.value_or(config.service.bind), port.value_or(config.service.port))) {
        err << "error: cannot listen on " << bind.value_or(config.service.bind) << ":"
            << port.value_or(config.service.port) << "\n";
        return kExitInternal;
      }
      return kExitOk;
    }

    if (*ku_show) {
      out << open_engine(Engine::OpenMode::kMustExist).get_unit(ku_id).dump(2) << "\n";
      return kExitOk;
    }

    if (*chunk_delete) {
      auto engine = open_engine(Engine::OpenMode::kMustExist);
      out << engine.delete_chunk(chunk_id).dump(2) << "\n";
      return kExitOk;
    }

    if (*stats) {
      out << open_engine(Engine::OpenMode::kMustExist).health().dump(2) << "\n";
      return kExitOk;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_code(classify(e));
  }
  return kExitUsage;
}

}  // namespace kurag::app

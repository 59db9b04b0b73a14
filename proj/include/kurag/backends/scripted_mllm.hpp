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

// Rule-driven chat model for hermetic tests and offline demos.
//
// Script file:
//
//   {"rules": [{"when": {"contains": ["..."], "regex": "...", ...},
//               "reply": "..."}],
//    "default": "unknown"}
//
// The first rule whose conditions all hold against the latest user turn
// wins. Conditions:
//   contains          every string occurs in the latest turn's text
//   not_contains      no string occurs in the latest turn's text
//   regex             ECMAScript search over the latest turn's text
//   history_contains  every string occurs in some earlier turn's text
//   image_contains    every string occurs in the bytes of some image
//                     attached to the latest turn
//   assistant_turns   exact number of assistant replies already in history
//
// Reply templates expand $1..$9 (regex captures) and {last_assistant}.

#include <algorithm>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kurag/backends/interfaces.hpp"
#include "kurag/errors.hpp"

namespace kurag {

struct ScriptRule {
  std::vector<std::string> contains;
  std::vector<std::string> not_contains;
  std::optional<std::string> regex;
  std::vector<std::string> history_contains;
  std::vector<std::string> image_contains;
  std::optional<int> assistant_turns;
  std::string reply;
};

struct ChatScript {
  std::vector<ScriptRule> rules;
  std::string default_reply = "unknown";

  static ChatScript from_json(const nlohmann::json& j) {
    static const std::vector<std::string> kKnown = {
        "contains", "not_contains", "regex", "history_contains",
        "image_contains", "assistant_turns"};
    ChatScript s;
    s.default_reply = j.value("default", std::string("unknown"));
    for (const auto& r : j.at("rules")) {
      ScriptRule rule;
      const auto& w = r.value("when", nlohmann::json::object());
      for (const auto& [key, _] : w.items()) {
        if (std::find(kKnown.begin(), kKnown.end(), key) == kKnown.end()) {
          throw ValidationError("unknown script condition '" + key + "'");
        }
      }
      rule.contains = w.value("contains", std::vector<std::string>{});
      rule.not_contains = w.value("not_contains", std::vector<std::string>{});
      if (w.contains("regex")) rule.regex = w["regex"].get<std::string>();
      rule.history_contains = w.value("history_contains", std::vector<std::string>{});
      rule.image_contains = w.value("image_contains", std::vector<std::string>{});
      if (w.contains("assistant_turns")) rule.assistant_turns = w["assistant_turns"].get<int>();
      rule.reply = r.at("reply").get<std::string>();
      s.rules.push_back(std::move(rule));
    }
    return s;
  }
};

class ScriptedMLLM final : public MLLMBackend {
 public:
  explicit ScriptedMLLM(ChatScript script) : script_(std::move(script)) {
    if (script_.rules.empty()) throw ValidationError("chat script has no rules");
    for (const auto& r : script_.rules) {
      compiled_.push_back(r.regex ? std::optional<std::regex>(std::regex(*r.regex))
                                  : std::nullopt);
    }
  }

  std::string chat(const ChatHistory& history) const override {
    if (history.empty()) throw PreconditionError("chat history is empty");
    std::size_t last_user = history.size();
    for (std::size_t i = history.size(); i-- > 0;) {
      if (history[i].role == Role::kUser) {
        last_user = i;
        break;
      }
    }
    if (last_user == history.size()) throw PreconditionError("no user turn in history");
    const ChatTurn& latest = history[last_user];

    int assistant_turns = 0;
    std::string last_assistant;
    for (std::size_t i = 0; i < last_user; ++i) {
      if (history[i].role == Role::kAssistant) {
        ++assistant_turns;
        last_assistant = history[i].text;
      }
    }

    for (std::size_t ri = 0; ri < script_.rules.size(); ++ri) {
      const auto& rule = script_.rules[ri];
      if (rule.assistant_turns && *rule.assistant_turns != assistant_turns) continue;
      if (!all_in(rule.contains, latest.text)) continue;
      bool excluded = false;
      for (const auto& s : rule.not_contains) {
        if (latest.text.find(s) != std::string::npos) excluded = true;
      }
      if (excluded) continue;
      bool history_ok = true;
      for (const auto& s : rule.history_contains) {
        bool found = false;
        for (std::size_t i = 0; i < last_user && !found; ++i) {
          found = history[i].text.find(s) != std::string::npos;
        }
        history_ok = history_ok && found;
      }
      if (!history_ok) continue;
      bool images_ok = true;
      for (const auto& s : rule.image_contains) {
        bool found = false;
        for (const auto& img : latest.images) {
          found = found || img.bytes.find(s) != std::string::npos;
        }
        images_ok = images_ok && found;
      }
      if (!images_ok) continue;
      std::smatch m;
      if (compiled_[ri] && !std::regex_search(latest.text, m, *compiled_[ri])) continue;
      return expand(rule.reply, m, last_assistant);
    }
    return script_.default_reply;
  }

 private:
  static bool all_in(const std::vector<std::string>& needles, const std::string& hay) {
    for (const auto& n : needles) {
      if (hay.find(n) == std::string::npos) return false;
    }
    return true;
  }

  static std::string expand(const std::string& tpl, const std::smatch& m,
                            const std::string& last_assistant) {
    static const std::string kLast = "{last_assistant}";
    std::string out;
    for (std::size_t i = 0; i < tpl.size(); ++i) {
      if (tpl[i] == '$' && i + 1 < tpl.size() && tpl[i + 1] >= '1' && tpl[i + 1] <= '9') {
        auto g = static_cast<std::size_t>(tpl[i + 1] - '0');
        if (g < m.size()) out += m[g].str();
        ++i;
      } else if (tpl.compare(i, kLast.size(), kLast) == 0) {
        out += last_assistant;
        i += kLast.size() - 1;
      } else {
        out += tpl[i];
      }
    }
    return out;
  }

  ChatScript script_;
  std::vector<std::optional<std::regex>> compiled_;
};

}  // namespace kurag

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

// Text primitives shared by the chunker, the query rewriter and the
// answer scorer. All functions are byte-oriented: bytes >= 0x80 are
// treated as word characters so UTF-8 text survives untouched.

#include <algorithm>
#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace kurag::text {

inline bool is_word_byte(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') ||
         (c >= 'A' && c <= 'Z') || c >= 0x80;
}

inline bool is_space_byte(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

inline std::string to_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

inline std::string_view trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && is_space_byte(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && is_space_byte(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

// Whitespace-and-punctuation tokenizer: a token is a maximal run of word
// bytes, or a single punctuation byte.
inline std::vector<std::string_view> tokenize(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    auto c = static_cast<unsigned char>(s[i]);
    if (is_space_byte(c)) {
      ++i;
    } else if (is_word_byte(c)) {
      std::size_t j = i;
      while (j < s.size() && is_word_byte(static_cast<unsigned char>(s[j]))) ++j;
      out.push_back(s.substr(i, j - i));
      i = j;
    } else {
      out.push_back(s.substr(i, 1));
      ++i;
    }
  }
  return out;
}

inline std::size_t count_tokens(std::string_view s) {
  std::size_t n = 0;
  std::size_t i = 0;
  while (i < s.size()) {
    auto c = static_cast<unsigned char>(s[i]);
    if (is_space_byte(c)) {
      ++i;
    } else if (is_word_byte(c)) {
      while (i < s.size() && is_word_byte(static_cast<unsigned char>(s[i]))) ++i;
      ++n;
    } else {
      ++i;
      ++n;
    }
  }
  return n;
}

// Only the word tokens, lowercased.
inline std::vector<std::string> words(std::string_view s) {
  std::vector<std::string> out;
  for (auto tok : tokenize(s)) {
    if (is_word_byte(static_cast<unsigned char>(tok.front()))) {
      out.push_back(to_lower(tok));
    }
  }
  return out;
}

// Splits at '.', '!' or '?' followed by whitespace. The terminator stays
// with its sentence; surrounding whitespace is trimmed. Abbreviations such
// as "Dr. Smith" are split too.
inline std::vector<std::string> split_sentences(std::string_view body) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i < body.size(); ++i) {
    char c = body[i];
    if ((c == '.' || c == '!' || c == '?') && i + 1 < body.size() &&
        is_space_byte(static_cast<unsigned char>(body[i + 1]))) {
      auto s = trim(body.substr(start, i + 1 - start));
      if (!s.empty()) out.emplace_back(s);
      start = i + 1;
    }
  }
  if (start < body.size()) {
    auto s = trim(body.substr(start));
    if (!s.empty()) out.emplace_back(s);
  }
  return out;
}

inline std::string join(const std::vector<std::string>& parts,
                        std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

// English stopwords used to pick content words out of a question.
inline const std::unordered_set<std::string>& stopwords() {
  static const std::unordered_set<std::string> kWords = {
      "a",          "about",     "above",   "after",    "again",
      "against",    "all",       "also",    "am",       "an",
      "and",        "any",       "are",     "as",       "at",
      "be",         "because",   "been",    "before",   "being",
      "below",      "between",   "both",    "but",      "by",
      "can",        "could",     "did",     "do",       "does",
      "doing",      "down",      "during",  "each",     "either",
      "else",       "ever",      "few",     "for",      "from",
      "further",    "had",       "has",     "have",     "having",
      "he",         "her",       "here",    "hers",     "herself",
      "him",        "himself",   "his",     "how",      "i",
      "if",         "in",        "into",    "is",       "it",
      "its",        "itself",    "just",    "let",      "may",
      "me",         "might",     "more",    "most",     "much",
      "must",       "my",        "myself",  "neither",  "no",
      "nor",        "not",       "now",     "of",       "off",
      "on",         "once",      "only",    "or",       "other",
      "ought",      "our",       "ours",    "ourselves","out",
      "over",       "own",       "per",     "please",   "same",
      "shall",      "she",       "should",  "so",       "some",
      "such",       "than",      "that",    "the",      "their",
      "theirs",     "them",      "themselves", "then",  "there",
      "these",      "they",      "this",    "those",    "through",
      "to",         "too",       "under",   "until",    "up",
      "upon",       "us",        "very",    "via",      "was",
      "we",         "were",      "what",    "whatever", "when",
      "whence",     "where",     "whereas", "whether",  "which",
      "while",      "who",       "whoever", "whom",     "whose",
      "why",        "will",      "with",    "within",   "without",
      "would",      "yet",       "you",     "your",     "yours",
      "yourself",   "yourselves","s",       "t",        "d",
      "ll",         "m",         "re",      "ve",       "don",
      "doesn",      "didn",      "isn",     "wasn",     "aren",
      "weren",      "won",       "wouldn",  "shouldn",  "couldn",
      "hasn",       "haven",     "hadn",    "ain",      "whats",
      "image",      "picture",   "photo",   "shown",    "pictured",
  };
  return kWords;
}

// Lowercased non-stopword words, first occurrence order, deduplicated.
inline std::vector<std::string> content_words(std::string_view s) {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  const auto& stop = stopwords();
  for (auto& w : words(s)) {
    if (stop.count(w)) continue;
    if (seen.insert(w).second) out.push_back(std::move(w));
  }
  return out;
}

// Lowercase, drop punctuation, collapse whitespace. Used for name
// comparison and answer scoring.
inline std::string normalize(std::string_view s) {
  return join(words(s), " ");
}

inline std::size_t levenshtein(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

// Edit-distance ratio over normalized names, in [0, 1].
inline double name_similarity(std::string_view a, std::string_view b) {
  auto na = normalize(a);
  auto nb = normalize(b);
  if (na.empty() && nb.empty()) return 1.0;
  auto longest = std::max(na.size(), nb.size());
  return 1.0 - static_cast<double>(levenshtein(na, nb)) /
                   static_cast<double>(longest);
}

// "Karnin Lift Bridge" -> "karnin-lift-bridge".
inline std::string slugify(std::string_view name) {
  auto slug = join(words(name), "-");
  return slug.empty() ? std::string("ku") : slug;
}

// Runs of two or more capitalized words. A leading article is dropped
// before the length check, so "The Tower" yields nothing.
inline std::vector<std::string> capitalized_spans(std::string_view body) {
  static const std::unordered_set<std::string> kArticles = {"the", "a", "an"};
  std::vector<std::string> out;
  std::vector<std::string> run;
  auto flush = [&] {
    if (!run.empty() && kArticles.count(to_lower(run.front()))) {
      run.erase(run.begin());
    }
    if (run.size() >= 2) out.push_back(join(run, " "));
    run.clear();
  };
  for (auto tok : tokenize(body)) {
    auto c = static_cast<unsigned char>(tok.front());
    if (c >= 'A' && c <= 'Z') {
      run.emplace_back(tok);
    } else {
      flush();
    }
  }
  flush();
  std::vector<std::string> dedup;
  std::unordered_set<std::string> seen;
  for (auto& s : out) {
    if (seen.insert(s).second) dedup.push_back(std::move(s));
  }
  return dedup;
}

}  // namespace kurag::text

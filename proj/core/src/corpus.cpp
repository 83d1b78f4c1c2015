// Copyright 2026 The dpaudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dpaudit/corpus.hpp"

#include <algorithm>
#include <cstdint>
#include <unordered_map>
#include <unordered_set>

#include "dpaudit/errors.hpp"
#include "internal.hpp"

namespace dpaudit {
namespace {

using internal::json;

// Code points treated as whitespace when splitting. Fixed table rather than
// locale tables so tokenization is reproducible across platforms.
bool is_space_cp(uint32_t cp) {
  switch (cp) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

// Punctuation stripped from token edges: ASCII punctuation plus the common
// Unicode quotes, dashes, ellipsis and CJK/inverted marks.
bool is_strip_punct_cp(uint32_t cp) {
  if (cp < 0x80) {
    return (cp >= 0x21 && cp <= 0x2F) || (cp >= 0x3A && cp <= 0x40) ||
           (cp >= 0x5B && cp <= 0x60) || (cp >= 0x7B && cp <= 0x7E);
  }
  switch (cp) {
    case 0xA1: case 0xAB: case 0xBB: case 0xBF:
    case 0x2018: case 0x2019: case 0x201A: case 0x201C: case 0x201D:
    case 0x201E: case 0x2026: case 0x2039: case 0x203A:
    case 0x3001: case 0x3002:
    case 0xFF01: case 0xFF0C: case 0xFF0E: case 0xFF1A: case 0xFF1B:
    case 0xFF1F:
      return true;
    default:
      return cp >= 0x2010 && cp <= 0x2015;
  }
}

// Decodes the UTF-8 code point at `i`, advancing `i`. Invalid bytes are
// passed through as single code points above the Unicode range so they are
// never classified as whitespace or punctuation.
uint32_t next_code_point(std::string_view s, size_t& i) {
  const auto byte = [&](size_t k) { return static_cast<uint8_t>(s[k]); };
  uint8_t b0 = byte(i);
  if (b0 < 0x80) {
    ++i;
    return b0;
  }
  size_t len = 0;
  uint32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    ++i;
    return 0x110000u + b0;
  }
  if (i + len > s.size()) {
    ++i;
    return 0x110000u + b0;
  }
  for (size_t k = 1; k < len; ++k) {
    uint8_t bk = byte(i + k);
    if ((bk & 0xC0) != 0x80) {
      ++i;
      return 0x110000u + b0;
    }
    cp = (cp << 6) | (bk & 0x3F);
  }
  i += len;
  return cp;
}

struct CodePoint {
  uint32_t cp;
  size_t offset;
  size_t length;
};

std::vector<CodePoint> decode(std::string_view s) {
  std::vector<CodePoint> out;
  size_t i = 0;
  while (i < s.size()) {
    size_t start = i;
    uint32_t cp = next_code_point(s, i);
    out.push_back({cp, start, i - start});
  }
  return out;
}

std::string normalize_token(std::string_view raw) {
  std::vector<CodePoint> cps = decode(raw);
  size_t lo = 0;
  size_t hi = cps.size();
  while (lo < hi && is_strip_punct_cp(cps[lo].cp)) ++lo;
  while (hi > lo && is_strip_punct_cp(cps[hi - 1].cp)) --hi;
  if (lo >= hi) return {};
  size_t begin = cps[lo].offset;
  size_t end = cps[hi - 1].offset + cps[hi - 1].length;
  std::string token(raw.substr(begin, end - begin));
  for (char& c : token) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return token;
}

bool is_blank(std::string_view text) {
  size_t i = 0;
  while (i < text.size()) {
    if (!is_space_cp(next_code_point(text, i))) return false;
  }
  return true;
}

Record parse_record(const json& j, size_t line_no) {
  const auto line_error = [line_no](const std::string& what) {
    throw ValidationError(what + " (line " + std::to_string(line_no) + ")");
  };
  if (!j.is_object()) line_error("expected a JSON object");
  if (!j.contains("id") || !j["id"].is_string()) {
    line_error("missing or non-string 'id'");
  }
  if (!j.contains("text") || !j["text"].is_string()) {
    line_error("missing or non-string 'text'");
  }
  Record r;
  r.id = j["id"].get<std::string>();
  r.text = j["text"].get<std::string>();
  if (r.id.empty()) line_error("empty 'id'");
  if (is_blank(r.text)) line_error("blank 'text' for id '" + r.id + "'");
  if (j.contains("labels")) {
    if (!j["labels"].is_array()) line_error("'labels' must be an array");
    for (const auto& l : j["labels"]) {
      if (!l.is_string()) line_error("'labels' entries must be strings");
      r.labels.insert(l.get<std::string>());
    }
  }
  if (j.contains("meta")) {
    if (!j["meta"].is_object()) line_error("'meta' must be an object");
    for (const auto& [k, v] : j["meta"].items()) {
      if (!v.is_string()) line_error("'meta' values must be strings");
      r.meta[k] = v.get<std::string>();
    }
  }
  return r;
}

}  // namespace

const Record* Corpus::find(std::string_view id) const {
  for (const Record& r : records) {
    if (r.id == id) return &r;
  }
  return nullptr;
}

TokenSeq tokenize(std::string_view text) {
  TokenSeq tokens;
  size_t i = 0;
  size_t token_start = 0;
  bool in_token = false;
  while (i < text.size()) {
    size_t start = i;
    uint32_t cp = next_code_point(text, i);
    if (is_space_cp(cp)) {
      if (in_token) {
        std::string tok = normalize_token(text.substr(token_start, start - token_start));
        if (!tok.empty()) tokens.push_back(std::move(tok));
        in_token = false;
      }
    } else if (!in_token) {
      in_token = true;
      token_start = start;
    }
  }
  if (in_token) {
    std::string tok = normalize_token(text.substr(token_start));
    if (!tok.empty()) tokens.push_back(std::move(tok));
  }
  return tokens;
}

void validate_corpus(const Corpus& corpus) {
  std::unordered_set<std::string> seen;
  for (const Record& r : corpus.records) {
    if (r.id.empty()) throw ValidationError("record with empty id");
    if (!seen.insert(r.id).second) {
      throw ValidationError("duplicate id '" + r.id + "'");
    }
    if (is_blank(r.text)) {
      throw ValidationError("blank text for id '" + r.id + "'");
    }
  }
}

Corpus load_corpus(const std::string& path) {
  Corpus corpus;
  corpus.name = internal::file_stem(path);
  std::unordered_map<std::string, size_t> first_line;
  internal::for_each_jsonl_line(path, [&](size_t line_no, const json& j) {
    Record r = parse_record(j, line_no);
    auto [it, inserted] = first_line.emplace(r.id, line_no);
    if (!inserted) {
      throw ValidationError("duplicate id '" + r.id + "' at line " +
                            std::to_string(line_no) + " (first seen line " +
                            std::to_string(it->second) + ")");
    }
    corpus.records.push_back(std::move(r));
  });
  return corpus;
}

void save_corpus(const Corpus& corpus, const std::string& path) {
  std::string out;
  for (const Record& r : corpus.records) {
    json j;
    j["id"] = r.id;
    if (!r.labels.empty()) j["labels"] = r.labels;
    if (!r.meta.empty()) j["meta"] = r.meta;
    j["text"] = r.text;
    out += j.dump();
    out += '\n';
  }
  internal::write_text_file(path, out);
}

}  // namespace dpaudit

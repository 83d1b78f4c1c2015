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

#ifndef DPAUDIT_CORPUS_HPP_
#define DPAUDIT_CORPUS_HPP_

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace dpaudit {

// One identified text sample. Immutable after load; shared freely across
// threads.
struct Record {
  std::string id;
  std::string text;
  std::set<std::string> labels;
  std::map<std::string, std::string> meta;

  friend bool operator==(const Record&, const Record&) = default;
};

struct Corpus {
  std::string name;
  std::vector<Record> records;

  size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }

  // nullptr when absent.
  const Record* find(std::string_view id) const;
  bool contains(std::string_view id) const { return find(id) != nullptr; }

  friend bool operator==(const Corpus&, const Corpus&) = default;
};

using TokenSeq = std::vector<std::string>;

// Reads one JSON object per line: {"id": str, "text": str,
// "labels": [str], "meta": {str: str}}; labels/meta optional. The corpus
// name is the file stem. Malformed lines and duplicate ids report the
// offending line number.
Corpus load_corpus(const std::string& path);

// Inverse of load_corpus: one compact JSON object per line, UTF-8, keys in
// fixed (alphabetical) order so identical corpora serialize byte-identically.
void save_corpus(const Corpus& corpus, const std::string& path);

// Checks id uniqueness/non-emptiness and non-blank text; used by load_corpus
// and by callers constructing corpora in memory.
void validate_corpus(const Corpus& corpus);

// Lowercases (ASCII), splits on Unicode whitespace, strips leading/trailing
// punctuation per token, drops empty tokens. Deterministic and idempotent on
// its own output joined by single spaces.
TokenSeq tokenize(std::string_view text);

}  // namespace dpaudit

#endif  // DPAUDIT_CORPUS_HPP_

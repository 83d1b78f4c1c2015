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

#include <fstream>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "dpaudit/errors.hpp"
#include "dpaudit/rng.hpp"
#include "testutil.hpp"

namespace dpaudit {
namespace {

using ::testing::ElementsAre;
using ::testing::HasSubstr;
using testutil::TempDir;

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  out << contents;
}

TEST(LoadCorpusTest, PreservesOrderAndCount) {
  TempDir dir;
  write_file(dir.str("c.jsonl"),
             R"({"id": "a", "text": "first line"})"
             "\n"
             R"({"id": "b", "text": "second line", "labels": ["x"]})"
             "\n"
             R"({"id": "c", "text": "third", "meta": {"k": "v"}})"
             "\n");
  Corpus c = load_corpus(dir.str("c.jsonl"));
  ASSERT_EQ(c.size(), 3u);
  EXPECT_EQ(c.records[0].id, "a");
  EXPECT_EQ(c.records[1].id, "b");
  EXPECT_EQ(c.records[2].id, "c");
  EXPECT_THAT(c.records[1].labels, ElementsAre("x"));
  EXPECT_EQ(c.records[2].meta.at("k"), "v");
  EXPECT_EQ(c.name, "c");
}

TEST(LoadCorpusTest, DuplicateIdNamesLine) {
  TempDir dir;
  write_file(dir.str("dup.jsonl"),
             R"({"id": "r1", "text": "one"})"
             "\n"
             R"({"id": "r2", "text": "two"})"
             "\n"
             R"({"id": "r1", "text": "again"})"
             "\n");
  try {
    load_corpus(dir.str("dup.jsonl"));
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_THAT(e.what(), HasSubstr("r1"));
    EXPECT_THAT(e.what(), HasSubstr("line 3"));
  }
}

TEST(LoadCorpusTest, MalformedLineNamesLine) {
  TempDir dir;
  write_file(dir.str("bad.jsonl"),
             R"({"id": "r1", "text": "ok"})"
             "\n{not json\n");
  try {
    load_corpus(dir.str("bad.jsonl"));
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_THAT(e.what(), HasSubstr("line 2"));
  }
}

TEST(LoadCorpusTest, EmptyFileIsEmptyCorpus) {
  TempDir dir;
  write_file(dir.str("empty.jsonl"), "");
  Corpus c = load_corpus(dir.str("empty.jsonl"));
  EXPECT_TRUE(c.empty());
}

TEST(LoadCorpusTest, MissingFileIsIoError) {
  EXPECT_THROW(load_corpus("/nonexistent/nope.jsonl"), IoError);
}

TEST(SaveCorpusTest, RoundTripIsIdentity) {
  Corpus c;
  c.name = "rt";
  c.records.push_back({"a", "Some text here.", {"l1", "l2"}, {{"k", "v"}}});
  c.records.push_back({"b", "naïve 测试 ünïcode", {}, {}});
  c.records.push_back({"c", "trailing  spaces  kept ", {}, {}});
  TempDir dir;
  save_corpus(c, dir.str("rt.jsonl"));
  Corpus back = load_corpus(dir.str("rt.jsonl"));
  ASSERT_EQ(back.size(), c.size());
  for (size_t i = 0; i < c.size(); ++i) {
    EXPECT_EQ(back.records[i], c.records[i]) << "record " << i;
  }
}

TEST(SaveCorpusTest, UnwritablePathIsIoError) {
  Corpus c;
  c.records.push_back({"a", "text", {}, {}});
  EXPECT_THROW(save_corpus(c, "/nonexistent/dir/out.jsonl"), IoError);
}

TEST(SaveCorpusTest, SerializationIsStable) {
  Corpus c = testutil::make_english_fixture(20, 7);
  TempDir dir;
  save_corpus(c, dir.str("a.jsonl"));
  save_corpus(c, dir.str("b.jsonl"));
  std::ifstream fa(dir.str("a.jsonl"));
  std::ifstream fb(dir.str("b.jsonl"));
  std::string sa((std::istreambuf_iterator<char>(fa)),
                 std::istreambuf_iterator<char>());
  std::string sb((std::istreambuf_iterator<char>(fb)),
                 std::istreambuf_iterator<char>());
  EXPECT_EQ(sa, sb);
  EXPECT_FALSE(sa.empty());
}

TEST(TokenizeTest, BasicPunctuationAndCase) {
  EXPECT_THAT(tokenize("The cat, sat."), ElementsAre("the", "cat", "sat"));
}

TEST(TokenizeTest, EmptyInput) { EXPECT_TRUE(tokenize("").empty()); }

TEST(TokenizeTest, WhitespaceAndCaseNormalization) {
  EXPECT_THAT(tokenize("A  a\tA"), ElementsAre("a", "a", "a"));
}

TEST(TokenizeTest, InteriorPunctuationKept) {
  EXPECT_THAT(tokenize("don't stop-me (now)"),
              ElementsAre("don't", "stop-me", "now"));
}

TEST(TokenizeTest, PurePunctuationTokensDropped) {
  EXPECT_THAT(tokenize("a ... b !!!"), ElementsAre("a", "b"));
}

TEST(TokenizeTest, UnicodeWhitespaceAndQuotes) {
  // U+00A0 no-break space, U+201C/U+201D curly quotes.
  EXPECT_THAT(tokenize("one two “three”"),
              ElementsAre("one", "two", "three"));
}

TEST(TokenizeTest, NonAsciiPassesThrough) {
  EXPECT_THAT(tokenize("naïve 测试"), ElementsAre("naïve", "测试"));
}

TEST(TokenizeTest, IdempotentOnOwnOutput) {
  Rng rng(99);
  Corpus fixture = testutil::make_english_fixture(50, 3);
  for (const Record& r : fixture.records) {
    TokenSeq once = tokenize(r.text);
    std::string joined;
    for (const std::string& t : once) {
      if (!joined.empty()) joined += ' ';
      joined += t;
    }
    EXPECT_EQ(tokenize(joined), once) << r.text;
  }
  // Some hand-picked shapes with mixed punctuation.
  for (std::string s : {"Hello, WORLD!", "a--b", "x... y?! z", "“quoted”",
                        "comma,separated,values", "UPPER lower MiXeD"}) {
    TokenSeq once = tokenize(s);
    std::string joined;
    for (const std::string& t : once) {
      if (!joined.empty()) joined += ' ';
      joined += t;
    }
    EXPECT_EQ(tokenize(joined), once) << s;
  }
}

TEST(TokenizeTest, CaseInsensitive) {
  EXPECT_EQ(tokenize("Word"), tokenize("WORD"));
  EXPECT_EQ(tokenize("Word"), tokenize("word"));
  EXPECT_EQ(tokenize("The Cat SAT"), tokenize("the cat sat"));
}

TEST(ValidateCorpusTest, RejectsBlankText) {
  Corpus c;
  c.records.push_back({"a", "   ", {}, {}});
  EXPECT_THROW(validate_corpus(c), ValidationError);
}

TEST(LoadCorpusTest, RejectsBlankTextNamingLine) {
  TempDir dir;
  write_file(dir.str("blank.jsonl"), R"({"id": "a", "text": " \t "})"
                                     "\n");
  try {
    load_corpus(dir.str("blank.jsonl"));
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_THAT(e.what(), HasSubstr("line 1"));
  }
}

}  // namespace
}  // namespace dpaudit

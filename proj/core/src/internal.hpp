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

#ifndef DPAUDIT_SRC_INTERNAL_HPP_
#define DPAUDIT_SRC_INTERNAL_HPP_

#include <charconv>
#include <fstream>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "dpaudit/errors.hpp"
#include "json.hpp"

namespace dpaudit::internal {

using nlohmann::json;

// Calls fn(line_number, parsed_json) for every line; line numbers are
// 1-based. Throws IoError if the file cannot be opened and ValidationError
// naming the line on malformed JSON.
void for_each_jsonl_line(const std::string& path,
                         const std::function<void(size_t, const json&)>& fn);

std::ofstream open_for_write(const std::string& path);

void write_text_file(const std::string& path, const std::string& contents);

std::string file_stem(const std::string& path);

// Shortest round-trip decimal representation; deterministic across runs.
std::string format_double(double v);

// Runs fn(i) for i in [0, n) across hardware threads; fn must only write to
// per-index slots. Falls back to a serial loop for small n.
void parallel_for(size_t n, const std::function<void(size_t)>& fn);

}  // namespace dpaudit::internal

#endif  // DPAUDIT_SRC_INTERNAL_HPP_

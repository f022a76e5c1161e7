/*
 * Copyright 2026 The CLTR Robustness Toolkit Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef CLTR_TEXT_HPP_
#define CLTR_TEXT_HPP_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cltr {

// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

std::vector<std::string_view> split(std::string_view text, char separator);

std::string_view trim(std::string_view text);

std::optional<double> parse_double(std::string_view text);
std::optional<long long> parse_int(std::string_view text);

// Reads a whole file; throws cltr::Error if it cannot be opened.
std::string read_file(const std::string& path);

// Writes `contents` unless the file already holds exactly those bytes.
// Returns true when the file was (re)written.
bool write_file_if_changed(const std::string& path, std::string_view contents);

}  // namespace cltr

#endif  // CLTR_TEXT_HPP_

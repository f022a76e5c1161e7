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

#include <charconv>
#include <sstream>
#include <unordered_map>

#include "cltr/click_sim.hpp"
#include "cltr/error.hpp"
#include "cltr/text.hpp"

namespace cltr {

std::string click_log_to_text(const ClickLog& log) {
  const SimParams& p = log.sim_params;
  std::string out = "# cltr-clicklog v1\n";
  out += "# model=" + to_string(p.model) + "\n";
  out += "# epsilon=" + format_double(p.epsilon) + "\n";
  out += "# eta=" + format_double(p.eta) + "\n";
  out += "# beta=" + format_double(p.beta) + "\n";
  out += "# g=" + format_double(p.g) + "\n";
  out += "# w=" + format_double(p.w) + "\n";
  out += "# viewport_size=" + std::to_string(p.viewport_size) + "\n";
  out += "# sessions_per_query=" + std::to_string(log.sessions_per_query) + "\n";
  out += "# seed=" + std::to_string(log.seed) + "\n";
  out += "query_id,ranking,clicks\n";
  for (const Session& session : log.sessions) {
    const std::string& id = log.query_id(session);
    if (id.find_first_of(",|\n") != std::string::npos) {
      throw ArgumentError("query id '" + id + "' cannot be written to a click log");
    }
    out += id;
    out += ',';
    for (int i = 0; i < session.length; ++i) {
      if (i > 0) out += '|';
      out += std::to_string(session.ordering[static_cast<std::size_t>(i)]);
    }
    out += ',';
    for (int i = 0; i < session.length; ++i) {
      if (i > 0) out += '|';
      out += session.clicks[static_cast<std::size_t>(i)] ? '1' : '0';
    }
    out += '\n';
  }
  return out;
}

ClickLog click_log_from_text(const std::string& text) {
  ClickLog log;
  std::unordered_map<std::string, std::uint32_t> query_index;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_number = 0;
  bool seen_magic = false;
  bool seen_columns = false;

  const auto header_value = [&](std::string_view key, std::string_view value) {
    const auto number = parse_double(value);
    if (key == "model") {
      log.sim_params.model = click_model_from_string(value);
      return;
    }
    if (!number) throw ParseError("bad header value for " + std::string(key), line_number);
    if (key == "epsilon") log.sim_params.epsilon = *number;
    else if (key == "eta") log.sim_params.eta = *number;
    else if (key == "beta") log.sim_params.beta = *number;
    else if (key == "g") log.sim_params.g = *number;
    else if (key == "w") log.sim_params.w = *number;
    else if (key == "viewport_size") log.sim_params.viewport_size = static_cast<int>(*number);
    else if (key == "sessions_per_query") log.sessions_per_query = static_cast<int>(*number);
    else if (key == "seed") {
      const auto* end = value.data() + value.size();
      const auto result = std::from_chars(value.data(), end, log.seed);
      if (result.ec != std::errc() || result.ptr != end) {
        throw ParseError("bad seed", line_number);
      }
    } else {
      throw ParseError("unknown header key " + std::string(key), line_number);
    }
  };

  while (std::getline(in, raw)) {
    ++line_number;
    const std::string_view line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '#') {
      const std::string_view body = trim(line.substr(1));
      if (!seen_magic) {
        if (body != "cltr-clicklog v1") throw ParseError("not a cltr click log", line_number);
        seen_magic = true;
        continue;
      }
      const auto eq = body.find('=');
      if (eq == std::string_view::npos) throw ParseError("malformed header", line_number);
      header_value(body.substr(0, eq), body.substr(eq + 1));
      continue;
    }
    if (!seen_magic) throw ParseError("not a cltr click log", line_number);
    if (!seen_columns) {
      if (line != "query_id,ranking,clicks") {
        throw ParseError("expected column header query_id,ranking,clicks", line_number);
      }
      seen_columns = true;
      continue;
    }
    const auto fields = split(line, ',');
    if (fields.size() != 3) throw ParseError("expected 3 fields", line_number);
    const auto docs = split(fields[1], '|');
    const auto bits = split(fields[2], '|');
    if (docs.size() != bits.size() || docs.empty() ||
        docs.size() > static_cast<std::size_t>(kDisplayCutoff)) {
      throw ParseError("ranking and clicks lengths differ or exceed 10", line_number);
    }
    Session session;
    const std::string id(fields[0]);
    auto [it, inserted] =
        query_index.emplace(id, static_cast<std::uint32_t>(log.query_ids.size()));
    if (inserted) log.query_ids.push_back(id);
    session.query = it->second;
    session.length = static_cast<std::uint8_t>(docs.size());
    for (std::size_t i = 0; i < docs.size(); ++i) {
      const auto doc = parse_int(docs[i]);
      if (!doc || *doc < 0) throw ParseError("bad doc index", line_number);
      if (bits[i] != "0" && bits[i] != "1") throw ParseError("click bits must be 0/1", line_number);
      session.ordering[i] = static_cast<std::int32_t>(*doc);
      session.clicks[i] = bits[i] == "1" ? 1 : 0;
    }
    log.sessions.push_back(session);
  }
  if (!seen_magic || !seen_columns) throw ParseError("truncated click log", line_number);
  return log;
}

}  // namespace cltr

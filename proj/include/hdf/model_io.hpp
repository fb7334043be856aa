/*
 * Copyright 2026 The HDF Authors. All Rights Reserved.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <charconv>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "hdf/binary_io.hpp"
#include "hdf/classifier.hpp"
#include "hdf/error.hpp"

namespace hdf {

namespace detail {

inline void append_double(std::string& out, double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

inline double parse_double(std::string_view token, std::string_view what) {
  double v = 0.0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
    throw FormatError(FormatErrc::shape_mismatch, "model file: bad number '" + std::string(token) + "' in " +
                                                      std::string(what));
  }
  return v;
}

inline long parse_int(std::string_view token, std::string_view what) {
  long v = 0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
    throw FormatError(FormatErrc::shape_mismatch, "model file: bad integer '" + std::string(token) + "' in " +
                                                      std::string(what));
  }
  return v;
}

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

}  // namespace detail

/// Text model format:
///   HDFM 1
///   classes K
///   dim D
///   C <int>
///   class <id> <bias> <D weights>     (K lines)
/// Numbers use the shortest representation that round-trips exactly.
inline std::string encode_model(const LinearModel& model) {
  std::string out = "HDFM 1\nclasses " + std::to_string(model.classes) + "\ndim " + std::to_string(model.dim) +
                    "\nC " + std::to_string(model.best_c) + "\n";
  for (std::size_t k = 0; k < model.classes; ++k) {
    const auto row = static_cast<Eigen::Index>(k);
    out += "class " + std::to_string(k) + " ";
    detail::append_double(out, model.bias[row]);
    for (std::size_t j = 0; j < model.dim; ++j) {
      out += ' ';
      detail::append_double(out, model.weights(row, static_cast<Eigen::Index>(j)));
    }
    out += '\n';
  }
  return out;
}

inline LinearModel decode_model(std::string_view text) {
  std::vector<std::string_view> lines;
  for (std::size_t pos = 0; pos < text.size();) {
    const std::size_t nl = text.find('\n', pos);
    const std::size_t end = nl == std::string_view::npos ? text.size() : nl;
    lines.push_back(text.substr(pos, end - pos));
    pos = end + 1;
  }
  auto header = [&](std::size_t i, std::string_view key) -> std::string_view {
    if (i >= lines.size()) throw FormatError(FormatErrc::truncated, "model file ends before '" + std::string(key) + "'");
    const auto tokens = detail::split_ws(lines[i]);
    if (tokens.size() != 2 || tokens[0] != key) {
      throw FormatError(FormatErrc::shape_mismatch, "model file: expected '" + std::string(key) + " <value>' on line " +
                                                        std::to_string(i + 1));
    }
    return tokens[1];
  };

  if (lines.empty() || detail::split_ws(lines[0]).empty() || detail::split_ws(lines[0])[0] != "HDFM") {
    throw FormatError(FormatErrc::bad_magic, "model file does not start with HDFM");
  }
  if (header(0, "HDFM") != "1") throw FormatError(FormatErrc::unsupported_version, "model file version");

  LinearModel model;
  const long classes = detail::parse_int(header(1, "classes"), "classes");
  const long dim = detail::parse_int(header(2, "dim"), "dim");
  const long c = detail::parse_int(header(3, "C"), "C");
  if (classes < 2 || dim < 1 || c < 1) throw FormatError(FormatErrc::shape_mismatch, "model file: invalid header values");
  model.classes = static_cast<std::size_t>(classes);
  model.dim = static_cast<std::size_t>(dim);
  model.best_c = static_cast<int>(c);
  model.weights.resize(classes, dim);
  model.bias.resize(classes);
  for (long k = 0; k < classes; ++k) {
    const std::size_t line = 4 + static_cast<std::size_t>(k);
    if (line >= lines.size() || lines[line].empty()) {
      throw FormatError(FormatErrc::truncated, "model file has " + std::to_string(k) + " of " +
                                                   std::to_string(classes) + " class lines");
    }
    const auto tokens = detail::split_ws(lines[line]);
    if (tokens.size() < 3 || tokens[0] != "class" || detail::parse_int(tokens[1], "class id") != k) {
      throw FormatError(FormatErrc::shape_mismatch, "model file: malformed line for class " + std::to_string(k));
    }
    if (tokens.size() != static_cast<std::size_t>(dim) + 3) {
      throw FormatError(FormatErrc::dim_mismatch, "model file: class " + std::to_string(k) + " has " +
                                                      std::to_string(tokens.size() - 3) + " weights, expected " +
                                                      std::to_string(dim));
    }
    model.bias[k] = detail::parse_double(tokens[2], "bias");
    for (long j = 0; j < dim; ++j) {
      model.weights(k, j) = detail::parse_double(tokens[3 + static_cast<std::size_t>(j)], "weights");
    }
  }
  for (std::size_t i = 4 + static_cast<std::size_t>(classes); i < lines.size(); ++i) {
    if (!detail::split_ws(lines[i]).empty()) {
      throw FormatError(FormatErrc::trailing_data, "model file has content after the last class line");
    }
  }
  return model;
}

inline void save_model(const LinearModel& model, const std::string& path) { io::write_file(path, encode_model(model)); }

inline LinearModel load_model(const std::string& path) { return decode_model(io::read_file(path)); }

}  // namespace hdf

/* Copyright 2026 The Semcomp Authors.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "semcomp/affinity.hpp"
#include "semcomp/embedding.hpp"
#include "semcomp/error.hpp"
#include "semcomp/huffman.hpp"
#include "semcomp/pipelines.hpp"

namespace semcomp::io {

namespace fs = std::filesystem;

inline constexpr char kEmbeddingMagic[4] = {'S', 'E', 'M', 'B'};
inline constexpr std::uint32_t kEmbeddingVersion = 1;
inline constexpr std::uint64_t kEmbeddingHeaderBytes = 24;
// Refuse files whose header claims more floats than this before allocating.
inline constexpr std::uint64_t kDefaultMaxValues = std::uint64_t{1} << 32;

inline std::vector<std::uint8_t> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path.string());
  std::vector<std::uint8_t> out((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) fail(ErrorKind::kIo, "read failed for " + path.string());
  return out;
}

inline std::string read_text(const fs::path& path) {
  const auto bytes = read_bytes(path);
  return std::string(bytes.begin(), bytes.end());
}

inline void write_bytes(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorKind::kIo, "write failed for " + path.string());
}

inline void write_text(const fs::path& path, const std::string& text) {
  write_bytes(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

namespace detail {

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

inline void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

inline std::uint32_t get_u32(const std::vector<std::uint8_t>& in, std::size_t at) {
  std::uint32_t v = 0;
  for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(in[at + b]) << (8 * b);
  return v;
}

inline std::uint64_t get_u64(const std::vector<std::uint8_t>& in, std::size_t at) {
  std::uint64_t v = 0;
  for (int b = 0; b < 8; ++b) v |= static_cast<std::uint64_t>(in[at + b]) << (8 * b);
  return v;
}

[[noreturn]] inline void format_error(const fs::path& path, std::uint64_t offset, const std::string& what) {
  fail(ErrorKind::kFormat, path.string() + " at byte " + std::to_string(offset) + ": " + what);
}

}  // namespace detail

/// Decoded embedding file: the matrix and, when present, one label per row.
struct EmbeddingFile {
  EmbeddingMatrix matrix;
  std::optional<std::vector<ClassId>> labels;
};

/// Layout: "SEMB", u32 version, u64 N, u64 p, N*p f32 row-major, then an
/// optional u64 count (== N) followed by N u32 labels. All little-endian.
inline std::vector<std::uint8_t> serialize_embedding_file(const EmbeddingMatrix& matrix,
                                                          const std::vector<ClassId>* labels) {
  if (matrix.rows() == 0) fail(ErrorKind::kInvalidInput, "refusing to write an empty embedding file");
  if (labels != nullptr && labels->size() != matrix.rows()) {
    fail(ErrorKind::kInvalidInput, "label count does not match row count");
  }
  std::vector<std::uint8_t> out(kEmbeddingMagic, kEmbeddingMagic + 4);
  out.reserve(kEmbeddingHeaderBytes + 4 * matrix.values().size() + (labels ? 8 + 4 * labels->size() : 0));
  detail::put_u32(out, kEmbeddingVersion);
  detail::put_u64(out, matrix.rows());
  detail::put_u64(out, matrix.dim());
  for (float v : matrix.values()) detail::put_u32(out, std::bit_cast<std::uint32_t>(v));
  if (labels != nullptr) {
    detail::put_u64(out, labels->size());
    for (ClassId l : *labels) detail::put_u32(out, l);
  }
  return out;
}

inline void write_embedding_file(const fs::path& path, const EmbeddingMatrix& matrix,
                                 const std::vector<ClassId>* labels = nullptr) {
  write_bytes(path, serialize_embedding_file(matrix, labels));
}

inline void write_embedding_file(const fs::path& path, const LabeledEmbeddings& data) {
  write_embedding_file(path, data.embeddings(), &data.labels());
}

inline EmbeddingFile parse_embedding_file(const std::vector<std::uint8_t>& bytes, const fs::path& origin,
                                          std::uint64_t max_values = kDefaultMaxValues) {
  if (bytes.size() < kEmbeddingHeaderBytes) detail::format_error(origin, bytes.size(), "truncated header");
  if (!std::equal(kEmbeddingMagic, kEmbeddingMagic + 4, bytes.begin())) {
    detail::format_error(origin, 0, "bad magic, expected SEMB");
  }
  const std::uint32_t version = detail::get_u32(bytes, 4);
  if (version != kEmbeddingVersion) {
    detail::format_error(origin, 4, "unsupported version " + std::to_string(version));
  }
  const std::uint64_t n = detail::get_u64(bytes, 8);
  const std::uint64_t p = detail::get_u64(bytes, 16);
  if (n == 0) detail::format_error(origin, 8, "row count is zero");
  if (p == 0) detail::format_error(origin, 16, "dimension is zero");
  if (n > max_values / p) {
    detail::format_error(origin, 8, "header claims " + std::to_string(n) + "x" + std::to_string(p) +
                                        " values, above the limit of " + std::to_string(max_values));
  }
  const std::uint64_t payload_end = kEmbeddingHeaderBytes + 4 * n * p;
  const std::uint64_t with_labels = payload_end + 8 + 4 * n;
  if (bytes.size() != payload_end && bytes.size() != with_labels) {
    const std::uint64_t at = std::min<std::uint64_t>(bytes.size(), payload_end);
    detail::format_error(origin, at, "file is " + std::to_string(bytes.size()) + " bytes, expected " +
                                         std::to_string(payload_end) + " or " + std::to_string(with_labels));
  }
  std::vector<float> values(n * p);
  for (std::uint64_t i = 0; i < n * p; ++i) {
    const std::size_t at = kEmbeddingHeaderBytes + 4 * i;
    values[i] = std::bit_cast<float>(detail::get_u32(bytes, at));
    if (!std::isfinite(values[i])) detail::format_error(origin, at, "non-finite component");
  }
  EmbeddingFile out{EmbeddingMatrix(std::move(values), p), std::nullopt};
  if (bytes.size() == with_labels) {
    const std::uint64_t count = detail::get_u64(bytes, payload_end);
    if (count != n) {
      detail::format_error(origin, payload_end, "label block holds " + std::to_string(count) +
                                                    " labels for " + std::to_string(n) + " rows");
    }
    std::vector<ClassId> labels(n);
    for (std::uint64_t i = 0; i < n; ++i) labels[i] = detail::get_u32(bytes, payload_end + 8 + 4 * i);
    out.labels = std::move(labels);
  }
  return out;
}

inline EmbeddingFile read_embedding_file(const fs::path& path, std::uint64_t max_values = kDefaultMaxValues) {
  // Size check against the header happens before the payload is read.
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path.string());
  std::vector<std::uint8_t> header(kEmbeddingHeaderBytes);
  in.read(reinterpret_cast<char*>(header.data()), static_cast<std::streamsize>(header.size()));
  header.resize(static_cast<std::size_t>(in.gcount()));
  if (header.size() == kEmbeddingHeaderBytes) {
    const std::uint64_t n = detail::get_u64(header, 8);
    const std::uint64_t p = detail::get_u64(header, 16);
    if (p != 0 && n > max_values / p) {
      detail::format_error(path, 8, "header claims " + std::to_string(n) + "x" + std::to_string(p) +
                                        " values, above the limit of " + std::to_string(max_values));
    }
  }
  return parse_embedding_file(read_bytes(path), path, max_values);
}

inline EmbeddingMemory read_memory(const fs::path& path, std::uint64_t max_values = kDefaultMaxValues) {
  return read_embedding_file(path, max_values).matrix;
}

inline LabeledEmbeddings read_labeled(const fs::path& path, std::uint64_t max_values = kDefaultMaxValues) {
  EmbeddingFile file = read_embedding_file(path, max_values);
  if (!file.labels) fail(ErrorKind::kFormat, path.string() + " has no label block");
  return LabeledEmbeddings(std::move(file.matrix), std::move(*file.labels));
}

/// One JSON object per line with "text" and "label". Class ids are the
/// positions of the distinct label strings in ascending byte order.
struct Dataset {
  std::vector<std::string> texts;
  std::vector<std::string> label_names;
  std::vector<std::string> classes;
  std::vector<ClassId> labels;

  std::size_t size() const noexcept { return texts.size(); }
};

inline Dataset parse_dataset(const std::string& content, const std::string& origin) {
  Dataset out;
  std::istringstream lines(content);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    auto where = [&] { return origin + ":" + std::to_string(line_no) + ": "; };
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::kFormat, where() + e.what());
    }
    if (!record.is_object() || !record.contains("text") || !record["text"].is_string() ||
        !record.contains("label")) {
      fail(ErrorKind::kFormat, where() + "record needs a string \"text\" and a \"label\"");
    }
    const auto& label = record["label"];
    std::string name;
    if (label.is_string()) {
      name = label.get<std::string>();
    } else if (label.is_number_integer()) {
      name = label.dump();
    } else {
      fail(ErrorKind::kFormat, where() + "label must be a string or an integer");
    }
    out.texts.push_back(record["text"].get<std::string>());
    out.label_names.push_back(std::move(name));
  }
  if (out.texts.empty()) fail(ErrorKind::kFormat, origin + ": no records");
  std::set<std::string> distinct(out.label_names.begin(), out.label_names.end());
  out.classes.assign(distinct.begin(), distinct.end());
  out.labels.reserve(out.size());
  for (const auto& name : out.label_names) {
    out.labels.push_back(static_cast<ClassId>(
        std::lower_bound(out.classes.begin(), out.classes.end(), name) - out.classes.begin()));
  }
  return out;
}

inline Dataset read_dataset(const fs::path& path) { return parse_dataset(read_text(path), path.string()); }

inline void write_dataset(const fs::path& path, const std::vector<std::string>& texts,
                          const std::vector<std::string>& label_names) {
  std::string out;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    out += nlohmann::json{{"text", texts[i]}, {"label", label_names[i]}}.dump() + "\n";
  }
  write_text(path, out);
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline nlohmann::json cluster_model_to_json(const ap::ClusterModel& model) {
  return nlohmann::json{{"format", "semcomp-cluster-model"},
                        {"version", 1},
                        {"points", model.point_count()},
                        {"clusters", model.cluster_count()},
                        {"exemplars", model.exemplars},
                        {"labels", model.labels},
                        {"sizes", model.sizes},
                        {"iterations", model.iterations},
                        {"converged", model.converged},
                        {"digest", hex64(model.digest())}};
}

inline ap::ClusterModel cluster_model_from_json(const nlohmann::json& j, const std::string& origin) {
  ap::ClusterModel model;
  try {
    if (j.at("format").get<std::string>() != "semcomp-cluster-model" || j.at("version").get<int>() != 1) {
      fail(ErrorKind::kFormat, origin + ": not a version-1 cluster model");
    }
    model.exemplars = j.at("exemplars").get<std::vector<std::size_t>>();
    model.labels = j.at("labels").get<std::vector<std::uint32_t>>();
    model.sizes = j.at("sizes").get<std::vector<std::uint64_t>>();
    model.iterations = j.at("iterations").get<std::uint32_t>();
    model.converged = j.at("converged").get<bool>();
    const std::size_t points = j.at("points").get<std::size_t>();
    if (points != model.labels.size()) fail(ErrorKind::kFormat, origin + ": point count mismatch");
    const std::string digest = j.at("digest").get<std::string>();
    if (model.exemplars.empty() || !std::is_sorted(model.exemplars.begin(), model.exemplars.end()) ||
        model.sizes.size() != model.exemplars.size()) {
      fail(ErrorKind::kFormat, origin + ": malformed exemplar list");
    }
    std::vector<std::uint64_t> sizes(model.exemplars.size(), 0);
    for (std::uint32_t l : model.labels) {
      if (l >= sizes.size()) fail(ErrorKind::kFormat, origin + ": label out of range");
      ++sizes[l];
    }
    for (std::size_t e = 0; e < model.exemplars.size(); ++e) {
      if (model.exemplars[e] >= points || model.labels[model.exemplars[e]] != e) {
        fail(ErrorKind::kFormat, origin + ": exemplar does not label itself");
      }
    }
    if (sizes != model.sizes) fail(ErrorKind::kFormat, origin + ": sizes disagree with labels");
    if (digest != hex64(model.digest())) fail(ErrorKind::kFormat, origin + ": digest mismatch");
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kFormat, origin + ": " + e.what());
  }
  return model;
}

inline void write_cluster_model(const fs::path& path, const ap::ClusterModel& model) {
  write_text(path, cluster_model_to_json(model).dump(1) + "\n");
}

inline ap::ClusterModel read_cluster_model(const fs::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text(path));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kFormat, path.string() + ": " + e.what());
  }
  return cluster_model_from_json(j, path.string());
}

inline void write_bitstream(const fs::path& path, const huffman::BitStream& stream) {
  write_bytes(path, stream.serialize());
}

inline huffman::BitStream read_bitstream(const fs::path& path) {
  return huffman::BitStream::deserialize(read_bytes(path));
}

inline std::string format_fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

inline const std::string kReportHeader =
    "approach,name,block_size,memory_size,n_clusters,n_messages,total_bits,bits_per_message,"
    "correct,accuracy,baseline_bits,compression_ratio";

inline std::string report_csv_row(const pipeline::PipelineReport& r) {
  std::string row = r.id() + "," + r.display_name() + "," + std::to_string(r.block_size) + "," +
                    std::to_string(r.memory_size) + "," +
                    (r.n_clusters ? std::to_string(*r.n_clusters) : std::string()) + "," +
                    std::to_string(r.n_messages) + "," + std::to_string(r.total_bits) + "," +
                    format_fixed(static_cast<double>(r.total_bits) / static_cast<double>(r.n_messages), 4) +
                    "," + std::to_string(r.correct) + "," + format_fixed(r.accuracy, 6) + ",";
  if (r.baseline_bits && r.total_bits > 0) {
    row += std::to_string(*r.baseline_bits) + "," +
           format_fixed(static_cast<double>(*r.baseline_bits) / static_cast<double>(r.total_bits), 4);
  } else {
    row += ",";
  }
  return row;
}

inline std::string reports_csv(const std::vector<pipeline::PipelineReport>& reports) {
  std::string out = kReportHeader + "\n";
  for (const auto& r : reports) out += report_csv_row(r) + "\n";
  return out;
}

/// Long-format per-message table: approach,message,bits,predicted,truth.
inline std::string messages_csv(const std::vector<pipeline::PipelineReport>& reports,
                                const std::vector<ClassId>& truth) {
  std::string out = "approach,message,bits,predicted,truth\n";
  for (const auto& r : reports) {
    for (std::size_t i = 0; i < r.message_bits.size(); ++i) {
      out += r.id() + "," + std::to_string(i) + "," + std::to_string(r.message_bits[i]) + "," +
             std::to_string(r.predictions[i]) + "," + std::to_string(truth.at(i)) + "\n";
    }
  }
  return out;
}

struct ReportRow {
  std::string approach;
  std::string name;
  std::uint64_t total_bits = 0;
  std::size_t n_messages = 0;
  double accuracy = 0.0;
  std::string compression_ratio;
};

inline std::string markdown_table(const std::vector<ReportRow>& rows) {
  std::string out = "| Approach | Number of Bits | Accuracy % |\n|---|---:|---:|\n";
  for (const auto& r : rows) {
    out += "| " + r.name + " | " + std::to_string(r.total_bits) + " | " + format_fixed(100.0 * r.accuracy, 2) +
           " |\n";
  }
  return out;
}

inline std::vector<ReportRow> to_rows(const std::vector<pipeline::PipelineReport>& reports) {
  std::vector<ReportRow> rows;
  for (const auto& r : reports) {
    rows.push_back({r.id(), r.display_name(), r.total_bits, r.n_messages, r.accuracy,
                    r.baseline_bits && r.total_bits > 0
                        ? format_fixed(static_cast<double>(*r.baseline_bits) / static_cast<double>(r.total_bits), 4)
                        : std::string()});
  }
  return rows;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

/// Parses reports.csv and cross-checks every total against messages.csv.
inline std::vector<ReportRow> read_and_verify_reports(const fs::path& reports_path, const fs::path& messages_path) {
  std::istringstream reports(read_text(reports_path));
  std::string line;
  if (!std::getline(reports, line) || line != kReportHeader) {
    fail(ErrorKind::kFormat, reports_path.string() + ": unexpected header");
  }
  std::vector<ReportRow> rows;
  std::size_t line_no = 1;
  while (std::getline(reports, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 12) fail(ErrorKind::kFormat, reports_path.string() + ":" + std::to_string(line_no) + ": bad field count");
    try {
      rows.push_back({f[0], f[1], std::stoull(f[6]), std::stoull(f[5]), std::stod(f[9]), f[11]});
    } catch (const std::exception&) {
      fail(ErrorKind::kFormat, reports_path.string() + ":" + std::to_string(line_no) + ": bad number");
    }
  }

  std::map<std::string, std::pair<std::uint64_t, std::size_t>> sums;
  std::istringstream messages(read_text(messages_path));
  if (!std::getline(messages, line) || line != "approach,message,bits,predicted,truth") {
    fail(ErrorKind::kFormat, messages_path.string() + ": unexpected header");
  }
  line_no = 1;
  while (std::getline(messages, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 5) fail(ErrorKind::kFormat, messages_path.string() + ":" + std::to_string(line_no) + ": bad field count");
    try {
      auto& [bits, count] = sums[f[0]];
      bits += std::stoull(f[2]);
      ++count;
    } catch (const std::exception&) {
      fail(ErrorKind::kFormat, messages_path.string() + ":" + std::to_string(line_no) + ": bad number");
    }
  }
  for (const auto& row : rows) {
    const auto it = sums.find(row.approach);
    if (it == sums.end() || it->second.first != row.total_bits || it->second.second != row.n_messages) {
      fail(ErrorKind::kInternalConsistency, "total bits for " + row.approach + " disagree with per-message bits");
    }
  }
  return rows;
}

}  // namespace semcomp::io

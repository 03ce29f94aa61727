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
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "semcomp/affinity.hpp"
#include "semcomp/error.hpp"
#include "semcomp/io.hpp"
#include "semcomp/knn.hpp"
#include "semcomp/pipelines.hpp"
#include "semcomp/random.hpp"
#include "semcomp/service.hpp"

namespace semcomp::bench {

namespace fs = std::filesystem;

struct BenchConfig {
  fs::path dataset;
  fs::path memory;
  fs::path train;
  std::optional<fs::path> test;  // embeddings of the dataset records, row i <-> record i
  std::size_t memory_size = 0;   // 0 keeps every memory row
  std::size_t k_knn = knn::kDefaultNeighbors;
  std::vector<std::size_t> block_sizes{1, 2, 3};
  ap::APConfig ap;
  fs::path output_dir = "bench-out";
  std::optional<std::string> service_url;
  std::size_t service_batch_size = 64;
  std::size_t max_test_samples = 2000;
  std::uint64_t sample_seed = 0;
  std::uint64_t max_values = io::kDefaultMaxValues;

  void validate() const {
    if (k_knn == 0) fail(ErrorKind::kInvalidInput, "k_knn must be positive");
    if (max_test_samples == 0) fail(ErrorKind::kInvalidInput, "max_test_samples must be positive");
    for (auto k : block_sizes) {
      if (k == 0) fail(ErrorKind::kInvalidInput, "block sizes must be positive");
    }
    ap.validate();
  }
};

/// Reads a JSON config. Relative paths resolve against the config's directory.
inline BenchConfig parse_bench_config(const nlohmann::json& j, const fs::path& base_dir) {
  BenchConfig c;
  auto path_at = [&](const char* key) { return base_dir / j.at(key).get<std::string>(); };
  try {
    c.dataset = path_at("dataset");
    c.memory = path_at("memory");
    c.train = path_at("train");
    if (j.contains("test") && !j["test"].is_null()) c.test = path_at("test");
    c.memory_size = j.value("memory_size", c.memory_size);
    c.k_knn = j.value("k_knn", c.k_knn);
    c.block_sizes = j.value("block_sizes", c.block_sizes);
    if (j.contains("output_dir")) c.output_dir = path_at("output_dir");
    if (j.contains("service_url") && !j["service_url"].is_null()) c.service_url = j["service_url"].get<std::string>();
    c.service_batch_size = j.value("service_batch_size", c.service_batch_size);
    c.max_test_samples = j.value("max_test_samples", c.max_test_samples);
    c.sample_seed = j.value("sample_seed", c.sample_seed);
    c.max_values = j.value("max_values", c.max_values);
    if (j.contains("ap")) {
      const auto& a = j["ap"];
      c.ap.damping = a.value("damping", c.ap.damping);
      c.ap.max_iterations = a.value("max_iterations", c.ap.max_iterations);
      c.ap.convergence_window = a.value("convergence_window", c.ap.convergence_window);
      c.ap.jitter_seed = a.value("jitter_seed", c.ap.jitter_seed);
      c.ap.jitter_scale = a.value("jitter_scale", c.ap.jitter_scale);
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kFormat, std::string("bench config: ") + e.what());
  }
  return c;
}

inline BenchConfig read_bench_config(const fs::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(io::read_text(path));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kFormat, path.string() + ": " + e.what());
  }
  return parse_bench_config(j, path.parent_path());
}

/// At most `cap` indices, split as evenly across classes as class sizes
/// allow, drawn by a seeded shuffle. Returned in ascending order. When the
/// set already fits under the cap, every index is kept.
inline std::vector<std::size_t> balanced_sample(const std::vector<ClassId>& labels, std::size_t cap,
                                                std::uint64_t seed) {
  std::vector<std::size_t> out;
  if (labels.size() <= cap) {
    out.resize(labels.size());
    std::iota(out.begin(), out.end(), std::size_t{0});
    return out;
  }
  const ClassId classes = *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<std::vector<std::size_t>> members(classes);
  for (std::size_t i = 0; i < labels.size(); ++i) members[labels[i]].push_back(i);

  std::vector<ClassId> by_size;
  for (ClassId c = 0; c < classes; ++c) {
    if (!members[c].empty()) by_size.push_back(c);
  }
  std::stable_sort(by_size.begin(), by_size.end(),
                   [&](ClassId a, ClassId b) { return members[a].size() < members[b].size(); });
  std::vector<std::size_t> quota(classes, 0);
  std::size_t remaining = cap;
  for (std::size_t j = 0; j < by_size.size(); ++j) {
    const std::size_t share = remaining / (by_size.size() - j);
    quota[by_size[j]] = std::min(members[by_size[j]].size(), share);
    remaining -= quota[by_size[j]];
  }

  rng::Engine engine(seed);
  for (ClassId c = 0; c < classes; ++c) {
    auto pool = members[c];
    rng::shuffle(pool.begin(), pool.end(), engine);
    out.insert(out.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(quota[c]));
  }
  std::sort(out.begin(), out.end());
  return out;
}

struct BenchResult {
  std::vector<pipeline::PipelineReport> reports;
  std::vector<std::size_t> sample;
  ap::ClusterModel cluster_model;
  std::vector<fs::path> written;
};

namespace detail {

template <typename Fn>
auto tagged(const std::string& approach, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.kind(), "[" + approach + "] " + e.what());
  }
}

}  // namespace detail

/// Loads every input, runs the conventional baseline for each block size and
/// both semantic pipelines, and writes reports plus payloads to output_dir.
inline BenchResult run_bench(const BenchConfig& config) {
  config.validate();
  const io::Dataset dataset = io::read_dataset(config.dataset);

  EmbeddingMemory memory = io::read_memory(config.memory, config.max_values);
  if (config.memory_size > 0) {
    if (config.memory_size > memory.rows()) {
      fail(ErrorKind::kInvalidInput, "memory_size " + std::to_string(config.memory_size) + " exceeds the " +
                                         std::to_string(memory.rows()) + " stored rows");
    }
    memory = memory.prefix(config.memory_size);
  }
  LabeledEmbeddings train = io::read_labeled(config.train, config.max_values);

  EmbeddingMatrix test_embeddings;
  if (config.test) {
    io::EmbeddingFile file = io::read_embedding_file(*config.test, config.max_values);
    if (file.labels && *file.labels != dataset.labels) {
      fail(ErrorKind::kInvalidInput, "labels in " + config.test->string() + " disagree with the dataset");
    }
    test_embeddings = std::move(file.matrix);
  } else if (auto url = service::resolve_url(config.service_url)) {
    service::FetchOptions options;
    options.batch_size = config.service_batch_size;
    test_embeddings = service::to_matrix(service::fetch_embeddings(dataset.texts, *url, options));
  } else {
    fail(ErrorKind::kInvalidInput, "no test embeddings: give a test file or an embedding service URL");
  }
  if (test_embeddings.rows() != dataset.size()) {
    fail(ErrorKind::kInvalidInput, std::to_string(test_embeddings.rows()) + " test embeddings for " +
                                       std::to_string(dataset.size()) + " dataset records");
  }

  BenchResult result;
  result.sample = balanced_sample(dataset.labels, config.max_test_samples, config.sample_seed);
  pipeline::Corpus corpus;
  corpus.embeddings = EmbeddingMatrix(test_embeddings.dim());
  for (std::size_t i : result.sample) {
    corpus.texts.push_back(dataset.texts[i]);
    corpus.labels.push_back(dataset.labels[i]);
    corpus.embeddings.append(test_embeddings.row(i));
  }
  const knn::KnnModel classifier(std::move(train), config.k_knn);

  std::vector<std::size_t> blocks = config.block_sizes;
  blocks.push_back(1);
  std::sort(blocks.begin(), blocks.end());
  blocks.erase(std::unique(blocks.begin(), blocks.end()), blocks.end());

  std::vector<pipeline::PipelineResult> runs;
  for (std::size_t k : blocks) {
    runs.push_back(detail::tagged("conventional-k" + std::to_string(k),
                                  [&] { return pipeline::run_conventional(corpus, k, classifier); }));
  }
  runs.push_back(detail::tagged("quantization", [&] { return pipeline::run_quantization(corpus, memory, classifier); }));
  // Encoder and decoder cluster independently; run_compression checks they agree.
  const ap::ClusterModel encoder_model = detail::tagged("compression", [&] { return ap::run(memory, config.ap); });
  const ap::ClusterModel decoder_model = detail::tagged("compression", [&] { return ap::run(memory, config.ap); });
  runs.push_back(detail::tagged("compression", [&] {
    return pipeline::run_compression(corpus, memory, classifier, encoder_model, decoder_model);
  }));
  result.cluster_model = decoder_model;

  const std::uint64_t baseline = runs.front().report.total_bits;
  for (auto& run : runs) {
    run.report.baseline_bits = baseline;
    result.reports.push_back(run.report);
  }

  fs::create_directories(config.output_dir);
  auto emit = [&](const std::string& name, const std::string& text) {
    const fs::path p = config.output_dir / name;
    io::write_text(p, text);
    result.written.push_back(p);
  };
  emit("reports.csv", io::reports_csv(result.reports));
  emit("messages.csv", io::messages_csv(result.reports, corpus.labels));
  emit("reports.md", io::markdown_table(io::to_rows(result.reports)));
  std::string sample_lines;
  for (std::size_t i : result.sample) sample_lines += std::to_string(i) + "\n";
  emit("sample.txt", sample_lines);
  emit("cluster_model.json", io::cluster_model_to_json(result.cluster_model).dump(1) + "\n");
  for (const auto& run : runs) {
    const fs::path p = config.output_dir / (run.report.id() + ".bits");
    io::write_bitstream(p, run.payload);
    result.written.push_back(p);
  }
  return result;
}

}  // namespace semcomp::bench

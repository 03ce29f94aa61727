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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "semcomp/affinity.hpp"
#include "semcomp/embedding.hpp"
#include "semcomp/error.hpp"
#include "semcomp/huffman.hpp"
#include "semcomp/knn.hpp"
#include "semcomp/semantic.hpp"

namespace semcomp::pipeline {

/// Messages to transmit, their ground-truth classes and true embeddings.
struct Corpus {
  std::vector<std::string> texts;
  std::vector<ClassId> labels;
  EmbeddingMatrix embeddings;

  std::size_t size() const noexcept { return texts.size(); }

  void validate() const {
    if (texts.size() != labels.size() || texts.size() != embeddings.rows()) {
      fail(ErrorKind::kInvalidInput, "corpus has " + std::to_string(texts.size()) + " texts, " +
                                         std::to_string(labels.size()) + " labels and " +
                                         std::to_string(embeddings.rows()) + " embeddings");
    }
    if (texts.empty()) fail(ErrorKind::kInvalidInput, "corpus is empty");
  }
};

enum class Approach { kConventional, kQuantization, kCompression };

struct PipelineReport {
  Approach approach = Approach::kConventional;
  std::size_t block_size = 0;   // conventional only
  std::size_t memory_size = 0;  // semantic approaches only
  std::optional<std::size_t> n_clusters;
  std::uint64_t total_bits = 0;
  std::size_t correct = 0;
  std::size_t n_messages = 0;
  double accuracy = 0.0;
  std::optional<std::uint64_t> baseline_bits;
  std::vector<std::uint64_t> message_bits;
  std::vector<ClassId> predictions;

  /// Stable machine id, e.g. "conventional-k2", "quantization", "compression".
  std::string id() const {
    switch (approach) {
      case Approach::kConventional: return "conventional-k" + std::to_string(block_size);
      case Approach::kQuantization: return "quantization";
      case Approach::kCompression: return "compression";
    }
    return "unknown";
  }

  /// Row title in the results table.
  std::string display_name() const {
    switch (approach) {
      case Approach::kConventional:
        return block_size == 1 ? "Conventional" : "Conventional - Size " + std::to_string(block_size);
      case Approach::kQuantization: return "Semantic Quantization";
      case Approach::kCompression:
        return "Semantic Compression - " + std::to_string(n_clusters.value_or(0));
    }
    return "unknown";
  }

  friend bool operator==(const PipelineReport&, const PipelineReport&) = default;
};

/// A report plus the concatenated payload of every message, in corpus order.
struct PipelineResult {
  PipelineReport report;
  huffman::BitStream payload;
};

inline double accuracy(const std::vector<ClassId>& predictions, const std::vector<ClassId>& truth) {
  if (predictions.size() != truth.size()) {
    fail(ErrorKind::kInvalidInput, "prediction and truth lengths differ");
  }
  if (predictions.empty()) fail(ErrorKind::kInvalidInput, "accuracy of an empty set");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) correct += predictions[i] == truth[i] ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(truth.size());
}

/// Baseline bits over approach bits for the same corpus.
inline double compression_ratio(const PipelineReport& report, const PipelineReport& baseline) {
  if (report.n_messages != baseline.n_messages) {
    fail(ErrorKind::kInvalidInput, "reports cover different corpora");
  }
  if (report.total_bits == 0 || baseline.total_bits == 0) {
    fail(ErrorKind::kInvalidInput, "compression ratio with zero bits");
  }
  return static_cast<double>(baseline.total_bits) / static_cast<double>(report.total_bits);
}

namespace detail {

inline void finish(PipelineReport& report, const Corpus& corpus) {
  report.n_messages = corpus.size();
  report.correct = 0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    report.correct += report.predictions[i] == corpus.labels[i] ? 1 : 0;
  }
  report.accuracy = accuracy(report.predictions, corpus.labels);
  report.total_bits = 0;
  for (auto b : report.message_bits) report.total_bits += b;
}

inline void require_dims(const Corpus& corpus, const EmbeddingMemory& memory, const knn::KnnModel& classifier) {
  corpus.validate();
  if (memory.rows() == 0) fail(ErrorKind::kInvalidState, "embedding memory is empty");
  if (memory.dim() != corpus.embeddings.dim() || classifier.train().dim() != corpus.embeddings.dim()) {
    fail(ErrorKind::kInvalidInput, "memory, train and corpus embedding dimensions differ");
  }
}

}  // namespace detail

/// Character-block Huffman over the exact text, classified with the true
/// embedding after lossless reconstruction. The code is built from the
/// whole corpus's block counts and is not charged to the payload.
inline PipelineResult run_conventional(const Corpus& corpus, std::size_t block_size,
                                       const knn::KnnModel& classifier) {
  corpus.validate();
  if (block_size == 0) fail(ErrorKind::kInvalidInput, "block size must be at least 1");

  std::vector<huffman::BlockSymbols> messages;
  messages.reserve(corpus.size());
  std::vector<std::u32string> stream;
  for (const auto& text : corpus.texts) {
    messages.push_back(huffman::block_symbolize(std::string_view(text), block_size));
    stream.insert(stream.end(), messages.back().blocks.begin(), messages.back().blocks.end());
  }
  const auto table = huffman::count_frequencies(stream);
  const auto encoder_code = huffman::build_code(table);

  PipelineResult result;
  result.report.approach = Approach::kConventional;
  result.report.block_size = block_size;
  for (const auto& m : messages) {
    const std::uint64_t before = result.payload.bit_length();
    huffman::encode_into(std::span<const std::u32string>(m.blocks), encoder_code, result.payload);
    result.report.message_bits.push_back(result.payload.bit_length() - before);
  }

  const auto decoder_code = huffman::build_code(table);
  huffman::BitReader reader(result.payload);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto blocks = huffman::decode_from(reader, decoder_code, messages[i].blocks.size());
    if (huffman::unblock(blocks, messages[i].char_count) != corpus.texts[i]) {
      fail(ErrorKind::kInternalConsistency, "message " + std::to_string(i) + " did not reconstruct exactly");
    }
    result.report.predictions.push_back(knn::predict(corpus.embeddings.row(i), classifier));
  }
  detail::finish(result.report, corpus);
  return result;
}

/// Huffman code over memory indices with self-assignment counts as weights.
inline huffman::HuffmanCode<std::uint32_t> index_code(const EmbeddingMemory& memory) {
  std::map<std::uint32_t, std::uint64_t> counts;
  for (const auto& [index, count] : self_assignment_counts(memory)) {
    counts.emplace(static_cast<std::uint32_t>(index), count);
  }
  return huffman::build_code(huffman::FrequencyTable<std::uint32_t>(counts));
}

/// Huffman code over cluster labels weighted by cluster sizes.
inline huffman::HuffmanCode<std::uint32_t> label_code(const ap::ClusterModel& model) {
  std::map<std::uint32_t, std::uint64_t> counts;
  for (std::size_t j = 0; j < model.sizes.size(); ++j) {
    counts.emplace(static_cast<std::uint32_t>(j), model.sizes[j]);
  }
  return huffman::build_code(huffman::FrequencyTable<std::uint32_t>(counts));
}

/// Nearest-memory-index coding; the decoder classifies the memory row.
inline PipelineResult run_quantization(const Corpus& corpus, const EmbeddingMemory& memory,
                                       const knn::KnnModel& classifier) {
  detail::require_dims(corpus, memory, classifier);
  if (memory.rows() > UINT32_MAX) fail(ErrorKind::kInvalidInput, "memory too large for 32-bit indices");

  PipelineResult result;
  result.report.approach = Approach::kQuantization;
  result.report.memory_size = memory.rows();

  const auto encoder_code = index_code(memory);
  std::vector<std::uint32_t> sent;
  sent.reserve(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto index = static_cast<std::uint32_t>(quantize_index(corpus.embeddings.row(i), memory));
    sent.push_back(index);
    const std::uint64_t before = result.payload.bit_length();
    encoder_code.write(index, result.payload);
    result.report.message_bits.push_back(result.payload.bit_length() - before);
  }

  const auto decoder_code = index_code(memory);
  huffman::BitReader reader(result.payload);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const std::uint32_t index = decoder_code.read(reader);
    if (index != sent[i]) {
      fail(ErrorKind::kInternalConsistency, "decoded index differs for message " + std::to_string(i));
    }
    result.report.predictions.push_back(knn::predict(memory.row(index), classifier));
  }
  detail::finish(result.report, corpus);
  return result;
}

/// Cluster-label coding with separately built encoder and decoder models;
/// the two must describe the same clustering.
inline PipelineResult run_compression(const Corpus& corpus, const EmbeddingMemory& memory,
                                      const knn::KnnModel& classifier,
                                      const ap::ClusterModel& encoder_model,
                                      const ap::ClusterModel& decoder_model) {
  detail::require_dims(corpus, memory, classifier);
  if (encoder_model.digest() != decoder_model.digest() || !encoder_model.same_clustering(decoder_model)) {
    fail(ErrorKind::kDesync, "encoder and decoder cluster models differ");
  }
  if (decoder_model.point_count() != memory.rows()) {
    fail(ErrorKind::kDesync, "cluster model does not cover the memory");
  }

  PipelineResult result;
  result.report.approach = Approach::kCompression;
  result.report.memory_size = memory.rows();
  result.report.n_clusters = encoder_model.cluster_count();

  const auto encoder_code = label_code(encoder_model);
  std::vector<std::uint32_t> sent;
  sent.reserve(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const std::uint32_t label = ap::assign_to_exemplar(corpus.embeddings.row(i), encoder_model, memory);
    sent.push_back(label);
    const std::uint64_t before = result.payload.bit_length();
    encoder_code.write(label, result.payload);
    result.report.message_bits.push_back(result.payload.bit_length() - before);
  }

  const auto decoder_code = label_code(decoder_model);
  huffman::BitReader reader(result.payload);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const std::uint32_t label = decoder_code.read(reader);
    if (label != sent[i]) {
      fail(ErrorKind::kInternalConsistency, "decoded label differs for message " + std::to_string(i));
    }
    const EmbeddingView exemplar = memory.row(decoder_model.exemplars[label]);
    result.report.predictions.push_back(knn::predict(exemplar, classifier));
  }
  detail::finish(result.report, corpus);
  return result;
}

/// Clusters the memory once per side, then runs the label pipeline.
inline PipelineResult run_compression(const Corpus& corpus, const EmbeddingMemory& memory,
                                      const knn::KnnModel& classifier, const ap::APConfig& config) {
  detail::require_dims(corpus, memory, classifier);
  const ap::ClusterModel encoder_model = ap::run(memory, config);
  const ap::ClusterModel decoder_model = ap::run(memory, config);
  return run_compression(corpus, memory, classifier, encoder_model, decoder_model);
}

/// Both semantic pipelines on the first N memory rows, for each requested N.
inline std::vector<PipelineReport> sweep_memory_size(const Corpus& corpus, const EmbeddingMemory& full_memory,
                                                     const knn::KnnModel& classifier,
                                                     const std::vector<std::size_t>& memory_sizes,
                                                     const ap::APConfig& config) {
  std::vector<PipelineReport> out;
  for (std::size_t n : memory_sizes) {
    const EmbeddingMemory memory = full_memory.prefix(n);
    out.push_back(run_quantization(corpus, memory, classifier).report);
    out.push_back(run_compression(corpus, memory, classifier, config).report);
  }
  return out;
}

}  // namespace semcomp::pipeline

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

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "semcomp/error.hpp"

namespace semcomp {

using EmbeddingView = std::span<const float>;
using ClassId = std::uint32_t;

namespace detail {

inline void require_finite(std::span<const float> values, const char* what) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      fail(ErrorKind::kInvalidInput,
           std::string(what) + " has a non-finite component at offset " +
               std::to_string(i));
    }
  }
}

}  // namespace detail

/// One text's position in embedding space. Components are always finite.
class Embedding {
 public:
  Embedding() = default;
  explicit Embedding(std::vector<float> components)
      : components_(std::move(components)) {
    detail::require_finite(components_, "embedding");
  }
  Embedding(std::initializer_list<float> components)
      : Embedding(std::vector<float>(components)) {}

  std::size_t dim() const noexcept { return components_.size(); }
  EmbeddingView view() const noexcept { return components_; }
  operator EmbeddingView() const noexcept { return components_; }
  const std::vector<float>& components() const noexcept { return components_; }

  friend bool operator==(const Embedding&, const Embedding&) = default;

 private:
  std::vector<float> components_;
};

/// Row-major N x p block of float32 embeddings. Serves both as the shared
/// memory (codebook) and as the storage behind labeled training sets.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;

  explicit EmbeddingMatrix(std::size_t dim) : dim_(dim) {
    if (dim == 0) fail(ErrorKind::kInvalidInput, "embedding dimension must be positive");
  }

  EmbeddingMatrix(std::vector<float> values, std::size_t dim)
      : values_(std::move(values)), dim_(dim) {
    if (dim_ == 0) fail(ErrorKind::kInvalidInput, "embedding dimension must be positive");
    if (values_.size() % dim_ != 0) {
      fail(ErrorKind::kInvalidInput,
           "flat buffer of " + std::to_string(values_.size()) +
               " floats is not a multiple of dimension " + std::to_string(dim_));
    }
    detail::require_finite(values_, "embedding matrix");
  }

  static EmbeddingMatrix from_rows(const std::vector<std::vector<float>>& rows) {
    if (rows.empty()) fail(ErrorKind::kInvalidInput, "no rows given");
    EmbeddingMatrix out(rows.front().size());
    for (const auto& r : rows) out.append(r);
    return out;
  }

  void append(EmbeddingView row) {
    if (dim_ == 0) {
      if (row.empty()) fail(ErrorKind::kInvalidInput, "embedding dimension must be positive");
      dim_ = row.size();
    }
    if (row.size() != dim_) {
      fail(ErrorKind::kInvalidInput,
           "row of dimension " + std::to_string(row.size()) +
               " does not match matrix dimension " + std::to_string(dim_));
    }
    detail::require_finite(row, "embedding row");
    values_.insert(values_.end(), row.begin(), row.end());
  }

  std::size_t rows() const noexcept { return dim_ == 0 ? 0 : values_.size() / dim_; }
  std::size_t dim() const noexcept { return dim_; }
  bool empty() const noexcept { return values_.empty(); }

  EmbeddingView row(std::size_t i) const noexcept {
    return EmbeddingView(values_.data() + i * dim_, dim_);
  }

  std::span<const float> values() const noexcept { return values_; }

  /// First `n` rows, in stored order.
  EmbeddingMatrix prefix(std::size_t n) const {
    if (n > rows()) {
      fail(ErrorKind::kInvalidInput, "prefix of " + std::to_string(n) +
                                         " rows requested from " +
                                         std::to_string(rows()));
    }
    EmbeddingMatrix out(dim_);
    out.values_.assign(values_.begin(), values_.begin() + static_cast<std::ptrdiff_t>(n * dim_));
    return out;
  }

  friend bool operator==(const EmbeddingMatrix&, const EmbeddingMatrix&) = default;

 private:
  std::vector<float> values_;
  std::size_t dim_ = 0;
};

using EmbeddingMemory = EmbeddingMatrix;

/// Decoder-side training set: embeddings with dense class ids 0..C-1.
class LabeledEmbeddings {
 public:
  LabeledEmbeddings() = default;

  LabeledEmbeddings(EmbeddingMatrix embeddings, std::vector<ClassId> labels,
                    std::uint32_t class_count)
      : embeddings_(std::move(embeddings)),
        labels_(std::move(labels)),
        class_count_(class_count) {
    if (embeddings_.rows() == 0) fail(ErrorKind::kInvalidInput, "labeled set is empty");
    if (embeddings_.rows() != labels_.size()) {
      fail(ErrorKind::kInvalidInput,
           std::to_string(embeddings_.rows()) + " embeddings but " +
               std::to_string(labels_.size()) + " labels");
    }
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      if (labels_[i] >= class_count_) {
        fail(ErrorKind::kInvalidInput, "label " + std::to_string(labels_[i]) +
                                           " at row " + std::to_string(i) +
                                           " exceeds class count " +
                                           std::to_string(class_count_));
      }
    }
  }

  /// Class count inferred as max(label) + 1.
  LabeledEmbeddings(EmbeddingMatrix embeddings, std::vector<ClassId> labels)
      : LabeledEmbeddings(std::move(embeddings), labels, infer_class_count(labels)) {}

  const EmbeddingMatrix& embeddings() const noexcept { return embeddings_; }
  const std::vector<ClassId>& labels() const noexcept { return labels_; }
  std::uint32_t class_count() const noexcept { return class_count_; }
  std::size_t size() const noexcept { return labels_.size(); }
  std::size_t dim() const noexcept { return embeddings_.dim(); }

 private:
  static std::uint32_t infer_class_count(const std::vector<ClassId>& labels) {
    ClassId top = 0;
    for (ClassId l : labels) top = std::max(top, l);
    return labels.empty() ? 0 : top + 1;
  }

  EmbeddingMatrix embeddings_;
  std::vector<ClassId> labels_;
  std::uint32_t class_count_ = 0;
};

}  // namespace semcomp

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
#include <cstring>
#include <map>
#include <string>
#include <vector>

#include "semcomp/embedding.hpp"
#include "semcomp/error.hpp"

namespace semcomp {

namespace detail {

// Ascending component order, float32 inputs widened to double. Encoder and
// decoder must see bit-identical sums for the same files, so this loop must
// not be reordered or vectorized with reassociation.
inline double squared_l2_unchecked(EmbeddingView a, EmbeddingView b) noexcept {
  double sum = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) {
    const double diff = static_cast<double>(a[d]) - static_cast<double>(b[d]);
    sum += diff * diff;
  }
  return sum;
}

inline void require_same_dim(EmbeddingView a, EmbeddingView b) {
  if (a.size() != b.size()) {
    fail(ErrorKind::kInvalidInput, "dimension mismatch: " + std::to_string(a.size()) +
                                       " vs " + std::to_string(b.size()));
  }
}

}  // namespace detail

/// Squared Euclidean distance between two embeddings.
inline double semantic_distance(EmbeddingView a, EmbeddingView b) {
  detail::require_same_dim(a, b);
  return detail::squared_l2_unchecked(a, b);
}

/// Euclidean (unsquared) distance between a true and a reconstructed embedding.
inline double semantic_distortion(EmbeddingView q, EmbeddingView qhat) {
  return std::sqrt(semantic_distance(q, qhat));
}

/// Index of the memory row with the smallest distortion to `q`. Ties go to
/// the lowest row index. The search runs on the squared distance, which has
/// the same argmin.
inline std::size_t quantize_index(EmbeddingView q, const EmbeddingMemory& memory) {
  if (memory.rows() == 0) fail(ErrorKind::kInvalidState, "embedding memory is empty");
  if (q.size() != memory.dim()) {
    fail(ErrorKind::kInvalidInput, "query dimension " + std::to_string(q.size()) +
                                       " does not match memory dimension " +
                                       std::to_string(memory.dim()));
  }
  std::size_t best = 0;
  double best_distance = detail::squared_l2_unchecked(q, memory.row(0));
  for (std::size_t i = 1; i < memory.rows(); ++i) {
    const double d = detail::squared_l2_unchecked(q, memory.row(i));
    if (d < best_distance) {
      best_distance = d;
      best = i;
    }
  }
  return best;
}

inline std::vector<std::size_t> quantize_batch(const EmbeddingMatrix& queries,
                                               const EmbeddingMemory& memory) {
  std::vector<std::size_t> out;
  out.reserve(queries.rows());
  for (std::size_t i = 0; i < queries.rows(); ++i) {
    out.push_back(quantize_index(queries.row(i), memory));
  }
  return out;
}

/// For each memory row, the index it quantizes to, counted per index.
///
/// Row i quantizes to the lowest index j whose components equal row i
/// exactly (distance 0 is the global minimum), so this is computed by
/// grouping identical rows instead of an N^2 scan. Rows that duplicate an
/// earlier row contribute to that earlier index and never appear as keys.
inline std::map<std::size_t, std::uint64_t> self_assignment_counts(
    const EmbeddingMemory& memory) {
  if (memory.rows() == 0) fail(ErrorKind::kInvalidState, "embedding memory is empty");
  // -0.0f and 0.0f compare equal, so normalize before comparing bytes.
  auto key_of = [&](std::size_t i) {
    std::vector<std::uint32_t> key(memory.dim());
    const EmbeddingView row = memory.row(i);
    for (std::size_t d = 0; d < row.size(); ++d) {
      const float v = row[d] == 0.0f ? 0.0f : row[d];
      std::memcpy(&key[d], &v, sizeof(float));
    }
    return key;
  };
  std::map<std::vector<std::uint32_t>, std::size_t> first_index;
  std::map<std::size_t, std::uint64_t> counts;
  for (std::size_t i = 0; i < memory.rows(); ++i) {
    auto [it, inserted] = first_index.try_emplace(key_of(i), i);
    ++counts[it->second];
  }
  return counts;
}

}  // namespace semcomp

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
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "semcomp/embedding.hpp"
#include "semcomp/error.hpp"
#include "semcomp/semantic.hpp"

namespace semcomp::ap {

/// Dense N x N matrix of doubles, row-major.
class SquareMatrix {
 public:
  SquareMatrix() = default;
  explicit SquareMatrix(std::size_t n, double fill = 0.0) : n_(n), values_(n * n, fill) {}

  std::size_t size() const noexcept { return n_; }
  double& operator()(std::size_t i, std::size_t k) noexcept { return values_[i * n_ + k]; }
  double operator()(std::size_t i, std::size_t k) const noexcept { return values_[i * n_ + k]; }
  const std::vector<double>& values() const noexcept { return values_; }

  friend bool operator==(const SquareMatrix&, const SquareMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> values_;
};

struct SimilarityMatrix {
  SquareMatrix s;
  double preference = 0.0;

  std::size_t size() const noexcept { return s.size(); }

  /// Copy with every diagonal entry replaced by `value`.
  SimilarityMatrix with_preference(double value) const {
    SimilarityMatrix out = *this;
    out.preference = value;
    for (std::size_t k = 0; k < out.s.size(); ++k) out.s(k, k) = value;
    return out;
  }
};

struct APConfig {
  double damping = 0.5;
  std::uint32_t max_iterations = 500;
  std::uint32_t convergence_window = 50;
  std::uint64_t jitter_seed = 0;
  // Relative magnitude of the per-entry tie-breaking perturbation; 0 disables it.
  double jitter_scale = 1e-9;

  void validate() const {
    if (!(damping >= 0.5 && damping < 1.0)) {
      fail(ErrorKind::kInvalidInput, "damping must lie in [0.5, 1), got " + std::to_string(damping));
    }
    if (max_iterations == 0) fail(ErrorKind::kInvalidInput, "max_iterations must be positive");
    if (convergence_window == 0 || convergence_window > max_iterations) {
      fail(ErrorKind::kInvalidInput, "convergence_window must lie in [1, max_iterations]");
    }
    if (!(jitter_scale >= 0.0 && jitter_scale < 1.0)) {
      fail(ErrorKind::kInvalidInput, "jitter_scale must lie in [0, 1)");
    }
  }
};

/// Result of clustering the memory. Exemplar j (ascending row index) owns
/// cluster label j.
struct ClusterModel {
  std::vector<std::size_t> exemplars;
  std::vector<std::uint32_t> labels;
  std::vector<std::uint64_t> sizes;
  std::uint32_t iterations = 0;
  bool converged = false;

  std::size_t cluster_count() const noexcept { return exemplars.size(); }
  std::size_t point_count() const noexcept { return labels.size(); }

  /// FNV-1a over the point count, exemplar rows and labels. Two sides that
  /// clustered identical memories with identical settings agree on this.
  std::uint64_t digest() const noexcept {
    std::uint64_t h = 14695981039346656037ull;
    auto mix = [&h](std::uint64_t v, int bytes) {
      for (int b = 0; b < bytes; ++b) {
        h ^= (v >> (8 * b)) & 0xFFu;
        h *= 1099511628211ull;
      }
    };
    mix(labels.size(), 8);
    mix(exemplars.size(), 8);
    for (std::size_t e : exemplars) mix(e, 8);
    for (std::uint32_t l : labels) mix(l, 4);
    return h;
  }

  bool same_clustering(const ClusterModel& other) const noexcept {
    return exemplars == other.exemplars && labels == other.labels;
  }
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Counter-based uniform in [0, 1) keyed by (seed, i, k). No hidden state,
/// so any implementation reproduces the same perturbations.
inline double jitter_unit(std::uint64_t seed, std::uint64_t i, std::uint64_t k) noexcept {
  const std::uint64_t h =
      detail::splitmix64(detail::splitmix64(detail::splitmix64(seed) ^ i) ^ k);
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

/// Negative squared distances off the diagonal, the median of those on the
/// diagonal. The median is taken before jitter; jitter then shrinks each
/// off-diagonal entry toward zero by at most jitter_scale * |s(i,k)|.
inline SimilarityMatrix build_similarity(const EmbeddingMemory& memory, const APConfig& config) {
  const std::size_t n = memory.rows();
  if (n < 2) fail(ErrorKind::kInvalidInput, "affinity propagation needs at least two points");
  SimilarityMatrix out{SquareMatrix(n), 0.0};
  std::vector<double> off;
  off.reserve(n * (n - 1));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = i + 1; k < n; ++k) {
      const double s = -semcomp::detail::squared_l2_unchecked(memory.row(i), memory.row(k));
      out.s(i, k) = s;
      out.s(k, i) = s;
      off.push_back(s);
      off.push_back(s);
    }
  }
  const std::size_t mid = off.size() / 2;
  std::nth_element(off.begin(), off.begin() + static_cast<std::ptrdiff_t>(mid), off.end());
  const double upper = off[mid];
  const double lower = *std::max_element(off.begin(), off.begin() + static_cast<std::ptrdiff_t>(mid));
  out.preference = lower + (upper - lower) / 2.0;

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      if (i == k) {
        out.s(i, k) = out.preference;
      } else if (config.jitter_scale > 0.0) {
        const double s = out.s(i, k);
        out.s(i, k) = s - config.jitter_scale * jitter_unit(config.jitter_seed, i, k) * s;
      }
    }
  }
  return out;
}

namespace detail {

inline void require_damping(double damping) {
  if (!(damping >= 0.0 && damping <= 1.0)) {
    fail(ErrorKind::kInvalidInput, "damping must lie in [0, 1]");
  }
}

inline void require_square(const SquareMatrix& m, std::size_t n, const char* what) {
  if (m.size() != n) {
    fail(ErrorKind::kInvalidInput, std::string(what) + " is " + std::to_string(m.size()) +
                                       "x" + std::to_string(m.size()) + ", expected " +
                                       std::to_string(n) + "x" + std::to_string(n));
  }
}

// In-place responsibility sweep. Each row needs only the two largest values
// of a(i,.) + s(i,.), which keeps the sweep O(N^2).
inline void responsibility_sweep(const SquareMatrix& s, const SquareMatrix& a, SquareMatrix& r,
                                 double damping) noexcept {
  const std::size_t n = s.size();
  const double keep = 1.0 - damping;
  for (std::size_t i = 0; i < n; ++i) {
    double first = -std::numeric_limits<double>::infinity();
    double second = -std::numeric_limits<double>::infinity();
    std::size_t first_k = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const double v = a(i, k) + s(i, k);
      if (v > first) {
        second = first;
        first = v;
        first_k = k;
      } else if (v > second) {
        second = v;
      }
    }
    for (std::size_t k = 0; k < n; ++k) {
      const double competitor = k == first_k ? second : first;
      r(i, k) = keep * (s(i, k) - competitor) + damping * r(i, k);
    }
  }
}

inline void availability_sweep(const SquareMatrix& r, SquareMatrix& a, double damping) {
  const std::size_t n = r.size();
  const double keep = 1.0 - damping;
  std::vector<double> positive_sum(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      if (i != k) positive_sum[k] += std::max(0.0, r(i, k));
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      double fresh;
      if (i == k) {
        fresh = positive_sum[k];
      } else {
        fresh = std::min(0.0, r(k, k) + (positive_sum[k] - std::max(0.0, r(i, k))));
      }
      a(i, k) = keep * fresh + damping * a(i, k);
    }
  }
}

inline std::vector<std::size_t> current_exemplars(const SquareMatrix& r, const SquareMatrix& a) {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < r.size(); ++k) {
    if (r(k, k) + a(k, k) > 0.0) out.push_back(k);
  }
  return out;
}

}  // namespace detail

/// One damped responsibility update:
/// r'(i,k) = (1-d) [s(i,k) - max_{k' != k} (a(i,k') + s(i,k'))] + d r(i,k).
inline SquareMatrix update_responsibility(const SimilarityMatrix& similarity,
                                          const SquareMatrix& availability,
                                          const SquareMatrix& responsibility, double damping) {
  const std::size_t n = similarity.size();
  detail::require_square(availability, n, "availability");
  detail::require_square(responsibility, n, "responsibility");
  detail::require_damping(damping);
  SquareMatrix out = responsibility;
  detail::responsibility_sweep(similarity.s, availability, out, damping);
  return out;
}

/// One damped availability update. Off-diagonal entries follow the clipped
/// evidence rule; the diagonal takes the sum of positive responsibilities
/// from all other points.
inline SquareMatrix update_availability(const SquareMatrix& responsibility,
                                        const SquareMatrix& availability, double damping) {
  detail::require_square(availability, responsibility.size(), "availability");
  detail::require_damping(damping);
  SquareMatrix out = availability;
  detail::availability_sweep(responsibility, out, damping);
  return out;
}

/// Message passing from zero-initialized responsibilities and availabilities.
inline ClusterModel run(const SimilarityMatrix& similarity, const APConfig& config) {
  config.validate();
  const std::size_t n = similarity.size();
  if (n < 2) fail(ErrorKind::kInvalidInput, "affinity propagation needs at least two points");

  SquareMatrix r(n);
  SquareMatrix a(n);
  std::vector<std::size_t> exemplars;
  std::uint32_t stable = 0;
  std::uint32_t iteration = 0;
  bool converged = false;
  while (iteration < config.max_iterations) {
    detail::responsibility_sweep(similarity.s, a, r, config.damping);
    detail::availability_sweep(r, a, config.damping);
    ++iteration;
    std::vector<std::size_t> next = detail::current_exemplars(r, a);
    stable = next == exemplars ? stable + 1 : 1;
    exemplars = std::move(next);
    if (stable >= config.convergence_window && !exemplars.empty()) {
      converged = true;
      break;
    }
  }
  if (exemplars.empty()) {
    fail(ErrorKind::kDegenerateClustering,
         "no exemplars after " + std::to_string(iteration) + " iterations; raise the preference");
  }

  ClusterModel model;
  model.exemplars = exemplars;
  model.labels.assign(n, 0);
  model.sizes.assign(exemplars.size(), 0);
  model.iterations = iteration;
  model.converged = converged;
  for (std::size_t j = 0; j < exemplars.size(); ++j) {
    model.labels[exemplars[j]] = static_cast<std::uint32_t>(j);
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (std::binary_search(exemplars.begin(), exemplars.end(), i)) continue;
    std::uint32_t best = 0;
    double best_s = similarity.s(i, exemplars[0]);
    for (std::size_t j = 1; j < exemplars.size(); ++j) {
      const double v = similarity.s(i, exemplars[j]);
      if (v > best_s) {
        best_s = v;
        best = static_cast<std::uint32_t>(j);
      }
    }
    model.labels[i] = best;
  }
  for (std::uint32_t l : model.labels) ++model.sizes[l];
  return model;
}

inline ClusterModel run(const EmbeddingMemory& memory, const APConfig& config) {
  config.validate();
  return run(build_similarity(memory, config), config);
}

/// Cluster label of the exemplar nearest to `q`; lowest exemplar index wins ties.
inline std::uint32_t assign_to_exemplar(EmbeddingView q, const ClusterModel& model,
                                        const EmbeddingMemory& memory) {
  if (model.exemplars.empty()) fail(ErrorKind::kInvalidState, "cluster model has no exemplars");
  if (model.point_count() != memory.rows()) {
    fail(ErrorKind::kInvalidState, "cluster model covers " + std::to_string(model.point_count()) +
                                       " rows but memory has " + std::to_string(memory.rows()));
  }
  if (q.size() != memory.dim()) {
    fail(ErrorKind::kInvalidInput, "query dimension " + std::to_string(q.size()) +
                                       " does not match memory dimension " +
                                       std::to_string(memory.dim()));
  }
  std::uint32_t best = 0;
  double best_d = semcomp::detail::squared_l2_unchecked(q, memory.row(model.exemplars[0]));
  for (std::size_t j = 1; j < model.exemplars.size(); ++j) {
    const double d = semcomp::detail::squared_l2_unchecked(q, memory.row(model.exemplars[j]));
    if (d < best_d) {
      best_d = d;
      best = static_cast<std::uint32_t>(j);
    }
  }
  return best;
}

}  // namespace semcomp::ap

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
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "semcomp/embedding.hpp"
#include "semcomp/error.hpp"
#include "semcomp/semantic.hpp"

namespace semcomp::knn {

inline constexpr std::size_t kDefaultNeighbors = 15;

/// Exact K-nearest-neighbor classifier over a labeled training set.
class KnnModel {
 public:
  KnnModel(LabeledEmbeddings train, std::size_t k = kDefaultNeighbors)
      : train_(std::move(train)), k_(k) {
    if (train_.size() == 0) fail(ErrorKind::kInvalidState, "KNN model has no training rows");
    if (k_ == 0 || k_ > train_.size()) {
      fail(ErrorKind::kInvalidInput, "neighbor count " + std::to_string(k_) +
                                         " outside [1, " + std::to_string(train_.size()) + "]");
    }
  }

  const LabeledEmbeddings& train() const noexcept { return train_; }
  std::size_t k() const noexcept { return k_; }

 private:
  LabeledEmbeddings train_;
  std::size_t k_;
};

/// Majority vote over the k nearest rows by squared distance. Distance ties
/// at the cut go to the lower train index; vote ties go to the smaller summed
/// neighbor distance, then to the lower label id.
inline ClassId predict(EmbeddingView q, const KnnModel& model) {
  const auto& train = model.train();
  if (q.size() != train.dim()) {
    fail(ErrorKind::kInvalidInput, "query dimension " + std::to_string(q.size()) +
                                       " does not match train dimension " +
                                       std::to_string(train.dim()));
  }
  const std::size_t m = train.size();
  std::vector<std::pair<double, std::size_t>> scored(m);
  for (std::size_t i = 0; i < m; ++i) {
    scored[i] = {semcomp::detail::squared_l2_unchecked(q, train.embeddings().row(i)), i};
  }
  const auto cut = scored.begin() + static_cast<std::ptrdiff_t>(model.k());
  std::partial_sort(scored.begin(), cut, scored.end());

  struct Tally {
    std::size_t votes = 0;
    double distance = 0.0;
  };
  std::map<ClassId, Tally> tally;
  for (auto it = scored.begin(); it != cut; ++it) {
    Tally& t = tally[train.labels()[it->second]];
    ++t.votes;
    t.distance += it->first;
  }
  auto best = tally.begin();
  for (auto it = std::next(tally.begin()); it != tally.end(); ++it) {
    const Tally& a = it->second;
    const Tally& b = best->second;
    if (a.votes > b.votes || (a.votes == b.votes && a.distance < b.distance)) best = it;
  }
  return best->first;
}

inline std::vector<ClassId> predict_batch(const EmbeddingMatrix& queries, const KnnModel& model) {
  std::vector<ClassId> out;
  out.reserve(queries.rows());
  for (std::size_t i = 0; i < queries.rows(); ++i) out.push_back(predict(queries.row(i), model));
  return out;
}

}  // namespace semcomp::knn

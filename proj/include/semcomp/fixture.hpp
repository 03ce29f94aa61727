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

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "semcomp/embedding.hpp"
#include "semcomp/io.hpp"
#include "semcomp/random.hpp"

// Three-class synthetic corpus: Gaussian blobs around scaled basis
// vectors, with template sentences drawn from per-class vocabularies.
namespace semcomp::fixture {

namespace fs = std::filesystem;

struct FixtureParams {
  std::uint64_t seed = 20240917;
  std::size_t dim = 16;
  double separation = 20.0;  // distance between any two class centres
  double spread = 1.0;       // per-coordinate standard deviation
  std::size_t memory_per_class = 60;
  std::size_t train_per_class = 40;
  std::size_t test_per_class = 30;
};

inline const std::array<std::string, 3> kClassNames = {"business", "science", "sports"};

inline const std::array<std::vector<std::string>, 3> kVocabulary = {{
    {"shares", "market", "profit", "quarterly", "earnings", "merger", "investors", "bank", "stocks", "revenue",
     "café", "chain", "expands", "forecast", "rates"},
    {"researchers", "telescope", "genome", "particle", "climate", "study", "species", "orbit", "quantum",
     "laboratory", "naïve", "model", "discovers", "fossil", "data"},
    {"striker", "season", "coach", "championship", "goal", "league", "tournament", "midfielder", "victory",
     "olympic", "match", "résumé", "defeat", "final", "record"},
}};

struct Fixture {
  std::vector<std::string> texts;
  std::vector<std::string> label_names;
  std::vector<ClassId> labels;
  EmbeddingMatrix test;
  EmbeddingMatrix memory;
  LabeledEmbeddings train;
};

inline Fixture make_fixture(const FixtureParams& params = {}) {
  rng::Engine engine(params.seed);
  auto draw = [&](ClassId c, EmbeddingMatrix& into) {
    std::vector<float> v(params.dim);
    for (std::size_t d = 0; d < params.dim; ++d) {
      const double centre = d == c ? params.separation / std::sqrt(2.0) : 0.0;
      v[d] = static_cast<float>(centre + params.spread * rng::standard_normal(engine));
    }
    into.append(v);
  };
  auto interleaved = [&](std::size_t per_class, EmbeddingMatrix& into, std::vector<ClassId>& labels) {
    for (std::size_t i = 0; i < per_class; ++i) {
      for (ClassId c = 0; c < 3; ++c) {
        draw(c, into);
        labels.push_back(c);
      }
    }
  };

  Fixture f;
  f.memory = EmbeddingMatrix(params.dim);
  std::vector<ClassId> memory_labels;
  interleaved(params.memory_per_class, f.memory, memory_labels);

  EmbeddingMatrix train(params.dim);
  std::vector<ClassId> train_labels;
  interleaved(params.train_per_class, train, train_labels);
  f.train = LabeledEmbeddings(std::move(train), std::move(train_labels), 3);

  f.test = EmbeddingMatrix(params.dim);
  interleaved(params.test_per_class, f.test, f.labels);
  for (ClassId c : f.labels) {
    const auto& words = kVocabulary[c];
    const std::size_t n_words = 6 + rng::uniform_below(engine, 7);
    std::string text;
    for (std::size_t w = 0; w < n_words; ++w) {
      if (w > 0) text += ' ';
      text += words[rng::uniform_below(engine, words.size())];
    }
    text += '.';
    f.texts.push_back(std::move(text));
    f.label_names.push_back(kClassNames[c]);
  }
  return f;
}

/// Writes dataset.jsonl, memory.semb, train.semb, test.semb and bench.json.
inline void write_fixture(const fs::path& dir, const FixtureParams& params = {}) {
  const Fixture f = make_fixture(params);
  fs::create_directories(dir);
  io::write_dataset(dir / "dataset.jsonl", f.texts, f.label_names);
  io::write_embedding_file(dir / "memory.semb", f.memory);
  io::write_embedding_file(dir / "train.semb", f.train);
  io::write_embedding_file(dir / "test.semb", f.test, &f.labels);
  const nlohmann::json config = {
      {"dataset", "dataset.jsonl"},
      {"memory", "memory.semb"},
      {"train", "train.semb"},
      {"test", "test.semb"},
      {"k_knn", 15},
      {"block_sizes", {1, 2, 3}},
      {"max_test_samples", 2000},
      {"sample_seed", 0},
      {"output_dir", "bench-out"},
      {"ap", {{"damping", 0.5}, {"max_iterations", 500}, {"convergence_window", 50}, {"jitter_seed", 7},
              {"jitter_scale", 1e-9}}},
  };
  io::write_text(dir / "bench.json", config.dump(2) + "\n");
}

}  // namespace semcomp::fixture

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

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "semcomp/fixture.hpp"
#include "semcomp/pipelines.hpp"
#include "test_data.hpp"

namespace {

using semcomp::EmbeddingMatrix;
using semcomp::Error;
using semcomp::ErrorKind;
using semcomp::LabeledEmbeddings;
namespace ap = semcomp::ap;
namespace knn = semcomp::knn;
namespace pl = semcomp::pipeline;

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorKind::kInternalConsistency;
}

struct Setup {
  semcomp::fixture::Fixture f = semcomp::fixture::make_fixture();
  pl::Corpus corpus{f.texts, f.labels, f.test};
  knn::KnnModel classifier{f.train, 15};
};

const Setup& fixture_setup() {
  static const Setup s;
  return s;
}

pl::Corpus texts_for(const EmbeddingMatrix& embeddings, const std::vector<std::uint32_t>& labels) {
  pl::Corpus c;
  c.embeddings = embeddings;
  c.labels = labels;
  for (std::size_t i = 0; i < labels.size(); ++i) c.texts.push_back("message " + std::to_string(i % 17));
  return c;
}

TEST(Fixture, EveryPipelineIsExactAndBitsAreOrdered) {
  const auto& s = fixture_setup();
  const auto k1 = pl::run_conventional(s.corpus, 1, s.classifier);
  const auto quant = pl::run_quantization(s.corpus, s.f.memory, s.classifier);
  const auto comp = pl::run_compression(s.corpus, s.f.memory, s.classifier, ap::APConfig{});
  EXPECT_EQ(k1.report.accuracy, 1.0);
  EXPECT_EQ(quant.report.accuracy, 1.0);
  EXPECT_EQ(comp.report.accuracy, 1.0);
  EXPECT_LT(comp.report.total_bits, quant.report.total_bits);
  EXPECT_LT(quant.report.total_bits, k1.report.total_bits);
  EXPECT_EQ(comp.report.n_clusters, 3u);
  EXPECT_EQ(comp.report.display_name(), "Semantic Compression - 3");
}

TEST(Conventional, LosslessAcrossBlockSizes) {
  const auto& s = fixture_setup();
  std::vector<std::uint64_t> bits;
  for (std::size_t k = 1; k <= 4; ++k) {
    const auto run = pl::run_conventional(s.corpus, k, s.classifier);
    EXPECT_EQ(run.report.accuracy, 1.0);
    EXPECT_EQ(run.report.block_size, k);
    EXPECT_EQ(run.payload.bit_length(), run.report.total_bits);
    EXPECT_EQ(run.report.message_bits.size(), s.corpus.size());
    bits.push_back(run.report.total_bits);
  }
  EXPECT_GT(bits[0], bits[1]);
  EXPECT_GT(bits[1], bits[2]);
}

TEST(Conventional, AccuracyIndependentOfBlockSize) {
  // A noisy corpus so accuracy is below 1; it must not move with K.
  const auto train = testdata::make_blobs(3, 30, 6, 4.0, 1.5, 51);
  const auto test = testdata::make_blobs(3, 30, 6, 4.0, 1.5, 52);
  const knn::KnnModel classifier(LabeledEmbeddings(train.points, train.labels, 3));
  const auto corpus = texts_for(test.points, test.labels);
  const double base = pl::run_conventional(corpus, 1, classifier).report.accuracy;
  EXPECT_LT(base, 1.0);
  for (std::size_t k = 2; k <= 3; ++k) EXPECT_EQ(pl::run_conventional(corpus, k, classifier).report.accuracy, base);
}

TEST(Quantization, ExactMemoryRowsMatchConventionalAccuracy) {
  const auto train = testdata::make_blobs(3, 30, 6, 4.0, 1.5, 53);
  const auto test = testdata::make_blobs(3, 30, 6, 4.0, 1.5, 54);
  const knn::KnnModel classifier(LabeledEmbeddings(train.points, train.labels, 3));
  const auto corpus = texts_for(test.points, test.labels);
  const auto conv = pl::run_conventional(corpus, 1, classifier);
  const auto quant = pl::run_quantization(corpus, test.points, classifier);
  EXPECT_EQ(quant.report.predictions, conv.report.predictions);
  EXPECT_EQ(quant.report.accuracy, conv.report.accuracy);
  EXPECT_EQ(quant.report.memory_size, test.points.rows());
}

TEST(Quantization, UniformIndexCodeOnDistinctMemory) {
  const auto& s = fixture_setup();
  const auto code = pl::index_code(s.f.memory);
  EXPECT_EQ(code.size(), 180u);
  // 180 symbols: 76 of 7 bits and 104 of 8 bits.
  std::size_t sevens = 0;
  for (unsigned l : code.lengths()) sevens += l == 7 ? 1 : 0;
  EXPECT_EQ(sevens, 76u);
  const auto run = pl::run_quantization(s.corpus, s.f.memory, s.classifier);
  for (auto b : run.report.message_bits) EXPECT_TRUE(b == 7 || b == 8);
  EXPECT_EQ(run.payload.bit_length(), run.report.total_bits);
}

TEST(Compression, NeverWorseThanQuantizationOnRandomCorpora) {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const auto memory = testdata::make_blobs(3 + seed % 3, 25, 5, 12.0, 1.0, 60 + seed);
    const auto train = testdata::make_blobs(3 + seed % 3, 20, 5, 12.0, 1.0, 70 + seed);
    const auto test = testdata::make_blobs(3 + seed % 3, 30, 5, 12.0, 1.0, 80 + seed);
    const knn::KnnModel classifier(LabeledEmbeddings(train.points, train.labels));
    const auto corpus = texts_for(test.points, test.labels);
    const auto quant = pl::run_quantization(corpus, memory.points, classifier);
    const auto comp = pl::run_compression(corpus, memory.points, classifier, ap::APConfig{});
    EXPECT_LE(comp.report.total_bits, quant.report.total_bits) << seed;
  }
}

TEST(Compression, BlobBound) {
  for (std::size_t blobs : {2, 3, 5}) {
    const auto memory = testdata::make_blobs(blobs, 20, 8, 20.0, 1.0, 90 + blobs);
    const auto test = testdata::make_blobs(blobs, 40, 8, 20.0, 1.0, 100 + blobs);
    const knn::KnnModel classifier(LabeledEmbeddings(memory.points, memory.labels));
    const auto corpus = texts_for(test.points, test.labels);
    const auto comp = pl::run_compression(corpus, memory.points, classifier, ap::APConfig{});
    ASSERT_EQ(comp.report.n_clusters, blobs);
    const auto t = static_cast<std::uint64_t>(corpus.size());
    const auto bound = t * static_cast<std::uint64_t>(std::ceil(std::log2(blobs))) + t;
    EXPECT_LE(comp.report.total_bits, bound);
    EXPECT_EQ(comp.report.accuracy, 1.0);
  }
}

TEST(Compression, DesyncedModelsAreRejected) {
  const auto& s = fixture_setup();
  const auto model = ap::run(s.f.memory, ap::APConfig{});
  auto other = model;
  std::swap(other.labels[0], other.labels[1]);
  EXPECT_EQ(kind_of([&] { pl::run_compression(s.corpus, s.f.memory, s.classifier, model, other); }),
            ErrorKind::kDesync);
  ap::APConfig shifted;
  shifted.jitter_seed = 1234;
  const auto reseeded = ap::run(s.f.memory, shifted);
  if (!reseeded.same_clustering(model)) {
    EXPECT_EQ(kind_of([&] { pl::run_compression(s.corpus, s.f.memory, s.classifier, model, reseeded); }),
              ErrorKind::kDesync);
  }
  EXPECT_EQ(kind_of([&] { pl::run_compression(s.corpus, s.f.memory.prefix(10), s.classifier, model, model); }),
            ErrorKind::kDesync);
}

TEST(Metrics, Accuracy) {
  std::vector<std::uint32_t> truth(2000, 1);
  EXPECT_EQ(pl::accuracy(truth, truth), 1.0);
  EXPECT_EQ(pl::accuracy(std::vector<std::uint32_t>(2000, 0), truth), 0.0);
  auto predictions = truth;
  for (std::size_t i = 0; i < 205; ++i) predictions[i] = 0;
  EXPECT_DOUBLE_EQ(pl::accuracy(predictions, truth), 0.8975);
  EXPECT_EQ(kind_of([] { pl::accuracy({}, {}); }), ErrorKind::kInvalidInput);
  EXPECT_EQ(kind_of([] { pl::accuracy({1}, {1, 2}); }), ErrorKind::kInvalidInput);
}

TEST(Metrics, CompressionRatio) {
  pl::PipelineReport conventional;
  conventional.n_messages = 2000;
  conventional.total_bits = 1822443;
  pl::PipelineReport quantization = conventional;
  quantization.total_bits = 28701;
  EXPECT_NEAR(pl::compression_ratio(quantization, conventional), 63.5, 0.05);
  EXPECT_EQ(pl::compression_ratio(conventional, conventional), 1.0);

  pl::PipelineReport long_texts = conventional;
  long_texts.total_bits = 11342093;
  pl::PipelineReport long_quant = conventional;
  long_quant.total_bits = 28719;
  EXPECT_NEAR(pl::compression_ratio(long_quant, long_texts), 395, 0.5);

  pl::PipelineReport empty = conventional;
  empty.total_bits = 0;
  EXPECT_EQ(kind_of([&] { pl::compression_ratio(empty, conventional); }), ErrorKind::kInvalidInput);
  pl::PipelineReport other = conventional;
  other.n_messages = 10;
  EXPECT_EQ(kind_of([&] { pl::compression_ratio(other, conventional); }), ErrorKind::kInvalidInput);
}

TEST(Sweep, FullSizeEqualsDirectRunAndPrefixesShrink) {
  const auto& s = fixture_setup();
  const auto reports = pl::sweep_memory_size(s.corpus, s.f.memory, s.classifier, {30, 90, 180}, ap::APConfig{});
  ASSERT_EQ(reports.size(), 6u);
  EXPECT_EQ(reports[4], pl::run_quantization(s.corpus, s.f.memory, s.classifier).report);
  EXPECT_EQ(reports[5], pl::run_compression(s.corpus, s.f.memory, s.classifier, ap::APConfig{}).report);
  EXPECT_EQ(reports[0].memory_size, 30u);
  EXPECT_EQ(reports[2].memory_size, 90u);
  for (const auto& r : reports) EXPECT_EQ(r.n_messages, s.corpus.size());
  EXPECT_LT(reports[0].total_bits, reports[4].total_bits);
}

TEST(Pipelines, Deterministic) {
  const auto& s = fixture_setup();
  const auto a = pl::run_compression(s.corpus, s.f.memory, s.classifier, ap::APConfig{});
  const auto b = pl::run_compression(s.corpus, s.f.memory, s.classifier, ap::APConfig{});
  EXPECT_EQ(a.report, b.report);
  EXPECT_EQ(a.payload, b.payload);
  EXPECT_EQ(pl::run_conventional(s.corpus, 2, s.classifier).payload,
            pl::run_conventional(s.corpus, 2, s.classifier).payload);
}

TEST(Pipelines, InputValidation) {
  const auto& s = fixture_setup();
  pl::Corpus broken = s.corpus;
  broken.labels.pop_back();
  EXPECT_EQ(kind_of([&] { pl::run_conventional(broken, 1, s.classifier); }), ErrorKind::kInvalidInput);
  EXPECT_EQ(kind_of([&] { pl::run_conventional(s.corpus, 0, s.classifier); }), ErrorKind::kInvalidInput);
  const auto narrow = EmbeddingMatrix::from_rows({{0.0f, 1.0f}});
  EXPECT_EQ(kind_of([&] { pl::run_quantization(s.corpus, narrow, s.classifier); }), ErrorKind::kInvalidInput);
  EXPECT_EQ(kind_of([&] { pl::run_quantization(s.corpus, EmbeddingMatrix(16), s.classifier); }),
            ErrorKind::kInvalidState);
}

}  // namespace

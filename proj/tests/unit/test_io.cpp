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

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "semcomp/bench.hpp"
#include "semcomp/fixture.hpp"
#include "semcomp/io.hpp"

namespace {

namespace fs = std::filesystem;
using semcomp::EmbeddingMatrix;
using semcomp::Error;
using semcomp::ErrorKind;
namespace io = semcomp::io;
namespace ap = semcomp::ap;

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorKind::kInternalConsistency;
}

std::string message_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / ("semcomp-io-" + std::string(info->test_suite_name()) + "-" + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

EmbeddingMatrix sample_matrix() {
  return EmbeddingMatrix::from_rows({{1.5f, -2.0f, 0.0f}, {-0.0f, 3.25f, 1e-30f}});
}

using EmbeddingFileTest = TempDir;

TEST_F(EmbeddingFileTest, ExactLayout) {
  const auto bytes = io::serialize_embedding_file(EmbeddingMatrix::from_rows({{1.0f}}), nullptr);
  const std::vector<std::uint8_t> expected{'S', 'E', 'M', 'B', 1, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0,
                                           1,   0,   0,   0,   0, 0, 0, 0, 0, 0, 0x80, 0x3F};
  EXPECT_EQ(bytes, expected);
  const std::vector<std::uint32_t> labels{7};
  const auto labeled = io::serialize_embedding_file(EmbeddingMatrix::from_rows({{1.0f}}), &labels);
  ASSERT_EQ(labeled.size(), expected.size() + 12);
  EXPECT_EQ(std::vector<std::uint8_t>(labeled.end() - 12, labeled.end()),
            (std::vector<std::uint8_t>{1, 0, 0, 0, 0, 0, 0, 0, 7, 0, 0, 0}));
}

TEST_F(EmbeddingFileTest, RoundTripIsBitIdentical) {
  const auto m = sample_matrix();
  io::write_embedding_file(dir_ / "a.semb", m);
  const auto back = io::read_embedding_file(dir_ / "a.semb");
  EXPECT_FALSE(back.labels);
  ASSERT_EQ(back.matrix.rows(), 2u);
  ASSERT_EQ(back.matrix.dim(), 3u);
  EXPECT_EQ(std::memcmp(back.matrix.values().data(), m.values().data(), 6 * sizeof(float)), 0);
  EXPECT_TRUE(std::signbit(back.matrix.row(1)[0]));
}

TEST_F(EmbeddingFileTest, LabelsRoundTrip) {
  const semcomp::LabeledEmbeddings data(sample_matrix(), {2, 0}, 3);
  io::write_embedding_file(dir_ / "l.semb", data);
  const auto back = io::read_labeled(dir_ / "l.semb");
  EXPECT_EQ(back.labels(), (std::vector<std::uint32_t>{2, 0}));
  EXPECT_TRUE(std::ranges::equal(back.embeddings().values(), data.embeddings().values()));
  io::write_embedding_file(dir_ / "u.semb", sample_matrix());
  EXPECT_EQ(kind_of([&] { io::read_labeled(dir_ / "u.semb"); }), ErrorKind::kFormat);
}

TEST_F(EmbeddingFileTest, RewriteIsIdempotent) {
  io::write_embedding_file(dir_ / "a.semb", sample_matrix());
  const auto first = io::read_bytes(dir_ / "a.semb");
  io::write_embedding_file(dir_ / "b.semb", io::read_memory(dir_ / "a.semb"));
  EXPECT_EQ(io::read_bytes(dir_ / "b.semb"), first);
}

TEST_F(EmbeddingFileTest, RejectsMalformedFiles) {
  const auto good = io::serialize_embedding_file(sample_matrix(), nullptr);
  auto parse = [](std::vector<std::uint8_t> b) { return io::parse_embedding_file(b, "mem"); };

  auto truncated = good;
  truncated.pop_back();
  EXPECT_EQ(kind_of([&] { parse(truncated); }), ErrorKind::kFormat);
  EXPECT_NE(message_of([&] { parse(truncated); }).find("at byte"), std::string::npos);

  EXPECT_EQ(kind_of([&] { parse({'S', 'E', 'M'}); }), ErrorKind::kFormat);

  auto magic = good;
  magic[0] = 'X';
  EXPECT_EQ(kind_of([&] { parse(magic); }), ErrorKind::kFormat);

  auto version = good;
  version[4] = 2;
  EXPECT_EQ(kind_of([&] { parse(version); }), ErrorKind::kFormat);

  auto zero_rows = good;
  std::fill(zero_rows.begin() + 8, zero_rows.begin() + 16, 0);
  EXPECT_EQ(kind_of([&] { parse(zero_rows); }), ErrorKind::kFormat);

  auto zero_dim = good;
  std::fill(zero_dim.begin() + 16, zero_dim.begin() + 24, 0);
  EXPECT_EQ(kind_of([&] { parse(zero_dim); }), ErrorKind::kFormat);

  auto nan = good;
  const std::uint32_t bits = 0x7FC00000u;
  std::memcpy(nan.data() + 24, &bits, 4);
  EXPECT_EQ(kind_of([&] { parse(nan); }), ErrorKind::kFormat);

  std::vector<std::uint32_t> labels{1, 2};
  auto bad_count = io::serialize_embedding_file(sample_matrix(), &labels);
  bad_count[24 + 24] = 3;
  EXPECT_EQ(kind_of([&] { parse(bad_count); }), ErrorKind::kFormat);

  EXPECT_EQ(kind_of([&] { io::parse_embedding_file(good, "mem", 5); }), ErrorKind::kFormat);
  EXPECT_NO_THROW(io::parse_embedding_file(good, "mem", 6));
}

TEST_F(EmbeddingFileTest, HugeHeaderIsRejectedBeforeReading) {
  auto bytes = io::serialize_embedding_file(sample_matrix(), nullptr);
  for (int b = 8; b < 16; ++b) bytes[b] = 0xFF;
  io::write_bytes(dir_ / "huge.semb", bytes);
  EXPECT_EQ(kind_of([&] { io::read_embedding_file(dir_ / "huge.semb"); }), ErrorKind::kFormat);
  EXPECT_EQ(kind_of([&] { io::read_embedding_file(dir_ / "missing.semb"); }), ErrorKind::kIo);
}

TEST_F(EmbeddingFileTest, WriterRejectsBadInput) {
  EXPECT_EQ(kind_of([&] { io::serialize_embedding_file(EmbeddingMatrix(3), nullptr); }), ErrorKind::kInvalidInput);
  const std::vector<std::uint32_t> labels{1};
  EXPECT_EQ(kind_of([&] { io::serialize_embedding_file(sample_matrix(), &labels); }), ErrorKind::kInvalidInput);
  EXPECT_EQ(kind_of([&] { io::write_embedding_file(dir_ / "no" / "such" / "dir.semb", sample_matrix()); }),
            ErrorKind::kIo);
}

TEST(Dataset, ParsesStringAndIntegerLabels) {
  const auto d = io::parse_dataset(
      "{\"text\": \"stocks rally\", \"label\": \"business\"}\n"
      "\n"
      "{\"text\": \"goal!\", \"label\": \"sports\"}\r\n"
      "{\"text\": \"markets\", \"label\": \"business\"}\n",
      "d.jsonl");
  EXPECT_EQ(d.texts, (std::vector<std::string>{"stocks rally", "goal!", "markets"}));
  EXPECT_EQ(d.classes, (std::vector<std::string>{"business", "sports"}));
  EXPECT_EQ(d.labels, (std::vector<std::uint32_t>{0, 1, 0}));

  const auto numeric = io::parse_dataset("{\"text\":\"a\",\"label\":2}\n{\"text\":\"b\",\"label\":0}\n", "n");
  EXPECT_EQ(numeric.labels, (std::vector<std::uint32_t>{1, 0}));
}

TEST(Dataset, ErrorsCarryLineNumbers) {
  const std::string bad = "{\"text\":\"a\",\"label\":\"x\"}\n{\"text\":\"b\"}\n";
  EXPECT_EQ(kind_of([&] { io::parse_dataset(bad, "d.jsonl"); }), ErrorKind::kFormat);
  EXPECT_NE(message_of([&] { io::parse_dataset(bad, "d.jsonl"); }).find("d.jsonl:2"), std::string::npos);
  EXPECT_EQ(kind_of([] { io::parse_dataset("not json\n", "d"); }), ErrorKind::kFormat);
  EXPECT_EQ(kind_of([] { io::parse_dataset("{\"text\":1,\"label\":\"x\"}\n", "d"); }), ErrorKind::kFormat);
  EXPECT_EQ(kind_of([] { io::parse_dataset("{\"text\":\"a\",\"label\":1.5}\n", "d"); }), ErrorKind::kFormat);
  EXPECT_EQ(kind_of([] { io::parse_dataset("\n\n", "d"); }), ErrorKind::kFormat);
}

using DatasetFile = TempDir;

TEST_F(DatasetFile, WriteThenRead) {
  const std::vector<std::string> texts{"naïve \"quote\"", "line\nbreak", "plain"};
  const std::vector<std::string> labels{"b", "a", "b"};
  io::write_dataset(dir_ / "d.jsonl", texts, labels);
  const auto d = io::read_dataset(dir_ / "d.jsonl");
  EXPECT_EQ(d.texts, texts);
  EXPECT_EQ(d.label_names, labels);
  EXPECT_EQ(d.labels, (std::vector<std::uint32_t>{1, 0, 1}));
}

ap::ClusterModel small_model() {
  ap::ClusterModel m;
  m.exemplars = {1, 3};
  m.labels = {0, 0, 1, 1};
  m.sizes = {2, 2};
  m.iterations = 57;
  m.converged = true;
  return m;
}

TEST(ClusterModelJson, RoundTrip) {
  const auto m = small_model();
  const auto back = io::cluster_model_from_json(io::cluster_model_to_json(m), "m");
  EXPECT_TRUE(back.same_clustering(m));
  EXPECT_EQ(back.sizes, m.sizes);
  EXPECT_EQ(back.iterations, 57u);
  EXPECT_TRUE(back.converged);
  EXPECT_EQ(io::cluster_model_to_json(m)["digest"], io::hex64(m.digest()));
}

TEST(ClusterModelJson, DetectsTampering) {
  const auto good = io::cluster_model_to_json(small_model());
  auto tampered = [&](auto mutate) {
    auto j = good;
    mutate(j);
    return kind_of([&] { io::cluster_model_from_json(j, "m"); });
  };
  EXPECT_EQ(tampered([](auto& j) { j["labels"][0] = 1; }), ErrorKind::kFormat);
  EXPECT_EQ(tampered([](auto& j) { j["digest"] = "0000000000000000"; }), ErrorKind::kFormat);
  EXPECT_EQ(tampered([](auto& j) { j["exemplars"] = {3, 1}; }), ErrorKind::kFormat);
  EXPECT_EQ(tampered([](auto& j) { j["labels"][2] = 5; }), ErrorKind::kFormat);
  EXPECT_EQ(tampered([](auto& j) { j["points"] = 9; }), ErrorKind::kFormat);
  EXPECT_EQ(tampered([](auto& j) { j["version"] = 2; }), ErrorKind::kFormat);
  EXPECT_EQ(tampered([](auto& j) { j.erase("sizes"); }), ErrorKind::kFormat);
  EXPECT_EQ(tampered([](auto& j) { j["sizes"] = {3, 1}; }), ErrorKind::kFormat);
}

using BitstreamFile = TempDir;

TEST_F(BitstreamFile, RoundTrip) {
  semcomp::huffman::BitStream bits;
  bits.push_bits(0b1011001, 7);
  io::write_bitstream(dir_ / "x.bits", bits);
  EXPECT_EQ(io::read_bitstream(dir_ / "x.bits"), bits);
  EXPECT_EQ(io::read_bytes(dir_ / "x.bits").size(), 9u);
}

semcomp::pipeline::PipelineReport report(const std::string& which, std::vector<std::uint64_t> bits) {
  semcomp::pipeline::PipelineReport r;
  r.approach = which == "q" ? semcomp::pipeline::Approach::kQuantization : semcomp::pipeline::Approach::kConventional;
  r.block_size = which == "q" ? 0 : 1;
  r.memory_size = which == "q" ? 20 : 0;
  r.message_bits = std::move(bits);
  for (auto b : r.message_bits) r.total_bits += b;
  r.n_messages = r.message_bits.size();
  r.predictions.assign(r.n_messages, 0);
  r.correct = r.n_messages;
  r.accuracy = 1.0;
  return r;
}

using Reports = TempDir;

TEST_F(Reports, CsvAndMarkdownAgreeWithTotals) {
  auto conv = report("c", {40, 60});
  auto quant = report("q", {5, 5});
  conv.baseline_bits = 100;
  quant.baseline_bits = 100;
  const std::vector<semcomp::pipeline::PipelineReport> reports{conv, quant};
  io::write_text(dir_ / "reports.csv", io::reports_csv(reports));
  io::write_text(dir_ / "messages.csv", io::messages_csv(reports, {0, 0}));
  const auto rows = io::read_and_verify_reports(dir_ / "reports.csv", dir_ / "messages.csv");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1].approach, "quantization");
  EXPECT_EQ(rows[1].total_bits, 10u);
  EXPECT_EQ(rows[1].compression_ratio, "10.0000");
  const auto md = io::markdown_table(io::to_rows(reports));
  EXPECT_NE(md.find("| Conventional | 100 | 100.00 |"), std::string::npos);
  EXPECT_NE(md.find("| Semantic Quantization | 10 | 100.00 |"), std::string::npos);
}

TEST_F(Reports, MismatchedTotalsAreInternalConsistencyErrors) {
  auto conv = report("c", {40, 60});
  io::write_text(dir_ / "messages.csv", io::messages_csv({conv}, {0, 0}));
  conv.total_bits = 101;
  io::write_text(dir_ / "reports.csv", io::reports_csv({conv}));
  EXPECT_EQ(kind_of([&] { io::read_and_verify_reports(dir_ / "reports.csv", dir_ / "messages.csv"); }),
            ErrorKind::kInternalConsistency);
  io::write_text(dir_ / "reports.csv", "wrong\n");
  EXPECT_EQ(kind_of([&] { io::read_and_verify_reports(dir_ / "reports.csv", dir_ / "messages.csv"); }),
            ErrorKind::kFormat);
}

TEST(BenchConfig, ParsesAndResolvesPaths) {
  const auto j = nlohmann::json::parse(R"({
    "dataset": "d.jsonl", "memory": "m.semb", "train": "/abs/t.semb", "test": "q.semb",
    "memory_size": 100, "k_knn": 9, "block_sizes": [2, 4], "output_dir": "out",
    "service_url": "http://localhost:1", "ap": {"damping": 0.7, "jitter_seed": 3}})");
  const auto c = semcomp::bench::parse_bench_config(j, "/base");
  EXPECT_EQ(c.dataset, fs::path("/base/d.jsonl"));
  EXPECT_EQ(c.train, fs::path("/abs/t.semb"));
  EXPECT_EQ(*c.test, fs::path("/base/q.semb"));
  EXPECT_EQ(c.memory_size, 100u);
  EXPECT_EQ(c.k_knn, 9u);
  EXPECT_EQ(c.block_sizes, (std::vector<std::size_t>{2, 4}));
  EXPECT_EQ(c.output_dir, fs::path("/base/out"));
  EXPECT_EQ(*c.service_url, "http://localhost:1");
  EXPECT_EQ(c.ap.damping, 0.7);
  EXPECT_EQ(c.ap.jitter_seed, 3u);
  EXPECT_EQ(c.ap.max_iterations, 500u);
  EXPECT_EQ(c.max_test_samples, 2000u);
}

TEST(BenchConfig, Errors) {
  EXPECT_EQ(kind_of([] { semcomp::bench::parse_bench_config(nlohmann::json::parse(R"({"dataset": "d"})"), "."); }),
            ErrorKind::kFormat);
  EXPECT_EQ(kind_of([] {
              semcomp::bench::parse_bench_config(
                  nlohmann::json::parse(R"({"dataset": "d", "memory": "m", "train": "t", "k_knn": "x"})"), ".");
            }),
            ErrorKind::kFormat);
  semcomp::bench::BenchConfig c;
  c.block_sizes = {0};
  EXPECT_EQ(kind_of([&] { c.validate(); }), ErrorKind::kInvalidInput);
}

TEST(BalancedSample, KeepsEverythingUnderTheCap) {
  const std::vector<std::uint32_t> labels{0, 1, 1, 2};
  EXPECT_EQ(semcomp::bench::balanced_sample(labels, 10, 0), (std::vector<std::size_t>{0, 1, 2, 3}));
}

TEST(BalancedSample, BalancesAndIsSeedDeterministic) {
  std::vector<std::uint32_t> labels;
  for (int i = 0; i < 3000; ++i) labels.push_back(static_cast<std::uint32_t>(i % 4));
  for (int i = 0; i < 100; ++i) labels.push_back(4);
  const auto a = semcomp::bench::balanced_sample(labels, 2000, 7);
  EXPECT_EQ(a.size(), 2000u);
  EXPECT_TRUE(std::is_sorted(a.begin(), a.end()));
  EXPECT_EQ(std::adjacent_find(a.begin(), a.end()), a.end());
  std::map<std::uint32_t, std::size_t> per_class;
  for (auto i : a) ++per_class[labels[i]];
  // The small class is taken whole; the rest share the remainder evenly.
  EXPECT_EQ(per_class[4], 100u);
  for (std::uint32_t c = 0; c < 4; ++c) EXPECT_EQ(per_class[c], 475u);
  EXPECT_EQ(semcomp::bench::balanced_sample(labels, 2000, 7), a);
  EXPECT_NE(semcomp::bench::balanced_sample(labels, 2000, 8), a);
}

using Bench = TempDir;

TEST_F(Bench, FixtureRunWritesEveryArtifact) {
  semcomp::fixture::write_fixture(dir_);
  auto config = semcomp::bench::read_bench_config(dir_ / "bench.json");
  const auto result = semcomp::bench::run_bench(config);
  ASSERT_EQ(result.reports.size(), 5u);
  for (const auto& r : result.reports) {
    EXPECT_EQ(r.accuracy, 1.0) << r.id();
    EXPECT_EQ(r.baseline_bits, result.reports.front().total_bits);
  }
  for (const char* name : {"reports.csv", "messages.csv", "reports.md", "sample.txt", "cluster_model.json",
                           "conventional-k1.bits", "conventional-k2.bits", "conventional-k3.bits",
                           "quantization.bits", "compression.bits"}) {
    EXPECT_TRUE(fs::exists(dir_ / "bench-out" / name)) << name;
  }
  EXPECT_NO_THROW(io::read_and_verify_reports(dir_ / "bench-out" / "reports.csv", dir_ / "bench-out" / "messages.csv"));
  const auto model = io::read_cluster_model(dir_ / "bench-out" / "cluster_model.json");
  EXPECT_TRUE(model.same_clustering(result.cluster_model));
}

TEST_F(Bench, BaselineBlockSizeIsAlwaysIncluded) {
  semcomp::fixture::write_fixture(dir_);
  auto config = semcomp::bench::read_bench_config(dir_ / "bench.json");
  config.block_sizes = {3};
  const auto result = semcomp::bench::run_bench(config);
  ASSERT_EQ(result.reports.size(), 4u);
  EXPECT_EQ(result.reports[0].id(), "conventional-k1");
  EXPECT_EQ(result.reports[1].id(), "conventional-k3");
}

TEST_F(Bench, InputErrors) {
  semcomp::fixture::write_fixture(dir_);
  auto config = semcomp::bench::read_bench_config(dir_ / "bench.json");
  auto too_big = config;
  too_big.memory_size = 100000;
  EXPECT_EQ(kind_of([&] { semcomp::bench::run_bench(too_big); }), ErrorKind::kInvalidInput);
  auto no_test = config;
  no_test.test.reset();
  no_test.service_url.reset();
  ::unsetenv("SEMCOMP_EMBED_URL");
  EXPECT_EQ(kind_of([&] { semcomp::bench::run_bench(no_test); }), ErrorKind::kInvalidInput);
  auto wrong_test = config;
  wrong_test.test = dir_ / "memory.semb";
  EXPECT_EQ(kind_of([&] { semcomp::bench::run_bench(wrong_test); }), ErrorKind::kInvalidInput);
}

TEST_F(Bench, BundledFixtureMatchesGenerator) {
  const fs::path bundled = SEMCOMP_FIXTURE_DIR;
  semcomp::fixture::write_fixture(dir_);
  for (const char* name : {"dataset.jsonl", "memory.semb", "train.semb", "test.semb", "bench.json"}) {
    EXPECT_EQ(io::read_bytes(dir_ / name), io::read_bytes(bundled / name)) << name;
  }
}

}  // namespace

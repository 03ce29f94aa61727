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

// semcomp: command line front end for the semantic compression toolkit.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "semcomp/affinity.hpp"
#include "semcomp/bench.hpp"
#include "semcomp/error.hpp"
#include "semcomp/huffman.hpp"
#include "semcomp/io.hpp"
#include "semcomp/knn.hpp"
#include "semcomp/pipelines.hpp"
#include "semcomp/semantic.hpp"
#include "semcomp/utf8.hpp"

namespace fs = std::filesystem;
using namespace semcomp;

namespace {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kFormatError = 2,
  kDesyncError = 3,
  kServiceError = 4,
  kInputError = 5,
  kIoError = 6,
};

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kFormat:
    case ErrorKind::kTruncation: return kFormatError;
    case ErrorKind::kDesync:
    case ErrorKind::kOutOfAlphabet:
    case ErrorKind::kInternalConsistency: return kDesyncError;
    case ErrorKind::kService:
    case ErrorKind::kProtocol: return kServiceError;
    case ErrorKind::kIo: return kIoError;
    case ErrorKind::kInvalidInput:
    case ErrorKind::kInvalidState:
    case ErrorKind::kDegenerateClustering: return kInputError;
  }
  return kUsage;
}

void add_ap_options(CLI::App& cmd, ap::APConfig& config) {
  cmd.add_option("--damping", config.damping, "Message damping in [0.5, 1)");
  cmd.add_option("--max-iterations", config.max_iterations, "Iteration cap");
  cmd.add_option("--convergence-window", config.convergence_window, "Stable iterations required to stop");
  cmd.add_option("--jitter-seed", config.jitter_seed, "Seed shared by encoder and decoder");
  cmd.add_option("--jitter-scale", config.jitter_scale, "Relative similarity jitter; 0 disables");
}

EmbeddingMemory load_memory(const std::string& path, std::size_t memory_size) {
  EmbeddingMemory memory = io::read_memory(path);
  return memory_size > 0 ? memory.prefix(memory_size) : memory;
}

// Symbol metadata that travels next to a payload but is not counted in it.
nlohmann::json read_json(const fs::path& path) {
  try {
    return nlohmann::json::parse(io::read_text(path));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kFormat, path.string() + ": " + e.what());
  }
}

std::string utf8_block(const std::u32string& block) { return utf8::encode(block); }

struct Options {
  std::string mode = "index";
  std::string dataset;
  std::string memory;
  std::string model;
  std::string input;
  std::string train;
  std::string meta;
  std::string out;
  std::string config;
  std::string dir;
  std::size_t block = 1;
  std::size_t memory_size = 0;
  std::size_t k = knn::kDefaultNeighbors;
  ap::APConfig ap;
};

int cmd_cluster(const Options& o) {
  const EmbeddingMemory memory = load_memory(o.memory, o.memory_size);
  const ap::ClusterModel model = ap::run(memory, o.ap);
  io::write_cluster_model(o.out, model);
  std::printf("clusters=%zu iterations=%u converged=%s digest=%s\n", model.cluster_count(), model.iterations,
              model.converged ? "true" : "false", io::hex64(model.digest()).c_str());
  return kOk;
}

std::vector<std::uint32_t> semantic_symbols(const EmbeddingMemory& memory,
                                            const EmbeddingMatrix& queries,
                                            const std::optional<ap::ClusterModel>& model) {
  std::vector<std::uint32_t> out;
  for (std::size_t i = 0; i < queries.rows(); ++i) {
    out.push_back(model ? ap::assign_to_exemplar(queries.row(i), *model, memory)
                        : static_cast<std::uint32_t>(quantize_index(queries.row(i), memory)));
  }
  return out;
}

int cmd_quantize(const Options& o) {
  const EmbeddingMemory memory = load_memory(o.memory, o.memory_size);
  const EmbeddingMatrix queries = io::read_embedding_file(o.input).matrix;
  std::optional<ap::ClusterModel> model;
  if (!o.model.empty()) model = io::read_cluster_model(o.model);
  std::string lines;
  for (auto s : semantic_symbols(memory, queries, model)) lines += std::to_string(s) + "\n";
  if (o.out.empty()) {
    std::cout << lines;
  } else {
    io::write_text(o.out, lines);
  }
  return kOk;
}

int cmd_encode(const Options& o) {
  huffman::BitStream payload;
  nlohmann::json meta = {{"mode", o.mode}};
  std::vector<std::uint64_t> message_bits;
  if (o.mode == "text") {
    const io::Dataset dataset = io::read_dataset(o.dataset);
    std::vector<huffman::BlockSymbols> messages;
    std::vector<std::u32string> stream;
    for (const auto& t : dataset.texts) {
      messages.push_back(huffman::block_symbolize(std::string_view(t), o.block));
      stream.insert(stream.end(), messages.back().blocks.begin(), messages.back().blocks.end());
    }
    const auto table = huffman::count_frequencies(stream);
    const auto code = huffman::build_code(table);
    std::vector<std::size_t> symbol_counts, char_counts;
    for (const auto& m : messages) {
      const auto before = payload.bit_length();
      huffman::encode_into(std::span<const std::u32string>(m.blocks), code, payload);
      message_bits.push_back(payload.bit_length() - before);
      symbol_counts.push_back(m.blocks.size());
      char_counts.push_back(m.char_count);
    }
    std::vector<std::string> alphabet;
    for (const auto& s : table.alphabet()) alphabet.push_back(utf8_block(s));
    meta["block_size"] = o.block;
    meta["symbol_counts"] = symbol_counts;
    meta["char_counts"] = char_counts;
    meta["alphabet"] = alphabet;
    meta["counts"] = table.counts();
  } else if (o.mode == "index" || o.mode == "cluster") {
    const EmbeddingMemory memory = load_memory(o.memory, o.memory_size);
    const EmbeddingMatrix queries = io::read_embedding_file(o.input).matrix;
    std::optional<ap::ClusterModel> model;
    if (o.mode == "cluster") {
      if (o.model.empty()) fail(ErrorKind::kInvalidInput, "--model is required for cluster mode");
      model = io::read_cluster_model(o.model);
      meta["digest"] = io::hex64(model->digest());
    }
    const auto code = model ? pipeline::label_code(*model) : pipeline::index_code(memory);
    for (auto s : semantic_symbols(memory, queries, model)) {
      const auto before = payload.bit_length();
      code.write(s, payload);
      message_bits.push_back(payload.bit_length() - before);
    }
    meta["memory_rows"] = memory.rows();
  } else {
    fail(ErrorKind::kInvalidInput, "unknown mode " + o.mode);
  }
  meta["messages"] = message_bits.size();
  meta["message_bits"] = message_bits;
  meta["total_bits"] = payload.bit_length();
  io::write_bitstream(o.out, payload);
  io::write_text(o.meta.empty() ? o.out + ".json" : o.meta, meta.dump(1) + "\n");
  std::printf("messages=%zu bits=%llu\n", message_bits.size(), static_cast<unsigned long long>(payload.bit_length()));
  return kOk;
}

int cmd_decode(const Options& o) {
  const huffman::BitStream payload = io::read_bitstream(o.input);
  const nlohmann::json meta = read_json(o.meta.empty() ? o.input + ".json" : o.meta);
  huffman::BitReader reader(payload);
  try {
    const std::string mode = meta.at("mode").get<std::string>();
    const std::size_t n = meta.at("messages").get<std::size_t>();
    if (mode == "text") {
      const auto alphabet = meta.at("alphabet").get<std::vector<std::string>>();
      const auto counts = meta.at("counts").get<std::vector<std::uint64_t>>();
      if (alphabet.size() != counts.size()) fail(ErrorKind::kFormat, "alphabet/counts length mismatch");
      std::map<std::u32string, std::uint64_t> table;
      for (std::size_t i = 0; i < alphabet.size(); ++i) table.emplace(utf8::decode(alphabet[i]), counts[i]);
      const auto code = huffman::build_code(huffman::FrequencyTable<std::u32string>(table));
      const auto symbol_counts = meta.at("symbol_counts").get<std::vector<std::size_t>>();
      const auto char_counts = meta.at("char_counts").get<std::vector<std::size_t>>();
      if (symbol_counts.size() != n || char_counts.size() != n) fail(ErrorKind::kFormat, "per-message metadata length");
      std::string lines;
      for (std::size_t i = 0; i < n; ++i) {
        const auto blocks = huffman::decode_from(reader, code, symbol_counts[i]);
        lines += nlohmann::json{{"text", huffman::unblock(blocks, char_counts[i])}}.dump() + "\n";
      }
      io::write_text(o.out, lines);
    } else if (mode == "index" || mode == "cluster") {
      const EmbeddingMemory memory = load_memory(o.memory, o.memory_size);
      if (meta.at("memory_rows").get<std::size_t>() != memory.rows()) {
        fail(ErrorKind::kDesync, "payload was encoded against a memory of " +
                                     std::to_string(meta.at("memory_rows").get<std::size_t>()) + " rows, not " +
                                     std::to_string(memory.rows()));
      }
      std::optional<ap::ClusterModel> model;
      if (mode == "cluster") {
        if (o.model.empty()) fail(ErrorKind::kInvalidInput, "--model is required for cluster mode");
        model = io::read_cluster_model(o.model);
        if (meta.at("digest").get<std::string>() != io::hex64(model->digest())) {
          fail(ErrorKind::kDesync, "payload was encoded against a different cluster model");
        }
      }
      const auto code = model ? pipeline::label_code(*model) : pipeline::index_code(memory);
      EmbeddingMatrix reconstructed(memory.dim());
      for (std::size_t i = 0; i < n; ++i) {
        const std::uint32_t s = code.read(reader);
        reconstructed.append(memory.row(model ? model->exemplars.at(s) : s));
      }
      io::write_embedding_file(o.out, reconstructed);
    } else {
      fail(ErrorKind::kFormat, "unknown mode " + mode);
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kFormat, std::string("payload metadata: ") + e.what());
  }
  std::printf("decoded %llu bits\n", static_cast<unsigned long long>(reader.position()));
  return kOk;
}

int cmd_classify(const Options& o) {
  const knn::KnnModel model(io::read_labeled(o.train), o.k);
  const io::EmbeddingFile queries = io::read_embedding_file(o.input);
  const auto predictions = knn::predict_batch(queries.matrix, model);
  std::string lines;
  for (auto p : predictions) lines += std::to_string(p) + "\n";
  if (!o.out.empty()) io::write_text(o.out, lines);
  if (queries.labels) {
    std::printf("accuracy=%s\n", io::format_fixed(pipeline::accuracy(predictions, *queries.labels), 6).c_str());
  } else if (o.out.empty()) {
    std::cout << lines;
  }
  return kOk;
}

int cmd_report(const Options& o) {
  const fs::path dir = o.dir;
  const auto rows = io::read_and_verify_reports(dir / "reports.csv", dir / "messages.csv");
  std::cout << io::markdown_table(rows);
  for (const auto& r : rows) {
    if (!r.compression_ratio.empty()) std::printf("compression_ratio[%s]=%s\n", r.approach.c_str(), r.compression_ratio.c_str());
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semantic text compression: quantize, cluster, code and classify embeddings"};
  app.require_subcommand(1);
  Options o;

  auto* cluster = app.add_subcommand("cluster", "Cluster the embedding memory with affinity propagation");
  cluster->add_option("--memory", o.memory, "Memory embedding file")->required();
  cluster->add_option("--memory-size", o.memory_size, "Use only the first N rows (0 = all)");
  cluster->add_option("--out", o.out, "Cluster model JSON")->required();
  add_ap_options(*cluster, o.ap);

  auto* quantize = app.add_subcommand("quantize", "Map embeddings to memory indices or cluster labels");
  quantize->add_option("--memory", o.memory, "Memory embedding file")->required();
  quantize->add_option("--memory-size", o.memory_size, "Use only the first N rows (0 = all)");
  quantize->add_option("--input", o.input, "Query embedding file")->required();
  quantize->add_option("--model", o.model, "Cluster model; emits labels instead of indices");
  quantize->add_option("--out", o.out, "Output file, one symbol per line (default stdout)");

  auto* encode = app.add_subcommand("encode", "Huffman-code messages into a bitstream");
  encode->add_option("--mode", o.mode, "text | index | cluster")->check(CLI::IsMember({"text", "index", "cluster"}));
  encode->add_option("--dataset", o.dataset, "JSONL dataset (text mode)");
  encode->add_option("--block", o.block, "Characters per symbol (text mode)")->check(CLI::PositiveNumber);
  encode->add_option("--memory", o.memory, "Memory embedding file");
  encode->add_option("--memory-size", o.memory_size, "Use only the first N rows (0 = all)");
  encode->add_option("--model", o.model, "Cluster model (cluster mode)");
  encode->add_option("--input", o.input, "Message embeddings (index/cluster mode)");
  encode->add_option("--out", o.out, "Bitstream output")->required();
  encode->add_option("--meta", o.meta, "Side metadata JSON (default <out>.json)");

  auto* decode = app.add_subcommand("decode", "Decode a bitstream back into texts or embeddings");
  decode->add_option("--in", o.input, "Bitstream input")->required();
  decode->add_option("--meta", o.meta, "Side metadata JSON (default <in>.json)");
  decode->add_option("--memory", o.memory, "Memory embedding file (index/cluster mode)");
  decode->add_option("--memory-size", o.memory_size, "Use only the first N rows (0 = all)");
  decode->add_option("--model", o.model, "Cluster model (cluster mode)");
  decode->add_option("--out", o.out, "JSONL texts or embedding file")->required();

  auto* classify = app.add_subcommand("classify", "KNN-classify embeddings against a labeled train set");
  classify->add_option("--train", o.train, "Labeled train embedding file")->required();
  classify->add_option("--input", o.input, "Embeddings to classify")->required();
  classify->add_option("--k", o.k, "Neighbor count")->check(CLI::PositiveNumber);
  classify->add_option("--out", o.out, "Predictions, one per line");

  std::string bench_out, bench_url, bench_test;
  std::vector<std::size_t> bench_blocks;
  std::optional<std::size_t> bench_memory_size, bench_k, bench_cap;
  std::optional<std::uint64_t> bench_seed, bench_jitter_seed;
  std::optional<double> bench_damping, bench_jitter_scale;
  std::optional<std::uint32_t> bench_max_iter, bench_window;
  std::string bench_dataset, bench_memory, bench_train;
  auto* bench_cmd = app.add_subcommand("bench", "Run every pipeline and write report files");
  bench_cmd->add_option("--config", o.config, "Bench config JSON");
  bench_cmd->add_option("--dataset", bench_dataset, "JSONL dataset");
  bench_cmd->add_option("--memory", bench_memory, "Memory embedding file");
  bench_cmd->add_option("--train", bench_train, "Labeled train embedding file");
  bench_cmd->add_option("--test", bench_test, "Embeddings of the dataset records");
  bench_cmd->add_option("--memory-size", bench_memory_size, "Memory rows N (0 = all)");
  bench_cmd->add_option("--k", bench_k, "KNN neighbor count");
  bench_cmd->add_option("--block-sizes", bench_blocks, "Conventional block sizes");
  bench_cmd->add_option("--max-test-samples", bench_cap, "Evaluation cap");
  bench_cmd->add_option("--sample-seed", bench_seed, "Seed for class-balanced sampling");
  bench_cmd->add_option("--damping", bench_damping, "AP damping");
  bench_cmd->add_option("--max-iterations", bench_max_iter, "AP iteration cap");
  bench_cmd->add_option("--convergence-window", bench_window, "AP stable-iteration window");
  bench_cmd->add_option("--jitter-seed", bench_jitter_seed, "AP jitter seed");
  bench_cmd->add_option("--jitter-scale", bench_jitter_scale, "AP jitter scale");
  bench_cmd->add_option("--service-url", bench_url, "Embedding service base URL (env SEMCOMP_EMBED_URL overrides)");
  bench_cmd->add_option("--out", bench_out, "Output directory");

  auto* report = app.add_subcommand("report", "Verify bench outputs and print the results table");
  report->add_option("--dir", o.dir, "Bench output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*cluster) return cmd_cluster(o);
    if (*quantize) return cmd_quantize(o);
    if (*encode) return cmd_encode(o);
    if (*decode) return cmd_decode(o);
    if (*classify) return cmd_classify(o);
    if (*report) return cmd_report(o);
    if (*bench_cmd) {
      bench::BenchConfig config;
      if (!o.config.empty()) config = bench::read_bench_config(o.config);
      if (!bench_dataset.empty()) config.dataset = bench_dataset;
      if (!bench_memory.empty()) config.memory = bench_memory;
      if (!bench_train.empty()) config.train = bench_train;
      if (!bench_test.empty()) config.test = fs::path(bench_test);
      if (bench_memory_size) config.memory_size = *bench_memory_size;
      if (bench_k) config.k_knn = *bench_k;
      if (!bench_blocks.empty()) config.block_sizes = bench_blocks;
      if (bench_cap) config.max_test_samples = *bench_cap;
      if (bench_seed) config.sample_seed = *bench_seed;
      if (bench_damping) config.ap.damping = *bench_damping;
      if (bench_max_iter) config.ap.max_iterations = *bench_max_iter;
      if (bench_window) config.ap.convergence_window = *bench_window;
      if (bench_jitter_seed) config.ap.jitter_seed = *bench_jitter_seed;
      if (bench_jitter_scale) config.ap.jitter_scale = *bench_jitter_scale;
      if (!bench_url.empty()) config.service_url = bench_url;
      if (!bench_out.empty()) config.output_dir = bench_out;
      if (config.dataset.empty() || config.memory.empty() || config.train.empty()) {
        std::cerr << "bench needs --config or --dataset/--memory/--train\n";
        return kUsage;
      }
      const auto result = bench::run_bench(config);
      std::cout << io::markdown_table(io::to_rows(result.reports));
      std::cout << "outputs written to " << config.output_dir.string() << "\n";
      return kOk;
    }
  } catch (const Error& e) {
    std::cerr << "semcomp: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "semcomp: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}

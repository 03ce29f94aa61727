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
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "semcomp/error.hpp"
#include "semcomp/utf8.hpp"

namespace semcomp::huffman {

/// Symbol counts over an alphabet kept in ascending symbol order. The rank
/// of a symbol (its position in that order) is its identity for all
/// tie-breaking.
template <typename Symbol>
class FrequencyTable {
 public:
  FrequencyTable() = default;

  explicit FrequencyTable(const std::map<Symbol, std::uint64_t>& counts) {
    if (counts.empty()) fail(ErrorKind::kInvalidInput, "frequency table needs at least one symbol");
    alphabet_.reserve(counts.size());
    counts_.reserve(counts.size());
    for (const auto& [symbol, count] : counts) {
      if (count == 0) fail(ErrorKind::kInvalidInput, "frequency counts must be positive");
      alphabet_.push_back(symbol);
      counts_.push_back(count);
    }
  }

  const std::vector<Symbol>& alphabet() const noexcept { return alphabet_; }
  const std::vector<std::uint64_t>& counts() const noexcept { return counts_; }
  std::size_t size() const noexcept { return alphabet_.size(); }

  std::uint64_t total() const noexcept {
    std::uint64_t t = 0;
    for (auto c : counts_) t += c;
    return t;
  }

  std::optional<std::size_t> rank_of(const Symbol& symbol) const {
    auto it = std::lower_bound(alphabet_.begin(), alphabet_.end(), symbol);
    if (it == alphabet_.end() || symbol < *it) return std::nullopt;
    return static_cast<std::size_t>(it - alphabet_.begin());
  }

  friend bool operator==(const FrequencyTable&, const FrequencyTable&) = default;

 private:
  std::vector<Symbol> alphabet_;
  std::vector<std::uint64_t> counts_;
};

template <typename Symbol>
FrequencyTable<Symbol> count_frequencies(std::span<const Symbol> symbols) {
  if (symbols.empty()) fail(ErrorKind::kInvalidInput, "cannot count frequencies of an empty stream");
  std::map<Symbol, std::uint64_t> counts;
  for (const auto& s : symbols) ++counts[s];
  return FrequencyTable<Symbol>(counts);
}

template <typename Symbol>
FrequencyTable<Symbol> count_frequencies(const std::vector<Symbol>& symbols) {
  return count_frequencies(std::span<const Symbol>(symbols));
}

/// Packed bit sequence, most significant bit first within each byte. Pad
/// bits after bit_length are always zero.
class BitStream {
 public:
  std::uint64_t bit_length() const noexcept { return bit_length_; }
  const std::vector<std::uint8_t>& bytes() const noexcept { return bytes_; }

  void push_bit(bool bit) {
    if (bit_length_ % 8 == 0) bytes_.push_back(0);
    if (bit) bytes_.back() |= static_cast<std::uint8_t>(0x80u >> (bit_length_ % 8));
    ++bit_length_;
  }

  /// Appends the low `length` bits of `value`, high bit first.
  void push_bits(std::uint64_t value, unsigned length) {
    for (unsigned b = length; b-- > 0;) push_bit(((value >> b) & 1u) != 0);
  }

  void append(const BitStream& other) {
    for (std::uint64_t i = 0; i < other.bit_length_; ++i) push_bit(other.bit(i));
  }

  bool bit(std::uint64_t index) const noexcept {
    return ((bytes_[index / 8] >> (7 - index % 8)) & 1u) != 0;
  }

  /// 8-byte little-endian bit count, then the packed bytes.
  std::vector<std::uint8_t> serialize() const {
    std::vector<std::uint8_t> out(8 + bytes_.size());
    for (int b = 0; b < 8; ++b) out[b] = static_cast<std::uint8_t>(bit_length_ >> (8 * b));
    std::copy(bytes_.begin(), bytes_.end(), out.begin() + 8);
    return out;
  }

  static BitStream deserialize(std::span<const std::uint8_t> data) {
    if (data.size() < 8) fail(ErrorKind::kFormat, "bitstream shorter than its 8-byte header at offset 0");
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(data[b]) << (8 * b);
    const std::uint64_t expected = bits / 8 + (bits % 8 != 0 ? 1 : 0);
    if (data.size() - 8 != expected) {
      fail(ErrorKind::kFormat, "bitstream declares " + std::to_string(bits) + " bits (" +
                                   std::to_string(expected) + " bytes) but carries " +
                                   std::to_string(data.size() - 8) + " payload bytes at offset 8");
    }
    BitStream out;
    out.bytes_.assign(data.begin() + 8, data.end());
    out.bit_length_ = bits;
    if (bits % 8 != 0) {
      const auto pad_mask = static_cast<std::uint8_t>(0xFFu >> (bits % 8));
      if ((out.bytes_.back() & pad_mask) != 0) {
        fail(ErrorKind::kFormat, "nonzero pad bits at offset " + std::to_string(data.size() - 1));
      }
    }
    return out;
  }

  friend bool operator==(const BitStream&, const BitStream&) = default;

 private:
  std::vector<std::uint8_t> bytes_;
  std::uint64_t bit_length_ = 0;
};

/// Sequential reader over a BitStream; successive decodes share the cursor.
class BitReader {
 public:
  explicit BitReader(const BitStream& stream) : stream_(&stream) {}

  bool exhausted() const noexcept { return position_ >= stream_->bit_length(); }
  std::uint64_t position() const noexcept { return position_; }

  bool next() {
    if (exhausted()) fail(ErrorKind::kTruncation, "bitstream exhausted at bit " + std::to_string(position_));
    return stream_->bit(position_++);
  }

 private:
  const BitStream* stream_;
  std::uint64_t position_ = 0;
};

inline constexpr unsigned kMaxCodeLength = 64;

/// Canonical prefix code. Codewords are assigned in (length, symbol) order,
/// so the table alone reproduces the code on both sides.
template <typename Symbol>
class HuffmanCode {
 public:
  HuffmanCode(std::vector<Symbol> alphabet, std::vector<unsigned> lengths)
      : alphabet_(std::move(alphabet)), lengths_(std::move(lengths)) {
    if (alphabet_.empty() || alphabet_.size() != lengths_.size()) {
      fail(ErrorKind::kInvalidInput, "code needs one length per symbol");
    }
    for (std::size_t i = 1; i < alphabet_.size(); ++i) {
      if (!(alphabet_[i - 1] < alphabet_[i])) {
        fail(ErrorKind::kInvalidInput, "code alphabet must be strictly ascending");
      }
    }
    assign_codewords();
  }

  const std::vector<Symbol>& alphabet() const noexcept { return alphabet_; }
  const std::vector<unsigned>& lengths() const noexcept { return lengths_; }
  const std::vector<std::uint64_t>& codewords() const noexcept { return codewords_; }
  std::size_t size() const noexcept { return alphabet_.size(); }

  std::optional<std::size_t> rank_of(const Symbol& symbol) const {
    auto it = std::lower_bound(alphabet_.begin(), alphabet_.end(), symbol);
    if (it == alphabet_.end() || symbol < *it) return std::nullopt;
    return static_cast<std::size_t>(it - alphabet_.begin());
  }

  std::size_t require_rank(const Symbol& symbol) const {
    auto rank = rank_of(symbol);
    if (!rank) fail(ErrorKind::kOutOfAlphabet, "symbol is not in the code's alphabet");
    return *rank;
  }

  unsigned length_of(const Symbol& symbol) const { return lengths_[require_rank(symbol)]; }

  void write(const Symbol& symbol, BitStream& out) const {
    const std::size_t r = require_rank(symbol);
    out.push_bits(codewords_[r], lengths_[r]);
  }

  const Symbol& read(BitReader& in) const {
    std::uint64_t code = 0;
    for (unsigned len = 1; len <= max_length_; ++len) {
      code = (code << 1) | (in.next() ? 1u : 0u);
      const std::uint64_t count = count_by_length_[len];
      if (count != 0 && code >= first_code_[len] && code - first_code_[len] < count) {
        return alphabet_[by_code_[offset_by_length_[len] + (code - first_code_[len])]];
      }
    }
    fail(ErrorKind::kInternalConsistency, "bit pattern matches no codeword");
  }

  /// Sum of 2^-length; exactly 1 for a complete code.
  long double kraft_sum() const noexcept {
    long double sum = 0;
    for (unsigned l : lengths_) sum += std::ldexp(1.0L, -static_cast<int>(l));
    return sum;
  }

 private:
  void assign_codewords() {
    max_length_ = 0;
    for (unsigned l : lengths_) {
      if (l == 0 || l > kMaxCodeLength) {
        fail(ErrorKind::kInvalidInput, "code length " + std::to_string(l) + " outside [1, 64]");
      }
      max_length_ = std::max(max_length_, l);
    }
    by_code_.resize(alphabet_.size());
    for (std::size_t i = 0; i < by_code_.size(); ++i) by_code_[i] = i;
    std::stable_sort(by_code_.begin(), by_code_.end(),
                     [&](std::size_t a, std::size_t b) { return lengths_[a] < lengths_[b]; });
    count_by_length_.assign(max_length_ + 1, 0);
    first_code_.assign(max_length_ + 1, 0);
    offset_by_length_.assign(max_length_ + 1, 0);
    for (unsigned l : lengths_) ++count_by_length_[l];

    codewords_.assign(alphabet_.size(), 0);
    std::uint64_t code = 0;
    std::size_t offset = 0;
    for (unsigned len = 1; len <= max_length_; ++len) {
      first_code_[len] = code;
      offset_by_length_[len] = offset;
      for (std::uint64_t j = 0; j < count_by_length_[len]; ++j) {
        codewords_[by_code_[offset + j]] = code + j;
      }
      offset += count_by_length_[len];
      code += count_by_length_[len];
      if (len < 64) {
        if (code > (std::uint64_t{1} << len)) {
          fail(ErrorKind::kInvalidInput, "code lengths violate the Kraft inequality");
        }
        code <<= 1;
      }
    }
  }

  std::vector<Symbol> alphabet_;
  std::vector<unsigned> lengths_;
  std::vector<std::uint64_t> codewords_;
  std::vector<std::size_t> by_code_;
  std::vector<std::uint64_t> count_by_length_;
  std::vector<std::uint64_t> first_code_;
  std::vector<std::size_t> offset_by_length_;
  unsigned max_length_ = 0;
};

/// Code lengths of an optimal prefix code for `counts`. Merges pick the two
/// lightest subtrees, breaking weight ties by the smallest symbol rank each
/// subtree contains. A lone symbol gets length 1.
inline std::vector<unsigned> optimal_code_lengths(const std::vector<std::uint64_t>& counts) {
  const std::size_t n = counts.size();
  if (n == 0) fail(ErrorKind::kInvalidInput, "no symbols");
  if (n == 1) return {1};

  // Node ids 0..n-1 are leaves; merged nodes follow.
  std::vector<std::size_t> parent(2 * n - 1, 0);
  using Entry = std::tuple<std::uint64_t, std::size_t, std::size_t>;  // weight, min rank, node
  std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> heap;
  for (std::size_t i = 0; i < n; ++i) heap.emplace(counts[i], i, i);
  std::size_t next = n;
  while (heap.size() > 1) {
    auto [w1, r1, a] = heap.top();
    heap.pop();
    auto [w2, r2, b] = heap.top();
    heap.pop();
    parent[a] = next;
    parent[b] = next;
    heap.emplace(w1 + w2, std::min(r1, r2), next);
    ++next;
  }
  const std::size_t root = next - 1;
  std::vector<unsigned> depth(2 * n - 1, 0);
  for (std::size_t node = root; node-- > 0;) depth[node] = depth[parent[node]] + 1;
  std::vector<unsigned> lengths(depth.begin(), depth.begin() + static_cast<std::ptrdiff_t>(n));
  for (unsigned l : lengths) {
    if (l > kMaxCodeLength) fail(ErrorKind::kInvalidInput, "optimal code would exceed 64-bit codewords");
  }
  return lengths;
}

template <typename Symbol>
HuffmanCode<Symbol> build_code(const FrequencyTable<Symbol>& freqs) {
  return HuffmanCode<Symbol>(freqs.alphabet(), optimal_code_lengths(freqs.counts()));
}

template <typename Symbol>
void encode_into(std::span<const Symbol> symbols, const HuffmanCode<Symbol>& code, BitStream& out) {
  for (const auto& s : symbols) code.write(s, out);
}

template <typename Symbol>
BitStream encode(std::span<const Symbol> symbols, const HuffmanCode<Symbol>& code) {
  BitStream out;
  encode_into(symbols, code, out);
  return out;
}

template <typename Symbol>
BitStream encode(const std::vector<Symbol>& symbols, const HuffmanCode<Symbol>& code) {
  return encode(std::span<const Symbol>(symbols), code);
}

template <typename Symbol>
std::vector<Symbol> decode_from(BitReader& in, const HuffmanCode<Symbol>& code, std::size_t n_symbols) {
  std::vector<Symbol> out;
  out.reserve(n_symbols);
  for (std::size_t i = 0; i < n_symbols; ++i) out.push_back(code.read(in));
  return out;
}

template <typename Symbol>
std::vector<Symbol> decode(const BitStream& stream, const HuffmanCode<Symbol>& code, std::size_t n_symbols) {
  BitReader in(stream);
  return decode_from(in, code, n_symbols);
}

template <typename Symbol>
std::uint64_t total_bits(std::span<const Symbol> symbols, const HuffmanCode<Symbol>& code) {
  std::uint64_t bits = 0;
  for (const auto& s : symbols) bits += code.length_of(s);
  return bits;
}

template <typename Symbol>
std::uint64_t total_bits(const std::vector<Symbol>& symbols, const HuffmanCode<Symbol>& code) {
  return total_bits(std::span<const Symbol>(symbols), code);
}

/// Text cut into K-character symbols. The last symbol is NUL-padded to K
/// characters; `char_count` records the true length.
struct BlockSymbols {
  std::vector<std::u32string> blocks;
  std::size_t char_count = 0;
  std::size_t block_size = 1;
};

inline BlockSymbols block_symbolize(std::u32string_view text, std::size_t block_size) {
  if (block_size == 0) fail(ErrorKind::kInvalidInput, "block size must be at least 1");
  BlockSymbols out;
  out.char_count = text.size();
  out.block_size = block_size;
  out.blocks.reserve((text.size() + block_size - 1) / block_size);
  for (std::size_t pos = 0; pos < text.size(); pos += block_size) {
    std::u32string block(text.substr(pos, block_size));
    block.resize(block_size, U'\0');
    out.blocks.push_back(std::move(block));
  }
  return out;
}

/// UTF-8 overload; characters are Unicode scalar values.
inline BlockSymbols block_symbolize(std::string_view utf8_text, std::size_t block_size) {
  return block_symbolize(std::u32string_view(utf8::decode(utf8_text)), block_size);
}

inline std::string unblock(const std::vector<std::u32string>& blocks, std::size_t char_count) {
  std::u32string joined;
  for (const auto& b : blocks) joined += b;
  if (joined.size() < char_count) {
    fail(ErrorKind::kInternalConsistency, "blocks hold fewer characters than recorded");
  }
  joined.resize(char_count);
  return utf8::encode(joined);
}

}  // namespace semcomp::huffman

// Copyright 2026 The branchlm Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef BRANCHLM_CORPUS_HPP
#define BRANCHLM_CORPUS_HPP

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "branchlm/packet.hpp"

namespace blm {

/// A vocabulary element. Direction outcomes are represented as the two
/// synthetic tokens TakenDir / NotTakenDir, which compete in frequency
/// ranking like any address. Unknown is the reserved out-of-vocabulary
/// token and never appears in a corpus itself.
struct Token {
  enum class Kind : std::uint8_t { Unknown, TakenDir, NotTakenDir, Addr };

  Kind kind = Kind::Unknown;
  std::uint64_t address = 0;  // meaningful when kind == Addr

  static Token unknown() { return {}; }
  static Token taken_dir() { return {Kind::TakenDir, 0}; }
  static Token not_taken_dir() { return {Kind::NotTakenDir, 0}; }
  static Token addr(std::uint64_t address) { return {Kind::Addr, address}; }
  static Token from_event(const BranchEvent& e) {
    if (e.kind == BranchEvent::Kind::Target) return addr(e.address);
    return e.taken ? taken_dir() : not_taken_dir();
  }

  friend bool operator==(const Token&, const Token&) = default;

  /// Frequency-tie ordering: TakenDir < NotTakenDir < Addr by ascending
  /// address. (Unknown sorts first but is never ranked.)
  friend bool operator<(const Token& a, const Token& b) {
    if (a.kind != b.kind) return a.kind < b.kind;
    return a.address < b.address;
  }
};

struct TokenHash {
  std::size_t operator()(const Token& t) const {
    std::uint64_t x = t.address ^ (static_cast<std::uint64_t>(t.kind) << 56);
    x ^= x >> 33;
    x *= 0xff51afd7ed558ccdULL;
    x ^= x >> 33;
    return static_cast<std::size_t>(x);
  }
};

/// Bijection between K tokens and indices 0..K-1, with Unknown pinned at
/// index 0. Immutable once built; safe to share across threads.
class Vocabulary {
 public:
  Vocabulary() : index_to_token_{Token::unknown()} { rebuild_map(); }
  explicit Vocabulary(std::vector<Token> index_to_token);

  std::uint32_t size() const { return static_cast<std::uint32_t>(index_to_token_.size()); }
  const Token& token(std::uint32_t index) const { return index_to_token_[index]; }

  /// Index of `t`, or 0 (Unknown) when out of vocabulary.
  std::uint32_t index_of(const Token& t) const {
    auto it = token_to_index_.find(t);
    return it == token_to_index_.end() ? 0 : it->second;
  }

  /// Text form: line i holds the token of index i as `UNK`, `T`, `N`, or
  /// `0x%016x`. Line count = K.
  std::string to_text() const;
  static Vocabulary from_text(const std::string& text);

 private:
  void rebuild_map();

  std::vector<Token> index_to_token_;
  std::unordered_map<Token, std::uint32_t, TokenHash> token_to_index_;
};

/// Vocabulary-index encoding of one segment's events.
struct TokenSequence {
  std::vector<std::uint32_t> indices;
  std::size_t segment_index = 0;

  friend bool operator==(const TokenSequence&, const TokenSequence&) = default;
};

struct DatasetSplit {
  std::vector<TokenSequence> train;
  std::vector<TokenSequence> validation;
  std::uint64_t seed = 0;
};

/// Unknown at index 0 plus the K-1 most frequent tokens of the corpus,
/// in descending frequency order, ties broken by Token ordering. Yields a
/// smaller vocabulary when fewer than K-1 distinct tokens exist.
Vocabulary build_vocabulary(const std::vector<TraceSegment>& segments, std::uint32_t k);

/// Maps each event to its vocabulary index (0 for out-of-vocabulary).
TokenSequence tokenize(const TraceSegment& segment, const Vocabulary& vocab);

/// Fixed-length windows seq[i..i+l) for i = 0, stride, 2*stride, ... while
/// i+l <= len(seq). Requires l >= 2 and stride >= 1.
std::vector<TokenSequence> window(const TokenSequence& seq, std::size_t l, std::size_t stride);

/// Fisher-Yates shuffle under SplitMix64(seed), then the last
/// floor(validation_fraction * N) windows become the validation set.
/// Requires validation_fraction in [0, 1).
DatasetSplit split(std::vector<TokenSequence> windows, double validation_fraction,
                   std::uint64_t seed);

}  // namespace blm

#endif  // BRANCHLM_CORPUS_HPP

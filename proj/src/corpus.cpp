// Copyright 2026 The branchlm Authors
// SPDX-License-Identifier: Apache-2.0

#include "branchlm/corpus.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "branchlm/rng.hpp"

namespace blm {

Vocabulary::Vocabulary(std::vector<Token> index_to_token)
    : index_to_token_(std::move(index_to_token)) {
  if (index_to_token_.empty() || index_to_token_[0] != Token::unknown()) {
    throw std::invalid_argument("vocabulary must hold Unknown at index 0");
  }
  rebuild_map();
  if (token_to_index_.size() != index_to_token_.size()) {
    throw std::invalid_argument("vocabulary tokens must be distinct");
  }
}

void Vocabulary::rebuild_map() {
  token_to_index_.clear();
  token_to_index_.reserve(index_to_token_.size());
  for (std::uint32_t i = 0; i < index_to_token_.size(); ++i) {
    token_to_index_.emplace(index_to_token_[i], i);
  }
}

std::string Vocabulary::to_text() const {
  std::string out;
  for (const Token& t : index_to_token_) {
    switch (t.kind) {
      case Token::Kind::Unknown:
        out += "UNK\n";
        break;
      case Token::Kind::TakenDir:
        out += "T\n";
        break;
      case Token::Kind::NotTakenDir:
        out += "N\n";
        break;
      case Token::Kind::Addr: {
        char buf[24];
        std::snprintf(buf, sizeof(buf), "0x%016llx",
                      static_cast<unsigned long long>(t.address));
        out += buf;
        out += '\n';
        break;
      }
    }
  }
  return out;
}

Vocabulary Vocabulary::from_text(const std::string& text) {
  std::vector<Token> tokens;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line == "UNK") {
      tokens.push_back(Token::unknown());
    } else if (line == "T") {
      tokens.push_back(Token::taken_dir());
    } else if (line == "N") {
      tokens.push_back(Token::not_taken_dir());
    } else if (line.size() > 2 && line[0] == '0' && (line[1] == 'x' || line[1] == 'X')) {
      std::uint64_t addr = 0;
      try {
        std::size_t used = 0;
        addr = std::stoull(line.substr(2), &used, 16);
        if (used != line.size() - 2) throw std::invalid_argument(line);
      } catch (const std::exception&) {
        throw std::invalid_argument("bad vocabulary line: " + line);
      }
      tokens.push_back(Token::addr(addr));
    } else {
      throw std::invalid_argument("bad vocabulary line: " + line);
    }
  }
  return Vocabulary(std::move(tokens));
}

Vocabulary build_vocabulary(const std::vector<TraceSegment>& segments, std::uint32_t k) {
  if (k < 1) throw std::invalid_argument("vocabulary size must be >= 1");

  std::unordered_map<Token, std::uint64_t, TokenHash> counts;
  for (const TraceSegment& segment : segments) {
    for (const BranchEvent& event : segment.events) {
      ++counts[Token::from_event(event)];
    }
  }

  std::vector<std::pair<Token, std::uint64_t>> ranked(counts.begin(), counts.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (ranked.size() > static_cast<std::size_t>(k) - 1) {
    ranked.resize(k - 1);
  }

  std::vector<Token> tokens;
  tokens.reserve(ranked.size() + 1);
  tokens.push_back(Token::unknown());
  for (const auto& [token, count] : ranked) {
    tokens.push_back(token);
  }
  return Vocabulary(std::move(tokens));
}

TokenSequence tokenize(const TraceSegment& segment, const Vocabulary& vocab) {
  TokenSequence seq;
  seq.segment_index = segment.segment_index;
  seq.indices.reserve(segment.events.size());
  for (const BranchEvent& event : segment.events) {
    seq.indices.push_back(vocab.index_of(Token::from_event(event)));
  }
  return seq;
}

std::vector<TokenSequence> window(const TokenSequence& seq, std::size_t l, std::size_t stride) {
  if (l < 2) throw std::invalid_argument("window length must be >= 2");
  if (stride < 1) throw std::invalid_argument("stride must be >= 1");

  std::vector<TokenSequence> out;
  for (std::size_t i = 0; i + l <= seq.indices.size(); i += stride) {
    TokenSequence w;
    w.segment_index = seq.segment_index;
    w.indices.assign(seq.indices.begin() + static_cast<std::ptrdiff_t>(i),
                     seq.indices.begin() + static_cast<std::ptrdiff_t>(i + l));
    out.push_back(std::move(w));
  }
  return out;
}

DatasetSplit split(std::vector<TokenSequence> windows, double validation_fraction,
                   std::uint64_t seed) {
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
    throw std::invalid_argument("validation fraction must be in [0, 1)");
  }

  SplitMix64 rng(seed);
  for (std::size_t i = windows.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng.next_below(i));
    std::swap(windows[i - 1], windows[j]);
  }

  const std::size_t n_val =
      static_cast<std::size_t>(validation_fraction * static_cast<double>(windows.size()));
  const std::size_t n_train = windows.size() - n_val;

  DatasetSplit result;
  result.seed = seed;
  result.train.assign(windows.begin(), windows.begin() + static_cast<std::ptrdiff_t>(n_train));
  result.validation.assign(windows.begin() + static_cast<std::ptrdiff_t>(n_train), windows.end());
  return result;
}

}  // namespace blm

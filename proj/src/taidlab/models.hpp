// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The taidlab Authors

#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "taidlab/matrix.hpp"
#include "taidlab/prob.hpp"

namespace taidlab {

using Token = std::uint32_t;
using Sequence = std::vector<Token>;

/// Token sequences over a vocabulary of `vocab`, tagged with the Markov order
/// of the chain that produced them.
struct Corpus {
  std::size_t vocab = 0;
  int order = 0;
  std::vector<Sequence> sequences;

  void validate() const;
  std::size_t token_count() const;
};

/// Address of one next-token prediction: sequences[sequence][position] is the
/// target and the tokens before it are the history.
struct Position {
  std::uint32_t sequence = 0;
  std::uint32_t position = 0;
};

std::vector<Position> all_positions(const Corpus& corpus);

inline std::span<const Token> history_of(const Corpus& corpus, Position pos) {
  return std::span<const Token>(corpus.sequences[pos.sequence]).first(pos.position);
}

/// Next-token logits per k-gram context.
///
/// With capacity C >= V^k contexts are exact k-gram histories (row index is the
/// history read as a base-V number, most recent token least significant).
/// Otherwise histories are hashed into C buckets. One extra default row serves
/// histories shorter than k.
class TabularModel {
 public:
  TabularModel(std::size_t vocab, int order, std::size_t capacity, std::uint64_t hash_seed = 0);

  std::size_t vocab() const noexcept { return vocab_; }
  int order() const noexcept { return order_; }
  std::size_t contexts() const noexcept { return contexts_; }
  bool exact() const noexcept { return exact_; }
  std::uint64_t hash_seed() const noexcept { return hash_seed_; }
  std::size_t default_row() const noexcept { return contexts_; }
  std::size_t parameter_count() const noexcept { return logits_.size(); }

  std::size_t context_index(std::span<const Token> history) const;

  Matrix& logits() noexcept { return logits_; }
  const Matrix& logits() const noexcept { return logits_; }

  std::span<const double> row_for(std::span<const Token> history) const {
    return logits_.row(context_index(history));
  }
  LogitVector forward(std::span<const Token> history) const;

 private:
  std::size_t vocab_;
  int order_;
  std::size_t contexts_;
  bool exact_;
  std::uint64_t hash_seed_;
  Matrix logits_;
};

/// Bias plus a one-hot bucket of the last `order` tokens (hashed into
/// `buckets`). Histories shorter than `order` get the bias feature only.
struct LinearFeatureMap {
  int order = 1;
  std::size_t buckets = 0;
  std::uint64_t hash_seed = 0;

  std::size_t dimension() const noexcept { return 1 + buckets; }
  /// Index of the active bucket feature, or dimension() when only the bias fires.
  std::size_t active_bucket(std::span<const Token> history) const;
  std::vector<double> features(std::span<const Token> history) const;
};

/// logits = features(history) . weights, with weights F x V.
class LinearModel {
 public:
  LinearModel(std::size_t vocab, LinearFeatureMap feature_map);

  std::size_t vocab() const noexcept { return weights_.cols(); }
  const LinearFeatureMap& feature_map() const noexcept { return feature_map_; }
  std::size_t parameter_count() const noexcept { return weights_.size(); }

  Matrix& weights() noexcept { return weights_; }
  const Matrix& weights() const noexcept { return weights_; }

  void forward_into(std::span<const Token> history, std::span<double> out) const;
  LogitVector forward(std::span<const Token> history) const;

 private:
  LinearFeatureMap feature_map_;
  Matrix weights_;
};

using StudentModel = std::variant<TabularModel, LinearModel>;

std::size_t vocab_of(const StudentModel& model);
void forward_into(const StudentModel& model, std::span<const Token> history,
                  std::span<double> out);
LogitVector forward(const StudentModel& model, std::span<const Token> history);

/// A Markov chain with known transition rows; the ground truth for corpora.
class MarkovSource {
 public:
  explicit MarkovSource(TabularModel truth);

  const TabularModel& truth() const noexcept { return truth_; }
  std::size_t vocab() const noexcept { return truth_.vocab(); }
  int order() const noexcept { return truth_.order(); }

  Token sample_next(std::span<const Token> history, double u) const;

 private:
  TabularModel truth_;
  Matrix cumulative_;
};

/// Order-k chain whose rows are Zipf(s) weights over token ids perturbed by
/// log-normal noise of scale `noise` per context. Order 0 is the pure Zipf
/// unigram. The default row (short histories) is the pure Zipf unigram.
MarkovSource make_zipf_source(std::uint64_t seed, std::size_t vocab, int order, double zipf_s,
                              double noise = 1.0);

struct BimodalSpec {
  std::size_t vocab = 64;
  std::size_t shared = 4;          // tokens of the mode common to every context
  std::size_t specific = 4;        // tokens of the per-context mode
  double shared_logit = 3.0;
  double specific_logit = 4.0;
  double background_logit = 0.0;
};

/// Order-1 chain where each row has two modes: a block shared by all contexts
/// and a block that depends on the previous token.
MarkovSource make_bimodal_source(std::uint64_t seed, const BimodalSpec& spec);

Corpus sample_corpus(const MarkovSource& source, std::uint64_t seed, std::size_t length,
                     std::size_t n_sequences);

Corpus generate_corpus(std::uint64_t seed, std::size_t vocab, int order, double zipf_s,
                       std::size_t length, std::size_t n_sequences);

/// Add-`smoothing` next-token estimate per context; capacity 0 means exact.
TabularModel fit_teacher(const Corpus& corpus, std::size_t vocab, int order, double smoothing,
                         std::size_t capacity = 0, std::uint64_t hash_seed = 0);

/// Mean negative log-likelihood of every token in `corpus` under `model`.
double cross_entropy(const TabularModel& model, const Corpus& corpus);

// Text serialization with a versioned magic line; see docs/file_formats.md.
void save_corpus(const Corpus& corpus, std::ostream& out);
Corpus load_corpus(std::istream& in);
void save_model(const StudentModel& model, std::ostream& out);
StudentModel load_model(std::istream& in);

void save_corpus_file(const Corpus& corpus, const std::string& path);
Corpus load_corpus_file(const std::string& path);
void save_model_file(const StudentModel& model, const std::string& path);
StudentModel load_model_file(const std::string& path);

}  // namespace taidlab

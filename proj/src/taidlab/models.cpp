// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The taidlab Authors

#include "taidlab/models.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "taidlab/error.hpp"
#include "taidlab/rng.hpp"
#include "taidlab/text.hpp"

namespace taidlab {

namespace {

constexpr std::string_view kCorpusMagic = "TAIDLAB-CORPUS v1";
constexpr std::string_view kModelMagic = "TAIDLAB-MODEL v1";
constexpr std::size_t kMaxTableEntries = std::size_t{1} << 26;

// V^k, or 0 when it would exceed kMaxTableEntries.
std::size_t exact_context_count(std::size_t vocab, int order) {
  std::size_t count = 1;
  for (int i = 0; i < order; ++i) {
    if (count > kMaxTableEntries / vocab) return 0;
    count *= vocab;
  }
  return count;
}

std::uint64_t hash_history(std::span<const Token> history, int order, std::uint64_t seed) {
  std::uint64_t h = mix64(seed ^ 0x7461696c61627321ULL);
  for (int i = 0; i < order; ++i) {
    h = mix64(h ^ (static_cast<std::uint64_t>(history[history.size() - 1 - i]) + 1));
  }
  return h;
}

void validate_model_shape(std::size_t vocab, int order) {
  require(vocab >= 2, ErrorCode::kInvalidParameter, "vocabulary size must be >= 2");
  require(order >= 0 && order <= 8, ErrorCode::kInvalidParameter,
          "context order must be in [0, 8], got " + std::to_string(order));
}

void write_row(std::ostream& out, std::span<const double> row) {
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (j) out << ' ';
    out << format_double(row[j]);
  }
  out << '\n';
}

// Reads "key value" header lines.
std::string expect_field(std::istream& in, std::string_view key) {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorCode::kIo,
          "unexpected end of file, wanted field '" + std::string(key) + "'");
  const auto parts = split(trim(line), ' ');
  require(parts.size() == 2 && parts[0] == key, ErrorCode::kIo,
          "malformed header line '" + line + "', wanted '" + std::string(key) + " <value>'");
  return parts[1];
}

long long expect_int(std::istream& in, std::string_view key) {
  const auto value = parse_int(expect_field(in, key));
  require(value.has_value(), ErrorCode::kIo, "field '" + std::string(key) + "' is not an integer");
  return *value;
}

std::uint64_t expect_uint(std::istream& in, std::string_view key) {
  const auto value = parse_uint(expect_field(in, key));
  require(value.has_value(), ErrorCode::kIo,
          "field '" + std::string(key) + "' is not an unsigned integer");
  return *value;
}

void read_row(std::istream& in, std::span<double> row) {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorCode::kIo, "truncated matrix data");
  const auto parts = split(trim(line), ' ');
  require(parts.size() == row.size(), ErrorCode::kIo, "matrix row has wrong length");
  for (std::size_t j = 0; j < row.size(); ++j) {
    const auto v = parse_double(parts[j]);
    require(v.has_value() && std::isfinite(*v), ErrorCode::kIo, "bad matrix entry '" + parts[j] + "'");
    row[j] = *v;
  }
}

}  // namespace

void Corpus::validate() const {
  require(vocab >= 2, ErrorCode::kInvalidInput, "corpus vocabulary must be >= 2");
  require(!sequences.empty(), ErrorCode::kInvalidInput, "corpus has no sequences");
  for (const auto& seq : sequences) {
    require(!seq.empty(), ErrorCode::kInvalidInput, "corpus contains an empty sequence");
    for (Token tok : seq) {
      require(tok < vocab, ErrorCode::kInvalidInput,
              "token " + std::to_string(tok) + " outside vocabulary of " + std::to_string(vocab));
    }
  }
}

std::size_t Corpus::token_count() const {
  std::size_t total = 0;
  for (const auto& seq : sequences) total += seq.size();
  return total;
}

std::vector<Position> all_positions(const Corpus& corpus) {
  std::vector<Position> out;
  out.reserve(corpus.token_count());
  for (std::uint32_t s = 0; s < corpus.sequences.size(); ++s) {
    for (std::uint32_t p = 0; p < corpus.sequences[s].size(); ++p) out.push_back({s, p});
  }
  return out;
}

// ---------------------------------------------------------------------------
// TabularModel

TabularModel::TabularModel(std::size_t vocab, int order, std::size_t capacity,
                           std::uint64_t hash_seed)
    : vocab_(vocab), order_(order), contexts_(0), exact_(false), hash_seed_(hash_seed) {
  validate_model_shape(vocab, order);
  const std::size_t exact_count = exact_context_count(vocab, order);
  if (capacity == 0 || (exact_count != 0 && capacity >= exact_count)) {
    require(exact_count != 0, ErrorCode::kInvalidParameter,
            "exact context table for vocab " + std::to_string(vocab) + " order " +
                std::to_string(order) + " is too large; give a capacity");
    contexts_ = exact_count;
    exact_ = true;
  } else {
    contexts_ = capacity;
  }
  require(contexts_ * vocab <= kMaxTableEntries, ErrorCode::kInvalidParameter,
          "tabular model too large");
  logits_ = Matrix(contexts_ + 1, vocab, 0.0);
}

std::size_t TabularModel::context_index(std::span<const Token> history) const {
  if (history.size() < static_cast<std::size_t>(order_)) return default_row();
  if (exact_) {
    std::size_t index = 0;
    for (int i = order_ - 1; i >= 0; --i) {
      index = index * vocab_ + history[history.size() - 1 - i];
    }
    return index;
  }
  return static_cast<std::size_t>(hash_history(history, order_, hash_seed_) % contexts_);
}

LogitVector TabularModel::forward(std::span<const Token> history) const {
  const auto row = row_for(history);
  return LogitVector(std::vector<double>(row.begin(), row.end()));
}

// ---------------------------------------------------------------------------
// LinearModel

std::size_t LinearFeatureMap::active_bucket(std::span<const Token> history) const {
  if (buckets == 0 || history.size() < static_cast<std::size_t>(order)) return dimension();
  return 1 + static_cast<std::size_t>(hash_history(history, order, hash_seed) % buckets);
}

std::vector<double> LinearFeatureMap::features(std::span<const Token> history) const {
  std::vector<double> phi(dimension(), 0.0);
  phi[0] = 1.0;
  const std::size_t bucket = active_bucket(history);
  if (bucket < dimension()) phi[bucket] = 1.0;
  return phi;
}

LinearModel::LinearModel(std::size_t vocab, LinearFeatureMap feature_map)
    : feature_map_(feature_map), weights_(feature_map.dimension(), vocab, 0.0) {
  validate_model_shape(vocab, feature_map.order);
}

void LinearModel::forward_into(std::span<const Token> history, std::span<double> out) const {
  const auto bias = weights_.row(0);
  std::copy(bias.begin(), bias.end(), out.begin());
  const std::size_t bucket = feature_map_.active_bucket(history);
  if (bucket < feature_map_.dimension()) {
    const auto w = weights_.row(bucket);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += w[j];
  }
}

LogitVector LinearModel::forward(std::span<const Token> history) const {
  std::vector<double> out(vocab());
  forward_into(history, out);
  return LogitVector(std::move(out));
}

std::size_t vocab_of(const StudentModel& model) {
  return std::visit([](const auto& m) { return m.vocab(); }, model);
}

void forward_into(const StudentModel& model, std::span<const Token> history,
                  std::span<double> out) {
  if (const auto* tab = std::get_if<TabularModel>(&model)) {
    const auto row = tab->row_for(history);
    std::copy(row.begin(), row.end(), out.begin());
  } else {
    std::get<LinearModel>(model).forward_into(history, out);
  }
}

LogitVector forward(const StudentModel& model, std::span<const Token> history) {
  return std::visit([&](const auto& m) { return m.forward(history); }, model);
}

// ---------------------------------------------------------------------------
// Sources and corpora

MarkovSource::MarkovSource(TabularModel truth)
    : truth_(std::move(truth)), cumulative_(truth_.logits().rows(), truth_.vocab()) {
  for (std::size_t r = 0; r < cumulative_.rows(); ++r) {
    softmax_into(truth_.logits().row(r), cumulative_.row(r));
    auto row = cumulative_.row(r);
    std::partial_sum(row.begin(), row.end(), row.begin());
  }
}

Token MarkovSource::sample_next(std::span<const Token> history, double u) const {
  const auto row = cumulative_.row(truth_.context_index(history));
  const double target = u * row.back();
  const auto it = std::upper_bound(row.begin(), row.end(), target);
  return static_cast<Token>(std::min<std::size_t>(it - row.begin(), row.size() - 1));
}

MarkovSource make_zipf_source(std::uint64_t seed, std::size_t vocab, int order, double zipf_s,
                              double noise) {
  validate_model_shape(vocab, order);
  require(std::isfinite(zipf_s) && zipf_s > 0.0, ErrorCode::kInvalidParameter,
          "zipf exponent must be > 0");
  require(std::isfinite(noise) && noise >= 0.0, ErrorCode::kInvalidParameter,
          "transition noise must be >= 0");
  TabularModel truth(vocab, order, 0);
  std::vector<double> base(vocab);
  for (std::size_t y = 0; y < vocab; ++y) base[y] = -zipf_s * std::log(static_cast<double>(y + 1));

  Matrix& logits = truth.logits();
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    auto row = logits.row(r);
    std::copy(base.begin(), base.end(), row.begin());
    if (order > 0 && r != truth.default_row()) {
      Rng rng(derive_seed(seed, r));
      for (double& x : row) x += noise * rng.normal();
    }
    log_softmax_into(row, row);
  }
  return MarkovSource(std::move(truth));
}

MarkovSource make_bimodal_source(std::uint64_t seed, const BimodalSpec& spec) {
  validate_model_shape(spec.vocab, 1);
  require(spec.shared + spec.specific < spec.vocab, ErrorCode::kInvalidParameter,
          "bimodal modes must leave at least one background token");
  require(spec.specific >= 1, ErrorCode::kInvalidParameter, "bimodal specific mode needs tokens");
  TabularModel truth(spec.vocab, 1, 0);
  Matrix& logits = truth.logits();
  std::vector<Token> pool(spec.vocab - spec.shared);
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    auto row = logits.row(r);
    std::fill(row.begin(), row.end(), spec.background_logit);
    for (std::size_t y = 0; y < spec.shared; ++y) row[y] = spec.shared_logit;
    if (r != truth.default_row()) {
      std::iota(pool.begin(), pool.end(), static_cast<Token>(spec.shared));
      Rng rng(derive_seed(seed, r));
      // Partial Fisher-Yates: the first `specific` pool entries form the mode.
      for (std::size_t i = 0; i < spec.specific; ++i) {
        std::swap(pool[i], pool[i + rng.below(pool.size() - i)]);
        row[pool[i]] = spec.specific_logit;
      }
    }
    log_softmax_into(row, row);
  }
  return MarkovSource(std::move(truth));
}

Corpus sample_corpus(const MarkovSource& source, std::uint64_t seed, std::size_t length,
                     std::size_t n_sequences) {
  require(length >= 1 && n_sequences >= 1, ErrorCode::kInvalidParameter,
          "corpus needs length >= 1 and at least one sequence");
  Corpus corpus;
  corpus.vocab = source.vocab();
  corpus.order = source.order();
  corpus.sequences.resize(n_sequences);
  Rng rng(derive_seed(seed, 0xc0));
  for (auto& seq : corpus.sequences) {
    seq.reserve(length);
    for (std::size_t i = 0; i < length; ++i) seq.push_back(source.sample_next(seq, rng.uniform()));
  }
  return corpus;
}

Corpus generate_corpus(std::uint64_t seed, std::size_t vocab, int order, double zipf_s,
                       std::size_t length, std::size_t n_sequences) {
  const MarkovSource source = make_zipf_source(seed, vocab, order, zipf_s);
  return sample_corpus(source, seed, length, n_sequences);
}

TabularModel fit_teacher(const Corpus& corpus, std::size_t vocab, int order, double smoothing,
                         std::size_t capacity, std::uint64_t hash_seed) {
  require(std::isfinite(smoothing) && smoothing > 0.0, ErrorCode::kInvalidParameter,
          "smoothing must be > 0");
  require(corpus.vocab == vocab, ErrorCode::kDimension, "corpus vocabulary differs from model");
  corpus.validate();
  TabularModel model(vocab, order, capacity, hash_seed);
  Matrix counts(model.logits().rows(), vocab, 0.0);
  for (const auto& seq : corpus.sequences) {
    const std::span<const Token> tokens(seq);
    for (std::size_t p = 0; p < tokens.size(); ++p) {
      counts(model.context_index(tokens.first(p)), tokens[p]) += 1.0;
    }
  }
  for (std::size_t r = 0; r < counts.rows(); ++r) {
    const auto c = counts.row(r);
    const double total = std::accumulate(c.begin(), c.end(), 0.0);
    const double log_denominator = std::log(total + smoothing * static_cast<double>(vocab));
    auto out = model.logits().row(r);
    for (std::size_t y = 0; y < vocab; ++y) out[y] = std::log(c[y] + smoothing) - log_denominator;
  }
  return model;
}

double cross_entropy(const TabularModel& model, const Corpus& corpus) {
  require(corpus.vocab == model.vocab(), ErrorCode::kDimension,
          "corpus vocabulary differs from model");
  double total = 0.0;
  std::size_t count = 0;
  for (const auto& seq : corpus.sequences) {
    const std::span<const Token> tokens(seq);
    for (std::size_t p = 0; p < tokens.size(); ++p) {
      const auto row = model.row_for(tokens.first(p));
      total += log_sum_exp(row) - row[tokens[p]];
      ++count;
    }
  }
  require(count > 0, ErrorCode::kInvalidInput, "corpus is empty");
  return total / static_cast<double>(count);
}

// ---------------------------------------------------------------------------
// Serialization

void save_corpus(const Corpus& corpus, std::ostream& out) {
  out << kCorpusMagic << '\n'
      << "vocab " << corpus.vocab << '\n'
      << "order " << corpus.order << '\n'
      << "sequences " << corpus.sequences.size() << '\n';
  for (const auto& seq : corpus.sequences) {
    out << seq.size();
    for (Token tok : seq) out << ' ' << tok;
    out << '\n';
  }
}

Corpus load_corpus(std::istream& in) {
  std::string line;
  require(std::getline(in, line) && trim(line) == kCorpusMagic, ErrorCode::kIo,
          "not a taidlab corpus file (missing '" + std::string(kCorpusMagic) + "')");
  Corpus corpus;
  corpus.vocab = static_cast<std::size_t>(expect_int(in, "vocab"));
  corpus.order = static_cast<int>(expect_int(in, "order"));
  const long long n = expect_int(in, "sequences");
  require(n >= 0, ErrorCode::kIo, "negative sequence count");
  corpus.sequences.resize(static_cast<std::size_t>(n));
  for (auto& seq : corpus.sequences) {
    require(static_cast<bool>(std::getline(in, line)), ErrorCode::kIo, "truncated corpus file");
    const auto parts = split(trim(line), ' ');
    const auto len = parse_int(parts[0]);
    require(len && *len >= 0 && static_cast<std::size_t>(*len) + 1 == parts.size(), ErrorCode::kIo,
            "sequence length prefix does not match its token count");
    seq.reserve(static_cast<std::size_t>(*len));
    for (std::size_t i = 1; i < parts.size(); ++i) {
      const auto tok = parse_int(parts[i]);
      require(tok && *tok >= 0, ErrorCode::kIo, "bad token '" + parts[i] + "'");
      seq.push_back(static_cast<Token>(*tok));
    }
  }
  try {
    corpus.validate();
  } catch (const Error& e) {
    fail(ErrorCode::kIo, std::string("corpus file failed validation: ") + e.what());
  }
  return corpus;
}

void save_model(const StudentModel& model, std::ostream& out) {
  out << kModelMagic << '\n';
  if (const auto* tab = std::get_if<TabularModel>(&model)) {
    out << "kind tabular\n"
        << "vocab " << tab->vocab() << '\n'
        << "order " << tab->order() << '\n'
        << "contexts " << tab->contexts() << '\n'
        << "exact " << (tab->exact() ? 1 : 0) << '\n'
        << "hash_seed " << tab->hash_seed() << '\n'
        << "rows " << tab->logits().rows() << '\n';
    for (std::size_t r = 0; r < tab->logits().rows(); ++r) write_row(out, tab->logits().row(r));
  } else {
    const auto& lin = std::get<LinearModel>(model);
    out << "kind linear\n"
        << "vocab " << lin.vocab() << '\n'
        << "order " << lin.feature_map().order << '\n'
        << "buckets " << lin.feature_map().buckets << '\n'
        << "hash_seed " << lin.feature_map().hash_seed << '\n'
        << "rows " << lin.weights().rows() << '\n';
    for (std::size_t r = 0; r < lin.weights().rows(); ++r) write_row(out, lin.weights().row(r));
  }
}

StudentModel load_model(std::istream& in) {
  std::string line;
  require(std::getline(in, line) && trim(line) == kModelMagic, ErrorCode::kIo,
          "not a taidlab model file (missing '" + std::string(kModelMagic) + "')");
  const std::string kind = expect_field(in, "kind");
  const auto vocab = static_cast<std::size_t>(expect_int(in, "vocab"));
  const auto order = static_cast<int>(expect_int(in, "order"));
  if (kind == "tabular") {
    const auto contexts = static_cast<std::size_t>(expect_int(in, "contexts"));
    const bool exact = expect_int(in, "exact") != 0;
    const auto seed = expect_uint(in, "hash_seed");
    TabularModel model(vocab, order, exact ? 0 : contexts, seed);
    require(model.contexts() == contexts && model.exact() == exact, ErrorCode::kIo,
            "tabular header is inconsistent with its vocab/order");
    require(static_cast<std::size_t>(expect_int(in, "rows")) == model.logits().rows(),
            ErrorCode::kIo, "tabular row count mismatch");
    for (std::size_t r = 0; r < model.logits().rows(); ++r) read_row(in, model.logits().row(r));
    return model;
  }
  require(kind == "linear", ErrorCode::kIo, "unknown model kind '" + kind + "'");
  LinearFeatureMap map;
  map.order = order;
  map.buckets = static_cast<std::size_t>(expect_int(in, "buckets"));
  map.hash_seed = expect_uint(in, "hash_seed");
  LinearModel model(vocab, map);
  require(static_cast<std::size_t>(expect_int(in, "rows")) == model.weights().rows(),
          ErrorCode::kIo, "linear row count mismatch");
  for (std::size_t r = 0; r < model.weights().rows(); ++r) read_row(in, model.weights().row(r));
  return model;
}

void save_corpus_file(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorCode::kIo, "cannot write " + path);
  save_corpus(corpus, out);
}

Corpus load_corpus_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::kIo, "cannot read " + path);
  return load_corpus(in);
}

void save_model_file(const StudentModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorCode::kIo, "cannot write " + path);
  save_model(model, out);
}

StudentModel load_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::kIo, "cannot read " + path);
  return load_model(in);
}

}  // namespace taidlab

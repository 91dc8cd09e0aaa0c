#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "emopred/corpus.hpp"
#include "emopred/embeddings.hpp"
#include "emopred/encoders.hpp"
#include "emopred/eval.hpp"
#include "emopred/tape.hpp"

namespace emopred {

// The four BLSTM systems: word or character token representations, each
// optionally concatenated with fixed pretrained vectors.
enum class Variant { kWord, kChar, kWordPre, kCharPre };

const char* variant_name(Variant v);            // "word", "char", "word+pre", ...
Variant variant_from_name(const std::string&);  // throws std::invalid_argument
bool variant_uses_chars(Variant v);
bool variant_uses_pretrained(Variant v);

struct BlstmConfig {
  std::size_t word_dim = 100;
  std::size_t hidden = 100;
  std::size_t char_dim = 32;
  std::size_t char_hidden = 50;
  std::size_t s_dim = 100;
  std::size_t max_tokens = 64;  // truncate right
  std::size_t max_chars = 32;
  double oov_replace_prob = 0.5;
};

struct TrainConfig {
  std::size_t epochs = 30;
  std::size_t batch_size = 32;
  double lr = 1e-3;
  std::string optimizer = "adam";
  std::uint64_t seed = 1;
  std::size_t patience = 5;  // early stopping on dev macro-F1
  // When > 0, also compute training accuracy per epoch and stop once
  // reached (capacity experiments).
  double stop_train_acc = 0.0;
};

// Output emoji embeddings G (rows g_e) and biases q.
struct ClassifierHead {
  Parameter g;  // K x S
  Parameter q;  // K

  static ClassifierHead init(std::size_t k, std::size_t s_dim, Rng& rng);
  VarId logits(Tape& t, VarId s);
  void collect_params(std::vector<Parameter*>& out);
};

class BlstmModel {
 public:
  Variant variant = Variant::kWord;
  BlstmConfig config;
  Vocabulary vocab;
  LabelSet labels;
  OovPolicy oov;
  std::optional<EmbeddingTable> word_emb;
  std::optional<CharComposer> composer;
  BiEncoder word_enc;
  MessageProjection proj;
  ClassifierHead head;
  PretrainedVectors pretrained;  // frozen; empty unless a +P variant

  static BlstmModel init(Variant variant, const BlstmConfig& config,
                         Vocabulary vocab, CharVocab chars, LabelSet labels,
                         PretrainedVectors pretrained, Rng& rng);

  VarId forward_logits(Tape& t, std::span<const std::string> tokens, Mode mode,
                       Rng& oov_coin);

  // softmax(G s + q); eval mode, pure. Throws on an empty token list.
  std::vector<double> predict_distribution(std::span<const std::string> tokens);
  int predict_class(std::span<const std::string> tokens);

  std::vector<Parameter*> parameters();
};

struct EpochLog {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double dev_f1 = 0.0;
  double train_acc = -1.0;  // -1 when not computed
  double elapsed_s = 0.0;
};

struct BlstmTrainResult {
  BlstmModel model;
  std::vector<EpochLog> log;
};

// Mini-batch training of mean NLL; keeps the parameters of the best dev
// macro-F1 epoch. Aborts with diagnostics on NaN loss.
BlstmTrainResult train_blstm(const SplitCorpus& corpus, const LabelSet& labels,
                             Variant variant, const TrainConfig& train_config,
                             const BlstmConfig& model_config,
                             const PretrainedVectors* pretrained_vectors);

// --- TF-IDF bag-of-words baseline ---

struct TfidfVectorizer {
  std::vector<std::string> feature_tokens;  // selection order
  std::vector<double> idf;                  // aligned with feature_tokens
  std::unordered_map<std::string, int> index;
};

// idf = ln(N / df); tokens ranked by their maximum tf*idf over training
// messages, top_n kept (ties by token).
TfidfVectorizer build_tfidf(const std::vector<LabeledExample>& examples,
                            const Vocabulary& vocab, std::size_t top_n);

// Sparse tf*idf features sorted by feature id; counting makes the result
// independent of token order.
std::vector<std::pair<int, double>> tfidf_featurize(
    const TfidfVectorizer& vectorizer, std::span<const std::string> tokens);

// --- L2-regularized multinomial logistic regression ---

struct LogregProblem {
  std::size_t n_features = 0;
  std::size_t n_classes = 0;
  std::vector<std::vector<std::pair<int, double>>> rows;  // sorted by index
  std::vector<int> labels;
};

struct LogregOptions {
  double l2 = 1.0;      // lambda
  double tol = 1e-3;    // stop when the mean-objective gradient max-norm drops below
  std::size_t max_iter = 1000;
};

struct LogregResult {
  Tensor w;  // K x F
  Tensor b;  // K (unregularized)
  bool converged = false;
  std::size_t iterations = 0;
  double final_objective = 0.0;
  double final_grad_max = 0.0;
};

// Minimizes sum NLL + (l2/2)||w||^2 (stated per-example: gradient descent
// with backtracking line search on the mean-scaled objective, zero init,
// fully deterministic).
LogregResult train_logreg_l2(const LogregProblem& problem,
                             const LogregOptions& options);

struct BowModel {
  TfidfVectorizer features;
  Tensor w;
  Tensor b;
  LabelSet labels;
  double l2 = 1.0;
  double tol = 1e-3;

  std::vector<double> predict_distribution(
      std::span<const std::string> tokens) const;
  int predict_class(std::span<const std::string> tokens) const;
};

struct BowOptions {
  std::size_t top_n = 50000;
  LogregOptions logreg;
};

BowModel train_bow(const std::vector<LabeledExample>& train,
                   const LabelSet& labels, const BowOptions& options);

// --- skip-gram average baseline ---

// Mean of the token vectors; absent tokens contribute zero vectors and
// still count. Accumulation runs in sorted token order, so permutations of
// a message produce bitwise-identical results.
std::vector<double> avg_represent(std::span<const std::string> tokens,
                                  const PretrainedVectors& vectors);

struct AvgModel {
  PretrainedVectors vectors;
  Tensor w;
  Tensor b;
  LabelSet labels;
  double l2 = 1.0;
  double tol = 1e-3;  // the epsilon of the regression solver

  std::vector<double> predict_distribution(
      std::span<const std::string> tokens) const;
  int predict_class(std::span<const std::string> tokens) const;
};

struct AvgOptions {
  LogregOptions logreg{.l2 = 1.0, .tol = 1e-3, .max_iter = 1000};
};

AvgModel train_avg(const std::vector<LabeledExample>& train,
                   const LabelSet& labels, PretrainedVectors vectors,
                   const AvgOptions& options);

// Lowest index wins ties; deterministic.
int argmax(std::span<const double> values);

// Moving-average trend check used by training sanity tests.
bool loss_trend_non_increasing(std::span<const double> losses,
                               std::size_t window = 5, double slack = 1e-9);

}  // namespace emopred

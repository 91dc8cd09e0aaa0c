#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "emopred/corpus.hpp"
#include "emopred/rng.hpp"
#include "emopred/tape.hpp"

namespace emopred {

enum class Mode { kTrain, kEval };

// Learnable embedding rows (vocabulary ids, including the reserved ones).
struct EmbeddingTable {
  Parameter rows;  // V x D
  bool learnable = true;

  std::size_t vocab_size() const { return rows.value.rows(); }
  std::size_t dim() const { return rows.value.cols(); }

  static EmbeddingTable init(std::string name, std::size_t vocab_size,
                             std::size_t dim, Rng& rng);
};

// Fixed vectors loaded from a word2vec-style text file; never updated.
class PretrainedVectors {
 public:
  PretrainedVectors() = default;
  explicit PretrainedVectors(std::size_t dim) : dim_(dim) {}

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  bool contains(const std::string& token) const {
    return index_.count(token) > 0;
  }
  // Empty span when the token is absent.
  std::span<const double> get(const std::string& token) const;
  std::span<const double> at(std::size_t i) const {
    return {data_.data() + i * dim_, dim_};
  }

  // Last occurrence wins; returns false when it replaced an existing row.
  bool insert(const std::string& token, std::span<const double> vec);

 private:
  std::size_t dim_ = 0;
  std::vector<std::string> tokens_;
  std::vector<double> data_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Stochastic replacement of training singletons by the OOV vector.
struct OovPolicy {
  double replace_prob = 0.5;
  std::vector<std::uint8_t> singleton;  // indexed by token id

  static OovPolicy from_vocab(const Vocabulary& vocab, double p = 0.5);

  bool is_singleton(std::size_t id) const {
    return id < singleton.size() && singleton[id] != 0;
  }
};

// Training mode flips a p-coin for singleton tokens; eval mode is pure
// (unknown tokens already arrive as kOovId from Vocabulary::id).
std::size_t resolve_lookup_id(const OovPolicy& policy, std::size_t token_id,
                              Mode mode, Rng& coin);

std::span<const double> lookup(const EmbeddingTable& table,
                               std::size_t token_id, const OovPolicy& policy,
                               Mode mode, Rng& coin);

// learned ++ pretrained[token]; zero padding when the token is absent. The
// pretrained slice never carries gradient.
std::vector<double> concat_pretrained(std::span<const double> learned,
                                      const PretrainedVectors& pretrained,
                                      const std::string& token);

// Text format: header "V D", then V lines of token + D decimal floats.
PretrainedVectors load_word2vec_text(const std::string& path,
                                     std::size_t* duplicates = nullptr);
// 9 significant digits; load(save(x)) is a bitwise fixed point after the
// first save.
void save_word2vec_text(const PretrainedVectors& vectors,
                        const std::string& path);

struct SkipgramConfig {
  std::size_t dim = 100;
  std::size_t window = 5;
  std::size_t negatives = 5;
  std::size_t epochs = 5;
  double lr = 0.025;
  double subsample = 0.0;  // 0 disables frequent-word subsampling
  std::size_t min_count = 1;
};

struct SkipgramResult {
  PretrainedVectors vectors;
  std::vector<double> epoch_loss;  // mean NLL per (center, context) pair
};

// Skip-gram with negative sampling; deterministic under a fixed seed and a
// single thread.
SkipgramResult train_skipgram(
    const std::vector<std::vector<std::string>>& sentences,
    const SkipgramConfig& config, Rng rng);

}  // namespace emopred

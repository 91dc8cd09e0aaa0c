#include "emopred/embeddings.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "emopred/errors.hpp"
#include "emopred/kernels.hpp"
#include "emopred/mathfn.hpp"

namespace emopred {

EmbeddingTable EmbeddingTable::init(std::string name, std::size_t vocab_size,
                                    std::size_t dim, Rng& rng) {
  Tensor t({vocab_size, dim});
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-0.1, 0.1);
  EmbeddingTable table;
  table.rows = Parameter(std::move(name), std::move(t));
  return table;
}

std::span<const double> PretrainedVectors::get(const std::string& token) const {
  auto it = index_.find(token);
  if (it == index_.end()) return {};
  return at(it->second);
}

bool PretrainedVectors::insert(const std::string& token,
                               std::span<const double> vec) {
  if (vec.size() != dim_)
    throw std::invalid_argument("pretrained vector dimension mismatch");
  auto it = index_.find(token);
  if (it != index_.end()) {
    std::copy(vec.begin(), vec.end(), data_.begin() + it->second * dim_);
    return false;
  }
  index_.emplace(token, tokens_.size());
  tokens_.push_back(token);
  data_.insert(data_.end(), vec.begin(), vec.end());
  return true;
}

OovPolicy OovPolicy::from_vocab(const Vocabulary& vocab, double p) {
  if (p < 0.0 || p > 1.0)
    throw std::invalid_argument("OOV replacement probability must be in [0,1]");
  OovPolicy policy;
  policy.replace_prob = p;
  policy.singleton.resize(vocab.size(), 0);
  for (std::size_t id = Vocabulary::kFirstTokenId; id < vocab.size(); ++id)
    policy.singleton[id] = vocab.is_singleton(id) ? 1 : 0;
  return policy;
}

std::size_t resolve_lookup_id(const OovPolicy& policy, std::size_t token_id,
                              Mode mode, Rng& coin) {
  if (mode == Mode::kTrain && policy.is_singleton(token_id) &&
      coin.coin(policy.replace_prob))
    return Vocabulary::kOovId;
  return token_id;
}

std::span<const double> lookup(const EmbeddingTable& table,
                               std::size_t token_id, const OovPolicy& policy,
                               Mode mode, Rng& coin) {
  if (token_id >= table.vocab_size())
    throw std::invalid_argument("lookup: token id " + std::to_string(token_id) +
                                " out of range for vocabulary of " +
                                std::to_string(table.vocab_size()));
  std::size_t effective = resolve_lookup_id(policy, token_id, mode, coin);
  return table.rows.value.row(effective);
}

std::vector<double> concat_pretrained(std::span<const double> learned,
                                      const PretrainedVectors& pretrained,
                                      const std::string& token) {
  std::vector<double> out(learned.begin(), learned.end());
  std::span<const double> pre = pretrained.get(token);
  if (pre.empty()) {
    out.resize(learned.size() + pretrained.dim(), 0.0);
  } else {
    out.insert(out.end(), pre.begin(), pre.end());
  }
  return out;
}

PretrainedVectors load_word2vec_text(const std::string& path,
                                     std::size_t* duplicates) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open vector file '" + path + "'");

  std::string line;
  if (!std::getline(in, line))
    throw DataError(path + ":1: missing 'V D' header");
  std::istringstream header(line);
  long long v = 0, d = 0;
  if (!(header >> v >> d) || v < 0 || d <= 0)
    throw DataError(path + ":1: malformed 'V D' header");

  PretrainedVectors table(static_cast<std::size_t>(d));
  std::size_t dups = 0;
  std::vector<double> row(static_cast<std::size_t>(d));
  for (long long i = 0; i < v; ++i) {
    if (!std::getline(in, line))
      throw DataError(path + ":" + std::to_string(i + 2) + ": expected " +
                      std::to_string(v) + " entries, found " +
                      std::to_string(i));
    std::size_t line_no = static_cast<std::size_t>(i) + 2;
    std::istringstream ls(line);
    std::string token;
    if (!(ls >> token))
      throw DataError(path + ":" + std::to_string(line_no) + ": empty row");
    for (long long j = 0; j < d; ++j) {
      std::string field;
      if (!(ls >> field))
        throw DataError(path + ":" + std::to_string(line_no) + ": expected " +
                        std::to_string(d) + " values, found " +
                        std::to_string(j));
      char* end = nullptr;
      row[static_cast<std::size_t>(j)] = std::strtod(field.c_str(), &end);
      if (end == field.c_str() || *end != '\0')
        throw DataError(path + ":" + std::to_string(line_no) +
                        ": bad float '" + field + "'");
    }
    std::string extra;
    if (ls >> extra)
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": more than " + std::to_string(d) + " values");
    if (!table.insert(token, row)) ++dups;
  }
  if (std::getline(in, line) && !line.empty())
    throw DataError(path + ": more rows than the declared " +
                    std::to_string(v));
  if (duplicates) *duplicates = dups;
  return table;
}

void save_word2vec_text(const PretrainedVectors& vectors,
                        const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write vector file '" + path + "'");
  out << vectors.size() << " " << vectors.dim() << "\n";
  char buf[64];
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    out << vectors.tokens()[i];
    for (double x : vectors.at(i)) {
      std::snprintf(buf, sizeof buf, " %.9g", x);
      out << buf;
    }
    out << "\n";
  }
}

namespace {

struct SgVocab {
  std::vector<std::string> words;
  std::vector<std::int64_t> counts;
  std::unordered_map<std::string, std::size_t> index;
};

SgVocab build_sg_vocab(const std::vector<std::vector<std::string>>& sentences,
                       std::size_t min_count) {
  std::unordered_map<std::string, std::int64_t> counts;
  for (const auto& sent : sentences)
    for (const auto& w : sent) ++counts[w];
  std::vector<std::pair<std::string, std::int64_t>> sorted;
  for (auto& [w, c] : counts)
    if (c >= static_cast<std::int64_t>(min_count)) sorted.emplace_back(w, c);
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  SgVocab v;
  for (auto& [w, c] : sorted) {
    v.index.emplace(w, v.words.size());
    v.words.push_back(w);
    v.counts.push_back(c);
  }
  return v;
}

// Unigram^0.75 negative-sampling table (word2vec style).
std::vector<std::uint32_t> build_unigram_table(const SgVocab& vocab,
                                               std::size_t table_size) {
  std::vector<std::uint32_t> table(table_size);
  double total = 0.0;
  for (std::int64_t c : vocab.counts) total += std::pow(c, 0.75);
  std::size_t word = 0;
  double cumulative = std::pow(vocab.counts[0], 0.75) / total;
  for (std::size_t i = 0; i < table_size; ++i) {
    table[i] = static_cast<std::uint32_t>(word);
    if (static_cast<double>(i) / static_cast<double>(table_size) > cumulative &&
        word + 1 < vocab.words.size()) {
      ++word;
      cumulative += std::pow(vocab.counts[word], 0.75) / total;
    }
  }
  return table;
}

}  // namespace

SkipgramResult train_skipgram(
    const std::vector<std::vector<std::string>>& sentences,
    const SkipgramConfig& config, Rng rng) {
  if (sentences.empty()) throw DataError("skip-gram: empty corpus");
  if (config.dim == 0) throw std::invalid_argument("skip-gram: dim must be positive");
  if (config.window == 0)
    throw std::invalid_argument("skip-gram: window must be positive");

  SgVocab vocab = build_sg_vocab(sentences, config.min_count);
  if (vocab.words.empty()) throw DataError("skip-gram: empty vocabulary");

  const std::size_t dim = config.dim;
  const std::size_t n_words = vocab.words.size();
  std::vector<double> syn0(n_words * dim);
  std::vector<double> syn1(n_words * dim, 0.0);
  Rng init_rng = rng.split("sg-init");
  for (double& x : syn0) x = init_rng.uniform(-0.5 / dim, 0.5 / dim);

  std::vector<std::uint32_t> unigram = build_unigram_table(vocab, 1 << 20);

  std::int64_t corpus_words = 0;
  for (const auto& s : sentences) corpus_words += static_cast<std::int64_t>(s.size());
  const double total_words =
      static_cast<double>(corpus_words) * static_cast<double>(config.epochs) + 1.0;

  Rng stream = rng.split("sg-train");
  const auto& k = kernels::active();
  std::vector<double> v_err(dim);

  SkipgramResult result;
  std::vector<std::size_t> sent_ids;
  double processed = 0.0;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    double epoch_loss = 0.0;
    std::size_t epoch_pairs = 0;
    for (const auto& sentence : sentences) {
      double lr = config.lr * (1.0 - processed / total_words);
      if (lr < config.lr * 1e-4) lr = config.lr * 1e-4;
      processed += static_cast<double>(sentence.size());

      sent_ids.clear();
      for (const auto& w : sentence) {
        auto it = vocab.index.find(w);
        if (it == vocab.index.end()) continue;
        if (config.subsample > 0.0) {
          double f = static_cast<double>(vocab.counts[it->second]) /
                     static_cast<double>(corpus_words);
          double keep = std::sqrt(config.subsample / f) + config.subsample / f;
          if (keep < 1.0 && stream.uniform() > keep) continue;
        }
        sent_ids.push_back(it->second);
      }

      for (std::size_t pos = 0; pos < sent_ids.size(); ++pos) {
        std::size_t center = sent_ids[pos];
        std::size_t shrink = stream.below(config.window);
        std::size_t eff = config.window - shrink;
        std::size_t lo = pos >= eff ? pos - eff : 0;
        std::size_t hi = std::min(sent_ids.size(), pos + eff + 1);
        double* v = syn0.data() + center * dim;
        for (std::size_t q = lo; q < hi; ++q) {
          if (q == pos) continue;
          std::fill(v_err.begin(), v_err.end(), 0.0);
          for (std::size_t neg = 0; neg <= config.negatives; ++neg) {
            std::size_t target;
            double label;
            if (neg == 0) {
              target = sent_ids[q];
              label = 1.0;
            } else {
              target = unigram[stream.below(unigram.size())];
              if (target == sent_ids[q]) continue;
              label = 0.0;
            }
            double* u = syn1.data() + target * dim;
            double score = sigmoid_stable(k.dot(v, u, dim));
            epoch_loss += label > 0.5
                              ? -std::log(std::max(score, 1e-12))
                              : -std::log(std::max(1.0 - score, 1e-12));
            double g = lr * (label - score);
            k.axpy(g, u, v_err.data(), dim);
            k.axpy(g, v, u, dim);
          }
          k.axpy(1.0, v_err.data(), v, dim);
          ++epoch_pairs;
        }
      }
    }
    result.epoch_loss.push_back(
        epoch_pairs > 0 ? epoch_loss / static_cast<double>(epoch_pairs) : 0.0);
  }

  result.vectors = PretrainedVectors(dim);
  for (std::size_t i = 0; i < n_words; ++i)
    result.vectors.insert(vocab.words[i], {syn0.data() + i * dim, dim});
  return result;
}

}  // namespace emopred

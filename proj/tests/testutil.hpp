#pragma once

// Synthetic corpora shared by the model tests and the acceptance suite.

#include <string>
#include <vector>

#include "emopred/corpus.hpp"
#include "emopred/rng.hpp"

namespace testutil {

// K distinct emoji labels.
inline emopred::LabelSet k_labels(std::size_t k) {
  std::vector<std::string> emojis;
  for (std::size_t i = 0; i < k; ++i) {
    std::string e;
    emopred::utf8_append(e, static_cast<char32_t>(0x1F600 + i));
    emojis.push_back(e);
  }
  return emopred::LabelSet(std::move(emojis));
}

// Each class carries one perfectly correlated marker token among shared
// filler words.
inline std::vector<emopred::LabeledExample> marker_examples(std::size_t n,
                                                            std::size_t k,
                                                            std::uint64_t seed) {
  emopred::Rng rng(seed);
  std::vector<std::string> fillers = {"so",   "very", "much", "the",
                                      "wow",  "nice", "just", "again"};
  std::vector<emopred::LabeledExample> out;
  for (std::size_t i = 0; i < n; ++i) {
    int label = static_cast<int>(i % k);
    std::vector<std::string> tokens;
    std::size_t lead = rng.below(3);
    for (std::size_t j = 0; j < lead; ++j)
      tokens.push_back(fillers[rng.below(fillers.size())]);
    tokens.push_back("marker" + std::to_string(label));
    std::size_t tail = 1 + rng.below(3);
    for (std::size_t j = 0; j < tail; ++j)
      tokens.push_back(fillers[rng.below(fillers.size())]);
    out.push_back({"m" + std::to_string(i), std::move(tokens), label,
                   static_cast<std::int64_t>(i)});
  }
  return out;
}

inline emopred::SplitCorpus marker_corpus(std::size_t n_train, std::size_t k,
                                          std::uint64_t seed) {
  emopred::SplitCorpus corpus;
  corpus.train = marker_examples(n_train, k, seed);
  corpus.dev = marker_examples(std::max<std::size_t>(k, n_train / 5), k,
                               seed + 1);
  corpus.test = marker_examples(std::max<std::size_t>(k, n_train / 5), k,
                                seed + 2);
  return corpus;
}

// Binary task where only token ORDER carries the label: class 0 puts "good"
// before "bad", class 1 the reverse. Filler tokens are label-independent
// noise, so any order-free model is at chance.
inline std::vector<emopred::LabeledExample> order_examples(std::size_t n,
                                                           std::uint64_t seed) {
  emopred::Rng rng(seed);
  std::vector<std::string> fillers = {"a", "b", "c", "d", "e", "f"};
  std::vector<emopred::LabeledExample> out;
  for (std::size_t i = 0; i < n; ++i) {
    int label = static_cast<int>(rng.below(2));
    std::vector<std::string> tokens;
    auto pad = [&](std::size_t max_len) {
      std::size_t len = rng.below(max_len + 1);
      for (std::size_t j = 0; j < len; ++j)
        tokens.push_back(fillers[rng.below(fillers.size())]);
    };
    pad(2);
    tokens.push_back(label == 0 ? "good" : "bad");
    pad(2);
    tokens.push_back(label == 0 ? "bad" : "good");
    pad(2);
    out.push_back({"o" + std::to_string(i), std::move(tokens), label,
                   static_cast<std::int64_t>(i)});
  }
  return out;
}

inline emopred::SplitCorpus order_corpus(std::size_t n, std::uint64_t seed) {
  return emopred::chronological_split(order_examples(n, seed));
}

}  // namespace testutil

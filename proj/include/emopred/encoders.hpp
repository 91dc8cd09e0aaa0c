#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "emopred/corpus.hpp"
#include "emopred/embeddings.hpp"
#include "emopred/rng.hpp"
#include "emopred/tape.hpp"

namespace emopred {

// LSTM cell with stacked gates [input, forget, candidate, output] in one
// 4H x D input matrix, one 4H x H recurrent matrix and one 4H bias. The
// forget-gate bias slice starts at +1.
struct LstmCell {
  Parameter wx;  // 4H x D
  Parameter wh;  // 4H x H
  Parameter b;   // 4H
  std::size_t input_dim = 0;
  std::size_t hidden = 0;

  static LstmCell init(const std::string& name, std::size_t input_dim,
                       std::size_t hidden, Rng& rng);

  struct State {
    VarId h, c;
  };

  State zero_state(Tape& t) const;
  // i,f,o = sigmoid(affine), g = tanh(affine);
  // c_t = f*c + i*g; h_t = o*tanh(c_t)
  State step(Tape& t, VarId x, State prev);

  void collect_params(std::vector<Parameter*>& out);
};

// Forward and backward LSTM over a sequence; output is the pair of final
// hidden states.
struct BiEncoder {
  LstmCell fwd, bwd;

  static BiEncoder init(const std::string& name, std::size_t input_dim,
                        std::size_t hidden, Rng& rng);

  std::size_t output_dim() const { return 2 * fwd.hidden; }
  // (fw, bw); throws on an empty sequence.
  std::pair<VarId, VarId> encode(Tape& t, std::span<const VarId> xs);

  void collect_params(std::vector<Parameter*>& out);
};

// Character inventory of the training split; id 0 is the OOV character.
class CharVocab {
 public:
  static constexpr std::size_t kOovId = 0;

  CharVocab() = default;

  static CharVocab build(const std::vector<LabeledExample>& train);
  static CharVocab from_codepoints(std::vector<char32_t> cps);

  std::size_t id(char32_t cp) const;
  std::size_t size() const { return codepoints_.size() + 1; }
  const std::vector<char32_t>& codepoints() const { return codepoints_; }

 private:
  std::vector<char32_t> codepoints_;  // excludes the OOV slot
  std::unordered_map<char32_t, std::size_t> index_;
};

// Token vector composed from its character sequence by a nested BiEncoder.
struct CharComposer {
  CharVocab chars;
  EmbeddingTable char_emb;  // |chars| x Dc
  BiEncoder enc;
  std::size_t max_chars = 32;  // truncate right

  static CharComposer init(CharVocab chars, std::size_t char_dim,
                           std::size_t hidden, std::size_t max_chars, Rng& rng);

  std::size_t output_dim() const { return enc.output_dim(); }
  // [fw_c ; bw_c]; throws on an empty token.
  VarId compose(Tape& t, const std::string& token);

  void collect_params(std::vector<Parameter*>& out);
};

// s = relu(W [fw;bw] + d); entrywise non-negative by construction.
struct MessageProjection {
  Parameter w;  // S x 2H
  Parameter d;  // S

  static MessageProjection init(std::size_t s_dim, std::size_t input_dim,
                                Rng& rng);

  VarId apply(Tape& t, VarId fw, VarId bw);

  void collect_params(std::vector<Parameter*>& out);
};

// Xavier-uniform weight init: uniform(-a, a), a = sqrt(6 / (rows + cols)).
Tensor xavier_uniform(std::size_t rows, std::size_t cols, Rng& rng);

}  // namespace emopred

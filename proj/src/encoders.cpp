#include "emopred/encoders.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace emopred {

Tensor xavier_uniform(std::size_t rows, std::size_t cols, Rng& rng) {
  Tensor t({rows, cols});
  double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-a, a);
  return t;
}

LstmCell LstmCell::init(const std::string& name, std::size_t input_dim,
                        std::size_t hidden, Rng& rng) {
  LstmCell cell;
  cell.input_dim = input_dim;
  cell.hidden = hidden;
  cell.wx = Parameter(name + ".wx", xavier_uniform(4 * hidden, input_dim, rng));
  cell.wh = Parameter(name + ".wh", xavier_uniform(4 * hidden, hidden, rng));
  Tensor bias({4 * hidden});
  for (std::size_t i = hidden; i < 2 * hidden; ++i) bias[i] = 1.0;  // forget
  cell.b = Parameter(name + ".b", std::move(bias));
  return cell;
}

LstmCell::State LstmCell::zero_state(Tape& t) const {
  VarId h = t.constant(Tensor({hidden}));
  VarId c = t.constant(Tensor({hidden}));
  return {h, c};
}

LstmCell::State LstmCell::step(Tape& t, VarId x, State prev) {
  VarId z = t.add(t.add(t.matvec(t.param(wx), x), t.matvec(t.param(wh), prev.h)),
                  t.param(b));
  std::size_t h = hidden;
  VarId gi = t.sigmoid(t.slice(z, 0, h));
  VarId gf = t.sigmoid(t.slice(z, h, h));
  VarId gg = t.tanh(t.slice(z, 2 * h, h));
  VarId go = t.sigmoid(t.slice(z, 3 * h, h));
  VarId c = t.add(t.mul(gf, prev.c), t.mul(gi, gg));
  VarId hidden_out = t.mul(go, t.tanh(c));
  return {hidden_out, c};
}

void LstmCell::collect_params(std::vector<Parameter*>& out) {
  out.push_back(&wx);
  out.push_back(&wh);
  out.push_back(&b);
}

BiEncoder BiEncoder::init(const std::string& name, std::size_t input_dim,
                          std::size_t hidden, Rng& rng) {
  BiEncoder enc;
  enc.fwd = LstmCell::init(name + ".fwd", input_dim, hidden, rng);
  enc.bwd = LstmCell::init(name + ".bwd", input_dim, hidden, rng);
  return enc;
}

std::pair<VarId, VarId> BiEncoder::encode(Tape& t, std::span<const VarId> xs) {
  if (xs.empty()) throw std::invalid_argument("encode: empty sequence");
  LstmCell::State f = fwd.zero_state(t);
  for (VarId x : xs) f = fwd.step(t, x, f);
  LstmCell::State b = bwd.zero_state(t);
  for (std::size_t i = xs.size(); i-- > 0;) b = bwd.step(t, xs[i], b);
  return {f.h, b.h};
}

void BiEncoder::collect_params(std::vector<Parameter*>& out) {
  fwd.collect_params(out);
  bwd.collect_params(out);
}

CharVocab CharVocab::build(const std::vector<LabeledExample>& train) {
  std::unordered_map<char32_t, std::int64_t> counts;
  for (const LabeledExample& ex : train)
    for (const std::string& tok : ex.tokens)
      for (char32_t cp : utf8_decode(tok)) ++counts[cp];

  std::vector<std::pair<char32_t, std::int64_t>> sorted(counts.begin(),
                                                        counts.end());
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<char32_t> cps;
  cps.reserve(sorted.size());
  for (auto& [cp, c] : sorted) cps.push_back(cp);
  return from_codepoints(std::move(cps));
}

CharVocab CharVocab::from_codepoints(std::vector<char32_t> cps) {
  CharVocab v;
  v.codepoints_ = std::move(cps);
  for (std::size_t i = 0; i < v.codepoints_.size(); ++i)
    v.index_.emplace(v.codepoints_[i], i + 1);  // 0 reserved for OOV
  return v;
}

std::size_t CharVocab::id(char32_t cp) const {
  auto it = index_.find(cp);
  return it == index_.end() ? kOovId : it->second;
}

CharComposer CharComposer::init(CharVocab chars, std::size_t char_dim,
                                std::size_t hidden, std::size_t max_chars,
                                Rng& rng) {
  CharComposer c;
  std::size_t vocab_size = chars.size();
  c.chars = std::move(chars);
  c.char_emb = EmbeddingTable::init("char_emb", vocab_size, char_dim, rng);
  c.enc = BiEncoder::init("char_enc", char_dim, hidden, rng);
  c.max_chars = max_chars;
  return c;
}

VarId CharComposer::compose(Tape& t, const std::string& token) {
  std::vector<char32_t> cps = utf8_decode(token);
  if (cps.empty()) throw std::invalid_argument("compose: empty token");
  if (cps.size() > max_chars) cps.resize(max_chars);
  std::vector<VarId> xs;
  xs.reserve(cps.size());
  for (char32_t cp : cps) xs.push_back(t.embed(char_emb.rows, chars.id(cp)));
  auto [fw, bw] = enc.encode(t, xs);
  return t.concat(fw, bw);
}

void CharComposer::collect_params(std::vector<Parameter*>& out) {
  out.push_back(&char_emb.rows);
  enc.collect_params(out);
}

MessageProjection MessageProjection::init(std::size_t s_dim,
                                          std::size_t input_dim, Rng& rng) {
  MessageProjection p;
  p.w = Parameter("proj.w", xavier_uniform(s_dim, input_dim, rng));
  p.d = Parameter("proj.d", Tensor({s_dim}));
  return p;
}

VarId MessageProjection::apply(Tape& t, VarId fw, VarId bw) {
  VarId joined = t.concat(fw, bw);
  return t.relu(t.add(t.matvec(t.param(w), joined), t.param(d)));
}

void MessageProjection::collect_params(std::vector<Parameter*>& out) {
  out.push_back(&w);
  out.push_back(&d);
}

}  // namespace emopred

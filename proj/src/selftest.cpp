#include "emopred/selftest.hpp"

#include "emopred/mathfn.hpp"

namespace emopred {

GradCheckReport gradcheck_variant(Variant variant, std::uint64_t seed,
                                  double eps, bool corrupt_one_gradient) {
  std::vector<LabeledExample> train = {
      {"t0", {"sun", "is", "warm", "!"}, 0, 0},
      {"t1", {"rain", "was", "cooold", "today"}, 1, 1},
      {"t2", {"snow", "and", "wind"}, 2, 2},
  };
  LabelSet labels({"\U0001F31E", "\U0001F327", "❄"});

  BlstmConfig config;
  config.word_dim = 5;
  config.hidden = 4;
  config.char_dim = 3;
  config.char_hidden = 3;
  config.s_dim = 4;
  config.max_tokens = 8;
  config.max_chars = 8;

  Vocabulary vocab = build_vocab(train);
  CharVocab chars = CharVocab::build(train);

  PretrainedVectors pretrained(3);
  if (variant_uses_pretrained(variant)) {
    Rng pre_rng = Rng(seed).split("pretrained");
    // one training token ("today") left out to exercise the zero-pad path
    for (const char* tok :
         {"sun", "is", "warm", "rain", "was", "cooold", "snow", "and", "wind"}) {
      std::vector<double> v(3);
      for (double& x : v) x = pre_rng.uniform(-0.5, 0.5);
      pretrained.insert(tok, v);
    }
  }

  Rng init_rng = Rng(seed).split("init");
  BlstmModel model = BlstmModel::init(
      variant, config, std::move(vocab), std::move(chars), labels,
      variant_uses_pretrained(variant) ? std::move(pretrained)
                                       : PretrainedVectors(),
      init_rng);
  std::vector<Parameter*> params = model.parameters();

  auto forward = [&]() {
    Tape tape;
    Rng idle(0);
    std::vector<VarId> losses;
    for (const LabeledExample& ex : train) {
      VarId logits = model.forward_logits(tape, ex.tokens, Mode::kEval, idle);
      losses.push_back(tape.nll_of_softmax(logits, ex.label));
    }
    return tape.value(tape.mean_scalars(losses))[0];
  };
  auto forward_backward = [&]() {
    Tape tape;
    Rng idle(0);
    std::vector<VarId> losses;
    for (const LabeledExample& ex : train) {
      VarId logits = model.forward_logits(tape, ex.tokens, Mode::kEval, idle);
      losses.push_back(tape.nll_of_softmax(logits, ex.label));
    }
    VarId loss = tape.mean_scalars(losses);
    tape.backward(loss);
    if (corrupt_one_gradient) params[0]->grad[0] += 0.5;
    return tape.value(loss)[0];
  };

  return grad_check(forward, forward_backward, params, eps, /*max_coords=*/0,
                    Rng(seed));
}

}  // namespace emopred

#include "emopred/models.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "emopred/errors.hpp"
#include "emopred/mathfn.hpp"
#include "emopred/optim.hpp"

namespace emopred {

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::kWord: return "word";
    case Variant::kChar: return "char";
    case Variant::kWordPre: return "word+pre";
    case Variant::kCharPre: return "char+pre";
  }
  return "?";
}

Variant variant_from_name(const std::string& name) {
  if (name == "word") return Variant::kWord;
  if (name == "char") return Variant::kChar;
  if (name == "word+pre") return Variant::kWordPre;
  if (name == "char+pre") return Variant::kCharPre;
  throw std::invalid_argument("unknown variant '" + name + "'");
}

bool variant_uses_chars(Variant v) {
  return v == Variant::kChar || v == Variant::kCharPre;
}

bool variant_uses_pretrained(Variant v) {
  return v == Variant::kWordPre || v == Variant::kCharPre;
}

ClassifierHead ClassifierHead::init(std::size_t k, std::size_t s_dim, Rng& rng) {
  ClassifierHead head;
  Tensor g({k, s_dim});
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = rng.uniform(-0.1, 0.1);
  head.g = Parameter("head.g", std::move(g));
  head.q = Parameter("head.q", Tensor({k}));
  return head;
}

VarId ClassifierHead::logits(Tape& t, VarId s) {
  return t.add(t.matvec(t.param(g), s), t.param(q));
}

void ClassifierHead::collect_params(std::vector<Parameter*>& out) {
  out.push_back(&g);
  out.push_back(&q);
}

BlstmModel BlstmModel::init(Variant variant, const BlstmConfig& config,
                            Vocabulary vocab, CharVocab chars, LabelSet labels,
                            PretrainedVectors pretrained, Rng& rng) {
  BlstmModel m;
  m.variant = variant;
  m.config = config;
  m.vocab = std::move(vocab);
  m.labels = std::move(labels);
  m.oov = OovPolicy::from_vocab(m.vocab, config.oov_replace_prob);
  m.pretrained = std::move(pretrained);

  std::size_t base_dim;
  if (variant_uses_chars(variant)) {
    m.composer = CharComposer::init(std::move(chars), config.char_dim,
                                    config.char_hidden, config.max_chars, rng);
    base_dim = m.composer->output_dim();
  } else {
    m.word_emb = EmbeddingTable::init("word_emb", m.vocab.size(),
                                      config.word_dim, rng);
    base_dim = config.word_dim;
  }
  std::size_t input_dim = base_dim;
  if (variant_uses_pretrained(variant)) {
    if (m.pretrained.dim() == 0)
      throw UsageError("variant " + std::string(variant_name(variant)) +
                       " needs pretrained vectors");
    input_dim += m.pretrained.dim();
  }
  m.word_enc = BiEncoder::init("word_enc", input_dim, config.hidden, rng);
  m.proj = MessageProjection::init(config.s_dim, m.word_enc.output_dim(), rng);
  m.head = ClassifierHead::init(m.labels.size(), config.s_dim, rng);
  return m;
}

VarId BlstmModel::forward_logits(Tape& t, std::span<const std::string> tokens,
                                 Mode mode, Rng& oov_coin) {
  if (tokens.empty())
    throw std::invalid_argument("forward: empty token sequence");
  std::size_t n = std::min(tokens.size(), config.max_tokens);

  std::vector<VarId> xs;
  xs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::string& token = tokens[i];
    VarId x;
    if (variant_uses_chars(variant)) {
      x = composer->compose(t, token);
    } else {
      std::size_t id = resolve_lookup_id(oov, vocab.id(token), mode, oov_coin);
      x = t.embed(word_emb->rows, id);
    }
    if (variant_uses_pretrained(variant)) {
      Tensor pt({pretrained.dim()});
      std::span<const double> pre = pretrained.get(token);
      if (!pre.empty()) std::copy(pre.begin(), pre.end(), pt.data());
      x = t.concat(x, t.constant(std::move(pt)));
    }
    xs.push_back(x);
  }

  auto [fw, bw] = word_enc.encode(t, xs);
  VarId s = proj.apply(t, fw, bw);
  return head.logits(t, s);
}

std::vector<double> BlstmModel::predict_distribution(
    std::span<const std::string> tokens) {
  Tape t;
  Rng idle(0);
  VarId logits = forward_logits(t, tokens, Mode::kEval, idle);
  return softmax(t.value(logits).values());
}

int BlstmModel::predict_class(std::span<const std::string> tokens) {
  return argmax(predict_distribution(tokens));
}

std::vector<Parameter*> BlstmModel::parameters() {
  std::vector<Parameter*> out;
  if (word_emb) out.push_back(&word_emb->rows);
  if (composer) composer->collect_params(out);
  word_enc.collect_params(out);
  proj.collect_params(out);
  head.collect_params(out);
  return out;
}

namespace {

double accuracy(BlstmModel& model, const std::vector<LabeledExample>& examples) {
  if (examples.empty()) return 0.0;
  std::size_t correct = 0;
  for (const LabeledExample& ex : examples)
    if (model.predict_class(ex.tokens) == ex.label) ++correct;
  return static_cast<double>(correct) / static_cast<double>(examples.size());
}

double dev_macro_f1(BlstmModel& model,
                    const std::vector<LabeledExample>& examples,
                    std::size_t k) {
  std::vector<int> golds, preds;
  golds.reserve(examples.size());
  preds.reserve(examples.size());
  for (const LabeledExample& ex : examples) {
    golds.push_back(ex.label);
    preds.push_back(model.predict_class(ex.tokens));
  }
  return prf(confusion(golds, preds, k)).macro_f1;
}

}  // namespace

BlstmTrainResult train_blstm(const SplitCorpus& corpus, const LabelSet& labels,
                             Variant variant, const TrainConfig& train_config,
                             const BlstmConfig& model_config,
                             const PretrainedVectors* pretrained_vectors) {
  if (corpus.train.empty()) throw DataError("training split is empty");
  if (variant_uses_pretrained(variant) &&
      (!pretrained_vectors || pretrained_vectors->size() == 0))
    throw UsageError("variant " + std::string(variant_name(variant)) +
                     " requires pretrained vectors");
  for (const LabeledExample& ex : corpus.train)
    if (ex.label < 0 || static_cast<std::size_t>(ex.label) >= labels.size())
      throw DataError("training example '" + ex.id + "' has label out of range");

  Rng root(train_config.seed);
  Rng init_rng = root.split("init");
  Rng oov_rng = root.split("oov");
  Rng shuffle_rng = root.split("shuffle");

  Vocabulary vocab = build_vocab(corpus.train);
  CharVocab chars;
  if (variant_uses_chars(variant)) chars = CharVocab::build(corpus.train);

  BlstmTrainResult result{
      BlstmModel::init(variant, model_config, std::move(vocab),
                       std::move(chars), labels,
                       pretrained_vectors ? *pretrained_vectors
                                          : PretrainedVectors(),
                       init_rng),
      {}};
  BlstmModel& model = result.model;

  std::vector<Parameter*> params = model.parameters();
  std::unique_ptr<Optimizer> opt =
      make_optimizer(train_config.optimizer, train_config.lr);

  auto snapshot = [&params]() {
    std::vector<Tensor> values;
    values.reserve(params.size());
    for (Parameter* p : params) values.push_back(p->value);
    return values;
  };
  auto restore = [&params](const std::vector<Tensor>& values) {
    for (std::size_t i = 0; i < params.size(); ++i)
      params[i]->value = values[i];
  };

  std::vector<Tensor> best = snapshot();
  double best_dev = -1.0;
  std::size_t since_best = 0;
  bool stopped_on_train_acc = false;

  std::vector<std::size_t> order(corpus.train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  auto started = std::chrono::steady_clock::now();
  for (std::size_t epoch = 1; epoch <= train_config.epochs; ++epoch) {
    Rng epoch_rng = shuffle_rng.split(epoch);
    epoch_rng.shuffle(order);

    double loss_sum = 0.0;
    std::size_t seen = 0;
    for (std::size_t start = 0; start < order.size();
         start += train_config.batch_size) {
      std::size_t end =
          std::min(order.size(), start + train_config.batch_size);
      Tape tape;
      std::vector<VarId> losses;
      losses.reserve(end - start);
      for (std::size_t i = start; i < end; ++i) {
        const LabeledExample& ex = corpus.train[order[i]];
        VarId logits =
            model.forward_logits(tape, ex.tokens, Mode::kTrain, oov_rng);
        losses.push_back(tape.nll_of_softmax(logits, ex.label));
      }
      VarId loss = tape.mean_scalars(losses);
      double loss_value = tape.value(loss)[0];
      if (!std::isfinite(loss_value))
        throw std::runtime_error(
            "training aborted: non-finite loss at epoch " +
            std::to_string(epoch) + ", batch starting at example " +
            std::to_string(start));
      loss_sum += loss_value * static_cast<double>(end - start);
      seen += end - start;

      for (Parameter* p : params) p->zero_grad();
      tape.backward(loss);
      opt->step(params);
    }

    EpochLog log;
    log.epoch = epoch;
    log.train_loss = loss_sum / static_cast<double>(seen);
    if (!corpus.dev.empty())
      log.dev_f1 = dev_macro_f1(model, corpus.dev, labels.size());
    if (train_config.stop_train_acc > 0.0)
      log.train_acc = accuracy(model, corpus.train);
    log.elapsed_s = std::chrono::duration<double>(
                        std::chrono::steady_clock::now() - started)
                        .count();
    result.log.push_back(log);

    if (train_config.stop_train_acc > 0.0 &&
        log.train_acc >= train_config.stop_train_acc) {
      stopped_on_train_acc = true;
      break;
    }

    if (!corpus.dev.empty()) {
      if (log.dev_f1 > best_dev) {
        best_dev = log.dev_f1;
        best = snapshot();
        since_best = 0;
      } else if (++since_best >= train_config.patience) {
        break;
      }
    } else {
      best = snapshot();
    }
  }

  if (!stopped_on_train_acc) restore(best);
  return result;
}

TfidfVectorizer build_tfidf(const std::vector<LabeledExample>& examples,
                            const Vocabulary& vocab, std::size_t top_n) {
  if (top_n < 1) throw std::invalid_argument("tfidf: top_n must be >= 1");
  if (examples.empty()) throw DataError("tfidf: empty training split");

  const double n_docs = static_cast<double>(examples.size());
  std::unordered_map<std::string, std::int64_t> df;
  std::vector<std::unordered_map<std::string, std::int64_t>> tfs;
  tfs.reserve(examples.size());
  for (const LabeledExample& ex : examples) {
    std::unordered_map<std::string, std::int64_t> tf;
    for (const std::string& tok : ex.tokens) {
      if (vocab.id(tok) == Vocabulary::kOovId) continue;
      ++tf[tok];
    }
    for (auto& [tok, c] : tf) ++df[tok];
    tfs.push_back(std::move(tf));
  }

  std::unordered_map<std::string, double> idf;
  for (auto& [tok, d] : df)
    idf[tok] = std::log(n_docs / static_cast<double>(d));

  // Rank by the largest tf*idf the token reaches in any training message.
  std::unordered_map<std::string, double> max_mass;
  for (const auto& tf : tfs)
    for (auto& [tok, c] : tf) {
      double mass = static_cast<double>(c) * idf[tok];
      auto [it, inserted] = max_mass.emplace(tok, mass);
      if (!inserted && mass > it->second) it->second = mass;
    }

  std::vector<std::pair<std::string, double>> ranked(max_mass.begin(),
                                                     max_mass.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (ranked.size() > top_n) ranked.resize(top_n);

  TfidfVectorizer v;
  v.feature_tokens.reserve(ranked.size());
  v.idf.reserve(ranked.size());
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    v.feature_tokens.push_back(ranked[i].first);
    v.idf.push_back(idf[ranked[i].first]);
    v.index.emplace(ranked[i].first, static_cast<int>(i));
  }
  return v;
}

std::vector<std::pair<int, double>> tfidf_featurize(
    const TfidfVectorizer& vectorizer, std::span<const std::string> tokens) {
  std::unordered_map<int, std::int64_t> tf;
  for (const std::string& tok : tokens) {
    auto it = vectorizer.index.find(tok);
    if (it != vectorizer.index.end()) ++tf[it->second];
  }
  std::vector<std::pair<int, double>> out;
  out.reserve(tf.size());
  for (auto& [feature, c] : tf)
    out.emplace_back(feature, static_cast<double>(c) *
                                  vectorizer.idf[static_cast<std::size_t>(
                                      feature)]);
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

struct LogregEval {
  double objective = 0.0;
  Tensor gw, gb;
  double grad_max = 0.0;
};

double logreg_objective(const LogregProblem& problem, const Tensor& w,
                        const Tensor& b, double l2) {
  const std::size_t k = problem.n_classes;
  const double n = static_cast<double>(problem.rows.size());
  double nll = 0.0;
  std::vector<double> logits(k);
  for (std::size_t i = 0; i < problem.rows.size(); ++i) {
    for (std::size_t c = 0; c < k; ++c) {
      double z = b[c];
      for (auto [j, v] : problem.rows[i])
        z += w.at(c, static_cast<std::size_t>(j)) * v;
      logits[c] = z;
    }
    nll += nll_loss(softmax(logits),
                    problem.labels[i]);
  }
  double reg = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) reg += w[i] * w[i];
  return nll / n + l2 / (2.0 * n) * reg;
}

LogregEval logreg_eval(const LogregProblem& problem, const Tensor& w,
                       const Tensor& b, double l2) {
  const std::size_t k = problem.n_classes;
  const double n = static_cast<double>(problem.rows.size());

  LogregEval e;
  e.gw = Tensor(w.shape());
  e.gb = Tensor(b.shape());
  double nll = 0.0;
  std::vector<double> logits(k);
  for (std::size_t i = 0; i < problem.rows.size(); ++i) {
    for (std::size_t c = 0; c < k; ++c) {
      double z = b[c];
      for (auto [j, v] : problem.rows[i])
        z += w.at(c, static_cast<std::size_t>(j)) * v;
      logits[c] = z;
    }
    std::vector<double> probs = softmax(logits);
    nll += nll_loss(probs, problem.labels[i]);
    for (std::size_t c = 0; c < k; ++c) {
      double coeff = probs[c] - (static_cast<int>(c) == problem.labels[i]);
      e.gb[c] += coeff;
      for (auto [j, v] : problem.rows[i])
        e.gw.at(c, static_cast<std::size_t>(j)) += coeff * v;
    }
  }
  double reg = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    reg += w[i] * w[i];
    e.gw[i] = e.gw[i] / n + l2 / n * w[i];
  }
  for (std::size_t c = 0; c < k; ++c) e.gb[c] /= n;
  e.objective = nll / n + l2 / (2.0 * n) * reg;

  for (std::size_t i = 0; i < e.gw.size(); ++i)
    e.grad_max = std::max(e.grad_max, std::abs(e.gw[i]));
  for (std::size_t i = 0; i < e.gb.size(); ++i)
    e.grad_max = std::max(e.grad_max, std::abs(e.gb[i]));
  return e;
}

}  // namespace

LogregResult train_logreg_l2(const LogregProblem& problem,
                             const LogregOptions& options) {
  if (problem.rows.size() != problem.labels.size())
    throw std::invalid_argument("logreg: rows/labels length mismatch");
  if (problem.rows.empty()) throw DataError("logreg: empty training data");
  if (problem.n_classes < 2)
    throw DataError("logreg: need at least two classes");
  {
    std::vector<bool> present(problem.n_classes, false);
    for (int y : problem.labels) {
      if (y < 0 || static_cast<std::size_t>(y) >= problem.n_classes)
        throw std::invalid_argument("logreg: label out of range");
      present[static_cast<std::size_t>(y)] = true;
    }
    std::size_t distinct = 0;
    for (bool p : present) distinct += p ? 1 : 0;
    if (distinct < 2)
      throw DataError("logreg: training data contains a single class");
  }

  LogregResult result;
  result.w = Tensor({problem.n_classes, problem.n_features});
  result.b = Tensor({problem.n_classes});

  double step = 1.0;
  for (std::size_t iter = 1; iter <= options.max_iter; ++iter) {
    LogregEval e = logreg_eval(problem, result.w, result.b, options.l2);
    result.iterations = iter;
    result.final_objective = e.objective;
    result.final_grad_max = e.grad_max;
    if (e.grad_max < options.tol) {
      result.converged = true;
      break;
    }

    double gnorm2 = 0.0;
    for (std::size_t i = 0; i < e.gw.size(); ++i) gnorm2 += e.gw[i] * e.gw[i];
    for (std::size_t i = 0; i < e.gb.size(); ++i) gnorm2 += e.gb[i] * e.gb[i];

    // Backtracking line search (Armijo, c = 1e-4).
    Tensor w_try(result.w.shape()), b_try(result.b.shape());
    bool accepted = false;
    for (int halvings = 0; halvings < 60; ++halvings) {
      for (std::size_t i = 0; i < w_try.size(); ++i)
        w_try[i] = result.w[i] - step * e.gw[i];
      for (std::size_t i = 0; i < b_try.size(); ++i)
        b_try[i] = result.b[i] - step * e.gb[i];
      double obj = logreg_objective(problem, w_try, b_try, options.l2);
      if (obj <= e.objective - 1e-4 * step * gnorm2) {
        accepted = true;
        break;
      }
      step /= 2.0;
    }
    if (!accepted) break;  // step underflow; gradient is numerically flat
    result.w = w_try;
    result.b = b_try;
    step = std::min(step * 2.0, 1e6);
  }
  return result;
}

namespace {

std::vector<double> linear_softmax(const Tensor& w, const Tensor& b,
                                   const std::vector<std::pair<int, double>>& row) {
  std::vector<double> logits(b.size());
  for (std::size_t c = 0; c < b.size(); ++c) {
    double z = b[c];
    for (auto [j, v] : row) z += w.at(c, static_cast<std::size_t>(j)) * v;
    logits[c] = z;
  }
  return softmax(logits);
}

}  // namespace

std::vector<double> BowModel::predict_distribution(
    std::span<const std::string> tokens) const {
  if (tokens.empty()) throw std::invalid_argument("predict: empty token list");
  return linear_softmax(w, b, tfidf_featurize(features, tokens));
}

int BowModel::predict_class(std::span<const std::string> tokens) const {
  return argmax(predict_distribution(tokens));
}

BowModel train_bow(const std::vector<LabeledExample>& train,
                   const LabelSet& labels, const BowOptions& options) {
  Vocabulary vocab = build_vocab(train);
  TfidfVectorizer vectorizer = build_tfidf(train, vocab, options.top_n);

  LogregProblem problem;
  problem.n_features = vectorizer.feature_tokens.size();
  problem.n_classes = labels.size();
  problem.rows.reserve(train.size());
  problem.labels.reserve(train.size());
  for (const LabeledExample& ex : train) {
    problem.rows.push_back(tfidf_featurize(vectorizer, ex.tokens));
    problem.labels.push_back(ex.label);
  }
  LogregResult fit = train_logreg_l2(problem, options.logreg);

  BowModel model;
  model.features = std::move(vectorizer);
  model.w = std::move(fit.w);
  model.b = std::move(fit.b);
  model.labels = labels;
  model.l2 = options.logreg.l2;
  model.tol = options.logreg.tol;
  return model;
}

std::vector<double> avg_represent(std::span<const std::string> tokens,
                                  const PretrainedVectors& vectors) {
  if (tokens.empty())
    throw std::invalid_argument("avg_represent: empty token list");
  std::vector<std::string> sorted(tokens.begin(), tokens.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> acc(vectors.dim(), 0.0);
  for (const std::string& tok : sorted) {
    std::span<const double> v = vectors.get(tok);
    if (v.empty()) continue;  // counts toward |T_m| but adds a zero vector
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += v[i];
  }
  double inv = 1.0 / static_cast<double>(tokens.size());
  for (double& x : acc) x *= inv;
  return acc;
}

std::vector<double> AvgModel::predict_distribution(
    std::span<const std::string> tokens) const {
  std::vector<double> features = avg_represent(tokens, vectors);
  std::vector<std::pair<int, double>> row;
  row.reserve(features.size());
  for (std::size_t j = 0; j < features.size(); ++j)
    row.emplace_back(static_cast<int>(j), features[j]);
  return linear_softmax(w, b, row);
}

int AvgModel::predict_class(std::span<const std::string> tokens) const {
  return argmax(predict_distribution(tokens));
}

AvgModel train_avg(const std::vector<LabeledExample>& train,
                   const LabelSet& labels, PretrainedVectors vectors,
                   const AvgOptions& options) {
  if (vectors.dim() == 0 || vectors.size() == 0)
    throw UsageError("avg model requires non-empty pretrained vectors");

  LogregProblem problem;
  problem.n_features = vectors.dim();
  problem.n_classes = labels.size();
  problem.rows.reserve(train.size());
  problem.labels.reserve(train.size());
  for (const LabeledExample& ex : train) {
    std::vector<double> features = avg_represent(ex.tokens, vectors);
    std::vector<std::pair<int, double>> row;
    row.reserve(features.size());
    for (std::size_t j = 0; j < features.size(); ++j)
      row.emplace_back(static_cast<int>(j), features[j]);
    problem.rows.push_back(std::move(row));
    problem.labels.push_back(ex.label);
  }
  LogregResult fit = train_logreg_l2(problem, options.logreg);

  AvgModel model;
  model.vectors = std::move(vectors);
  model.w = std::move(fit.w);
  model.b = std::move(fit.b);
  model.labels = labels;
  model.l2 = options.logreg.l2;
  model.tol = options.logreg.tol;
  return model;
}

int argmax(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("argmax: empty input");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[best]) best = i;
  return static_cast<int>(best);
}

bool loss_trend_non_increasing(std::span<const double> losses,
                               std::size_t window, double slack) {
  if (losses.size() < 2) return true;
  if (window == 0 || window > losses.size()) window = losses.size();
  std::vector<double> averages;
  for (std::size_t i = 0; i + window <= losses.size(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < window; ++j) s += losses[i + j];
    averages.push_back(s / static_cast<double>(window));
  }
  for (std::size_t i = 1; i < averages.size(); ++i)
    if (averages[i] > averages[i - 1] + slack) return false;
  return true;
}

}  // namespace emopred

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "emopred/checkpoint.hpp"
#include "emopred/corpus.hpp"
#include "emopred/errors.hpp"
#include "emopred/eval.hpp"
#include "emopred/kernels.hpp"
#include "emopred/models.hpp"
#include "emopred/selftest.hpp"
#include "emopred/version.hpp"

using namespace emopred;
using nlohmann::json;

namespace {

// Exit codes: 0 success, 1 verification failure, 2 usage error, 3 data error.
constexpr int kExitOk = 0;
constexpr int kExitVerification = 1;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;

struct GlobalOptions {
  std::string kernels = "auto";
};

const EmojiTable& resolve_emoji_table(const std::string& path,
                                      EmojiTable& storage) {
  if (path.empty()) return EmojiTable::built_in();
  storage = EmojiTable::from_file(path);
  return storage;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << text;
}

json base_config(const std::string& command, const GlobalOptions& global) {
  json j;
  j["command"] = command;
  j["tool_version"] = kToolVersion;
  j["kernels"] = kernels::active().name;
  (void)global;
  return j;
}

// ---------------------------------------------------------------- prepare

struct PrepareOptions {
  std::vector<std::string> inputs;
  int top_k = 20;
  std::string out_dir;
  bool strict = false;
  std::string emoji_table;
};

int cmd_prepare(const PrepareOptions& opt, const GlobalOptions& global) {
  EmojiTable storage;
  const EmojiTable& table = resolve_emoji_table(opt.emoji_table, storage);

  std::vector<RawTweet> tweets;
  IngestStats ingest_total;
  for (const std::string& path : opt.inputs) {
    IngestStats stats;
    std::vector<RawTweet> part = ingest_jsonl(path, opt.strict, &stats);
    ingest_total.lines += stats.lines;
    ingest_total.parsed += stats.parsed;
    ingest_total.skipped += stats.skipped;
    tweets.insert(tweets.end(), std::make_move_iterator(part.begin()),
                  std::make_move_iterator(part.end()));
  }
  for (RawTweet& t : tweets) t.text = normalize(t.text);

  auto freqs = count_emoji_frequencies(tweets, table);
  LabelSet labels = top_k_labels(freqs, static_cast<std::size_t>(opt.top_k));

  FilterStats filter_stats;
  std::vector<LabeledExample> examples =
      filter_single_emoji(tweets, labels, table, &filter_stats);
  if (examples.empty()) throw DataError("empty dataset: no usable tweets");

  SplitCorpus splits = chronological_split(std::move(examples));
  write_dataset(opt.out_dir, labels, splits);

  json config = base_config("prepare", global);
  config["input"] = opt.inputs;
  config["top_k"] = opt.top_k;
  config["out"] = opt.out_dir;
  config["strict"] = opt.strict;
  config["emoji_table"] = opt.emoji_table.empty() ? "built-in" : opt.emoji_table;

  json stats;
  stats["config"] = config;
  stats["ingest"] = {{"lines", ingest_total.lines},
                     {"parsed", ingest_total.parsed},
                     {"skipped_malformed", ingest_total.skipped}};
  json freq_json = json::array();
  for (const auto& [emoji, count] : freqs)
    freq_json.push_back({{"emoji", emoji}, {"tweets", count}});
  stats["emoji_document_frequency"] = std::move(freq_json);
  stats["labels"] = labels.emojis();
  stats["drops"] = {{"no_emoji", filter_stats.no_emoji},
                    {"multiple_emoji", filter_stats.multi_emoji},
                    {"not_in_label_set", filter_stats.not_in_label_set},
                    {"empty_after_removal", filter_stats.empty_tokens}};
  stats["kept"] = filter_stats.kept;
  stats["split"] = {{"train", splits.train.size()},
                    {"dev", splits.dev.size()},
                    {"test", splits.test.size()}};
  write_text_file(opt.out_dir + "/stats.json", stats.dump(2) + "\n");

  std::printf("prepared %zu examples (train %zu / dev %zu / test %zu), K=%d\n",
              filter_stats.kept, splits.train.size(), splits.dev.size(),
              splits.test.size(), opt.top_k);
  std::printf("skipped %zu malformed lines; dataset written to %s\n",
              ingest_total.skipped, opt.out_dir.c_str());
  return kExitOk;
}

// ------------------------------------------------------------------ train

struct TrainOptions {
  std::string data_dir;
  std::string model = "word-blstm";
  std::string pretrained;
  std::string out;
  std::string log;
  std::uint64_t seed = 1;
  // blstm hyperparameters
  std::size_t epochs = 30;
  std::size_t batch_size = 32;
  double lr = 1e-3;
  std::string optimizer = "adam";
  std::size_t patience = 5;
  std::size_t word_dim = 100;
  std::size_t hidden = 100;
  std::size_t char_dim = 32;
  std::size_t char_hidden = 50;
  std::size_t s_dim = 100;
  std::size_t max_tokens = 64;
  std::size_t max_chars = 32;
  double oov_prob = 0.5;
  double stop_train_acc = 0.0;
  // baseline hyperparameters
  std::size_t top_n = 50000;
  double l2 = 1.0;
  double tol = 1e-3;
  std::size_t max_iter = 1000;
};

json train_config_json(const TrainOptions& opt, const GlobalOptions& global) {
  json j = base_config("train", global);
  j["data"] = opt.data_dir;
  j["model"] = opt.model;
  j["pretrained"] = opt.pretrained;
  j["out"] = opt.out;
  j["seed"] = opt.seed;
  j["epochs"] = opt.epochs;
  j["batch_size"] = opt.batch_size;
  j["lr"] = opt.lr;
  j["optimizer"] = opt.optimizer;
  j["patience"] = opt.patience;
  j["word_dim"] = opt.word_dim;
  j["hidden"] = opt.hidden;
  j["char_dim"] = opt.char_dim;
  j["char_hidden"] = opt.char_hidden;
  j["s_dim"] = opt.s_dim;
  j["max_tokens"] = opt.max_tokens;
  j["max_chars"] = opt.max_chars;
  j["oov_prob"] = opt.oov_prob;
  j["top_n"] = opt.top_n;
  j["l2"] = opt.l2;
  j["tol"] = opt.tol;
  j["max_iter"] = opt.max_iter;
  return j;
}

double split_macro_f1(AnyModel& model, const std::vector<LabeledExample>& split,
                      std::size_t k) {
  if (split.empty()) return 0.0;
  std::vector<int> golds, preds;
  for (const LabeledExample& ex : split) {
    golds.push_back(ex.label);
    preds.push_back(argmax(model_predict(model, ex.tokens)));
  }
  return prf(confusion(golds, preds, k)).macro_f1;
}

int cmd_train(const TrainOptions& opt, const GlobalOptions& global) {
  Dataset dataset = load_dataset(opt.data_dir);
  json run_config = train_config_json(opt, global);
  std::string log_path = opt.log.empty() ? opt.out + ".log.jsonl" : opt.log;

  bool is_blstm = opt.model == "word-blstm" || opt.model == "char-blstm";
  if (opt.model == "bow" && !opt.pretrained.empty())
    throw UsageError("--pretrained is not used by the bow model");
  if (opt.model == "avg" && opt.pretrained.empty())
    throw UsageError("--model avg requires --pretrained");

  PretrainedVectors vectors;
  if (!opt.pretrained.empty()) {
    std::size_t dups = 0;
    vectors = load_word2vec_text(opt.pretrained, &dups);
    if (dups > 0)
      std::fprintf(stderr, "warning: %zu duplicate tokens in %s (last wins)\n",
                   dups, opt.pretrained.c_str());
  }

  AnyModel model{BowModel{}};
  std::string log_text;
  if (opt.model == "bow") {
    BowOptions options;
    options.top_n = opt.top_n;
    options.logreg = {opt.l2, opt.tol, opt.max_iter};
    model = train_bow(dataset.splits.train, dataset.labels, options);
  } else if (opt.model == "avg") {
    AvgOptions options;
    options.logreg = {opt.l2, opt.tol, opt.max_iter};
    model = train_avg(dataset.splits.train, dataset.labels, std::move(vectors),
                      options);
  } else {
    Variant variant;
    if (opt.model == "word-blstm")
      variant = opt.pretrained.empty() ? Variant::kWord : Variant::kWordPre;
    else
      variant = opt.pretrained.empty() ? Variant::kChar : Variant::kCharPre;

    TrainConfig tc;
    tc.epochs = opt.epochs;
    tc.batch_size = opt.batch_size;
    tc.lr = opt.lr;
    tc.optimizer = opt.optimizer;
    tc.seed = opt.seed;
    tc.patience = opt.patience;
    tc.stop_train_acc = opt.stop_train_acc;

    BlstmConfig mc;
    mc.word_dim = opt.word_dim;
    mc.hidden = opt.hidden;
    mc.char_dim = opt.char_dim;
    mc.char_hidden = opt.char_hidden;
    mc.s_dim = opt.s_dim;
    mc.max_tokens = opt.max_tokens;
    mc.max_chars = opt.max_chars;
    mc.oov_replace_prob = opt.oov_prob;

    BlstmTrainResult result =
        train_blstm(dataset.splits, dataset.labels, variant, tc, mc,
                    opt.pretrained.empty() ? nullptr : &vectors);
    for (const EpochLog& e : result.log) {
      json line = {{"epoch", e.epoch},
                   {"train_loss", e.train_loss},
                   {"dev_f1", e.dev_f1},
                   {"elapsed_s", e.elapsed_s}};
      if (e.train_acc >= 0.0) line["train_acc"] = e.train_acc;
      log_text += line.dump() + "\n";
    }
    model = std::move(result.model);
  }

  if (!is_blstm) {
    json line = {{"epoch", 1},
                 {"train_loss", 0.0},
                 {"dev_f1", split_macro_f1(model, dataset.splits.dev,
                                           dataset.labels.size())},
                 {"elapsed_s", 0.0}};
    log_text = line.dump() + "\n";
  }

  save_model(opt.out, model, run_config);
  write_text_file(log_path, log_text);
  std::printf("checkpoint written to %s (model %s, K=%zu)\n", opt.out.c_str(),
              opt.model.c_str(), dataset.labels.size());
  return kExitOk;
}

// --------------------------------------------------------------- pretrain

struct PretrainOptions {
  std::string data_dir;
  std::string out;
  std::size_t dim = 100;
  std::size_t window = 5;
  std::size_t negatives = 5;
  std::size_t epochs = 5;
  double lr = 0.025;
  double subsample = 0.0;
  std::size_t min_count = 1;
  std::uint64_t seed = 1;
};

int cmd_pretrain(const PretrainOptions& opt, const GlobalOptions& global) {
  (void)global;
  Dataset dataset = load_dataset(opt.data_dir);
  std::vector<std::vector<std::string>> sentences;
  sentences.reserve(dataset.splits.train.size());
  for (const LabeledExample& ex : dataset.splits.train)
    sentences.push_back(ex.tokens);  // train split only

  SkipgramConfig cfg;
  cfg.dim = opt.dim;
  cfg.window = opt.window;
  cfg.negatives = opt.negatives;
  cfg.epochs = opt.epochs;
  cfg.lr = opt.lr;
  cfg.subsample = opt.subsample;
  cfg.min_count = opt.min_count;

  SkipgramResult result = train_skipgram(sentences, cfg, Rng(opt.seed));
  save_word2vec_text(result.vectors, opt.out);

  std::printf("trained %zu-dim vectors for %zu tokens over %zu epochs\n",
              opt.dim, result.vectors.size(), opt.epochs);
  if (!result.epoch_loss.empty())
    std::printf("pair loss %.4f -> %.4f; vectors written to %s\n",
                result.epoch_loss.front(), result.epoch_loss.back(),
                opt.out.c_str());
  return kExitOk;
}

// --------------------------------------------------------------- evaluate

struct EvaluateOptions {
  std::string model_path;
  std::string data_dir;
  std::string split = "test";
  std::string report;
};

const std::vector<LabeledExample>& pick_split(const Dataset& d,
                                              const std::string& name) {
  if (name == "train") return d.splits.train;
  if (name == "dev") return d.splits.dev;
  return d.splits.test;
}

int cmd_evaluate(const EvaluateOptions& opt, const GlobalOptions& global) {
  LoadedModel loaded = load_model(opt.model_path);
  Dataset dataset = load_dataset(opt.data_dir);
  if (!(model_labels(loaded.model) == dataset.labels))
    throw DataError("label-set mismatch between checkpoint (" +
                    std::to_string(model_labels(loaded.model).size()) +
                    " classes) and dataset (" +
                    std::to_string(dataset.labels.size()) + " classes)");

  const std::vector<LabeledExample>& split = pick_split(dataset, opt.split);
  if (split.empty()) throw DataError("split '" + opt.split + "' is empty");

  std::vector<int> golds, preds;
  std::vector<std::vector<double>> prob_rows;
  golds.reserve(split.size());
  for (const LabeledExample& ex : split) {
    std::vector<double> probs = model_predict(loaded.model, ex.tokens);
    preds.push_back(argmax(probs));
    golds.push_back(ex.label);
    prob_rows.push_back(std::move(probs));
  }

  Report report = prf(confusion(golds, preds, dataset.labels.size()));
  add_ranks(report, prob_rows, golds);

  json provenance = base_config("evaluate", global);
  provenance["model"] = opt.model_path;
  provenance["model_kind"] = model_kind(loaded.model);
  provenance["data"] = opt.data_dir;
  provenance["split"] = opt.split;
  provenance["report"] = opt.report;
  if (loaded.meta.contains("run_config"))
    provenance["train_config"] = loaded.meta["run_config"];
  report.provenance = provenance;

  write_text_file(opt.report + ".json",
                  report_to_json(report, dataset.labels).dump(2) + "\n");
  write_text_file(opt.report + ".txt", report_to_text(report, dataset.labels));

  std::printf("%s on %s: macro F1 %.4f, weighted F1 %.4f (%zu examples)\n",
              model_kind(loaded.model), opt.split.c_str(), report.macro_f1,
              report.weighted_f1, split.size());
  return kExitOk;
}

// ---------------------------------------------------------------- predict

struct PredictOptions {
  std::string model_path;
  std::string text;
  int top = 5;
  std::string emoji_table;
};

int cmd_predict(const PredictOptions& opt) {
  EmojiTable storage;
  const EmojiTable& table = resolve_emoji_table(opt.emoji_table, storage);

  std::string normalized = normalize(opt.text);
  std::vector<std::string> tokens = tokenize(normalized, table);
  if (tokens.empty())
    throw UsageError("--text normalizes to an empty token list");

  LoadedModel loaded = load_model(opt.model_path);
  std::vector<double> probs = model_predict(loaded.model, tokens);
  const LabelSet& labels = model_labels(loaded.model);

  std::vector<int> order(probs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return probs[a] > probs[b]; });

  std::size_t n =
      std::min<std::size_t>(order.size(), static_cast<std::size_t>(opt.top));
  for (std::size_t i = 0; i < n; ++i) {
    int cls = order[i];
    std::printf("%2zu  %s  %.6f\n", i + 1, labels.emoji(cls).c_str(),
                probs[cls]);
  }
  return kExitOk;
}

// ---------------------------------------------------------- compare-human

struct CompareOptions {
  std::string annotations;
  std::string model_path;
  std::string data_dir;
  std::string report;
};

int cmd_compare_human(const CompareOptions& opt, const GlobalOptions& global) {
  AnnotationSet annotations = AnnotationSet::from_csv(opt.annotations);
  LoadedModel loaded = load_model(opt.model_path);
  Dataset dataset = load_dataset(opt.data_dir);
  if (!(model_labels(loaded.model) == dataset.labels))
    throw DataError("label-set mismatch between checkpoint and dataset");

  std::map<std::string, const LabeledExample*> test_by_id;
  for (const LabeledExample& ex : dataset.splits.test)
    test_by_id.emplace(ex.id, &ex);

  std::set<std::string> annotated_ids;
  for (const Annotation& a : annotations.records)
    annotated_ids.insert(a.tweet_id);

  std::map<std::string, int> golds, model_preds;
  for (const std::string& id : annotated_ids) {
    auto it = test_by_id.find(id);
    if (it == test_by_id.end())
      throw DataError("annotation references unknown test tweet id '" + id +
                      "'");
    golds[id] = it->second->label;
    model_preds[id] = argmax(model_predict(loaded.model, it->second->tokens));
  }

  HumanComparison cmp =
      compare_human_model(annotations, model_preds, golds, dataset.labels);

  json provenance = base_config("compare-human", global);
  provenance["annotations"] = opt.annotations;
  provenance["model"] = opt.model_path;
  provenance["data"] = opt.data_dir;
  cmp.human.provenance = provenance;
  cmp.model.provenance = provenance;

  std::string text = comparison_to_text(cmp, dataset.labels);
  if (!opt.report.empty()) {
    json j = comparison_to_json(cmp, dataset.labels);
    j["provenance"] = provenance;
    write_text_file(opt.report + ".json", j.dump(2) + "\n");
    write_text_file(opt.report + ".txt", text);
  }
  std::fputs(text.c_str(), stdout);
  return kExitOk;
}

// --------------------------------------------------------------- gradcheck

struct GradcheckOptions {
  std::string variant = "all";
  std::uint64_t seed = 1;
  double eps = 1e-5;
  double tol = 1e-4;
  bool corrupt = false;
};

int cmd_gradcheck(const GradcheckOptions& opt) {
  std::vector<Variant> variants;
  if (opt.variant == "all") {
    variants = {Variant::kWord, Variant::kChar, Variant::kWordPre,
                Variant::kCharPre};
  } else if (opt.variant == "word-blstm") {
    variants = {Variant::kWord};
  } else if (opt.variant == "char-blstm") {
    variants = {Variant::kChar};
  } else if (opt.variant == "word-blstm-pre") {
    variants = {Variant::kWordPre};
  } else if (opt.variant == "char-blstm-pre") {
    variants = {Variant::kCharPre};
  } else {
    throw UsageError("unknown --variant '" + opt.variant + "'");
  }

  bool all_passed = true;
  for (Variant v : variants) {
    GradCheckReport report = gradcheck_variant(v, opt.seed, opt.eps, opt.corrupt);
    bool passed = report.passed(opt.tol);
    all_passed = all_passed && passed;
    std::printf("%-9s  max rel err %.3e  (%zu coords, worst %s[%zu])  %s\n",
                variant_name(v), report.max_rel_error, report.coords_checked,
                report.worst_param.c_str(), report.worst_coord,
                passed ? "PASS" : "FAIL");
  }
  return all_passed ? kExitOk : kExitVerification;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"emoji prediction: corpus preparation, BLSTM and baseline "
               "training, evaluation, and human-comparison reports"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);
  app.set_config("--config", "", "key=value config file (flags win)");
  app.allow_config_extras(CLI::config_extras_mode::error);

  GlobalOptions global;
  app.add_option("--kernels", global.kernels,
                 "kernel backend: auto, scalar or avx2")
      ->check(CLI::IsMember({"auto", "scalar", "avx2"}))
      ->capture_default_str();

  PrepareOptions prepare;
  CLI::App* prepare_cmd = app.add_subcommand(
      "prepare", "build a dataset directory from tweet JSON-lines files");
  prepare_cmd->add_option("--input", prepare.inputs, "input JSONL file(s)")
      ->required()
      ->check(CLI::ExistingFile);
  prepare_cmd->add_option("--top-k", prepare.top_k, "label set size")
      ->check(CLI::IsMember({5, 10, 20}))
      ->capture_default_str();
  prepare_cmd->add_option("--out", prepare.out_dir, "output dataset directory")
      ->required();
  prepare_cmd->add_flag("--strict", prepare.strict,
                        "abort on malformed input lines");
  prepare_cmd->add_option("--emoji-table", prepare.emoji_table,
                          "override the built-in emoji table");

  TrainOptions train;
  CLI::App* train_cmd = app.add_subcommand("train", "train a model");
  train_cmd->add_option("--data", train.data_dir, "dataset directory")
      ->required();
  train_cmd
      ->add_option("--model", train.model, "bow, avg, word-blstm or char-blstm")
      ->check(CLI::IsMember({"bow", "avg", "word-blstm", "char-blstm"}))
      ->required();
  train_cmd->add_option("--pretrained", train.pretrained,
                        "word2vec-format text vectors (makes a +P variant)");
  train_cmd->add_option("--out", train.out, "checkpoint path")->required();
  train_cmd->add_option("--log", train.log,
                        "training log path (default <out>.log.jsonl)");
  train_cmd->add_option("--seed", train.seed, "random seed")
      ->capture_default_str();
  train_cmd->add_option("--epochs", train.epochs)
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  train_cmd->add_option("--batch-size", train.batch_size)
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  train_cmd->add_option("--lr", train.lr)
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  train_cmd->add_option("--optimizer", train.optimizer)
      ->check(CLI::IsMember({"adam", "sgd"}))
      ->capture_default_str();
  train_cmd->add_option("--patience", train.patience)
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  train_cmd->add_option("--word-dim", train.word_dim)
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  train_cmd->add_option("--hidden", train.hidden)
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  train_cmd->add_option("--char-dim", train.char_dim)
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  train_cmd->add_option("--char-hidden", train.char_hidden)
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  train_cmd->add_option("--s-dim", train.s_dim)
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  train_cmd->add_option("--max-tokens", train.max_tokens)
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  train_cmd->add_option("--max-chars", train.max_chars)
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  train_cmd->add_option("--oov-prob", train.oov_prob)
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  train_cmd
      ->add_option("--stop-train-acc", train.stop_train_acc,
                   "stop once training accuracy reaches this value")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  train_cmd->add_option("--top-n", train.top_n, "bow: TF-IDF feature count")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  train_cmd->add_option("--l2", train.l2, "baselines: L2 strength")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  train_cmd->add_option("--tol", train.tol, "baselines: solver tolerance")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  train_cmd->add_option("--max-iter", train.max_iter, "baselines: iteration cap")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  PretrainOptions pretrain;
  CLI::App* pretrain_cmd = app.add_subcommand(
      "pretrain", "train skip-gram vectors on a dataset's training split");
  pretrain_cmd->add_option("--data", pretrain.data_dir, "dataset directory")
      ->required();
  pretrain_cmd
      ->add_option("--out", pretrain.out, "output vectors (word2vec text)")
      ->required();
  pretrain_cmd->add_option("--dim", pretrain.dim)
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  pretrain_cmd->add_option("--window", pretrain.window)
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  pretrain_cmd->add_option("--negatives", pretrain.negatives)
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  pretrain_cmd->add_option("--epochs", pretrain.epochs)
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  pretrain_cmd->add_option("--lr", pretrain.lr)
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  pretrain_cmd
      ->add_option("--subsample", pretrain.subsample,
                   "frequent-word subsampling threshold (0 disables)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  pretrain_cmd->add_option("--min-count", pretrain.min_count)
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  pretrain_cmd->add_option("--seed", pretrain.seed)->capture_default_str();

  EvaluateOptions evaluate;
  CLI::App* evaluate_cmd =
      app.add_subcommand("evaluate", "score a checkpoint on a dataset split");
  evaluate_cmd->add_option("--model", evaluate.model_path, "checkpoint path")
      ->required()
      ->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--data", evaluate.data_dir, "dataset directory")
      ->required();
  evaluate_cmd->add_option("--split", evaluate.split, "train, dev or test")
      ->check(CLI::IsMember({"train", "dev", "test"}))
      ->capture_default_str();
  evaluate_cmd
      ->add_option("--report", evaluate.report,
                   "report prefix (writes <prefix>.json and <prefix>.txt)")
      ->required();

  PredictOptions predict;
  CLI::App* predict_cmd =
      app.add_subcommand("predict", "rank emojis for a single message");
  predict_cmd->add_option("--model", predict.model_path, "checkpoint path")
      ->required()
      ->check(CLI::ExistingFile);
  predict_cmd->add_option("--text", predict.text, "message text")->required();
  predict_cmd->add_option("--top", predict.top, "number of emojis to print")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  predict_cmd->add_option("--emoji-table", predict.emoji_table,
                          "override the built-in emoji table");

  CompareOptions compare;
  CLI::App* compare_cmd = app.add_subcommand(
      "compare-human", "score human annotations against a model");
  compare_cmd
      ->add_option("--annotations", compare.annotations,
                   "CSV: tweet_id,annotator_id,emoji")
      ->required()
      ->check(CLI::ExistingFile);
  compare_cmd->add_option("--model", compare.model_path, "checkpoint path")
      ->required()
      ->check(CLI::ExistingFile);
  compare_cmd->add_option("--data", compare.data_dir, "dataset directory")
      ->required();
  compare_cmd->add_option("--report", compare.report, "report prefix (optional)");

  GradcheckOptions gradcheck;
  CLI::App* gradcheck_cmd = app.add_subcommand(
      "gradcheck", "finite-difference check of the BLSTM variants");
  gradcheck_cmd
      ->add_option("--variant", gradcheck.variant,
                   "all, word-blstm, char-blstm, word-blstm-pre or "
                   "char-blstm-pre")
      ->capture_default_str();
  gradcheck_cmd->add_option("--seed", gradcheck.seed)->capture_default_str();
  gradcheck_cmd->add_option("--eps", gradcheck.eps)->capture_default_str();
  gradcheck_cmd->add_option("--tol", gradcheck.tol)->capture_default_str();
  gradcheck_cmd->add_flag("--corrupt", gradcheck.corrupt)->group("");

  try {
    app.parse(argc, argv);
    if (!kernels::select(global.kernels))
      throw UsageError("kernel backend '" + global.kernels +
                       "' is not available on this machine");

    if (prepare_cmd->parsed()) return cmd_prepare(prepare, global);
    if (train_cmd->parsed()) return cmd_train(train, global);
    if (pretrain_cmd->parsed()) return cmd_pretrain(pretrain, global);
    if (evaluate_cmd->parsed()) return cmd_evaluate(evaluate, global);
    if (predict_cmd->parsed()) return cmd_predict(predict);
    if (compare_cmd->parsed()) return cmd_compare_human(compare, global);
    if (gradcheck_cmd->parsed()) return cmd_gradcheck(gradcheck);
    return kExitUsage;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  } catch (const UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return kExitUsage;
  } catch (const DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kExitData;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitVerification;
  }
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "emopred/errors.hpp"
#include "emopred/eval.hpp"
#include "emopred/rng.hpp"
#include "testutil.hpp"

using namespace emopred;

namespace {

ConfusionMatrix from_rows(const std::vector<std::vector<std::int64_t>>& rows) {
  ConfusionMatrix m(rows.size());
  for (std::size_t g = 0; g < rows.size(); ++g)
    for (std::size_t p = 0; p < rows.size(); ++p) m.at(g, p) = rows[g][p];
  return m;
}

// Brute-force oracle: per-class TP/FP/FN recount straight from the pairs.
struct BruteForce {
  std::vector<std::int64_t> tp, fp, fn;
  explicit BruteForce(std::size_t k) : tp(k, 0), fp(k, 0), fn(k, 0) {}
};

BruteForce recount(std::span<const int> golds, std::span<const int> preds,
                   std::size_t k) {
  BruteForce b(k);
  for (std::size_t i = 0; i < golds.size(); ++i) {
    if (golds[i] == preds[i]) {
      ++b.tp[static_cast<std::size_t>(golds[i])];
    } else {
      ++b.fp[static_cast<std::size_t>(preds[i])];
      ++b.fn[static_cast<std::size_t>(golds[i])];
    }
  }
  return b;
}

}  // namespace

TEST_CASE("confusion fixtures") {
  std::vector<int> golds = {0, 0, 1};
  std::vector<int> preds = {0, 1, 1};
  ConfusionMatrix m = confusion(golds, preds, 2);
  CHECK(m.at(0, 0) == 1);
  CHECK(m.at(0, 1) == 1);
  CHECK(m.at(1, 0) == 0);
  CHECK(m.at(1, 1) == 1);
  CHECK(m.total() == 3);

  std::vector<int> perfect = {0, 1, 2, 1};
  ConfusionMatrix d = confusion(perfect, perfect, 3);
  for (std::size_t g = 0; g < 3; ++g)
    for (std::size_t p = 0; p < 3; ++p)
      CHECK(d.at(g, p) == (g == p ? d.row_sum(g) : 0));

  ConfusionMatrix empty = confusion(std::vector<int>{}, std::vector<int>{}, 4);
  CHECK(empty.total() == 0);

  std::vector<int> bad = {5};
  std::vector<int> one = {0};
  CHECK_THROWS_AS(confusion(bad, one, 2), std::invalid_argument);
  CHECK_THROWS_AS(confusion(one, std::vector<int>{0, 1}, 2),
                  std::invalid_argument);
}

TEST_CASE("prf: hand-verified fixture") {
  Report r = prf(from_rows({{2, 1}, {0, 3}}));
  CHECK(r.per_class[0].precision == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(r.per_class[0].recall == doctest::Approx(0.667).epsilon(1e-3));
  CHECK(r.per_class[0].f1 == doctest::Approx(0.8).epsilon(1e-3));
  CHECK(r.per_class[1].precision == doctest::Approx(0.75).epsilon(1e-3));
  CHECK(r.per_class[1].recall == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(r.per_class[1].f1 == doctest::Approx(0.857).epsilon(1e-3));
  CHECK(r.per_class[0].support == 3);
  CHECK(r.per_class[1].support == 3);
  CHECK(r.macro_f1 == doctest::Approx((0.8 + 6.0 / 7.0) / 2).epsilon(1e-9));
  CHECK(r.weighted_f1 == doctest::Approx((0.8 + 6.0 / 7.0) / 2).epsilon(1e-9));

  Report diag = prf(from_rows({{4, 0}, {0, 2}}));
  for (const ClassMetrics& m : diag.per_class) {
    CHECK(m.precision == 1.0);
    CHECK(m.recall == 1.0);
    CHECK(m.f1 == 1.0);
  }
}

TEST_CASE("prf: zero-support class conventions") {
  // class 2 never appears as gold
  Report r = prf(from_rows({{3, 0, 1}, {0, 2, 0}, {0, 0, 0}}));
  CHECK(r.per_class[2].recall == 0.0);
  CHECK(r.per_class[2].f1 == 0.0);
  CHECK(r.per_class[2].support == 0);
  CHECK(r.zero_support_classes == 1);
  // macro over all classes vs macro over supported classes
  CHECK(r.macro_f1 < r.macro_nz_f1);
  // support column equals confusion row sums and totals
  std::int64_t support_sum = 0;
  for (const auto& m : r.per_class) support_sum += m.support;
  CHECK(support_sum == r.matrix.total());
}

TEST_CASE("prf agrees exactly with a brute-force recount") {
  Rng rng(33);
  for (int trial = 0; trial < 300; ++trial) {
    std::size_t k = 2 + rng.below(8);
    std::size_t n = 1 + rng.below(60);
    std::vector<int> golds(n), preds(n);
    for (std::size_t i = 0; i < n; ++i) {
      golds[i] = static_cast<int>(rng.below(k));
      preds[i] = static_cast<int>(rng.below(k));
    }
    Report r = prf(confusion(golds, preds, k));
    BruteForce b = recount(golds, preds, k);
    for (std::size_t c = 0; c < k; ++c) {
      double p_expect = (b.tp[c] + b.fp[c]) > 0
                            ? double(b.tp[c]) / double(b.tp[c] + b.fp[c])
                            : 0.0;
      double r_expect = (b.tp[c] + b.fn[c]) > 0
                            ? double(b.tp[c]) / double(b.tp[c] + b.fn[c])
                            : 0.0;
      CHECK(r.per_class[c].precision == p_expect);
      CHECK(r.per_class[c].recall == r_expect);
      CHECK(r.per_class[c].support == b.tp[c] + b.fn[c]);
    }
  }
}

TEST_CASE("example_rank fixtures") {
  // gold holds the maximum -> rank 1
  CHECK(example_rank(std::vector<double>{0.7, 0.2, 0.1}, 0) == 1);
  // uniform: ties do not raise the rank
  CHECK(example_rank(std::vector<double>{0.25, 0.25, 0.25, 0.25}, 2) == 1);
  CHECK(example_rank(std::vector<double>{0.5, 0.3, 0.2}, 2) == 3);
  CHECK_THROWS_AS(example_rank(std::vector<double>{1.0}, 3),
                  std::invalid_argument);
}

TEST_CASE("rank_metric: per-class means and range") {
  std::vector<std::vector<double>> rows = {
      {0.6, 0.3, 0.1},  // gold 0 -> rank 1
      {0.1, 0.3, 0.6},  // gold 0 -> rank 3
      {0.2, 0.5, 0.3},  // gold 1 -> rank 1
  };
  std::vector<int> golds = {0, 0, 1};
  std::vector<double> ranks = rank_metric(rows, golds, 3);
  CHECK(ranks[0] == doctest::Approx(2.0));
  CHECK(ranks[1] == doctest::Approx(1.0));
  CHECK(ranks[2] == 0.0);  // no examples

  // one-hot rows with correct gold are always rank 1; range stays in [1, K]
  Rng rng(44);
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t k = 2 + rng.below(10);
    std::vector<double> probs(k, 0.0);
    int gold = static_cast<int>(rng.below(k));
    probs[static_cast<std::size_t>(gold)] = 1.0;
    CHECK(example_rank(probs, gold) == 1);
    for (double& p : probs) p = rng.uniform();
    int r = example_rank(probs, gold);
    CHECK(r >= 1);
    CHECK(r <= static_cast<int>(k));
  }
}

TEST_CASE("majority_label fixtures") {
  CHECK(majority_label(std::vector<int>{0, 0, 1, 2}) == 0);
  CHECK_FALSE(majority_label(std::vector<int>{0, 0, 1, 1}).has_value());
  CHECK(majority_label(std::vector<int>{2}) == 2);
  CHECK_THROWS_AS(majority_label(std::vector<int>{}), std::invalid_argument);
}

TEST_CASE("pairwise_agreement: hand-enumerated fixtures") {
  AnnotationSet one;
  one.records = {{"t1", "a1", "X"},
                 {"t1", "a2", "X"},
                 {"t1", "a3", "Y"},
                 {"t1", "a4", "Z"}};
  CHECK(pairwise_agreement(one) == doctest::Approx(1.0 / 6).epsilon(1e-12));

  AnnotationSet two = one;
  for (const char* ann : {"a1", "a2", "a3", "a4"})
    two.records.push_back({"t2", ann, "W"});
  CHECK(pairwise_agreement(two) == doctest::Approx(7.0 / 12).epsilon(1e-12));

  // unanimity
  AnnotationSet all_agree;
  for (int t = 0; t < 3; ++t)
    for (int a = 0; a < 4; ++a)
      all_agree.records.push_back({"t" + std::to_string(t),
                                   "a" + std::to_string(a), "X"});
  CHECK(pairwise_agreement(all_agree) == 1.0);

  AnnotationSet lonely;
  lonely.records = {{"t1", "a1", "X"}};
  CHECK_THROWS_AS(pairwise_agreement(lonely), DataError);
}

TEST_CASE("pairwise_agreement is invariant to relabeling and order") {
  Rng rng(55);
  AnnotationSet base;
  for (int t = 0; t < 12; ++t)
    for (int a = 0; a < 4; ++a)
      base.records.push_back({"tweet" + std::to_string(t),
                              "ann" + std::to_string(a),
                              std::string(1, static_cast<char>('A' + rng.below(3)))});
  double reference = pairwise_agreement(base);

  AnnotationSet renamed = base;
  for (Annotation& a : renamed.records) {
    a.annotator_id = "renamed_" + a.annotator_id;
    a.tweet_id = "zzz_" + a.tweet_id;
  }
  rng.shuffle(renamed.records);
  CHECK(pairwise_agreement(renamed) == reference);
}

TEST_CASE("compare_human_model: ties excluded, perfect model scores ones") {
  LabelSet labels = testutil::k_labels(3);
  AnnotationSet annotations;
  std::map<std::string, int> golds, model_preds;
  // 6 tweets; tweet t5 is a 2-2 tie and must drop out
  for (int t = 0; t < 6; ++t) {
    std::string id = "t" + std::to_string(t);
    int gold = t % 3;
    golds[id] = gold;
    model_preds[id] = gold;  // the model is perfect
    for (int a = 0; a < 4; ++a) {
      int vote = gold;
      if (t == 5) vote = a < 2 ? 0 : 1;
      else if (a == 3) vote = (gold + 1) % 3;  // one dissenter, majority holds
      annotations.records.push_back(
          {id, "a" + std::to_string(a), labels.emoji(vote)});
    }
  }
  HumanComparison cmp =
      compare_human_model(annotations, model_preds, golds, labels);
  CHECK(cmp.tie_tweets == 1);
  CHECK(cmp.compared == 5);
  for (const ClassMetrics& m : cmp.model.per_class) {
    if (m.support > 0) {
      CHECK(m.precision == 1.0);
      CHECK(m.recall == 1.0);
      CHECK(m.f1 == 1.0);
    }
  }
  // human majority equals gold on the five counted tweets
  for (const ClassMetrics& m : cmp.human.per_class)
    if (m.support > 0) CHECK(m.f1 == 1.0);

  // over-selection surfaces through column sums vs row sums
  CHECK(cmp.human.matrix.col_sum(0) >= 0);

  AnnotationSet alien = annotations;
  alien.records.push_back({"t0", "a9", "not-an-emoji"});
  CHECK_THROWS_AS(compare_human_model(alien, model_preds, golds, labels),
                  DataError);

  AnnotationSet unknown_tweet = annotations;
  for (int a = 0; a < 4; ++a)
    unknown_tweet.records.push_back(
        {"mystery", "a" + std::to_string(a), labels.emoji(0)});
  CHECK_THROWS_AS(
      compare_human_model(unknown_tweet, model_preds, golds, labels),
      DataError);
}

TEST_CASE("annotation csv parsing") {
  namespace fs = std::filesystem;
  fs::path path = fs::temp_directory_path() / "emopred_ann.csv";
  {
    std::ofstream out(path, std::ios::binary);
    out << "tweet_id,annotator_id,emoji\n"
        << "t1,a1,❤\n"
        << "t1,a2,\U0001F602\n";
  }
  AnnotationSet set = AnnotationSet::from_csv(path.string());
  REQUIRE(set.records.size() == 2);
  CHECK(set.records[0].tweet_id == "t1");
  CHECK(set.records[0].emoji == "❤");
  CHECK(set.records[1].emoji == "\U0001F602");

  {
    std::ofstream out(path, std::ios::binary);
    out << "wrong,header,here\n";
  }
  CHECK_THROWS_AS(AnnotationSet::from_csv(path.string()), DataError);

  {
    std::ofstream out(path, std::ios::binary);
    out << "tweet_id,annotator_id,emoji\nonly,two\n";
  }
  CHECK_THROWS_AS(AnnotationSet::from_csv(path.string()), DataError);
}

TEST_CASE("report rendering is stable and embeds provenance") {
  LabelSet labels = testutil::k_labels(2);
  Report r = prf(from_rows({{2, 1}, {0, 3}}));
  r.provenance = {{"command", "test"}, {"seed", 7}};
  nlohmann::json j = report_to_json(r, labels);
  CHECK(j["per_class"].size() == 2);
  CHECK(j["provenance"]["seed"] == 7);
  CHECK(j["total_examples"] == 6);

  std::string text = report_to_text(r, labels);
  CHECK(text.find("macro") != std::string::npos);
  CHECK(text.find("confusion matrix") != std::string::npos);
  CHECK(report_to_text(r, labels) == text);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "emopred/embeddings.hpp"
#include "emopred/errors.hpp"
#include "emopred/mathfn.hpp"
#include "emopred/models.hpp"

using namespace emopred;
namespace fs = std::filesystem;

namespace {

Vocabulary tiny_vocab() {
  std::vector<LabeledExample> train = {
      {"1", {"the", "the", "cat"}, 0, 0},
      {"2", {"the", "rare"}, 0, 1},
  };
  return build_vocab(train);  // "rare" and "cat" are singletons
}

fs::path temp_file(const char* name) {
  fs::path p = fs::temp_directory_path() / name;
  fs::remove(p);
  return p;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("lookup: eval mode is pure and position-exact") {
  Vocabulary vocab = tiny_vocab();
  OovPolicy policy = OovPolicy::from_vocab(vocab);
  Rng rng(1);
  EmbeddingTable table = EmbeddingTable::init("emb", vocab.size(), 4, rng);

  std::size_t the_id = vocab.id("the");
  std::size_t rare_id = vocab.id("rare");
  Rng coin(9);
  auto row = lookup(table, the_id, policy, Mode::kEval, coin);
  CHECK(std::equal(row.begin(), row.end(),
                   table.rows.value.row(the_id).begin()));
  // eval: singletons keep their own row
  auto rare_row = lookup(table, rare_id, policy, Mode::kEval, coin);
  CHECK(std::equal(rare_row.begin(), rare_row.end(),
                   table.rows.value.row(rare_id).begin()));
  // unknown tokens arrive as the OOV id
  auto oov_row =
      lookup(table, vocab.id("never-seen"), policy, Mode::kEval, coin);
  CHECK(std::equal(oov_row.begin(), oov_row.end(),
                   table.rows.value.row(Vocabulary::kOovId).begin()));

  CHECK_THROWS_AS(lookup(table, 10'000, policy, Mode::kEval, coin),
                  std::invalid_argument);

  // repeated eval lookups are bit-identical
  for (int i = 0; i < 10; ++i) {
    auto again = lookup(table, rare_id, policy, Mode::kEval, coin);
    CHECK(std::equal(again.begin(), again.end(), rare_row.begin()));
  }
}

TEST_CASE("lookup: the p=0.5 coin replaces half the singleton lookups") {
  Vocabulary vocab = tiny_vocab();
  OovPolicy policy = OovPolicy::from_vocab(vocab);
  std::size_t rare_id = vocab.id("rare");
  std::size_t the_id = vocab.id("the");

  Rng coin(1234);
  int replaced = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i)
    if (resolve_lookup_id(policy, rare_id, Mode::kTrain, coin) ==
        Vocabulary::kOovId)
      ++replaced;
  double rate = static_cast<double>(replaced) / n;
  CHECK(rate > 0.48);
  CHECK(rate < 0.52);

  // non-singletons are never replaced
  for (int i = 0; i < 1000; ++i)
    CHECK(resolve_lookup_id(policy, the_id, Mode::kTrain, coin) == the_id);
}

TEST_CASE("concat_pretrained fixtures") {
  PretrainedVectors pre(3);
  pre.insert("known", std::vector<double>{3.0, 4.0, 5.0});
  std::vector<double> learned = {1.0, 2.0};
  CHECK(concat_pretrained(learned, pre, "known") ==
        std::vector<double>{1, 2, 3, 4, 5});
  CHECK(concat_pretrained(learned, pre, "absent") ==
        std::vector<double>{1, 2, 0, 0, 0});
}

TEST_CASE("load_word2vec_text: format and errors") {
  fs::path good = temp_file("vec_good.txt");
  {
    std::ofstream out(good);
    out << "2 3\nhello 0.1 0.2 0.3\nworld -1 2.5e-1 3\n";
  }
  PretrainedVectors v = load_word2vec_text(good.string());
  CHECK(v.size() == 2);
  CHECK(v.dim() == 3);
  CHECK(v.get("hello")[1] == 0.2);
  CHECK(v.get("world")[1] == 0.25);
  CHECK(v.get("missing").empty());

  fs::path shortrow = temp_file("vec_short.txt");
  {
    std::ofstream out(shortrow);
    out << "2 3\nhello 0.1 0.2 0.3\nworld 1 2\n";
  }
  CHECK_THROWS_WITH_AS(load_word2vec_text(shortrow.string()),
                       doctest::Contains(":3:"), DataError);

  fs::path dup = temp_file("vec_dup.txt");
  {
    std::ofstream out(dup);
    out << "3 2\na 1 2\nb 3 4\na 9 9\n";
  }
  std::size_t dups = 0;
  PretrainedVectors dv = load_word2vec_text(dup.string(), &dups);
  CHECK(dups == 1);
  CHECK(dv.size() == 2);
  CHECK(dv.get("a")[0] == 9.0);  // last occurrence wins

  fs::path missing_rows = temp_file("vec_missing.txt");
  {
    std::ofstream out(missing_rows);
    out << "3 2\na 1 2\n";
  }
  CHECK_THROWS_AS(load_word2vec_text(missing_rows.string()), DataError);

  fs::path bad_header = temp_file("vec_bad_header.txt");
  {
    std::ofstream out(bad_header);
    out << "hello world\n";
  }
  CHECK_THROWS_WITH_AS(load_word2vec_text(bad_header.string()),
                       doctest::Contains(":1:"), DataError);
}

TEST_CASE("save/load text round trip is a fixed point after one save") {
  PretrainedVectors original(3);
  Rng rng(17);
  for (int i = 0; i < 20; ++i) {
    std::vector<double> row = {rng.uniform(-5, 5), rng.uniform(-5, 5),
                               rng.uniform() * 1e-7};
    original.insert("tok" + std::to_string(i), row);
  }
  fs::path f1 = temp_file("vec_rt1.txt");
  fs::path f2 = temp_file("vec_rt2.txt");
  save_word2vec_text(original, f1.string());
  PretrainedVectors reloaded = load_word2vec_text(f1.string());
  save_word2vec_text(reloaded, f2.string());
  CHECK(read_file(f1) == read_file(f2));

  PretrainedVectors again = load_word2vec_text(f2.string());
  REQUIRE(again.size() == reloaded.size());
  for (std::size_t i = 0; i < again.size(); ++i) {
    auto a = again.at(i), b = reloaded.at(i);
    for (std::size_t j = 0; j < a.size(); ++j) CHECK(a[j] == b[j]);
  }
}

TEST_CASE("skip-gram: zero learning rate leaves initialization untouched") {
  std::vector<std::vector<std::string>> corpus = {
      {"a", "b", "c", "d", "e"},
  };
  SkipgramConfig cfg;
  cfg.dim = 8;
  cfg.epochs = 1;
  cfg.lr = 0.0;
  SkipgramResult trained = train_skipgram(corpus, cfg, Rng(3));

  cfg.epochs = 0;  // pure initialization
  SkipgramResult init = train_skipgram(corpus, cfg, Rng(3));
  REQUIRE(trained.vectors.size() == init.vectors.size());
  for (std::size_t i = 0; i < init.vectors.size(); ++i) {
    auto a = trained.vectors.at(i), b = init.vectors.at(i);
    for (std::size_t j = 0; j < a.size(); ++j) CHECK(a[j] == b[j]);
  }
}

TEST_CASE("skip-gram: determinism under a fixed seed") {
  std::vector<std::vector<std::string>> corpus;
  Rng gen(4);
  std::vector<std::string> words = {"a", "b", "c", "d", "e", "f", "g"};
  for (int s = 0; s < 30; ++s) {
    std::vector<std::string> sent;
    for (int w = 0; w < 6; ++w) sent.push_back(words[gen.below(words.size())]);
    corpus.push_back(sent);
  }
  SkipgramConfig cfg;
  cfg.dim = 8;
  cfg.epochs = 3;
  SkipgramResult r1 = train_skipgram(corpus, cfg, Rng(99));
  SkipgramResult r2 = train_skipgram(corpus, cfg, Rng(99));
  REQUIRE(r1.vectors.size() == r2.vectors.size());
  for (std::size_t i = 0; i < r1.vectors.size(); ++i) {
    auto a = r1.vectors.at(i), b = r2.vectors.at(i);
    for (std::size_t j = 0; j < a.size(); ++j) CHECK(a[j] == b[j]);
  }
  CHECK(r1.epoch_loss == r2.epoch_loss);
}

TEST_CASE("skip-gram: shared contexts pull tokens together") {
  // "cat" and "dog" appear in identical contexts; fillers get their own.
  std::vector<std::vector<std::string>> corpus;
  Rng gen(8);
  std::vector<std::string> fillers;
  for (int i = 0; i < 20; ++i) fillers.push_back("f" + std::to_string(i));
  for (int rep = 0; rep < 60; ++rep) {
    corpus.push_back({"the", rep % 2 ? "cat" : "dog", "sat", "on", "the", "mat"});
    std::vector<std::string> noise;
    for (int w = 0; w < 6; ++w)
      noise.push_back(fillers[gen.below(fillers.size())]);
    corpus.push_back(noise);
  }
  SkipgramConfig cfg;
  cfg.dim = 16;
  cfg.epochs = 40;
  cfg.lr = 0.05;
  SkipgramResult r = train_skipgram(corpus, cfg, Rng(11));

  auto cat = r.vectors.get("cat");
  auto dog = r.vectors.get("dog");
  REQUIRE_FALSE(cat.empty());
  REQUIRE_FALSE(dog.empty());
  double cat_dog = cosine_similarity(cat, dog);
  int better = 0;
  for (const std::string& f : fillers) {
    auto fv = r.vectors.get(f);
    if (fv.empty()) continue;
    if (cat_dog > cosine_similarity(cat, fv)) ++better;
  }
  CHECK(better >= 19);  // at least 95% of the fillers

  // training loss trend is non-increasing under a moving average
  CHECK(loss_trend_non_increasing(r.epoch_loss, 5, 0.05));
}

TEST_CASE("skip-gram rejects degenerate inputs") {
  CHECK_THROWS_AS(train_skipgram({}, SkipgramConfig{}, Rng(1)), DataError);
  SkipgramConfig bad;
  bad.dim = 0;
  CHECK_THROWS_AS(train_skipgram({{"a", "b"}}, bad, Rng(1)),
                  std::invalid_argument);
}

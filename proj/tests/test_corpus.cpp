#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "emopred/corpus.hpp"
#include "emopred/errors.hpp"
#include "emopred/rng.hpp"
#include "emopred/unicode.hpp"

using namespace emopred;
namespace fs = std::filesystem;

namespace {

const EmojiTable& table() { return EmojiTable::built_in(); }

fs::path temp_dir(const char* tag) {
  fs::path dir = fs::temp_directory_path() /
                 (std::string("emopred_corpus_") + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("normalize: hyperlinks, folding, whitespace") {
  CHECK(normalize("Check THIS https://t.co/x now") == "check this now");
  CHECK(normalize("LOVE") == "love");
  CHECK(normalize("") == "");
  CHECK(normalize("go to www.example.com/a?b=1 ok") == "go to ok");
  CHECK(normalize("wrapped:http://x.y stays-gone") == "wrapped: stays-gone");
  CHECK(normalize("HTTP://CAPS.example rest") == "rest");
  CHECK(normalize("  a \t b\n\nc  ") == "a b c");
  CHECK(normalize("ÉTÉ") == "été");      // Latin-1
  CHECK(normalize("ГОД") == "год");  // Cyrillic
  CHECK(normalize("ends with url http://x") == "ends with url");
}

TEST_CASE("tokenize: whitespace, punctuation, emoji") {
  CHECK(tokenize("i love you!", table()) ==
        std::vector<std::string>{"i", "love", "you", "!"});
  CHECK(tokenize("omg!!!", table()) ==
        std::vector<std::string>{"omg", "!", "!", "!"});
  CHECK(tokenize("so fun \U0001F602", table()) ==
        std::vector<std::string>{"so", "fun", "\U0001F602"});
  // attached emoji becomes its own token
  CHECK(tokenize("fun\U0001F602!", table()) ==
        std::vector<std::string>{"fun", "\U0001F602", "!"});
  CHECK(tokenize("(hi)", table()) == std::vector<std::string>{"(", "hi", ")"});
  CHECK(tokenize("don't stop", table()) ==
        std::vector<std::string>{"don't", "stop"});
  CHECK(tokenize("", table()).empty());
}

TEST_CASE("emoji table: composed sequences count as one emoji") {
  // skin tone
  std::vector<std::string> t1 = tokenize("nice \U0001F44D\U0001F3FD job", table());
  CHECK(t1 == std::vector<std::string>{"nice", "\U0001F44D\U0001F3FD", "job"});
  CHECK(table().is_emoji("\U0001F44D\U0001F3FD"));
  // variation selector
  CHECK(table().is_emoji("❤️"));
  // flag pair
  CHECK(table().is_emoji("\U0001F1FA\U0001F1F8"));
  // zwj family
  CHECK(table().is_emoji("\U0001F469‍\U0001F469‍\U0001F467"));
  // keycap
  CHECK(table().is_emoji("#️⃣"));
  CHECK_FALSE(table().is_emoji("word"));
  CHECK_FALSE(table().is_emoji(""));
}

TEST_CASE("count_emoji_frequencies: document frequency with stable ties") {
  std::vector<RawTweet> tweets = {
      {"1", "a \U0001F602", 0},
      {"2", "b \U0001F602 \U0001F602", 1},
      {"3", "c ❤", 2},
  };
  auto freqs = count_emoji_frequencies(tweets, table());
  REQUIRE(freqs.size() == 2);
  CHECK(freqs[0].first == "\U0001F602");
  CHECK(freqs[0].second == 2);  // two tweets, not three occurrences
  CHECK(freqs[1].first == "❤");
  CHECK(freqs[1].second == 1);

  CHECK(count_emoji_frequencies({{"1", "no emojis", 0}}, table()).empty());

  // tie broken by codepoint order
  std::vector<RawTweet> tie = {{"1", "\U0001F60D", 0}, {"2", "❤", 1}};
  auto tied = count_emoji_frequencies(tie, table());
  CHECK(tied[0].first == "❤");
  CHECK(tied[1].first == "\U0001F60D");
}

TEST_CASE("top_k_labels") {
  std::vector<std::pair<std::string, std::int64_t>> freqs = {
      {"\U0001F602", 3}, {"❤", 2}, {"\U0001F60D", 2},
      {"x", 1},          {"y", 1},      {"z", 1}};
  LabelSet five = top_k_labels(freqs, 5);
  CHECK(five.size() == 5);
  CHECK(five.emoji(0) == "\U0001F602");
  CHECK(five.index_of("\U0001F602") == 0);
  CHECK(five.index_of("z") == -1);
  CHECK_THROWS_AS(top_k_labels({}, 5), DataError);
}

TEST_CASE("filter_single_emoji") {
  LabelSet labels({"❤", "\U0001F602"});
  std::vector<RawTweet> tweets = {
      {"keep", "i love you ❤", 10},
      {"two", "❤ ❤ hi", 11},
      {"foreign", "hi \U0001F984", 12},            // unicorn not in labels
      {"mixed", "hey ❤ \U0001F389 there", 13},  // second emoji disqualifies
      {"bare", "❤", 14},                        // empty after removal
      {"none", "plain text", 15},
  };
  FilterStats stats;
  auto kept = filter_single_emoji(tweets, labels, table(), &stats);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].id == "keep");
  CHECK(kept[0].tokens == std::vector<std::string>{"i", "love", "you"});
  CHECK(kept[0].label == 0);
  CHECK(kept[0].timestamp == 10);
  CHECK(stats.kept == 1);
  CHECK(stats.multi_emoji == 2);
  CHECK(stats.not_in_label_set == 1);
  CHECK(stats.empty_tokens == 1);
  CHECK(stats.no_emoji == 1);
}

TEST_CASE("filter round-trip: reinserting the label emoji is accepted") {
  LabelSet labels({"❤", "\U0001F602", "\U0001F60D"});
  Rng rng(77);
  std::vector<std::string> words = {"so", "much", "fun", "love", "you", "omg"};
  std::vector<RawTweet> tweets;
  for (int i = 0; i < 200; ++i) {
    std::string text;
    std::size_t len = 1 + rng.below(5);
    for (std::size_t w = 0; w < len; ++w)
      text += words[rng.below(words.size())] + " ";
    text += labels.emoji(static_cast<int>(rng.below(3)));
    tweets.push_back({"t" + std::to_string(i), normalize(text),
                      static_cast<std::int64_t>(i)});
  }
  auto kept = filter_single_emoji(tweets, labels, table(), nullptr);
  REQUIRE(kept.size() == 200);
  for (const LabeledExample& ex : kept) {
    // reinsert at a pseudo-random position
    std::vector<std::string> tokens = ex.tokens;
    tokens.insert(tokens.begin() + static_cast<std::ptrdiff_t>(
                                       rng.below(tokens.size() + 1)),
                  labels.emoji(ex.label));
    std::string text;
    for (const auto& t : tokens) text += t + " ";
    auto again = filter_single_emoji({{ex.id, normalize(text), ex.timestamp}},
                                     labels, table(), nullptr);
    REQUIRE(again.size() == 1);
    CHECK(again[0].label == ex.label);
  }
}

TEST_CASE("chronological_split: fixtures and ties") {
  std::vector<LabeledExample> examples;
  for (int i = 9; i >= 0; --i)
    examples.push_back({"id" + std::to_string(i), {"w"}, 0, i});
  SplitCorpus s = chronological_split(examples);
  CHECK(s.train.size() == 8);
  CHECK(s.dev.size() == 1);
  CHECK(s.test.size() == 1);
  CHECK(s.train.front().timestamp == 0);
  CHECK(s.dev[0].timestamp == 8);
  CHECK(s.test[0].timestamp == 9);

  // equal timestamps: stable order by id
  std::vector<LabeledExample> equal;
  for (int i = 0; i < 10; ++i)
    equal.push_back({"id" + std::to_string(9 - i), {"w"}, 0, 5});
  SplitCorpus se = chronological_split(equal);
  CHECK(se.train.front().id == "id0");
  CHECK(se.test.back().id == "id9");

  CHECK_THROWS_AS(
      chronological_split(std::vector<LabeledExample>(9, {"x", {"w"}, 0, 0})),
      DataError);
}

TEST_CASE("split monotonicity property") {
  Rng rng(5);
  std::vector<LabeledExample> examples;
  for (int i = 0; i < 137; ++i)
    examples.push_back({"e" + std::to_string(i), {"w"}, 0,
                        static_cast<std::int64_t>(rng.below(40))});
  SplitCorpus s = chronological_split(examples);
  std::vector<LabeledExample> joined;
  joined.insert(joined.end(), s.train.begin(), s.train.end());
  joined.insert(joined.end(), s.dev.begin(), s.dev.end());
  joined.insert(joined.end(), s.test.begin(), s.test.end());
  CHECK(joined.size() == 137);
  for (std::size_t i = 1; i < joined.size(); ++i) {
    bool ordered = joined[i - 1].timestamp < joined[i].timestamp ||
                   (joined[i - 1].timestamp == joined[i].timestamp &&
                    joined[i - 1].id < joined[i].id);
    CHECK(ordered);
  }
  CHECK(s.train.back().timestamp <= s.dev.front().timestamp);
  CHECK(s.dev.back().timestamp <= s.test.front().timestamp);
}

TEST_CASE("build_vocab: counts, singletons, closure") {
  std::vector<LabeledExample> train = {
      {"1", {"a", "b"}, 0, 0},
      {"2", {"a"}, 0, 1},
  };
  Vocabulary v = build_vocab(train);
  std::size_t a = v.id("a"), b = v.id("b");
  CHECK(a != Vocabulary::kOovId);
  CHECK(b != Vocabulary::kOovId);
  CHECK(v.count(a) == 2);
  CHECK(v.count(b) == 1);
  CHECK_FALSE(v.is_singleton(a));
  CHECK(v.is_singleton(b));
  CHECK(v.id("zzz") == Vocabulary::kOovId);
  CHECK_FALSE(v.is_singleton(Vocabulary::kOovId));
  // closure: every training token has a non-OOV id
  for (const auto& ex : train)
    for (const auto& tok : ex.tokens) CHECK(v.id(tok) != Vocabulary::kOovId);
  CHECK_THROWS_AS(build_vocab({}), DataError);
}

TEST_CASE("parse_iso8601 against std::chrono") {
  using namespace std::chrono;
  auto oracle = [](int y, unsigned m, unsigned d) {
    return static_cast<std::int64_t>(
               sys_days{year{y} / static_cast<int>(m) / static_cast<int>(d)}
                   .time_since_epoch()
                   .count()) *
           86400;
  };
  CHECK(parse_iso8601("2015-10-12T08:00:00Z") ==
        oracle(2015, 10, 12) + 8 * 3600);
  CHECK(parse_iso8601("2016-05-01") == oracle(2016, 5, 1));
  CHECK(parse_iso8601("1970-01-01T00:00:00Z") == 0);
  CHECK(parse_iso8601("2016-02-29T23:59:59Z") ==
        oracle(2016, 2, 29) + 23 * 3600 + 59 * 60 + 59);
  CHECK(parse_iso8601("2015-10-12T08:00:00+02:00") ==
        oracle(2015, 10, 12) + 6 * 3600);
  CHECK(parse_iso8601("2015-10-12T08:00:00.123Z") ==
        oracle(2015, 10, 12) + 8 * 3600);
  CHECK_FALSE(parse_iso8601("not a date"));
  CHECK_FALSE(parse_iso8601("2015-13-01"));
  CHECK_FALSE(parse_iso8601("2015-10-12T08:00"));
}

TEST_CASE("ingest_jsonl: lenient and strict modes") {
  fs::path dir = temp_dir("ingest");
  fs::path good = dir / "good.jsonl";
  write_file(good, R"({"id":"1","text":"hi","created_at":0})"
                   "\n");
  IngestStats stats;
  auto tweets = ingest_jsonl(good.string(), false, &stats);
  REQUIRE(tweets.size() == 1);
  CHECK(tweets[0].id == "1");
  CHECK(tweets[0].text == "hi");
  CHECK(tweets[0].timestamp == 0);

  fs::path empty = dir / "empty.jsonl";
  write_file(empty, "");
  CHECK(ingest_jsonl(empty.string(), false, &stats).empty());
  CHECK(stats.lines == 0);

  fs::path mixed = dir / "mixed.jsonl";
  write_file(mixed,
             R"({"id":"1","text":"ok","created_at":"2015-10-12T08:00:00Z"})"
             "\nnot json at all\n"
             R"({"id":"2","text":"neg","created_at":-5})"
             "\n");
  tweets = ingest_jsonl(mixed.string(), false, &stats);
  CHECK(tweets.size() == 1);
  CHECK(stats.skipped == 2);

  CHECK_THROWS_WITH_AS(ingest_jsonl(mixed.string(), true, nullptr),
                       doctest::Contains(":2:"), DataError);
  CHECK_THROWS_AS(ingest_jsonl((dir / "missing.jsonl").string(), false, nullptr),
                  DataError);
}

TEST_CASE("dataset round trip and byte determinism") {
  LabelSet labels({"❤", "\U0001F602"});
  std::vector<LabeledExample> examples;
  for (int i = 0; i < 30; ++i)
    examples.push_back({"id" + std::to_string(i),
                        {"tok" + std::to_string(i % 7), "x"},
                        i % 2,
                        static_cast<std::int64_t>(i)});
  SplitCorpus splits = chronological_split(examples);

  fs::path d1 = temp_dir("ds1");
  fs::path d2 = temp_dir("ds2");
  write_dataset(d1.string(), labels, splits);
  write_dataset(d2.string(), labels, splits);
  for (const char* name : {"labels.txt", "train.jsonl", "dev.jsonl", "test.jsonl"}) {
    CHECK(read_file(d1 / name) == read_file(d2 / name));
  }

  Dataset loaded = load_dataset(d1.string());
  CHECK(loaded.labels == labels);
  REQUIRE(loaded.splits.train.size() == splits.train.size());
  CHECK(loaded.splits.train[0].id == splits.train[0].id);
  CHECK(loaded.splits.train[0].tokens == splits.train[0].tokens);
  CHECK(loaded.splits.test[0].label == splits.test[0].label);
}

TEST_CASE("load_split rejects malformed rows") {
  fs::path dir = temp_dir("badsplit");
  write_file(dir / "labels.txt", "❤\n\U0001F602\n");
  write_file(dir / "train.jsonl",
             R"({"id":"1","tokens":["a"],"label":5,"ts":0})"
             "\n");
  CHECK_THROWS_AS(load_split(dir.string(), "train", 2), DataError);
  write_file(dir / "train.jsonl",
             R"({"id":"1","tokens":[],"label":0,"ts":0})"
             "\n");
  CHECK_THROWS_AS(load_split(dir.string(), "train", 2), DataError);
}

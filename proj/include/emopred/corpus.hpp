#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "emopred/unicode.hpp"

namespace emopred {

struct RawTweet {
  std::string id;
  std::string text;
  std::int64_t timestamp = 0;  // seconds since epoch
};

// The K most frequent emojis, descending by corpus document frequency.
// The position of an emoji is its class index.
class LabelSet {
 public:
  LabelSet() = default;
  explicit LabelSet(std::vector<std::string> emojis);

  int index_of(const std::string& emoji) const;  // -1 when absent
  const std::string& emoji(int k) const { return emojis_[k]; }
  std::size_t size() const { return emojis_.size(); }
  const std::vector<std::string>& emojis() const { return emojis_; }

  bool operator==(const LabelSet& o) const { return emojis_ == o.emojis_; }

 private:
  std::vector<std::string> emojis_;
  std::unordered_map<std::string, int> index_;
};

struct LabeledExample {
  std::string id;
  std::vector<std::string> tokens;  // emoji removed
  int label = -1;                   // index into the LabelSet
  std::int64_t timestamp = 0;
};

// Token ids are dense; 0 and 1 are reserved for padding and OOV. Built from
// the training split only.
class Vocabulary {
 public:
  static constexpr std::size_t kPadId = 0;
  static constexpr std::size_t kOovId = 1;
  static constexpr std::size_t kFirstTokenId = 2;

  Vocabulary() = default;

  std::size_t id(const std::string& token) const;  // kOovId when unknown
  std::int64_t count(std::size_t id) const { return counts_[id]; }
  bool is_singleton(std::size_t id) const {
    return id >= kFirstTokenId && counts_[id] == 1;
  }
  std::size_t size() const { return tokens_.size(); }  // includes reserved ids
  const std::string& token(std::size_t id) const { return tokens_[id]; }

  // Used by build_vocab and checkpoint loading; tokens exclude reserved ids.
  static Vocabulary from_entries(std::vector<std::string> tokens,
                                 std::vector<std::int64_t> counts);

 private:
  std::vector<std::string> tokens_;
  std::vector<std::int64_t> counts_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct SplitCorpus {
  std::vector<LabeledExample> train, dev, test;
};

struct IngestStats {
  std::size_t lines = 0;
  std::size_t parsed = 0;
  std::size_t skipped = 0;
};

// JSON-lines ingestion: fields "id" (string), "text" (string), "created_at"
// (integer epoch seconds or ISO-8601). Lenient mode counts and skips
// malformed lines; strict mode throws DataError naming the line.
std::vector<RawTweet> ingest_jsonl(const std::string& path, bool strict,
                                   IngestStats* stats = nullptr);

// Hyperlink removal (http://, https://, www. up to the next whitespace,
// matched case-insensitively), simple case folding, whitespace collapsing.
std::string normalize(std::string_view text);

// Whitespace split, then leading/trailing ASCII punctuation split off as
// their own tokens; every emoji sequence becomes its own token.
std::vector<std::string> tokenize(std::string_view normalized_text,
                                  const EmojiTable& emoji);

// Document frequency: number of tweets containing the emoji at least once.
// Sorted by count descending, ties by codepoint order. Expects normalized
// tweet text.
std::vector<std::pair<std::string, std::int64_t>> count_emoji_frequencies(
    const std::vector<RawTweet>& tweets, const EmojiTable& emoji);

// First min(k, available) emojis of the frequency table.
LabelSet top_k_labels(
    const std::vector<std::pair<std::string, std::int64_t>>& freqs,
    std::size_t k);

struct FilterStats {
  std::size_t kept = 0;
  std::size_t no_emoji = 0;
  std::size_t multi_emoji = 0;
  std::size_t not_in_label_set = 0;
  std::size_t empty_tokens = 0;
};

// Keeps tweets with exactly one emoji occurrence overall whose emoji is in
// the label set; the emoji token becomes the label and leaves the tokens.
std::vector<LabeledExample> filter_single_emoji(
    const std::vector<RawTweet>& tweets, const LabelSet& labels,
    const EmojiTable& emoji, FilterStats* stats = nullptr);

struct SplitRatios {
  double dev = 0.1;
  double test = 0.1;  // train takes the remainder (truncation toward train)
};

// Sort by (timestamp, id) ascending; oldest 80% to train, then dev, then
// test. Throws DataError when fewer than 10 examples.
SplitCorpus chronological_split(std::vector<LabeledExample> examples,
                                SplitRatios ratios = {});

// Exact counts over training tokens; throws DataError on an empty split.
Vocabulary build_vocab(const std::vector<LabeledExample>& train);

// Dataset directory: labels.txt + {train,dev,test}.jsonl (+ stats.json,
// written by the CLI).
void write_dataset(const std::string& dir, const LabelSet& labels,
                   const SplitCorpus& splits);

struct Dataset {
  LabelSet labels;
  SplitCorpus splits;
};

Dataset load_dataset(const std::string& dir);
std::vector<LabeledExample> load_split(const std::string& dir,
                                       const std::string& name,
                                       std::size_t num_labels);

// ISO-8601 "YYYY-MM-DD[THH:MM:SS][Z|+hh:mm]" to epoch seconds.
std::optional<std::int64_t> parse_iso8601(std::string_view s);

}  // namespace emopred

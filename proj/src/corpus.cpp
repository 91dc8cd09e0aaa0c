#include "emopred/corpus.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "emopred/errors.hpp"

namespace emopred {

using nlohmann::json;

LabelSet::LabelSet(std::vector<std::string> emojis)
    : emojis_(std::move(emojis)) {
  for (std::size_t i = 0; i < emojis_.size(); ++i) {
    auto [it, inserted] = index_.emplace(emojis_[i], static_cast<int>(i));
    if (!inserted) throw DataError("duplicate emoji in label set: " + emojis_[i]);
  }
}

int LabelSet::index_of(const std::string& emoji) const {
  auto it = index_.find(emoji);
  return it == index_.end() ? -1 : it->second;
}

Vocabulary Vocabulary::from_entries(std::vector<std::string> tokens,
                                    std::vector<std::int64_t> counts) {
  if (tokens.size() != counts.size())
    throw DataError("vocabulary tokens/counts length mismatch");
  Vocabulary v;
  v.tokens_ = {"<pad>", "<unk>"};
  v.counts_ = {0, 0};
  v.tokens_.insert(v.tokens_.end(), tokens.begin(), tokens.end());
  v.counts_.insert(v.counts_.end(), counts.begin(), counts.end());
  for (std::size_t i = kFirstTokenId; i < v.tokens_.size(); ++i)
    v.index_.emplace(v.tokens_[i], i);
  return v;
}

std::size_t Vocabulary::id(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? kOovId : it->second;
}

std::optional<std::int64_t> parse_iso8601(std::string_view s) {
  // days-from-civil (proleptic Gregorian)
  auto days = [](std::int64_t y, unsigned m, unsigned d) -> std::int64_t {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
  };

  std::size_t i = 0;
  auto digits = [&](std::size_t n, std::int64_t* out) -> bool {
    if (i + n > s.size()) return false;
    std::int64_t v = 0;
    for (std::size_t j = 0; j < n; ++j) {
      char c = s[i + j];
      if (c < '0' || c > '9') return false;
      v = v * 10 + (c - '0');
    }
    *out = v;
    i += n;
    return true;
  };
  auto expect = [&](char c) -> bool {
    if (i < s.size() && s[i] == c) {
      ++i;
      return true;
    }
    return false;
  };

  std::int64_t y, mo, d, h = 0, mi = 0, sec = 0;
  if (!digits(4, &y) || !expect('-') || !digits(2, &mo) || !expect('-') ||
      !digits(2, &d))
    return std::nullopt;
  if (mo < 1 || mo > 12 || d < 1 || d > 31) return std::nullopt;

  if (i < s.size() && (s[i] == 'T' || s[i] == ' ')) {
    ++i;
    if (!digits(2, &h) || !expect(':') || !digits(2, &mi) || !expect(':') ||
        !digits(2, &sec))
      return std::nullopt;
    if (h > 23 || mi > 59 || sec > 60) return std::nullopt;
    if (i < s.size() && s[i] == '.') {  // drop fractional seconds
      ++i;
      while (i < s.size() && s[i] >= '0' && s[i] <= '9') ++i;
    }
  }

  std::int64_t offset = 0;
  if (i < s.size()) {
    if (s[i] == 'Z') {
      ++i;
    } else if (s[i] == '+' || s[i] == '-') {
      int sign = s[i] == '+' ? 1 : -1;
      ++i;
      std::int64_t oh, om;
      if (!digits(2, &oh)) return std::nullopt;
      if (i < s.size() && s[i] == ':') ++i;
      if (!digits(2, &om)) return std::nullopt;
      offset = sign * (oh * 3600 + om * 60);
    }
  }
  if (i != s.size()) return std::nullopt;

  return days(y, static_cast<unsigned>(mo), static_cast<unsigned>(d)) * 86400 +
         h * 3600 + mi * 60 + sec - offset;
}

namespace {

std::optional<RawTweet> parse_tweet_line(const std::string& line) {
  json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;
  if (!j.contains("id") || !j["id"].is_string()) return std::nullopt;
  if (!j.contains("text") || !j["text"].is_string()) return std::nullopt;
  if (!j.contains("created_at")) return std::nullopt;

  RawTweet t;
  t.id = j["id"].get<std::string>();
  t.text = j["text"].get<std::string>();
  const json& ts = j["created_at"];
  if (ts.is_number_integer()) {
    t.timestamp = ts.get<std::int64_t>();
  } else if (ts.is_string()) {
    auto parsed = parse_iso8601(ts.get<std::string>());
    if (!parsed) return std::nullopt;
    t.timestamp = *parsed;
  } else {
    return std::nullopt;
  }
  if (t.timestamp < 0) return std::nullopt;
  return t;
}

}  // namespace

std::vector<RawTweet> ingest_jsonl(const std::string& path, bool strict,
                                   IngestStats* stats) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open input file '" + path + "'");

  std::vector<RawTweet> tweets;
  IngestStats local;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++local.lines;
    auto tweet = parse_tweet_line(line);
    if (tweet) {
      tweets.push_back(std::move(*tweet));
      ++local.parsed;
    } else if (strict) {
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": malformed tweet line");
    } else {
      ++local.skipped;
    }
  }
  if (stats) *stats = local;
  return tweets;
}

std::string normalize(std::string_view text) {
  std::vector<char32_t> cps = utf8_decode(text);

  // Hyperlink removal: a match anywhere runs to the next whitespace.
  auto matches_at = [&](std::size_t i, std::string_view prefix) {
    if (i + prefix.size() > cps.size()) return false;
    for (std::size_t j = 0; j < prefix.size(); ++j) {
      char32_t cp = cps[i + j];
      if (cp >= 'A' && cp <= 'Z') cp += 32;
      if (cp != static_cast<char32_t>(prefix[j])) return false;
    }
    return true;
  };

  std::vector<char32_t> kept;
  kept.reserve(cps.size());
  for (std::size_t i = 0; i < cps.size();) {
    if (matches_at(i, "http://") || matches_at(i, "https://") ||
        matches_at(i, "www.")) {
      while (i < cps.size() && !is_space_cp(cps[i])) ++i;
      continue;
    }
    kept.push_back(fold_case_cp(cps[i]));
    ++i;
  }

  std::vector<char32_t> out;
  out.reserve(kept.size());
  for (char32_t cp : kept) {
    if (is_space_cp(cp)) {
      if (!out.empty() && out.back() != U' ') out.push_back(U' ');
    } else {
      out.push_back(cp);
    }
  }
  if (!out.empty() && out.back() == U' ') out.pop_back();
  return utf8_encode(out);
}

std::vector<std::string> tokenize(std::string_view normalized_text,
                                  const EmojiTable& emoji) {
  std::vector<char32_t> cps = utf8_decode(normalized_text);
  std::vector<std::string> tokens;

  auto emit_segment = [&](std::span<const char32_t> seg) {
    if (seg.empty()) return;
    std::size_t lo = 0, hi = seg.size();
    std::size_t lead_end = lo;
    while (lead_end < hi && is_ascii_punct_cp(seg[lead_end])) ++lead_end;
    std::size_t trail_begin = hi;
    while (trail_begin > lead_end && is_ascii_punct_cp(seg[trail_begin - 1]))
      --trail_begin;
    for (std::size_t i = lo; i < lead_end; ++i)
      tokens.push_back(utf8_encode({&seg[i], 1}));
    if (lead_end < trail_begin)
      tokens.push_back(
          utf8_encode({seg.data() + lead_end, trail_begin - lead_end}));
    for (std::size_t i = trail_begin; i < hi; ++i)
      tokens.push_back(utf8_encode({&seg[i], 1}));
  };

  std::size_t i = 0;
  while (i < cps.size()) {
    while (i < cps.size() && is_space_cp(cps[i])) ++i;
    if (i >= cps.size()) break;
    std::size_t chunk_begin = i;
    while (i < cps.size() && !is_space_cp(cps[i])) ++i;
    std::span<const char32_t> chunk(cps.data() + chunk_begin, i - chunk_begin);

    std::size_t seg_begin = 0;
    for (std::size_t j = 0; j < chunk.size();) {
      std::size_t len = emoji.match(chunk, j);
      if (len > 0) {
        emit_segment(chunk.subspan(seg_begin, j - seg_begin));
        tokens.push_back(utf8_encode(chunk.subspan(j, len)));
        j += len;
        seg_begin = j;
      } else {
        ++j;
      }
    }
    emit_segment(chunk.subspan(seg_begin));
  }
  return tokens;
}

std::vector<std::pair<std::string, std::int64_t>> count_emoji_frequencies(
    const std::vector<RawTweet>& tweets, const EmojiTable& emoji) {
  std::unordered_map<std::string, std::int64_t> counts;
  std::vector<std::string> seen;
  for (const RawTweet& t : tweets) {
    seen.clear();
    for (const std::string& tok : tokenize(t.text, emoji)) {
      if (!emoji.is_emoji(tok)) continue;
      if (std::find(seen.begin(), seen.end(), tok) == seen.end())
        seen.push_back(tok);
    }
    for (const std::string& e : seen) ++counts[e];
  }
  std::vector<std::pair<std::string, std::int64_t>> out(counts.begin(),
                                                        counts.end());
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;  // codepoint order (UTF-8 preserves it)
  });
  return out;
}

LabelSet top_k_labels(
    const std::vector<std::pair<std::string, std::int64_t>>& freqs,
    std::size_t k) {
  if (freqs.empty()) throw DataError("empty dataset: no emojis found");
  std::vector<std::string> emojis;
  for (std::size_t i = 0; i < freqs.size() && i < k; ++i)
    emojis.push_back(freqs[i].first);
  return LabelSet(std::move(emojis));
}

std::vector<LabeledExample> filter_single_emoji(
    const std::vector<RawTweet>& tweets, const LabelSet& labels,
    const EmojiTable& emoji, FilterStats* stats) {
  std::vector<LabeledExample> out;
  FilterStats local;
  for (const RawTweet& t : tweets) {
    std::vector<std::string> tokens = tokenize(t.text, emoji);
    int emoji_count = 0;
    std::size_t emoji_pos = 0;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (emoji.is_emoji(tokens[i])) {
        ++emoji_count;
        emoji_pos = i;
      }
    }
    if (emoji_count == 0) {
      ++local.no_emoji;
      continue;
    }
    if (emoji_count > 1) {
      ++local.multi_emoji;
      continue;
    }
    int label = labels.index_of(tokens[emoji_pos]);
    if (label < 0) {
      ++local.not_in_label_set;
      continue;
    }
    tokens.erase(tokens.begin() + static_cast<std::ptrdiff_t>(emoji_pos));
    if (tokens.empty()) {
      ++local.empty_tokens;
      continue;
    }
    out.push_back(LabeledExample{t.id, std::move(tokens), label, t.timestamp});
    ++local.kept;
  }
  if (stats) *stats = local;
  return out;
}

SplitCorpus chronological_split(std::vector<LabeledExample> examples,
                                SplitRatios ratios) {
  if (examples.size() < 10)
    throw DataError("cannot split " + std::to_string(examples.size()) +
                    " examples into train/dev/test (need at least 10)");
  std::sort(examples.begin(), examples.end(),
            [](const LabeledExample& a, const LabeledExample& b) {
              if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
              return a.id < b.id;
            });
  std::size_t n = examples.size();
  std::size_t n_dev = static_cast<std::size_t>(static_cast<double>(n) * ratios.dev);
  std::size_t n_test = static_cast<std::size_t>(static_cast<double>(n) * ratios.test);
  std::size_t n_train = n - n_dev - n_test;

  SplitCorpus s;
  s.train.assign(examples.begin(), examples.begin() + n_train);
  s.dev.assign(examples.begin() + n_train, examples.begin() + n_train + n_dev);
  s.test.assign(examples.begin() + n_train + n_dev, examples.end());
  return s;
}

Vocabulary build_vocab(const std::vector<LabeledExample>& train) {
  if (train.empty()) throw DataError("cannot build vocabulary: empty training split");
  std::unordered_map<std::string, std::int64_t> counts;
  for (const LabeledExample& ex : train)
    for (const std::string& tok : ex.tokens) ++counts[tok];

  std::vector<std::pair<std::string, std::int64_t>> sorted(counts.begin(),
                                                           counts.end());
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  std::vector<std::string> tokens;
  std::vector<std::int64_t> tok_counts;
  tokens.reserve(sorted.size());
  tok_counts.reserve(sorted.size());
  for (auto& [tok, c] : sorted) {
    tokens.push_back(tok);
    tok_counts.push_back(c);
  }
  return Vocabulary::from_entries(std::move(tokens), std::move(tok_counts));
}

namespace {

void write_split(const std::string& path,
                 const std::vector<LabeledExample>& examples) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path + "'");
  for (const LabeledExample& ex : examples) {
    json j;
    j["id"] = ex.id;
    j["label"] = ex.label;
    j["tokens"] = ex.tokens;
    j["ts"] = ex.timestamp;
    out << j.dump() << "\n";
  }
}

}  // namespace

void write_dataset(const std::string& dir, const LabelSet& labels,
                   const SplitCorpus& splits) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir + "/labels.txt", std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write '" + dir + "/labels.txt'");
    for (const std::string& e : labels.emojis()) out << e << "\n";
  }
  write_split(dir + "/train.jsonl", splits.train);
  write_split(dir + "/dev.jsonl", splits.dev);
  write_split(dir + "/test.jsonl", splits.test);
}

std::vector<LabeledExample> load_split(const std::string& dir,
                                       const std::string& name,
                                       std::size_t num_labels) {
  std::string path = dir + "/" + name + ".jsonl";
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::vector<LabeledExample> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("id") ||
        !j.contains("tokens") || !j.contains("label") || !j.contains("ts"))
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": malformed example line");
    LabeledExample ex;
    ex.id = j["id"].get<std::string>();
    ex.tokens = j["tokens"].get<std::vector<std::string>>();
    ex.label = j["label"].get<int>();
    ex.timestamp = j["ts"].get<std::int64_t>();
    if (ex.label < 0 || static_cast<std::size_t>(ex.label) >= num_labels)
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": label out of range");
    if (ex.tokens.empty())
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": example has no tokens");
    out.push_back(std::move(ex));
  }
  return out;
}

Dataset load_dataset(const std::string& dir) {
  std::ifstream in(dir + "/labels.txt", std::ios::binary);
  if (!in) throw DataError("cannot open '" + dir + "/labels.txt'");
  std::vector<std::string> emojis;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) emojis.push_back(line);
  }
  Dataset d;
  d.labels = LabelSet(std::move(emojis));
  d.splits.train = load_split(dir, "train", d.labels.size());
  d.splits.dev = load_split(dir, "dev", d.labels.size());
  d.splits.test = load_split(dir, "test", d.labels.size());
  return d;
}

}  // namespace emopred

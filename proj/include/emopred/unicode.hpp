#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace emopred {

// Lenient UTF-8 decoding; malformed bytes become U+FFFD.
std::vector<char32_t> utf8_decode(std::string_view s);
std::string utf8_encode(std::span<const char32_t> cps);
void utf8_append(std::string& out, char32_t cp);

bool is_space_cp(char32_t cp);
bool is_ascii_punct_cp(char32_t cp);

// Unicode simple case folding over the bicameral ranges that occur in
// practice here (ASCII, Latin-1, Latin Extended-A, Greek, Cyrillic).
// Codepoints outside those ranges pass through unchanged.
char32_t fold_case_cp(char32_t cp);
std::string fold_case(std::string_view s);

// Membership table of emoji codepoint sequences. The bundled table
// (data/emoji_sequences.txt, embedded at build time) defines what counts as
// an emoji; a file in the same format can replace it.
//
// File format, one entry per line, '#' comments:
//   1F300..1F5FF      range of single-codepoint emoji
//   2764              single codepoint
//   0023 FE0F 20E3    explicit sequence
class EmojiTable {
 public:
  static const EmojiTable& built_in();
  static EmojiTable from_file(const std::string& path);
  static EmojiTable parse(std::string_view text, const std::string& origin);

  // Length in codepoints of the emoji starting at cps[i], or 0. A match
  // greedily absorbs variation selectors, skin-tone modifiers, regional
  // indicator pairs and ZWJ continuations so a composed emoji counts once.
  std::size_t match(std::span<const char32_t> cps, std::size_t i) const;

  // True when the whole string is exactly one emoji.
  bool is_emoji(std::string_view token) const;

  std::size_t entry_count() const { return entries_; }

 private:
  bool base_match(std::span<const char32_t> cps, std::size_t i,
                  std::size_t* len) const;

  std::unordered_set<char32_t> singles_;
  // Explicit sequences grouped by first codepoint, longest first.
  std::unordered_map<char32_t, std::vector<std::vector<char32_t>>> sequences_;
  std::size_t entries_ = 0;
};

}  // namespace emopred

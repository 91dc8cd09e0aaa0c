#include "emopred/unicode.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "emopred/errors.hpp"

namespace emopred {

namespace {

constexpr char32_t kReplacement = 0xFFFD;
constexpr char32_t kZwj = 0x200D;

bool is_variation_selector(char32_t cp) { return cp == 0xFE0E || cp == 0xFE0F; }
bool is_skin_tone(char32_t cp) { return cp >= 0x1F3FB && cp <= 0x1F3FF; }
bool is_regional_indicator(char32_t cp) {
  return cp >= 0x1F1E6 && cp <= 0x1F1FF;
}

}  // namespace

std::vector<char32_t> utf8_decode(std::string_view s) {
  std::vector<char32_t> out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    unsigned char b = static_cast<unsigned char>(s[i]);
    char32_t cp = 0;
    std::size_t len = 0;
    if (b < 0x80) {
      cp = b;
      len = 1;
    } else if ((b & 0xE0) == 0xC0) {
      cp = b & 0x1F;
      len = 2;
    } else if ((b & 0xF0) == 0xE0) {
      cp = b & 0x0F;
      len = 3;
    } else if ((b & 0xF8) == 0xF0) {
      cp = b & 0x07;
      len = 4;
    } else {
      out.push_back(kReplacement);
      ++i;
      continue;
    }
    if (i + len > s.size()) {
      out.push_back(kReplacement);
      ++i;
      continue;
    }
    bool ok = true;
    for (std::size_t j = 1; j < len; ++j) {
      unsigned char cont = static_cast<unsigned char>(s[i + j]);
      if ((cont & 0xC0) != 0x80) {
        ok = false;
        break;
      }
      cp = (cp << 6) | (cont & 0x3F);
    }
    if (!ok || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
      out.push_back(kReplacement);
      ++i;
      continue;
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

void utf8_append(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

std::string utf8_encode(std::span<const char32_t> cps) {
  std::string out;
  out.reserve(cps.size());
  for (char32_t cp : cps) utf8_append(out, cp);
  return out;
}

bool is_space_cp(char32_t cp) {
  switch (cp) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

bool is_ascii_punct_cp(char32_t cp) {
  return (cp >= 0x21 && cp <= 0x2F) || (cp >= 0x3A && cp <= 0x40) ||
         (cp >= 0x5B && cp <= 0x60) || (cp >= 0x7B && cp <= 0x7E);
}

char32_t fold_case_cp(char32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 32;
  if (cp < 0xC0) return cp;
  // Latin-1 Supplement
  if ((cp >= 0xC0 && cp <= 0xD6) || (cp >= 0xD8 && cp <= 0xDE)) return cp + 32;
  // Latin Extended-A: alternating upper/lower pairs
  if (cp >= 0x100 && cp <= 0x137) return (cp % 2 == 0) ? cp + 1 : cp;
  if (cp >= 0x139 && cp <= 0x148) return (cp % 2 == 1) ? cp + 1 : cp;
  if (cp >= 0x14A && cp <= 0x177) return (cp % 2 == 0) ? cp + 1 : cp;
  if (cp == 0x178) return 0xFF;
  if (cp >= 0x179 && cp <= 0x17E) return (cp % 2 == 1) ? cp + 1 : cp;
  if (cp == 0x17F) return 0x73;  // long s
  // Greek
  if (cp == 0x386) return 0x3AC;
  if (cp >= 0x388 && cp <= 0x38A) return cp + 0x25;
  if (cp == 0x38C) return 0x3CC;
  if (cp == 0x38E || cp == 0x38F) return cp + 0x3F;
  if (cp >= 0x391 && cp <= 0x3A1) return cp + 32;
  if (cp >= 0x3A3 && cp <= 0x3AB) return cp + 32;
  if (cp == 0x3C2) return 0x3C3;  // final sigma
  // Cyrillic
  if (cp >= 0x400 && cp <= 0x40F) return cp + 80;
  if (cp >= 0x410 && cp <= 0x42F) return cp + 32;
  return cp;
}

std::string fold_case(std::string_view s) {
  std::vector<char32_t> cps = utf8_decode(s);
  for (char32_t& cp : cps) cp = fold_case_cp(cp);
  return utf8_encode(cps);
}

EmojiTable EmojiTable::parse(std::string_view text, const std::string& origin) {
  EmojiTable table;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream parts(line);
    std::vector<std::string> fields;
    std::string f;
    while (parts >> f) fields.push_back(f);
    if (fields.empty()) continue;

    auto parse_hex = [&](const std::string& h) -> char32_t {
      char32_t v = 0;
      if (h.empty()) throw DataError(origin + ":" + std::to_string(line_no) +
                                     ": empty codepoint");
      for (char c : h) {
        int d;
        if (c >= '0' && c <= '9') d = c - '0';
        else if (c >= 'a' && c <= 'f') d = c - 'a' + 10;
        else if (c >= 'A' && c <= 'F') d = c - 'A' + 10;
        else
          throw DataError(origin + ":" + std::to_string(line_no) +
                          ": bad hex codepoint '" + h + "'");
        v = v * 16 + static_cast<char32_t>(d);
      }
      return v;
    };

    if (fields.size() == 1 && fields[0].find("..") != std::string::npos) {
      auto dots = fields[0].find("..");
      char32_t lo = parse_hex(fields[0].substr(0, dots));
      char32_t hi = parse_hex(fields[0].substr(dots + 2));
      if (hi < lo)
        throw DataError(origin + ":" + std::to_string(line_no) +
                        ": inverted range");
      for (char32_t cp = lo; cp <= hi; ++cp) table.singles_.insert(cp);
      table.entries_ += hi - lo + 1;
    } else if (fields.size() == 1) {
      table.singles_.insert(parse_hex(fields[0]));
      ++table.entries_;
    } else {
      std::vector<char32_t> seq;
      seq.reserve(fields.size());
      for (const auto& h : fields) seq.push_back(parse_hex(h));
      auto& bucket = table.sequences_[seq[0]];
      bucket.push_back(std::move(seq));
      std::sort(bucket.begin(), bucket.end(),
                [](const auto& a, const auto& b) { return a.size() > b.size(); });
      ++table.entries_;
    }
  }
  if (table.entries_ == 0)
    throw DataError(origin + ": emoji table is empty");
  return table;
}

EmojiTable EmojiTable::from_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open emoji table '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path);
}

bool EmojiTable::base_match(std::span<const char32_t> cps, std::size_t i,
                            std::size_t* len) const {
  auto it = sequences_.find(cps[i]);
  if (it != sequences_.end()) {
    for (const auto& seq : it->second) {
      if (i + seq.size() > cps.size()) continue;
      if (std::equal(seq.begin(), seq.end(), cps.begin() + i)) {
        *len = seq.size();
        return true;
      }
    }
  }
  if (singles_.count(cps[i])) {
    *len = 1;
    return true;
  }
  return false;
}

std::size_t EmojiTable::match(std::span<const char32_t> cps,
                              std::size_t i) const {
  if (i >= cps.size()) return 0;
  std::size_t len = 0;
  if (!base_match(cps, i, &len)) return 0;

  // Flag = pair of regional indicators.
  if (len == 1 && is_regional_indicator(cps[i]) && i + 1 < cps.size() &&
      is_regional_indicator(cps[i + 1]))
    len = 2;

  bool extended = true;
  while (extended) {
    extended = false;
    std::size_t j = i + len;
    if (j < cps.size() && is_variation_selector(cps[j])) {
      ++len;
      extended = true;
      continue;
    }
    if (j < cps.size() && is_skin_tone(cps[j])) {
      ++len;
      extended = true;
      continue;
    }
    if (j + 1 < cps.size() && cps[j] == kZwj) {
      std::size_t next_len = match(cps, j + 1);
      if (next_len > 0) {
        len += 1 + next_len;
        extended = true;
      }
    }
  }
  return len;
}

bool EmojiTable::is_emoji(std::string_view token) const {
  std::vector<char32_t> cps = utf8_decode(token);
  if (cps.empty()) return false;
  return match(cps, 0) == cps.size();
}

}  // namespace emopred

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "signalmarket/text/stopwords.hpp"

namespace signalmarket::text {

namespace utf8 {

constexpr char32_t replacement = 0xFFFD;

// Decodes one code point starting at s[i] and advances i. Malformed sequences
// yield U+FFFD and consume one byte.
inline char32_t next(std::string_view s, std::size_t& i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  if (b0 < 0x80) {
    ++i;
    return b0;
  }
  int len = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    ++i;
    return replacement;
  }
  if (i + len > s.size()) {
    ++i;
    return replacement;
  }
  for (int k = 1; k < len; ++k) {
    const auto b = static_cast<unsigned char>(s[i + k]);
    if ((b & 0xC0) != 0x80) {
      ++i;
      return replacement;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  static constexpr char32_t min_for_len[5] = {0, 0, 0x80, 0x800, 0x10000};
  if (cp < min_for_len[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
    ++i;
    return replacement;
  }
  i += len;
  return cp;
}

inline void append(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

}  // namespace utf8

// Simple one-to-one lowercase for Latin, Greek and Cyrillic; other scripts
// pass through unchanged.
inline char32_t to_lower(char32_t c) {
  if (c < 0x80) return (c >= 'A' && c <= 'Z') ? c + 32 : c;
  if (c >= 0xC0 && c <= 0xDE && c != 0xD7) return c + 0x20;
  if (c == 0x130) return U'i';
  if (c == 0x178) return 0xFF;
  if ((c >= 0x100 && c <= 0x137) || (c >= 0x14A && c <= 0x177)) return (c % 2 == 0) ? c + 1 : c;
  if ((c >= 0x139 && c <= 0x148) || (c >= 0x179 && c <= 0x17E)) return (c % 2 == 1) ? c + 1 : c;
  if (c >= 0x391 && c <= 0x3A9 && c != 0x3A2) return c + 0x20;
  if (c >= 0x410 && c <= 0x42F) return c + 0x20;
  if (c >= 0x400 && c <= 0x40F) return c + 0x50;
  return c;
}

// Letters, digits and combining marks count as word characters; punctuation,
// symbols, spaces and emoji separate words.
inline bool is_word_char(char32_t c) {
  if (c < 0x80) return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
  if (c <= 0xBF) return c == 0xAA || c == 0xB5 || c == 0xBA;
  if (c == 0xD7 || c == 0xF7) return false;
  if (c >= 0x2000 && c <= 0x2BFF) return false;
  if (c >= 0x3000 && c <= 0x303F) return false;
  if (c >= 0xE000 && c <= 0xF8FF) return false;
  if (c >= 0xFE00 && c <= 0xFE0F) return false;
  if (c >= 0xFE30 && c <= 0xFE4F) return false;
  if ((c >= 0xFF00 && c <= 0xFF0F) || (c >= 0xFF1A && c <= 0xFF20) || (c >= 0xFF3B && c <= 0xFF40) ||
      (c >= 0xFF5B && c <= 0xFF65)) {
    return false;
  }
  if (c >= 0xFFF0 && c <= 0xFFFF) return false;
  if (c >= 0x1F000 && c <= 0x1FAFF) return false;
  return true;
}

struct Document {
  std::string doc_id;
  std::string raw_text;
  std::vector<std::string> tokens;
};

// Lowercased runs of word characters, minus stopwords and one-character tokens.
inline std::vector<std::string> tokenize(std::string_view raw, const StopwordSet& stopwords) {
  std::vector<std::string> tokens;
  std::string cur;
  std::size_t cur_len = 0;
  auto flush = [&] {
    if (cur_len >= 2 && !stopwords.count(cur)) tokens.push_back(cur);
    cur.clear();
    cur_len = 0;
  };
  for (std::size_t i = 0; i < raw.size();) {
    const char32_t c = utf8::next(raw, i);
    if (is_word_char(c)) {
      utf8::append(cur, to_lower(c));
      ++cur_len;
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

inline Document preprocess(std::string doc_id, std::string raw_text, const StopwordSet& stopwords) {
  Document d;
  d.tokens = tokenize(raw_text, stopwords);
  d.doc_id = std::move(doc_id);
  d.raw_text = std::move(raw_text);
  return d;
}

inline Document preprocess(std::string raw_text, const StopwordSet& stopwords = default_stopwords()) {
  return preprocess(std::string(), std::move(raw_text), stopwords);
}

}  // namespace signalmarket::text

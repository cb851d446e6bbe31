#pragma once

// Unicode helpers backed by ICU: NFC + lowercase folding and splitting on
// runs of non-alphanumeric code points.

#include <algorithm>
#include <string>
#include <string_view>
#include <vector>

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include "genremb/error.hpp"

namespace genremb::text {

inline bool is_ascii(std::string_view s) {
  return std::all_of(s.begin(), s.end(),
                     [](char c) { return static_cast<unsigned char>(c) < 0x80; });
}

/// NFC-normalize and lowercase (root locale). Idempotent.
inline std::string fold(std::string_view s) {
  if (is_ascii(s)) {
    std::string out(s);
    for (char& c : out) {
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return out;
  }
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) {
    throw Error(ErrorKind::io, "ICU NFC normalizer unavailable");
  }
  icu::UnicodeString u = icu::UnicodeString::fromUTF8(
      icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
  u = nfc->normalize(u, status);
  u.toLower(icu::Locale::getRoot());
  u = nfc->normalize(u, status);
  if (U_FAILURE(status)) {
    throw Error(ErrorKind::invalid_argument,
                "cannot normalize string '" + std::string(s) + "'");
  }
  std::string out;
  u.toUTF8String(out);
  return out;
}

// Combining marks count as alphanumeric so that decomposed accents stay
// attached to their base letter.
inline bool is_word_char(UChar32 c) {
  if (c < 0x80) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') ||
           (c >= 'A' && c <= 'Z');
  }
  return u_isalnum(c) || (U_GET_GC_MASK(c) & U_GC_M_MASK) != 0;
}

/// Split on every maximal run of non-alphanumeric code points. Empty pieces
/// are dropped. Input is expected to be folded already.
inline std::vector<std::string> split_alnum(std::string_view s) {
  std::vector<std::string> out;
  const auto* bytes = reinterpret_cast<const uint8_t*>(s.data());
  const auto length = static_cast<int32_t>(s.size());
  int32_t i = 0;
  int32_t start = -1;
  while (i < length) {
    const int32_t at = i;
    UChar32 c = 0;
    U8_NEXT(bytes, i, length, c);
    const bool word = c >= 0 && is_word_char(c);
    if (word && start < 0) {
      start = at;
    } else if (!word && start >= 0) {
      out.emplace_back(s.substr(start, at - start));
      start = -1;
    }
  }
  if (start >= 0) out.emplace_back(s.substr(start));
  return out;
}

inline std::string join(const std::vector<std::string>& parts,
                        std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

// Row keys in the vector text format are space separated, so ids that
// contain spaces or percent signs are percent-escaped on write.
inline std::string escape_key(std::string_view key) {
  std::string out;
  out.reserve(key.size());
  for (char c : key) {
    switch (c) {
      case '%': out += "%25"; break;
      case ' ': out += "%20"; break;
      case '\t': out += "%09"; break;
      case '\n': out += "%0A"; break;
      case '\r': out += "%0D"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string unescape_key(std::string_view key) {
  std::string out;
  out.reserve(key.size());
  for (std::size_t i = 0; i < key.size(); ++i) {
    if (key[i] == '%' && i + 2 < key.size()) {
      const std::string_view hex = key.substr(i + 1, 2);
      if (hex == "25") { out += '%'; i += 2; continue; }
      if (hex == "20") { out += ' '; i += 2; continue; }
      if (hex == "09") { out += '\t'; i += 2; continue; }
      if (hex == "0A") { out += '\n'; i += 2; continue; }
      if (hex == "0D") { out += '\r'; i += 2; continue; }
    }
    out += key[i];
  }
  return out;
}

}  // namespace genremb::text

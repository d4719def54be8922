#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

namespace mmc::utf8 {

// Decodes one code point at `bytes[i]`. Returns the code point and its
// encoded length, or nullopt for malformed input.
inline std::optional<std::pair<char32_t, std::size_t>> decode(std::string_view bytes, std::size_t i) {
  if (i >= bytes.size()) return std::nullopt;
  const auto b0 = static_cast<unsigned char>(bytes[i]);
  std::size_t len = 0;
  char32_t cp = 0;
  if (b0 < 0x80) return std::pair{static_cast<char32_t>(b0), std::size_t{1}};
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
    return std::nullopt;
  }
  if (i + len > bytes.size()) return std::nullopt;
  for (std::size_t k = 1; k < len; ++k) {
    const auto b = static_cast<unsigned char>(bytes[i + k]);
    if ((b & 0xC0) != 0x80) return std::nullopt;
    cp = (cp << 6) | (b & 0x3F);
  }
  return std::pair{cp, len};
}

inline bool is_space(char32_t c) {
  return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == U'\f' || c == U'\v' ||
         c == 0x00A0 || c == 0x2009 || c == 0x202F || c == 0x3000;
}

// Number of code points; malformed bytes count as one each.
inline std::size_t length(std::string_view bytes) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < bytes.size(); ++n) {
    auto d = decode(bytes, i);
    i += d ? d->second : 1;
  }
  return n;
}

class Cursor {
 public:
  explicit Cursor(std::string_view text) : text_(text) {}

  bool done() const { return byte_ >= text_.size(); }
  std::optional<char32_t> peek() const {
    auto d = decode(text_, byte_);
    if (!d) return std::nullopt;
    return d->first;
  }
  void advance() {
    auto d = decode(text_, byte_);
    byte_ += d ? d->second : 1;
    ++position_;
  }
  std::size_t byte_offset() const { return byte_; }
  std::size_t position() const { return position_; }

 private:
  std::string_view text_;
  std::size_t byte_ = 0;
  std::size_t position_ = 0;
};

// Strips ASCII and common Unicode whitespace from both ends.
inline std::string trim(std::string_view s) {
  std::size_t begin = 0;
  while (begin < s.size()) {
    auto d = decode(s, begin);
    if (!d || !is_space(d->first)) break;
    begin += d->second;
  }
  std::size_t end = s.size();
  while (end > begin) {
    // walk back to the start of the previous code point
    std::size_t start = end - 1;
    while (start > begin && (static_cast<unsigned char>(s[start]) & 0xC0) == 0x80) --start;
    auto d = decode(s, start);
    if (!d || !is_space(d->first)) break;
    end = start;
  }
  return std::string(s.substr(begin, end - begin));
}

}  // namespace mmc::utf8

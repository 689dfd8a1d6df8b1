#include "epitext/utf8.hpp"

namespace epitext::utf8 {

char32_t decode_next(std::string_view s, std::size_t& i) {
  const auto byte = [&](std::size_t k) { return static_cast<unsigned char>(s[k]); };
  const unsigned char b0 = byte(i);
  if (b0 < 0x80) {
    ++i;
    return b0;
  }
  const auto cont = [&](std::size_t k) {
    return i + k < s.size() && (byte(i + k) & 0xC0) == 0x80;
  };
  if ((b0 & 0xE0) == 0xC0 && cont(1)) {
    char32_t cp = (char32_t(b0 & 0x1F) << 6) | (byte(i + 1) & 0x3F);
    i += 2;
    return cp < 0x80 ? kReplacement : cp;
  }
  if ((b0 & 0xF0) == 0xE0 && cont(1) && cont(2)) {
    char32_t cp = (char32_t(b0 & 0x0F) << 12) | (char32_t(byte(i + 1) & 0x3F) << 6) |
                  (byte(i + 2) & 0x3F);
    i += 3;
    if (cp < 0x800 || (cp >= 0xD800 && cp <= 0xDFFF)) return kReplacement;
    return cp;
  }
  if ((b0 & 0xF8) == 0xF0 && cont(1) && cont(2) && cont(3)) {
    char32_t cp = (char32_t(b0 & 0x07) << 18) | (char32_t(byte(i + 1) & 0x3F) << 12) |
                  (char32_t(byte(i + 2) & 0x3F) << 6) | (byte(i + 3) & 0x3F);
    i += 4;
    if (cp < 0x10000 || cp > 0x10FFFF) return kReplacement;
    return cp;
  }
  ++i;
  return kReplacement;
}

std::vector<char32_t> decode(std::string_view s) {
  std::vector<char32_t> out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) out.push_back(decode_next(s, i));
  return out;
}

void append(std::string& out, char32_t cp) {
  if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) cp = kReplacement;
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

std::string encode(const std::vector<char32_t>& cps) {
  std::string out;
  out.reserve(cps.size());
  for (char32_t cp : cps) append(out, cp);
  return out;
}

bool is_space(char32_t cp) {
  switch (cp) {
    case U' ':
    case U'\t':
    case U'\n':
    case U'\r':
    case U'\f':
    case U'\v':
    case 0x85:
    case 0xA0:
    case 0x1680:
    case 0x2028:
    case 0x2029:
    case 0x202F:
    case 0x205F:
    case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

bool is_word_char(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= U'0' && cp <= U'9') || (cp >= U'a' && cp <= U'z') ||
           (cp >= U'A' && cp <= U'Z');
  }
  if (is_space(cp)) return false;
  switch (cp) {
    case 0xA1:
    case 0xA6:
    case 0xA7:
    case 0xAB:
    case 0xB6:
    case 0xB7:
    case 0xBB:
    case 0xBF:
    case 0xD7:
    case 0xF7:
      return false;
    default:
      break;
  }
  if (cp >= 0x2010 && cp <= 0x205E) return false;  // dashes, quotes, ellipsis, daggers
  if (cp == 0x27E8 || cp == 0x27E9) return false;  // mathematical angle brackets
  if (cp >= 0x2E00 && cp <= 0x2E52) return false;  // supplemental punctuation
  return true;
}

char32_t to_lower(char32_t cp) {
  if (cp < 0x80) return (cp >= U'A' && cp <= U'Z') ? cp + 0x20 : cp;
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 0x20;
  if (cp == 0x178) return 0xFF;  // Y with diaeresis
  // Latin Extended-A alternates capital/small in blocks.
  if (cp >= 0x100 && cp <= 0x137) return (cp % 2 == 0) ? cp + 1 : cp;
  if (cp >= 0x139 && cp <= 0x148) return (cp % 2 == 1) ? cp + 1 : cp;
  if (cp >= 0x14A && cp <= 0x177) return (cp % 2 == 0) ? cp + 1 : cp;
  if (cp >= 0x179 && cp <= 0x17E) return (cp % 2 == 1) ? cp + 1 : cp;
  return cp;
}

char32_t fold_ascii(char32_t cp) {
  cp = to_lower(cp);
  if (cp < 0x80) return cp;
  switch (cp) {
    case 0xDF: return U's';  // sharp s
    case 0xE6: return U'a';  // ae
    case 0xE7: return U'c';
    case 0xF0: return U'd';  // eth
    case 0xF1: return U'n';
    case 0xF8: return U'o';
    case 0xFD:
    case 0xFF: return U'y';
    case 0xFE: return U't';  // thorn
    default: break;
  }
  if (cp >= 0xE0 && cp <= 0xE5) return U'a';
  if (cp >= 0xE8 && cp <= 0xEB) return U'e';
  if (cp >= 0xEC && cp <= 0xEF) return U'i';
  if (cp >= 0xF2 && cp <= 0xF6) return U'o';
  if (cp >= 0xF9 && cp <= 0xFC) return U'u';
  if (cp >= 0x101 && cp <= 0x105) return U'a';
  if (cp >= 0x107 && cp <= 0x10D) return U'c';
  if (cp >= 0x10F && cp <= 0x111) return U'd';
  if (cp >= 0x113 && cp <= 0x11B) return U'e';
  if (cp >= 0x11D && cp <= 0x123) return U'g';
  if (cp >= 0x125 && cp <= 0x127) return U'h';
  if (cp >= 0x129 && cp <= 0x131) return U'i';
  if (cp >= 0x133 && cp <= 0x135) return U'j';
  if (cp >= 0x137 && cp <= 0x138) return U'k';
  if (cp >= 0x13A && cp <= 0x142) return U'l';
  if (cp >= 0x144 && cp <= 0x14B) return U'n';
  if (cp >= 0x14D && cp <= 0x153) return U'o';
  if (cp >= 0x155 && cp <= 0x159) return U'r';
  if (cp >= 0x15B && cp <= 0x161) return U's';
  if (cp >= 0x163 && cp <= 0x167) return U't';
  if (cp >= 0x169 && cp <= 0x173) return U'u';
  if (cp == 0x175) return U'w';
  if (cp == 0x177) return U'y';
  if (cp == 0x17F) return U's';  // long s
  if (cp >= 0x17A && cp <= 0x17E) return U'z';
  return cp;
}

std::string lower(std::string_view s) {
  auto cps = decode(s);
  for (auto& cp : cps) cp = to_lower(cp);
  return encode(cps);
}

std::string fold_ascii(std::string_view s) {
  auto cps = decode(s);
  for (auto& cp : cps) cp = fold_ascii(cp);
  return encode(cps);
}

}  // namespace epitext::utf8

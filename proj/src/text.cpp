#include "ragwin/text.hpp"

#include <algorithm>

namespace ragwin {

std::u32string decode_utf8(std::string_view text) {
  std::u32string out;
  out.reserve(text.size());
  size_t i = 0;
  const size_t n = text.size();
  while (i < n) {
    const auto b0 = static_cast<unsigned char>(text[i]);
    char32_t cp = 0xFFFD;
    size_t len = 1;
    if (b0 < 0x80) {
      cp = b0;
    } else if ((b0 & 0xE0) == 0xC0) {
      len = 2;
      cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3;
      cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4;
      cp = b0 & 0x07;
    } else {
      out.push_back(0xFFFD);
      ++i;
      continue;
    }
    if (len > 1) {
      if (i + len > n) {
        out.push_back(0xFFFD);
        ++i;
        continue;
      }
      bool ok = true;
      for (size_t k = 1; k < len; ++k) {
        const auto bk = static_cast<unsigned char>(text[i + k]);
        if ((bk & 0xC0) != 0x80) {
          ok = false;
          break;
        }
        cp = (cp << 6) | (bk & 0x3F);
      }
      if (!ok || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
        out.push_back(0xFFFD);
        ++i;
        continue;
      }
      // reject overlong encodings
      if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) ||
          (len == 4 && cp < 0x10000)) {
        out.push_back(0xFFFD);
        ++i;
        continue;
      }
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

void append_utf8(std::string& out, char32_t cp) {
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

std::string encode_utf8(std::u32string_view cps) {
  std::string out;
  out.reserve(cps.size());
  for (char32_t cp : cps) append_utf8(out, cp);
  return out;
}

bool is_space_cp(char32_t cp) {
  switch (cp) {
    case U' ':
    case U'\t':
    case U'\n':
    case U'\r':
    case 0x0B:
    case 0x0C:
    case 0x00A0:
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

bool is_control_cp(char32_t cp) {
  if (cp == U'\t' || cp == U'\n' || cp == U'\r') return false;
  if (cp < 0x20 || cp == 0x7F) return true;
  if (cp >= 0x80 && cp <= 0x9F) return true;
  // zero-width and directional format characters
  if (cp >= 0x200B && cp <= 0x200F) return true;
  if (cp >= 0x202A && cp <= 0x202E) return true;
  return cp == 0xFEFF;
}

bool is_punct_cp(char32_t cp) {
  if ((cp >= 33 && cp <= 47) || (cp >= 58 && cp <= 64) ||
      (cp >= 91 && cp <= 96) || (cp >= 123 && cp <= 126)) {
    return true;
  }
  switch (cp) {
    case 0x00A1:  // inverted exclamation
    case 0x00A7:  // section sign
    case 0x00AB:  // left guillemet
    case 0x00B6:  // pilcrow
    case 0x00B7:  // middle dot
    case 0x00BB:  // right guillemet
    case 0x00BF:  // inverted question mark
    case 0x2020:  // dagger
    case 0x2021:  // double dagger
    case 0x2022:  // bullet
    case 0x2026:  // ellipsis
    case 0x2032:  // prime
    case 0x2033:  // double prime
    case 0x2039:  // single left guillemet
    case 0x203A:  // single right guillemet
      return true;
    default:
      break;
  }
  // hyphens/dashes and curly quotes
  if (cp >= 0x2010 && cp <= 0x2015) return true;
  if (cp >= 0x2018 && cp <= 0x201F) return true;
  return false;
}

char32_t to_lower_cp(char32_t cp) {
  if (cp >= U'A' && cp <= U'Z') return cp + 0x20;
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 0x20;
  if (cp == 0x130) return U'i';  // I with dot above
  if (cp == 0x178) return 0xFF;  // Y with diaeresis
  if (cp >= 0x100 && cp <= 0x137 && (cp % 2) == 0) return cp + 1;
  if (cp >= 0x139 && cp <= 0x148 && (cp % 2) == 1) return cp + 1;
  if (cp >= 0x14A && cp <= 0x177 && (cp % 2) == 0) return cp + 1;
  if (cp >= 0x179 && cp <= 0x17D && (cp % 2) == 1) return cp + 1;
  return cp;
}

char32_t strip_accent_cp(char32_t cp) {
  if (cp >= 0x300 && cp <= 0x36F) return 0;  // combining marks: drop
  // Latin-1 Supplement, lowercase forms
  if (cp >= 0xE0 && cp <= 0xE5) return U'a';
  if (cp == 0xE7) return U'c';
  if (cp >= 0xE8 && cp <= 0xEB) return U'e';
  if (cp >= 0xEC && cp <= 0xEF) return U'i';
  if (cp == 0xF1) return U'n';
  if (cp >= 0xF2 && cp <= 0xF6) return U'o';
  if (cp >= 0xF9 && cp <= 0xFC) return U'u';
  if (cp == 0xFD || cp == 0xFF) return U'y';
  // Latin Extended-A, lowercase forms with canonical decompositions
  switch (cp) {
    case 0x101:
    case 0x103:
    case 0x105:
      return U'a';
    case 0x107:
    case 0x109:
    case 0x10B:
    case 0x10D:
      return U'c';
    case 0x10F:
      return U'd';
    case 0x113:
    case 0x115:
    case 0x117:
    case 0x119:
    case 0x11B:
      return U'e';
    case 0x11D:
    case 0x11F:
    case 0x121:
    case 0x123:
      return U'g';
    case 0x125:
      return U'h';
    case 0x129:
    case 0x12B:
    case 0x12D:
    case 0x12F:
      return U'i';
    case 0x135:
      return U'j';
    case 0x137:
      return U'k';
    case 0x13A:
    case 0x13C:
    case 0x13E:
      return U'l';
    case 0x144:
    case 0x146:
    case 0x148:
      return U'n';
    case 0x14D:
    case 0x14F:
    case 0x151:
      return U'o';
    case 0x155:
    case 0x157:
    case 0x159:
      return U'r';
    case 0x15B:
    case 0x15D:
    case 0x15F:
    case 0x161:
      return U's';
    case 0x163:
    case 0x165:
      return U't';
    case 0x169:
    case 0x16B:
    case 0x16D:
    case 0x16F:
    case 0x171:
    case 0x173:
      return U'u';
    case 0x175:
      return U'w';
    case 0x177:
      return U'y';
    case 0x17A:
    case 0x17C:
    case 0x17E:
      return U'z';
    default:
      return cp;
  }
}

std::string fold_case(std::string_view text) {
  std::u32string cps = decode_utf8(text);
  for (auto& cp : cps) cp = to_lower_cp(cp);
  return encode_utf8(cps);
}

std::string fold_case_trim(std::string_view text) {
  std::u32string cps = decode_utf8(text);
  size_t begin = 0;
  size_t end = cps.size();
  while (begin < end && is_space_cp(cps[begin])) ++begin;
  while (end > begin && is_space_cp(cps[end - 1])) --end;
  std::u32string kept(cps.begin() + begin, cps.begin() + end);
  for (auto& cp : kept) cp = to_lower_cp(cp);
  return encode_utf8(kept);
}

}  // namespace ragwin

#include "pprl/blocking.hpp"

#include <algorithm>
#include <cctype>

namespace pprl {

namespace {

// Soundex digit for a letter, 0 for vowels and Y, -1 for H and W which are
// skipped without separating equal codes.
int soundex_code(char c) {
  switch (c) {
    case 'b': case 'f': case 'p': case 'v':
      return 1;
    case 'c': case 'g': case 'j': case 'k': case 'q': case 's': case 'x': case 'z':
      return 2;
    case 'd': case 't':
      return 3;
    case 'l':
      return 4;
    case 'm': case 'n':
      return 5;
    case 'r':
      return 6;
    case 'h': case 'w':
      return -1;
    default:
      return 0;  // a e i o u y
  }
}

}  // namespace

std::string soundex(const std::string& s) {
  std::string letters;
  letters.reserve(s.size());
  for (char ch : s) {
    unsigned char u = static_cast<unsigned char>(ch);
    if (std::isalpha(u)) letters.push_back(static_cast<char>(std::tolower(u)));
  }
  if (letters.empty()) return "Z000";

  std::string out;
  out.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(letters[0]))));
  int prev = soundex_code(letters[0]);
  for (std::size_t i = 1; i < letters.size() && out.size() < 4; ++i) {
    int code = soundex_code(letters[i]);
    if (code == -1) continue;  // h/w: invisible, prev survives
    if (code != 0 && code != prev) out.push_back(static_cast<char>('0' + code));
    prev = code;
  }
  while (out.size() < 4) out.push_back('0');
  return out;
}

std::string blocking_key(const Record& rec, const std::vector<std::size_t>& attr_idx) {
  std::string key;
  for (std::size_t idx : attr_idx) key += soundex(rec.values.at(idx));
  return key;
}

BlockIndex build_blocks(const Database& db, const std::vector<std::size_t>& attr_idx) {
  BlockIndex index;
  for (std::size_t i = 0; i < db.rows.size(); ++i)
    index[blocking_key(db.rows[i], attr_idx)].push_back(i);
  return index;
}

std::vector<std::string> common_blocks(const std::vector<BlockIndex>& indexes) {
  if (indexes.empty()) return {};
  std::vector<std::string> common;
  for (const auto& [key, rows] : indexes[0]) {
    (void)rows;
    bool everywhere = true;
    for (std::size_t p = 1; p < indexes.size(); ++p) {
      if (!indexes[p].count(key)) {
        everywhere = false;
        break;
      }
    }
    if (everywhere) common.push_back(key);
  }
  return common;  // map iteration is sorted already
}

}  // namespace pprl

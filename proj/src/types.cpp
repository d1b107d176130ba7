// SPDX-License-Identifier: Apache-2.0
#include "garble/types.hpp"

#include <algorithm>
#include <cctype>

#include "garble/error.hpp"

namespace garble {

std::string_view to_string(Label label) {
  switch (label) {
    case Label::extant:
      return "extant";
    case Label::pseudoword:
      return "pseudoword";
    case Label::garble:
      return "garble";
  }
  return "?";
}

std::string_view to_string(Pos pos) {
  switch (pos) {
    case Pos::noun:
      return "noun";
    case Pos::verb:
      return "verb";
    case Pos::adjective:
      return "adjective";
    case Pos::adverb:
      return "adverb";
    case Pos::other:
      return "other";
  }
  return "?";
}

Label parse_label(std::string_view text) {
  for (Label l : kAllLabels) {
    if (text == to_string(l)) return l;
  }
  throw data_error("unknown label '" + std::string(text) + "'");
}

Pos parse_pos(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  for (Pos p : kAllPos) {
    if (lower == to_string(p)) return p;
  }
  return Pos::other;
}

bool is_alpha_token(std::string_view token) {
  return !token.empty() && std::all_of(token.begin(), token.end(), [](char c) {
           return c >= 'a' && c <= 'z';
         });
}

}  // namespace garble

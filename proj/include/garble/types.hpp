// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace garble {

enum class Label { extant, pseudoword, garble };
enum class Pos { noun, verb, adjective, adverb, other };

inline constexpr Label kAllLabels[] = {Label::extant, Label::pseudoword,
                                       Label::garble};
inline constexpr Pos kAllPos[] = {Pos::noun, Pos::verb, Pos::adjective,
                                  Pos::adverb, Pos::other};

std::string_view to_string(Label label);
std::string_view to_string(Pos pos);

/// Parses the canonical lowercase label names; throws a data error otherwise.
Label parse_label(std::string_view text);

/// Case-insensitive. Anything outside the four open classes maps to `other`.
Pos parse_pos(std::string_view text);

/// True iff `token` is non-empty and entirely in [a-z].
bool is_alpha_token(std::string_view token);

struct NGramRecord {
  std::string token;
  Label label = Label::extant;
  std::optional<Pos> pos;
  /// Minmax-normalized rating, only ever set on extant records.
  std::optional<double> concreteness;

  friend bool operator==(const NGramRecord&, const NGramRecord&) = default;
};

}  // namespace garble

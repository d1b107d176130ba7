// SPDX-License-Identifier: Apache-2.0
//
// Prediction-by-partial-matching character model (PPM-C escapes) used to
// assign every n-gram an information score in bits.
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "garble/types.hpp"

namespace garble {

/// 26 letters followed by the end-of-word marker.
inline constexpr int kPpmAlphabet = 27;
inline constexpr int kEndOfWord = 26;

/// Maps 'a'..'z' to 0..25 and '$' to kEndOfWord; -1 for anything else.
int ppm_symbol(char c);
char ppm_char(int symbol);

using SymbolCounts = std::array<std::uint64_t, kPpmAlphabet>;

class PpmModel {
 public:
  PpmModel() = default;
  PpmModel(std::size_t max_order, std::map<std::string, SymbolCounts> counts);

  std::size_t max_order() const { return max_order_; }
  /// Number of training tokens (the end-marker count of the empty context).
  std::uint64_t trained_tokens() const;
  const std::map<std::string, SymbolCounts>& contexts() const { return counts_; }
  /// nullptr if the context never occurred in training.
  const SymbolCounts* find(std::string_view context) const;

 private:
  friend PpmModel train_ppm(std::span<const std::string>, std::size_t, bool);
  std::size_t max_order_ = 0;
  std::map<std::string, SymbolCounts> counts_;
};

/// Counts every (context of length 0..max_order, next symbol) pair over each
/// token followed by the end marker. An empty token list gives an empty model
/// unless `allow_empty` is false.
PpmModel train_ppm(std::span<const std::string> tokens, std::size_t max_order,
                   bool allow_empty = true);

struct PpmOptions {
  /// Symbols predicted by a longer context are excluded when escaping to a
  /// shorter one. Without exclusion the per-context distribution is deficient
  /// (sums to less than one).
  bool exclusion = true;
  /// Divide the token surprisal by (length + 1).
  bool per_character = false;
};

/// P(symbol | context) using the longest suffix of `context` up to the model
/// order, backing off through shorter suffixes down to a uniform base case.
double ppm_prob(const PpmModel& model, std::string_view context, int symbol,
                const PpmOptions& options = {});

struct InfoScore {
  std::string token;
  double surprisal_bits = 0.0;
  std::optional<double> normalized;
};

/// -sum log2 P over every character and the end marker.
InfoScore ppm_logpdf(const PpmModel& model, std::string_view token,
                     const PpmOptions& options = {});

/// Scores all records, then minmax-normalizes jointly (all 0 if constant).
std::vector<InfoScore> score_corpus(const PpmModel& model,
                                    std::span<const NGramRecord> records,
                                    const PpmOptions& options = {});

std::string serialize_ppm(const PpmModel& model);
PpmModel parse_ppm(std::string_view text);
void write_ppm(const PpmModel& model, const std::filesystem::path& path);
PpmModel read_ppm(const std::filesystem::path& path);

}  // namespace garble

// SPDX-License-Identifier: Apache-2.0
//
// Extant lexicon ingestion and the garble / pseudoword generators.
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "garble/types.hpp"

namespace garble {

/// Token-length histogram. Keys are lengths in characters.
struct LengthDistribution {
  std::map<std::size_t, std::uint64_t> counts;

  std::uint64_t total() const;
  bool empty() const { return total() == 0; }
  /// counts[k] / total(), zero for lengths not present.
  double probability(std::size_t length) const;
};

/// Immutable extant word list in file (frequency-rank) order.
class Lexicon {
 public:
  Lexicon() = default;
  /// Throws a data error on a duplicate or non-alphabetic token.
  explicit Lexicon(std::vector<NGramRecord> records);

  const std::vector<NGramRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  bool contains(std::string_view token) const;
  /// nullptr when absent.
  const NGramRecord* find(std::string_view token) const;

  /// Rows dropped by the loader because the token was not [a-z]+ after
  /// lowercasing, or repeated an earlier row.
  std::size_t skipped_rows = 0;

 private:
  std::vector<NGramRecord> records_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Reads a `word,pos,concreteness` CSV. Concreteness is rescaled so that the
/// loaded rows span exactly [0, 1] (all zero if every rating is equal).
Lexicon load_lexicon(const std::filesystem::path& path,
                     std::optional<std::size_t> limit = std::nullopt);

/// Writes the lexicon back in the same CSV layout (normalized ratings).
void write_lexicon(const Lexicon& lexicon, const std::filesystem::path& path);

LengthDistribution length_histogram(const Lexicon& lexicon);
LengthDistribution length_histogram(std::span<const NGramRecord> records);

struct GarbleOptions {
  /// Redraw tokens already produced by this call.
  bool unique = false;
  /// Redraw tokens that are members of this lexicon.
  const Lexicon* exclude = nullptr;
  std::size_t max_attempts_per_token = 10000;
};

/// Lengths are drawn from `dist`, characters i.i.d. uniform over a-z.
std::vector<NGramRecord> generate_garble(const LengthDistribution& dist,
                                         std::size_t count, std::uint64_t seed,
                                         const GarbleOptions& options = {});

struct PseudowordOptions {
  /// Consecutive rejected samples tolerated before giving up on a token.
  std::size_t max_rejections = 10000;
  bool unique = false;
  std::size_t max_length = 40;
};

/// Samples from an order-`order` character Markov chain fit to the lexicon
/// (start padding plus an end symbol), rejecting exact lexicon members.
std::vector<NGramRecord> generate_pseudowords(
    const Lexicon& lexicon, std::size_t order, std::size_t count,
    std::uint64_t seed, const PseudowordOptions& options = {});

struct CollisionReport {
  std::vector<bool> collides;
  std::size_t count = 0;
};

CollisionReport mark_collisions(std::span<const NGramRecord> records,
                                const Lexicon& lexicon);

/// `token<TAB>label` lines preceded by optional `#` comment lines.
void write_token_file(const std::filesystem::path& path,
                      std::span<const NGramRecord> records,
                      std::span<const std::string> header_comments = {});
std::vector<NGramRecord> read_token_file(const std::filesystem::path& path);

}  // namespace garble

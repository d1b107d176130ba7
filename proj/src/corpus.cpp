// SPDX-License-Identifier: Apache-2.0
#include "garble/corpus.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <random>
#include <sstream>
#include <unordered_set>

#include "garble/error.hpp"
#include "garble/text_io.hpp"

namespace garble {

std::uint64_t LengthDistribution::total() const {
  std::uint64_t sum = 0;
  for (const auto& [len, n] : counts) sum += n;
  return sum;
}

double LengthDistribution::probability(std::size_t length) const {
  const auto it = counts.find(length);
  const std::uint64_t t = total();
  if (it == counts.end() || t == 0) return 0.0;
  return static_cast<double>(it->second) / static_cast<double>(t);
}

Lexicon::Lexicon(std::vector<NGramRecord> records)
    : records_(std::move(records)) {
  index_.reserve(records_.size());
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const auto& token = records_[i].token;
    if (!is_alpha_token(token)) {
      throw data_error("lexicon token '" + token + "' is not [a-z]+");
    }
    if (!index_.emplace(token, i).second) {
      throw data_error("duplicate lexicon token '" + token + "'");
    }
  }
}

bool Lexicon::contains(std::string_view token) const {
  return find(token) != nullptr;
}

const NGramRecord* Lexicon::find(std::string_view token) const {
  const auto it = index_.find(std::string(token));
  return it == index_.end() ? nullptr : &records_[it->second];
}

namespace {

constexpr std::string_view kLexiconHeader = "word,pos,concreteness";

std::string lowercase(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

}  // namespace

Lexicon load_lexicon(const std::filesystem::path& path,
                     std::optional<std::size_t> limit) {
  if (!std::filesystem::exists(path)) {
    throw data_error("lexicon file not found: " + path.string());
  }
  const auto lines = read_lines(path);
  if (lines.empty()) throw data_error("lexicon file is empty: " + path.string());
  std::string_view header = lines[0];
  if (header.starts_with("\xEF\xBB\xBF")) header.remove_prefix(3);
  if (header != kLexiconHeader) {
    throw data_error("lexicon header mismatch: expected '" +
                     std::string(kLexiconHeader) + "', got '" +
                     std::string(header) + "'");
  }

  std::vector<NGramRecord> records;
  std::vector<double> ratings;
  std::unordered_set<std::string> seen;
  std::size_t skipped = 0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (limit && records.size() >= *limit) break;
    const std::string_view line = lines[i];
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    const std::string where = path.string() + ":" + std::to_string(i + 1);
    if (fields.size() != 3) {
      throw data_error("expected 3 fields at " + where);
    }
    std::string token = lowercase(fields[0]);
    if (!is_alpha_token(token) || seen.contains(token)) {
      ++skipped;
      continue;
    }
    NGramRecord rec;
    rec.token = token;
    rec.label = Label::extant;
    if (!fields[1].empty()) rec.pos = parse_pos(fields[1]);
    ratings.push_back(parse_double(fields[2], where));
    seen.insert(std::move(token));
    records.push_back(std::move(rec));
  }
  if (records.empty()) {
    throw data_error("no valid rows in lexicon " + path.string());
  }

  const auto [lo, hi] = std::minmax_element(ratings.begin(), ratings.end());
  const double min = *lo;
  const double range = *hi - *lo;
  for (std::size_t i = 0; i < records.size(); ++i) {
    records[i].concreteness = range > 0.0 ? (ratings[i] - min) / range : 0.0;
  }

  Lexicon lexicon(std::move(records));
  lexicon.skipped_rows = skipped;
  return lexicon;
}

void write_lexicon(const Lexicon& lexicon, const std::filesystem::path& path) {
  std::ostringstream out;
  out << kLexiconHeader << '\n';
  for (const auto& rec : lexicon.records()) {
    out << rec.token << ',' << (rec.pos ? to_string(*rec.pos) : "") << ','
        << format_double(rec.concreteness.value_or(0.0)) << '\n';
  }
  write_text(path, out.str());
}

LengthDistribution length_histogram(std::span<const NGramRecord> records) {
  LengthDistribution dist;
  for (const auto& rec : records) ++dist.counts[rec.token.size()];
  return dist;
}

LengthDistribution length_histogram(const Lexicon& lexicon) {
  return length_histogram(std::span(lexicon.records()));
}

std::vector<NGramRecord> generate_garble(const LengthDistribution& dist,
                                         std::size_t count, std::uint64_t seed,
                                         const GarbleOptions& options) {
  std::vector<NGramRecord> out;
  if (count == 0) return out;
  if (dist.empty()) {
    throw usage_error("cannot generate garble from an empty length distribution");
  }

  std::vector<std::size_t> lengths;
  std::vector<double> weights;
  for (const auto& [len, n] : dist.counts) {
    if (len == 0 && n > 0) throw usage_error("length distribution has length 0");
    lengths.push_back(len);
    weights.push_back(static_cast<double>(n));
  }

  std::mt19937_64 rng(seed);
  std::discrete_distribution<std::size_t> pick_length(weights.begin(),
                                                      weights.end());
  std::uniform_int_distribution<int> pick_char(0, 25);
  std::unordered_set<std::string> produced;

  out.reserve(count);
  while (out.size() < count) {
    std::string token;
    std::size_t attempts = 0;
    while (true) {
      const std::size_t len = lengths[pick_length(rng)];
      token.resize(len);
      for (auto& c : token) c = static_cast<char>('a' + pick_char(rng));
      const bool dup = options.unique && produced.contains(token);
      const bool excluded = options.exclude && options.exclude->contains(token);
      if (!dup && !excluded) break;
      if (++attempts >= options.max_attempts_per_token) {
        throw data_error("garble generator exhausted after " +
                         std::to_string(attempts) + " redraws at token " +
                         std::to_string(out.size()));
      }
    }
    if (options.unique) produced.insert(token);
    out.push_back(NGramRecord{std::move(token), Label::garble, {}, {}});
  }
  return out;
}

namespace {

constexpr int kEndSymbol = 26;
constexpr char kStartPad = '^';

class CharChain {
 public:
  CharChain(const Lexicon& lexicon, std::size_t order) : order_(order) {
    for (const auto& rec : lexicon.records()) {
      std::string ctx(order_, kStartPad);
      for (char c : rec.token) {
        ++table_[ctx][c - 'a'];
        ctx.erase(ctx.begin());
        ctx.push_back(c);
      }
      ++table_[ctx][kEndSymbol];
    }
  }

  /// Returns std::nullopt if the walk exceeds max_length characters.
  std::optional<std::string> sample(std::mt19937_64& rng,
                                    std::size_t max_length) const {
    std::string ctx(order_, kStartPad);
    std::string token;
    while (true) {
      const auto it = table_.find(ctx);
      if (it == table_.end()) {
        throw data_error("pseudoword chain has no continuation for context '" +
                         ctx + "'");
      }
      const auto& row = it->second;
      std::uint64_t total = 0;
      for (auto n : row) total += n;
      std::uniform_int_distribution<std::uint64_t> pick(0, total - 1);
      std::uint64_t r = pick(rng);
      int sym = 0;
      while (r >= row[sym]) r -= row[sym++];
      if (sym == kEndSymbol) return token;
      if (token.size() >= max_length) return std::nullopt;
      const char c = static_cast<char>('a' + sym);
      token.push_back(c);
      ctx.erase(ctx.begin());
      ctx.push_back(c);
    }
  }

 private:
  std::size_t order_;
  std::unordered_map<std::string, std::array<std::uint64_t, 27>> table_;
};

}  // namespace

std::vector<NGramRecord> generate_pseudowords(const Lexicon& lexicon,
                                              std::size_t order,
                                              std::size_t count,
                                              std::uint64_t seed,
                                              const PseudowordOptions& options) {
  std::vector<NGramRecord> out;
  if (count == 0) return out;
  if (order < 1) throw usage_error("pseudoword order must be >= 1");
  if (lexicon.empty()) throw usage_error("pseudoword lexicon is empty");

  const CharChain chain(lexicon, order);
  std::mt19937_64 rng(seed);
  std::unordered_set<std::string> produced;
  out.reserve(count);
  while (out.size() < count) {
    std::size_t rejections = 0;
    while (true) {
      auto token = chain.sample(rng, options.max_length);
      if (token && !token->empty() && !lexicon.contains(*token) &&
          !(options.unique && produced.contains(*token))) {
        if (options.unique) produced.insert(*token);
        out.push_back(NGramRecord{std::move(*token), Label::pseudoword, {}, {}});
        break;
      }
      if (++rejections >= options.max_rejections) {
        throw data_error("pseudoword rejection cap (" +
                         std::to_string(options.max_rejections) +
                         ") reached at token " + std::to_string(out.size()) +
                         "; the chain only reproduces lexicon words");
      }
    }
  }
  return out;
}

CollisionReport mark_collisions(std::span<const NGramRecord> records,
                                const Lexicon& lexicon) {
  CollisionReport report;
  report.collides.reserve(records.size());
  for (const auto& rec : records) {
    const bool hit = lexicon.contains(rec.token);
    report.collides.push_back(hit);
    report.count += hit ? 1 : 0;
  }
  return report;
}

void write_token_file(const std::filesystem::path& path,
                      std::span<const NGramRecord> records,
                      std::span<const std::string> header_comments) {
  std::ostringstream out;
  for (const auto& line : header_comments) out << "# " << line << '\n';
  for (const auto& rec : records) {
    out << rec.token << '\t' << to_string(rec.label) << '\n';
  }
  write_text(path, out.str());
}

std::vector<NGramRecord> read_token_file(const std::filesystem::path& path) {
  std::vector<NGramRecord> records;
  const auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string_view line = lines[i];
    if (line.empty() || line.front() == '#') continue;
    const auto fields = split(line, '\t');
    const std::string where = path.string() + ":" + std::to_string(i + 1);
    if (fields.size() != 2) throw data_error("expected token<TAB>label at " + where);
    if (!is_alpha_token(fields[0])) {
      throw data_error("token '" + std::string(fields[0]) + "' is not [a-z]+ at " +
                       where);
    }
    records.push_back(
        NGramRecord{std::string(fields[0]), parse_label(fields[1]), {}, {}});
  }
  return records;
}

}  // namespace garble

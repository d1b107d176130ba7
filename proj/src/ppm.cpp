// SPDX-License-Identifier: Apache-2.0
#include "garble/ppm.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

#include "garble/error.hpp"
#include "garble/text_io.hpp"

namespace garble {

int ppm_symbol(char c) {
  if (c >= 'a' && c <= 'z') return c - 'a';
  if (c == '$') return kEndOfWord;
  return -1;
}

char ppm_char(int symbol) {
  return symbol == kEndOfWord ? '$' : static_cast<char>('a' + symbol);
}

PpmModel::PpmModel(std::size_t max_order,
                   std::map<std::string, SymbolCounts> counts)
    : max_order_(max_order), counts_(std::move(counts)) {
  for (const auto& [ctx, row] : counts_) {
    if (ctx.size() > max_order_) {
      throw data_error("ppm context '" + ctx + "' longer than order " +
                       std::to_string(max_order_));
    }
    if (!ctx.empty() && !is_alpha_token(ctx)) {
      throw data_error("ppm context '" + ctx + "' is not [a-z]*");
    }
  }
}

std::uint64_t PpmModel::trained_tokens() const {
  const auto* root = find("");
  return root ? (*root)[kEndOfWord] : 0;
}

const SymbolCounts* PpmModel::find(std::string_view context) const {
  const auto it = counts_.find(std::string(context));
  return it == counts_.end() ? nullptr : &it->second;
}

PpmModel train_ppm(std::span<const std::string> tokens, std::size_t max_order,
                   bool allow_empty) {
  if (tokens.empty() && !allow_empty) {
    throw usage_error("cannot train a ppm model on an empty token list");
  }
  PpmModel model;
  model.max_order_ = max_order;
  for (const auto& token : tokens) {
    if (!is_alpha_token(token)) {
      throw data_error("ppm training token '" + token + "' is not [a-z]+");
    }
    for (std::size_t i = 0; i <= token.size(); ++i) {
      const int sym = i == token.size() ? kEndOfWord : token[i] - 'a';
      const std::size_t longest = std::min(i, max_order);
      for (std::size_t k = 0; k <= longest; ++k) {
        ++model.counts_[token.substr(i - k, k)][sym];
      }
    }
  }
  return model;
}

double ppm_prob(const PpmModel& model, std::string_view context, int symbol,
                const PpmOptions& options) {
  if (symbol < 0 || symbol >= kPpmAlphabet) {
    throw data_error("ppm symbol out of range");
  }
  const std::size_t k = std::min(context.size(), model.max_order());
  const std::string_view longest = context.substr(context.size() - k);

  double escape = 1.0;
  std::uint32_t excluded = 0;
  for (std::size_t order = k + 1; order-- > 0;) {
    const SymbolCounts* row = model.find(longest.substr(k - order));
    if (row == nullptr) continue;
    std::uint64_t total = 0;
    std::uint64_t distinct = 0;
    std::uint32_t seen = 0;
    for (int s = 0; s < kPpmAlphabet; ++s) {
      if ((*row)[s] == 0) continue;
      if (options.exclusion && (excluded >> s & 1U)) continue;
      total += (*row)[s];
      ++distinct;
      seen |= 1U << s;
    }
    if (total == 0) continue;
    // A context that has seen every symbol still available has nothing to
    // escape to, so it keeps the whole mass.
    const bool full = options.exclusion &&
                      std::popcount(excluded) + static_cast<int>(distinct) == kPpmAlphabet;
    const double denom = static_cast<double>(full ? total : total + distinct);
    if (seen >> symbol & 1U) {
      return escape * static_cast<double>((*row)[symbol]) / denom;
    }
    escape *= static_cast<double>(distinct) / denom;
    excluded |= seen;
  }
  const int remaining =
      options.exclusion ? kPpmAlphabet - std::popcount(excluded) : kPpmAlphabet;
  return escape / static_cast<double>(remaining);
}

InfoScore ppm_logpdf(const PpmModel& model, std::string_view token,
                     const PpmOptions& options) {
  if (!is_alpha_token(token)) {
    throw data_error("cannot score '" + std::string(token) + "': not [a-z]+");
  }
  double bits = 0.0;
  for (std::size_t i = 0; i <= token.size(); ++i) {
    const int sym = i == token.size() ? kEndOfWord : token[i] - 'a';
    bits -= std::log2(ppm_prob(model, token.substr(0, i), sym, options));
  }
  if (options.per_character) bits /= static_cast<double>(token.size() + 1);
  return InfoScore{std::string(token), bits, std::nullopt};
}

std::vector<InfoScore> score_corpus(const PpmModel& model,
                                    std::span<const NGramRecord> records,
                                    const PpmOptions& options) {
  if (records.empty()) throw usage_error("score_corpus: no records");
  std::vector<InfoScore> scores;
  scores.reserve(records.size());
  for (const auto& rec : records) {
    scores.push_back(ppm_logpdf(model, rec.token, options));
  }
  const auto [lo, hi] = std::minmax_element(
      scores.begin(), scores.end(), [](const InfoScore& a, const InfoScore& b) {
        return a.surprisal_bits < b.surprisal_bits;
      });
  const double min = lo->surprisal_bits;
  const double range = hi->surprisal_bits - min;
  for (auto& s : scores) {
    s.normalized = range > 0.0 ? (s.surprisal_bits - min) / range : 0.0;
  }
  return scores;
}

std::string serialize_ppm(const PpmModel& model) {
  std::ostringstream out;
  out << "#ppm v1 order=" << model.max_order() << " alphabet=" << kPpmAlphabet
      << '\n';
  for (const auto& [ctx, row] : model.contexts()) {
    out << ctx << '\t';
    bool first = true;
    for (int s = 0; s < kPpmAlphabet; ++s) {
      if (row[s] == 0) continue;
      if (!first) out << ',';
      out << ppm_char(s) << ':' << row[s];
      first = false;
    }
    out << '\n';
  }
  return out.str();
}

PpmModel parse_ppm(std::string_view text) {
  const auto lines = split(text, '\n');
  if (lines.empty()) throw data_error("empty ppm model");
  const std::string_view header = lines[0];
  constexpr std::string_view prefix = "#ppm v1 order=";
  constexpr std::string_view suffix = " alphabet=27";
  if (!header.starts_with(prefix) || !header.ends_with(suffix)) {
    throw data_error("bad ppm header '" + std::string(header) + "'");
  }
  const auto order = parse_int(
      header.substr(prefix.size(),
                    header.size() - prefix.size() - suffix.size()),
      "ppm header");
  if (order < 0) throw data_error("negative ppm order");

  std::map<std::string, SymbolCounts> counts;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::string_view line = lines[i];
    if (line.empty()) continue;
    const std::string where = "ppm line " + std::to_string(i + 1);
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos) throw data_error("missing tab at " + where);
    SymbolCounts row{};
    for (auto entry : split(line.substr(tab + 1), ',')) {
      if (entry.size() < 3 || entry[1] != ':') {
        throw data_error("bad count entry at " + where);
      }
      const int sym = ppm_symbol(entry[0]);
      if (sym < 0) throw data_error("bad symbol at " + where);
      const auto n = parse_int(entry.substr(2), where);
      if (n < 0) throw data_error("negative count at " + where);
      row[sym] = static_cast<std::uint64_t>(n);
    }
    if (!counts.emplace(std::string(line.substr(0, tab)), row).second) {
      throw data_error("duplicate context at " + where);
    }
  }
  return PpmModel(static_cast<std::size_t>(order), std::move(counts));
}

void write_ppm(const PpmModel& model, const std::filesystem::path& path) {
  write_text(path, serialize_ppm(model));
}

PpmModel read_ppm(const std::filesystem::path& path) {
  std::ostringstream buf;
  for (const auto& line : read_lines(path)) buf << line << '\n';
  return parse_ppm(buf.str());
}

}  // namespace garble

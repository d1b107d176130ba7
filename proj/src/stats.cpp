// SPDX-License-Identifier: Apache-2.0
#include "garble/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "garble/error.hpp"

namespace garble {

namespace {

double ks_statistic_sorted(std::span<const double> a, std::span<const double> b) {
  const double n1 = static_cast<double>(a.size());
  const double n2 = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() || j < b.size()) {
    double x;
    if (i == a.size()) {
      x = b[j];
    } else if (j == b.size()) {
      x = a[i];
    } else {
      x = std::min(a[i], b[j]);
    }
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / n1 -
                             static_cast<double>(j) / n2));
  }
  return d;
}

}  // namespace

double kolmogorov_q(double lambda) {
  if (!(lambda > 0.0)) return 1.0;
  if (lambda < 1.18) {
    // Complementary series, fast for small lambda.
    const double k = std::numbers::pi * std::numbers::pi / (8.0 * lambda * lambda);
    double sum = 0.0;
    for (int j = 1; j <= 50; ++j) {
      const double term = std::exp(-(2.0 * j - 1.0) * (2.0 * j - 1.0) * k);
      sum += term;
      if (term < 1e-17 * sum) break;
    }
    return std::clamp(1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * sum, 0.0, 1.0);
  }
  double sum = 0.0;
  double sign = 1.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    sum += sign * term;
    if (term < 1e-17) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw usage_error("ks_two_sample: empty sample");
  std::vector<double> sa(a.begin(), a.end());
  std::vector<double> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());

  KsResult r;
  r.n1 = sa.size();
  r.n2 = sb.size();
  r.d_statistic = ks_statistic_sorted(sa, sb);
  const double n1 = static_cast<double>(r.n1);
  const double n2 = static_cast<double>(r.n2);
  r.p_value = r.d_statistic == 0.0
                  ? 1.0
                  : kolmogorov_q(std::sqrt(n1 * n2 / (n1 + n2)) * r.d_statistic);
  return r;
}

double ks_permutation_pvalue(std::span<const double> a, std::span<const double> b,
                             std::size_t permutations, std::uint64_t seed) {
  if (a.empty() || b.empty()) throw usage_error("ks permutation: empty sample");
  if (permutations == 0) throw usage_error("ks permutation: need >= 1 permutation");
  const double observed = ks_two_sample(a, b).d_statistic;
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  std::mt19937_64 rng(seed);
  std::size_t hits = 0;
  std::vector<double> x;
  std::vector<double> y;
  for (std::size_t p = 0; p < permutations; ++p) {
    std::shuffle(pooled.begin(), pooled.end(), rng);
    x.assign(pooled.begin(), pooled.begin() + static_cast<std::ptrdiff_t>(a.size()));
    y.assign(pooled.begin() + static_cast<std::ptrdiff_t>(a.size()), pooled.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    if (ks_statistic_sorted(x, y) >= observed - 1e-12) ++hits;
  }
  return static_cast<double>(hits + 1) / static_cast<double>(permutations + 1);
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return values[x] < values[y]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    // Positions i..j (0-based) share ranks i+1..j+1.
    const double mean_rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = mean_rank;
    i = j + 1;
  }
  return ranks;
}

double spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw usage_error("spearman: samples differ in length");
  if (a.size() < 3) throw usage_error("spearman: need at least 3 pairs");
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  // Mean rank is exactly (n + 1) / 2 regardless of ties.
  const double mean = 0.5 * static_cast<double>(a.size() + 1);
  double sab = 0.0;
  double saa = 0.0;
  double sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    const double da = ra[i] - mean;
    const double db = rb[i] - mean;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) {
    throw numeric_error("spearman: zero rank variance");
  }
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

ClassSummary summarize(std::string group, std::span<const double> values) {
  if (values.empty()) throw usage_error("summary of empty group '" + group + "'");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  ClassSummary s;
  s.group = std::move(group);
  s.count = n;
  s.median = n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  s.std = std::sqrt(ss / static_cast<double>(n));
  return s;
}

namespace {

std::vector<double> group_values(std::span<const double> scores,
                                 std::span<const std::string> groups,
                                 const std::string& name) {
  std::vector<double> out;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (groups[i] == name) out.push_back(scores[i]);
  }
  return out;
}

}  // namespace

std::vector<ClassSummary> class_summaries(std::span<const double> scores,
                                          std::span<const std::string> groups,
                                          std::span<const std::string> order) {
  if (scores.size() != groups.size()) {
    throw usage_error("class_summaries: scores and groups differ in length");
  }
  std::vector<ClassSummary> out;
  for (const auto& name : order) {
    out.push_back(summarize(name, group_values(scores, groups, name)));
  }
  return out;
}

Histogram density(std::span<const double> scores, std::size_t bins) {
  if (bins == 0) throw usage_error("density: bins must be >= 1");
  Histogram h;
  const double width = 1.0 / static_cast<double>(bins);
  for (std::size_t k = 0; k <= bins; ++k) {
    h.edges.push_back(static_cast<double>(k) / static_cast<double>(bins));
  }
  h.counts.assign(bins, 0);
  for (double s : scores) {
    const double pos = std::floor(std::clamp(s, 0.0, 1.0) * static_cast<double>(bins));
    const auto k = std::min(static_cast<std::size_t>(pos), bins - 1);
    ++h.counts[k];
  }
  h.heights.assign(bins, 0.0);
  if (!scores.empty()) {
    const double n = static_cast<double>(scores.size());
    for (std::size_t k = 0; k < bins; ++k) {
      h.heights[k] = static_cast<double>(h.counts[k]) / (n * width);
    }
  }
  return h;
}

std::vector<KsPair> ks_matrix(std::span<const double> scores,
                              std::span<const std::string> groups,
                              std::span<const std::string> order) {
  if (scores.size() != groups.size()) {
    throw usage_error("ks_matrix: scores and groups differ in length");
  }
  std::vector<std::vector<double>> values;
  for (const auto& name : order) values.push_back(group_values(scores, groups, name));
  std::vector<KsPair> out;
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      if (values[i].empty() || values[j].empty()) continue;
      out.push_back({order[i], order[j], ks_two_sample(values[i], values[j])});
    }
  }
  return out;
}

std::vector<ClassPatterns> pattern_analysis(std::span<const NGramRecord> records,
                                            std::span<const double> scores) {
  if (records.size() != scores.size()) {
    throw usage_error("pattern_analysis: records and scores differ in length");
  }
  struct Pattern {
    const char* name;
    bool (*match)(std::string_view);
  };
  static constexpr Pattern kPatterns[] = {
      {"ends_s", [](std::string_view t) { return t.ends_with('s'); }},
      {"ends_ly", [](std::string_view t) { return t.ends_with("ly"); }},
      {"repeated_char",
       [](std::string_view t) {
         return std::adjacent_find(t.begin(), t.end()) != t.end();
       }},
  };

  std::vector<ClassPatterns> out;
  for (Label label : kAllLabels) {
    std::vector<double> lengths;
    std::vector<double> class_scores;
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (records[i].label != label) continue;
      rows.push_back(i);
      lengths.push_back(static_cast<double>(records[i].token.size()));
      class_scores.push_back(scores[i]);
    }
    if (rows.empty()) continue;

    ClassPatterns cp;
    cp.label = label;
    cp.count = rows.size();
    if (rows.size() >= 3) {
      try {
        cp.length_spearman = spearman(lengths, class_scores);
      } catch (const Error&) {
        cp.length_spearman.reset();
      }
    }
    for (const auto& pattern : kPatterns) {
      std::vector<double> hits;
      for (std::size_t i : rows) {
        if (pattern.match(records[i].token)) hits.push_back(scores[i]);
      }
      PatternSummary ps;
      ps.pattern = pattern.name;
      ps.count = hits.size();
      if (!hits.empty()) ps.scores = summarize(pattern.name, hits);
      cp.patterns.push_back(std::move(ps));
    }
    out.push_back(std::move(cp));
  }
  return out;
}

}  // namespace garble

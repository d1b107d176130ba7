// SPDX-License-Identifier: Apache-2.0
//
// Nonparametric tests and distribution summaries over axis scores.
#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "garble/types.hpp"

namespace garble {

struct KsResult {
  double d_statistic = 0.0;
  double p_value = 1.0;
  std::size_t n1 = 0;
  std::size_t n2 = 0;
};

/// Two-sample Kolmogorov-Smirnov: exact sup-distance between the ECDFs and
/// the asymptotic Kolmogorov tail probability.
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

/// Survival function of the Kolmogorov distribution, Q(lambda).
double kolmogorov_q(double lambda);

/// Permutation p-value for small samples: fraction of label shuffles whose
/// statistic reaches the observed D (with the +1 correction).
double ks_permutation_pvalue(std::span<const double> a, std::span<const double> b,
                             std::size_t permutations, std::uint64_t seed);

/// 1-based ranks, ties share their mean rank.
std::vector<double> average_ranks(std::span<const double> values);

/// Pearson correlation of average ranks.
double spearman(std::span<const double> a, std::span<const double> b);

struct ClassSummary {
  std::string group;
  double median = 0.0;
  /// Population standard deviation.
  double std = 0.0;
  std::size_t count = 0;
};

ClassSummary summarize(std::string group, std::span<const double> values);

/// One summary per group in `order`; every listed group must be non-empty.
std::vector<ClassSummary> class_summaries(std::span<const double> scores,
                                          std::span<const std::string> groups,
                                          std::span<const std::string> order);

struct Histogram {
  std::vector<double> edges;    // bins + 1 values spanning [0, 1]
  std::vector<double> heights;  // density: sum(height * width) == 1
  std::vector<std::size_t> counts;
};

/// Equal-width bins over [0, 1]; values outside are clamped into the end bins.
Histogram density(std::span<const double> scores, std::size_t bins);

struct KsPair {
  std::string first;
  std::string second;
  KsResult result;
};

/// KS test for every unordered pair of groups in `order` (in order).
std::vector<KsPair> ks_matrix(std::span<const double> scores,
                              std::span<const std::string> groups,
                              std::span<const std::string> order);

struct PatternSummary {
  std::string pattern;  // "ends_s", "ends_ly", "repeated_char"
  std::size_t count = 0;
  std::optional<ClassSummary> scores;
};

struct ClassPatterns {
  Label label = Label::extant;
  std::size_t count = 0;
  /// Spearman(token length, score); empty when undefined (fewer than 3
  /// tokens or constant length/score).
  std::optional<double> length_spearman;
  std::vector<PatternSummary> patterns;
};

std::vector<ClassPatterns> pattern_analysis(std::span<const NGramRecord> records,
                                            std::span<const double> scores);

}  // namespace garble

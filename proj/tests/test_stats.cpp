// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "garble/error.hpp"
#include "garble/stats.hpp"
#include "oracles.hpp"

using namespace garble;

namespace {

std::vector<double> draw(std::mt19937_64& rng, std::size_t n, int levels) {
  std::uniform_int_distribution<int> u(0, levels - 1);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng) * 0.25;
  return v;
}

}  // namespace

TEST_CASE("ks: identical and disjoint samples") {
  const std::vector<double> a{0.3, 0.1, 0.7, 0.7};
  const auto same = ks_two_sample(a, a);
  CHECK(same.d_statistic == 0.0);
  CHECK(same.p_value == 1.0);
  CHECK(same.n1 == 4);

  const std::vector<double> b{1.0, 2.0, 3.0};
  const auto apart = ks_two_sample(a, b);
  CHECK(apart.d_statistic == 1.0);
  CHECK(apart.p_value == kolmogorov_q(std::sqrt(12.0 / 7.0)));
  CHECK(ks_two_sample(b, a).d_statistic == 1.0);
  CHECK_THROWS_AS(ks_two_sample(a, std::vector<double>{}), Error);
  CHECK_THROWS_AS(ks_two_sample(std::vector<double>{}, a), Error);
}

TEST_CASE("ks matches the exhaustive ECDF oracle") {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<std::size_t> size(1, 50);
  for (int trial = 0; trial < 500; ++trial) {
    // Coarse levels force plenty of ties across the two samples.
    const auto a = draw(rng, size(rng), trial % 2 ? 5 : 1000);
    const auto b = draw(rng, size(rng), trial % 2 ? 5 : 1000);
    const auto r = ks_two_sample(a, b);
    CHECK(r.d_statistic == oracle::ks_exhaustive(a, b));
    CHECK(r.p_value >= 0.0);
    CHECK(r.p_value <= 1.0);
  }
}

TEST_CASE("ks D is invariant under a shared monotone transform") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> a(30);
    std::vector<double> b(40);
    for (auto& x : a) x = g(rng);
    for (auto& x : b) x = g(rng) + 0.5;
    auto ta = a;
    auto tb = b;
    for (auto& x : ta) x = std::exp(3.0 * x) + 1.0;
    for (auto& x : tb) x = std::exp(3.0 * x) + 1.0;
    CHECK(ks_two_sample(a, b).d_statistic == ks_two_sample(ta, tb).d_statistic);
  }
}

TEST_CASE("kolmogorov tail") {
  CHECK(kolmogorov_q(0.0) == 1.0);
  CHECK(kolmogorov_q(-1.0) == 1.0);
  // Reference values of the Kolmogorov distribution survival function.
  CHECK(kolmogorov_q(1.0) == doctest::Approx(0.26999967).epsilon(1e-7));
  CHECK(kolmogorov_q(1.36) == doctest::Approx(0.04943).epsilon(1e-3));
  CHECK(kolmogorov_q(0.5) == doctest::Approx(0.96394524).epsilon(1e-7));
  CHECK(kolmogorov_q(3.0) < 1e-6);
  // Continuity across the switch between the two series.
  CHECK(kolmogorov_q(1.18 - 1e-9) == doctest::Approx(kolmogorov_q(1.18 + 1e-9)).epsilon(1e-8));
  double prev = 1.0;
  for (double x = 0.05; x < 4.0; x += 0.05) {
    const double q = kolmogorov_q(x);
    CHECK(q <= prev);
    prev = q;
  }
}

TEST_CASE("permutation p-value") {
  const std::vector<double> a{0.1, 0.2, 0.3, 0.4, 0.5};
  const std::vector<double> b{1.1, 1.2, 1.3, 1.4, 1.5};
  const double p = ks_permutation_pvalue(a, b, 2000, 1);
  // Exactly 2 of the C(10,5) = 252 splits reach D = 1.
  CHECK(p == doctest::Approx(2.0 / 252).epsilon(0.6));
  CHECK(p > 0.0);
  CHECK(ks_permutation_pvalue(a, a, 200, 1) == 1.0);
  CHECK(ks_permutation_pvalue(a, b, 200, 5) == ks_permutation_pvalue(a, b, 200, 5));
}

TEST_CASE("average ranks") {
  const std::vector<double> v{3.0, 1.0, 3.0, 2.0, 3.0};
  CHECK(average_ranks(v) == std::vector<double>{4.0, 1.0, 4.0, 2.0, 4.0});
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const auto x = draw(rng, 25, 4);
    CHECK(average_ranks(x) == oracle::brute_ranks(x));
  }
}

TEST_CASE("spearman") {
  const std::vector<double> up{1, 2, 3, 4, 5};
  const std::vector<double> sq{1, 4, 9, 16, 25};
  const std::vector<double> down{9, 7, 5, 3, 1};
  CHECK(spearman(up, sq) == 1.0);
  CHECK(spearman(up, down) == -1.0);

  std::mt19937_64 rng(13);
  std::uniform_int_distribution<std::size_t> size(3, 40);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = size(rng);
    const auto a = draw(rng, n, 3);
    const auto b = draw(rng, n, 4);
    const auto ra = oracle::brute_ranks(a);
    const auto rb = oracle::brute_ranks(b);
    const bool flat = std::all_of(ra.begin(), ra.end(), [&](double r) { return r == ra[0]; }) ||
                      std::all_of(rb.begin(), rb.end(), [&](double r) { return r == rb[0]; });
    if (flat) {
      CHECK_THROWS_AS(spearman(a, b), Error);
      continue;
    }
    const double rho = spearman(a, b);
    CHECK(std::abs(rho - oracle::spearman(a, b)) < 1e-12);
    auto ta = a;
    for (auto& x : ta) x = std::pow(x + 1.0, 3.0);
    CHECK(std::abs(spearman(ta, b) - rho) < 1e-12);
  }

  CHECK_THROWS_AS(spearman(std::vector<double>{1, 2}, std::vector<double>{1, 2}), Error);
  CHECK_THROWS_AS(spearman(up, std::vector<double>{1, 2, 3}), Error);
  CHECK_THROWS_AS(spearman(up, std::vector<double>(5, 2.0)), Error);
}

TEST_CASE("summaries") {
  const std::vector<double> pair{0.0, 1.0};
  const auto s = summarize("g", pair);
  CHECK(s.median == 0.5);
  CHECK(s.std == 0.5);
  CHECK(s.count == 2);
  const std::vector<double> single{0.3};
  CHECK(summarize("x", single).std == 0.0);
  CHECK(summarize("x", single).median == 0.3);
  const std::vector<double> odd{5.0, 1.0, 3.0};
  CHECK(summarize("x", odd).median == 3.0);
  CHECK_THROWS_AS(summarize("x", std::vector<double>{}), Error);

  std::mt19937_64 rng(3);
  std::vector<double> v(101);
  std::uniform_real_distribution<double> u;
  for (auto& x : v) x = u(rng);
  const auto base = summarize("p", v);
  for (int i = 0; i < 10; ++i) {
    std::shuffle(v.begin(), v.end(), rng);
    const auto again = summarize("p", v);
    CHECK(again.median == base.median);
    CHECK(again.std == base.std);
  }
}

TEST_CASE("class_summaries") {
  const std::vector<double> scores{0.1, 0.9, 0.5, 0.7};
  const std::vector<std::string> groups{"garble", "extant", "garble", "extant"};
  const std::vector<std::string> order{"extant", "garble"};
  const auto out = class_summaries(scores, groups, order);
  REQUIRE(out.size() == 2);
  CHECK(out[0].group == "extant");
  CHECK(out[0].median == doctest::Approx(0.8));
  CHECK(out[1].median == doctest::Approx(0.3));
  const std::vector<std::string> missing{"extant", "pseudoword"};
  CHECK_THROWS_AS(class_summaries(scores, groups, missing), Error);
  CHECK_THROWS_AS(class_summaries(std::span(scores).first(3), groups, order), Error);
}

TEST_CASE("density") {
  const std::vector<double> halves(7, 0.5);
  const auto h = density(halves, 10);
  CHECK(h.edges.size() == 11);
  CHECK(h.edges.front() == 0.0);
  CHECK(h.edges.back() == 1.0);
  CHECK(std::count_if(h.counts.begin(), h.counts.end(), [](auto c) { return c > 0; }) == 1);
  CHECK(h.counts[5] == 7);

  std::vector<double> grid;
  for (int i = 0; i < 100; ++i) grid.push_back((i + 0.5) / 100.0);
  const auto flat = density(grid, 10);
  for (double v : flat.heights) CHECK(v == doctest::Approx(1.0));

  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u;
  for (std::size_t bins : {1u, 3u, 20u, 64u}) {
    std::vector<double> x(333);
    for (auto& v : x) v = u(rng);
    x.push_back(0.0);
    x.push_back(1.0);
    const auto r = density(x, bins);
    double mass = 0.0;
    for (std::size_t b = 0; b < bins; ++b) mass += r.heights[b] * (r.edges[b + 1] - r.edges[b]);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
    std::size_t total = 0;
    for (auto c : r.counts) total += c;
    CHECK(total == x.size());
  }
  CHECK_THROWS_AS(density(grid, 0), Error);
}

TEST_CASE("ks_matrix covers each unordered pair once") {
  const std::vector<double> scores{0.1, 0.9, 0.5, 0.7, 0.2, 0.95};
  const std::vector<std::string> groups{"garble", "extant", "pseudoword",
                                        "extant", "garble", "pseudoword"};
  const std::vector<std::string> order{"extant", "pseudoword", "garble"};
  const auto m = ks_matrix(scores, groups, order);
  REQUIRE(m.size() == 3);
  CHECK(m[0].first == "extant");
  CHECK(m[0].second == "pseudoword");
  CHECK(m[1].second == "garble");
  CHECK(m[2].first == "pseudoword");
  CHECK(m[1].result.d_statistic == 1.0);
}

TEST_CASE("pattern_analysis") {
  std::vector<NGramRecord> recs;
  std::vector<double> scores;
  for (const char* t : {"ab", "abcd", "abc", "zzzzz", "abcdefs", "qwertyuio"}) {
    recs.push_back({t, Label::garble, {}, {}});
    scores.push_back(1.0 / static_cast<double>(std::string(t).size()));
  }
  recs.push_back({"cats", Label::extant, {}, {}});
  scores.push_back(0.9);
  const auto out = pattern_analysis(recs, scores);
  const auto garble = std::find_if(out.begin(), out.end(),
                                   [](const auto& c) { return c.label == Label::garble; });
  REQUIRE(garble != out.end());
  CHECK(garble->count == 6);
  REQUIRE(garble->length_spearman);
  CHECK(*garble->length_spearman == doctest::Approx(-1.0).epsilon(1e-15));
  for (const auto& p : garble->patterns) {
    if (p.pattern == "ends_ly") {
      CHECK(p.count == 0);
      CHECK_FALSE(p.scores);
    }
    if (p.pattern == "ends_s") CHECK(p.count == 1);
    if (p.pattern == "repeated_char") CHECK(p.count == 1);
  }
  const auto extant = std::find_if(out.begin(), out.end(),
                                   [](const auto& c) { return c.label == Label::extant; });
  REQUIRE(extant != out.end());
  CHECK_FALSE(extant->length_spearman);
  CHECK_THROWS_AS(pattern_analysis(recs, std::span(scores).first(2)), Error);
}

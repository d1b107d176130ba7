// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <set>

#include "doctest.h"
#include "garble/corpus.hpp"
#include "garble/error.hpp"
#include "test_util.hpp"

using namespace garble;
using garble::testing::TempDir;

namespace {

Lexicon small_lexicon(const TempDir& dir) {
  const auto path = dir / "lex.csv";
  garble::testing::spit(path,
                        "word,pos,concreteness\ncat,Noun,5.0\nrun,Verb,3.0\nvery,Adverb,1.0\n");
  return load_lexicon(path);
}

Lexicon fixture_lexicon() {
  static const Lexicon lex =
      load_lexicon(garble::testing::data_path("lexicon_fixture.csv"), 40000);
  return lex;
}

}  // namespace

TEST_CASE("load_lexicon normalizes concreteness to the loaded range") {
  TempDir dir;
  const auto lex = small_lexicon(dir);
  REQUIRE(lex.size() == 3);
  CHECK(lex.records()[0].token == "cat");
  CHECK(lex.records()[0].concreteness == 1.0);
  CHECK(lex.records()[1].concreteness == 0.5);
  CHECK(lex.records()[2].concreteness == 0.0);
  CHECK(lex.records()[0].pos == Pos::noun);
  CHECK(lex.records()[1].pos == Pos::verb);
  CHECK(lex.records()[2].pos == Pos::adverb);
  CHECK(lex.contains("run"));
  CHECK_FALSE(lex.contains("walk"));
}

TEST_CASE("load_lexicon honours the row limit") {
  TempDir dir;
  garble::testing::spit(dir / "lex.csv",
                        "word,pos,concreteness\ncat,Noun,5.0\nrun,Verb,3.0\nvery,Adverb,1.0\n");
  const auto lex = load_lexicon(dir / "lex.csv", 2);
  REQUIRE(lex.size() == 2);
  CHECK(lex.records()[1].token == "run");
  // Renormalized over the two loaded rows.
  CHECK(lex.records()[1].concreteness == 0.0);
}

TEST_CASE("load_lexicon filters, lowercases and reports skips") {
  TempDir dir;
  garble::testing::spit(dir / "lex.csv",
                        "word,pos,concreteness\nDog,Noun,4\ndon't,Verb,2\nx2,Noun,1\n"
                        "dog,Noun,3\nslowly,Adverb,1.5\ntable,Article,4.5\n");
  const auto lex = load_lexicon(dir / "lex.csv");
  REQUIRE(lex.size() == 3);
  CHECK(lex.records()[0].token == "dog");
  CHECK(lex.records()[2].pos == Pos::other);
  CHECK(lex.skipped_rows == 3);
}

TEST_CASE("load_lexicon error paths") {
  TempDir dir;
  CHECK_THROWS_AS(load_lexicon(dir / "missing.csv"), Error);
  garble::testing::spit(dir / "bad_header.csv", "word,concreteness\ncat,5\n");
  CHECK_THROWS_WITH_AS(load_lexicon(dir / "bad_header.csv"),
                       doctest::Contains("header mismatch"), Error);
  garble::testing::spit(dir / "none.csv", "word,pos,concreteness\n1st,Noun,5\n");
  CHECK_THROWS_WITH_AS(load_lexicon(dir / "none.csv"), doctest::Contains("no valid rows"),
                       Error);
  garble::testing::spit(dir / "short.csv", "word,pos,concreteness\ncat,Noun\n");
  CHECK_THROWS_WITH_AS(load_lexicon(dir / "short.csv"), doctest::Contains(":2"), Error);
}

TEST_CASE("fixture lexicon row count matches an independent recount") {
  // Recounted with a standalone script applying [a-z]+ and first-occurrence
  // de-duplication to tests/data/lexicon_fixture.csv.
  const auto lex = fixture_lexicon();
  CHECK(lex.size() == 40000);
  CHECK(lex.skipped_rows == 1496);
  const auto [lo, hi] = std::minmax_element(
      lex.records().begin(), lex.records().end(),
      [](const auto& a, const auto& b) { return *a.concreteness < *b.concreteness; });
  CHECK(*lo->concreteness == 0.0);
  CHECK(*hi->concreteness == 1.0);
}

TEST_CASE("write_lexicon round-trips") {
  TempDir dir;
  const auto lex = fixture_lexicon();
  write_lexicon(lex, dir / "copy.csv");
  const auto back = load_lexicon(dir / "copy.csv");
  CHECK(back.records() == lex.records());
}

TEST_CASE("length_histogram") {
  TempDir dir;
  const auto lex = small_lexicon(dir);
  const auto h = length_histogram(lex);
  CHECK(h.counts == std::map<std::size_t, std::uint64_t>{{3, 2}, {4, 1}});

  const std::vector<NGramRecord> one{{"a", Label::extant, {}, {}}};
  CHECK(length_histogram(one).counts == std::map<std::size_t, std::uint64_t>{{1, 1}});

  // Independent recount of the fixture lengths.
  const std::map<std::size_t, std::uint64_t> expected{
      {1, 26},    {2, 565},   {3, 2327},  {4, 3351},  {5, 4731}, {6, 6009},
      {7, 6212},  {8, 5396},  {9, 4371},  {10, 3090}, {11, 1850}, {12, 1107},
      {13, 563},  {14, 244},  {15, 107},  {16, 33},   {17, 15},  {18, 3}};
  const auto full = length_histogram(fixture_lexicon());
  CHECK(full.counts == expected);
  CHECK(full.total() == fixture_lexicon().size());
}

TEST_CASE("generate_garble basics") {
  LengthDistribution three;
  three.counts[3] = 1;
  CHECK(generate_garble(three, 0, 1).empty());
  const auto five = generate_garble(three, 5, 1);
  REQUIRE(five.size() == 5);
  for (const auto& r : five) {
    CHECK(r.token.size() == 3);
    CHECK(is_alpha_token(r.token));
    CHECK(r.label == Label::garble);
  }
  CHECK_THROWS_AS(generate_garble(LengthDistribution{}, 1, 1), Error);
  CHECK(generate_garble(LengthDistribution{}, 0, 1).empty());
}

TEST_CASE("generate_garble is deterministic per seed") {
  const auto dist = length_histogram(fixture_lexicon());
  const auto a = generate_garble(dist, 2000, 42);
  const auto b = generate_garble(dist, 2000, 42);
  const auto c = generate_garble(dist, 2000, 43);
  CHECK(a == b);
  CHECK_FALSE(a == c);
}

TEST_CASE("garble length histogram converges (TV < 5/sqrt(N))") {
  const auto dist = length_histogram(fixture_lexicon());
  for (std::size_t n : {1000u, 10000u, 40000u}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto garble = generate_garble(dist, n, seed);
      const auto emp = length_histogram(garble);
      double tv = 0.0;
      for (std::size_t len = 1; len <= 40; ++len) {
        tv += std::abs(emp.probability(len) - dist.probability(len));
      }
      tv *= 0.5;
      CHECK(tv < 5.0 / std::sqrt(static_cast<double>(n)));
    }
  }
}

TEST_CASE("garble options: unique and exclude") {
  const auto lex = fixture_lexicon();
  const auto dist = length_histogram(lex);
  GarbleOptions opts;
  opts.unique = true;
  opts.exclude = &lex;
  const auto garble = generate_garble(dist, 5000, 3, opts);
  std::set<std::string> tokens;
  for (const auto& r : garble) tokens.insert(r.token);
  CHECK(tokens.size() == garble.size());
  CHECK(mark_collisions(garble, lex).count == 0);

  LengthDistribution one;
  one.counts[1] = 1;
  GarbleOptions uniq;
  uniq.unique = true;
  uniq.max_attempts_per_token = 500;
  CHECK_THROWS_AS(generate_garble(one, 27, 1, uniq), Error);
}

TEST_CASE("generate_pseudowords small cases") {
  const Lexicon lex({{"ab", Label::extant, {}, {}}});
  CHECK(generate_pseudowords(lex, 1, 0, 1).empty());
  PseudowordOptions opts;
  opts.max_rejections = 200;
  CHECK_THROWS_WITH_AS(generate_pseudowords(lex, 1, 1, 1, opts),
                       doctest::Contains("rejection cap"), Error);
  CHECK_THROWS_AS(generate_pseudowords(lex, 0, 1, 1), Error);
}

TEST_CASE("pseudowords are novel and phonotactically covered") {
  const auto lex = fixture_lexicon();
  const auto pseudo = generate_pseudowords(lex, 3, 20000, 7);
  REQUIRE(pseudo.size() == 20000);

  std::set<std::string> bigrams;
  for (const auto& r : lex.records()) {
    for (std::size_t i = 0; i + 1 < r.token.size(); ++i) bigrams.insert(r.token.substr(i, 2));
  }
  std::set<std::string> lexicon_tokens;
  for (const auto& r : lex.records()) lexicon_tokens.insert(r.token);

  std::size_t members = 0;
  std::size_t uncovered = 0;
  for (const auto& r : pseudo) {
    CHECK(r.label == Label::pseudoword);
    members += lexicon_tokens.count(r.token);
    for (std::size_t i = 0; i + 1 < r.token.size(); ++i) {
      uncovered += bigrams.count(r.token.substr(i, 2)) ? 0 : 1;
    }
  }
  CHECK(members == 0);
  CHECK(uncovered == 0);
  CHECK(generate_pseudowords(lex, 3, 500, 7) ==
        std::vector<NGramRecord>(pseudo.begin(), pseudo.begin() + 500));
}

TEST_CASE("mark_collisions") {
  TempDir dir;
  const auto lex = small_lexicon(dir);
  const std::vector<NGramRecord> garble{{"cat", Label::garble, {}, {}},
                                        {"qzx", Label::garble, {}, {}}};
  const auto report = mark_collisions(garble, lex);
  CHECK(report.count == 1);
  CHECK(report.collides == std::vector<bool>{true, false});
  CHECK(mark_collisions(std::vector<NGramRecord>{}, lex).count == 0);
}

TEST_CASE("garble collisions equal a set intersection") {
  const auto lex = fixture_lexicon();
  GarbleOptions opts;
  opts.unique = true;
  const auto garble = generate_garble(length_histogram(lex), 40000, 11, opts);

  std::vector<std::string> a;
  std::vector<std::string> b;
  for (const auto& r : garble) a.push_back(r.token);
  for (const auto& r : lex.records()) b.push_back(r.token);
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::vector<std::string> both;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(both));

  const auto count = mark_collisions(garble, lex).count;
  CHECK(count == both.size());
  CHECK(count > 0);
}

TEST_CASE("token files") {
  TempDir dir;
  const std::vector<NGramRecord> recs{{"abc", Label::garble, {}, {}},
                                      {"flought", Label::pseudoword, {}, {}}};
  const std::vector<std::string> header{"made by a test"};
  write_token_file(dir / "t.tsv", recs, header);
  CHECK(garble::testing::slurp(dir / "t.tsv") ==
        "# made by a test\nabc\tgarble\nflought\tpseudoword\n");
  CHECK(read_token_file(dir / "t.tsv") == recs);

  garble::testing::spit(dir / "bad.tsv", "abc\tgarble\nab1\tgarble\n");
  CHECK_THROWS_WITH_AS(read_token_file(dir / "bad.tsv"), doctest::Contains(":2"), Error);
}

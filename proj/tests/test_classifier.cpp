// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "doctest.h"
#include "garble/classifier.hpp"
#include "garble/corpus.hpp"
#include "garble/error.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace garble;

namespace {

EmbeddingSet from_points(const std::vector<std::vector<double>>& x,
                         const std::vector<Label>& labels) {
  EmbeddingSet set(x[0].size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::string token;
    for (std::size_t v = i;; v /= 26) {
      token += static_cast<char>('a' + v % 26);
      if (v < 26) break;
    }
    set.add({token, labels[i], {}, {}}, x[i]);
  }
  return set;
}

EmbeddingSet two_gaussians(std::size_t per_class, std::size_t dim, double distance,
                           std::uint64_t seed) {
  std::vector<double> plus(dim, 0.0);
  std::vector<double> minus(dim, 0.0);
  plus[0] = distance / 2.0;
  minus[0] = -distance / 2.0;
  const std::vector<ClassSpec> specs{{Label::extant, per_class, plus, 1.0},
                                     {Label::garble, per_class, minus, 1.0}};
  return synth_embeddings(specs, dim, seed);
}

double accuracy(const LinearModel& model, const EmbeddingSet& set) {
  const auto preds = predict(model, set);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < set.size(); ++i) hits += preds[i].predicted == set.record(i).label;
  return static_cast<double>(hits) / static_cast<double>(set.size());
}

}  // namespace

TEST_CASE("split_half sizes") {
  const auto four = two_gaussians(4, 2, 3.0, 1);
  const auto [train, test] = split_half(four, 1);
  CHECK(train.indices_of(Label::extant).size() == 2);
  CHECK(train.indices_of(Label::garble).size() == 2);
  CHECK(test.indices_of(Label::extant).size() == 2);

  std::vector<ClassSpec> odd{{Label::extant, 5, {0.0, 0.0}, 1.0},
                             {Label::garble, 2, {1.0, 0.0}, 1.0}};
  const auto [tr, te] = split_half(synth_embeddings(odd, 2, 2), 3);
  CHECK(tr.indices_of(Label::extant).size() == 2);
  CHECK(te.indices_of(Label::extant).size() == 3);

  std::vector<ClassSpec> lonely{{Label::extant, 5, {0.0, 0.0}, 1.0},
                                {Label::garble, 1, {1.0, 0.0}, 1.0}};
  CHECK_THROWS_AS(split_half(synth_embeddings(lonely, 2, 2), 3), Error);
}

TEST_CASE("split_half of 40k + 40k is a disjoint cover") {
  const auto set = two_gaussians(40000, 2, 3.0, 5);
  const auto [train, test] = split_half(set, 11);
  CHECK(train.size() == 40000);
  CHECK(test.size() == 40000);
  std::multiset<std::pair<std::string, Label>> all;
  std::set<std::pair<std::string, Label>> train_keys;
  for (const auto& r : train.records()) {
    all.emplace(r.token, r.label);
    train_keys.emplace(r.token, r.label);
  }
  std::size_t overlap = 0;
  for (const auto& r : test.records()) {
    all.emplace(r.token, r.label);
    overlap += train_keys.count({r.token, r.label});
  }
  CHECK(overlap == 0);
  std::multiset<std::pair<std::string, Label>> original;
  for (const auto& r : set.records()) original.emplace(r.token, r.label);
  CHECK(all == original);

  const auto again = split_half(set, 11);
  CHECK(again.first == train);
}

TEST_CASE("train_svm: a separable pair in one dimension") {
  const auto set = from_points({{1.0}, {-1.0}}, {Label::extant, Label::garble});
  const auto model = train_svm(set, 0.1, 50, 1);
  CHECK(model.weights[0] > 0.0);
  CHECK(accuracy(model, set) == 1.0);
}

TEST_CASE("train_svm preconditions") {
  const auto one = from_points({{1.0}, {2.0}}, {Label::extant, Label::extant});
  CHECK_THROWS_AS(train_svm(one), Error);
  const auto pseudo_only = from_points({{1.0}, {2.0}, {3.0}},
                                       {Label::extant, Label::pseudoword, Label::pseudoword});
  CHECK_THROWS_AS(train_svm(pseudo_only), Error);
  const auto ok = from_points({{1.0}, {-1.0}}, {Label::extant, Label::garble});
  CHECK_THROWS_AS(train_svm(ok, 0.0), Error);
  CHECK_THROWS_AS(train_svm(ok, -1.0), Error);
}

TEST_CASE("train_svm is deterministic and ignores pseudowords") {
  auto set = two_gaussians(200, 5, 4.0, 3);
  const auto a = train_svm(set, 1e-3, 10, 9);
  const auto b = train_svm(set, 1e-3, 10, 9);
  CHECK(a.weights == b.weights);
  CHECK(a.bias == b.bias);

  std::vector<ClassSpec> extra{{Label::pseudoword, 50, std::vector<double>(5, 9.0), 1.0}};
  const auto pseudo = synth_embeddings(extra, 5, 4);
  for (std::size_t i = 0; i < pseudo.size(); ++i) set.add(pseudo.record(i), pseudo.row(i));
  const auto c = train_svm(set, 1e-3, 10, 9);
  CHECK(c.weights == a.weights);
}

TEST_CASE("train_svm approaches the QP optimum on small instances") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g;
  for (double lambda : {0.1, 0.01, 1e-3}) {
    for (double sep : {4.0, 1.0}) {
      std::vector<std::vector<double>> x;
      std::vector<double> y;
      std::vector<Label> labels;
      for (int i = 0; i < 20; ++i) {
        const double s = i % 2 ? 1.0 : -1.0;
        x.push_back({s * sep / 2 + g(rng), g(rng), g(rng)});
        y.push_back(s);
        labels.push_back(s > 0 ? Label::extant : Label::garble);
      }
      const auto set = from_points(x, labels);
      const double best = oracle::svm_optimum(x, y, lambda);
      // The subgradient method converges like 1/(lambda T); hold lambda T fixed.
      const auto epochs = static_cast<std::size_t>(20.0 / lambda);
      const auto model = train_svm(set, lambda, epochs, 1);
      const double got = svm_objective(model, set);
      CAPTURE(lambda);
      CAPTURE(sep);
      CHECK(got >= best - 1e-9);
      CHECK(got <= 1.05 * best);
    }
  }
}

TEST_CASE("training accuracy on separable data reaches 1 with default budget") {
  const auto set = two_gaussians(500, 16, 20.0, 2);
  CHECK(accuracy(train_svm(set), set) == 1.0);
}

TEST_CASE("held-out accuracy at 6 sigma") {
  const auto set = two_gaussians(2000, 32, 6.0, 12);
  const auto [train, test] = split_half(set, 1);
  CHECK(accuracy(train_svm(train), test) >= 0.99);
}

TEST_CASE("predict: ties, scaling and dimension") {
  LinearModel m;
  m.weights = {1.0, -1.0};
  m.bias = 0.0;
  const auto set = from_points({{2.0, 2.0}, {1.0, 3.0}, {3.0, 1.0}},
                               {Label::extant, Label::garble, Label::extant});
  const auto p = predict(m, set);
  CHECK(p[0].margin == 0.0);
  CHECK(p[0].predicted == Label::extant);
  CHECK(p[1].predicted == Label::garble);
  CHECK(p[2].predicted == Label::extant);

  LinearModel big = m;
  big.bias = 0.25;
  LinearModel scaled = big;
  for (auto& w : scaled.weights) w *= 37.5;
  scaled.bias *= 37.5;
  const auto pa = predict(big, set);
  const auto pb = predict(scaled, set);
  for (std::size_t i = 0; i < set.size(); ++i) {
    CHECK(pa[i].predicted == pb[i].predicted);
    CHECK(pb[i].margin == doctest::Approx(37.5 * pa[i].margin));
  }

  LinearModel wrong;
  wrong.weights = {1.0};
  CHECK_THROWS_AS(predict(wrong, set), Error);
}

TEST_CASE("error_report trivial cases") {
  const std::vector<NGramRecord> recs{{"cat", Label::extant, {}, {}},
                                      {"jgs", Label::garble, {}, {}},
                                      {"blick", Label::pseudoword, {}, {}}};
  const std::vector<Prediction> right{
      {Label::extant, 1.0}, {Label::garble, -1.0}, {Label::garble, -0.5}};
  const auto clean = error_report(recs, right, nullptr);
  CHECK(clean.accuracy == 1.0);
  CHECK(clean.evaluated == 2);
  CHECK(clean.misclassified.empty());
  CHECK(clean.buckets.ends_in_s == 0);
  CHECK(clean.buckets.other == 0);
  CHECK(clean.pseudo_as_garble == 1);
  CHECK(clean.pseudo_as_extant == 0);

  const std::vector<Prediction> one_wrong{
      {Label::extant, 1.0}, {Label::extant, 0.3}, {Label::extant, 0.5}};
  const auto r = error_report(recs, one_wrong, nullptr);
  CHECK(r.accuracy == 0.5);
  REQUIRE(r.misclassified.size() == 1);
  CHECK(r.misclassified[0].token == "jgs");
  CHECK(r.buckets.ends_in_s == 1);
  CHECK(r.buckets.short_token == 1);
  CHECK(r.buckets.ends_in_ly == 0);
  CHECK(r.buckets.repeated_char_run == 0);
  CHECK(r.buckets.long_token == 0);
  CHECK(r.buckets.lexicon_collision == 0);
  CHECK(r.buckets.other == 0);
  CHECK(r.pseudo_as_extant == 1);
}

TEST_CASE("error_report buckets and ordering") {
  const std::vector<NGramRecord> recs{{"quickly", Label::extant, {}, {}},
                                      {"bookkeeperish", Label::extant, {}, {}},
                                      {"zqxv", Label::garble, {}, {}},
                                      {"mnbvcx", Label::garble, {}, {}}};
  const std::vector<Prediction> preds{{Label::garble, -0.1},
                                      {Label::garble, -2.0},
                                      {Label::extant, 0.7},
                                      {Label::extant, 0.0}};
  const auto r = error_report(recs, preds, nullptr);
  REQUIRE(r.misclassified.size() == 4);
  CHECK(r.misclassified[0].token == "bookkeeperish");
  CHECK(r.misclassified[1].token == "zqxv");
  CHECK(r.misclassified[2].token == "quickly");
  CHECK(r.misclassified[3].token == "mnbvcx");
  CHECK(r.buckets.ends_in_ly == 1);
  CHECK(r.buckets.repeated_char_run == 1);
  CHECK(r.buckets.long_token == 1);
  CHECK(r.buckets.short_token == 1);
  CHECK(r.buckets.other == 1);
  CHECK(r.accuracy == 0.0);
  CHECK(has_repeated_char("aab"));
  CHECK_FALSE(has_repeated_char("abab"));
  CHECK_THROWS_AS(error_report(recs, std::span(preds).first(2), nullptr), Error);
}

TEST_CASE("lexicon collisions among misclassified garble match a set intersection") {
  const auto lex = load_lexicon(garble::testing::data_path("lexicon_fixture.csv"), 40000);
  auto garble = generate_garble(length_histogram(lex), 20000, 4, {.unique = true});
  std::vector<Prediction> preds;
  std::mt19937_64 rng(1);
  std::bernoulli_distribution wrong(0.3);
  std::set<std::string> misclassified;
  for (const auto& r : garble) {
    const bool w = wrong(rng);
    preds.push_back({w ? Label::extant : Label::garble, w ? 0.5 : -0.5});
    if (w) misclassified.insert(r.token);
  }
  std::size_t expected = 0;
  for (const auto& t : misclassified) expected += lex.contains(t) ? 1 : 0;
  const auto report = error_report(garble, preds, &lex);
  CHECK(report.buckets.lexicon_collision == expected);
  CHECK(expected > 0);
  CHECK(error_report(garble, preds, nullptr).buckets.lexicon_collision == 0);
}

TEST_CASE("model and prediction files") {
  garble::testing::TempDir dir;
  LinearModel m;
  m.weights = {0.1, -2.5, 3e-9};
  m.bias = -0.75;
  m.lambda = 1e-3;
  write_svm(m, dir / "m.svm");
  CHECK(garble::testing::slurp(dir / "m.svm") ==
        "#svm v1 dim=3 lambda=0.001\n-0.75\n0.1\n-2.5\n3e-09\n");
  const auto back = read_svm(dir / "m.svm");
  CHECK(back.weights == m.weights);
  CHECK(back.bias == m.bias);
  CHECK(back.lambda == m.lambda);
  garble::testing::spit(dir / "bad.svm", "#svm v1 dim=3 lambda=0.001\n-0.75\n0.1\n");
  CHECK_THROWS_AS(read_svm(dir / "bad.svm"), Error);

  const std::vector<NGramRecord> recs{{"cat", Label::extant, {}, {}}};
  const std::vector<Prediction> preds{{Label::garble, -0.5}};
  write_predictions(dir / "p.tsv", recs, preds);
  CHECK(garble::testing::slurp(dir / "p.tsv") == "cat\textant\tgarble\t-0.5\n");
}

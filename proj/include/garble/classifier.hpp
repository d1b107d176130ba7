// SPDX-License-Identifier: Apache-2.0
//
// Linear max-margin separation of extant and garble embeddings in the full
// embedding space, trained by stochastic subgradient descent.
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "garble/corpus.hpp"
#include "garble/embedding_store.hpp"

namespace garble {

struct LinearModel {
  std::vector<double> weights;
  double bias = 0.0;
  double lambda = 1e-4;
  std::size_t epochs = 20;

  double decision(std::span<const double> x) const;
};

/// Stratified half split: for each label present, floor(n/2) rows (chosen
/// uniformly without replacement) go to train and the rest to test. Row order
/// is preserved inside both halves.
std::pair<EmbeddingSet, EmbeddingSet> split_half(const EmbeddingSet& set,
                                                 std::uint64_t seed);

/// Minimizes lambda/2 (|w|^2 + b^2) + mean hinge loss over the extant (+1) and
/// garble (-1) rows; pseudoword rows are ignored. Steps are 1/(lambda t) with
/// the iterate projected onto the ball of radius 1/sqrt(lambda), and the
/// returned model averages the iterates of the final epoch.
LinearModel train_svm(const EmbeddingSet& train, double lambda = 1e-4,
                      std::size_t epochs = 20, std::uint64_t seed = 0);

/// The regularized hinge objective minimized by train_svm.
double svm_objective(const LinearModel& model, const EmbeddingSet& set);

struct Prediction {
  Label predicted = Label::extant;
  double margin = 0.0;
};

/// sign(w.x + b): non-negative -> extant, negative -> garble.
std::vector<Prediction> predict(const LinearModel& model, const EmbeddingSet& set);

struct MisclassifiedToken {
  std::string token;
  Label truth = Label::extant;
  Label predicted = Label::extant;
  double margin = 0.0;
};

struct ErrorBuckets {
  std::size_t ends_in_s = 0;
  std::size_t ends_in_ly = 0;
  /// Garble-labelled tokens that are lexicon members.
  std::size_t lexicon_collision = 0;
  std::size_t repeated_char_run = 0;
  std::size_t short_token = 0;  // length <= 4
  std::size_t long_token = 0;   // length >= 12
  std::size_t other = 0;
};

struct ErrorReport {
  double accuracy = 0.0;
  std::size_t evaluated = 0;
  /// Sorted by decreasing |margin| (most confident mistakes first).
  std::vector<MisclassifiedToken> misclassified;
  ErrorBuckets buckets;
  std::size_t pseudo_as_extant = 0;
  std::size_t pseudo_as_garble = 0;
};

/// Accuracy covers extant and garble records only; pseudoword predictions are
/// tallied separately. `lexicon` may be null (no collision bucket).
ErrorReport error_report(std::span<const NGramRecord> records,
                         std::span<const Prediction> predictions,
                         const Lexicon* lexicon);

bool has_repeated_char(std::string_view token);

void write_svm(const LinearModel& model, const std::filesystem::path& path);
LinearModel read_svm(const std::filesystem::path& path);

void write_predictions(const std::filesystem::path& path,
                       std::span<const NGramRecord> records,
                       std::span<const Prediction> predictions,
                       std::span<const std::string> header_comments = {});

}  // namespace garble

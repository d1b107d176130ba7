// SPDX-License-Identifier: Apache-2.0
//
// Low-dimensional maps of an EmbeddingSet: exact t-distributed stochastic
// neighbor embedding and a PCA baseline (also used as the SNE initializer).
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "garble/embedding_store.hpp"

namespace garble {

enum class ProjectionMethod { sne, pca };

struct ProjectionConfig {
  ProjectionMethod method = ProjectionMethod::sne;
  std::size_t out_dims = 2;
  double perplexity = 10.0;
  std::size_t iterations = 1000;
  std::size_t exaggeration_iters = 250;
  double exaggeration_factor = 12.0;
  double learning_rate = 200.0;
  double momentum_early = 0.5;
  double momentum_late = 0.8;
  std::uint64_t seed = 0;
  /// Exact SNE is quadratic in memory and time, so inputs are capped per class.
  std::optional<std::size_t> max_per_class = 3000;
};

/// Throws a usage error if the config cannot be run on `n_points` points.
void validate(const ProjectionConfig& config, std::size_t n_points);

struct Projection2D {
  std::vector<NGramRecord> records;
  std::size_t out_dims = 2;
  /// Row-major, records.size() x out_dims.
  std::vector<double> coords;
  /// Final KL divergence for SNE; retained variance fraction for PCA.
  double final_objective = 0.0;
  /// SNE only: KL(P||Q) against the unexaggerated P once exaggeration ends.
  std::optional<double> kl_after_exaggeration;
  /// SNE only: (iteration, KL) checkpoints every 50 iterations and at the end.
  std::vector<std::pair<std::size_t, double>> objective_trace;

  std::size_t size() const { return records.size(); }
  std::span<const double> point(std::size_t i) const {
    return {coords.data() + i * out_dims, out_dims};
  }
};

struct AffinityOptions {
  double tolerance_bits = 1e-5;
  std::size_t max_steps = 50;
};

struct Affinities {
  std::size_t n = 0;
  /// Symmetric joint probabilities, row-major n x n, zero diagonal, sum 1.
  std::vector<double> joint;
  /// Per-point Gaussian precision (1 / 2 sigma^2) found by the search.
  std::vector<double> beta;
  /// Entropy in bits of each conditional distribution p(.|i).
  std::vector<double> row_entropy_bits;
  /// Rows whose search hit max_steps without reaching the tolerance.
  std::size_t nonconverged = 0;

  double at(std::size_t i, std::size_t j) const { return joint[i * n + j]; }
};

/// `data` is row-major n x d. Distances are squared Euclidean.
Affinities pairwise_affinities(std::span<const double> data, std::size_t n,
                               std::size_t d, double perplexity,
                               const AffinityOptions& options = {});

/// KL(P || Q) for a low-dimensional layout under the Student-t kernel.
double sne_kl_divergence(const Affinities& p, std::span<const double> layout,
                         std::size_t out_dims);

Projection2D sne_project(const EmbeddingSet& set, const ProjectionConfig& config);

struct PcaResult {
  /// Row-major n x k scores.
  std::vector<double> scores;
  /// Row-major k x d principal directions.
  std::vector<double> components;
  std::vector<double> explained_variance;
  std::vector<double> explained_variance_ratio;
};

/// Mean-centred projection onto the top-k principal directions; each
/// direction's first non-negligible loading is made positive. Throws a
/// numeric error naming the rank when fewer than k directions carry variance.
PcaResult pca(std::span<const double> data, std::size_t n, std::size_t d,
              std::size_t k);

Projection2D pca_project(const EmbeddingSet& set, std::size_t out_dims);

/// Uniform sample without replacement of at most `max_per_class` rows per
/// label, returned in original row order.
EmbeddingSet subsample(const EmbeddingSet& set, std::size_t max_per_class,
                       std::uint64_t seed);

/// Dispatches on config.method after subsampling.
Projection2D project(const EmbeddingSet& set, const ProjectionConfig& config);

std::string describe(const ProjectionConfig& config);

/// `token<TAB>label<TAB>x<TAB>y[<TAB>score]` with `#` header comments.
void write_projection(const std::filesystem::path& path,
                      const Projection2D& projection,
                      std::span<const std::string> header_comments = {},
                      std::span<const double> scores = {});

struct ProjectionFile {
  Projection2D projection;
  std::vector<double> scores;  // empty when the file has no score column
};

ProjectionFile read_projection(const std::filesystem::path& path);

}  // namespace garble

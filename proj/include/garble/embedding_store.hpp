// SPDX-License-Identifier: Apache-2.0
//
// Token-aligned embedding matrices and the `#garble-emb v1` text format.
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "garble/types.hpp"

namespace garble {

/// Row-major matrix of `dim`-dimensional vectors, one per record.
class EmbeddingSet {
 public:
  EmbeddingSet() = default;
  explicit EmbeddingSet(std::size_t dim);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  const std::vector<NGramRecord>& records() const { return records_; }
  const NGramRecord& record(std::size_t i) const { return records_[i]; }
  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * dim_, dim_};
  }
  const std::vector<double>& values() const { return values_; }

  /// Validates length, finiteness and (token, label) uniqueness.
  void add(NGramRecord record, std::span<const double> vector);

  /// Indices of records carrying `label`, in row order.
  std::vector<std::size_t> indices_of(Label label) const;
  /// New set holding the given rows in the given order.
  EmbeddingSet select(std::span<const std::size_t> rows) const;

  /// Free-form `#` lines kept between the format header and the data.
  std::vector<std::string> comments;

  friend bool operator==(const EmbeddingSet& a, const EmbeddingSet& b) {
    return a.dim_ == b.dim_ && a.records_ == b.records_ &&
           a.values_ == b.values_ && a.comments == b.comments;
  }

 private:
  std::size_t dim_ = 0;
  std::vector<NGramRecord> records_;
  std::vector<double> values_;
  std::unordered_set<std::string> keys_;
};

EmbeddingSet read_embeddings(const std::filesystem::path& path);
void write_embeddings(const EmbeddingSet& set, const std::filesystem::path& path);

struct ClassSpec {
  Label label = Label::extant;
  std::size_t count = 0;
  std::vector<double> centroid;
  /// Per-coordinate standard deviation of the isotropic Gaussian.
  double spread = 0.0;
};

/// Gaussian clouds around per-class centroids with random unique [a-z]+
/// tokens. Deterministic for a given seed.
EmbeddingSet synth_embeddings(std::span<const ClassSpec> specs, std::size_t dim,
                              std::uint64_t seed);

}  // namespace garble

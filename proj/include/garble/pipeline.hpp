// SPDX-License-Identifier: Apache-2.0
//
// End-to-end stages behind the command-line tool. Every stage writes into
// config.out_dir and stamps each file with the tool version, config hash and
// seeds.
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "garble/classifier.hpp"
#include "garble/corpus.hpp"
#include "garble/embedding_store.hpp"
#include "garble/ppm.hpp"
#include "garble/projection.hpp"
#include "garble/stats.hpp"

namespace garble {

inline constexpr std::string_view kToolVersion = "0.1.0";

struct Seeds {
  std::uint64_t garble = 1;
  std::uint64_t pseudo = 2;
  std::uint64_t projection = 3;
  std::uint64_t split = 4;
  std::uint64_t svm = 5;
  std::uint64_t bootstrap = 6;
};

struct PipelineConfig {
  std::filesystem::path lexicon;
  std::optional<std::size_t> lexicon_limit = 40000;
  std::size_t extant_count = 40000;
  std::size_t garble_count = 40000;
  std::size_t pseudo_count = 20000;
  std::size_t pseudo_order = 3;
  bool garble_unique = true;
  bool garble_exclude_extant = false;
  bool pseudo_unique = true;

  std::size_t ppm_order = 3;
  bool ppm_exclusion = true;
  bool ppm_per_char = false;

  ProjectionConfig projection;

  double svm_lambda = 1e-4;
  std::size_t svm_epochs = 20;

  std::size_t bootstrap_resamples = 1000;
  std::size_t density_bins = 20;

  Seeds seeds;
  std::filesystem::path out_dir = "out";
};

/// Names accepted by apply_setting, in canonical order.
std::vector<std::string> config_keys();

/// Sets one `key=value` parameter; throws a usage error on unknown keys or
/// malformed values.
void apply_setting(PipelineConfig& config, const std::string& key,
                   const std::string& value);

/// Reads `key=value` lines (blank lines and `#` comments ignored).
void apply_config_file(PipelineConfig& config, const std::filesystem::path& path);

/// Canonical `key=value` listing of every parameter except output location.
std::string canonical_config(const PipelineConfig& config);

/// Identifies one run: parameters plus the contents of the listed inputs.
std::string config_hash(const PipelineConfig& config,
                        std::span<const std::filesystem::path> inputs = {});

std::string seeds_string(const Seeds& seeds);

/// Comment lines placed at the top of every output file.
std::vector<std::string> header_lines(const PipelineConfig& config,
                                      const std::string& hash);

struct GenerateResult {
  std::size_t extant = 0;
  std::size_t garble = 0;
  std::size_t pseudowords = 0;
  std::size_t garble_collisions = 0;
};

/// Writes extant.tsv, garble.tsv, pseudowords.tsv, tokens.tsv (all three) and
/// manifest.json.
GenerateResult cmd_generate(const PipelineConfig& config);

/// Trains the PPM model on the lexicon (or loads `model_path`), scores every
/// token in `tokens_path` and writes scores.tsv plus ppm.model.
std::vector<InfoScore> cmd_score(const PipelineConfig& config,
                                 const std::filesystem::path& tokens_path,
                                 const std::optional<std::filesystem::path>& model_path = {});

/// Writes projection.tsv.
Projection2D cmd_project(const PipelineConfig& config,
                         const std::filesystem::path& embeddings_path);

/// Splits extant/garble in half, trains on one half and predicts the other
/// half plus every pseudoword. Writes svm.model, predictions.tsv and
/// classifier_report.json.
ErrorReport cmd_classify(const PipelineConfig& config,
                         const std::filesystem::path& embeddings_path);

struct AnalyzeResult {
  std::vector<ClassSummary> class_table;
  std::vector<KsPair> class_ks;
  std::vector<KsPair> pos_ks;
  std::optional<double> angle_mean;
  ErrorReport classifier;
};

/// Full report bundle: projection.tsv (with axis score), axis.json,
/// class_table.tsv, ks.jsonl, density.tsv, angle.json (when concreteness is
/// available), patterns.jsonl, axis_vs_surprisal.tsv, markov.json, the classify outputs
/// and manifest.json. `corpus_dir` (a generate output) is checked against the
/// embedding file when given.
AnalyzeResult cmd_analyze(const PipelineConfig& config,
                          const std::filesystem::path& embeddings_path,
                          const std::optional<std::filesystem::path>& corpus_dir = {});

/// Attaches POS and concreteness from the lexicon to extant records.
void join_lexicon(std::vector<NGramRecord>& records, const Lexicon& lexicon);

struct StatSummaries {
  std::vector<ClassSummary> class_table;
  std::vector<KsPair> class_ks;
  std::vector<KsPair> pos_ks;
};

/// Writes class_table.tsv, ks.jsonl and density.tsv from per-record axis scores.
/// cmd_analyze uses this and it can be re-run on a bundle's projection.tsv.
StatSummaries write_stat_summaries(const std::filesystem::path& out_dir,
                                   std::span<const NGramRecord> records,
                                   std::span<const double> scores,
                                   std::size_t bins,
                                   std::span<const std::string> header);

}  // namespace garble

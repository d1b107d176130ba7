// SPDX-License-Identifier: Apache-2.0
#include "garble/projection.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "garble/error.hpp"
#include "garble/text_io.hpp"

namespace garble {

void validate(const ProjectionConfig& config, std::size_t n_points) {
  if (config.out_dims < 1) throw usage_error("out_dims must be >= 1");
  if (config.max_per_class && *config.max_per_class == 0) {
    throw usage_error("max_per_class must be >= 1");
  }
  if (config.method == ProjectionMethod::pca) return;
  if (n_points < 3) throw usage_error("SNE needs at least 3 points");
  if (!(config.perplexity >= 2.0) ||
      !(config.perplexity < static_cast<double>(n_points))) {
    throw usage_error("perplexity must satisfy 2 <= perplexity < N (N=" +
                      std::to_string(n_points) + ")");
  }
  if (config.exaggeration_iters > config.iterations) {
    throw usage_error("exaggeration_iters exceeds iterations");
  }
  if (!(config.learning_rate > 0.0)) throw usage_error("learning_rate must be > 0");
}

namespace {

std::vector<double> squared_distances(std::span<const double> data,
                                      std::size_t n, std::size_t d) {
  std::vector<double> dist(n * n, 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    const double* xi = data.data() + i * d;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double* xj = data.data() + j * d;
      double s = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        const double diff = xi[k] - xj[k];
        s += diff * diff;
      }
      dist[i * n + j] = s;
      dist[j * n + i] = s;
    }
  }
  return dist;
}

// Fills row[j] with exp(-beta * (dist[j] - shift)) for j != self and returns
// the entropy of the normalized row in bits.
double conditional_row(std::span<const double> dist, std::size_t self,
                       double beta, double shift, std::span<double> row) {
  double sum = 0.0;
  double weighted = 0.0;
  for (std::size_t j = 0; j < dist.size(); ++j) {
    if (j == self) {
      row[j] = 0.0;
      continue;
    }
    const double shifted = dist[j] - shift;
    row[j] = std::exp(-beta * shifted);
    sum += row[j];
    weighted += shifted * row[j];
  }
  for (auto& v : row) v /= sum;
  return (std::log(sum) + beta * weighted / sum) / std::log(2.0);
}

}  // namespace

Affinities pairwise_affinities(std::span<const double> data, std::size_t n,
                               std::size_t d, double perplexity,
                               const AffinityOptions& options) {
  if (n < 3) throw usage_error("affinities need at least 3 points");
  if (data.size() != n * d) throw usage_error("data size does not match n x d");
  if (!(perplexity > 0.0) || !(perplexity < static_cast<double>(n))) {
    throw usage_error("perplexity must satisfy 0 < perplexity < N");
  }
  const double target = std::log2(perplexity);
  const auto dist = squared_distances(data, n, d);

  Affinities out;
  out.n = n;
  out.beta.assign(n, 1.0);
  out.row_entropy_bits.assign(n, 0.0);
  std::vector<double> conditional(n * n, 0.0);
  std::size_t nonconverged = 0;

#pragma omp parallel for schedule(static) reduction(+ : nonconverged)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    const std::span<const double> drow(dist.data() + i * n, n);
    const std::span<double> prow(conditional.data() + i * n, n);

    double shift = std::numeric_limits<double>::infinity();
    double mean = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      shift = std::min(shift, drow[j]);
      mean += drow[j];
    }
    mean = mean / static_cast<double>(n - 1) - shift;

    double beta = mean > 0.0 ? 1.0 / mean : 1.0;
    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();
    double entropy = conditional_row(drow, i, beta, shift, prow);
    bool converged = std::abs(entropy - target) < options.tolerance_bits;
    for (std::size_t step = 0; step < options.max_steps && !converged; ++step) {
      if (entropy > target) {
        lo = beta;
        beta = std::isinf(hi) ? beta * 2.0 : 0.5 * (beta + hi);
      } else {
        hi = beta;
        beta = 0.5 * (beta + lo);
      }
      entropy = conditional_row(drow, i, beta, shift, prow);
      converged = std::abs(entropy - target) < options.tolerance_bits;
    }
    if (!converged) ++nonconverged;
    out.beta[i] = beta;
    out.row_entropy_bits[i] = entropy;
  }
  out.nonconverged = nonconverged;

  out.joint.assign(n * n, 0.0);
  const double norm = 2.0 * static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = (conditional[i * n + j] + conditional[j * n + i]) / norm;
      out.joint[i * n + j] = v;
      out.joint[j * n + i] = v;
    }
  }
  return out;
}

namespace {

// Student-t kernel values 1 / (1 + |yi - yj|^2), diagonal zero, plus their
// total (summed row by row in index order).
double student_kernel(std::span<const double> y, std::size_t n, std::size_t k,
                      std::vector<double>& kernel) {
  std::vector<double> row_sums(n, 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) {
        kernel[i * n + j] = 0.0;
        continue;
      }
      double d2 = 0.0;
      for (std::size_t c = 0; c < k; ++c) {
        const double diff = y[i * k + c] - y[j * k + c];
        d2 += diff * diff;
      }
      kernel[i * n + j] = 1.0 / (1.0 + d2);
      s += kernel[i * n + j];
    }
    row_sums[i] = s;
  }
  double z = 0.0;
  for (double s : row_sums) z += s;
  return z;
}

double kl_from_kernel(const Affinities& p, const std::vector<double>& kernel,
                      double z) {
  const std::size_t n = p.n;
  std::vector<double> row_kl(n, 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double pij = p.joint[i * n + j];
      if (pij <= 0.0) continue;
      const double qij = std::max(kernel[i * n + j] / z,
                                  std::numeric_limits<double>::min());
      s += pij * std::log(pij / qij);
    }
    row_kl[i] = s;
  }
  double kl = 0.0;
  for (double s : row_kl) kl += s;
  return kl;
}

}  // namespace

double sne_kl_divergence(const Affinities& p, std::span<const double> layout,
                         std::size_t out_dims) {
  if (layout.size() != p.n * out_dims) {
    throw usage_error("layout size does not match affinity matrix");
  }
  std::vector<double> kernel(p.n * p.n);
  const double z = student_kernel(layout, p.n, out_dims, kernel);
  return kl_from_kernel(p, kernel, z);
}

PcaResult pca(std::span<const double> data, std::size_t n, std::size_t d,
              std::size_t k) {
  if (data.size() != n * d) throw usage_error("data size does not match n x d");
  if (k < 1 || k > d) throw usage_error("pca: need 1 <= out_dims <= dim");
  if (n < k) throw usage_error("pca: fewer points than output dimensions");

  using RowMajor =
      Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Eigen::Map<const RowMajor> x(data.data(), static_cast<Eigen::Index>(n),
                                     static_cast<Eigen::Index>(d));
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const Eigen::MatrixXd centered = x.rowwise() - mean;
  const double denom = n > 1 ? static_cast<double>(n - 1) : 1.0;
  const Eigen::MatrixXd cov = (centered.transpose() * centered) / denom;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) {
    throw numeric_error("pca: eigendecomposition failed");
  }
  // Eigen sorts ascending.
  const Eigen::VectorXd values = solver.eigenvalues().reverse();
  const Eigen::MatrixXd vectors = solver.eigenvectors().rowwise().reverse();
  const double total = std::max(values.sum(), 0.0);
  const double tol = std::max(values(0), 0.0) * 1e-12 * static_cast<double>(d);

  std::size_t rank = 0;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (values(i) > tol && values(i) > 0.0) ++rank;
  }
  if (rank < k) {
    throw numeric_error("pca: degenerate covariance, rank " +
                        std::to_string(rank) + " < out_dims " +
                        std::to_string(k));
  }

  PcaResult out;
  out.components.resize(k * d);
  for (std::size_t c = 0; c < k; ++c) {
    Eigen::VectorXd v = vectors.col(static_cast<Eigen::Index>(c));
    const double big = v.cwiseAbs().maxCoeff();
    for (Eigen::Index j = 0; j < v.size(); ++j) {
      if (std::abs(v(j)) > 1e-8 * big) {
        if (v(j) < 0.0) v = -v;
        break;
      }
    }
    for (std::size_t j = 0; j < d; ++j) {
      out.components[c * d + j] = v(static_cast<Eigen::Index>(j));
    }
    out.explained_variance.push_back(values(static_cast<Eigen::Index>(c)));
    out.explained_variance_ratio.push_back(
        total > 0.0 ? values(static_cast<Eigen::Index>(c)) / total : 0.0);
  }
  const Eigen::Map<const RowMajor> comps(out.components.data(),
                                         static_cast<Eigen::Index>(k),
                                         static_cast<Eigen::Index>(d));
  const RowMajor scores = centered * comps.transpose();
  out.scores.assign(scores.data(), scores.data() + scores.size());
  return out;
}

Projection2D pca_project(const EmbeddingSet& set, std::size_t out_dims) {
  const auto result = pca(set.values(), set.size(), set.dim(), out_dims);
  Projection2D proj;
  proj.records = set.records();
  proj.out_dims = out_dims;
  proj.coords = result.scores;
  proj.final_objective =
      std::accumulate(result.explained_variance_ratio.begin(),
                      result.explained_variance_ratio.end(), 0.0);
  return proj;
}

Projection2D sne_project(const EmbeddingSet& set, const ProjectionConfig& config) {
  const std::size_t n = set.size();
  const std::size_t k = config.out_dims;
  validate(config, n);

  Affinities p = pairwise_affinities(set.values(), n, set.dim(), config.perplexity);

  // PCA initialization rescaled so the first coordinate has std 1e-4.
  std::vector<double> y = pca(set.values(), n, set.dim(), k).scores;
  {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += y[i * k];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) var += (y[i * k] - mean) * (y[i * k] - mean);
    const double sd = std::sqrt(var / static_cast<double>(n));
    const double scale = sd > 0.0 ? 1e-4 / sd : 1.0;
    for (auto& v : y) v *= scale;
  }

  std::vector<double> update(n * k, 0.0);
  std::vector<double> gains(n * k, 1.0);
  std::vector<double> grad(n * k, 0.0);
  std::vector<double> kernel(n * n, 0.0);

  Projection2D proj;
  proj.records = set.records();
  proj.out_dims = k;

  for (std::size_t it = 0; it < config.iterations; ++it) {
    const bool early = it < config.exaggeration_iters;
    const double exaggeration = early ? config.exaggeration_factor : 1.0;
    const double momentum = early ? config.momentum_early : config.momentum_late;

    const double z = student_kernel(y, n, k, kernel);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
      const auto i = static_cast<std::size_t>(ii);
      for (std::size_t c = 0; c < k; ++c) grad[i * k + c] = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const double w = kernel[i * n + j];
        const double mult = (exaggeration * p.joint[i * n + j] - w / z) * w;
        for (std::size_t c = 0; c < k; ++c) {
          grad[i * k + c] += mult * (y[i * k + c] - y[j * k + c]);
        }
      }
      for (std::size_t c = 0; c < k; ++c) grad[i * k + c] *= 4.0;
    }

    for (std::size_t idx = 0; idx < n * k; ++idx) {
      const bool opposing = update[idx] * grad[idx] < 0.0;
      gains[idx] = opposing ? gains[idx] + 0.2 : gains[idx] * 0.8;
      gains[idx] = std::max(gains[idx], 0.01);
      update[idx] = momentum * update[idx] - config.learning_rate * gains[idx] * grad[idx];
      y[idx] += update[idx];
    }
    for (std::size_t c = 0; c < k; ++c) {
      double mean = 0.0;
      for (std::size_t i = 0; i < n; ++i) mean += y[i * k + c];
      mean /= static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i) y[i * k + c] -= mean;
    }
    for (double v : y) {
      if (!std::isfinite(v)) {
        throw numeric_error("SNE diverged (non-finite coordinate) at iteration " +
                            std::to_string(it));
      }
    }

    const bool checkpoint = (it + 1) % 50 == 0 || it + 1 == config.iterations;
    const bool end_of_early = it + 1 == config.exaggeration_iters;
    if (checkpoint || end_of_early) {
      const double kl = sne_kl_divergence(p, y, k);
      if (checkpoint) proj.objective_trace.emplace_back(it + 1, kl);
      if (end_of_early) proj.kl_after_exaggeration = kl;
    }
  }

  proj.coords = std::move(y);
  proj.final_objective = proj.objective_trace.empty()
                             ? sne_kl_divergence(p, proj.coords, k)
                             : proj.objective_trace.back().second;
  return proj;
}

EmbeddingSet subsample(const EmbeddingSet& set, std::size_t max_per_class,
                       std::uint64_t seed) {
  if (max_per_class == 0) throw usage_error("max_per_class must be >= 1");
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> keep;
  for (Label label : kAllLabels) {
    auto rows = set.indices_of(label);
    if (rows.size() > max_per_class) {
      std::shuffle(rows.begin(), rows.end(), rng);
      rows.resize(max_per_class);
    }
    keep.insert(keep.end(), rows.begin(), rows.end());
  }
  std::sort(keep.begin(), keep.end());
  return set.select(keep);
}

Projection2D project(const EmbeddingSet& set, const ProjectionConfig& config) {
  validate(config, std::max<std::size_t>(set.size(), 3));
  const EmbeddingSet input =
      config.max_per_class ? subsample(set, *config.max_per_class, config.seed) : set;
  if (config.method == ProjectionMethod::pca) {
    return pca_project(input, config.out_dims);
  }
  return sne_project(input, config);
}

std::string describe(const ProjectionConfig& config) {
  std::ostringstream out;
  out << "method=" << (config.method == ProjectionMethod::sne ? "sne" : "pca")
      << " out_dims=" << config.out_dims
      << " perplexity=" << format_double(config.perplexity)
      << " iterations=" << config.iterations
      << " exaggeration_iters=" << config.exaggeration_iters
      << " exaggeration_factor=" << format_double(config.exaggeration_factor)
      << " learning_rate=" << format_double(config.learning_rate)
      << " momentum=" << format_double(config.momentum_early) << '/'
      << format_double(config.momentum_late) << " seed=" << config.seed
      << " max_per_class="
      << (config.max_per_class ? std::to_string(*config.max_per_class) : "none");
  return out.str();
}

void write_projection(const std::filesystem::path& path,
                      const Projection2D& projection,
                      std::span<const std::string> header_comments,
                      std::span<const double> scores) {
  if (!scores.empty() && scores.size() != projection.size()) {
    throw usage_error("score column length does not match projection");
  }
  std::ostringstream out;
  for (const auto& line : header_comments) out << "# " << line << '\n';
  out << "#fields\ttoken\tlabel";
  static constexpr const char* kAxisNames[] = {"x", "y", "z"};
  for (std::size_t c = 0; c < projection.out_dims; ++c) {
    out << '\t' << (c < 3 ? kAxisNames[c] : "c" + std::to_string(c + 1));
  }
  if (!scores.empty()) out << "\tscore";
  out << '\n';
  for (std::size_t i = 0; i < projection.size(); ++i) {
    const auto& rec = projection.records[i];
    out << rec.token << '\t' << to_string(rec.label);
    for (double v : projection.point(i)) out << '\t' << format_double(v);
    if (!scores.empty()) out << '\t' << format_double(scores[i]);
    out << '\n';
  }
  write_text(path, out.str());
}

ProjectionFile read_projection(const std::filesystem::path& path) {
  ProjectionFile file;
  auto& proj = file.projection;
  bool has_score = false;
  bool have_fields = false;
  const auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string_view line = lines[i];
    if (line.empty()) continue;
    if (line.starts_with("#fields\t")) {
      const auto names = split(line, '\t');
      has_score = names.back() == "score";
      proj.out_dims = names.size() - 3 - (has_score ? 1 : 0);
      have_fields = true;
      continue;
    }
    if (line.front() == '#') continue;
    const std::string where = path.string() + ":" + std::to_string(i + 1);
    if (!have_fields) throw data_error("projection data before #fields at " + where);
    const auto fields = split(line, '\t');
    if (fields.size() != 2 + proj.out_dims + (has_score ? 1 : 0)) {
      throw data_error("wrong column count at " + where);
    }
    proj.records.push_back(
        NGramRecord{std::string(fields[0]), parse_label(fields[1]), {}, {}});
    for (std::size_t c = 0; c < proj.out_dims; ++c) {
      proj.coords.push_back(parse_double(fields[2 + c], where));
    }
    if (has_score) file.scores.push_back(parse_double(fields.back(), where));
  }
  return file;
}

}  // namespace garble

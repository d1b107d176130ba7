// SPDX-License-Identifier: Apache-2.0
#include "garble/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "garble/error.hpp"
#include "garble/text_io.hpp"

namespace garble {

double LinearModel::decision(std::span<const double> x) const {
  if (x.size() != weights.size()) {
    throw data_error("dimension mismatch: model has " +
                     std::to_string(weights.size()) + " weights, input has " +
                     std::to_string(x.size()));
  }
  double s = bias;
  for (std::size_t j = 0; j < x.size(); ++j) s += weights[j] * x[j];
  return s;
}

std::pair<EmbeddingSet, EmbeddingSet> split_half(const EmbeddingSet& set,
                                                 std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;
  for (Label label : kAllLabels) {
    auto rows = set.indices_of(label);
    if (rows.empty()) continue;
    if (rows.size() < 2) {
      throw data_error("split_half: class " + std::string(to_string(label)) +
                       " has fewer than 2 records");
    }
    std::shuffle(rows.begin(), rows.end(), rng);
    const std::size_t half = rows.size() / 2;
    train_rows.insert(train_rows.end(), rows.begin(), rows.begin() + half);
    test_rows.insert(test_rows.end(), rows.begin() + half, rows.end());
  }
  std::sort(train_rows.begin(), train_rows.end());
  std::sort(test_rows.begin(), test_rows.end());
  return {set.select(train_rows), set.select(test_rows)};
}

namespace {

struct BinaryRows {
  std::vector<std::size_t> rows;
  std::vector<double> y;
};

BinaryRows binary_rows(const EmbeddingSet& set) {
  BinaryRows out;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const Label l = set.record(i).label;
    if (l == Label::pseudoword) continue;
    out.rows.push_back(i);
    out.y.push_back(l == Label::extant ? 1.0 : -1.0);
  }
  return out;
}

}  // namespace

LinearModel train_svm(const EmbeddingSet& train, double lambda,
                      std::size_t epochs, std::uint64_t seed) {
  if (!(lambda > 0.0)) throw usage_error("svm lambda must be > 0");
  if (epochs == 0) throw usage_error("svm epochs must be >= 1");
  const auto data = binary_rows(train);
  const bool has_pos = std::find(data.y.begin(), data.y.end(), 1.0) != data.y.end();
  const bool has_neg = std::find(data.y.begin(), data.y.end(), -1.0) != data.y.end();
  if (!has_pos || !has_neg) {
    throw data_error("svm training needs both extant and garble records");
  }

  const std::size_t d = train.dim();
  // Bias is carried as weight d against a constant feature of 1.
  std::vector<double> w(d + 1, 0.0);
  std::vector<double> avg(d + 1, 0.0);
  std::vector<std::size_t> order(data.rows.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  const double radius = 1.0 / std::sqrt(lambda);

  std::size_t t = 0;
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    const bool last = epoch + 1 == epochs;
    for (std::size_t idx : order) {
      ++t;
      const auto x = train.row(data.rows[idx]);
      const double y = data.y[idx];
      double margin = w[d];
      for (std::size_t j = 0; j < d; ++j) margin += w[j] * x[j];
      margin *= y;

      const double eta = 1.0 / (lambda * static_cast<double>(t));
      const double shrink = 1.0 - eta * lambda;
      for (auto& v : w) v *= shrink;
      if (margin < 1.0) {
        for (std::size_t j = 0; j < d; ++j) w[j] += eta * y * x[j];
        w[d] += eta * y;
      }
      double norm2 = 0.0;
      for (double v : w) norm2 += v * v;
      if (norm2 > radius * radius) {
        const double s = radius / std::sqrt(norm2);
        for (auto& v : w) v *= s;
      }
      if (last) {
        for (std::size_t j = 0; j <= d; ++j) avg[j] += w[j];
      }
    }
  }

  const double n_last = static_cast<double>(order.size());
  LinearModel model;
  model.lambda = lambda;
  model.epochs = epochs;
  model.weights.assign(d, 0.0);
  for (std::size_t j = 0; j < d; ++j) model.weights[j] = avg[j] / n_last;
  model.bias = avg[d] / n_last;
  for (double v : model.weights) {
    if (!std::isfinite(v)) throw numeric_error("svm weights are not finite");
  }
  return model;
}

double svm_objective(const LinearModel& model, const EmbeddingSet& set) {
  const auto data = binary_rows(set);
  if (data.rows.empty()) throw usage_error("svm_objective: no labelled rows");
  double hinge = 0.0;
  for (std::size_t k = 0; k < data.rows.size(); ++k) {
    hinge += std::max(0.0, 1.0 - data.y[k] * model.decision(set.row(data.rows[k])));
  }
  double norm2 = model.bias * model.bias;
  for (double v : model.weights) norm2 += v * v;
  return 0.5 * model.lambda * norm2 + hinge / static_cast<double>(data.rows.size());
}

std::vector<Prediction> predict(const LinearModel& model, const EmbeddingSet& set) {
  if (set.dim() != model.weights.size() && !set.empty()) {
    throw data_error("dimension mismatch: model dim " +
                     std::to_string(model.weights.size()) + ", embeddings dim " +
                     std::to_string(set.dim()));
  }
  std::vector<Prediction> out;
  out.reserve(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    const double m = model.decision(set.row(i));
    out.push_back({m >= 0.0 ? Label::extant : Label::garble, m});
  }
  return out;
}

bool has_repeated_char(std::string_view token) {
  return std::adjacent_find(token.begin(), token.end()) != token.end();
}

ErrorReport error_report(std::span<const NGramRecord> records,
                         std::span<const Prediction> predictions,
                         const Lexicon* lexicon) {
  if (records.size() != predictions.size()) {
    throw usage_error("error_report: records and predictions differ in length");
  }
  ErrorReport report;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& rec = records[i];
    const auto& pred = predictions[i];
    if (rec.label == Label::pseudoword) {
      ++(pred.predicted == Label::extant ? report.pseudo_as_extant
                                         : report.pseudo_as_garble);
      continue;
    }
    ++report.evaluated;
    if (pred.predicted == rec.label) {
      ++correct;
      continue;
    }
    report.misclassified.push_back({rec.token, rec.label, pred.predicted, pred.margin});

    auto& b = report.buckets;
    const std::string_view t = rec.token;
    bool any = false;
    auto mark = [&any](std::size_t& counter, bool hit) {
      if (hit) {
        ++counter;
        any = true;
      }
    };
    mark(b.ends_in_s, t.ends_with('s'));
    mark(b.ends_in_ly, t.ends_with("ly"));
    mark(b.lexicon_collision,
         lexicon && rec.label == Label::garble && lexicon->contains(t));
    mark(b.repeated_char_run, has_repeated_char(t));
    mark(b.short_token, t.size() <= 4);
    mark(b.long_token, t.size() >= 12);
    if (!any) ++b.other;
  }
  report.accuracy = report.evaluated
                        ? static_cast<double>(correct) / static_cast<double>(report.evaluated)
                        : 0.0;
  std::stable_sort(report.misclassified.begin(), report.misclassified.end(),
                   [](const MisclassifiedToken& a, const MisclassifiedToken& b) {
                     return std::abs(a.margin) > std::abs(b.margin);
                   });
  return report;
}

void write_svm(const LinearModel& model, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "#svm v1 dim=" << model.weights.size()
      << " lambda=" << format_double(model.lambda) << '\n'
      << format_double(model.bias) << '\n';
  for (double v : model.weights) out << format_double(v) << '\n';
  write_text(path, out.str());
}

LinearModel read_svm(const std::filesystem::path& path) {
  const auto lines = read_lines(path);
  constexpr std::string_view prefix = "#svm v1 dim=";
  if (lines.empty() || !std::string_view(lines[0]).starts_with(prefix)) {
    throw data_error("bad svm header in " + path.string());
  }
  const std::string_view header = lines[0];
  const auto space = header.find(" lambda=");
  if (space == std::string_view::npos) throw data_error("svm header lacks lambda");
  const auto dim = parse_int(header.substr(prefix.size(), space - prefix.size()),
                             "svm header");
  LinearModel model;
  model.lambda = parse_double(header.substr(space + 8), "svm header");
  std::vector<double> numbers;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    numbers.push_back(parse_double(lines[i], path.string() + ":" + std::to_string(i + 1)));
  }
  if (dim < 0 || numbers.size() != static_cast<std::size_t>(dim) + 1) {
    throw data_error("svm file " + path.string() + " has wrong weight count");
  }
  model.bias = numbers[0];
  model.weights.assign(numbers.begin() + 1, numbers.end());
  return model;
}

void write_predictions(const std::filesystem::path& path,
                       std::span<const NGramRecord> records,
                       std::span<const Prediction> predictions,
                       std::span<const std::string> header_comments) {
  std::ostringstream out;
  for (const auto& line : header_comments) out << "# " << line << '\n';
  for (std::size_t i = 0; i < records.size(); ++i) {
    out << records[i].token << '\t' << to_string(records[i].label) << '\t'
        << to_string(predictions[i].predicted) << '\t'
        << format_double(predictions[i].margin) << '\n';
  }
  write_text(path, out.str());
}

}  // namespace garble

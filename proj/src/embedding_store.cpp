// SPDX-License-Identifier: Apache-2.0
#include "garble/embedding_store.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <set>

#include "garble/error.hpp"
#include "garble/text_io.hpp"

namespace garble {

namespace {

constexpr std::string_view kHeaderPrefix = "#garble-emb v1 dim=";

std::string record_key(const NGramRecord& rec) {
  return rec.token + '\t' + std::string(to_string(rec.label));
}

}  // namespace

EmbeddingSet::EmbeddingSet(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw usage_error("embedding dimension must be positive");
}

void EmbeddingSet::add(NGramRecord record, std::span<const double> vector) {
  if (vector.size() != dim_) {
    throw data_error("dimension mismatch: expected " + std::to_string(dim_) +
                     " values, got " + std::to_string(vector.size()));
  }
  for (std::size_t j = 0; j < vector.size(); ++j) {
    if (!std::isfinite(vector[j])) {
      throw data_error("non-finite value in component " + std::to_string(j + 1));
    }
  }
  if (!is_alpha_token(record.token)) {
    throw data_error("token '" + record.token + "' is not [a-z]+");
  }
  if (!keys_.insert(record_key(record)).second) {
    throw data_error("duplicate (token, label) pair '" + record.token + "', " +
                     std::string(to_string(record.label)));
  }
  records_.push_back(std::move(record));
  values_.insert(values_.end(), vector.begin(), vector.end());
}

std::vector<std::size_t> EmbeddingSet::indices_of(Label label) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < records_.size(); ++i) {
    if (records_[i].label == label) out.push_back(i);
  }
  return out;
}

EmbeddingSet EmbeddingSet::select(std::span<const std::size_t> rows) const {
  EmbeddingSet out(dim_);
  out.comments = comments;
  for (std::size_t i : rows) out.add(records_.at(i), row(i));
  return out;
}

EmbeddingSet read_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open embedding file " + path.string());

  std::string line;
  if (!std::getline(in, line) || !std::string_view(line).starts_with(kHeaderPrefix)) {
    throw data_error("bad embedding header in " + path.string() +
                     " (expected '#garble-emb v1 dim=<D>')");
  }
  const auto dim = parse_int(std::string_view(line).substr(kHeaderPrefix.size()),
                             "embedding header");
  if (dim <= 0) throw data_error("embedding dim must be positive");

  EmbeddingSet set(static_cast<std::size_t>(dim));
  std::vector<double> values(set.dim());
  std::size_t lineno = 1;
  bool in_data = false;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    if (line.empty()) continue;
    if (line.front() == '#') {
      if (in_data) throw data_error("comment after data at " + where);
      set.comments.push_back(line.substr(1));
      continue;
    }
    in_data = true;
    const auto fields = split(line, '\t');
    if (fields.size() != 3) {
      throw data_error("expected token<TAB>label<TAB>values at " + where);
    }
    NGramRecord rec{std::string(fields[0]), Label::extant, {}, {}};
    try {
      rec.label = parse_label(fields[1]);
    } catch (const Error& e) {
      throw data_error(std::string(e.what()) + " at " + where);
    }

    std::size_t n = 0;
    const char* p = fields[2].data();
    const char* end = p + fields[2].size();
    while (p <= end) {
      const char* comma = std::find(p, end, ',');
      if (n == values.size()) {
        throw data_error("dimension mismatch at " + where + ": more than " +
                         std::to_string(dim) + " values");
      }
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(p, comma, v);
      if (ec != std::errc{} || ptr != comma) {
        throw data_error("invalid number in component " + std::to_string(n + 1) +
                         " at " + where);
      }
      if (!std::isfinite(v)) {
        throw data_error("non-finite value in component " +
                         std::to_string(n + 1) + " at " + where);
      }
      values[n++] = v;
      p = comma + 1;
    }
    if (n != values.size()) {
      throw data_error("dimension mismatch at " + where + ": expected " +
                       std::to_string(dim) + " values, got " + std::to_string(n));
    }
    try {
      set.add(std::move(rec), values);
    } catch (const Error& e) {
      throw data_error(std::string(e.what()) + " at " + where);
    }
  }
  return set;
}

void write_embeddings(const EmbeddingSet& set, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw data_error("cannot write " + path.string());
  out << kHeaderPrefix << set.dim() << '\n';
  for (const auto& c : set.comments) out << '#' << c << '\n';
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto& rec = set.record(i);
    out << rec.token << '\t' << to_string(rec.label) << '\t';
    const auto row = set.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out << ',';
      out << format_double(row[j]);
    }
    out << '\n';
  }
  if (!out) throw data_error("write failed for " + path.string());
}

EmbeddingSet synth_embeddings(std::span<const ClassSpec> specs, std::size_t dim,
                              std::uint64_t seed) {
  if (dim < 2) throw usage_error("synthetic embeddings need dim >= 2");
  std::set<Label> labels;
  for (const auto& spec : specs) {
    if (!labels.insert(spec.label).second) {
      throw usage_error("duplicate label in class specs: " +
                        std::string(to_string(spec.label)));
    }
    if (spec.centroid.size() != dim) {
      throw usage_error("centroid dimension does not match dim");
    }
    if (!(spec.spread >= 0.0)) throw usage_error("spread must be >= 0");
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<int> pick_len(3, 10);
  std::uniform_int_distribution<int> pick_char(0, 25);

  EmbeddingSet set(dim);
  std::vector<double> v(dim);
  for (const auto& spec : specs) {
    std::unordered_set<std::string> used;
    for (std::size_t i = 0; i < spec.count; ++i) {
      std::string token;
      do {
        token.resize(static_cast<std::size_t>(pick_len(rng)));
        for (auto& c : token) c = static_cast<char>('a' + pick_char(rng));
      } while (!used.insert(token).second);
      for (std::size_t j = 0; j < dim; ++j) {
        v[j] = spec.centroid[j] + spec.spread * gauss(rng);
      }
      set.add(NGramRecord{std::move(token), spec.label, {}, {}}, v);
    }
  }
  return set;
}

}  // namespace garble

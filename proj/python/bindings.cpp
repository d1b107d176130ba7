// SPDX-License-Identifier: Apache-2.0
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "garble/axes.hpp"
#include "garble/classifier.hpp"
#include "garble/corpus.hpp"
#include "garble/embedding_store.hpp"
#include "garble/error.hpp"
#include "garble/pipeline.hpp"
#include "garble/ppm.hpp"
#include "garble/projection.hpp"
#include "garble/stats.hpp"

namespace py = pybind11;
using namespace garble;

namespace {

py::array_t<double> as_matrix(const std::vector<double>& data, std::size_t rows,
                              std::size_t cols) {
  py::array_t<double> out({rows, cols});
  std::copy(data.begin(), data.end(), out.mutable_data());
  return out;
}

LengthDistribution to_dist(const std::map<std::size_t, std::uint64_t>& counts) {
  LengthDistribution d;
  d.counts = counts;
  return d;
}

PipelineConfig to_config(const std::map<std::string, std::string>& settings) {
  PipelineConfig c;
  for (const auto& [k, v] : settings) apply_setting(c, k, v);
  return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Character n-gram embedding analysis (C++ core)";
  m.attr("__version__") = std::string(kToolVersion);

  static py::exception<Error> error_type(m, "GarbleError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      error_type(e.what());
    }
  });

  py::enum_<Label>(m, "Label")
      .value("extant", Label::extant)
      .value("pseudoword", Label::pseudoword)
      .value("garble", Label::garble);
  py::enum_<Pos>(m, "Pos")
      .value("noun", Pos::noun)
      .value("verb", Pos::verb)
      .value("adjective", Pos::adjective)
      .value("adverb", Pos::adverb)
      .value("other", Pos::other);

  py::class_<NGramRecord>(m, "NGramRecord")
      .def(py::init<>())
      .def(py::init([](std::string token, Label label) {
             return NGramRecord{std::move(token), label, {}, {}};
           }),
           py::arg("token"), py::arg("label"))
      .def_readwrite("token", &NGramRecord::token)
      .def_readwrite("label", &NGramRecord::label)
      .def_readwrite("pos", &NGramRecord::pos)
      .def_readwrite("concreteness", &NGramRecord::concreteness)
      .def("__repr__", [](const NGramRecord& r) {
        return "NGramRecord('" + r.token + "', " + std::string(to_string(r.label)) + ")";
      });

  // corpus
  py::class_<Lexicon>(m, "Lexicon")
      .def_property_readonly("records", &Lexicon::records)
      .def_readonly("skipped_rows", &Lexicon::skipped_rows)
      .def("__len__", &Lexicon::size)
      .def("__contains__", [](const Lexicon& l, const std::string& t) { return l.contains(t); })
      .def("tokens", [](const Lexicon& l) {
        std::vector<std::string> out;
        for (const auto& r : l.records()) out.push_back(r.token);
        return out;
      });
  m.def("load_lexicon", &load_lexicon, py::arg("path"), py::arg("limit") = std::nullopt);
  m.def("length_histogram",
        [](const Lexicon& l) { return length_histogram(l).counts; });
  m.def(
      "generate_garble",
      [](const std::map<std::size_t, std::uint64_t>& dist, std::size_t count,
         std::uint64_t seed, bool unique) {
        GarbleOptions o;
        o.unique = unique;
        return generate_garble(to_dist(dist), count, seed, o);
      },
      py::arg("length_counts"), py::arg("count"), py::arg("seed"),
      py::arg("unique") = false);
  m.def(
      "generate_pseudowords",
      [](const Lexicon& l, std::size_t order, std::size_t count, std::uint64_t seed,
         std::size_t max_rejections) {
        PseudowordOptions o;
        o.max_rejections = max_rejections;
        return generate_pseudowords(l, order, count, seed, o);
      },
      py::arg("lexicon"), py::arg("order"), py::arg("count"), py::arg("seed"),
      py::arg("max_rejections") = 10000);
  m.def("count_collisions", [](const std::vector<NGramRecord>& r, const Lexicon& l) {
    return mark_collisions(r, l).count;
  });

  // ppm
  py::class_<PpmModel>(m, "PpmModel")
      .def_property_readonly("max_order", &PpmModel::max_order)
      .def_property_readonly("trained_tokens", &PpmModel::trained_tokens)
      .def("serialize", &serialize_ppm);
  m.def("train_ppm",
        [](const std::vector<std::string>& tokens, std::size_t order) {
          return train_ppm(tokens, order);
        },
        py::arg("tokens"), py::arg("max_order") = 3);
  m.def(
      "ppm_prob",
      [](const PpmModel& model, const std::string& ctx, char symbol, bool exclusion) {
        const int s = ppm_symbol(symbol);
        if (s < 0) throw data_error("symbol must be a-z or '$'");
        return ppm_prob(model, ctx, s, PpmOptions{exclusion, false});
      },
      py::arg("model"), py::arg("context"), py::arg("symbol"),
      py::arg("exclusion") = true);
  m.def(
      "surprisal",
      [](const PpmModel& model, const std::string& token, bool exclusion,
         bool per_character) {
        return ppm_logpdf(model, token, PpmOptions{exclusion, per_character})
            .surprisal_bits;
      },
      py::arg("model"), py::arg("token"), py::arg("exclusion") = true,
      py::arg("per_character") = false);

  // embeddings
  py::class_<EmbeddingSet>(m, "EmbeddingSet")
      .def_property_readonly("dim", &EmbeddingSet::dim)
      .def_property_readonly("records", &EmbeddingSet::records)
      .def("__len__", &EmbeddingSet::size)
      .def("matrix", [](const EmbeddingSet& s) {
        return as_matrix(s.values(), s.size(), s.dim());
      });
  m.def("read_embeddings", &read_embeddings);
  m.def("write_embeddings", &write_embeddings);
  m.def(
      "synth_embeddings",
      [](const std::vector<std::tuple<Label, std::size_t, std::vector<double>, double>>& specs,
         std::size_t dim, std::uint64_t seed) {
        std::vector<ClassSpec> cs;
        for (const auto& [l, n, c, s] : specs) cs.push_back({l, n, c, s});
        return synth_embeddings(cs, dim, seed);
      },
      py::arg("specs"), py::arg("dim"), py::arg("seed"));

  // projection
  py::class_<Projection2D>(m, "Projection")
      .def_readonly("records", &Projection2D::records)
      .def_readonly("final_objective", &Projection2D::final_objective)
      .def_readonly("kl_after_exaggeration", &Projection2D::kl_after_exaggeration)
      .def("coords", [](const Projection2D& p) {
        return as_matrix(p.coords, p.size(), p.out_dims);
      });
  m.def(
      "project",
      [](const EmbeddingSet& set, const std::string& method, double perplexity,
         std::size_t iterations, std::uint64_t seed,
         std::optional<std::size_t> max_per_class) {
        ProjectionConfig c;
        c.method = method == "pca" ? ProjectionMethod::pca : ProjectionMethod::sne;
        c.perplexity = perplexity;
        c.iterations = iterations;
        c.exaggeration_iters = std::min(c.exaggeration_iters, iterations);
        c.seed = seed;
        c.max_per_class = max_per_class;
        return project(set, c);
      },
      py::arg("set"), py::arg("method") = "sne", py::arg("perplexity") = 10.0,
      py::arg("iterations") = 1000, py::arg("seed") = 0,
      py::arg("max_per_class") = std::nullopt);

  // axes
  py::class_<AxisResult>(m, "AxisResult")
      .def_readonly("origin", &AxisResult::origin)
      .def_readonly("direction", &AxisResult::direction)
      .def_readonly("rows", &AxisResult::rows)
      .def_readonly("scores", &AxisResult::scores);
  py::class_<AngleEstimate>(m, "AngleEstimate")
      .def_readonly("mean_degrees", &AngleEstimate::mean_degrees)
      .def_readonly("std_degrees", &AngleEstimate::std_degrees)
      .def_readonly("resamples", &AngleEstimate::resamples);
  m.def("information_axis", &information_axis);
  m.def("concreteness_axis",
        [](const Projection2D& p, const std::vector<std::optional<double>>& c) {
          return concreteness_axis(p, c);
        });
  m.def("angle_between",
        py::overload_cast<const AxisResult&, const AxisResult&>(&angle_between));
  m.def("bootstrap_angle",
        [](const Projection2D& p, const std::vector<std::optional<double>>& c,
           std::size_t n, std::uint64_t seed) { return bootstrap_angle(p, c, n, seed); });

  // stats
  m.def("ks_two_sample", [](const std::vector<double>& a, const std::vector<double>& b) {
    const auto r = ks_two_sample(a, b);
    return py::make_tuple(r.d_statistic, r.p_value);
  });
  m.def("spearman", [](const std::vector<double>& a, const std::vector<double>& b) {
    return spearman(a, b);
  });
  m.def("density", [](const std::vector<double>& s, std::size_t bins) {
    const auto h = density(s, bins);
    return py::make_tuple(h.edges, h.heights);
  });

  // classifier
  py::class_<LinearModel>(m, "LinearModel")
      .def_readonly("weights", &LinearModel::weights)
      .def_readonly("bias", &LinearModel::bias)
      .def_readonly("lambda_", &LinearModel::lambda);
  m.def("split_half", &split_half, py::arg("set"), py::arg("seed"));
  m.def("train_svm", &train_svm, py::arg("train"), py::arg("lambda_") = 1e-4,
        py::arg("epochs") = 20, py::arg("seed") = 0);
  m.def("predict", [](const LinearModel& model, const EmbeddingSet& set) {
    std::vector<std::pair<Label, double>> out;
    for (const auto& p : predict(model, set)) out.emplace_back(p.predicted, p.margin);
    return out;
  });

  // pipeline stages, configured with the same key=value settings as the CLI
  m.def("config_keys", &config_keys);
  m.def("run_generate", [](const std::map<std::string, std::string>& settings) {
    const auto r = cmd_generate(to_config(settings));
    return py::dict(py::arg("extant") = r.extant, py::arg("garble") = r.garble,
                    py::arg("pseudoword") = r.pseudowords);
  });
  m.def("run_analyze",
        [](const std::map<std::string, std::string>& settings,
           const std::filesystem::path& embeddings) {
          const auto r = cmd_analyze(to_config(settings), embeddings);
          py::dict medians;
          for (const auto& s : r.class_table) medians[py::str(s.group)] = s.median;
          py::dict ks;
          for (const auto& k : r.class_ks) {
            ks[py::make_tuple(k.first, k.second)] = k.result.d_statistic;
          }
          return py::make_tuple(medians, ks, r.classifier.accuracy);
        });
}

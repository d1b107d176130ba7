// SPDX-License-Identifier: Apache-2.0
#include "garble/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <unordered_set>

#include "garble/axes.hpp"
#include "garble/error.hpp"
#include "garble/text_io.hpp"
#include "json.hpp"

namespace garble {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::size_t to_size(const std::string& key, const std::string& value) {
  const auto v = parse_int(value, key);
  if (v < 0) throw usage_error(key + " must be >= 0");
  return static_cast<std::size_t>(v);
}

std::uint64_t to_u64(const std::string& key, const std::string& value) {
  return static_cast<std::uint64_t>(to_size(key, value));
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw usage_error(key + ": expected true/false, got '" + value + "'");
}

std::string from_bool(bool b) { return b ? "true" : "false"; }

struct Setting {
  std::string key;
  std::function<void(PipelineConfig&, const std::string&)> set;
  std::function<std::string(const PipelineConfig&)> get;
  bool in_hash = true;
};

#define GARBLE_SIZE(name, field)                                                   \
  Setting {                                                                        \
    name, [](PipelineConfig& c, const std::string& v) { c.field = to_size(name, v); }, \
        [](const PipelineConfig& c) { return std::to_string(c.field); }             \
  }
#define GARBLE_BOOL(name, field)                                                   \
  Setting {                                                                        \
    name, [](PipelineConfig& c, const std::string& v) { c.field = to_bool(name, v); }, \
        [](const PipelineConfig& c) { return from_bool(c.field); }                  \
  }
#define GARBLE_REAL(name, field)                                                   \
  Setting {                                                                        \
    name,                                                                          \
        [](PipelineConfig& c, const std::string& v) { c.field = parse_double(v, name); }, \
        [](const PipelineConfig& c) { return format_double(c.field); }              \
  }
#define GARBLE_SEED(name, field)                                                   \
  Setting {                                                                        \
    name, [](PipelineConfig& c, const std::string& v) { c.field = to_u64(name, v); }, \
        [](const PipelineConfig& c) { return std::to_string(c.field); }             \
  }

const std::vector<Setting>& settings() {
  static const std::vector<Setting> table = {
      {"lexicon", [](PipelineConfig& c, const std::string& v) { c.lexicon = v; },
       [](const PipelineConfig& c) { return c.lexicon.string(); }, false},
      {"lexicon_limit",
       [](PipelineConfig& c, const std::string& v) {
         const auto n = to_size("lexicon_limit", v);
         c.lexicon_limit = n == 0 ? std::nullopt : std::optional<std::size_t>(n);
       },
       [](const PipelineConfig& c) {
         return std::to_string(c.lexicon_limit.value_or(0));
       }},
      GARBLE_SIZE("extant_count", extant_count),
      GARBLE_SIZE("garble_count", garble_count),
      GARBLE_SIZE("pseudo_count", pseudo_count),
      GARBLE_SIZE("pseudo_order", pseudo_order),
      GARBLE_BOOL("garble_unique", garble_unique),
      GARBLE_BOOL("garble_exclude_extant", garble_exclude_extant),
      GARBLE_BOOL("pseudo_unique", pseudo_unique),
      GARBLE_SIZE("ppm_order", ppm_order),
      GARBLE_BOOL("ppm_exclusion", ppm_exclusion),
      GARBLE_BOOL("ppm_per_char", ppm_per_char),
      {"method",
       [](PipelineConfig& c, const std::string& v) {
         if (v == "sne" || v == "tsne") {
           c.projection.method = ProjectionMethod::sne;
         } else if (v == "pca") {
           c.projection.method = ProjectionMethod::pca;
         } else {
           throw usage_error("method must be sne or pca");
         }
       },
       [](const PipelineConfig& c) {
         return std::string(c.projection.method == ProjectionMethod::sne ? "sne" : "pca");
       }},
      GARBLE_SIZE("out_dims", projection.out_dims),
      GARBLE_REAL("perplexity", projection.perplexity),
      GARBLE_SIZE("iterations", projection.iterations),
      GARBLE_SIZE("exaggeration_iters", projection.exaggeration_iters),
      GARBLE_REAL("exaggeration_factor", projection.exaggeration_factor),
      GARBLE_REAL("learning_rate", projection.learning_rate),
      GARBLE_REAL("momentum_early", projection.momentum_early),
      GARBLE_REAL("momentum_late", projection.momentum_late),
      {"max_per_class",
       [](PipelineConfig& c, const std::string& v) {
         const auto n = to_size("max_per_class", v);
         c.projection.max_per_class =
             n == 0 ? std::nullopt : std::optional<std::size_t>(n);
       },
       [](const PipelineConfig& c) {
         return std::to_string(c.projection.max_per_class.value_or(0));
       }},
      GARBLE_REAL("svm_lambda", svm_lambda),
      GARBLE_SIZE("svm_epochs", svm_epochs),
      GARBLE_SIZE("bootstrap_resamples", bootstrap_resamples),
      GARBLE_SIZE("density_bins", density_bins),
      GARBLE_SEED("seed_garble", seeds.garble),
      GARBLE_SEED("seed_pseudo", seeds.pseudo),
      GARBLE_SEED("seed_projection", seeds.projection),
      GARBLE_SEED("seed_split", seeds.split),
      GARBLE_SEED("seed_svm", seeds.svm),
      GARBLE_SEED("seed_bootstrap", seeds.bootstrap),
      {"out", [](PipelineConfig& c, const std::string& v) { c.out_dir = v; },
       [](const PipelineConfig& c) { return c.out_dir.string(); }, false},
  };
  return table;
}

#undef GARBLE_SIZE
#undef GARBLE_BOOL
#undef GARBLE_REAL
#undef GARBLE_SEED

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

void hash_file(std::uint64_t& h, const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open " + path.string());
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof(buf));
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ULL;
    }
  }
}

json header_json(const PipelineConfig& config, const std::string& hash) {
  return json{{"tool", "garble-tools"},
              {"version", std::string(kToolVersion)},
              {"config_hash", hash},
              {"seeds", seeds_string(config.seeds)}};
}

void write_json(const fs::path& path, const json& j) {
  write_text(path, j.dump(2) + "\n");
}

json summary_json(const ClassSummary& s) {
  return json{{"group", s.group}, {"median", s.median}, {"std", s.std}, {"count", s.count}};
}

json ks_json(const std::string& kind, const KsPair& pair) {
  return json{{"kind", kind},
              {"a", pair.first},
              {"b", pair.second},
              {"d", pair.result.d_statistic},
              {"p", pair.result.p_value},
              {"n1", pair.result.n1},
              {"n2", pair.result.n2}};
}

Lexicon load_config_lexicon(const PipelineConfig& config) {
  if (config.lexicon.empty()) throw usage_error("no lexicon configured");
  return load_lexicon(config.lexicon, config.lexicon_limit);
}

PpmOptions ppm_options(const PipelineConfig& config) {
  return PpmOptions{config.ppm_exclusion, config.ppm_per_char};
}

std::vector<std::string> label_names() {
  std::vector<std::string> out;
  for (Label l : kAllLabels) out.emplace_back(to_string(l));
  return out;
}

std::vector<std::string> open_pos_names() {
  return {"noun", "verb", "adjective", "adverb"};
}

}  // namespace

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& s : settings()) keys.push_back(s.key);
  return keys;
}

void apply_setting(PipelineConfig& config, const std::string& key,
                   const std::string& value) {
  for (const auto& s : settings()) {
    if (s.key == key) {
      try {
        s.set(config, value);
      } catch (const Error& e) {
        throw usage_error(std::string(e.what()));
      }
      return;
    }
  }
  throw usage_error("unknown config key '" + key + "'");
}

void apply_config_file(PipelineConfig& config, const fs::path& path) {
  const auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string line = trim(lines[i]);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw usage_error("expected key=value at " + path.string() + ":" +
                        std::to_string(i + 1));
    }
    apply_setting(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

std::string canonical_config(const PipelineConfig& config) {
  std::ostringstream out;
  for (const auto& s : settings()) {
    if (s.in_hash) out << s.key << '=' << s.get(config) << '\n';
  }
  return out.str();
}

std::string config_hash(const PipelineConfig& config,
                        std::span<const fs::path> inputs) {
  std::string text = canonical_config(config);
  std::uint64_t h = 14695981039346656037ULL;
  for (const auto& p : inputs) {
    hash_file(h, p);
  }
  text += "inputs=" + std::to_string(h) + "\n";
  return fnv1a_hex(text);
}

std::string seeds_string(const Seeds& s) {
  std::ostringstream out;
  out << "garble:" << s.garble << ",pseudo:" << s.pseudo
      << ",projection:" << s.projection << ",split:" << s.split
      << ",svm:" << s.svm << ",bootstrap:" << s.bootstrap;
  return out.str();
}

std::vector<std::string> header_lines(const PipelineConfig& config,
                                      const std::string& hash) {
  return {"garble-tools " + std::string(kToolVersion) + " config=" + hash +
              " seeds=" + seeds_string(config.seeds)};
}

GenerateResult cmd_generate(const PipelineConfig& config) {
  const Lexicon lexicon = load_config_lexicon(config);
  const std::vector<fs::path> inputs{config.lexicon};
  const std::string hash = config_hash(config, inputs);
  const auto header = header_lines(config, hash);
  fs::create_directories(config.out_dir);

  const std::size_t n_extant = std::min(config.extant_count, lexicon.size());
  std::vector<NGramRecord> extant(lexicon.records().begin(),
                                  lexicon.records().begin() +
                                      static_cast<std::ptrdiff_t>(n_extant));
  const auto dist = length_histogram(lexicon);

  GarbleOptions gopts;
  gopts.unique = config.garble_unique;
  gopts.exclude = config.garble_exclude_extant ? &lexicon : nullptr;
  const auto garble =
      generate_garble(dist, config.garble_count, config.seeds.garble, gopts);

  PseudowordOptions popts;
  popts.unique = config.pseudo_unique;
  const auto pseudo = generate_pseudowords(lexicon, config.pseudo_order,
                                           config.pseudo_count, config.seeds.pseudo,
                                           popts);

  std::vector<NGramRecord> all = extant;
  all.insert(all.end(), pseudo.begin(), pseudo.end());
  all.insert(all.end(), garble.begin(), garble.end());

  write_token_file(config.out_dir / "extant.tsv", extant, header);
  write_token_file(config.out_dir / "garble.tsv", garble, header);
  write_token_file(config.out_dir / "pseudowords.tsv", pseudo, header);
  write_token_file(config.out_dir / "tokens.tsv", all, header);

  GenerateResult result;
  result.extant = extant.size();
  result.garble = garble.size();
  result.pseudowords = pseudo.size();
  result.garble_collisions = mark_collisions(garble, lexicon).count;

  json manifest;
  manifest["header"] = header_json(config, hash);
  manifest["config"] = canonical_config(config);
  manifest["counts"] = {{"extant", result.extant},
                        {"garble", result.garble},
                        {"pseudoword", result.pseudowords},
                        {"total", all.size()}};
  manifest["garble_lexicon_collisions"] = result.garble_collisions;
  manifest["lexicon_rows"] = lexicon.size();
  manifest["lexicon_skipped_rows"] = lexicon.skipped_rows;
  manifest["files"] = {"extant.tsv", "garble.tsv", "pseudowords.tsv", "tokens.tsv"};
  write_json(config.out_dir / "manifest.json", manifest);
  return result;
}

std::vector<InfoScore> cmd_score(const PipelineConfig& config,
                                 const fs::path& tokens_path,
                                 const std::optional<fs::path>& model_path) {
  std::vector<fs::path> inputs{tokens_path};
  PpmModel model;
  if (model_path) {
    model = read_ppm(*model_path);
    inputs.push_back(*model_path);
  } else {
    const Lexicon lexicon = load_config_lexicon(config);
    inputs.push_back(config.lexicon);
    std::vector<std::string> tokens;
    for (const auto& r : lexicon.records()) tokens.push_back(r.token);
    model = train_ppm(tokens, config.ppm_order);
  }
  const auto records = read_token_file(tokens_path);
  const std::string hash = config_hash(config, inputs);
  fs::create_directories(config.out_dir);

  const auto scores = score_corpus(model, records, ppm_options(config));
  std::ostringstream out;
  for (const auto& line : header_lines(config, hash)) out << "# " << line << '\n';
  out << "#fields\ttoken\tlabel\tsurprisal_bits\tnormalized\n";
  for (std::size_t i = 0; i < records.size(); ++i) {
    out << records[i].token << '\t' << to_string(records[i].label) << '\t'
        << format_double(scores[i].surprisal_bits) << '\t'
        << format_double(*scores[i].normalized) << '\n';
  }
  write_text(config.out_dir / "scores.tsv", out.str());
  write_ppm(model, config.out_dir / "ppm.model");
  return scores;
}

Projection2D cmd_project(const PipelineConfig& config,
                         const fs::path& embeddings_path) {
  const EmbeddingSet set = read_embeddings(embeddings_path);
  const std::vector<fs::path> inputs{embeddings_path};
  const std::string hash = config_hash(config, inputs);
  fs::create_directories(config.out_dir);

  ProjectionConfig pc = config.projection;
  pc.seed = config.seeds.projection;
  Projection2D proj = project(set, pc);
  auto header = header_lines(config, hash);
  header.push_back("projection " + describe(pc));
  header.push_back("final_objective=" + format_double(proj.final_objective));
  write_projection(config.out_dir / "projection.tsv", proj, header);
  return proj;
}

namespace {

ErrorReport run_classifier(const PipelineConfig& config, const EmbeddingSet& set,
                           const Lexicon* lexicon, const std::string& hash) {
  const auto header = header_lines(config, hash);
  std::vector<std::size_t> binary_rows;
  std::vector<std::size_t> pseudo_rows = set.indices_of(Label::pseudoword);
  for (Label l : {Label::extant, Label::garble}) {
    const auto rows = set.indices_of(l);
    binary_rows.insert(binary_rows.end(), rows.begin(), rows.end());
  }
  std::sort(binary_rows.begin(), binary_rows.end());
  const auto [train, test] = split_half(set.select(binary_rows), config.seeds.split);

  const LinearModel model =
      train_svm(train, config.svm_lambda, config.svm_epochs, config.seeds.svm);
  write_svm(model, config.out_dir / "svm.model");

  EmbeddingSet evaluated = test;
  for (std::size_t i : pseudo_rows) evaluated.add(set.record(i), set.row(i));
  const auto predictions = predict(model, evaluated);
  write_predictions(config.out_dir / "predictions.tsv", evaluated.records(),
                    predictions, header);

  ErrorReport report = error_report(evaluated.records(), predictions, lexicon);
  json j;
  j["header"] = header_json(config, hash);
  j["accuracy"] = report.accuracy;
  j["evaluated"] = report.evaluated;
  j["train_size"] = train.size();
  j["training_objective"] = svm_objective(model, train);
  j["pseudoword_as_extant"] = report.pseudo_as_extant;
  j["pseudoword_as_garble"] = report.pseudo_as_garble;
  const auto& b = report.buckets;
  j["buckets"] = {{"ends_in_s", b.ends_in_s},
                  {"ends_in_ly", b.ends_in_ly},
                  {"lexicon_collision", b.lexicon_collision},
                  {"repeated_char_run", b.repeated_char_run},
                  {"length_le_4", b.short_token},
                  {"length_ge_12", b.long_token},
                  {"other", b.other}};
  json errors = json::array();
  for (const auto& m : report.misclassified) {
    errors.push_back({{"token", m.token},
                      {"true", std::string(to_string(m.truth))},
                      {"pred", std::string(to_string(m.predicted))},
                      {"margin", m.margin}});
  }
  j["misclassified"] = errors;
  write_json(config.out_dir / "classifier_report.json", j);
  return report;
}

}  // namespace

ErrorReport cmd_classify(const PipelineConfig& config,
                         const fs::path& embeddings_path) {
  const EmbeddingSet set = read_embeddings(embeddings_path);
  std::vector<fs::path> inputs{embeddings_path};
  std::optional<Lexicon> lexicon;
  if (!config.lexicon.empty()) {
    lexicon = load_config_lexicon(config);
    inputs.push_back(config.lexicon);
  }
  const std::string hash = config_hash(config, inputs);
  fs::create_directories(config.out_dir);
  return run_classifier(config, set, lexicon ? &*lexicon : nullptr, hash);
}

void join_lexicon(std::vector<NGramRecord>& records, const Lexicon& lexicon) {
  for (auto& rec : records) {
    if (rec.label != Label::extant) continue;
    if (const auto* hit = lexicon.find(rec.token)) {
      rec.pos = hit->pos;
      rec.concreteness = hit->concreteness;
    }
  }
}

StatSummaries write_stat_summaries(const fs::path& out_dir,
                                   std::span<const NGramRecord> records,
                                   std::span<const double> scores,
                                   std::size_t bins,
                                   std::span<const std::string> header) {
  if (records.size() != scores.size()) {
    throw usage_error("write_stat_summaries: records and scores differ in length");
  }
  std::vector<std::string> class_groups;
  std::vector<std::string> pos_groups;
  for (const auto& rec : records) {
    class_groups.emplace_back(to_string(rec.label));
    pos_groups.emplace_back(rec.label == Label::extant && rec.pos
                                ? std::string(to_string(*rec.pos))
                                : std::string());
  }
  auto present = [](const std::vector<std::string>& groups,
                    const std::vector<std::string>& candidates) {
    std::vector<std::string> out;
    for (const auto& c : candidates) {
      if (std::find(groups.begin(), groups.end(), c) != groups.end()) out.push_back(c);
    }
    return out;
  };
  const auto classes = present(class_groups, label_names());
  const auto pos = present(pos_groups, open_pos_names());

  StatSummaries out;
  out.class_table = class_summaries(scores, class_groups, classes);
  const auto pos_table = class_summaries(scores, pos_groups, pos);
  out.class_ks = ks_matrix(scores, class_groups, classes);
  out.pos_ks = ks_matrix(scores, pos_groups, pos);

  std::ostringstream table;
  for (const auto& line : header) table << "# " << line << '\n';
  table << "# std is the population standard deviation over tokens\n";
  table << "#fields\tgroup\tmedian\tstd\tcount\n";
  const std::vector<ClassSummary>* tables[] = {&out.class_table, &pos_table};
  for (const auto* rows : tables) {
    for (const auto& s : *rows) {
      table << s.group << '\t' << format_double(s.median) << '\t'
            << format_double(s.std) << '\t' << s.count << '\n';
    }
  }
  write_text(out_dir / "class_table.tsv", table.str());

  std::ostringstream ks;
  ks << json{{"header", header}}.dump() << '\n';
  for (const auto& p : out.class_ks) ks << ks_json("class", p).dump() << '\n';
  for (const auto& p : out.pos_ks) ks << ks_json("pos", p).dump() << '\n';
  write_text(out_dir / "ks.jsonl", ks.str());

  std::ostringstream dens;
  for (const auto& line : header) dens << "# " << line << '\n';
  dens << "#fields\tgroup\tbin_lo\tbin_hi\tdensity\n";
  auto emit = [&](const std::string& name, const std::vector<std::string>& groups) {
    std::vector<double> v;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (groups[i] == name) v.push_back(scores[i]);
    }
    const auto h = density(v, bins);
    for (std::size_t k = 0; k < bins; ++k) {
      dens << name << '\t' << format_double(h.edges[k]) << '\t'
           << format_double(h.edges[k + 1]) << '\t' << format_double(h.heights[k])
           << '\n';
    }
  };
  for (const auto& c : classes) emit(c, class_groups);
  for (const auto& p : pos) emit(p, pos_groups);
  write_text(out_dir / "density.tsv", dens.str());
  return out;
}

AnalyzeResult cmd_analyze(const PipelineConfig& config,
                          const fs::path& embeddings_path,
                          const std::optional<fs::path>& corpus_dir) {
  const EmbeddingSet set = read_embeddings(embeddings_path);
  std::vector<fs::path> inputs{embeddings_path};

  if (corpus_dir) {
    const fs::path tokens_path = *corpus_dir / "tokens.tsv";
    inputs.push_back(tokens_path);
    const auto corpus = read_token_file(tokens_path);
    std::set<std::pair<std::string, Label>> have;
    for (const auto& r : set.records()) have.emplace(r.token, r.label);
    std::set<std::pair<std::string, Label>> want;
    for (const auto& r : corpus) want.emplace(r.token, r.label);
    std::size_t missing = 0;
    std::size_t extra = 0;
    for (const auto& k : want) missing += have.contains(k) ? 0 : 1;
    for (const auto& k : have) extra += want.contains(k) ? 0 : 1;
    if (missing || extra) {
      throw data_error("token mismatch between corpus and embeddings: " +
                       std::to_string(missing) + " of " + std::to_string(want.size()) +
                       " corpus tokens missing from embeddings, " +
                       std::to_string(extra) + " of " + std::to_string(have.size()) +
                       " embedding rows not in corpus");
    }
  }

  std::optional<Lexicon> lexicon;
  if (!config.lexicon.empty()) {
    lexicon = load_config_lexicon(config);
    inputs.push_back(config.lexicon);
  }
  const std::string hash = config_hash(config, inputs);
  const auto header = header_lines(config, hash);
  fs::create_directories(config.out_dir);

  // Projection and information axis.
  ProjectionConfig pc = config.projection;
  pc.seed = config.seeds.projection;
  if (pc.out_dims != 2) throw usage_error("analyze needs a 2D projection");
  Projection2D proj = project(set, pc);
  std::vector<NGramRecord> records = proj.records;
  if (lexicon) join_lexicon(records, *lexicon);

  const AxisResult axis = information_axis(proj);
  {
    auto h = header;
    h.push_back("projection " + describe(pc));
    h.push_back("final_objective=" + format_double(proj.final_objective));
    write_projection(config.out_dir / "projection.tsv", proj, h, axis.scores);
  }

  AnalyzeResult result;
  const auto stats =
      write_stat_summaries(config.out_dir, records, axis.scores, config.density_bins, header);
  result.class_table = stats.class_table;
  result.class_ks = stats.class_ks;
  result.pos_ks = stats.pos_ks;

  {
    json j;
    j["header"] = header_json(config, hash);
    j["origin"] = axis.origin;
    j["direction"] = axis.direction;
    json per_class = json::array();
    for (const auto& s : stats.class_table) per_class.push_back(summary_json(s));
    j["class_summaries"] = per_class;
    j["projection_objective"] = proj.final_objective;
    if (proj.kl_after_exaggeration) {
      j["kl_after_exaggeration"] = *proj.kl_after_exaggeration;
    }
    write_json(config.out_dir / "axis.json", j);
  }

  // Concreteness axis, when ratings are available.
  std::vector<std::optional<double>> concreteness;
  std::size_t rated = 0;
  for (const auto& r : records) {
    concreteness.push_back(r.concreteness);
    rated += r.concreteness ? 1 : 0;
  }
  std::vector<std::string> files = {"projection.tsv", "axis.json", "class_table.tsv",
                                    "ks.jsonl", "density.tsv"};
  if (rated >= 2) {
    json j;
    j["header"] = header_json(config, hash);
    try {
      const AxisResult conc = concreteness_axis(proj, concreteness);
      const AngleEstimate est = bootstrap_angle(
          proj, concreteness, config.bootstrap_resamples, config.seeds.bootstrap);
      j["concreteness_origin"] = conc.origin;
      j["concreteness_direction"] = conc.direction;
      j["angle_degrees"] = angle_between(axis, conc);
      j["bootstrap_mean_degrees"] = est.mean_degrees;
      j["bootstrap_std_degrees"] = est.std_degrees;
      j["bootstrap_resamples"] = est.resamples;
      j["bootstrap_skipped"] = est.skipped;
      result.angle_mean = est.mean_degrees;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::numeric) throw;
      j["error"] = e.what();
    }
    write_json(config.out_dir / "angle.json", j);
    files.emplace_back("angle.json");
  }

  // Per-class string patterns.
  {
    std::ostringstream out;
    out << json{{"header", header}}.dump() << '\n';
    for (const auto& cp : pattern_analysis(records, axis.scores)) {
      json j;
      j["label"] = std::string(to_string(cp.label));
      j["count"] = cp.count;
      j["length_score_spearman"] =
          cp.length_spearman ? json(*cp.length_spearman) : json(nullptr);
      json pats = json::array();
      for (const auto& p : cp.patterns) {
        json pj{{"pattern", p.pattern}, {"count", p.count}};
        if (p.scores) {
          pj["median"] = p.scores->median;
          pj["std"] = p.scores->std;
        }
        pats.push_back(pj);
      }
      j["patterns"] = pats;
      out << j.dump() << '\n';
    }
    write_text(config.out_dir / "patterns.jsonl", out.str());
    files.emplace_back("patterns.jsonl");
  }

  // Markov information content against the axis.
  {
    std::vector<std::string> training;
    if (lexicon) {
      for (const auto& r : lexicon->records()) training.push_back(r.token);
    } else {
      for (std::size_t i : set.indices_of(Label::extant)) {
        training.push_back(set.record(i).token);
      }
    }
    const PpmModel model = train_ppm(training, config.ppm_order);
    const auto info = score_corpus(model, records, ppm_options(config));

    std::ostringstream out;
    for (const auto& line : header) out << "# " << line << '\n';
    out << "#fields\ttoken\tlabel\taxis_score\tsurprisal_bits\tnormalized_surprisal\n";
    for (std::size_t i = 0; i < records.size(); ++i) {
      out << records[i].token << '\t' << to_string(records[i].label) << '\t'
          << format_double(axis.scores[i]) << '\t'
          << format_double(info[i].surprisal_bits) << '\t'
          << format_double(*info[i].normalized) << '\n';
    }
    write_text(config.out_dir / "axis_vs_surprisal.tsv", out.str());

    json j;
    j["header"] = header_json(config, hash);
    j["ppm_order"] = config.ppm_order;
    j["ppm_training_tokens"] = training.size();
    json per_class = json::object();
    for (Label l : kAllLabels) {
      std::vector<double> a;
      std::vector<double> b;
      for (std::size_t i = 0; i < records.size(); ++i) {
        if (records[i].label != l) continue;
        a.push_back(axis.scores[i]);
        b.push_back(*info[i].normalized);
      }
      if (a.size() < 3) continue;
      try {
        per_class[std::string(to_string(l))] = spearman(a, b);
      } catch (const Error&) {
        per_class[std::string(to_string(l))] = nullptr;
      }
    }
    j["spearman_axis_vs_surprisal"] = per_class;
    write_json(config.out_dir / "markov.json", j);
    files.emplace_back("axis_vs_surprisal.tsv");
    files.emplace_back("markov.json");
  }

  result.classifier = run_classifier(config, set, lexicon ? &*lexicon : nullptr, hash);
  for (const char* f : {"svm.model", "predictions.tsv", "classifier_report.json"}) {
    files.emplace_back(f);
  }

  json manifest;
  manifest["header"] = header_json(config, hash);
  manifest["config"] = canonical_config(config);
  manifest["embeddings"] = {{"rows", set.size()}, {"dim", set.dim()}};
  manifest["projected_rows"] = proj.size();
  manifest["files"] = files;
  write_json(config.out_dir / "manifest.json", manifest);
  return result;
}

}  // namespace garble

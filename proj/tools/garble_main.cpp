// SPDX-License-Identifier: Apache-2.0
//
// garble: corpus generation, PPM scoring, projection, classification and the
// full analysis bundle.
#include <algorithm>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "garble/error.hpp"
#include "garble/pipeline.hpp"

namespace {

struct CommonArgs {
  std::string config_file;
  std::vector<std::string> sets;
  std::map<std::string, std::string> flags;
};

// Every config key is also accepted as --key-name VALUE.
void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_file, "key=value config file");
  cmd->add_option("--set", args.sets, "override a config key (KEY=VALUE)");
  for (const auto& key : garble::config_keys()) {
    std::string flag = key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    cmd->add_option_function<std::string>(
        "--" + flag, [&args, key](const std::string& v) { args.flags[key] = v; },
        "config key " + key);
  }
}

garble::PipelineConfig build_config(const CommonArgs& args) {
  garble::PipelineConfig config;
  if (!args.config_file.empty()) garble::apply_config_file(config, args.config_file);
  for (const auto& kv : args.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw garble::usage_error("--set expects KEY=VALUE, got '" + kv + "'");
    }
    garble::apply_setting(config, kv.substr(0, eq), kv.substr(eq + 1));
  }
  for (const auto& [k, v] : args.flags) garble::apply_setting(config, k, v);
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Character n-gram embedding analysis toolkit"};
  app.set_version_flag("--version", std::string(garble::kToolVersion));
  app.require_subcommand(1);

  CommonArgs gen_args;
  auto* gen = app.add_subcommand("generate", "write extant, garble and pseudoword token files");
  add_common(gen, gen_args);

  CommonArgs score_args;
  std::string score_tokens;
  std::string score_model;
  auto* score = app.add_subcommand("score", "PPM surprisal for every token in a token file");
  add_common(score, score_args);
  score->add_option("--tokens", score_tokens, "token<TAB>label file")->required();
  score->add_option("--model", score_model, "existing ppm.model (default: train on lexicon)");

  CommonArgs proj_args;
  std::string proj_emb;
  auto* proj = app.add_subcommand("project", "2D projection of an embedding file");
  add_common(proj, proj_args);
  proj->add_option("--embeddings", proj_emb, "#garble-emb v1 file")->required();

  CommonArgs cls_args;
  std::string cls_emb;
  auto* cls = app.add_subcommand("classify", "linear extant/garble classifier");
  add_common(cls, cls_args);
  cls->add_option("--embeddings", cls_emb, "#garble-emb v1 file")->required();

  CommonArgs an_args;
  std::string an_emb;
  std::string an_corpus;
  auto* an = app.add_subcommand("analyze", "full report bundle");
  add_common(an, an_args);
  an->add_option("--embeddings", an_emb, "#garble-emb v1 file")->required();
  an->add_option("--corpus", an_corpus, "generate output directory to check coverage against");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*gen) {
      const auto r = garble::cmd_generate(build_config(gen_args));
      std::cout << "extant=" << r.extant << " garble=" << r.garble
                << " pseudoword=" << r.pseudowords
                << " garble_collisions=" << r.garble_collisions << '\n';
    } else if (*score) {
      std::optional<std::filesystem::path> model;
      if (!score_model.empty()) model = score_model;
      const auto s = garble::cmd_score(build_config(score_args), score_tokens, model);
      std::cout << "scored " << s.size() << " tokens\n";
    } else if (*proj) {
      const auto p = garble::cmd_project(build_config(proj_args), proj_emb);
      std::cout << "projected " << p.size()
                << " points, objective=" << p.final_objective << '\n';
    } else if (*cls) {
      const auto r = garble::cmd_classify(build_config(cls_args), cls_emb);
      std::cout << "accuracy=" << r.accuracy << " evaluated=" << r.evaluated
                << " pseudo_as_extant=" << r.pseudo_as_extant
                << " pseudo_as_garble=" << r.pseudo_as_garble << '\n';
    } else if (*an) {
      std::optional<std::filesystem::path> corpus;
      if (!an_corpus.empty()) corpus = an_corpus;
      const auto r = garble::cmd_analyze(build_config(an_args), an_emb, corpus);
      for (const auto& s : r.class_table) {
        std::cout << s.group << " median=" << s.median << " std=" << s.std
                  << " n=" << s.count << '\n';
      }
      for (const auto& k : r.class_ks) {
        std::cout << "KS(" << k.first << "," << k.second
                  << ") D=" << k.result.d_statistic << " p=" << k.result.p_value << '\n';
      }
      std::cout << "classifier accuracy=" << r.classifier.accuracy << '\n';
    }
  } catch (const garble::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

// Command-line driver: build-graph, embed, retrofit, translate, evaluate.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "genremb/genremb.hpp"

namespace {

template <typename T, typename Parse>
void override_enum(const std::optional<std::string>& flag, T& field, Parse parse, const char* name) {
  if (!flag) return;
  auto v = parse(*flag);
  if (!v) {
    throw genremb::Error(genremb::ErrorKind::invalid_argument,
                         std::string("invalid --") + name + " '" + *flag + "'");
  }
  field = *v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multilingual music genre embeddings: compose, retrofit, translate, evaluate"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::string> composition, scheme, scorer, embeddings, output_dir, target;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::vector<std::string> sources;
  bool verbose = false;

  app.add_option("--config", config_path, "Pipeline configuration (JSON)")->required();
  app.add_option("--composition", composition, "Initial embeddings: avg | sif");
  app.add_option("--scheme", scheme, "Retrofitting coefficients: uniform | typed");
  app.add_option("--scorer", scorer, "Translation scorer: sum | avg | baseline");
  app.add_option("--embeddings", embeddings, "Embeddings used for scoring: initial | retrofitted");
  app.add_option("--seed", seed, "Seed for fold assignment");
  app.add_option("--threads", threads, "Maximum worker threads");
  app.add_option("--output-dir", output_dir, "Output directory (overrides the config)");
  app.add_flag("--verbose", verbose, "Log progress and the retrofitting trace");

  auto* build = app.add_subcommand("build-graph", "Filter the genre graph and attach tag systems");
  auto* embed = app.add_subcommand("embed", "Compose initial concept embeddings");
  auto* retro = app.add_subcommand("retrofit", "Retrofit embeddings to the genre graph");
  auto* trans = app.add_subcommand("translate", "Rank the tags of a target system for source tags");
  trans->add_option("--target", target, "Target tag system")->required();
  trans->add_option("sources", sources, "Source tag node ids (e.g. lastfm:rock)")->required();
  auto* eval = app.add_subcommand("evaluate", "Stratified k-fold macro-AUC evaluation");
  std::optional<std::string> eval_target;
  std::vector<std::string> eval_sources;
  eval->add_option("--target", eval_target, "Target tag system (overrides the config)");
  eval->add_option("--sources", eval_sources, "Source tag systems (overrides the config)");

  CLI11_PARSE(app, argc, argv);

  try {
    auto cfg = genremb::load_config(config_path);
    override_enum(composition, cfg.composition, genremb::parse_composition, "composition");
    override_enum(scheme, cfg.scheme, genremb::parse_scheme, "scheme");
    override_enum(scorer, cfg.scorer, genremb::parse_scorer, "scorer");
    override_enum(embeddings, cfg.stage, genremb::parse_stage, "embeddings");
    if (seed) cfg.seed = *seed;
    if (threads) cfg.threads = *threads;
    if (output_dir) cfg.output_dir = *output_dir;
    if (eval_target) cfg.target = *eval_target;
    if (!eval_sources.empty()) cfg.sources = eval_sources;
    cfg.verbose = verbose;

    std::ostream& log = std::cerr;
    if (build->parsed()) {
      genremb::cmd_build_graph(cfg, log);
    } else if (embed->parsed()) {
      genremb::cmd_embed(cfg, log);
    } else if (retro->parsed()) {
      genremb::cmd_retrofit(cfg, log);
    } else if (trans->parsed()) {
      genremb::cmd_translate(cfg, sources, *target, std::cout, log);
    } else if (eval->parsed()) {
      genremb::cmd_evaluate(cfg, std::cout, log);
    }
  } catch (const genremb::Error& e) {
    std::cerr << "error: kind=" << genremb::to_string(e.kind());
    if (e.line()) std::cerr << " line=" << *e.line();
    std::string message = e.message();
    for (char& c : message) {
      if (c == '\n') c = ' ';
    }
    std::cerr << " message=" << message << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: kind=internal message=" << e.what() << '\n';
    return 1;
  }
  return 0;
}

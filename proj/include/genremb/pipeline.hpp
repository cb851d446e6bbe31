#pragma once

// End-to-end pipeline behind the command-line tool. Every command reads its
// inputs from the configured files or from the outputs of the previous
// command in the output directory, and writes deterministic outputs.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "json.hpp"

#include "genremb/compose.hpp"
#include "genremb/error.hpp"
#include "genremb/eval.hpp"
#include "genremb/genregraph.hpp"
#include "genremb/retrofit.hpp"
#include "genremb/translate.hpp"
#include "genremb/wordvec.hpp"

namespace genremb {

namespace fs = std::filesystem;

enum class Composition { avg, sif };

inline std::string_view to_string(Composition c) { return c == Composition::avg ? "avg" : "sif"; }

inline std::optional<Composition> parse_composition(std::string_view s) {
  if (s == "avg") return Composition::avg;
  if (s == "sif") return Composition::sif;
  return std::nullopt;
}

enum class Stage { initial, retrofitted };

inline std::string_view to_string(Stage s) { return s == Stage::initial ? "initial" : "retrofitted"; }

inline std::optional<Stage> parse_stage(std::string_view s) {
  if (s == "initial") return Stage::initial;
  if (s == "retrofitted") return Stage::retrofitted;
  return std::nullopt;
}

struct PipelineConfig {
  std::map<std::string, fs::path> vectors;  // language -> vector file
  std::optional<std::size_t> vector_limit;
  fs::path graph_nodes;
  fs::path graph_edges;
  std::optional<fs::path> lemmas;
  std::optional<fs::path> high_confidence;  // one node id per line
  fs::path corpus;
  std::map<std::string, std::string> tag_systems;  // system -> language
  Composition composition = Composition::sif;
  double sif_a = 1e-3;
  Scheme scheme = Scheme::typed;
  double alpha_known = 1.0;
  double alpha_unknown = 0.0;
  double tolerance = 1e-5;
  int max_iters = 100;
  ScorerKind scorer = ScorerKind::avg;
  Stage stage = Stage::retrofitted;
  int folds = 4;
  std::uint64_t seed = 0;
  std::size_t min_tag_count = 16;
  std::string target;
  std::vector<std::string> sources;
  fs::path output_dir = "out";
  unsigned threads = 1;
  bool verbose = false;
};

namespace detail {

template <typename T, typename Parse>
T enum_field(const nlohmann::json& j, const char* key, T fallback, Parse parse) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_string()) {
    throw Error(ErrorKind::invalid_argument, std::string("config key '") + key + "' must be a string");
  }
  auto v = parse(it->get<std::string>());
  if (!v) {
    throw Error(ErrorKind::invalid_argument,
                std::string("config key '") + key + "' has invalid value '" + it->get<std::string>() + "'");
  }
  return *v;
}

inline std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::not_found, "cannot open '" + path.string() + "'");
  return in;
}

inline std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write '" + path.string() + "'");
  return out;
}

// Prefix errors from a file with its path.
template <typename F>
auto with_path(const fs::path& path, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.message(), e.line());
  }
}

}  // namespace detail

/// Parse a JSON config. Relative paths resolve against `base_dir`.
inline PipelineConfig parse_config(const nlohmann::json& j, const fs::path& base_dir) {
  PipelineConfig cfg;
  auto path_of = [&](const nlohmann::json& v) { return base_dir / fs::path(v.get<std::string>()); };
  try {
    if (j.contains("vectors")) {
      for (const auto& [lang, p] : j.at("vectors").items()) cfg.vectors[lang] = path_of(p);
    }
    if (j.contains("vector_limit")) cfg.vector_limit = j.at("vector_limit").get<std::size_t>();
    if (j.contains("graph")) {
      const auto& g = j.at("graph");
      cfg.graph_nodes = path_of(g.at("nodes"));
      cfg.graph_edges = path_of(g.at("edges"));
      if (g.contains("lemmas")) cfg.lemmas = path_of(g.at("lemmas"));
      if (g.contains("high_confidence")) cfg.high_confidence = path_of(g.at("high_confidence"));
    }
    if (j.contains("corpus")) cfg.corpus = path_of(j.at("corpus"));
    if (j.contains("tag_systems")) {
      for (const auto& [system, lang] : j.at("tag_systems").items()) {
        cfg.tag_systems[system] = lang.get<std::string>();
      }
    }
    cfg.composition = detail::enum_field(j, "composition", cfg.composition, parse_composition);
    cfg.sif_a = j.value("sif_a", cfg.sif_a);
    if (j.contains("retrofit")) {
      const auto& r = j.at("retrofit");
      cfg.scheme = detail::enum_field(r, "scheme", cfg.scheme, parse_scheme);
      cfg.alpha_known = r.value("alpha_known", cfg.alpha_known);
      cfg.alpha_unknown = r.value("alpha_unknown", cfg.alpha_unknown);
      cfg.tolerance = r.value("tolerance", cfg.tolerance);
      cfg.max_iters = r.value("max_iters", cfg.max_iters);
    }
    cfg.scorer = detail::enum_field(j, "scorer", cfg.scorer, parse_scorer);
    cfg.stage = detail::enum_field(j, "embeddings", cfg.stage, parse_stage);
    cfg.folds = j.value("folds", cfg.folds);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.min_tag_count = j.value("min_tag_count", cfg.min_tag_count);
    if (j.contains("evaluate")) {
      const auto& e = j.at("evaluate");
      cfg.target = e.value("target", cfg.target);
      cfg.sources = e.value("sources", cfg.sources);
    }
    if (j.contains("output_dir")) cfg.output_dir = path_of(j.at("output_dir"));
    cfg.threads = j.value("threads", cfg.threads);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::invalid_argument, std::string("bad config: ") + e.what());
  }
  return cfg;
}

inline PipelineConfig load_config(const fs::path& path) {
  auto in = detail::open_in(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::parse, path.string() + ": " + e.what());
  }
  return parse_config(j, path.has_parent_path() ? path.parent_path() : fs::path("."));
}

/// Output file layout under the output directory.
struct OutputPaths {
  fs::path dir;
  fs::path nodes() const { return dir / "graph.nodes.jsonl"; }
  fs::path edges() const { return dir / "graph.edges.jsonl"; }
  fs::path vocabulary() const { return dir / "graph.vocab.txt"; }
  fs::path embeddings(Stage s) const { return dir / ("embeddings." + std::string(to_string(s)) + ".vec"); }
  fs::path metadata(Stage s) const { return dir / ("embeddings." + std::string(to_string(s)) + ".json"); }
  fs::path retrofit_log() const { return dir / "retrofit.log"; }
  fs::path folds() const { return dir / "folds.json"; }
  fs::path report() const { return dir / "report.json"; }
};

// ---------------------------------------------------------------------------
// Loading helpers

inline ParallelCorpus load_filtered_corpus(const PipelineConfig& cfg) {
  auto in = detail::open_in(cfg.corpus);
  auto corpus = detail::with_path(cfg.corpus, [&] { return load_corpus(in); });
  return filter_min_count(corpus, cfg.min_tag_count);
}

inline LemmaTable load_lemmas(const PipelineConfig& cfg) {
  if (!cfg.lemmas) return {};
  auto in = detail::open_in(*cfg.lemmas);
  return detail::with_path(*cfg.lemmas, [&] { return load_lemma_table(in); });
}

/// Graph written by cmd_build_graph.
inline GenreGraph load_built_graph(const OutputPaths& out) {
  if (!fs::exists(out.nodes())) {
    throw Error(ErrorKind::not_found, "'" + out.nodes().string() + "' is missing; run build-graph first");
  }
  auto nodes = detail::open_in(out.nodes());
  auto edges = detail::open_in(out.edges());
  auto vocab = detail::open_in(out.vocabulary());
  return detail::with_path(out.dir, [&] { return load_graph(nodes, edges, {}, &vocab); });
}

inline void save_embeddings(const OutputPaths& out, Stage stage, const ConceptEmbeddingMatrix& m,
                            nlohmann::json metadata) {
  auto vec = detail::open_out(out.embeddings(stage));
  write_vectors(vec, m.concepts(), m.vectors());
  std::vector<std::string> unknown;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (!m.known(i)) unknown.push_back(m.concepts()[i]);
  }
  metadata["unknown"] = unknown;
  auto meta = detail::open_out(out.metadata(stage));
  meta << metadata.dump(2) << '\n';
}

inline ConceptEmbeddingMatrix load_embeddings(const OutputPaths& out, Stage stage) {
  const auto path = out.embeddings(stage);
  if (!fs::exists(path)) {
    throw Error(ErrorKind::not_found, "'" + path.string() + "' is missing; run " +
                                          (stage == Stage::initial ? "embed" : "retrofit") + " first");
  }
  auto in = detail::open_in(path);
  auto rows = detail::with_path(path, [&] { return read_keyed_rows(in); });
  auto meta_in = detail::open_in(out.metadata(stage));
  std::set<std::string> unknown;
  try {
    const auto meta = nlohmann::json::parse(meta_in);
    for (const auto& id : meta.at("unknown")) unknown.insert(id.get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::parse, out.metadata(stage).string() + ": " + e.what());
  }
  std::vector<bool> known(rows.keys.size());
  for (std::size_t i = 0; i < rows.keys.size(); ++i) known[i] = !unknown.contains(rows.keys[i]);
  return {std::move(rows.keys), std::move(rows.rows), std::move(known)};
}

/// Word vectors for each language in use, restricted to the given words.
inline std::map<std::string, WordVectorStore> load_word_vectors(
    const PipelineConfig& cfg, const std::map<std::string, std::unordered_set<std::string>>& words) {
  std::map<std::string, WordVectorStore> stores;
  for (const auto& [lang, needed] : words) {
    auto it = cfg.vectors.find(lang);
    if (it == cfg.vectors.end()) {
      throw Error(ErrorKind::not_found, "no vector file configured for language '" + lang + "'");
    }
    auto in = detail::open_in(it->second);
    stores.emplace(lang, detail::with_path(it->second, [&] {
                     return load_vectors(in, VectorLoadOptions{cfg.vector_limit, needed});
                   }));
  }
  return stores;
}

// ---------------------------------------------------------------------------
// Scorers

/// Cosine scorer over fixed embeddings, equivalent to translate() with the
/// sum or avg scorer. Per-source cosine rows are cached.
class EmbeddingScorer {
 public:
  EmbeddingScorer(const ConceptEmbeddingMatrix& embeddings, ScorerKind kind)
      : embeddings_(&embeddings), kind_(kind) {
    if (kind == ScorerKind::baseline) {
      throw Error(ErrorKind::invalid_argument, "EmbeddingScorer cannot run the baseline");
    }
  }

  std::vector<double> operator()(const CorpusItem&, std::span<const std::string> sources,
                                  std::span<const std::string> targets) const {
    std::vector<double> scores(targets.size(), 0.0);
    std::size_t kept = 0;
    for (const auto& src : sources) {
      const auto* row = cosines(src, targets);
      if (row == nullptr) continue;
      ++kept;
      for (std::size_t t = 0; t < targets.size(); ++t) scores[t] += (*row)[t];
    }
    if (kind_ == ScorerKind::avg && kept > 0) {
      for (double& s : scores) s /= static_cast<double>(kept);
    }
    return scores;
  }

 private:
  // nullptr when the source embedding is unknown.
  const std::vector<double>* cosines(const std::string& src, std::span<const std::string> targets) const {
    std::lock_guard lock(mutex_);
    auto it = cache_.find(src);
    if (it != cache_.end()) return it->second ? &*it->second : nullptr;
    const auto i = embeddings_->index_of(src);
    if (!i) throw Error(ErrorKind::not_found, "unresolvable source tag '" + src + "'");
    std::optional<std::vector<double>> row;
    if (embeddings_->known(*i) && !is_zero(embeddings_->row(*i))) {
      row.emplace();
      row->reserve(targets.size());
      for (const auto& t : targets) row->push_back(cosine(embeddings_->row(*i), embeddings_->vector_of(t)));
    }
    auto& slot = cache_[src] = std::move(row);
    return slot ? &*slot : nullptr;
  }

  const ConceptEmbeddingMatrix* embeddings_;
  ScorerKind kind_;
  mutable std::mutex mutex_;
  mutable std::unordered_map<std::string, std::optional<std::vector<double>>> cache_;
};

/// Shortest-path baseline with per-source BFS caching.
class BaselineScorer {
 public:
  explicit BaselineScorer(const GenreGraph& g) : graph_(&g) {}

  std::vector<double> operator()(const CorpusItem&, std::span<const std::string> sources,
                                 std::span<const std::string> targets) const {
    std::vector<double> scores(targets.size(), 0.0);
    for (const auto& src : sources) {
      const auto& row = similarities(src, targets);
      for (std::size_t t = 0; t < targets.size(); ++t) scores[t] += row[t];
    }
    for (double& s : scores) s /= static_cast<double>(sources.size());
    return scores;
  }

 private:
  const std::vector<double>& similarities(const std::string& src,
                                          std::span<const std::string> targets) const {
    std::lock_guard lock(mutex_);
    auto it = cache_.find(src);
    if (it != cache_.end()) return it->second;
    const auto dist = hop_distances(*graph_, src);
    std::vector<double> row;
    row.reserve(targets.size());
    for (const auto& t : targets) {
      auto d = dist.find(t);
      row.push_back(path_similarity(d == dist.end() ? std::nullopt
                                                    : std::optional<std::size_t>(d->second)));
    }
    return cache_[src] = std::move(row);
  }

  const GenreGraph* graph_;
  mutable std::mutex mutex_;
  mutable std::unordered_map<std::string, std::vector<double>> cache_;
};

// ---------------------------------------------------------------------------
// Commands

struct BuildGraphSummary {
  std::size_t loaded_nodes = 0;
  std::size_t kept_nodes = 0;
  std::size_t final_nodes = 0;
  std::size_t final_edges = 0;
  std::map<std::string, std::size_t> nodes_per_language;
};

/// Load the knowledge graph, keep the components holding a high-confidence
/// genre, attach the corpus tags of every configured tag system and write
/// the merged graph. Without an explicit high-confidence list, the
/// knowledge-graph nodes matching some corpus tag are high-confidence.
inline BuildGraphSummary cmd_build_graph(const PipelineConfig& cfg, std::ostream& log) {
  const OutputPaths out{cfg.output_dir};
  const auto lemmas = load_lemmas(cfg);
  auto nodes_in = detail::open_in(cfg.graph_nodes);
  auto edges_in = detail::open_in(cfg.graph_edges);
  GenreGraph graph = detail::with_path(cfg.graph_nodes, [&] { return load_graph(nodes_in, edges_in, lemmas); });
  BuildGraphSummary summary;
  summary.loaded_nodes = graph.node_count();

  const auto corpus = load_filtered_corpus(cfg);
  std::map<std::string, std::vector<std::string>> tags_by_system;
  for (const auto& [system, lang] : cfg.tag_systems) tags_by_system[system] = corpus.tags_of(system);

  std::set<std::string> high_confidence;
  if (cfg.high_confidence) {
    auto in = detail::open_in(*cfg.high_confidence);
    detail::for_each_line(in, [&](const std::string& line, std::size_t) { high_confidence.insert(line); });
  } else {
    std::set<std::pair<std::string, std::vector<std::string>>> wanted;
    for (const auto& [system, tags] : tags_by_system) {
      const auto& lang = cfg.tag_systems.at(system);
      for (const auto& t : tags) wanted.emplace(lang, normalize_tag(t, graph.vocabulary()));
    }
    for (const auto& [id, node] : graph.nodes()) {
      if (wanted.contains({node.language, node.tokens})) high_confidence.insert(id);
    }
  }
  graph = filter_graph(graph, high_confidence);
  summary.kept_nodes = graph.node_count();

  for (const auto& [system, tags] : tags_by_system) {
    graph = attach_tag_system(graph, system, cfg.tag_systems.at(system), tags);
  }
  summary.final_nodes = graph.node_count();
  summary.final_edges = graph.edge_count();
  for (const auto& [id, node] : graph.nodes()) {
    if (node.system.empty()) ++summary.nodes_per_language[node.language];
  }

  auto nodes_out = detail::open_out(out.nodes());
  auto edges_out = detail::open_out(out.edges());
  auto vocab_out = detail::open_out(out.vocabulary());
  save_graph(graph, nodes_out, edges_out, vocab_out);
  log << "build-graph: loaded " << summary.loaded_nodes << " nodes, kept " << summary.kept_nodes
      << " after filtering, wrote " << summary.final_nodes << " nodes and " << summary.final_edges
      << " edges\n";
  return summary;
}

/// Compose initial embeddings for every graph node.
inline ConceptEmbeddingMatrix cmd_embed(const PipelineConfig& cfg, std::ostream& log) {
  const OutputPaths out{cfg.output_dir};
  const GenreGraph graph = load_built_graph(out);
  std::map<std::string, std::unordered_set<std::string>> words;
  for (const auto& [id, node] : graph.nodes()) {
    auto& w = words[node.language];
    for (const auto& t : node.tokens) w.insert(t);
  }
  const auto stores = load_word_vectors(cfg, words);
  std::vector<ConceptSpec> specs;
  specs.reserve(graph.node_count());
  for (const auto& [id, node] : graph.nodes()) specs.push_back({id, node.tokens, &stores.at(node.language)});

  nlohmann::json meta = {{"composition", to_string(cfg.composition)}};
  ConceptEmbeddingMatrix embeddings;
  if (cfg.composition == Composition::avg) {
    embeddings = compose_avg(specs);
  } else {
    auto sif = compose_sif_detailed(specs, cfg.sif_a);
    meta["sif_a"] = cfg.sif_a;
    meta["common_direction"] = sif.common_direction;
    embeddings = std::move(sif.embeddings);
  }
  std::size_t known = 0;
  for (std::size_t i = 0; i < embeddings.size(); ++i) known += embeddings.known(i) ? 1 : 0;
  if (known == 0) throw Error(ErrorKind::invalid_argument, "no graph node has a known word vector");
  save_embeddings(out, Stage::initial, embeddings, meta);
  log << "embed: " << to_string(cfg.composition) << " composition, " << known << "/" << embeddings.size()
      << " concepts known\n";
  return embeddings;
}

inline RetrofitConfig retrofit_config(const PipelineConfig& cfg) {
  RetrofitConfig rc;
  rc.scheme = cfg.scheme;
  rc.alpha_known = cfg.alpha_known;
  rc.alpha_unknown = cfg.alpha_unknown;
  rc.tolerance = cfg.tolerance;
  rc.max_iters = cfg.max_iters;
  rc.isolated = IsolatedPolicy::keep_zero;
  rc.threads = cfg.threads;
  return rc;
}

/// Retrofit the initial embeddings to the built graph. The convergence
/// trace goes to retrofit.log (and to `log` when verbose).
inline RetrofitResult cmd_retrofit(const PipelineConfig& cfg, std::ostream& log) {
  const OutputPaths out{cfg.output_dir};
  const GenreGraph graph = load_built_graph(out);
  const auto initial = load_embeddings(out, Stage::initial);
  auto trace = detail::open_out(out.retrofit_log());
  trace << "iteration\tdelta\tobjective\n";
  auto rc = retrofit_config(cfg);
  rc.on_iteration = [&](const IterationTrace& t) {
    std::string line = std::to_string(t.iteration) + "\t";
    detail::append_number(line, t.delta);
    line += '\t';
    detail::append_number(line, t.objective);
    trace << line << '\n';
    if (cfg.verbose) log << "retrofit: " << line << '\n';
  };
  auto result = retrofit(initial, graph, rc);
  nlohmann::json meta = {{"scheme", to_string(cfg.scheme)},
                         {"alpha_known", cfg.alpha_known},
                         {"alpha_unknown", cfg.alpha_unknown},
                         {"tolerance", cfg.tolerance},
                         {"max_iters", cfg.max_iters},
                         {"iterations", result.iterations},
                         {"final_delta", result.final_delta},
                         {"converged", result.converged},
                         {"isolated", result.isolated},
                         {"unanchored", result.unanchored}};
  save_embeddings(out, Stage::retrofitted, result.embeddings, meta);
  log << "retrofit: " << to_string(cfg.scheme) << " scheme, " << result.iterations << " iterations, delta "
      << result.final_delta << (result.converged ? "" : " (not converged)") << '\n';
  if (!result.isolated.empty()) {
    log << "warning: " << result.isolated.size() << " isolated unknown concepts left at zero\n";
  }
  if (!result.unanchored.empty()) {
    log << "warning: " << result.unanchored.size() << " concepts in components without a known concept\n";
  }
  return result;
}

/// Target ids of a tag system in the built graph.
inline std::vector<std::string> system_targets(const GenreGraph& g, const std::string& system) {
  std::vector<std::string> targets;
  for (const auto& [id, node] : g.nodes()) {
    if (node.system == system) targets.push_back(id);
  }
  if (targets.empty()) {
    throw Error(ErrorKind::not_found, "tag system '" + system + "' has no tags in the graph");
  }
  return targets;
}

/// Rank the tags of `target_system` for the given source node ids and print
/// "rank<TAB>score<TAB>id" lines. Unknown source ids are dropped with a
/// warning.
inline TranslationResult cmd_translate(const PipelineConfig& cfg, const std::vector<std::string>& sources,
                                       const std::string& target_system, std::ostream& out,
                                       std::ostream& log) {
  const OutputPaths paths{cfg.output_dir};
  const GenreGraph graph = load_built_graph(paths);
  const auto targets = system_targets(graph, target_system);
  std::vector<std::string> resolved;
  for (const auto& s : sources) {
    if (graph.contains(s)) {
      resolved.push_back(s);
    } else {
      log << "warning: unknown source tag '" << s << "' ignored\n";
    }
  }
  TranslationResult result;
  if (resolved.empty()) {
    log << "warning: no source tag could be resolved; all scores are 0\n";
    for (const auto& t : targets) result.target_scores[t] = 0.0;
    result.ranking = targets;
  } else if (cfg.scorer == ScorerKind::baseline) {
    result = translate_baseline(resolved, targets, graph);
  } else {
    const auto embeddings = load_embeddings(paths, cfg.stage);
    result = translate(resolved, targets, embeddings, cfg.scorer);
    for (const auto& d : result.dropped_sources) {
      log << "warning: source tag '" << d << "' has no embedding and was ignored\n";
    }
  }
  for (std::size_t r = 0; r < result.ranking.size(); ++r) {
    std::string line = std::to_string(r + 1) + "\t";
    detail::append_number(line, result.target_scores.at(result.ranking[r]));
    line += '\t' + result.ranking[r] + '\n';
    out << line;
  }
  return result;
}

/// Stratified k-fold evaluation of the configured target/source systems.
/// Writes folds.json and report.json and prints a table to `out`.
inline EvalReport cmd_evaluate(const PipelineConfig& cfg, std::ostream& out, std::ostream& log) {
  if (cfg.target.empty() || cfg.sources.empty()) {
    throw Error(ErrorKind::invalid_argument, "evaluate needs a target system and source systems");
  }
  const OutputPaths paths{cfg.output_dir};
  const auto corpus = load_filtered_corpus(cfg);
  const GenreGraph graph = load_built_graph(paths);
  for (const auto& system : cfg.sources) system_targets(graph, system);
  system_targets(graph, cfg.target);

  const auto folds = stratified_split(corpus, cfg.folds, cfg.seed);
  {
    nlohmann::json j = {{"k", folds.k()}, {"seed", cfg.seed}, {"folds", folds.folds()}};
    auto f = detail::open_out(paths.folds());
    f << j.dump(2) << '\n';
  }

  EvalReport report;
  if (cfg.scorer == ScorerKind::baseline) {
    BaselineScorer scorer(graph);
    report = evaluate(corpus, folds, cfg.target, cfg.sources, std::cref(scorer), cfg.threads);
  } else {
    const auto embeddings = load_embeddings(paths, cfg.stage);
    EmbeddingScorer scorer(embeddings, cfg.scorer);
    report = evaluate(corpus, folds, cfg.target, cfg.sources, std::cref(scorer), cfg.threads);
  }
  auto j = to_json(report);
  j["scorer"] = to_string(cfg.scorer);
  if (cfg.scorer != ScorerKind::baseline) j["embeddings"] = to_string(cfg.stage);
  j["seed"] = cfg.seed;
  auto f = detail::open_out(paths.report());
  f << j.dump(2) << '\n';
  print_table(out, report);
  std::size_t excluded = 0;
  for (const auto& fr : report.folds) excluded += fr.excluded_tags;
  if (excluded > 0) log << "evaluate: " << excluded << " (tag, fold) pairs excluded for lack of positives or negatives\n";
  return report;
}

}  // namespace genremb

#pragma once

// Multilingual music genre graph with typed edges, tag normalization with
// prefix-tree splitting of concatenated genre words, component filtering
// and shortest-path relatedness.

#include <algorithm>
#include <cstddef>
#include <deque>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "json.hpp"

#include "genremb/error.hpp"
#include "genremb/text.hpp"

namespace genremb {

enum class Relation {
  same_as,
  wiki_page_redirects,
  stylistic_origin,
  music_subgenre,
  derivative,
  music_fusion_genre,
};

inline constexpr std::string_view kRelationNames[] = {
    "sameAs",        "wikiPageRedirects", "stylisticOrigin",
    "musicSubgenre", "derivative",        "musicFusionGenre",
};

inline std::string_view to_string(Relation r) {
  return kRelationNames[static_cast<std::size_t>(r)];
}

inline std::optional<Relation> parse_relation(std::string_view name) {
  for (std::size_t i = 0; i < std::size(kRelationNames); ++i) {
    if (kRelationNames[i] == name) return static_cast<Relation>(i);
  }
  return std::nullopt;
}

/// Equivalence relations (sameAs, wikiPageRedirects); the rest express
/// relatedness without equivalence.
inline bool is_equivalence(Relation r) {
  return r == Relation::same_as || r == Relation::wiki_page_redirects;
}

// ---------------------------------------------------------------------------
// Tag normalization

/// Byte-level prefix tree over a word vocabulary. Used to split concatenated
/// genre words ("sludgemetal") into vocabulary words.
class PrefixTree {
 public:
  PrefixTree() { nodes_.emplace_back(); }

  template <typename Range>
  explicit PrefixTree(const Range& words) : PrefixTree() {
    for (const auto& w : words) insert(w);
  }

  void insert(std::string_view word) {
    if (word.empty()) return;
    std::size_t at = 0;
    for (char c : word) {
      auto it = nodes_[at].children.find(c);
      if (it == nodes_[at].children.end()) {
        nodes_.emplace_back();
        it = nodes_[at].children.emplace(c, nodes_.size() - 1).first;
      }
      at = it->second;
    }
    if (!nodes_[at].terminal) ++words_;
    nodes_[at].terminal = true;
  }

  bool contains(std::string_view word) const {
    std::size_t at = 0;
    for (char c : word) {
      auto it = nodes_[at].children.find(c);
      if (it == nodes_[at].children.end()) return false;
      at = it->second;
    }
    return !word.empty() && nodes_[at].terminal;
  }

  std::size_t size() const noexcept { return words_; }

  /// All words in byte-lexicographic order.
  std::vector<std::string> words() const {
    std::vector<std::string> out;
    std::string prefix;
    collect(0, prefix, out);
    return out;
  }

  /// Lengths of every vocabulary word that is a prefix of s, ascending.
  std::vector<std::size_t> prefix_lengths(std::string_view s) const {
    std::vector<std::size_t> out;
    std::size_t at = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      auto it = nodes_[at].children.find(s[i]);
      if (it == nodes_[at].children.end()) break;
      at = it->second;
      if (nodes_[at].terminal) out.push_back(i + 1);
    }
    return out;
  }

  /// Decompose `token` into vocabulary words, trying the longest prefix
  /// first and backtracking. Returns nullopt when no full decomposition
  /// exists.
  std::optional<std::vector<std::string>> decompose(std::string_view token) const {
    std::vector<std::string> pieces;
    std::vector<bool> dead(token.size() + 1, false);
    if (decompose_from(token, 0, pieces, dead)) return pieces;
    return std::nullopt;
  }

 private:
  struct Node {
    std::map<char, std::size_t> children;
    bool terminal = false;
  };

  void collect(std::size_t at, std::string& prefix, std::vector<std::string>& out) const {
    if (nodes_[at].terminal) out.push_back(prefix);
    for (const auto& [c, child] : nodes_[at].children) {
      prefix.push_back(c);
      collect(child, prefix, out);
      prefix.pop_back();
    }
  }

  bool decompose_from(std::string_view token, std::size_t pos,
                      std::vector<std::string>& pieces,
                      std::vector<bool>& dead) const {
    if (pos == token.size()) return true;
    if (dead[pos]) return false;
    const auto lengths = prefix_lengths(token.substr(pos));
    for (auto it = lengths.rbegin(); it != lengths.rend(); ++it) {
      pieces.emplace_back(token.substr(pos, *it));
      if (decompose_from(token, pos + *it, pieces, dead)) return true;
      pieces.pop_back();
    }
    dead[pos] = true;
    return false;
  }

  std::vector<Node> nodes_;
  std::size_t words_ = 0;
};

/// Fold (NFC + lowercase), split on non-alphanumeric runs, then split each
/// token that is not itself a vocabulary word into vocabulary words when a
/// full decomposition exists.
inline std::vector<std::string> normalize_tag(std::string_view raw,
                                              const PrefixTree& vocabulary) {
  if (raw.empty()) {
    throw Error(ErrorKind::invalid_argument, "empty tag");
  }
  std::vector<std::string> out;
  for (auto& token : text::split_alnum(text::fold(raw))) {
    if (vocabulary.contains(token)) {
      out.push_back(std::move(token));
      continue;
    }
    if (auto pieces = vocabulary.decompose(token)) {
      for (auto& p : *pieces) out.push_back(std::move(p));
    } else {
      out.push_back(std::move(token));
    }
  }
  if (out.empty()) {
    throw Error(ErrorKind::invalid_argument,
                "tag '" + std::string(raw) + "' has no alphanumeric tokens");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Graph

struct GenreNode {
  std::string id;
  std::string language;
  std::string raw_label;
  std::vector<std::string> tokens;
  // Tag system a node was attached from; empty for knowledge-graph nodes.
  std::string system;

  bool operator==(const GenreNode&) const = default;
};

struct GenreEdge {
  std::string src;
  std::string dst;
  Relation relation;

  bool operator==(const GenreEdge&) const = default;
};

using LemmaTable = std::unordered_map<std::string, std::string>;

/// Nodes keyed and iterated by id (sorted), typed directed edges without
/// exact duplicates, and an undirected adjacency view.
class GenreGraph {
 public:
  GenreGraph() = default;
  explicit GenreGraph(PrefixTree vocabulary) : vocabulary_(std::move(vocabulary)) {}

  const PrefixTree& vocabulary() const noexcept { return vocabulary_; }

  void add_node(GenreNode node) {
    if (node.tokens.empty()) {
      throw Error(ErrorKind::invalid_argument, "node '" + node.id + "' has no tokens");
    }
    const std::string id = node.id;
    if (!nodes_.emplace(id, std::move(node)).second) {
      throw Error(ErrorKind::invalid_argument, "duplicate node id '" + id + "'");
    }
    adjacency_[id];
  }

  /// Returns false when the exact (src, dst, relation) edge already exists.
  bool add_edge(GenreEdge edge) {
    if (edge.src == edge.dst) {
      throw Error(ErrorKind::invalid_argument, "self-loop on '" + edge.src + "'");
    }
    for (const auto* id : {&edge.src, &edge.dst}) {
      if (!contains(*id)) {
        throw Error(ErrorKind::not_found, "edge references missing node '" + *id + "'");
      }
    }
    if (!edge_keys_.emplace(edge.src, edge.dst, edge.relation).second) return false;
    adjacency_[edge.src].insert(edge.dst);
    adjacency_[edge.dst].insert(edge.src);
    edges_.push_back(std::move(edge));
    return true;
  }

  bool contains(const std::string& id) const { return nodes_.contains(id); }

  const GenreNode& node(const std::string& id) const {
    auto it = nodes_.find(id);
    if (it == nodes_.end()) throw Error(ErrorKind::not_found, "unknown node '" + id + "'");
    return it->second;
  }

  const std::map<std::string, GenreNode>& nodes() const noexcept { return nodes_; }
  const std::vector<GenreEdge>& edges() const noexcept { return edges_; }

  const std::set<std::string>& neighbors(const std::string& id) const {
    auto it = adjacency_.find(id);
    if (it == adjacency_.end()) throw Error(ErrorKind::not_found, "unknown node '" + id + "'");
    return it->second;
  }

  std::size_t degree(const std::string& id) const { return neighbors(id).size(); }

  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }

  std::vector<std::string> node_ids() const {
    std::vector<std::string> ids;
    ids.reserve(nodes_.size());
    for (const auto& [id, _] : nodes_) ids.push_back(id);
    return ids;
  }

  /// Connected components of the undirected view; each sorted by id,
  /// components ordered by their smallest id.
  std::vector<std::vector<std::string>> components() const {
    std::vector<std::vector<std::string>> out;
    std::unordered_set<std::string> seen;
    for (const auto& [id, _] : nodes_) {
      if (seen.contains(id)) continue;
      std::vector<std::string> comp;
      std::deque<std::string> queue{id};
      seen.insert(id);
      while (!queue.empty()) {
        std::string at = std::move(queue.front());
        queue.pop_front();
        for (const auto& next : adjacency_.at(at)) {
          if (seen.insert(next).second) queue.push_back(next);
        }
        comp.push_back(std::move(at));
      }
      std::sort(comp.begin(), comp.end());
      out.push_back(std::move(comp));
    }
    return out;
  }

  bool operator==(const GenreGraph& other) const {
    return nodes_ == other.nodes_ && edges_ == other.edges_;
  }

 private:
  PrefixTree vocabulary_;
  std::map<std::string, GenreNode> nodes_;
  std::vector<GenreEdge> edges_;
  std::set<std::tuple<std::string, std::string, Relation>> edge_keys_;
  std::map<std::string, std::set<std::string>> adjacency_;
};

// ---------------------------------------------------------------------------
// File formats

/// UTF-8 TSV "word<TAB>lemma". Blank lines are skipped.
inline LemmaTable load_lemma_table(std::istream& in) {
  LemmaTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size()) {
      throw Error(ErrorKind::parse, "expected 'word<TAB>lemma'", line_no);
    }
    table[text::fold(line.substr(0, tab))] = text::fold(line.substr(tab + 1));
  }
  return table;
}

/// Splitting vocabulary: lemmas of every word in the labels of
/// knowledge-graph nodes (tag-system nodes are excluded).
inline PrefixTree build_vocabulary(std::span<const std::string> labels,
                                   const LemmaTable& lemmas) {
  PrefixTree tree;
  for (const auto& label : labels) {
    for (const auto& word : text::split_alnum(text::fold(label))) {
      auto it = lemmas.find(word);
      tree.insert(it == lemmas.end() ? word : it->second);
    }
  }
  return tree;
}

namespace detail {

struct NodeRecord {
  std::string id, lang, label, system;
  std::size_t line;
};

inline nlohmann::json parse_json_line(const std::string& line, std::size_t line_no) {
  try {
    auto j = nlohmann::json::parse(line);
    if (!j.is_object()) throw Error(ErrorKind::parse, "expected a JSON object", line_no);
    return j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::parse, e.what(), line_no);
  }
}

inline std::string string_field(const nlohmann::json& j, const char* key,
                                std::size_t line_no, bool required = true) {
  auto it = j.find(key);
  if (it == j.end()) {
    if (!required) return {};
    throw Error(ErrorKind::parse, std::string("missing field '") + key + "'", line_no);
  }
  if (!it->is_string() || it->get_ref<const std::string&>().empty()) {
    throw Error(ErrorKind::parse, std::string("field '") + key + "' must be a nonempty string",
                line_no);
  }
  return it->get<std::string>();
}

template <typename F>
void for_each_line(std::istream& in, F&& f) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    f(line, line_no);
  }
}

}  // namespace detail

/// Load nodes and edges from JSON-lines streams.
///
///   nodes: {"id": str, "lang": str, "label": str[, "system": str]}
///   edges: {"src": str, "dst": str, "rel": relation name}
///
/// The splitting vocabulary is either read from `vocabulary_in` (one word
/// per line, as written by save_graph) or built from the lemma-mapped words
/// of all nodes without a "system" field. Every label is then normalized
/// against it.
inline GenreGraph load_graph(std::istream& nodes_in, std::istream& edges_in,
                             const LemmaTable& lemmas,
                             std::istream* vocabulary_in = nullptr) {
  std::vector<detail::NodeRecord> records;
  std::unordered_set<std::string> ids;
  detail::for_each_line(nodes_in, [&](const std::string& line, std::size_t line_no) {
    auto j = detail::parse_json_line(line, line_no);
    detail::NodeRecord r{detail::string_field(j, "id", line_no),
                         detail::string_field(j, "lang", line_no),
                         detail::string_field(j, "label", line_no),
                         detail::string_field(j, "system", line_no, false), line_no};
    if (!ids.insert(r.id).second) {
      throw Error(ErrorKind::parse, "duplicate node id '" + r.id + "'", line_no);
    }
    records.push_back(std::move(r));
  });

  PrefixTree vocabulary;
  if (vocabulary_in != nullptr) {
    detail::for_each_line(*vocabulary_in, [&](const std::string& line, std::size_t) {
      vocabulary.insert(text::fold(line));
    });
  } else {
    std::vector<std::string> labels;
    for (const auto& r : records) {
      if (r.system.empty()) labels.push_back(r.label);
    }
    vocabulary = build_vocabulary(labels, lemmas);
  }

  GenreGraph graph(std::move(vocabulary));
  for (auto& r : records) {
    std::vector<std::string> tokens;
    try {
      tokens = normalize_tag(r.label, graph.vocabulary());
    } catch (const Error& e) {
      throw Error(ErrorKind::parse, e.message(), r.line);
    }
    graph.add_node({std::move(r.id), std::move(r.lang), std::move(r.label),
                    std::move(tokens), std::move(r.system)});
  }

  detail::for_each_line(edges_in, [&](const std::string& line, std::size_t line_no) {
    auto j = detail::parse_json_line(line, line_no);
    auto src = detail::string_field(j, "src", line_no);
    auto dst = detail::string_field(j, "dst", line_no);
    auto rel_name = detail::string_field(j, "rel", line_no);
    auto rel = parse_relation(rel_name);
    if (!rel) throw Error(ErrorKind::parse, "unknown relation '" + rel_name + "'", line_no);
    try {
      graph.add_edge({std::move(src), std::move(dst), *rel});
    } catch (const Error& e) {
      throw Error(ErrorKind::parse, e.message(), line_no);
    }
  });
  return graph;
}

/// Write the graph in the load_graph formats plus the splitting vocabulary,
/// so that load_graph(nodes, edges, {}, &vocabulary) reproduces it exactly.
inline void save_graph(const GenreGraph& g, std::ostream& nodes_out,
                       std::ostream& edges_out, std::ostream& vocabulary_out) {
  for (const auto& [id, node] : g.nodes()) {
    nlohmann::json j = {{"id", node.id}, {"lang", node.language}, {"label", node.raw_label}};
    if (!node.system.empty()) j["system"] = node.system;
    nodes_out << j.dump() << '\n';
  }
  for (const auto& e : g.edges()) {
    nlohmann::json j = {{"src", e.src}, {"dst", e.dst}, {"rel", to_string(e.relation)}};
    edges_out << j.dump() << '\n';
  }
  for (const auto& w : g.vocabulary().words()) vocabulary_out << w << '\n';
}

// ---------------------------------------------------------------------------
// Operations

/// Keep exactly the connected components that contain at least one
/// high-confidence node. The vocabulary is kept unchanged.
inline GenreGraph filter_graph(const GenreGraph& g,
                               const std::set<std::string>& high_confidence) {
  std::unordered_set<std::string> keep;
  for (const auto& comp : g.components()) {
    const bool hit = std::any_of(comp.begin(), comp.end(), [&](const std::string& id) {
      return high_confidence.contains(id);
    });
    if (hit) keep.insert(comp.begin(), comp.end());
  }
  GenreGraph out(g.vocabulary());
  for (const auto& [id, node] : g.nodes()) {
    if (keep.contains(id)) out.add_node(node);
  }
  for (const auto& e : g.edges()) {
    if (keep.contains(e.src)) out.add_edge(e);
  }
  return out;
}

inline std::string tag_node_id(std::string_view system, std::string_view tag) {
  std::string id(system);
  id += ':';
  id += tag;
  return id;
}

/// Add each tag as a node "<system>:<tag>" normalized against the graph
/// vocabulary. A tag whose tokens equal those of an existing node of the
/// same language gets a sameAs edge to every such node.
inline GenreGraph attach_tag_system(const GenreGraph& g, const std::string& system,
                                    const std::string& language,
                                    std::span<const std::string> tags) {
  GenreGraph out = g;
  std::map<std::vector<std::string>, std::vector<std::string>> by_tokens;
  for (const auto& [id, node] : g.nodes()) {
    if (node.language == language) by_tokens[node.tokens].push_back(id);
  }
  for (const auto& tag : tags) {
    const std::string id = tag_node_id(system, tag);
    if (out.contains(id)) continue;
    auto tokens = normalize_tag(tag, out.vocabulary());
    out.add_node({id, language, tag, tokens, system});
    if (auto it = by_tokens.find(tokens); it != by_tokens.end()) {
      for (const auto& target : it->second) out.add_edge({id, target, Relation::same_as});
    }
  }
  return out;
}

/// Hop counts from `source` to every reachable node (undirected, relation
/// types ignored).
inline std::unordered_map<std::string, std::size_t> hop_distances(const GenreGraph& g,
                                                                  const std::string& source) {
  std::unordered_map<std::string, std::size_t> dist;
  g.node(source);
  dist[source] = 0;
  std::deque<std::string> queue{source};
  while (!queue.empty()) {
    const std::string at = std::move(queue.front());
    queue.pop_front();
    const std::size_t next_dist = dist[at] + 1;
    for (const auto& next : g.neighbors(at)) {
      if (dist.emplace(next, next_dist).second) queue.push_back(next);
    }
  }
  return dist;
}

inline double path_similarity(std::optional<std::size_t> hops) {
  return hops ? 1.0 / (1.0 + static_cast<double>(*hops)) : 0.0;
}

/// 1 / (1 + L) for BFS hop count L; 0 when unreachable.
inline double shortest_path_similarity(const GenreGraph& g, const std::string& a,
                                       const std::string& b) {
  g.node(b);
  const auto dist = hop_distances(g, a);
  auto it = dist.find(b);
  return path_similarity(it == dist.end() ? std::nullopt
                                          : std::optional<std::size_t>(it->second));
}

}  // namespace genremb

#pragma once

// Scoring of target tags for a set of source tags by cosine similarity of
// their embeddings, or by shortest-path relatedness in the genre graph.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "genremb/compose.hpp"
#include "genremb/error.hpp"
#include "genremb/genregraph.hpp"
#include "genremb/linalg.hpp"

namespace genremb {

/// u.v / (|u| |v|); 0 when either vector is zero.
inline double cosine(std::span<const double> u, std::span<const double> v) {
  require_same_dim(u.size(), v.size());
  const double nu = norm2(u);
  const double nv = norm2(v);
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return std::clamp(dot(u, v) / (nu * nv), -1.0, 1.0);
}

/// Sum of cosines between every source and the target.
inline double score_sum(std::span<const std::span<const double>> sources,
                        std::span<const double> target) {
  if (sources.empty()) throw Error(ErrorKind::invalid_argument, "empty source set");
  double s = 0.0;
  for (const auto& src : sources) s += cosine(src, target);
  return s;
}

/// Mean cosine between the sources and the target.
inline double score_avg(std::span<const std::span<const double>> sources,
                        std::span<const double> target) {
  return score_sum(sources, target) / static_cast<double>(sources.size());
}

enum class ScorerKind { sum, avg, baseline };

inline std::string_view to_string(ScorerKind s) {
  switch (s) {
    case ScorerKind::sum: return "sum";
    case ScorerKind::avg: return "avg";
    case ScorerKind::baseline: return "baseline";
  }
  return "?";
}

inline std::optional<ScorerKind> parse_scorer(std::string_view s) {
  if (s == "sum") return ScorerKind::sum;
  if (s == "avg") return ScorerKind::avg;
  if (s == "baseline") return ScorerKind::baseline;
  return std::nullopt;
}

struct TranslationResult {
  std::map<std::string, double> target_scores;
  // Targets by descending score, ties by ascending id.
  std::vector<std::string> ranking;
  // Sources dropped because their embedding is unknown.
  std::vector<std::string> dropped_sources;
};

namespace detail {

inline void require_sources(std::span<const std::string> sources) {
  if (sources.empty()) throw Error(ErrorKind::invalid_argument, "empty source set");
}

inline std::vector<std::string> rank_targets(const std::map<std::string, double>& scores) {
  std::vector<std::string> ranking;
  ranking.reserve(scores.size());
  for (const auto& [id, _] : scores) ranking.push_back(id);
  std::stable_sort(ranking.begin(), ranking.end(), [&](const auto& a, const auto& b) {
    return scores.at(a) > scores.at(b);
  });
  return ranking;
}

}  // namespace detail

/// Score every target tag against the source tags with the cosine scorers.
/// Ids missing from the embeddings are an error; sources whose embedding
/// is unknown (never composed nor reached by retrofitting) are dropped, and
/// every target scores 0 when all of them are.
inline TranslationResult translate(std::span<const std::string> sources,
                                   std::span<const std::string> targets,
                                   const ConceptEmbeddingMatrix& embeddings,
                                   ScorerKind scorer) {
  if (scorer == ScorerKind::baseline) {
    throw Error(ErrorKind::invalid_argument, "baseline scorer needs the genre graph");
  }
  detail::require_sources(sources);
  TranslationResult result;
  std::vector<std::span<const double>> kept;
  for (const auto& id : sources) {
    const auto i = embeddings.index_of(id);
    if (!i) throw Error(ErrorKind::not_found, "unresolvable source tag '" + id + "'");
    if (!embeddings.known(*i) || is_zero(embeddings.row(*i))) {
      result.dropped_sources.push_back(id);
      continue;
    }
    kept.push_back(embeddings.row(*i));
  }
  for (const auto& id : targets) {
    const auto target = embeddings.vector_of(id);
    double score = 0.0;
    if (!kept.empty()) {
      score = scorer == ScorerKind::sum ? score_sum(kept, target) : score_avg(kept, target);
    }
    result.target_scores[id] = score;
  }
  result.ranking = detail::rank_targets(result.target_scores);
  return result;
}

/// Baseline: mean over sources of 1 / (1 + shortest path length).
inline TranslationResult translate_baseline(std::span<const std::string> sources,
                                            std::span<const std::string> targets,
                                            const GenreGraph& g) {
  detail::require_sources(sources);
  for (const auto& id : targets) g.node(id);
  TranslationResult result;
  for (const auto& id : targets) result.target_scores[id] = 0.0;
  for (const auto& src : sources) {
    const auto dist = hop_distances(g, src);
    for (auto& [id, score] : result.target_scores) {
      auto it = dist.find(id);
      score += path_similarity(it == dist.end() ? std::nullopt
                                                : std::optional<std::size_t>(it->second));
    }
  }
  for (auto& [id, score] : result.target_scores) score /= static_cast<double>(sources.size());
  result.ranking = detail::rank_targets(result.target_scores);
  return result;
}

}  // namespace genremb

#pragma once

// Evaluation of tag translation on a multi-label parallel corpus:
// iterative stratification into folds, Mann-Whitney AUC with tie
// correction, and macro-AUC per fold aggregated as mean and population
// standard deviation.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "genremb/error.hpp"
#include "genremb/genregraph.hpp"
#include "genremb/parallel.hpp"

namespace genremb {

// ---------------------------------------------------------------------------
// Corpus

struct CorpusItem {
  std::string id;
  // system name -> sorted, deduplicated tags
  std::map<std::string, std::vector<std::string>> annotations;

  const std::vector<std::string>& tags(const std::string& system) const {
    static const std::vector<std::string> none;
    auto it = annotations.find(system);
    return it == annotations.end() ? none : it->second;
  }
};

/// Items sorted by id; every item carries tags from at least two systems.
class ParallelCorpus {
 public:
  ParallelCorpus() = default;

  explicit ParallelCorpus(std::vector<CorpusItem> items) : items_(std::move(items)) {
    std::set<std::string> systems;
    for (auto& item : items_) {
      for (auto it = item.annotations.begin(); it != item.annotations.end();) {
        auto& tags = it->second;
        std::sort(tags.begin(), tags.end());
        tags.erase(std::unique(tags.begin(), tags.end()), tags.end());
        if (tags.empty()) {
          it = item.annotations.erase(it);
        } else {
          systems.insert(it->first);
          ++it;
        }
      }
      if (item.annotations.size() < 2) {
        throw Error(ErrorKind::invalid_argument,
                    "item '" + item.id + "' has tags from fewer than two systems");
      }
    }
    std::sort(items_.begin(), items_.end(),
              [](const CorpusItem& a, const CorpusItem& b) { return a.id < b.id; });
    for (std::size_t i = 1; i < items_.size(); ++i) {
      if (items_[i].id == items_[i - 1].id) {
        throw Error(ErrorKind::invalid_argument, "duplicate item id '" + items_[i].id + "'");
      }
    }
    systems_.assign(systems.begin(), systems.end());
  }

  const std::vector<CorpusItem>& items() const noexcept { return items_; }
  const std::vector<std::string>& systems() const noexcept { return systems_; }
  std::size_t size() const noexcept { return items_.size(); }

  /// Sorted distinct tags used by `system` across the corpus.
  std::vector<std::string> tags_of(const std::string& system) const {
    std::set<std::string> tags;
    for (const auto& item : items_) {
      const auto& t = item.tags(system);
      tags.insert(t.begin(), t.end());
    }
    return {tags.begin(), tags.end()};
  }

 private:
  std::vector<CorpusItem> items_;
  std::vector<std::string> systems_;
};

/// JSON-lines: {"id": str, "annotations": {"<system>": [str, ...], ...}}
inline ParallelCorpus load_corpus(std::istream& in) {
  std::vector<CorpusItem> items;
  detail::for_each_line(in, [&](const std::string& line, std::size_t line_no) {
    auto j = detail::parse_json_line(line, line_no);
    CorpusItem item;
    item.id = detail::string_field(j, "id", line_no);
    auto ann = j.find("annotations");
    if (ann == j.end() || !ann->is_object()) {
      throw Error(ErrorKind::parse, "missing object field 'annotations'", line_no);
    }
    for (const auto& [system, tags] : ann->items()) {
      if (!tags.is_array()) {
        throw Error(ErrorKind::parse, "annotations of '" + system + "' must be a list", line_no);
      }
      auto& out = item.annotations[system];
      for (const auto& t : tags) {
        if (!t.is_string() || t.get_ref<const std::string&>().empty()) {
          throw Error(ErrorKind::parse, "tags must be nonempty strings", line_no);
        }
        out.push_back(t.get<std::string>());
      }
    }
    items.push_back(std::move(item));
  });
  try {
    return ParallelCorpus(std::move(items));
  } catch (const Error& e) {
    throw Error(ErrorKind::parse, e.message());
  }
}

/// Drop (system, tag) pairs used by fewer than `min_count` items, then drop
/// items left with fewer than two annotated systems.
inline ParallelCorpus filter_min_count(const ParallelCorpus& corpus, std::size_t min_count) {
  std::map<std::pair<std::string, std::string>, std::size_t> counts;
  for (const auto& item : corpus.items()) {
    for (const auto& [system, tags] : item.annotations) {
      for (const auto& t : tags) ++counts[{system, t}];
    }
  }
  std::vector<CorpusItem> kept;
  for (const auto& item : corpus.items()) {
    CorpusItem out{item.id, {}};
    for (const auto& [system, tags] : item.annotations) {
      for (const auto& t : tags) {
        if (counts[{system, t}] >= min_count) out.annotations[system].push_back(t);
      }
    }
    if (out.annotations.size() >= 2) kept.push_back(std::move(out));
  }
  return ParallelCorpus(std::move(kept));
}

// ---------------------------------------------------------------------------
// Folds

class FoldAssignment {
 public:
  FoldAssignment() = default;
  FoldAssignment(int k, std::map<std::string, int> fold_of)
      : k_(k), fold_of_(std::move(fold_of)) {}

  int k() const noexcept { return k_; }
  int fold(const std::string& item_id) const {
    auto it = fold_of_.find(item_id);
    if (it == fold_of_.end()) throw Error(ErrorKind::not_found, "item '" + item_id + "' has no fold");
    return it->second;
  }
  const std::map<std::string, int>& folds() const noexcept { return fold_of_; }

  std::vector<std::size_t> fold_sizes() const {
    std::vector<std::size_t> sizes(static_cast<std::size_t>(k_), 0);
    for (const auto& [_, f] : fold_of_) ++sizes[static_cast<std::size_t>(f)];
    return sizes;
  }

  bool operator==(const FoldAssignment&) const = default;

 private:
  int k_ = 0;
  std::map<std::string, int> fold_of_;
};

/// Stratification labels of an item: "<system>\t<tag>" for every tag.
inline std::vector<std::string> item_labels(const CorpusItem& item) {
  std::vector<std::string> labels;
  for (const auto& [system, tags] : item.annotations) {
    for (const auto& t : tags) labels.push_back(system + '\t' + t);
  }
  return labels;
}

/// Iterative stratification for multi-label data. Repeatedly takes the
/// label with the fewest unassigned items and assigns each of those items
/// to the fold with the largest remaining demand for that label; ties go to
/// the fold with the largest remaining capacity, then to a seeded random
/// choice.
inline FoldAssignment stratified_split(const ParallelCorpus& corpus, int k, std::uint64_t seed) {
  if (k < 2) throw Error(ErrorKind::invalid_argument, "k must be >= 2");
  const std::size_t n = corpus.size();
  if (n == 0) throw Error(ErrorKind::invalid_argument, "empty corpus");
  if (static_cast<std::size_t>(k) > n) {
    throw Error(ErrorKind::invalid_argument,
                "k=" + std::to_string(k) + " exceeds the number of items (" + std::to_string(n) + ")");
  }
  const auto folds = static_cast<std::size_t>(k);

  // Label universe in sorted order; item -> label indices.
  std::map<std::string, std::size_t> label_index;
  std::vector<std::vector<std::size_t>> item_label_ids(n);
  for (const auto& item : corpus.items()) {
    for (auto& l : item_labels(item)) label_index.emplace(std::move(l), 0);
  }
  {
    std::size_t next = 0;
    for (auto& [_, idx] : label_index) idx = next++;
  }
  const std::size_t labels = label_index.size();
  std::vector<std::vector<std::size_t>> items_with(labels);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& l : item_labels(corpus.items()[i])) {
      const std::size_t id = label_index.at(l);
      item_label_ids[i].push_back(id);
      items_with[id].push_back(i);
    }
  }

  std::vector<double> capacity(folds, static_cast<double>(n) / static_cast<double>(k));
  std::vector<std::vector<double>> demand(labels, std::vector<double>(folds));
  std::vector<std::size_t> remaining(labels);
  for (std::size_t l = 0; l < labels; ++l) {
    remaining[l] = items_with[l].size();
    std::fill(demand[l].begin(), demand[l].end(),
              static_cast<double>(items_with[l].size()) / static_cast<double>(k));
  }

  std::mt19937_64 rng(seed);
  std::vector<int> fold_of(n, -1);
  std::size_t unassigned = n;

  auto pick = [&](std::vector<std::size_t> candidates) {
    if (candidates.size() == 1) return candidates.front();
    return candidates[static_cast<std::size_t>(rng() % candidates.size())];
  };
  auto argmax = [](const std::vector<std::size_t>& among, auto&& value) {
    std::vector<std::size_t> best;
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t j : among) {
      const double v = value(j);
      if (v > top) {
        top = v;
        best = {j};
      } else if (v == top) {
        best.push_back(j);
      }
    }
    return best;
  };
  std::vector<std::size_t> all_folds(folds);
  std::iota(all_folds.begin(), all_folds.end(), std::size_t{0});

  auto assign = [&](std::size_t item, std::size_t fold) {
    fold_of[item] = static_cast<int>(fold);
    --unassigned;
    capacity[fold] -= 1.0;
    for (std::size_t l : item_label_ids[item]) {
      demand[l][fold] -= 1.0;
      --remaining[l];
    }
  };

  while (unassigned > 0) {
    std::optional<std::size_t> rarest;
    for (std::size_t l = 0; l < labels; ++l) {
      if (remaining[l] == 0) continue;
      if (!rarest || remaining[l] < remaining[*rarest]) rarest = l;
    }
    if (!rarest) {
      // Items without labels balance fold sizes only.
      for (std::size_t i = 0; i < n; ++i) {
        if (fold_of[i] >= 0) continue;
        assign(i, pick(argmax(all_folds, [&](std::size_t j) { return capacity[j]; })));
      }
      break;
    }
    const std::size_t l = *rarest;
    for (std::size_t i : items_with[l]) {
      if (fold_of[i] >= 0) continue;
      auto best = argmax(all_folds, [&](std::size_t j) { return demand[l][j]; });
      best = argmax(best, [&](std::size_t j) { return capacity[j]; });
      assign(i, pick(std::move(best)));
    }
  }

  std::map<std::string, int> out;
  for (std::size_t i = 0; i < n; ++i) out.emplace(corpus.items()[i].id, fold_of[i]);
  return {k, std::move(out)};
}

// ---------------------------------------------------------------------------
// AUC

/// ROC AUC as the Mann-Whitney statistic with tie correction:
/// (#(pos, neg) pairs ranked correctly + half the tied pairs) / (P N).
inline double auc_binary(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw Error(ErrorKind::invalid_argument, "scores and labels differ in length");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::uint64_t positives = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) {
      throw Error(ErrorKind::invalid_argument, "labels must be 0 or 1");
    }
    if (std::isnan(scores[i])) throw Error(ErrorKind::invalid_argument, "NaN score");
    positives += static_cast<std::uint64_t>(labels[i]);
  }
  const std::uint64_t negatives = labels.size() - positives;
  if (positives == 0 || negatives == 0) {
    throw Error(ErrorKind::invalid_argument,
                "AUC is undefined without both positive and negative labels");
  }
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Twice the Mann-Whitney U, kept integral.
  std::uint64_t twice_u = 0;
  std::uint64_t negatives_below = 0;
  for (std::size_t start = 0; start < order.size();) {
    std::size_t end = start;
    std::uint64_t pos = 0;
    std::uint64_t neg = 0;
    while (end < order.size() && scores[order[end]] == scores[order[start]]) {
      (labels[order[end]] ? pos : neg) += 1;
      ++end;
    }
    twice_u += 2 * pos * negatives_below + pos * neg;
    negatives_below += neg;
    start = end;
  }
  return static_cast<double>(twice_u) / (2.0 * static_cast<double>(positives) *
                                         static_cast<double>(negatives));
}

// ---------------------------------------------------------------------------
// Evaluation

/// Scores every target id for one item given its source ids; the result is
/// aligned with `targets`.
using ItemScorer = std::function<std::vector<double>(
    const CorpusItem& item, std::span<const std::string> sources,
    std::span<const std::string> targets)>;

struct FoldReport {
  int fold = 0;
  double macro_auc = 0.0;
  std::size_t items = 0;
  std::size_t qualifying_tags = 0;
  std::size_t excluded_tags = 0;
};

struct EvalReport {
  std::string target_system;
  std::vector<std::string> source_systems;
  std::vector<FoldReport> folds;
  double mean = 0.0;
  double stddev = 0.0;  // population
  // target node id -> AUC per fold (absent when the tag does not qualify)
  std::map<std::string, std::vector<std::optional<double>>> per_tag;
};

/// Translate every evaluated item of every fold and macro-average the
/// per-target-tag AUC. An item is evaluated when it has at least one source
/// tag (from either source system) and one target tag. Target tags without
/// both a positive and a negative item in a fold are excluded from that
/// fold's average.
inline EvalReport evaluate(const ParallelCorpus& corpus, const FoldAssignment& folds,
                           const std::string& target_system,
                           const std::vector<std::string>& source_systems,
                           const ItemScorer& scorer, unsigned threads = 1) {
  if (source_systems.empty()) throw Error(ErrorKind::invalid_argument, "no source systems");
  if (std::find(source_systems.begin(), source_systems.end(), target_system) !=
      source_systems.end()) {
    throw Error(ErrorKind::invalid_argument, "target system is also a source system");
  }
  std::vector<std::string> targets;
  for (const auto& t : corpus.tags_of(target_system)) targets.push_back(tag_node_id(target_system, t));
  if (targets.empty()) {
    throw Error(ErrorKind::invalid_argument, "target system '" + target_system + "' has no tags");
  }

  struct Evaluated {
    const CorpusItem* item;
    int fold;
    std::vector<std::string> sources;
    std::set<std::string> truth;
    std::vector<double> scores;
  };
  std::vector<Evaluated> evaluated;
  for (const auto& item : corpus.items()) {
    std::set<std::string> sources;
    for (const auto& system : source_systems) {
      for (const auto& t : item.tags(system)) sources.insert(tag_node_id(system, t));
    }
    const auto& target_tags = item.tags(target_system);
    if (sources.empty() || target_tags.empty()) continue;
    Evaluated e{&item, folds.fold(item.id), {sources.begin(), sources.end()}, {}, {}};
    for (const auto& t : target_tags) e.truth.insert(tag_node_id(target_system, t));
    evaluated.push_back(std::move(e));
  }

  detail::parallel_chunks(evaluated.size(), threads,
                          [&](std::size_t begin, std::size_t end, std::size_t) {
                            for (std::size_t i = begin; i < end; ++i) {
                              auto& e = evaluated[i];
                              e.scores = scorer(*e.item, e.sources, targets);
                              if (e.scores.size() != targets.size()) {
                                throw Error(ErrorKind::invalid_argument,
                                            "scorer returned the wrong number of scores");
                              }
                            }
                          });

  EvalReport report;
  report.target_system = target_system;
  report.source_systems = source_systems;
  for (const auto& t : targets) {
    report.per_tag[t].assign(static_cast<std::size_t>(folds.k()), std::nullopt);
  }
  for (int f = 0; f < folds.k(); ++f) {
    std::vector<const Evaluated*> members;
    for (const auto& e : evaluated) {
      if (e.fold == f) members.push_back(&e);
    }
    FoldReport fr;
    fr.fold = f;
    fr.items = members.size();
    double sum = 0.0;
    std::vector<double> scores(members.size());
    std::vector<int> labels(members.size());
    for (std::size_t t = 0; t < targets.size(); ++t) {
      int pos = 0;
      for (std::size_t m = 0; m < members.size(); ++m) {
        scores[m] = members[m]->scores[t];
        labels[m] = members[m]->truth.contains(targets[t]) ? 1 : 0;
        pos += labels[m];
      }
      if (pos == 0 || pos == static_cast<int>(members.size())) {
        ++fr.excluded_tags;
        continue;
      }
      const double auc = auc_binary(scores, labels);
      report.per_tag[targets[t]][static_cast<std::size_t>(f)] = auc;
      sum += auc;
      ++fr.qualifying_tags;
    }
    if (fr.qualifying_tags == 0) {
      throw Error(ErrorKind::invalid_argument,
                  "fold " + std::to_string(f) + " has no target tag with both positive and negative items");
    }
    fr.macro_auc = sum / static_cast<double>(fr.qualifying_tags);
    report.folds.push_back(fr);
  }
  double total = 0.0;
  for (const auto& fr : report.folds) total += fr.macro_auc;
  report.mean = total / static_cast<double>(report.folds.size());
  double var = 0.0;
  for (const auto& fr : report.folds) var += (fr.macro_auc - report.mean) * (fr.macro_auc - report.mean);
  report.stddev = std::sqrt(var / static_cast<double>(report.folds.size()));
  return report;
}

inline nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json j;
  j["target_system"] = r.target_system;
  j["source_systems"] = r.source_systems;
  j["mean_macro_auc"] = r.mean;
  j["std_macro_auc"] = r.stddev;
  j["folds"] = nlohmann::json::array();
  for (const auto& f : r.folds) {
    j["folds"].push_back({{"fold", f.fold},
                          {"macro_auc", f.macro_auc},
                          {"items", f.items},
                          {"qualifying_tags", f.qualifying_tags},
                          {"excluded_tags", f.excluded_tags}});
  }
  j["per_tag"] = nlohmann::json::object();
  for (const auto& [tag, values] : r.per_tag) {
    auto& arr = j["per_tag"][tag] = nlohmann::json::array();
    for (const auto& v : values) arr.push_back(v ? nlohmann::json(*v) : nlohmann::json());
  }
  return j;
}

inline void print_table(std::ostream& out, const EvalReport& r) {
  out << "target: " << r.target_system << "  sources:";
  for (const auto& s : r.source_systems) out << ' ' << s;
  out << '\n';
  out << "fold  items  tags  excluded  macro-AUC\n";
  const auto flags = out.flags();
  for (const auto& f : r.folds) {
    out << std::setw(4) << f.fold << std::setw(7) << f.items << std::setw(6) << f.qualifying_tags
        << std::setw(10) << f.excluded_tags << "  " << std::fixed << std::setprecision(4)
        << f.macro_auc << '\n';
    out.flags(flags);
  }
  out << "macro-AUC: " << std::fixed << std::setprecision(2) << 100.0 * r.mean << " +- "
      << 100.0 * r.stddev << " (%)\n";
  out.flags(flags);
}

}  // namespace genremb

#pragma once

// Retrofitting of concept embeddings to a typed genre graph.
//
// Minimizes
//   Phi(Q) = sum_i ( alpha_i |q_i - qhat_i|^2 + sum_{j in N(i)} beta_ij |q_i - q_j|^2 )
// with the corrected Jacobi update
//   q_i <- ( sum_j (beta_ij + beta_ji) q_j + alpha_i qhat_i )
//          / ( sum_j (beta_ij + beta_ji) + alpha_i ).
//
// Edges are read as undirected: an edge between i and j contributes to both
// beta_ij and beta_ji. Distinct relation types between the same pair add up.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "genremb/compose.hpp"
#include "genremb/error.hpp"
#include "genremb/genregraph.hpp"
#include "genremb/linalg.hpp"
#include "genremb/parallel.hpp"

namespace genremb {

enum class Scheme {
  uniform,  // beta_ij = 1/degree(i) for every relation
  typed,    // beta_ij = 1 for equivalence relations, 1/degree(i) otherwise
};

inline std::string_view to_string(Scheme s) {
  return s == Scheme::uniform ? "uniform" : "typed";
}

inline std::optional<Scheme> parse_scheme(std::string_view s) {
  if (s == "uniform") return Scheme::uniform;
  if (s == "typed") return Scheme::typed;
  return std::nullopt;
}

// What to do with a node that has alpha_i = 0 and no neighbors.
enum class IsolatedPolicy {
  error,      // zero denominator is an error
  keep_zero,  // leave the vector at zero and report the node
};

struct IterationTrace {
  int iteration;
  double delta;
  double objective;
};

struct RetrofitConfig {
  Scheme scheme = Scheme::typed;
  double alpha_known = 1.0;
  double alpha_unknown = 0.0;
  int max_iters = 100;
  double tolerance = 1e-5;
  IsolatedPolicy isolated = IsolatedPolicy::error;
  unsigned threads = 1;
  // Called after every iteration when set; the objective is only evaluated
  // in that case.
  std::function<void(const IterationTrace&)> on_iteration;

  void validate() const {
    if (!(alpha_known > 0.0)) {
      throw Error(ErrorKind::invalid_argument, "alpha_known must be positive");
    }
    if (!(alpha_unknown >= 0.0)) {
      throw Error(ErrorKind::invalid_argument, "alpha_unknown must be nonnegative");
    }
    if (max_iters < 1) throw Error(ErrorKind::invalid_argument, "max_iters must be >= 1");
    if (!(tolerance > 0.0)) throw Error(ErrorKind::invalid_argument, "tolerance must be positive");
  }
};

/// Coefficient of one relation seen from node i.
inline double relation_coefficient(Scheme scheme, Relation relation, std::size_t degree_i) {
  if (scheme == Scheme::typed && is_equivalence(relation)) return 1.0;
  return degree_i == 0 ? 0.0 : 1.0 / static_cast<double>(degree_i);
}

/// Graph coefficients resolved against a concept ordering.
class RetrofitProblem {
 public:
  struct Link {
    std::size_t j;
    double beta_ij;
    double beta_ji;
    double weight() const { return beta_ij + beta_ji; }
  };

  RetrofitProblem(const ConceptEmbeddingMatrix& initial, const GenreGraph& g,
                  const RetrofitConfig& cfg)
      : ids_(initial.concepts()) {
    cfg.validate();
    const std::size_t n = initial.size();
    if (g.node_count() != n) {
      throw Error(ErrorKind::invalid_argument,
                  "graph has " + std::to_string(g.node_count()) + " nodes but " +
                      std::to_string(n) + " concepts were given");
    }
    for (const auto& id : ids_) {
      if (!g.contains(id)) {
        throw Error(ErrorKind::invalid_argument, "concept '" + id + "' is not a graph node");
      }
    }
    alpha_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      alpha_[i] = initial.known(i) ? cfg.alpha_known : cfg.alpha_unknown;
    }

    // Unordered pair -> relation types between the pair.
    std::map<std::pair<std::size_t, std::size_t>, std::set<Relation>> pairs;
    for (const auto& e : g.edges()) {
      std::size_t a = *initial.index_of(e.src);
      std::size_t b = *initial.index_of(e.dst);
      if (a > b) std::swap(a, b);
      pairs[{a, b}].insert(e.relation);
    }
    std::vector<std::size_t> degree(n);
    for (std::size_t i = 0; i < n; ++i) degree[i] = g.degree(ids_[i]);

    links_.resize(n);
    for (const auto& [pair, relations] : pairs) {
      const auto [a, b] = pair;
      double beta_ab = 0.0;
      double beta_ba = 0.0;
      for (Relation r : relations) {
        beta_ab += relation_coefficient(cfg.scheme, r, degree[a]);
        beta_ba += relation_coefficient(cfg.scheme, r, degree[b]);
      }
      links_[a].push_back({b, beta_ab, beta_ba});
      links_[b].push_back({a, beta_ba, beta_ab});
    }
    // Fixed summation order: neighbors by node id.
    for (auto& list : links_) {
      std::sort(list.begin(), list.end(),
                [&](const Link& x, const Link& y) { return ids_[x.j] < ids_[y.j]; });
    }
  }

  std::size_t size() const noexcept { return alpha_.size(); }
  const std::string& id(std::size_t i) const { return ids_[i]; }
  double alpha(std::size_t i) const { return alpha_[i]; }
  const std::vector<Link>& links(std::size_t i) const { return links_[i]; }

  double denominator(std::size_t i) const {
    double s = 0.0;
    for (const auto& l : links_[i]) s += l.weight();
    return s + alpha_[i];
  }

  /// Nodes whose update denominator is zero (alpha 0 and no neighbors).
  std::vector<std::size_t> isolated() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < size(); ++i) {
      if (denominator(i) == 0.0) out.push_back(i);
    }
    return out;
  }

  /// Nodes in connected components without any alpha_i > 0. Their values
  /// are not pinned by any anchor.
  std::vector<std::size_t> unanchored() const {
    std::vector<std::size_t> out;
    std::vector<bool> seen(size(), false);
    for (std::size_t s = 0; s < size(); ++s) {
      if (seen[s]) continue;
      std::vector<std::size_t> comp{s};
      seen[s] = true;
      bool anchored = false;
      for (std::size_t k = 0; k < comp.size(); ++k) {
        anchored = anchored || alpha_[comp[k]] > 0.0;
        for (const auto& l : links_[comp[k]]) {
          if (!seen[l.j]) {
            seen[l.j] = true;
            comp.push_back(l.j);
          }
        }
      }
      if (!anchored) out.insert(out.end(), comp.begin(), comp.end());
    }
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  std::vector<std::string> ids_;
  std::vector<double> alpha_;
  std::vector<std::vector<Link>> links_;
};

namespace detail {

inline void check_shapes(const Matrix& q, const ConceptEmbeddingMatrix& initial) {
  if (q.rows() != initial.size() || q.cols() != initial.dim()) {
    throw Error(ErrorKind::invalid_argument, "Q and Qhat differ in shape");
  }
}

}  // namespace detail

inline double objective(const Matrix& q, const ConceptEmbeddingMatrix& initial,
                        const RetrofitProblem& problem) {
  detail::check_shapes(q, initial);
  double phi = 0.0;
  for (std::size_t i = 0; i < problem.size(); ++i) {
    double term = problem.alpha(i) * squared_distance(q.row(i), initial.row(i));
    for (const auto& l : problem.links(i)) {
      term += l.beta_ij * squared_distance(q.row(i), q.row(l.j));
    }
    phi += term;
  }
  return phi;
}

inline double objective(const Matrix& q, const ConceptEmbeddingMatrix& initial,
                        const GenreGraph& g, const RetrofitConfig& cfg) {
  return objective(q, initial, RetrofitProblem(initial, g, cfg));
}

/// Analytic gradient of Phi:
///   dPhi/dq_i = 2 alpha_i (q_i - qhat_i) + 2 sum_j (beta_ij + beta_ji)(q_i - q_j).
inline Matrix gradient(const Matrix& q, const ConceptEmbeddingMatrix& initial,
                       const RetrofitProblem& problem) {
  detail::check_shapes(q, initial);
  Matrix grad(q.rows(), q.cols());
  for (std::size_t i = 0; i < problem.size(); ++i) {
    auto g = grad.row(i);
    const auto qi = q.row(i);
    const auto hi = initial.row(i);
    for (std::size_t k = 0; k < g.size(); ++k) {
      g[k] = 2.0 * problem.alpha(i) * (qi[k] - hi[k]);
    }
    for (const auto& l : problem.links(i)) {
      const auto qj = q.row(l.j);
      for (std::size_t k = 0; k < g.size(); ++k) {
        g[k] += 2.0 * l.weight() * (qi[k] - qj[k]);
      }
    }
  }
  return grad;
}

struct StepResult {
  Matrix q;
  double delta;
};

/// One simultaneous (Jacobi) update: every new row is computed from the
/// old Q. delta is the largest per-node L2 displacement.
inline StepResult update_step(const Matrix& q, const ConceptEmbeddingMatrix& initial,
                              const RetrofitProblem& problem,
                              IsolatedPolicy policy = IsolatedPolicy::error,
                              unsigned threads = 1) {
  detail::check_shapes(q, initial);
  if (policy == IsolatedPolicy::error) {
    if (auto iso = problem.isolated(); !iso.empty()) {
      throw Error(ErrorKind::numerical,
                  "zero update denominator at node '" + problem.id(iso.front()) +
                      "' (unknown concept without neighbors)");
    }
  }
  const std::size_t n = q.rows();
  const std::size_t d = q.cols();
  Matrix next(n, d);
  std::vector<double> deltas(detail::worker_count(n, threads), 0.0);
  detail::parallel_chunks(n, threads, [&](std::size_t begin, std::size_t end, std::size_t w) {
    for (std::size_t i = begin; i < end; ++i) {
      auto out = next.row(i);
      const double den = problem.denominator(i);
      if (den == 0.0) {
        std::copy(q.row(i).begin(), q.row(i).end(), out.begin());
        continue;
      }
      const double a = problem.alpha(i);
      const auto hi = initial.row(i);
      for (std::size_t k = 0; k < d; ++k) out[k] = a * hi[k];
      for (const auto& l : problem.links(i)) {
        const double wgt = l.weight();
        const auto qj = q.row(l.j);
        for (std::size_t k = 0; k < d; ++k) out[k] += wgt * qj[k];
      }
      for (std::size_t k = 0; k < d; ++k) out[k] /= den;
      deltas[w] = std::max(deltas[w], std::sqrt(squared_distance(out, q.row(i))));
    }
  });
  return {std::move(next), *std::max_element(deltas.begin(), deltas.end())};
}

inline StepResult update_step(const Matrix& q, const ConceptEmbeddingMatrix& initial,
                              const GenreGraph& g, const RetrofitConfig& cfg) {
  return update_step(q, initial, RetrofitProblem(initial, g, cfg), cfg.isolated, cfg.threads);
}

struct RetrofitResult {
  ConceptEmbeddingMatrix embeddings;
  int iterations = 0;
  double final_delta = 0.0;
  bool converged = false;
  std::vector<std::string> isolated;    // alpha 0, no neighbors: left at zero
  std::vector<std::string> unanchored;  // component without a known concept
};

/// Iterate update_step from Q = Qhat until delta <= tolerance or max_iters.
/// Known flags are recomputed: a node is known if it was known initially or
/// ends with a nonzero vector.
inline RetrofitResult retrofit(const ConceptEmbeddingMatrix& initial, const GenreGraph& g,
                               const RetrofitConfig& cfg) {
  const RetrofitProblem problem(initial, g, cfg);
  Matrix q = initial.vectors();
  RetrofitResult result;
  for (int iter = 1; iter <= cfg.max_iters; ++iter) {
    auto step = update_step(q, initial, problem, cfg.isolated, cfg.threads);
    q = std::move(step.q);
    result.iterations = iter;
    result.final_delta = step.delta;
    if (cfg.on_iteration) cfg.on_iteration({iter, step.delta, objective(q, initial, problem)});
    if (step.delta <= cfg.tolerance) {
      result.converged = true;
      break;
    }
  }
  std::vector<bool> known(initial.size());
  for (std::size_t i = 0; i < initial.size(); ++i) {
    known[i] = initial.known(i) || !is_zero(q.row(i));
  }
  for (std::size_t i : problem.isolated()) result.isolated.push_back(problem.id(i));
  for (std::size_t i : problem.unanchored()) result.unanchored.push_back(problem.id(i));
  result.embeddings = ConceptEmbeddingMatrix(initial.concepts(), std::move(q), std::move(known));
  return result;
}

/// Direct solve of the stationarity system
///   alpha_i (q_i - qhat_i) + sum_j (beta_ij + beta_ji)(q_i - q_j) = 0
/// with a dense LU factorization. Intended as an oracle for small graphs.
inline Matrix solve_direct(const ConceptEmbeddingMatrix& initial, const GenreGraph& g,
                           const RetrofitConfig& cfg) {
  const RetrofitProblem problem(initial, g, cfg);
  const auto n = static_cast<Eigen::Index>(initial.size());
  const auto d = static_cast<Eigen::Index>(initial.dim());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd b(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    a(i, i) = problem.denominator(ui);
    for (const auto& l : problem.links(ui)) a(i, static_cast<Eigen::Index>(l.j)) -= l.weight();
    for (Eigen::Index k = 0; k < d; ++k) {
      b(i, k) = problem.alpha(ui) * initial.row(ui)[static_cast<std::size_t>(k)];
    }
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  if (n > 0 && lu.rank() < n) {
    throw Error(ErrorKind::numerical,
                "stationarity system is singular (a component has no anchored concept)");
  }
  Matrix out(initial.size(), initial.dim());
  if (n == 0) return out;
  const Eigen::MatrixXd x = lu.solve(b);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < d; ++k) {
      out(static_cast<std::size_t>(i), static_cast<std::size_t>(k)) = x(i, k);
    }
  }
  return out;
}

}  // namespace genremb

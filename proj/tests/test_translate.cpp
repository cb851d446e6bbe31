#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "genremb/retrofit.hpp"
#include "genremb/translate.hpp"

using namespace genremb;
using Vec = std::vector<double>;
using Ids = std::vector<std::string>;

namespace {

double cos_of(const Vec& a, const Vec& b) { return cosine(a, b); }

double sum_of(const std::vector<Vec>& sources, const Vec& t) {
  std::vector<std::span<const double>> s(sources.begin(), sources.end());
  return score_sum(s, t);
}

double avg_of(const std::vector<Vec>& sources, const Vec& t) {
  std::vector<std::span<const double>> s(sources.begin(), sources.end());
  return score_avg(s, t);
}

ConceptEmbeddingMatrix embeddings(const Ids& ids, const std::vector<Vec>& rows) {
  Matrix m(rows.size(), rows[0].size());
  std::vector<bool> known(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
    known[i] = !is_zero(m.row(i));
  }
  return {ids, std::move(m), known};
}

ConceptEmbeddingMatrix random_embeddings(std::mt19937& rng, std::size_t n, std::size_t d,
                                         Ids& ids) {
  std::normal_distribution<double> g;
  std::vector<Vec> rows(n, Vec(d));
  ids.clear();
  for (std::size_t i = 0; i < n; ++i) {
    ids.push_back("t" + std::to_string(i));
    for (auto& x : rows[i]) x = g(rng);
  }
  return embeddings(ids, rows);
}

}  // namespace

TEST(Cosine, Examples) {
  EXPECT_DOUBLE_EQ(cos_of({0.3, -2, 5}, {0.3, -2, 5}), 1.0);
  EXPECT_EQ(cos_of({1, 0}, {0, 1}), 0.0);
  EXPECT_EQ(cos_of({1, 0}, {0, 0}), 0.0);
  EXPECT_EQ(cos_of({0, 0}, {0, 0}), 0.0);
  EXPECT_THROW(cos_of({1, 0}, {1, 0, 0}), Error);
}

TEST(Cosine, ScaleInvariantAndBounded) {
  std::mt19937 rng(1);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> pos(0.01, 100.0);
  for (int trial = 0; trial < 200; ++trial) {
    Vec a(5), b(5);
    for (auto& x : a) x = g(rng);
    for (auto& x : b) x = g(rng);
    const double c = cos_of(a, b);
    EXPECT_GE(c, -1.0);
    EXPECT_LE(c, 1.0);
    Vec as = a;
    const double s = pos(rng);
    for (auto& x : as) x *= s;
    EXPECT_NEAR(cos_of(as, b), c, 1e-12);
  }
}

TEST(Scores, SumExamples) {
  EXPECT_DOUBLE_EQ(sum_of({{2, 1}}, {2, 1}), 1.0);
  EXPECT_DOUBLE_EQ(sum_of({{2, 1}, {2, 1}, {2, 1}}, {2, 1}), 3.0);
  EXPECT_DOUBLE_EQ(sum_of({{1, 0}, {0, 1}}, {1, 0}), 1.0);
  EXPECT_THROW(sum_of({}, {1, 0}), Error);
}

TEST(Scores, AvgExamples) {
  EXPECT_DOUBLE_EQ(avg_of({{1, 0}, {0, 1}}, {1, 0}), 0.5);
  EXPECT_DOUBLE_EQ(avg_of({{0.4, 0.2}}, {1, 3}), sum_of({{0.4, 0.2}}, {1, 3}));
  EXPECT_DOUBLE_EQ(avg_of({{1, 0}, {0, 1}, {-1, 0}}, {1, 0}), 0.0);
  EXPECT_THROW(avg_of({}, {1, 0}), Error);
}

TEST(Translate, SumAndAvgRankIdentically) {
  std::mt19937 rng(42);
  for (int trial = 0; trial < 100; ++trial) {
    Ids ids;
    const auto emb = random_embeddings(rng, 20, 4, ids);
    Ids sources(ids.begin(), ids.begin() + 1 + rng() % 5);
    Ids targets(ids.begin() + 8, ids.end());
    const auto s = translate(sources, targets, emb, ScorerKind::sum);
    const auto a = translate(sources, targets, emb, ScorerKind::avg);
    EXPECT_EQ(s.ranking, a.ranking);
    const double k = static_cast<double>(sources.size());
    for (const auto& [id, score] : a.target_scores) {
      EXPECT_GE(score, -1.0);
      EXPECT_LE(score, 1.0);
      EXPECT_GE(s.target_scores.at(id), -k);
      EXPECT_LE(s.target_scores.at(id), k);
    }
  }
}

TEST(Translate, InvariantToSourceOrder) {
  std::mt19937 rng(7);
  Ids ids;
  const auto emb = random_embeddings(rng, 15, 3, ids);
  Ids sources{"t0", "t1", "t2", "t3"};
  const Ids targets(ids.begin() + 5, ids.end());
  const auto base = translate(sources, targets, emb, ScorerKind::avg);
  for (int trial = 0; trial < 10; ++trial) {
    std::shuffle(sources.begin(), sources.end(), rng);
    const auto r = translate(sources, targets, emb, ScorerKind::avg);
    EXPECT_EQ(r.ranking, base.ranking);
    for (const auto& [id, score] : r.target_scores) {
      EXPECT_NEAR(score, base.target_scores.at(id), 1e-15);
    }
  }
}

TEST(Translate, SelfTargetScoresOne) {
  const auto emb = embeddings({"a", "b"}, {{1, 2}, {-1, 0.5}});
  const auto r = translate(Ids{"a"}, Ids{"a", "b"}, emb, ScorerKind::avg);
  EXPECT_DOUBLE_EQ(r.target_scores.at("a"), 1.0);
  EXPECT_EQ(r.ranking.front(), "a");
}

TEST(Translate, TiesBrokenById) {
  const auto emb = embeddings({"s", "z", "m", "a"}, {{1, 0}, {0, 1}, {0, 2}, {0, 3}});
  const auto r = translate(Ids{"s"}, Ids{"z", "m", "a"}, emb, ScorerKind::sum);
  EXPECT_EQ(r.ranking, (Ids{"a", "m", "z"}));
}

TEST(Translate, UnknownSourcesDroppedAndAllZeroWhenNoneRemain) {
  const auto emb = embeddings({"s", "u", "t1", "t2"}, {{1, 0}, {0, 0}, {1, 0}, {0, 1}});
  const auto r = translate(Ids{"s", "u"}, Ids{"t1", "t2"}, emb, ScorerKind::avg);
  EXPECT_EQ(r.dropped_sources, Ids{"u"});
  EXPECT_DOUBLE_EQ(r.target_scores.at("t1"), 1.0);
  const auto none = translate(Ids{"u"}, Ids{"t1", "t2"}, emb, ScorerKind::sum);
  EXPECT_EQ(none.target_scores.at("t1"), 0.0);
  EXPECT_EQ(none.target_scores.at("t2"), 0.0);
  EXPECT_THROW(translate(Ids{"missing"}, Ids{"t1"}, emb, ScorerKind::sum), Error);
  EXPECT_THROW(translate(Ids{"s"}, Ids{"missing"}, emb, ScorerKind::sum), Error);
  EXPECT_THROW(translate(Ids{}, Ids{"t1"}, emb, ScorerKind::sum), Error);
}

TEST(Translate, RetrofittedTwinRanksFirst) {
  // src -sameAs- twin; twin and other share a relatedness edge.
  GenreGraph g;
  for (const char* id : {"a:src", "b:other", "b:twin"}) g.add_node({id, "en", id, {"x"}, ""});
  g.add_edge({"a:src", "b:twin", Relation::same_as});
  g.add_edge({"b:twin", "b:other", Relation::music_subgenre});
  Matrix m(3, 2);
  m(0, 0) = 1.0;
  m(1, 0) = 0.8;
  m(1, 1) = -0.6;
  m(2, 1) = 1.0;
  const ConceptEmbeddingMatrix initial({"a:src", "b:other", "b:twin"}, m, {true, true, true});
  RetrofitConfig cfg;
  cfg.scheme = Scheme::typed;
  const auto q = retrofit(initial, g, cfg).embeddings;
  const auto before = translate(Ids{"a:src"}, Ids{"b:other", "b:twin"}, initial, ScorerKind::sum);
  const auto after = translate(Ids{"a:src"}, Ids{"b:other", "b:twin"}, q, ScorerKind::sum);
  EXPECT_EQ(before.ranking.front(), "b:other");
  EXPECT_EQ(after.ranking.front(), "b:twin");
}

TEST(Translate, BaselineUsesPathLengths) {
  GenreGraph g;
  for (const char* id : {"A", "B", "C", "D"}) g.add_node({id, "en", id, {"x"}, ""});
  g.add_edge({"A", "B", Relation::derivative});
  g.add_edge({"B", "C", Relation::same_as});
  const auto r = translate_baseline(Ids{"A"}, Ids{"B", "C", "D"}, g);
  EXPECT_DOUBLE_EQ(r.target_scores.at("B"), 0.5);
  EXPECT_DOUBLE_EQ(r.target_scores.at("C"), 1.0 / 3.0);
  EXPECT_EQ(r.target_scores.at("D"), 0.0);
  EXPECT_EQ(r.ranking, (Ids{"B", "C", "D"}));
  const auto two = translate_baseline(Ids{"A", "D"}, Ids{"B"}, g);
  EXPECT_DOUBLE_EQ(two.target_scores.at("B"), 0.25);
  EXPECT_THROW(translate_baseline(Ids{"A"}, Ids{"Z"}, g), Error);
  EXPECT_THROW(translate(Ids{"A"}, Ids{"B"}, ConceptEmbeddingMatrix{}, ScorerKind::baseline),
               Error);
}

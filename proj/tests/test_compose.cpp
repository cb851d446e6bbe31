#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "genremb/compose.hpp"

using namespace genremb;

namespace {

WordVectorStore store_from(const std::string& text) {
  std::istringstream in(text);
  return load_vectors(in);
}

// Oracle: leading right singular vector from Eigen's dense SVD.
std::vector<double> svd_direction(const Matrix& m) {
  Eigen::MatrixXd a(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t k = 0; k < m.cols(); ++k) a(i, k) = m(i, k);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinV);
  const Eigen::VectorXd v = svd.matrixV().col(0);
  return {v.data(), v.data() + v.size()};
}

double abs_cosine(const std::vector<double>& a, const std::vector<double>& b) {
  return std::abs(dot(a, b)) / (norm2(a) * norm2(b));
}

}  // namespace

class ComposeTest : public ::testing::Test {
 protected:
  WordVectorStore store = store_from("4 3\nrock 1 0 0\npop 0 1 0\ndance 1 0 0\nmetal 0 0 1\n");
};

TEST_F(ComposeTest, AvgSingleWordIsIdentity) {
  std::vector<ConceptSpec> specs{{"en:rock", {"rock"}, &store}};
  const auto m = compose_avg(specs);
  EXPECT_EQ(m.row(0)[0], 1.0);
  EXPECT_EQ(m.row(0)[1], 0.0);
  EXPECT_TRUE(m.known(0));
}

TEST_F(ComposeTest, AvgOfTwoWords) {
  std::vector<ConceptSpec> specs{{"en:dance_pop", {"dance", "pop"}, &store}};
  const auto m = compose_avg(specs);
  EXPECT_DOUBLE_EQ(m.row(0)[0], 0.5);
  EXPECT_DOUBLE_EQ(m.row(0)[1], 0.5);
  EXPECT_DOUBLE_EQ(m.row(0)[2], 0.0);
  EXPECT_TRUE(m.known(0));
}

TEST_F(ComposeTest, AvgUnknownWordGivesZeroAndUnknown) {
  std::vector<ConceptSpec> specs{{"en:chillstep", {"chillstep"}, &store}};
  const auto m = compose_avg(specs);
  EXPECT_TRUE(is_zero(m.row(0)));
  EXPECT_FALSE(m.known(0));
}

TEST_F(ComposeTest, AvgCountsOovTokensInDenominator) {
  std::vector<ConceptSpec> specs{{"x", {"rock", "zzz"}, &store}};
  const auto m = compose_avg(specs);
  EXPECT_DOUBLE_EQ(m.row(0)[0], 0.5);
  EXPECT_TRUE(m.known(0));
}

TEST_F(ComposeTest, AvgRejectsEmptyTokens) {
  std::vector<ConceptSpec> specs{{"x", {}, &store}};
  EXPECT_THROW(compose_avg(specs), Error);
}

TEST(Compose, AvgIdenticalVectorsExact) {
  const auto s = store_from("3 2\na 0.1 0.7\nb 0.1 0.7\nc 0.1 0.7\n");
  std::vector<ConceptSpec> specs{{"x", {"a", "b", "c"}, &s}};
  const auto m = compose_avg(specs);
  EXPECT_EQ(m.row(0)[0], static_cast<double>(0.1f));
  EXPECT_EQ(m.row(0)[1], static_cast<double>(0.7f));
}

TEST(Compose, AvgPermutationInvariant) {
  std::mt19937 rng(3);
  std::normal_distribution<double> g;
  std::ostringstream text;
  text.precision(9);
  text << "6 5\n";
  const std::vector<std::string> words{"a", "b", "c", "d", "e", "f"};
  for (const auto& w : words) {
    text << w;
    for (int k = 0; k < 5; ++k) text << ' ' << g(rng);
    text << '\n';
  }
  const auto s = store_from(text.str());
  std::vector<std::string> tokens{"a", "b", "c", "zz", "e", "f"};
  std::vector<ConceptSpec> base{{"x", tokens, &s}};
  const auto ref = compose_avg(base);
  for (int trial = 0; trial < 20; ++trial) {
    std::shuffle(tokens.begin(), tokens.end(), rng);
    std::vector<ConceptSpec> specs{{"x", tokens, &s}};
    const auto m = compose_avg(specs);
    for (int k = 0; k < 5; ++k) EXPECT_NEAR(m.row(0)[k], ref.row(0)[k], 1e-12);
  }
}

TEST(Compose, SifWeightOfRankOne) {
  EXPECT_NEAR(sif_weight(1, 1e-3), 0.001 / (0.001 + 1.0 / 3.7), 1e-12);
  EXPECT_NEAR(sif_weight(1, 1e-3), 0.003686, 1e-6);
  EXPECT_THROW(sif_weight(1, 0.0), Error);
}

TEST(Compose, SifWeightsInUnitIntervalAndIncreasing) {
  double previous = 0.0;
  for (std::size_t r = 1; r < 200000; r += 37) {
    const double w = sif_weight(r, 1e-3);
    ASSERT_GT(w, 0.0);
    ASSERT_LT(w, 1.0);
    ASSERT_GT(w, previous);
    previous = w;
  }
}

TEST(Compose, NearlyParallelPairIsAnnihilated) {
  const double eps = 1e-3;
  Matrix rows(2, 2);
  rows(0, 0) = 1.0;
  rows(1, 0) = 1.0;
  rows(1, 1) = eps;
  const auto u = leading_singular_direction(rows);
  remove_component(rows, u, {true, true});
  EXPECT_LE(norm2(rows.row(0)), eps);
  EXPECT_LE(norm2(rows.row(1)), eps);
  EXPECT_LE(std::abs(dot(rows.row(0), u)), 1e-8);
}

TEST(Compose, PowerIterationMatchesDenseSvd) {
  std::mt19937 rng(11);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 2 + rng() % 49;
    const std::size_t d = 2 + rng() % 9;
    Matrix m(n, d);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < d; ++k) m(i, k) = g(rng) + (k == 0 ? 1.5 : 0.0);
    }
    const auto u = leading_singular_direction(m);
    EXPECT_GE(abs_cosine(u, svd_direction(m)), 1.0 - 1e-6) << "trial " << trial;
    EXPECT_NEAR(norm2(u), 1.0, 1e-12);
    const auto largest = *std::max_element(u.begin(), u.end(), [](double a, double b) {
      return std::abs(a) < std::abs(b);
    });
    EXPECT_GT(largest, 0.0);
  }
}

TEST(Compose, PowerIterationStartOrthogonalToRowSpace) {
  Matrix m(2, 2);
  m(0, 0) = 1.0;
  m(0, 1) = -1.0;
  m(1, 0) = -2.0;
  m(1, 1) = 2.0;
  const auto u = leading_singular_direction(m);
  EXPECT_NEAR(std::abs(u[0]), std::sqrt(0.5), 1e-12);
  EXPECT_NEAR(u[0], -u[1], 1e-12);
}

TEST(Compose, PowerIterationRejectsZeroMatrix) {
  EXPECT_THROW(leading_singular_direction(Matrix(3, 2)), Error);
}

TEST(Compose, SifRemovesCommonComponent) {
  std::mt19937 rng(5);
  std::normal_distribution<double> g;
  std::ostringstream text;
  text.precision(9);
  text << "30 6\n";
  for (int w = 0; w < 30; ++w) {
    text << "w" << w;
    for (int k = 0; k < 6; ++k) text << ' ' << g(rng) + (k == 2 ? 2.0 : 0.0);
    text << '\n';
  }
  const auto s = store_from(text.str());
  std::vector<ConceptSpec> specs;
  for (int c = 0; c < 12; ++c) {
    specs.push_back({"c" + std::to_string(c),
                     {"w" + std::to_string(rng() % 30), "w" + std::to_string(rng() % 30), "oov"},
                     &s});
  }
  specs.push_back({"unknown", {"nothing", "here"}, &s});
  const auto result = compose_sif_detailed(specs);
  const auto& m = result.embeddings;
  for (std::size_t i = 0; i + 1 < specs.size(); ++i) {
    EXPECT_TRUE(m.known(i));
    EXPECT_LE(std::abs(dot(m.row(i), result.common_direction)), 1e-8);
  }
  EXPECT_FALSE(m.known(specs.size() - 1));
  EXPECT_TRUE(is_zero(m.row(specs.size() - 1)));
}

TEST(Compose, SifStepOneSkipsOovTokens) {
  // Two concepts, orthogonal before projection: check the weighted mean
  // by undoing the projection along the reported direction.
  const auto s = store_from("2 2\nrock 1 0\npop 0 1\n");
  std::vector<ConceptSpec> specs{{"a", {"rock", "oov"}, &s}, {"b", {"pop"}, &s}};
  const auto result = compose_sif_detailed(specs, 1e-3);
  const double w1 = sif_weight(1, 1e-3);
  const double w2 = sif_weight(2, 1e-3);
  // qbar_a = (w1, 0), qbar_b = (0, w2); w2 > w1 so u = (0, 1).
  EXPECT_NEAR(std::abs(result.common_direction[1]), 1.0, 1e-9);
  EXPECT_NEAR(result.embeddings.row(0)[0], w1, 1e-12);
  EXPECT_NEAR(result.embeddings.row(1)[1], 0.0, 1e-12);
}

TEST(Compose, SifNeedsTwoKnownConcepts) {
  const auto s = store_from("1 2\nrock 1 0\n");
  std::vector<ConceptSpec> specs{{"a", {"rock"}, &s}, {"b", {"oov"}, &s}};
  EXPECT_THROW(compose_sif(specs), Error);
  std::vector<ConceptSpec> two{{"a", {"rock"}, &s}, {"b", {"rock"}, &s}};
  EXPECT_THROW(compose_sif(two, 0.0), Error);
  EXPECT_THROW(compose_sif(two, -1.0), Error);
}

TEST(Compose, ConceptMatrixRejectsDuplicateIds) {
  EXPECT_THROW(ConceptEmbeddingMatrix({"a", "a"}, Matrix(2, 1), {true, true}), Error);
  EXPECT_THROW(ConceptEmbeddingMatrix({"a"}, Matrix(2, 1), {true}), Error);
}

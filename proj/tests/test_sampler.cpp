#include <cmath>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "mrfbench/exact.hpp"
#include "mrfbench/sampler.hpp"
#include "oracles.hpp"

using namespace mrfbench;

namespace {

IsingModel single_edge(double theta, double b0 = 0.0, double b1 = 0.0) {
  return IsingModel(Graph(2, {{0, 1}}), {b0, b1}, {theta});
}

GibbsSettings quick(std::size_t burn = 200, std::size_t thin = 5) { return {burn, thin, 1}; }

}  // namespace

TEST(Srbm, WorkedThreeNodeChain) {
  const double t12 = 0.7, t23 = 1.3;
  const IsingModel m(Graph(3, {{0, 1}, {1, 2}}), {0.1, -0.2, 0.3}, {t12, -t23});
  const auto s = build_srbm(m);
  ASSERT_EQ(s.rows.size(), 2u);
  EXPECT_EQ(s.rows[0].col_a, 0);
  EXPECT_EQ(s.rows[0].col_b, 1);
  EXPECT_DOUBLE_EQ(s.rows[0].w_a, std::sqrt(t12));
  EXPECT_DOUBLE_EQ(s.rows[0].w_b, std::sqrt(t12));
  EXPECT_DOUBLE_EQ(s.rows[1].w_a, std::sqrt(t23));
  EXPECT_DOUBLE_EQ(s.rows[1].w_b, -std::sqrt(t23));
  EXPECT_NEAR(s.wtw_diag[0], t12, 1e-15);
  EXPECT_NEAR(s.wtw_diag[1], t12 + t23, 1e-15);
  EXPECT_NEAR(s.wtw_diag[2], t23, 1e-15);

  const auto gram = s.gram();
  EXPECT_NEAR(gram[0 * 3 + 1], t12, 1e-15);
  EXPECT_NEAR(gram[1 * 3 + 2], -t23, 1e-15);
  EXPECT_EQ(gram[0 * 3 + 2], 0.0);
  for (int v = 0; v < 3; ++v) EXPECT_NEAR(gram[v * 3 + v], s.wtw_diag[v], 1e-15);
}

TEST(Srbm, EdgelessModel) {
  const IsingModel m(Graph(4, {}), {0, 0, 0, 0}, {});
  const auto s = build_srbm(m);
  EXPECT_EQ(s.num_hidden(), 0u);
  for (double w : s.wtw_diag) EXPECT_EQ(w, 0.0);
}

TEST(Srbm, GramMatchesInteractionMatrix) {
  Engine rng = make_engine(21);
  for (int trial = 0; trial < 20; ++trial) {
    const auto m = oracle::random_model(15, 0.3, rng);
    const auto gram = build_srbm(m).gram();
    const auto a = m.interaction_matrix();
    for (int v = 0; v < 15; ++v)
      for (int w = 0; w < 15; ++w)
        if (v != w) { EXPECT_NEAR(gram[v * 15 + w], a[v * 15 + w], 1e-12); }
  }
}

TEST(Exact, SingleSpinAndPair) {
  const auto one = enumerate_distribution(IsingModel(Graph(1, {}), {0.0}, {}));
  EXPECT_DOUBLE_EQ(one.probs[0], 0.5);
  EXPECT_DOUBLE_EQ(one.probs[1], 0.5);

  const auto two = enumerate_distribution(single_edge(1.0));
  const double e = std::numbers::e;
  const double z = 3 + e;
  EXPECT_NEAR(two.probs[0b00], 1 / z, 1e-15);
  EXPECT_NEAR(two.probs[0b01], 1 / z, 1e-15);
  EXPECT_NEAR(two.probs[0b10], 1 / z, 1e-15);
  EXPECT_NEAR(two.probs[0b11], e / z, 1e-15);

  const auto t = exact_pair_marginal(two, 0, 1);
  EXPECT_NEAR(t[1][1], e / z, 1e-15);
  EXPECT_NEAR(t[0][1], 1 / z, 1e-15);
  EXPECT_THROW(exact_pair_marginal(two, 1, 1), std::invalid_argument);
}

TEST(Exact, NormalizationAndConsistency) {
  Engine rng = make_engine(3);
  const auto m = oracle::random_model(7, 0.4, rng);
  const auto dist = enumerate_distribution(m);
  double s = 0;
  for (double p : dist.probs) s += p;
  EXPECT_NEAR(s, 1.0, 1e-12);
  const auto t = exact_pair_marginal(dist, 2, 5);
  double p2 = 0;
  for (std::size_t k = 0; k < dist.probs.size(); ++k)
    if ((k >> 2) & 1u) p2 += dist.probs[k];
  EXPECT_NEAR(t[1][0] + t[1][1], p2, 1e-12);
  EXPECT_THROW(enumerate_distribution(oracle::random_model(21, 0.0, rng)), std::invalid_argument);
}

TEST(Gibbs, RejectsBadArguments) {
  const auto s = build_srbm(single_edge(1.0));
  EXPECT_THROW(gibbs_sample(s, 0, quick(), 1), std::invalid_argument);
  EXPECT_THROW(gibbs_sample(s, 10, GibbsSettings{10, 0, 1}, 1), std::invalid_argument);
}

TEST(Gibbs, IndependentFairCoins) {
  const auto s = build_srbm(IsingModel(Graph(5, {}), std::vector<double>(5, 0.0), {}));
  const auto data = gibbs_sample(s, 10000, GibbsSettings{0, 1, 1}, 42);
  for (std::size_t v = 0; v < 5; ++v) {
    double mean = 0;
    for (std::size_t i = 0; i < data.rows(); ++i) mean += data(i, v);
    EXPECT_NEAR(mean / 10000, 0.5, 0.02);
  }
}

TEST(Gibbs, VisibleUpdateReducesToBiasWithoutEdges) {
  const auto s = build_srbm(IsingModel(Graph(2, {}), {1.2, -0.7}, {}));
  const auto data = gibbs_sample(s, 20000, GibbsSettings{0, 1, 1}, 5);
  double m0 = 0, m1 = 0;
  for (std::size_t i = 0; i < data.rows(); ++i) m0 += data(i, 0), m1 += data(i, 1);
  EXPECT_NEAR(m0 / 20000, logistic(1.2), 0.015);
  EXPECT_NEAR(m1 / 20000, logistic(-0.7), 0.015);
}

TEST(Gibbs, SingleEdgeMatchesEnumeration) {
  const auto m = single_edge(1.0);
  const auto data = gibbs_sample(build_srbm(m), 40000, quick(100, 2), 8);
  const auto emp = empirical_distribution(data);
  const auto exact = enumerate_distribution(m);
  EXPECT_NEAR(emp[0b11], std::numbers::e / (3 + std::numbers::e), 0.01);
  EXPECT_LT(total_variation(emp, exact.probs), 0.015);
}

TEST(Gibbs, RandomSixNodeModelTotalVariation) {
  Engine rng = make_engine(99);
  const auto m = oracle::random_model(6, 0.5, rng);
  const auto data = gibbs_sample(build_srbm(m), 50000, quick(500, 10), 17);
  EXPECT_LT(total_variation(empirical_distribution(data), enumerate_distribution(m).probs), 0.02);
}

TEST(Gibbs, DeterministicAcrossThreadCounts) {
  Engine rng = make_engine(5);
  const auto m = oracle::random_model(12, 0.3, rng);
  const auto s = build_srbm(m);
  const auto a = gibbs_sample(s, 300, GibbsSettings{50, 3, 1}, 11);
  const auto b = gibbs_sample(s, 300, GibbsSettings{50, 3, 1}, 11);
  const auto c = gibbs_sample(s, 300, GibbsSettings{50, 3, 3}, 11);
  const auto d = gibbs_sample(s, 300, GibbsSettings{50, 3, 1}, 12);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, c);
  EXPECT_NE(a, d);
}

TEST(DatasetIo, CsvAndBinaryRoundTrip) {
  Engine rng = make_engine(1);
  const auto data = oracle::random_dataset(13, 11, rng);
  std::stringstream csv;
  write_dataset_csv(csv, data);
  EXPECT_EQ(read_dataset_csv(csv), data);

  std::stringstream bin;
  write_dataset_binary(bin, data);
  const std::string bytes = bin.str();
  EXPECT_EQ(bytes.substr(0, 4), "SRBM");
  EXPECT_EQ(static_cast<unsigned char>(bytes[4]), 13u);  // little-endian n
  EXPECT_EQ(static_cast<unsigned char>(bytes[8]), 11u);  // little-endian d
  EXPECT_EQ(bytes.size(), 12u + (13u * 11u + 7u) / 8u);
  EXPECT_EQ(read_dataset_binary(bin), data);
}

TEST(DatasetIo, RejectsMalformedInput) {
  std::stringstream ragged("0,1\n1\n");
  EXPECT_THROW(read_dataset_csv(ragged), std::runtime_error);
  std::stringstream values("0,2\n");
  EXPECT_THROW(read_dataset_csv(values), std::runtime_error);
  std::stringstream magic("XXXX");
  EXPECT_THROW(read_dataset_binary(magic), std::runtime_error);
}

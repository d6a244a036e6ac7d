#include <gtest/gtest.h>

#include <random>

#include "traffic/haar_limits.hpp"
#include "traffic/random_matrices.hpp"

using namespace traffic;

namespace {

// Cancels a uniformly chosen adjacent inverse pair until none is left.
StarWord reduce_in_random_order(StarWord w, std::mt19937& gen) {
  auto l = w.letters();
  while (true) {
    std::vector<std::size_t> spots;
    for (std::size_t i = 0; i + 1 < l.size(); ++i)
      if (l[i + 1] == l[i].inverse()) spots.push_back(i);
    if (spots.empty()) return StarWord(l);
    auto i = spots[std::uniform_int_distribution<std::size_t>(0, spots.size() - 1)(gen)];
    l.erase(l.begin() + static_cast<long>(i), l.begin() + static_cast<long>(i) + 2);
  }
}

std::vector<StarWord> all_words(std::size_t len, int letters) {
  std::vector<StarWord> out{StarWord()};
  for (std::size_t p = 0; p < len; ++p) {
    std::vector<StarWord> next;
    for (auto& w : out)
      for (int a = 0; a < letters; ++a)
        for (bool s : {false, true}) next.push_back(w * StarWord({Letter{a, s}}));
    out = std::move(next);
  }
  return out;
}

// Word read along a directed path given in product order.
StarWord path_word(const Linearization& lin, const std::vector<std::size_t>& edges) {
  std::vector<Letter> l;
  for (auto e : edges) l.push_back({lin.meta[e].letter, lin.meta[e].star});
  return StarWord(l);
}

EdgeLabels labels(std::vector<int> d, std::vector<bool> s) { return {std::move(d), std::move(s)}; }

}  // namespace

TEST(FreeGroup, ReductionExamples) {
  EXPECT_TRUE(is_trivial(StarWord::parse("1,1*")));
  EXPECT_TRUE(is_trivial(StarWord::parse("1,2,2*,1*")));
  auto c = free_reduce(StarWord::parse("1,2,1*,2*"));
  EXPECT_EQ(c.length(), 4u);
  EXPECT_EQ(free_reduce(StarWord::parse("1*,2,2*,1,3")).to_string(), "3");
  EXPECT_TRUE(free_reduce(StarWord()).empty());
}

TEST(FreeGroup, ReductionIsConfluent) {
  std::mt19937 gen(11);
  for (std::size_t len = 1; len <= 6; ++len)
    for (auto& w : all_words(len, 2))
      for (int rep = 0; rep < 2; ++rep) EXPECT_EQ(reduce_in_random_order(w, gen), free_reduce(w)) << w.to_string();
}

TEST(FreeGroup, MirrorSubgroupRank) {
  EXPECT_EQ(subgroup_rank(StarWord::parse("1,2"), StarWord::parse("2,1")), 2);
  // a palindrome equals its mirror
  EXPECT_EQ(subgroup_rank(StarWord::parse("1,2,1"), StarWord::parse("1,2,1")), 1);
  EXPECT_EQ(subgroup_rank(StarWord::parse("1,1*"), StarWord::parse("2")), 1);
  EXPECT_TRUE(commute_in_free_group(StarWord::parse("1,2"), StarWord::parse("1,2,1,2")));
}

TEST(Linearize, SingleLetterKeepsTheGraph) {
  LinearGraph T(3, {{1, 0}, {2, 1}, {0, 2}});
  auto lin = linearize(T, StarWord::parse("2*"), 1, 1, 1);
  EXPECT_EQ(lin.graph.vertex_count(), 3u);
  EXPECT_EQ(lin.graph.edge(0), (Edge{1, 0}));
  EXPECT_EQ(lin.graph.edge(1), (Edge{1, 2}));  // transpose block reverses
  EXPECT_EQ(lin.graph.edge(2), (Edge{0, 2}));
  EXPECT_EQ(lin.meta[2].tag, BlockTag::V);
  EXPECT_EQ(lin.meta[1].letter, 1);
  EXPECT_TRUE(lin.meta[1].star);
}

TEST(Linearize, LoopBecomesTwoCycle) {
  auto lin = linearize(loop_graph(1), StarWord::parse("1,1*"), 1, 0, 0);
  ASSERT_EQ(lin.graph.vertex_count(), 2u);
  EXPECT_EQ(lin.graph.edge(0), (Edge{1, 0}));
  EXPECT_EQ(lin.graph.edge(1), (Edge{0, 1}));
  auto info = cactus_decomposition(lin.graph);
  EXPECT_TRUE(info.cactus && info.well_oriented);
  EXPECT_EQ(info.cycles.size(), 1u);
  EXPECT_TRUE(is_valid(lin.graph, lin.labels()));
}

TEST(Linearize, VertexCountAndEdgeOrder) {
  auto T = quotient(minimal_graph(3), SetPartition::parse("0,1,0,2,1,2"));
  for (std::size_t p = 1; p <= 4; ++p) {
    StarWord M = all_words(p, 2)[p];
    auto lin = linearize(T, M, 1, 1, 1);
    EXPECT_EQ(lin.graph.vertex_count(), T.vertex_count() + 3 * (p - 1));
    EXPECT_EQ(lin.graph.order(), 3 * p);
    for (std::size_t e = 0; e < lin.graph.order(); ++e) {
      EXPECT_EQ(lin.meta[e].base_edge, e / p);
      EXPECT_EQ(lin.meta[e].position, e % p);
    }
    EXPECT_EQ(leaf_count(lin.graph), leaf_count(T));
  }
  EXPECT_THROW(linearize(T, StarWord::parse("1"), 1, 1, 0), InvalidArgument);
  EXPECT_THROW(linearize(T, StarWord::parse("1"), 0, 2, 1), InvalidArgument);
}

TEST(Linearize, PathWordsAreTheWordAndItsMirror) {
  auto M = StarWord::parse("1,2*,2,1*,2");
  auto lin = linearize(minimal_graph(3), M, 1, 2, 0);
  const std::size_t p = M.length();
  for (std::size_t k = 0; k < 3; ++k) {
    // product order starts at the edge whose target is no other path edge's source
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < p; ++i) {
      bool first = true;
      for (std::size_t j = 0; j < p; ++j) first = first && lin.graph.edge(k * p + j).source != lin.graph.edge(k * p + i).target;
      if (first) order.push_back(k * p + i);
    }
    ASSERT_EQ(order.size(), 1u);
    while (order.size() < p)
      for (std::size_t i = 0; i < p; ++i)
        if (lin.graph.edge(k * p + i).target == lin.graph.edge(order.back()).source) {
          order.push_back(k * p + i);
          break;
        }
    EXPECT_EQ(path_word(lin, order), k < 1 ? M : M.mirrored()) << "block " << k;
  }
}

TEST(Split, OrdersAndUnion) {
  auto lin = linearize(loop_graph(3), StarWord::parse("1,2"), 1, 1, 1);
  auto sp = split_graphs(lin.graph, lin.meta);
  EXPECT_EQ(sp.t1.order(), 4u);
  EXPECT_EQ(sp.t2.order(), 2u);
  EXPECT_EQ(sp.t1.vertex_count(), lin.graph.vertex_count());
  EXPECT_EQ(sp.t2.vertex_count(), lin.graph.vertex_count());
  std::vector<Edge> back(lin.graph.order());
  for (std::size_t i = 0; i < sp.edges1.size(); ++i) back[sp.edges1[i]] = sp.t1.edge(i);
  for (std::size_t i = 0; i < sp.edges2.size(); ++i) back[sp.edges2[i]] = sp.t2.edge(i);
  EXPECT_EQ(LinearGraph(lin.graph.vertex_count(), back), lin.graph);

  auto lin0 = linearize(loop_graph(2), StarWord::parse("1,2"), 1, 1, 0);
  auto sp0 = split_graphs(lin0.graph, lin0.meta);
  EXPECT_EQ(sp0.t2.order(), 0u);
  EXPECT_EQ(sp0.t2.vertex_count(), lin0.graph.vertex_count());
}

TEST(HaarLimit, CycleCoefficients) {
  std::vector<std::int64_t> want{1, -1, 2, -5, 14, -42, 132, -429};
  for (std::size_t k = 1; k <= 8; ++k) EXPECT_EQ(cycle_coefficient(k), want[k - 1]);
}

TEST(HaarLimit, CycleValues) {
  EXPECT_EQ(haar_limit_injective(cycle_graph(2), labels({0, 0}, {false, true})), Rational(1));
  EXPECT_EQ(haar_limit_injective(cycle_graph(4), labels({0, 0, 0, 0}, {false, true, false, true})), Rational(-1));
  EXPECT_EQ(haar_limit_injective(cycle_graph(6), labels({1, 1, 1, 1, 1, 1}, {true, false, true, false, true, false})),
            Rational(2));
  EXPECT_EQ(haar_limit_injective(cycle_graph(8), labels(std::vector<int>(8, 0),
                                                        {false, true, false, true, false, true, false, true})),
            Rational(-5));
  // not alternated, bicolored, odd, not oriented, not a cactus
  EXPECT_EQ(haar_limit_injective(cycle_graph(4), labels({0, 0, 0, 0}, {false, false, true, true})), Rational(0));
  EXPECT_EQ(haar_limit_injective(cycle_graph(2), labels({0, 1}, {false, true})), Rational(0));
  EXPECT_EQ(haar_limit_injective(cycle_graph(3), labels({0, 0, 0}, {false, true, false})), Rational(0));
  EXPECT_EQ(haar_limit_injective(LinearGraph(2, {{0, 1}, {0, 1}}), labels({0, 0}, {false, true})), Rational(0));
  EXPECT_EQ(haar_limit_injective(LinearGraph(2, {{0, 1}, {1, 0}, {0, 1}, {1, 0}}),
                                 labels({0, 0, 0, 0}, {false, true, false, true})),
            Rational(0));
}

TEST(HaarLimit, ProductOverCyclesAndComponents) {
  // two 2-cycles sharing a vertex, plus a separate 4-cycle
  LinearGraph C(7, {{1, 0}, {0, 1}, {2, 0}, {0, 2}, {4, 3}, {5, 4}, {6, 5}, {3, 6}});
  auto lab = labels({0, 0, 1, 1, 0, 0, 0, 0}, {false, true, true, false, false, true, false, true});
  EXPECT_EQ(haar_limit_injective(C, lab), Rational(-1));
}

TEST(Predict, SingleLetterOnLoopVanishes) {
  auto cert = predict_freeness_limit(StarWord::parse("1"), loop_graph(1), 1, 0, 0);
  EXPECT_EQ(cert.verdict, "VANISHES");
  ASSERT_EQ(cert.quotients.size(), 1u);
  EXPECT_EQ(cert.quotients[0].t1_validity, Validity::NotAlternated);
  EXPECT_EQ(cert.quotients[0].eta, Rational(0));
}

TEST(Predict, CommutatorOnLoopVanishes) {
  auto cert = predict_freeness_limit(StarWord::parse("1,2,1*,2*"), loop_graph(1), 1, 0, 0);
  EXPECT_EQ(cert.verdict, "VANISHES");
  EXPECT_EQ(cert.partitions, 15u);
  std::size_t mult = 0;
  for (auto& q : cert.quotients) {
    mult += q.multiplicity;
    EXPECT_LE(q.eta, Rational(0));
    EXPECT_FALSE(q.eta == Rational(0) && q.t1_validity == Validity::Valid);
  }
  EXPECT_EQ(mult, 15u);
  EXPECT_EQ(cert.mirror_subgroup_rank, 2);
}

TEST(Predict, TrivialWordRejected) {
  EXPECT_THROW(predict_freeness_limit(StarWord::parse("1,1*"), loop_graph(1), 1, 0, 0), InvalidArgument);
  EXPECT_THROW(predict_freeness_limit(StarWord::parse("1,2,2*,1*"), loop_graph(1), 1, 0, 0), InvalidArgument);
}

TEST(Predict, ShortWordsVanish) {
  for (std::size_t len = 1; len <= 3; ++len)
    for (auto& M : all_words(len, 2)) {
      if (is_trivial(M)) continue;
      for (auto blocks : {std::array<std::size_t, 3>{1, 0, 0}, {1, 1, 0}, {1, 0, 1}}) {
        auto T = loop_graph(blocks[0] + blocks[1] + blocks[2]);
        auto cert = predict_freeness_limit(M, T, blocks[0], blocks[1], blocks[2]);
        EXPECT_EQ(cert.verdict, "VANISHES") << M.to_string();
        EXPECT_LE(cert.max_eta, Rational(0));
      }
    }
}

TEST(Predict, ValidCircuitsComposeFromPaths) {
  // Whenever T1 is a valid cactus the circuit words must be trivial.
  for (auto& M : all_words(2, 2)) {
    if (is_trivial(M)) continue;
    auto cert = predict_freeness_limit(M, loop_graph(2), 1, 1, 0);
    for (auto& q : cert.quotients)
      if (q.t1_validity == Validity::Valid) {
        for (auto& w : q.circuit_words) EXPECT_TRUE(is_trivial(w));
      }
  }
}

TEST(Predict, VarianceGraphAndGuards) {
  auto cert = predict_freeness_limit(StarWord::parse("1,2"), loop_graph(1), 1, 0, 0, true);
  EXPECT_TRUE(cert.variance);
  EXPECT_EQ(cert.partitions, bell_number(4));
  EXPECT_EQ(cert.quotients.front().graph.order(), 4u);
  EXPECT_THROW(predict_freeness_limit(StarWord::parse("1,2,1,2,1,2"), loop_graph(2), 1, 1, 0), ResourceLimit);
}

TEST(Predict, DeterministicAcrossThreads) {
  auto a = predict_freeness_limit(StarWord::parse("1,2,1*"), loop_graph(2), 1, 1, 0, false, 1);
  auto b = predict_freeness_limit(StarWord::parse("1,2,1*"), loop_graph(2), 1, 1, 0, false, 4);
  ASSERT_EQ(a.quotients.size(), b.quotients.size());
  for (std::size_t i = 0; i < a.quotients.size(); ++i) {
    EXPECT_EQ(a.quotients[i].partition, b.quotients[i].partition);
    EXPECT_EQ(a.quotients[i].eta, b.quotients[i].eta);
    EXPECT_EQ(a.quotients[i].multiplicity, b.quotients[i].multiplicity);
  }
}

namespace {

TensorOperand random_factored(std::size_t N, std::size_t K, std::mt19937_64& gen) {
  std::normal_distribution<double> nd;
  std::vector<Mat> f;
  for (std::size_t k = 0; k < K; ++k) {
    Mat m(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N));
    for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = cplx(nd(gen), nd(gen));
    f.push_back(m);
  }
  return TensorOperand::factored(f);
}

}  // namespace

TEST(Splitting, ExactSymmetricAverage) {
  std::mt19937_64 gen(5);
  // T' on three vertices: two U edges, two V edges
  LinearGraph Tp(3, {{1, 0}, {0, 1}, {2, 0}, {2, 2}});
  for (int rep = 0; rep < 3; ++rep) {
    auto B1 = random_factored(4, 2, gen);
    auto B2 = symmetrize_operand_exact(random_factored(4, 2, gen));
    auto r = splitting_identity_check(Tp, B1, B2);
    EXPECT_FALSE(r.degenerate);
    EXPECT_LE(r.residual, 1e-9 * std::max(1.0, std::abs(r.lhs)));
  }
  // without symmetrization the identity generally fails
  auto r = splitting_identity_check(Tp, random_factored(4, 2, gen), random_factored(4, 2, gen));
  EXPECT_GT(r.residual, 1e-6);
}

TEST(Splitting, IdentityOperandCountsPermutations) {
  std::mt19937_64 gen(6);
  LinearGraph Tp(4, {{1, 0}, {2, 1}, {3, 3}, {3, 3}});
  auto B1 = random_factored(5, 2, gen);
  auto r = splitting_identity_check(Tp, B1, TensorOperand::identity(5, 2));
  EXPECT_LE(r.residual, 1e-9 * std::max(1.0, std::abs(r.lhs)));
  auto d = splitting_identity_check(LinearGraph(6, {{1, 0}, {2, 1}, {3, 3}, {5, 4}}), random_factored(5, 2, gen),
                                    random_factored(5, 2, gen));
  EXPECT_TRUE(d.degenerate);
}

TEST(Splitting, MonteCarloAtTwenty) {
  std::mt19937_64 gen(7);
  LinearGraph Tp(3, {{1, 0}, {0, 1}, {2, 0}, {2, 1}});
  auto B1 = random_factored(20, 2, gen);
  auto B2 = random_factored(20, 2, gen);
  auto r = splitting_identity_mc(Tp, B1, B2, 400, 17, 4);
  EXPECT_LE(z_score(r, 0.0), 3.0) << r.estimate << " +- " << r.std_error;
  EXPECT_GT(r.std_error, 0.0);
}

#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "comrisk/errors.hpp"
#include "comrisk/gradcheck.hpp"
#include "comrisk/heter.hpp"
#include "comrisk/synthetic.hpp"
#include "helpers.hpp"

using namespace comrisk;
using testutil::random_tensor;

namespace {

struct EdgeSpec {
  std::size_t src, dst;
  Relation rel;
  double weight = 1.0;
};

EnterpriseKG skeleton(std::size_t e, std::size_t p, const std::vector<EdgeSpec>& edges) {
  EnterpriseKG kg;
  for (std::size_t i = 0; i < e; ++i) kg.enterprises.push_back(Enterprise{.id = "E" + std::to_string(i)});
  for (std::size_t j = 0; j < p; ++j) kg.persons.push_back({"P" + std::to_string(j)});
  for (const EdgeSpec& s : edges) {
    HeteroEdge h{s.src, s.dst, s.rel, std::nullopt};
    if (s.rel == Relation::HolderInvestor) h.weight = s.weight;
    kg.edges.push_back(h);
  }
  return kg;
}

ModelConfig heter_config(std::size_t d, std::size_t dp) {
  ModelConfig cfg;
  cfg.input_dim = d;
  cfg.output_dim = dp;
  return cfg;
}

double gelu_ref(double x) {
  const double k = std::sqrt(2.0 / M_PI);
  return 0.5 * x * (1.0 + std::tanh(k * (x + 0.044715 * x * x * x)));
}

Tensor eye(std::size_t n) {
  Tensor t({n, n}, 0.0);
  for (std::size_t i = 0; i < n; ++i) t.at(i, i) = 1.0;
  return t;
}

RelationEdges edges_into(std::size_t dst, std::vector<std::size_t> srcs,
                         std::vector<double> weights = {}) {
  RelationEdges r;
  r.src = std::move(srcs);
  r.dst.assign(r.src.size(), dst);
  r.weight = std::move(weights);
  return r;
}

}  // namespace

TEST(ProjectNodes, ConstantInputNormalizesToZero) {
  const ModelConfig cfg = heter_config(3, 3);
  ParamStore store;
  add_heter_params(store, cfg, 1);
  store.get("heter.0.W_type.enterprise") = eye(3);
  Tape tape;
  BoundParams p(tape, store);
  const Tensor out =
      project_nodes(tape.constant(Tensor({5, 3}, 2.5)), 5, p, "heter.0.", cfg).value();
  for (std::size_t i = 0; i < out.size(); ++i) EXPECT_NEAR(out[i], 0.0, 1e-12);
}

TEST(ProjectNodes, PersonRowsIgnoreEnterpriseRows) {
  const ModelConfig cfg = heter_config(3, 4);
  ParamStore store;
  add_heter_params(store, cfg, 1);
  Rng rng(3, "project");
  Tensor h = random_tensor(7, 3, rng);
  auto run = [&](const Tensor& x) {
    Tape tape;
    BoundParams p(tape, store);
    return project_nodes(tape.constant(x), 4, p, "heter.0.", cfg).value();
  };
  const Tensor a = run(h);
  for (std::size_t v = 0; v < 4; ++v)
    for (std::size_t c = 0; c < 3; ++c) h.at(v, c) = rng.uniform(-9, 9);
  const Tensor b = run(h);
  for (std::size_t v = 4; v < 7; ++v)
    for (std::size_t c = 0; c < 4; ++c) EXPECT_EQ(a.at(v, c), b.at(v, c));
  EXPECT_NE(a.at(0, 0), b.at(0, 0));
}

TEST(ProjectNodes, GradientMatchesFiniteDifferences) {
  const ModelConfig cfg = heter_config(3, 4);
  ParamStore store;
  add_heter_params(store, cfg, 2);
  Rng rng(4, "project-grad");
  store.add("h", random_tensor(7, 3, rng));
  std::vector<double> w(28);
  for (double& v : w) v = rng.uniform(-1, 1);
  const GradCheckResult r = grad_check(
      store,
      [&](Tape&, const BoundParams& p) {
        return ops::weighted_sum(project_nodes(p["h"], 4, p, "heter.0.", cfg), w);
      },
      1e-6);
  EXPECT_LE(r.max_rel_error, 1e-4);
}

TEST(EntityAttention, SingleNeighborCopiesIt) {
  Rng rng(5, "single");
  Tape tape;
  Var hp = tape.constant(random_tensor(3, 4, rng));
  Var alpha;
  const Tensor r = entity_attend_unweighted(hp, edges_into(0, {2}),
                                            tape.constant(random_tensor(8, 4, rng)), 3, 0.01,
                                            &alpha)
                       .value();
  for (std::size_t c = 0; c < 4; ++c) {
    EXPECT_DOUBLE_EQ(r.at(0, c), hp.value().at(2, c));
    EXPECT_DOUBLE_EQ(alpha.value().at(0, c), 1.0);
    EXPECT_EQ(r.at(1, c), 0.0);
  }
}

TEST(EntityAttention, IdenticalNeighborsGiveThatVector) {
  Rng rng(6, "identical");
  Tensor h = random_tensor(3, 4, rng);
  for (std::size_t c = 0; c < 4; ++c) h.at(2, c) = h.at(1, c);
  Tape tape;
  const Tensor r = entity_attend_unweighted(tape.constant(h), edges_into(0, {1, 2}),
                                            tape.constant(random_tensor(8, 4, rng)), 3, 0.01)
                       .value();
  for (std::size_t c = 0; c < 4; ++c) EXPECT_NEAR(r.at(0, c), h.at(1, c), 1e-14);
}

TEST(EntityAttention, HandComputedTwoNeighbors) {
  // d' = 2; h'_0 = (1, 0), h'_1 = (2, -1), h'_2 = (-1, 3).
  const Tensor h = Tensor::matrix(3, 2, {1, 0, 2, -1, -1, 3});
  const Tensor w1 = Tensor::matrix(4, 2, {0.5, -1.0, 0.2, 0.3, 1.0, 0.1, -0.4, 0.6});
  const double slope = 0.01;
  auto lrelu = [&](double x) { return x > 0 ? x : slope * x; };
  double e[2][2];
  for (int j = 0; j < 2; ++j) {
    const double in[4] = {h.at(0, 0), h.at(0, 1), h.at(1 + j, 0), h.at(1 + j, 1)};
    for (int m = 0; m < 2; ++m) {
      double s = 0.0;
      for (int k = 0; k < 4; ++k) s += in[k] * w1.at(k, m);
      e[j][m] = lrelu(s);
    }
  }
  Tape tape;
  const Tensor r = entity_attend_unweighted(tape.constant(h), edges_into(0, {1, 2}),
                                            tape.constant(w1), 3, slope)
                       .value();
  for (int m = 0; m < 2; ++m) {
    const double a1 = std::exp(e[0][m]) / (std::exp(e[0][m]) + std::exp(e[1][m]));
    EXPECT_NEAR(r.at(0, m), a1 * h.at(1, m) + (1 - a1) * h.at(2, m), 1e-14);
  }
}

TEST(EntityAttention, DuplicateNeighborWithEqualLogitsLeavesOutputUnchanged) {
  Rng rng(12, "duplicate");
  Tensor h = random_tensor(4, 3, rng);
  for (std::size_t c = 0; c < 3; ++c) h.at(3, c) = h.at(2, c);
  const Tensor w1 = random_tensor(6, 3, rng);
  Tape tape;
  Var hp = tape.constant(h), w = tape.constant(w1);
  // A lone copy: both neighbors carry the same vector and logits.
  const Tensor one = entity_attend_unweighted(hp, edges_into(0, {2}), w, 4, 0.01).value();
  const Tensor two = entity_attend_unweighted(hp, edges_into(0, {2, 3}), w, 4, 0.01).value();
  for (std::size_t c = 0; c < 3; ++c) EXPECT_NEAR(one.at(0, c), two.at(0, c), 1e-14);
}

TEST(WeightedAttention, EqualAndLogTwoApartWeights) {
  Rng rng(7, "weighted");
  Tape tape;
  Var x = tape.constant(random_tensor(3, 2, rng));
  Var w2 = tape.constant(random_tensor(2, 2, rng));
  Var eta;
  entity_attend_weighted(x, edges_into(0, {1, 2}, {0.3, 0.3}), w2, 3, &eta);
  EXPECT_DOUBLE_EQ(eta.value()[0], 0.5);
  EXPECT_DOUBLE_EQ(eta.value()[1], 0.5);
  entity_attend_weighted(x, edges_into(0, {1, 2}, {0.1 + std::log(2.0), 0.1}), w2, 3, &eta);
  EXPECT_NEAR(eta.value()[0], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(eta.value()[1], 1.0 / 3.0, 1e-15);
}

TEST(WeightedAttention, SingleInvestorIsTransformedNeighbor) {
  Rng rng(8, "single-investor");
  const Tensor x = random_tensor(3, 3, rng), w2 = random_tensor(3, 2, rng);
  Tape tape;
  const Tensor r = entity_attend_weighted(tape.constant(x), edges_into(1, {2}, {42.0}),
                                          tape.constant(w2), 3)
                       .value();
  for (std::size_t c = 0; c < 2; ++c) {
    double want = 0.0;
    for (std::size_t k = 0; k < 3; ++k) want += x.at(2, k) * w2.at(k, c);
    EXPECT_NEAR(r.at(1, c), want, 1e-15);
  }
}

TEST(WeightedAttention, MissingWeightRaises) {
  Tape tape;
  EXPECT_THROW(entity_attend_weighted(tape.constant(Tensor({2, 2}, 1.0)), edges_into(0, {1}),
                                      tape.constant(Tensor({2, 2}, 1.0)), 2),
               DataError);
  const EnterpriseKG kg = skeleton(2, 0, {{0, 1, Relation::HolderInvestor}});
  EnterpriseKG bad = kg;
  bad.edges[0].weight.reset();
  EXPECT_THROW(build_heter_graph(bad, heter_config(2, 2)), DataError);
}

class RelationAttention : public ::testing::Test {
 protected:
  ModelConfig cfg = heter_config(2, 2);
  ParamStore store;
  Rng rng{9, "relation"};
  void SetUp() override { add_heter_params(store, cfg, 3); }
};

TEST_F(RelationAttention, OnePresentRelationIsTheValueProjection) {
  store.get("heter.0.b_V") = Tensor::vector({0.25, -0.5});
  Tape tape;
  BoundParams p(tape, store);
  const Tensor rv = random_tensor(2, 2, rng);
  const Var r[] = {tape.constant(rv)};
  const Relation rels[] = {Relation::Manager};
  const std::vector<unsigned char> present[] = {{1, 0}};
  const Tensor out =
      relation_attend(tape.constant(random_tensor(2, 2, rng)), r, rels, present, p, "heter.0.")
          .value();
  const Tensor& wv = store.get("heter.0.W_V");
  for (std::size_t c = 0; c < 2; ++c) {
    const double want = rv.at(0, 0) * wv.at(0, c) + rv.at(0, 1) * wv.at(1, c) +
                        store.get("heter.0.b_V")[c];
    EXPECT_NEAR(out.at(0, c), want, 1e-15);
    EXPECT_EQ(out.at(1, c), 0.0);
  }
}

TEST_F(RelationAttention, ZeroMuGivesUniformBeta) {
  for (const char* r : {"manager", "shareholder", "branch"})
    store.get(std::string("heter.0.mu.") + r) = Tensor::scalar(0.0);
  Tape tape;
  BoundParams p(tape, store);
  const Var r[] = {tape.constant(random_tensor(3, 2, rng)), tape.constant(random_tensor(3, 2, rng)),
                   tape.constant(random_tensor(3, 2, rng))};
  const Relation rels[] = {Relation::Manager, Relation::Shareholder, Relation::Branch};
  const std::vector<unsigned char> present[] = {{1, 1, 1}, {1, 0, 1}, {1, 1, 0}};
  Var beta;
  relation_attend(tape.constant(random_tensor(3, 2, rng)), r, rels, present, p, "heter.0.",
                  &beta);
  const Tensor& b = beta.value();
  for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(b.at(0, k), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(b.at(1, 0), 0.5, 1e-15);
  EXPECT_EQ(b.at(1, 1), 0.0);
  EXPECT_NEAR(b.at(2, 1), 0.5, 1e-15);
  EXPECT_EQ(b.at(2, 2), 0.0);
}

TEST_F(RelationAttention, HandComputedTwoRelations) {
  const Tensor hp = Tensor::matrix(1, 2, {0.5, -1.0});
  const Tensor r1 = Tensor::matrix(1, 2, {1.0, 2.0}), r2 = Tensor::matrix(1, 2, {-0.5, 0.25});
  store.get("heter.0.W_Q.manager") = Tensor::matrix(2, 2, {1, 0, 0, 1});
  store.get("heter.0.b_Q.manager") = Tensor::vector({0.1, 0.0});
  store.get("heter.0.W_K.manager") = Tensor::matrix(2, 2, {0, 1, 1, 0});
  store.get("heter.0.W_Q.branch") = Tensor::matrix(2, 2, {2, 0, 0, 1});
  store.get("heter.0.W_K.branch") = Tensor::matrix(2, 2, {1, 1, 0, 1});
  store.get("heter.0.b_K.branch") = Tensor::vector({0.0, -0.3});
  store.get("heter.0.mu.branch") = Tensor::scalar(1.5);
  store.get("heter.0.W_V") = Tensor::matrix(2, 2, {1, 2, 3, 4});
  store.get("heter.0.b_V") = Tensor::vector({0.5, -0.5});

  // q1 = (0.6, -1), k1 = (2, 1); q2 = (1, -1), k2 = (-0.5, -0.55).
  const double g1 = (0.6 * 2 + -1.0 * 1) * 1.0 / std::sqrt(2.0);
  const double g2 = (1.0 * -0.5 + -1.0 * -0.55) * 1.5 / std::sqrt(2.0);
  const double b1 = 1.0 / (1.0 + std::exp(g2 - g1)), b2 = 1.0 - b1;
  // v1 = r1 W_V + b_V = (7.5, 9.5); v2 = (0.75, -0.5).
  const double want[2] = {b1 * 7.5 + b2 * 0.75, b1 * 9.5 + b2 * -0.5};

  Tape tape;
  BoundParams p(tape, store);
  const Var r[] = {tape.constant(r1), tape.constant(r2)};
  const Relation rels[] = {Relation::Manager, Relation::Branch};
  const std::vector<unsigned char> present[] = {{1}, {1}};
  const Tensor out = relation_attend(tape.constant(hp), r, rels, present, p, "heter.0.").value();
  EXPECT_NEAR(out.at(0, 0), want[0], 1e-14);
  EXPECT_NEAR(out.at(0, 1), want[1], 1e-14);
}

TEST(HeterEncode, IsolatedNodeWithZeroResidualIsZero) {
  const ModelConfig cfg = heter_config(3, 3);
  ParamStore store;
  add_heter_params(store, cfg, 1);
  store.get("heter.0.eta_res") = Tensor::scalar(0.0);
  const EnterpriseKG kg = skeleton(3, 1, {{0, 1, Relation::Manager}, {3, 1, Relation::Shareholder}});
  const HeterGraph g = build_heter_graph(kg, cfg);
  Rng rng(10, "isolated");
  Tape tape;
  BoundParams p(tape, store);
  const Tensor z = heter_encode(tape.constant(random_tensor(4, 3, rng)), g, p, cfg).value();
  for (std::size_t c = 0; c < 3; ++c) EXPECT_EQ(z.at(2, c), 0.0);
}

TEST(HeterEncode, NoEdgesIsPureResidual) {
  const ModelConfig cfg = heter_config(3, 4);
  ParamStore store;
  add_heter_params(store, cfg, 1);
  store.get("heter.0.eta_res") = Tensor::scalar(0.7);
  const HeterGraph g = build_heter_graph(skeleton(4, 2, {}), cfg);
  Rng rng(11, "no-edges");
  const Tensor h = random_tensor(6, 3, rng);
  Tape tape;
  BoundParams p(tape, store);
  const Tensor hp = project_nodes(tape.constant(h), 4, p, "heter.0.", cfg).value();
  const Tensor z = heter_encode(tape.constant(h), g, p, cfg).value();
  for (std::size_t i = 0; i < z.size(); ++i) EXPECT_NEAR(z[i], 0.7 * gelu_ref(hp[i]), 1e-14);
}

TEST(HeterEncode, AttentionWeightsAreNormalized) {
  const EnterpriseKG kg = gen_gradcheck_graph(40, 3);
  const ModelConfig cfg = heter_config(4, 5);
  ParamStore store;
  add_heter_params(store, cfg, 4);
  const HeterGraph g = build_heter_graph(kg, cfg);
  Rng rng(12, "normalized");
  Tape tape;
  BoundParams p(tape, store);
  HeterTrace trace;
  heter_encode(tape.constant(random_tensor(kg.num_nodes(), 4, rng)), g, p, cfg, &trace);

  ASSERT_FALSE(trace.alpha.empty());
  for (std::size_t a = 0; a < trace.alpha.size(); ++a) {
    const RelationEdges& e = g.relations[static_cast<std::size_t>(trace.alpha_relations[a])];
    std::vector<double> sums(kg.num_nodes() * 5, 0.0);
    for (std::size_t k = 0; k < e.size(); ++k)
      for (std::size_t m = 0; m < 5; ++m) sums[e.dst[k] * 5 + m] += trace.alpha[a].value().at(k, m);
    for (std::size_t v = 0; v < kg.num_nodes(); ++v)
      if (g.has_neighbor[static_cast<std::size_t>(trace.alpha_relations[a])][v])
        for (std::size_t m = 0; m < 5; ++m) EXPECT_NEAR(sums[v * 5 + m], 1.0, 1e-12);
  }
  ASSERT_TRUE(trace.eta.valid());
  const RelationEdges& inv = g.relations[static_cast<std::size_t>(Relation::HolderInvestor)];
  std::vector<double> eta_sum(kg.num_nodes(), 0.0);
  for (std::size_t k = 0; k < inv.size(); ++k) eta_sum[inv.dst[k]] += trace.eta.value()[k];
  for (std::size_t v = 0; v < kg.num_nodes(); ++v)
    if (eta_sum[v] != 0.0) EXPECT_NEAR(eta_sum[v], 1.0, 1e-12);

  const Tensor& beta = trace.beta.value();
  const std::size_t K = beta.cols();
  for (std::size_t v = 0; v < kg.num_nodes(); ++v) {
    double s = 0.0;
    bool any = false;
    for (std::size_t k = 0; k < K; ++k) {
      s += beta.at(v, k);
      any |= trace.beta_mask[v * K + k] != 0;
    }
    if (any) EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(HeterEncode, GradientOnGradcheckGraph) {
  const EnterpriseKG kg = gen_gradcheck_graph(12, 1);
  const ModelConfig cfg = heter_config(3, 4);
  ParamStore store;
  add_heter_params(store, cfg, 5);
  Rng rng(13, "heter-grad");
  store.add("h", random_tensor(kg.num_nodes(), 3, rng));
  const HeterGraph g = build_heter_graph(kg, cfg);
  std::vector<double> w(kg.num_nodes() * 4);
  for (double& v : w) v = rng.uniform(-1, 1);
  // Parameters of relations absent from this graph get no gradient and are
  // left out.
  ParamStore used;
  for (std::size_t i = 0; i < store.size(); ++i) {
    const std::string& n = store.name(i);
    bool absent = false;
    for (Relation rel : kAllRelations) {
      if (g.relations[static_cast<std::size_t>(rel)].size() == 0 &&
          n.find(std::string(to_string(rel))) != std::string::npos)
        absent = true;
    }
    if (!absent) used.add(n, store.value(i));
  }
  const GradCheckResult r = grad_check(
      used,
      [&](Tape&, const BoundParams& p) {
        return ops::weighted_sum(heter_encode(p["h"], g, p, cfg), w);
      },
      1e-6);
  EXPECT_LE(r.max_rel_error, 1e-4) << r.max_rel_error;
}

TEST(HeterEncode, PermutationEquivariance) {
  const ModelConfig cfg = heter_config(3, 3);
  ParamStore store;
  add_heter_params(store, cfg, 6);
  Rng rng(14, "heter-perm");
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t E = 3 + rng.below(5), P = 2 + rng.below(4), N = E + P;
    std::vector<EdgeSpec> edges;
    for (int k = 0; k < 14; ++k) {
      const std::size_t rel = rng.below(kRelationCount);
      const Relation r = static_cast<Relation>(rel);
      const bool ee = r == Relation::HolderInvestor || r == Relation::Branch;
      std::size_t s = ee ? rng.below(E) : E + rng.below(P);
      std::size_t d = rng.below(E);
      if (s == d) continue;
      edges.push_back({s, d, r, rng.uniform(0, 2)});
    }
    // Enterprises and persons are shuffled within their own kind.
    std::vector<std::size_t> perm(N);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = E - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);
    for (std::size_t i = N - 1; i > E; --i) std::swap(perm[i], perm[E + rng.below(i - E + 1)]);
    std::vector<EdgeSpec> pedges = edges;
    for (EdgeSpec& e : pedges) {
      e.src = perm[e.src];
      e.dst = perm[e.dst];
    }
    const Tensor h = random_tensor(N, 3, rng);
    Tensor ph({N, 3}, 0.0);
    for (std::size_t v = 0; v < N; ++v)
      for (std::size_t c = 0; c < 3; ++c) ph.at(perm[v], c) = h.at(v, c);
    auto run = [&](const std::vector<EdgeSpec>& es, const Tensor& x) {
      const HeterGraph g = build_heter_graph(skeleton(E, P, es), cfg);
      Tape tape;
      BoundParams p(tape, store);
      return heter_encode(tape.constant(x), g, p, cfg).value();
    };
    const Tensor z = run(edges, h), pz = run(pedges, ph);
    for (std::size_t v = 0; v < N; ++v)
      for (std::size_t c = 0; c < 3; ++c) EXPECT_NEAR(pz.at(perm[v], c), z.at(v, c), 1e-12);
  }
}

TEST(HeterEncode, DistantPerturbationHasNoEffectWithoutBatchNorm) {
  ModelConfig cfg = heter_config(3, 3);
  cfg.bn_identity = true;
  ParamStore store;
  add_heter_params(store, cfg, 7);
  // Path 0 - 1 - 2 - 3 over enterprises plus a person on 3.
  const EnterpriseKG kg = skeleton(4, 1, {{0, 1, Relation::Branch},
                                          {1, 2, Relation::HolderInvestor, 0.5},
                                          {2, 3, Relation::Branch},
                                          {4, 3, Relation::Manager}});
  const HeterGraph g = build_heter_graph(kg, cfg);
  Rng rng(15, "local");
  Tensor h = random_tensor(5, 3, rng);
  auto run = [&](const Tensor& x) {
    Tape tape;
    BoundParams p(tape, store);
    return heter_encode(tape.constant(x), g, p, cfg).value();
  };
  const Tensor before = run(h);
  for (std::size_t c = 0; c < 3; ++c) h.at(3, c) += 1.0;
  const Tensor after = run(h);
  for (std::size_t c = 0; c < 3; ++c) {
    EXPECT_EQ(before.at(0, c), after.at(0, c));
    EXPECT_EQ(before.at(1, c), after.at(1, c));
  }
  EXPECT_NE(before.at(2, 0), after.at(2, 0));
}

TEST(HeterGraph, EdgesAreSymmetricUnlessDirected) {
  const EnterpriseKG kg = skeleton(2, 1, {{2, 0, Relation::Manager}});
  ModelConfig cfg = heter_config(2, 2);
  HeterGraph g = build_heter_graph(kg, cfg);
  const RelationEdges& m = g.relations[static_cast<std::size_t>(Relation::Manager)];
  EXPECT_EQ(m.size(), 2u);
  EXPECT_TRUE(g.has_neighbor[0][0]);
  EXPECT_TRUE(g.has_neighbor[0][2]);
  cfg.directed_relations = true;
  g = build_heter_graph(kg, cfg);
  EXPECT_EQ(g.relations[0].size(), 1u);
  EXPECT_FALSE(g.has_neighbor[0][2]);
}

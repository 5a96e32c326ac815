#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "comrisk/ekg.hpp"
#include "comrisk/ekg_io.hpp"
#include "comrisk/errors.hpp"
#include "comrisk/features.hpp"
#include "comrisk/incidence.hpp"
#include "comrisk/synthetic.hpp"
#include "helpers.hpp"

using namespace comrisk;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("comrisk_unit_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Lawsuit suit(const std::string& cause, Date date) {
  Lawsuit l;
  l.cause = parse_cause(cause);
  l.date = date;
  return l;
}

// One labeled enterprise observed at the snapshot date.
EnterpriseKG single_enterprise(std::vector<Lawsuit> lawsuits) {
  EnterpriseKG kg;
  kg.snapshot_date = Date(2021, 12, 31);
  Enterprise e;
  e.id = "E0";
  e.attrs = {12, 100.0, 50.0};
  e.label = 0;
  e.lawsuits = std::move(lawsuits);
  kg.enterprises.push_back(e);
  kg.splits.train = {0};
  return kg;
}

Date days_before(const Date& d, long n) { return Date(d.days() - std::chrono::days(n)); }

}  // namespace

TEST(Date, ParseFormatAndMonths) {
  const Date d = Date::parse("2020-02-29");
  EXPECT_EQ(d.str(), "2020-02-29");
  EXPECT_THROW(Date::parse("2020-2-29"), DataError);
  EXPECT_THROW(Date::parse("2021-02-29"), DataError);
  EXPECT_EQ(months_between(Date(2020, 1, 1), Date(2020, 1, 31)), 0);
  EXPECT_EQ(months_between(Date(2020, 1, 1), Date(2021, 12, 31)), 23);
  EXPECT_EQ(months_between(Date(2020, 1, 1), Date(2022, 1, 1)), 24);
  EXPECT_LT(months_between(Date(2022, 1, 1), Date(2020, 1, 1)), 0);
}

TEST(EkgIo, RoundTripIsExact) {
  SynthConfig sc;
  sc.seed = 5;
  sc.n_enterprises = 40;
  const EnterpriseKG kg = gen_synthetic(sc);
  const fs::path dir = temp_dir("roundtrip");
  write_ekg(kg, dir);
  const EnterpriseKG back = load_ekg(dir);
  EXPECT_TRUE(back == kg);
  const fs::path dir2 = temp_dir("roundtrip2");
  write_ekg(back, dir2);
  for (const char* f : {"nodes.jsonl", "edges.jsonl", "hyperedges.jsonl", "lawsuits.jsonl",
                        "splits.json"}) {
    EXPECT_EQ(slurp(dir / f), slurp(dir2 / f)) << f;
  }
}

TEST(EkgIo, UnknownEdgeEndpointIsNamed) {
  SynthConfig sc;
  sc.n_enterprises = 10;
  const fs::path dir = temp_dir("badedge");
  write_ekg(gen_synthetic(sc), dir);
  {
    std::ofstream out(dir / "edges.jsonl", std::ios::app);
    out << R"({"src":"E00","dst":"GHOST_17","rel":"branch"})" << "\n";
  }
  try {
    load_ekg(dir);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("GHOST_17"), std::string::npos) << e.what();
  }
}

TEST(EkgIo, EmptyHyperedgeFileLoads) {
  SynthConfig sc;
  sc.n_enterprises = 12;
  const fs::path dir = temp_dir("nohyper");
  write_ekg(gen_synthetic(sc), dir);
  { std::ofstream out(dir / "hyperedges.jsonl", std::ios::trunc); }
  const EnterpriseKG kg = load_ekg(dir);
  EXPECT_TRUE(kg.hyperedges.empty());
  for (HyperedgeType t : kAllHyperedgeTypes) {
    EXPECT_THROW(build_incidence(kg, t), EmptyHyperedgeTypeError);
  }
}

TEST(EkgIo, MalformedLineReportsFileAndLine) {
  SynthConfig sc;
  sc.n_enterprises = 10;
  const fs::path dir = temp_dir("malformed");
  write_ekg(gen_synthetic(sc), dir);
  {
    std::ofstream out(dir / "lawsuits.jsonl", std::ios::app);
    out << "{not json\n";
  }
  try {
    load_ekg(dir);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("lawsuits.jsonl:"), std::string::npos) << e.what();
  }
}

TEST(Incidence, TwoNodesOneHyperedge) {
  const IncidenceMatrix inc = build_incidence(2, {{0, 1}});
  EXPECT_EQ(inc.to_dense(), Tensor::matrix(2, 1, {1, 1}));
  EXPECT_EQ(inc.node_degree, (std::vector<double>{1, 1}));
  EXPECT_EQ(inc.edge_degree, (std::vector<double>{2}));
}

TEST(Incidence, ChainDegreesAndIsolatedNode) {
  const IncidenceMatrix inc = build_incidence(4, {{0, 1}, {1, 2}});
  EXPECT_EQ(inc.node_degree, (std::vector<double>{1, 2, 1, 1}));
  EXPECT_EQ(inc.edge_degree, (std::vector<double>{2, 2}));
  EXPECT_FALSE(inc.isolated[0]);
  EXPECT_TRUE(inc.isolated[3]);
  EXPECT_EQ(inc.at(3, 0) + inc.at(3, 1), 0.0);
}

TEST(Incidence, MatchesMembershipScan) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Rng rng(seed, "incidence-test");
    const std::size_t n = 2 + rng.below(19), m = 1 + rng.below(6);
    std::vector<std::vector<std::size_t>> edges(m);
    for (auto& e : edges) {
      const std::size_t k = 1 + rng.below(n);
      for (std::size_t t = 0; t < k; ++t) e.push_back(rng.below(n));
    }
    const IncidenceMatrix inc = build_incidence(n, edges);
    for (std::size_t v = 0; v < n; ++v) {
      double deg = 0.0;
      for (std::size_t c = 0; c < m; ++c) {
        const std::set<std::size_t> members(edges[c].begin(), edges[c].end());
        const double h = members.count(v) ? 1.0 : 0.0;
        EXPECT_EQ(inc.at(v, c), h);
        deg += h;
      }
      EXPECT_EQ(inc.isolated[v], deg == 0.0);
      EXPECT_EQ(inc.node_degree[v], deg == 0.0 ? 1.0 : deg);
    }
    for (std::size_t c = 0; c < m; ++c) {
      const std::set<std::size_t> members(edges[c].begin(), edges[c].end());
      EXPECT_EQ(inc.edge_degree[c], static_cast<double>(members.size()));
    }
  }
}

TEST(Features, NoLawsuitsGivesZeroCounts) {
  const FeatureTable t = extract_lawsuit_features(single_enterprise({}));
  for (std::size_t j = kLoanDisputes; j < kFeatureCount; ++j) EXPECT_EQ(t.rows[0][j], 0.0);
  EXPECT_EQ(t.rows[0][kEstablishedTime], 12.0);
  EXPECT_EQ(t.rows[0][kRegisteredCapital], 100.0);
}

TEST(Features, RecentLoanDispute) {
  const Date obs(2021, 12, 31);
  const FeatureTable t = extract_lawsuit_features(
      single_enterprise({suit("loan_contract_dispute", days_before(obs, 183))}));
  EXPECT_EQ(t.rows[0][kLoanDisputes], 1.0);
  EXPECT_EQ(t.rows[0][kLawsuitsWithinTwoYears], 1.0);
  EXPECT_EQ(t.rows[0][kLawsuitsOverTwoYears], 0.0);
}

TEST(Features, TwentyFourMonthBoundary) {
  const Date obs(2021, 12, 31);
  // 30 and 10 whole months before the observation time
  const FeatureTable t = extract_lawsuit_features(single_enterprise(
      {suit("labor_dispute", days_before(obs, 914)), suit("labor_dispute", days_before(obs, 305))}));
  EXPECT_EQ(t.rows[0][kLawsuitsWithinTwoYears], 1.0);
  EXPECT_EQ(t.rows[0][kLawsuitsOverTwoYears], 1.0);
  EXPECT_EQ(t.rows[0][kLoanDisputes], 0.0);
  EXPECT_EQ(t.rows[0][kSalesDisputes], 0.0);
}

TEST(Features, LawsuitsAfterObservationAreSkipped) {
  EnterpriseKG kg = single_enterprise(
      {suit("loan_contract_dispute", Date(2021, 6, 1)), suit("loan_contract_dispute", Date(2021, 9, 1))});
  kg.enterprises[0].label = 1;
  kg.enterprises[0].observation_time = Date(2021, 7, 1);
  const FeatureTable t = extract_lawsuit_features(kg);
  EXPECT_EQ(t.rows[0][kLoanDisputes], 1.0);
  EXPECT_EQ(t.excluded_lawsuits, 1u);
}

TEST(Features, CountsAreConserved) {
  SynthConfig sc;
  sc.seed = 9;
  sc.n_enterprises = 80;
  const EnterpriseKG kg = gen_synthetic(sc);
  const FeatureTable t = extract_lawsuit_features(kg);
  double courts = 0, verdicts = 0, windows = 0, visible = 0, supreme = 0, other_verdicts = 0;
  for (std::size_t i = 0; i < kg.num_enterprises(); ++i) {
    const auto& r = t.rows[i];
    courts += r[kGrassrootsCourt] + r[kIntermediateCourt] + r[kHigherCourt];
    verdicts += r[kPlaintiffWinner] + r[kDefendantLoser];
    windows += r[kLawsuitsWithinTwoYears] + r[kLawsuitsOverTwoYears];
    for (const Lawsuit& l : kg.enterprises[i].lawsuits) {
      if (l.date > kg.observation_time(i)) continue;
      visible += 1;
      supreme += l.court == CourtLevel::Supreme;
      other_verdicts += l.verdict == Verdict::PlaintiffLoser || l.verdict == Verdict::DefendantWinner;
    }
  }
  EXPECT_EQ(windows, visible);
  EXPECT_EQ(courts + supreme, visible);
  EXPECT_EQ(verdicts + other_verdicts, visible);
}

TEST(Synthetic, SameSeedSameBytes) {
  SynthConfig sc;
  sc.seed = 77;
  const fs::path a = temp_dir("det_a"), b = temp_dir("det_b");
  write_ekg(gen_synthetic(sc), a);
  write_ekg(gen_synthetic(sc), b);
  for (const char* f : {"nodes.jsonl", "edges.jsonl", "hyperedges.jsonl", "lawsuits.jsonl",
                        "splits.json"}) {
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
  sc.seed = 78;
  EXPECT_FALSE(gen_synthetic(sc) == gen_synthetic(SynthConfig{}));
}

TEST(Synthetic, RejectsBadConfig) {
  SynthConfig sc;
  sc.n_enterprises = 9;
  EXPECT_THROW(gen_synthetic(sc), ConfigError);
  sc.n_enterprises = 20;
  sc.signal_strength = 1.5;
  EXPECT_THROW(gen_synthetic(sc), ConfigError);
}

TEST(Synthetic, GradcheckGraphShape) {
  const EnterpriseKG kg = gen_gradcheck_graph(12, 1);
  EXPECT_EQ(kg.num_nodes(), 12u);
  std::set<Relation> rels;
  for (const HeteroEdge& e : kg.edges) rels.insert(e.rel);
  EXPECT_EQ(rels.size(), 3u);
  std::set<HyperedgeType> types;
  for (const Hyperedge& h : kg.hyperedges) types.insert(h.type);
  EXPECT_EQ(types.size(), 2u);
}

namespace {

std::vector<std::vector<double>> feature_rows(const EnterpriseKG& kg) {
  const FeatureTable t = extract_lawsuit_features(kg);
  std::vector<std::vector<double>> x;
  for (const auto& r : t.rows) {
    std::vector<double> row(r.begin(), r.end());
    for (std::size_t j = 0; j < 3; ++j) row[j] = std::log1p(row[j]);
    x.push_back(row);
  }
  return x;
}

double logistic_test_auc(const EnterpriseKG& kg) {
  const auto x = feature_rows(kg);
  std::vector<std::vector<double>> xtr;
  std::vector<int> ytr;
  for (std::size_t i : kg.splits.train) {
    xtr.push_back(x[i]);
    ytr.push_back(*kg.enterprises[i].label);
  }
  testutil::Logistic lr;
  lr.fit(xtr, ytr);
  std::vector<double> s;
  std::vector<int> y;
  for (const auto* split : {&kg.splits.val, &kg.splits.test}) {
    for (std::size_t i : *split) {
      s.push_back(lr.predict(x[i]));
      y.push_back(*kg.enterprises[i].label);
    }
  }
  return testutil::brute_force_auc(s, y);
}

}  // namespace

TEST(Synthetic, IntraChannelIsLinearlyRecoverable) {
  SynthConfig sc;
  sc.seed = 3;
  sc.n_enterprises = 500;
  sc.hyper_channel = false;
  sc.contagion_channel = false;
  EXPECT_GE(logistic_test_auc(gen_synthetic(sc)), 0.95);
}

TEST(Synthetic, NullSignalHasNoRecoverableLabel) {
  double mean = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SynthConfig sc;
    sc.seed = seed;
    sc.n_enterprises = 200;
    sc.signal_strength = 0.0;
    mean += logistic_test_auc(gen_synthetic(sc)) / 20.0;
  }
  EXPECT_NEAR(mean, 0.5, 0.05);
}

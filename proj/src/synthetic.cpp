#include "comrisk/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <vector>

#include "comrisk/errors.hpp"
#include "comrisk/rng.hpp"

namespace comrisk {
namespace {

std::string make_id(char prefix, std::size_t i, std::size_t n) {
  const int width = static_cast<int>(std::to_string(std::max<std::size_t>(n, 1)).size());
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c%0*zu", prefix, width, i);
  return buf;
}

void standardize(std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / n);
  for (double& x : v) x = sd > 0.0 ? (x - mean) / sd : 0.0;
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Date days_before(const Date& d, long days) {
  return Date(d.days() - std::chrono::days(days));
}

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[rng.below(i)]);
  }
}

EnterpriseKG generate(const SynthConfig& cfg) {
  if (!(cfg.signal_strength >= 0.0 && cfg.signal_strength <= 1.0)) {
    throw ConfigError("signal_strength must lie in [0, 1]");
  }
  if (!(cfg.bankrupt_fraction > 0.0 && cfg.bankrupt_fraction < 1.0)) {
    throw ConfigError("bankrupt_fraction must lie in (0, 1)");
  }
  const std::size_t E = cfg.n_enterprises;
  const std::size_t P = cfg.n_persons ? cfg.n_persons : E / 2;
  const std::uint64_t seed = cfg.seed;

  EnterpriseKG kg;
  kg.snapshot_date = Date(2021, 12, 31);
  kg.enterprises.resize(E);
  for (std::size_t i = 0; i < E; ++i) kg.enterprises[i].id = make_id('E', i, E);
  kg.persons.resize(P);
  for (std::size_t j = 0; j < P; ++j) kg.persons[j].id = make_id('P', j, P);

  // Latent structure.
  Rng group_rng(seed, "synth/groups");
  const std::size_t n_industry = std::max<std::size_t>(2, (E + 7) / 15);
  const std::size_t n_area = std::max<std::size_t>(2, E / 20);
  std::vector<std::size_t> industry(E), area(E);
  for (std::size_t i = 0; i < E; ++i) {
    industry[i] = i % n_industry;
    area[i] = group_rng.below(n_area);
  }
  shuffle(industry, group_rng);

  // About a third of the industries are distressed; their members carry a
  // higher latent distress.
  Rng latent_rng(seed, "synth/latent");
  std::vector<double> distressed(n_industry, 0.0);
  for (double& d : distressed) d = latent_rng.bernoulli(1.0 / 3.0) ? 1.0 : 0.0;
  distressed[latent_rng.below(n_industry)] = 1.0;
  std::vector<double> a(E);
  for (std::size_t i = 0; i < E; ++i) a[i] = latent_rng.normal() + 0.75 * distressed[industry[i]];

  // Holder-investor edges: every enterprise has one or two investors.
  Rng invest_rng(seed, "synth/invest");
  std::vector<std::vector<std::pair<std::size_t, double>>> inv_nbrs(E);
  for (std::size_t i = 0; i < E; ++i) {
    const std::size_t k = 1 + invest_rng.below(2);
    std::set<std::size_t> chosen;
    while (chosen.size() < k) {
      const std::size_t j = invest_rng.below(E);
      if (j != i) chosen.insert(j);
    }
    for (std::size_t j : chosen) {
      const double w = std::round(invest_rng.uniform(0.5, 3.0) * 100.0) / 100.0;
      kg.edges.push_back({j, i, Relation::HolderInvestor, w});
      inv_nbrs[i].push_back({j, w});
      inv_nbrs[j].push_back({i, w});
    }
  }
  // Softmax-weighted neighbor mean, the quantity the weighted attention reads.
  std::vector<double> contagion(E, 0.0);
  for (std::size_t i = 0; i < E; ++i) {
    double mx = -1e300, z = 0.0, s = 0.0;
    for (const auto& [j, w] : inv_nbrs[i]) mx = std::max(mx, w);
    for (const auto& [j, w] : inv_nbrs[i]) {
      z += std::exp(w - mx);
      s += std::exp(w - mx) * a[j];
    }
    contagion[i] = s / z;
  }

  // Persons and their relations; branch edges carry no signal.
  Rng person_rng(seed, "synth/persons");
  std::vector<std::set<std::size_t>> person_firms(P);
  constexpr Relation person_rels[] = {Relation::Manager, Relation::Shareholder,
                                      Relation::OtherStakeholder};
  for (std::size_t j = 0; j < P; ++j) {
    const std::size_t k = 1 + person_rng.below(3);
    while (person_firms[j].size() < std::min(k, E)) {
      person_firms[j].insert(person_rng.below(E));
    }
    for (std::size_t i : person_firms[j]) {
      kg.edges.push_back({E + j, i, person_rels[person_rng.below(3)], std::nullopt});
    }
  }
  for (std::size_t b = 0; b < E / 10; ++b) {
    const std::size_t s = person_rng.below(E), d = person_rng.below(E);
    if (s != d) kg.edges.push_back({s, d, Relation::Branch, std::nullopt});
  }

  // Labels.
  std::vector<double> risk(E, 0.0);
  auto add_term = [&risk](std::vector<double> term) {
    standardize(term);
    for (std::size_t i = 0; i < risk.size(); ++i) risk[i] += term[i];
  };
  if (cfg.intra_channel) add_term(a);
  if (cfg.hyper_channel) {
    std::vector<double> t(E);
    for (std::size_t i = 0; i < E; ++i) t[i] = distressed[industry[i]];
    add_term(t);
  }
  if (cfg.contagion_channel) add_term(contagion);
  standardize(risk);
  Rng noise_rng(seed, "synth/noise");
  std::vector<double> score(E);
  for (std::size_t i = 0; i < E; ++i) {
    score[i] = cfg.signal_strength * risk[i] + (1.0 - cfg.signal_strength) * noise_rng.normal();
  }
  std::vector<std::size_t> order(E);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&score](std::size_t x, std::size_t y) { return score[x] > score[y]; });
  const std::size_t n_bankrupt = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(cfg.bankrupt_fraction * static_cast<double>(E))), 1,
      E - 1);
  for (std::size_t r = 0; r < E; ++r) kg.enterprises[order[r]].label = r < n_bankrupt ? 1 : 0;

  // Attributes and lawsuits, relative to each enterprise's observation time.
  Rng attr_rng(seed, "synth/attributes");
  Rng suit_rng(seed, "synth/lawsuits");
  for (std::size_t i = 0; i < E; ++i) {
    Enterprise& e = kg.enterprises[i];
    if (*e.label == 1) {
      e.observation_time = days_before(kg.snapshot_date, static_cast<long>(attr_rng.below(730)));
    }
    const Date obs = kg.observation_time(i);
    const double reg = std::exp(6.0 - 0.8 * a[i] + 0.2 * attr_rng.normal());
    e.attrs.registered_capital = std::round(reg * 100.0) / 100.0;
    e.attrs.paid_in_capital =
        std::round(reg * logistic(1.0 - a[i] + 0.3 * attr_rng.normal()) * 100.0) / 100.0;
    e.attrs.established_time = std::max<long>(
        1, std::lround(150.0 * std::exp(-0.25 * a[i] + 0.2 * attr_rng.normal())));

    auto make_suit = [&](bool recent) {
      Lawsuit l;
      const double u = suit_rng.uniform();
      const double p_loan = recent ? 0.6 * logistic(a[i]) : 0.3;
      l.cause = parse_cause(u < p_loan         ? "loan_contract_dispute"
                            : u < p_loan + 0.3 ? "sales_contract_dispute"
                                               : "labor_dispute");
      const double c = suit_rng.uniform();
      l.court = c < 0.6 ? CourtLevel::Grassroots
                : c < 0.9 ? CourtLevel::Intermediate
                : c < 0.98 ? CourtLevel::Higher
                           : CourtLevel::Supreme;
      if (recent && suit_rng.bernoulli(logistic(1.5 * a[i]))) {
        l.verdict = Verdict::DefendantLoser;
      } else {
        l.verdict = static_cast<Verdict>(suit_rng.below(3));
      }
      // Recent: 0-23 whole months back, closer to the observation time for
      // high a; old: 26-120 months back.
      const long days =
          recent ? std::lround(699.0 * std::pow(suit_rng.uniform(), std::exp(0.7 * a[i])))
                 : 790 + static_cast<long>(suit_rng.below(2860));
      l.date = days_before(obs, days);
      return l;
    };
    const int n_recent = std::min(30, suit_rng.poisson(1.5 * std::exp(0.6 * a[i])));
    const int n_old = suit_rng.poisson(2.0);
    for (int k = 0; k < n_recent; ++k) e.lawsuits.push_back(make_suit(true));
    for (int k = 0; k < n_old; ++k) e.lawsuits.push_back(make_suit(false));
    std::stable_sort(e.lawsuits.begin(), e.lawsuits.end(),
                     [](const Lawsuit& x, const Lawsuit& y) { return x.date < y.date; });
  }

  // Hyperedges.
  for (std::size_t k = 0; k < n_industry; ++k) {
    Hyperedge h{HyperedgeType::Industry, {}};
    for (std::size_t i = 0; i < E; ++i) if (industry[i] == k) h.members.push_back(i);
    if (!h.members.empty()) kg.hyperedges.push_back(std::move(h));
  }
  for (std::size_t k = 0; k < n_area; ++k) {
    Hyperedge h{HyperedgeType::Area, {}};
    for (std::size_t i = 0; i < E; ++i) if (area[i] == k) h.members.push_back(i);
    if (!h.members.empty()) kg.hyperedges.push_back(std::move(h));
  }
  for (std::size_t j = 0; j < P; ++j) {
    if (person_firms[j].size() < 2) continue;
    kg.hyperedges.push_back(
        {HyperedgeType::Stakeholder, {person_firms[j].begin(), person_firms[j].end()}});
  }

  // Splits 60/20/20.
  Rng split_rng(seed, "synth/splits");
  std::vector<std::size_t> perm(E);
  std::iota(perm.begin(), perm.end(), 0);
  shuffle(perm, split_rng);
  const std::size_t n_train = E * 6 / 10, n_val = E * 2 / 10;
  kg.splits.train.assign(perm.begin(), perm.begin() + n_train);
  kg.splits.val.assign(perm.begin() + n_train, perm.begin() + n_train + n_val);
  kg.splits.test.assign(perm.begin() + n_train + n_val, perm.end());
  for (auto* s : {&kg.splits.train, &kg.splits.val, &kg.splits.test}) {
    std::sort(s->begin(), s->end());
  }
  kg.validate();
  return kg;
}

}  // namespace

EnterpriseKG gen_synthetic(const SynthConfig& cfg) {
  if (cfg.n_enterprises < 10) throw ConfigError("gen_synthetic needs at least 10 enterprises");
  return generate(cfg);
}

EnterpriseKG gen_gradcheck_graph(std::size_t n_nodes, std::uint64_t seed) {
  if (n_nodes < 9) throw ConfigError("gradient-check graph needs at least 9 nodes");
  SynthConfig sc;
  sc.seed = seed;
  sc.n_persons = std::max<std::size_t>(3, n_nodes / 4);
  sc.n_enterprises = n_nodes - sc.n_persons;
  EnterpriseKG kg = generate(sc);
  std::vector<HeteroEdge> edges;
  for (HeteroEdge e : kg.edges) {
    if (e.rel == Relation::Branch) continue;
    if (e.rel == Relation::OtherStakeholder) e.rel = Relation::Manager;
    edges.push_back(e);
  }
  kg.edges = std::move(edges);
  std::erase_if(kg.hyperedges,
                [](const Hyperedge& h) { return h.type == HyperedgeType::Stakeholder; });
  kg.validate();
  return kg;
}

}  // namespace comrisk

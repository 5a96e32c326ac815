#include "comrisk/ekg.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <unordered_set>

#include "comrisk/errors.hpp"

namespace comrisk {

Date::Date(int year, unsigned month, unsigned day) {
  const std::chrono::year_month_day ymd{std::chrono::year{year},
                                        std::chrono::month{month},
                                        std::chrono::day{day}};
  if (!ymd.ok()) throw DataError("invalid calendar date");
  days_ = std::chrono::sys_days{ymd};
}

Date Date::parse(std::string_view text) {
  auto bad = [&] { return DataError("malformed date '" + std::string(text) + "'"); };
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') throw bad();
  auto field = [&](std::size_t pos, std::size_t len) {
    int v = 0;
    const char* b = text.data() + pos;
    auto [p, ec] = std::from_chars(b, b + len, v);
    if (ec != std::errc() || p != b + len) throw bad();
    return v;
  };
  const int y = field(0, 4);
  const int m = field(5, 2);
  const int d = field(8, 2);
  const std::chrono::year_month_day ymd{std::chrono::year{y},
                                        std::chrono::month{static_cast<unsigned>(m)},
                                        std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) throw bad();
  return Date(std::chrono::sys_days{ymd});
}

std::string Date::str() const {
  const std::chrono::year_month_day ymd{days_};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()));
  return buf;
}

long months_between(const Date& earlier, const Date& later) {
  const double days = static_cast<double>(later.days_since(earlier));
  return static_cast<long>(std::floor(days / 30.44));
}

std::string_view to_string(NodeKind k) {
  return k == NodeKind::Enterprise ? "enterprise" : "person";
}

std::string_view to_string(Relation r) {
  switch (r) {
    case Relation::Manager: return "manager";
    case Relation::Shareholder: return "shareholder";
    case Relation::OtherStakeholder: return "other_stakeholder";
    case Relation::HolderInvestor: return "holder_investor";
    case Relation::Branch: return "branch";
  }
  return "?";
}

std::string_view to_string(HyperedgeType t) {
  switch (t) {
    case HyperedgeType::Industry: return "industry";
    case HyperedgeType::Area: return "area";
    case HyperedgeType::Stakeholder: return "stakeholder";
  }
  return "?";
}

std::string_view to_string(CourtLevel c) {
  switch (c) {
    case CourtLevel::Grassroots: return "grassroots";
    case CourtLevel::Intermediate: return "intermediate";
    case CourtLevel::Higher: return "higher";
    case CourtLevel::Supreme: return "supreme";
  }
  return "?";
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::PlaintiffWinner: return "plaintiff_winner";
    case Verdict::PlaintiffLoser: return "plaintiff_loser";
    case Verdict::DefendantWinner: return "defendant_winner";
    case Verdict::DefendantLoser: return "defendant_loser";
  }
  return "?";
}

std::string to_string(const LawsuitCause& c) {
  switch (c.kind) {
    case CauseKind::LoanContractDispute: return "loan_contract_dispute";
    case CauseKind::SalesContractDispute: return "sales_contract_dispute";
    case CauseKind::Other: return c.raw;
  }
  return c.raw;
}

std::optional<Relation> parse_relation(std::string_view s) {
  for (Relation r : kAllRelations) {
    if (to_string(r) == s) return r;
  }
  return std::nullopt;
}

std::optional<HyperedgeType> parse_hyperedge_type(std::string_view s) {
  for (HyperedgeType t : kAllHyperedgeTypes) {
    if (to_string(t) == s) return t;
  }
  return std::nullopt;
}

std::optional<CourtLevel> parse_court(std::string_view s) {
  for (CourtLevel c : {CourtLevel::Grassroots, CourtLevel::Intermediate,
                       CourtLevel::Higher, CourtLevel::Supreme}) {
    if (to_string(c) == s) return c;
  }
  return std::nullopt;
}

std::optional<Verdict> parse_verdict(std::string_view s) {
  for (Verdict v : {Verdict::PlaintiffWinner, Verdict::PlaintiffLoser,
                    Verdict::DefendantWinner, Verdict::DefendantLoser}) {
    if (to_string(v) == s) return v;
  }
  return std::nullopt;
}

LawsuitCause parse_cause(std::string_view s) {
  if (s == "loan_contract_dispute") return {CauseKind::LoanContractDispute, ""};
  if (s == "sales_contract_dispute") return {CauseKind::SalesContractDispute, ""};
  return {CauseKind::Other, std::string(s)};
}

const std::string& EnterpriseKG::node_id(std::size_t node) const {
  return node < enterprises.size() ? enterprises[node].id
                                   : persons.at(node - enterprises.size()).id;
}

Date EnterpriseKG::observation_time(std::size_t enterprise) const {
  const Enterprise& e = enterprises.at(enterprise);
  return e.observation_time ? *e.observation_time : snapshot_date;
}

void EnterpriseKG::validate() const {
  std::unordered_set<std::string> ids;
  for (const Enterprise& e : enterprises) {
    if (!ids.insert(e.id).second) throw DataError("duplicate node id " + e.id);
    const auto& a = e.attrs;
    if (a.established_time < 0 || !(a.registered_capital >= 0.0) ||
        !(a.paid_in_capital >= 0.0) || !std::isfinite(a.registered_capital) ||
        !std::isfinite(a.paid_in_capital)) {
      throw DataError("enterprise " + e.id + " has negative or non-finite attributes");
    }
    if (e.label && *e.label != 0 && *e.label != 1) {
      throw DataError("enterprise " + e.id + " has label outside {0,1}");
    }
    for (const Lawsuit& l : e.lawsuits) {
      if (l.date < Date(2000, 1, 1) || l.date > snapshot_date) {
        throw DataError("lawsuit of " + e.id + " dated " + l.date.str() +
                        " outside [2000-01-01, " + snapshot_date.str() + "]");
      }
    }
  }
  for (const Person& p : persons) {
    if (!ids.insert(p.id).second) throw DataError("duplicate node id " + p.id);
  }
  const std::size_t n = num_nodes();
  for (const HeteroEdge& e : edges) {
    if (e.src >= n || e.dst >= n) throw DataError("edge references unknown node");
    const bool weighted = e.rel == Relation::HolderInvestor;
    if (weighted && !e.weight) {
      throw DataError("holder_investor edge " + node_id(e.src) + " -> " +
                      node_id(e.dst) + " has no weight");
    }
    if (!weighted && e.weight) {
      throw DataError(std::string(to_string(e.rel)) + " edge " + node_id(e.src) +
                      " -> " + node_id(e.dst) + " must be unweighted");
    }
    if (e.weight && !(*e.weight > 0.0 && std::isfinite(*e.weight))) {
      throw DataError("holder_investor weight must be positive and finite");
    }
  }
  for (const Hyperedge& h : hyperedges) {
    if (h.members.empty()) throw DataError("hyperedge without members");
    for (std::size_t m : h.members) {
      if (m >= enterprises.size()) {
        throw DataError("hyperedge member is not an enterprise");
      }
    }
  }
  std::unordered_set<std::size_t> seen;
  for (const auto* split : {&splits.train, &splits.val, &splits.test}) {
    for (std::size_t i : *split) {
      if (i >= enterprises.size()) throw DataError("split references non-enterprise");
      if (!enterprises[i].label) {
        throw DataError("split contains unlabeled enterprise " + enterprises[i].id);
      }
      if (!seen.insert(i).second) {
        throw DataError("enterprise " + enterprises[i].id + " is in two splits");
      }
    }
  }
}

}  // namespace comrisk

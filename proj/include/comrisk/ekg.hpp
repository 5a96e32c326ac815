#pragma once

#include <array>
#include <chrono>
#include <compare>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace comrisk {

/// Calendar date (proleptic Gregorian), ISO "YYYY-MM-DD" on the wire.
class Date {
 public:
  Date() = default;
  explicit Date(std::chrono::sys_days days) : days_(days) {}
  Date(int year, unsigned month, unsigned day);

  /// Strict "YYYY-MM-DD"; throws DataError otherwise.
  static Date parse(std::string_view text);
  std::string str() const;

  std::chrono::sys_days days() const { return days_; }
  /// Whole days from `earlier` to *this.
  long days_since(const Date& earlier) const {
    return static_cast<long>((days_ - earlier.days_).count());
  }

  auto operator<=>(const Date&) const = default;

 private:
  std::chrono::sys_days days_{};
};

/// Whole months between two dates: floor(days / 30.44). Negative when
/// `later` precedes `earlier`.
long months_between(const Date& earlier, const Date& later);

enum class NodeKind { Enterprise, Person };

enum class Relation { Manager, Shareholder, OtherStakeholder, HolderInvestor, Branch };
inline constexpr std::size_t kRelationCount = 5;
inline constexpr std::array<Relation, kRelationCount> kAllRelations = {
    Relation::Manager, Relation::Shareholder, Relation::OtherStakeholder,
    Relation::HolderInvestor, Relation::Branch};

enum class HyperedgeType { Industry, Area, Stakeholder };
inline constexpr std::size_t kHyperedgeTypeCount = 3;
inline constexpr std::array<HyperedgeType, kHyperedgeTypeCount> kAllHyperedgeTypes = {
    HyperedgeType::Industry, HyperedgeType::Area, HyperedgeType::Stakeholder};

enum class CauseKind { LoanContractDispute, SalesContractDispute, Other };
inline constexpr std::size_t kCauseCount = 3;
enum class CourtLevel { Grassroots, Intermediate, Higher, Supreme };
inline constexpr std::size_t kCourtCount = 4;
enum class Verdict { PlaintiffWinner, PlaintiffLoser, DefendantWinner, DefendantLoser };
inline constexpr std::size_t kVerdictCount = 4;

/// Lawsuit cause; `raw` keeps the source string for Other causes.
struct LawsuitCause {
  CauseKind kind = CauseKind::Other;
  std::string raw;
  bool operator==(const LawsuitCause&) const = default;
};

std::string_view to_string(NodeKind k);
std::string_view to_string(Relation r);
std::string_view to_string(HyperedgeType t);
std::string_view to_string(CourtLevel c);
std::string_view to_string(Verdict v);
/// Wire string of a cause (the raw string for Other).
std::string to_string(const LawsuitCause& c);

std::optional<Relation> parse_relation(std::string_view s);
std::optional<HyperedgeType> parse_hyperedge_type(std::string_view s);
std::optional<CourtLevel> parse_court(std::string_view s);
std::optional<Verdict> parse_verdict(std::string_view s);
LawsuitCause parse_cause(std::string_view s);

struct EnterpriseAttributes {
  long established_time = 0;       // months
  double registered_capital = 0.0; // 10,000 yuan
  double paid_in_capital = 0.0;    // 10,000 yuan
  bool operator==(const EnterpriseAttributes&) const = default;
};

struct Lawsuit {
  LawsuitCause cause;
  CourtLevel court = CourtLevel::Grassroots;
  Verdict verdict = Verdict::PlaintiffWinner;
  Date date;
  bool operator==(const Lawsuit&) const = default;
};

struct Enterprise {
  std::string id;
  EnterpriseAttributes attrs;
  std::optional<int> label;  // 1 bankrupt, 0 survived
  std::optional<Date> observation_time;
  std::vector<Lawsuit> lawsuits;
  bool operator==(const Enterprise&) const = default;
};

struct Person {
  std::string id;
  bool operator==(const Person&) const = default;
};

/// Pairwise relation between global node indices (see EnterpriseKG).
struct HeteroEdge {
  std::size_t src = 0;
  std::size_t dst = 0;
  Relation rel = Relation::Manager;
  std::optional<double> weight;
  bool operator==(const HeteroEdge&) const = default;
};

/// Members are enterprise indices.
struct Hyperedge {
  HyperedgeType type = HyperedgeType::Industry;
  std::vector<std::size_t> members;
  bool operator==(const Hyperedge&) const = default;
};

/// Enterprise indices per split.
struct Splits {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
  bool operator==(const Splits&) const = default;
};

/// Enterprise knowledge graph. Global node index: enterprises occupy
/// [0, E), persons [E, E + P).
struct EnterpriseKG {
  std::vector<Enterprise> enterprises;
  std::vector<Person> persons;
  std::vector<HeteroEdge> edges;
  std::vector<Hyperedge> hyperedges;
  Splits splits;
  Date snapshot_date;

  std::size_t num_enterprises() const { return enterprises.size(); }
  std::size_t num_nodes() const { return enterprises.size() + persons.size(); }
  NodeKind kind(std::size_t node) const {
    return node < enterprises.size() ? NodeKind::Enterprise : NodeKind::Person;
  }
  const std::string& node_id(std::size_t node) const;
  /// Bankruptcy date for failed enterprises when recorded, otherwise the
  /// snapshot date.
  Date observation_time(std::size_t enterprise) const;

  /// Checks every structural invariant; throws DataError on the first
  /// violation.
  void validate() const;

  bool operator==(const EnterpriseKG&) const = default;
};

}  // namespace comrisk

#include "comrisk/features.hpp"

#include <iostream>

namespace comrisk {

std::string_view feature_name(std::size_t column) {
  static constexpr std::array<std::string_view, kFeatureCount> names = {
      "established_time",    "registered_capital", "paid_in_capital",
      "loan_disputes",       "sales_disputes",     "grassroots_court",
      "intermediate_court",  "higher_court",       "plaintiff_winner",
      "defendant_loser",     "lawsuits_within_2y", "lawsuits_over_2y"};
  return names.at(column);
}

FeatureTable extract_lawsuit_features(const EnterpriseKG& kg) {
  FeatureTable table;
  table.rows.reserve(kg.num_enterprises());
  for (std::size_t i = 0; i < kg.num_enterprises(); ++i) {
    const Enterprise& e = kg.enterprises[i];
    const Date obs = kg.observation_time(i);
    std::array<double, kFeatureCount> row{};
    row[kEstablishedTime] = static_cast<double>(e.attrs.established_time);
    row[kRegisteredCapital] = e.attrs.registered_capital;
    row[kPaidInCapital] = e.attrs.paid_in_capital;
    for (const Lawsuit& l : e.lawsuits) {
      if (l.date > obs) {
        ++table.excluded_lawsuits;
        continue;
      }
      if (l.cause.kind == CauseKind::LoanContractDispute) row[kLoanDisputes] += 1;
      if (l.cause.kind == CauseKind::SalesContractDispute) row[kSalesDisputes] += 1;
      switch (l.court) {
        case CourtLevel::Grassroots: row[kGrassrootsCourt] += 1; break;
        case CourtLevel::Intermediate: row[kIntermediateCourt] += 1; break;
        case CourtLevel::Higher: row[kHigherCourt] += 1; break;
        case CourtLevel::Supreme: break;
      }
      if (l.verdict == Verdict::PlaintiffWinner) row[kPlaintiffWinner] += 1;
      if (l.verdict == Verdict::DefendantLoser) row[kDefendantLoser] += 1;
      if (months_between(l.date, obs) <= kRecentMonths) {
        row[kLawsuitsWithinTwoYears] += 1;
      } else {
        row[kLawsuitsOverTwoYears] += 1;
      }
    }
    table.rows.push_back(row);
  }
  if (table.excluded_lawsuits > 0) {
    std::cerr << "warning: " << table.excluded_lawsuits
              << " lawsuit(s) dated after their observation time were excluded\n";
  }
  return table;
}

}  // namespace comrisk

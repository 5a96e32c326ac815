#pragma once

#include <array>
#include <cstddef>
#include <string_view>
#include <vector>

#include "comrisk/ekg.hpp"

namespace comrisk {

inline constexpr std::size_t kFeatureCount = 12;

/// Column order of the significant-indicator table.
enum FeatureColumn : std::size_t {
  kEstablishedTime = 0,
  kRegisteredCapital,
  kPaidInCapital,
  kLoanDisputes,
  kSalesDisputes,
  kGrassrootsCourt,
  kIntermediateCourt,
  kHigherCourt,
  kPlaintiffWinner,
  kDefendantLoser,
  kLawsuitsWithinTwoYears,
  kLawsuitsOverTwoYears,
};

std::string_view feature_name(std::size_t column);

/// Lawsuits up to this many months before the observation time count as
/// recent.
inline constexpr long kRecentMonths = 24;

struct FeatureTable {
  std::vector<std::array<double, kFeatureCount>> rows;  // one per enterprise
  /// Lawsuits dated after their enterprise's observation time.
  std::size_t excluded_lawsuits = 0;
};

/// Attribute columns plus lawsuit counts relative to each enterprise's
/// observation time. Lawsuits after the observation time are skipped and
/// counted in `excluded_lawsuits` (a warning is logged).
FeatureTable extract_lawsuit_features(const EnterpriseKG& kg);

}  // namespace comrisk

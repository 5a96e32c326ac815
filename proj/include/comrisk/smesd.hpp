#pragma once

#include <filesystem>
#include <string>

#include "comrisk/ekg.hpp"

namespace comrisk {

/// Converts a directory of comma-separated tables (header row required,
/// fields may be double-quoted, backslash escapes the next character) into
/// the five EKG files and returns the loaded graph.
///
///   company.csv    id, established_time, registered_capital, paid_in_capital,
///                  label (0/1/empty), bankruptcy_date (YYYY-MM-DD or empty)
///   person.csv     id
///   edges.csv      src, dst, relation, weight (empty when unweighted)
///   hyperedges.csv type, hyperedge, member   (one row per membership)
///   lawsuits.csv   company, cause, court, verdict, date
///   split.csv      id, split (train/val/test)
///
/// Court, verdict and the two named cause values are accepted either as the
/// schema tokens or as their Chinese labels; other causes are kept verbatim.
/// person.csv and hyperedges.csv may be absent.
EnterpriseKG convert_smesd(const std::filesystem::path& in_dir,
                           const std::filesystem::path& out_dir, const Date& snapshot);

/// Maps a court / verdict / cause label to its schema token; returns the
/// input unchanged when it is not recognized.
std::string normalize_smesd_token(const std::string& s);

}  // namespace comrisk

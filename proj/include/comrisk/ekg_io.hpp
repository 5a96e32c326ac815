#pragma once

#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "comrisk/ekg.hpp"

namespace comrisk {

struct EkgPaths {
  std::filesystem::path nodes;
  std::filesystem::path edges;
  std::filesystem::path hyperedges;
  std::filesystem::path lawsuits;
  std::filesystem::path splits;

  /// nodes.jsonl, edges.jsonl, hyperedges.jsonl, lawsuits.jsonl, splits.json
  /// inside `dir`.
  static EkgPaths in_directory(const std::filesystem::path& dir);
};

/// Reads and validates the five newline-delimited JSON files. Errors carry
/// "file:line".
EnterpriseKG load_ekg(const EkgPaths& paths);
EnterpriseKG load_ekg(const std::filesystem::path& dir);

/// Writes the five files into `dir` (created if needed). Output is
/// deterministic for a given graph.
void write_ekg(const EnterpriseKG& kg, const std::filesystem::path& dir);

/// Supplement embeddings keyed by node id ({"id", "vector"} per line).
using EmbeddingMap = std::unordered_map<std::string, std::vector<double>>;
EmbeddingMap load_embeddings(const std::filesystem::path& file);
void write_embeddings(const std::vector<std::string>& ids,
                      const std::vector<std::vector<double>>& vectors,
                      const std::filesystem::path& file);

}  // namespace comrisk

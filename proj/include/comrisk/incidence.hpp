#pragma once

#include <cstddef>
#include <vector>

#include "comrisk/ekg.hpp"
#include "comrisk/errors.hpp"
#include "comrisk/tensor.hpp"

namespace comrisk {

/// Raised when a graph has no hyperedges of the requested type; callers drop
/// the type from the per-type sum.
class EmptyHyperedgeTypeError : public DataError {
 public:
  using DataError::DataError;
};

/// Binary enterprise x hyperedge membership matrix for one hyperedge type,
/// stored by column, with its degree vectors.
struct IncidenceMatrix {
  std::size_t rows = 0;  // enterprises
  std::size_t cols = 0;  // hyperedges of this type
  std::vector<std::vector<std::size_t>> members;  // per column, sorted, unique

  /// Node degrees; entries of isolated nodes are patched to 1.
  std::vector<double> node_degree;
  /// Hyperedge degrees (member counts, always >= 1).
  std::vector<double> edge_degree;
  /// True for enterprises in no hyperedge of this type.
  std::vector<bool> isolated;

  /// H(v, hp) in {0, 1}.
  double at(std::size_t v, std::size_t hp) const;
  Tensor to_dense() const;
};

/// H for one hyperedge type plus D_v and D_e. Duplicate members inside a
/// hyperedge count once. Throws EmptyHyperedgeTypeError when no hyperedge of
/// `type` exists.
IncidenceMatrix build_incidence(const EnterpriseKG& kg, HyperedgeType type);

/// Builds directly from member lists; used by tests and the synthetic
/// generator.
IncidenceMatrix build_incidence(std::size_t num_nodes,
                                const std::vector<std::vector<std::size_t>>& hyperedges);

}  // namespace comrisk

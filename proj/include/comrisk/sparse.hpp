#pragma once

#include <cstddef>
#include <vector>

#include "comrisk/tensor.hpp"

namespace comrisk {

/// Compressed sparse row matrix with fixed (non-trainable) entries.
struct CsrMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::size_t> row_ptr;  // rows + 1 entries
  std::vector<std::size_t> col_idx;
  std::vector<double> values;

  std::size_t nnz() const { return values.size(); }
  Tensor to_dense() const;
  CsrMatrix transpose() const;
  /// y = A x for a dense x of shape [cols x d].
  Tensor multiply(const Tensor& x) const;

  /// Builds from (row, col, value) triplets; duplicates are summed and
  /// entries within a row are sorted by column.
  struct Triplet {
    std::size_t row;
    std::size_t col;
    double value;
  };
  static CsrMatrix from_triplets(std::size_t rows, std::size_t cols,
                                 std::vector<Triplet> triplets);
  static CsrMatrix identity(std::size_t n);
};

}  // namespace comrisk

#include "comrisk/sparse.hpp"

#include <algorithm>

#include "comrisk/errors.hpp"

namespace comrisk {

Tensor CsrMatrix::to_dense() const {
  Tensor out({rows, cols}, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
      out.at(r, col_idx[k]) += values[k];
    }
  }
  return out;
}

CsrMatrix CsrMatrix::transpose() const {
  std::vector<Triplet> t;
  t.reserve(nnz());
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
      t.push_back({col_idx[k], r, values[k]});
    }
  }
  return from_triplets(cols, rows, std::move(t));
}

Tensor CsrMatrix::multiply(const Tensor& x) const {
  if (x.rows() != cols) {
    throw DimensionError("sparse multiply: [" + std::to_string(rows) + "x" +
                         std::to_string(cols) + "] by " +
                         shape_str(x.shape()));
  }
  const std::size_t d = x.cols();
  Tensor y({rows, d}, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    double* yr = &y.at(r, 0);
    for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
      const double v = values[k];
      const double* xr = &x.data()[col_idx[k] * d];
      for (std::size_t j = 0; j < d; ++j) yr[j] += v * xr[j];
    }
  }
  return y;
}

CsrMatrix CsrMatrix::from_triplets(std::size_t rows, std::size_t cols,
                                   std::vector<Triplet> triplets) {
  std::stable_sort(triplets.begin(), triplets.end(),
            [](const Triplet& a, const Triplet& b) {
              return a.row != b.row ? a.row < b.row : a.col < b.col;
            });
  CsrMatrix m;
  m.rows = rows;
  m.cols = cols;
  m.row_ptr.assign(rows + 1, 0);
  std::size_t prev_row = rows;
  std::size_t prev_col = cols;
  for (const Triplet& t : triplets) {
    if (t.row >= rows || t.col >= cols) {
      throw DimensionError("sparse triplet out of range");
    }
    if (t.row == prev_row && t.col == prev_col) {
      m.values.back() += t.value;
      continue;
    }
    m.col_idx.push_back(t.col);
    m.values.push_back(t.value);
    m.row_ptr[t.row + 1] = m.values.size();
    prev_row = t.row;
    prev_col = t.col;
  }
  for (std::size_t r = 1; r <= rows; ++r) {
    m.row_ptr[r] = std::max(m.row_ptr[r], m.row_ptr[r - 1]);
  }
  return m;
}

CsrMatrix CsrMatrix::identity(std::size_t n) {
  std::vector<Triplet> t;
  t.reserve(n);
  for (std::size_t i = 0; i < n; ++i) t.push_back({i, i, 1.0});
  return from_triplets(n, n, std::move(t));
}

}  // namespace comrisk

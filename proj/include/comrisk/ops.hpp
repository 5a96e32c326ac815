#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "comrisk/autodiff.hpp"
#include "comrisk/sparse.hpp"

namespace comrisk::ops {

enum class GeluForm { Tanh, Erf };

// Linear algebra ------------------------------------------------------------

/// [m x k] * [k x n]. Rank-1 operands act as single rows.
Var matmul(Var a, Var b);
/// Constant sparse operator applied to rows of x: [r x c] * [c x d].
Var spmm(const CsrMatrix& op, Var x);

// Element-wise and broadcasting ---------------------------------------------

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
/// x[n x d] + bias[d], bias broadcast over rows.
Var add_bias(Var x, Var bias);
/// x[n x d] * col[n x 1], col broadcast over columns.
Var mul_col(Var x, Var col);
/// x * s where s holds a single element.
Var scale(Var x, Var s);
Var scale(Var x, double s);
Var add_scalar(Var x, double c);
Var reciprocal(Var x);
Var log_clamped(Var x, double floor);

// Activations ---------------------------------------------------------------

Var relu(Var x);
Var leaky_relu(Var x, double slope = 0.01);
Var gelu(Var x, GeluForm form = GeluForm::Tanh);
Var sigmoid(Var x);

// Structure -----------------------------------------------------------------

Var concat_cols(std::span<const Var> parts);
/// Rows idx[0], idx[1], ... of x.
Var gather_rows(Var x, std::span<const std::size_t> idx);
/// out[seg[e]] += x[e]; out has num_segments rows.
Var segment_sum(Var x, std::span<const std::size_t> seg,
                std::size_t num_segments);
/// Column k of x as [n x 1].
Var column(Var x, std::size_t k);
/// Row-wise inner product of equal-shape matrices, [n x 1].
Var row_dot(Var a, Var b);
/// x[rows[i], cols[i]] as [k x 1].
Var pick(Var x, std::span<const std::size_t> rows,
         std::span<const std::size_t> cols);
Var sum(Var x);
/// sum_i w[i] * x[i] over the flattened tensor.
Var weighted_sum(Var x, std::span<const double> w);

// Normalization -------------------------------------------------------------

/// Per-column standardization over all rows, then gamma * xhat + beta.
/// Throws NumericError for an empty batch.
Var batch_norm(Var x, Var gamma, Var beta, double eps = 1e-5);
/// Row-wise softmax with max subtraction.
Var softmax_rows(Var x);
/// Row-wise softmax restricted to entries with mask=1. Fully masked rows
/// produce zeros.
Var masked_softmax_rows(Var x, std::span<const unsigned char> mask);
/// For each column independently, softmax among rows sharing a segment id.
Var segment_softmax(Var x, std::span<const std::size_t> seg,
                    std::size_t num_segments);
/// Softmax over the selected flat entries of v; returns a rank-1 tensor of
/// |idx| entries. Throws NumericError when idx is empty.
Var softmax_over(Var v, std::span<const std::size_t> idx);

// Plain-tensor helpers (no tape) -------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

}  // namespace comrisk::ops

#include "comrisk/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "comrisk/errors.hpp"

namespace comrisk::ops {
namespace {

Tape& tape_of(Var v) {
  if (!v.valid()) throw Error("operation on an unbound Var");
  return *v.tape();
}

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.size() != b.size() || a.rows() != b.rows()) {
    throw DimensionError(std::string(op) + ": shapes " + shape_str(a.shape()) +
                         " and " + shape_str(b.shape()) + " differ");
  }
}

Shape matrix_shape(std::size_t r, std::size_t c) { return {r, c}; }

// Element-wise unary op with derivative computed from input and output.
template <typename Fwd, typename Deriv>
Var unary(Var x, const char* name, Fwd fwd, Deriv deriv) {
  const Tensor& xv = x.value();
  Tensor out(xv.shape(), 0.0);
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = fwd(xv[i]);
  Tape& t = tape_of(x);
  return t.record(
      std::move(out), {x},
      [x, deriv](const Tensor& g, std::vector<Tensor*>& gin) {
        const Tensor& xv = x.value();
        Tensor& gx = *gin[0];
        for (std::size_t i = 0; i < xv.size(); ++i) gx[i] += g[i] * deriv(xv[i]);
      },
      name);
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  if (b.rows() != k) {
    throw DimensionError("matmul: inner dimensions disagree between " +
                         shape_str(a.shape()) + " and " + shape_str(b.shape()));
  }
  Tensor c(matrix_shape(m, n), 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double* ci = &c.data()[i * n];
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a.data()[i * k + p];
      if (aip == 0.0) continue;
      const double* bp = &b.data()[p * n];
      for (std::size_t j = 0; j < n; ++j) ci[j] += aip * bp[j];
    }
  }
  return c;
}

Tensor transpose(const Tensor& a) {
  const std::size_t m = a.rows(), n = a.cols();
  Tensor t(matrix_shape(n, m), 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) t.at(j, i) = a.data()[i * n + j];
  }
  return t;
}

Var matmul(Var a, Var b) {
  Tensor c = matmul(a.value(), b.value());
  return tape_of(a).record(
      std::move(c), {a, b},
      [a, b](const Tensor& g, std::vector<Tensor*>& gin) {
        const Tensor& av = a.value();
        const Tensor& bv = b.value();
        const std::size_t m = av.rows(), k = av.cols(), n = bv.cols();
        if (gin[0]) {
          // dA = dC * B^T
          Tensor& ga = *gin[0];
          for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t p = 0; p < k; ++p) {
              double s = 0.0;
              for (std::size_t j = 0; j < n; ++j) {
                s += g.data()[i * n + j] * bv.data()[p * n + j];
              }
              ga[i * k + p] += s;
            }
          }
        }
        if (gin[1]) {
          // dB = A^T * dC
          Tensor& gb = *gin[1];
          for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t p = 0; p < k; ++p) {
              const double aip = av.data()[i * k + p];
              if (aip == 0.0) continue;
              for (std::size_t j = 0; j < n; ++j) {
                gb[p * n + j] += aip * g.data()[i * n + j];
              }
            }
          }
        }
      },
      "matmul");
}

Var spmm(const CsrMatrix& op, Var x) {
  Tensor y = op.multiply(x.value());
  CsrMatrix op_t = op.transpose();
  return tape_of(x).record(
      std::move(y), {x},
      [op_t = std::move(op_t)](const Tensor& g, std::vector<Tensor*>& gin) {
        Tensor gx = op_t.multiply(g);
        Tensor& dst = *gin[0];
        for (std::size_t i = 0; i < gx.size(); ++i) dst[i] += gx[i];
      },
      "spmm");
}

Var add(Var a, Var b) {
  require_same_shape("add", a.value(), b.value());
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b.value()[i];
  return tape_of(a).record(
      std::move(out), {a, b},
      [](const Tensor& g, std::vector<Tensor*>& gin) {
        for (Tensor* t : gin) {
          if (!t) continue;
          for (std::size_t i = 0; i < g.size(); ++i) (*t)[i] += g[i];
        }
      },
      "add");
}

Var sub(Var a, Var b) {
  require_same_shape("sub", a.value(), b.value());
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b.value()[i];
  return tape_of(a).record(
      std::move(out), {a, b},
      [](const Tensor& g, std::vector<Tensor*>& gin) {
        if (gin[0]) {
          for (std::size_t i = 0; i < g.size(); ++i) (*gin[0])[i] += g[i];
        }
        if (gin[1]) {
          for (std::size_t i = 0; i < g.size(); ++i) (*gin[1])[i] -= g[i];
        }
      },
      "sub");
}

Var mul(Var a, Var b) {
  require_same_shape("mul", a.value(), b.value());
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
  return tape_of(a).record(
      std::move(out), {a, b},
      [a, b](const Tensor& g, std::vector<Tensor*>& gin) {
        if (gin[0]) {
          for (std::size_t i = 0; i < g.size(); ++i) {
            (*gin[0])[i] += g[i] * b.value()[i];
          }
        }
        if (gin[1]) {
          for (std::size_t i = 0; i < g.size(); ++i) {
            (*gin[1])[i] += g[i] * a.value()[i];
          }
        }
      },
      "mul");
}

Var add_bias(Var x, Var bias) {
  const Tensor& xv = x.value();
  const std::size_t n = xv.rows(), d = xv.cols();
  if (bias.value().size() != d) {
    throw DimensionError("add_bias: " + shape_str(xv.shape()) + " with bias " +
                         shape_str(bias.value().shape()));
  }
  Tensor out = xv;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) out[i * d + j] += bias.value()[j];
  }
  return tape_of(x).record(
      std::move(out), {x, bias},
      [n, d](const Tensor& g, std::vector<Tensor*>& gin) {
        if (gin[0]) {
          for (std::size_t i = 0; i < g.size(); ++i) (*gin[0])[i] += g[i];
        }
        if (gin[1]) {
          for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < d; ++j) (*gin[1])[j] += g[i * d + j];
          }
        }
      },
      "add_bias");
}

Var mul_col(Var x, Var col) {
  const Tensor& xv = x.value();
  const std::size_t n = xv.rows(), d = xv.cols();
  if (col.value().size() != n) {
    throw DimensionError("mul_col: " + shape_str(xv.shape()) + " with column " +
                         shape_str(col.value().shape()));
  }
  Tensor out = xv;
  for (std::size_t i = 0; i < n; ++i) {
    const double c = col.value()[i];
    for (std::size_t j = 0; j < d; ++j) out[i * d + j] *= c;
  }
  return tape_of(x).record(
      std::move(out), {x, col},
      [x, col, n, d](const Tensor& g, std::vector<Tensor*>& gin) {
        if (gin[0]) {
          for (std::size_t i = 0; i < n; ++i) {
            const double c = col.value()[i];
            for (std::size_t j = 0; j < d; ++j) {
              (*gin[0])[i * d + j] += g[i * d + j] * c;
            }
          }
        }
        if (gin[1]) {
          for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
              s += g[i * d + j] * x.value()[i * d + j];
            }
            (*gin[1])[i] += s;
          }
        }
      },
      "mul_col");
}

Var scale(Var x, Var s) {
  if (s.value().size() != 1) {
    throw DimensionError("scale: factor must hold one element, got " +
                         shape_str(s.value().shape()));
  }
  const double f = s.value()[0];
  Tensor out = x.value();
  for (double& v : out.storage()) v *= f;
  return tape_of(x).record(
      std::move(out), {x, s},
      [x, s](const Tensor& g, std::vector<Tensor*>& gin) {
        const double f = s.value()[0];
        if (gin[0]) {
          for (std::size_t i = 0; i < g.size(); ++i) (*gin[0])[i] += g[i] * f;
        }
        if (gin[1]) {
          double acc = 0.0;
          for (std::size_t i = 0; i < g.size(); ++i) acc += g[i] * x.value()[i];
          (*gin[1])[0] += acc;
        }
      },
      "scale");
}

Var scale(Var x, double s) {
  Tensor out = x.value();
  for (double& v : out.storage()) v *= s;
  return tape_of(x).record(
      std::move(out), {x},
      [s](const Tensor& g, std::vector<Tensor*>& gin) {
        for (std::size_t i = 0; i < g.size(); ++i) (*gin[0])[i] += g[i] * s;
      },
      "scale_const");
}

Var add_scalar(Var x, double c) {
  Tensor out = x.value();
  for (double& v : out.storage()) v += c;
  return tape_of(x).record(
      std::move(out), {x},
      [](const Tensor& g, std::vector<Tensor*>& gin) {
        for (std::size_t i = 0; i < g.size(); ++i) (*gin[0])[i] += g[i];
      },
      "add_scalar");
}

Var reciprocal(Var x) {
  return unary(
      x, "reciprocal", [](double v) { return 1.0 / v; },
      [](double v) { return -1.0 / (v * v); });
}

Var log_clamped(Var x, double floor) {
  return unary(
      x, "log_clamped", [floor](double v) { return std::log(std::max(v, floor)); },
      [floor](double v) { return v > floor ? 1.0 / v : 0.0; });
}

Var relu(Var x) {
  return unary(
      x, "relu", [](double v) { return v > 0.0 ? v : 0.0; },
      [](double v) { return v > 0.0 ? 1.0 : 0.0; });
}

Var leaky_relu(Var x, double slope) {
  return unary(
      x, "leaky_relu", [slope](double v) { return v > 0.0 ? v : slope * v; },
      [slope](double v) { return v > 0.0 ? 1.0 : slope; });
}

Var gelu(Var x, GeluForm form) {
  if (form == GeluForm::Erf) {
    return unary(
        x, "gelu_erf",
        [](double v) { return 0.5 * v * (1.0 + std::erf(v / std::numbers::sqrt2)); },
        [](double v) {
          const double cdf = 0.5 * (1.0 + std::erf(v / std::numbers::sqrt2));
          const double pdf =
              std::exp(-0.5 * v * v) / std::sqrt(2.0 * std::numbers::pi);
          return cdf + v * pdf;
        });
  }
  static const double k = std::sqrt(2.0 / std::numbers::pi);
  constexpr double c = 0.044715;
  return unary(
      x, "gelu",
      [](double v) { return 0.5 * v * (1.0 + std::tanh(k * (v + c * v * v * v))); },
      [](double v) {
        const double t = std::tanh(k * (v + c * v * v * v));
        return 0.5 * (1.0 + t) +
               0.5 * v * (1.0 - t * t) * k * (1.0 + 3.0 * c * v * v);
      });
}

Var sigmoid(Var x) {
  const auto fwd = [](double v) {
    if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
    const double e = std::exp(v);
    return e / (1.0 + e);
  };
  return unary(x, "sigmoid", fwd, [fwd](double v) {
    const double s = fwd(v);
    return s * (1.0 - s);
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw DimensionError("concat_cols: no inputs");
  const std::size_t n = parts[0].value().rows();
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const Var& p : parts) {
    if (p.value().rows() != n) {
      throw DimensionError("concat_cols: row counts differ (" +
                           shape_str(parts[0].value().shape()) + " vs " +
                           shape_str(p.value().shape()) + ")");
    }
    widths.push_back(p.value().cols());
    total += widths.back();
  }
  Tensor out(matrix_shape(n, total), 0.0);
  std::size_t off = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const Tensor& pv = parts[k].value();
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < widths[k]; ++j) {
        out[i * total + off + j] = pv[i * widths[k] + j];
      }
    }
    off += widths[k];
  }
  return tape_of(parts[0]).record(
      std::move(out), std::vector<Var>(parts.begin(), parts.end()),
      [n, total, widths](const Tensor& g, std::vector<Tensor*>& gin) {
        std::size_t off = 0;
        for (std::size_t k = 0; k < widths.size(); ++k) {
          if (gin[k]) {
            for (std::size_t i = 0; i < n; ++i) {
              for (std::size_t j = 0; j < widths[k]; ++j) {
                (*gin[k])[i * widths[k] + j] += g[i * total + off + j];
              }
            }
          }
          off += widths[k];
        }
      },
      "concat_cols");
}

Var gather_rows(Var x, std::span<const std::size_t> idx) {
  const Tensor& xv = x.value();
  const std::size_t n = xv.rows(), d = xv.cols();
  Tensor out(matrix_shape(idx.size(), d), 0.0);
  for (std::size_t e = 0; e < idx.size(); ++e) {
    if (idx[e] >= n) {
      throw DimensionError("gather_rows: index " + std::to_string(idx[e]) +
                           " out of range for " + shape_str(xv.shape()));
    }
    std::copy_n(&xv.data()[idx[e] * d], d, &out.data()[e * d]);
  }
  std::vector<std::size_t> ids(idx.begin(), idx.end());
  return tape_of(x).record(
      std::move(out), {x},
      [ids = std::move(ids), d](const Tensor& g, std::vector<Tensor*>& gin) {
        Tensor& gx = *gin[0];
        for (std::size_t e = 0; e < ids.size(); ++e) {
          for (std::size_t j = 0; j < d; ++j) gx[ids[e] * d + j] += g[e * d + j];
        }
      },
      "gather_rows");
}

Var segment_sum(Var x, std::span<const std::size_t> seg,
                std::size_t num_segments) {
  const Tensor& xv = x.value();
  const std::size_t d = xv.cols();
  if (seg.size() != xv.rows()) {
    throw DimensionError("segment_sum: " + std::to_string(seg.size()) +
                         " segment ids for " + shape_str(xv.shape()));
  }
  Tensor out(matrix_shape(num_segments, d), 0.0);
  for (std::size_t e = 0; e < seg.size(); ++e) {
    if (seg[e] >= num_segments) throw DimensionError("segment_sum: bad id");
    for (std::size_t j = 0; j < d; ++j) out[seg[e] * d + j] += xv[e * d + j];
  }
  std::vector<std::size_t> ids(seg.begin(), seg.end());
  return tape_of(x).record(
      std::move(out), {x},
      [ids = std::move(ids), d](const Tensor& g, std::vector<Tensor*>& gin) {
        Tensor& gx = *gin[0];
        for (std::size_t e = 0; e < ids.size(); ++e) {
          for (std::size_t j = 0; j < d; ++j) gx[e * d + j] += g[ids[e] * d + j];
        }
      },
      "segment_sum");
}

Var column(Var x, std::size_t k) {
  const Tensor& xv = x.value();
  const std::size_t n = xv.rows(), d = xv.cols();
  if (k >= d) throw DimensionError("column: index out of range");
  Tensor out(matrix_shape(n, 1), 0.0);
  for (std::size_t i = 0; i < n; ++i) out[i] = xv[i * d + k];
  return tape_of(x).record(
      std::move(out), {x},
      [n, d, k](const Tensor& g, std::vector<Tensor*>& gin) {
        for (std::size_t i = 0; i < n; ++i) (*gin[0])[i * d + k] += g[i];
      },
      "column");
}

Var row_dot(Var a, Var b) {
  require_same_shape("row_dot", a.value(), b.value());
  const std::size_t n = a.value().rows(), d = a.value().cols();
  Tensor out(matrix_shape(n, 1), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      s += a.value()[i * d + j] * b.value()[i * d + j];
    }
    out[i] = s;
  }
  return tape_of(a).record(
      std::move(out), {a, b},
      [a, b, n, d](const Tensor& g, std::vector<Tensor*>& gin) {
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t j = 0; j < d; ++j) {
            if (gin[0]) (*gin[0])[i * d + j] += g[i] * b.value()[i * d + j];
            if (gin[1]) (*gin[1])[i * d + j] += g[i] * a.value()[i * d + j];
          }
        }
      },
      "row_dot");
}

Var pick(Var x, std::span<const std::size_t> rows,
         std::span<const std::size_t> cols) {
  if (rows.size() != cols.size()) throw DimensionError("pick: index lengths");
  const Tensor& xv = x.value();
  const std::size_t d = xv.cols();
  Tensor out(matrix_shape(rows.size(), 1), 0.0);
  std::vector<std::size_t> flat(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= xv.rows() || cols[i] >= d) {
      throw DimensionError("pick: index out of range");
    }
    flat[i] = rows[i] * d + cols[i];
    out[i] = xv[flat[i]];
  }
  return tape_of(x).record(
      std::move(out), {x},
      [flat = std::move(flat)](const Tensor& g, std::vector<Tensor*>& gin) {
        for (std::size_t i = 0; i < flat.size(); ++i) (*gin[0])[flat[i]] += g[i];
      },
      "pick");
}

Var sum(Var x) {
  double s = 0.0;
  for (double v : x.value().data()) s += v;
  return tape_of(x).record(
      Tensor::scalar(s), {x},
      [](const Tensor& g, std::vector<Tensor*>& gin) {
        for (double& v : gin[0]->storage()) v += g[0];
      },
      "sum");
}

Var weighted_sum(Var x, std::span<const double> w) {
  if (w.size() != x.value().size()) {
    throw DimensionError("weighted_sum: weight count mismatch");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * x.value()[i];
  std::vector<double> weights(w.begin(), w.end());
  return tape_of(x).record(
      Tensor::scalar(s), {x},
      [weights = std::move(weights)](const Tensor& g, std::vector<Tensor*>& gin) {
        for (std::size_t i = 0; i < weights.size(); ++i) {
          (*gin[0])[i] += g[0] * weights[i];
        }
      },
      "weighted_sum");
}

Var batch_norm(Var x, Var gamma, Var beta, double eps) {
  const Tensor& xv = x.value();
  const std::size_t n = xv.rows(), d = xv.cols();
  if (xv.size() == 0 || n == 0) throw NumericError("batch_norm: empty batch");
  if (gamma.value().size() != d || beta.value().size() != d) {
    throw DimensionError("batch_norm: affine parameters must have width " +
                         std::to_string(d));
  }
  // inv_std == 0 marks a column whose standardization is undefined (zero
  // variance with eps == 0); it maps to xhat = 0.
  std::vector<double> mean(d, 0.0), inv_std(d, 0.0);
  Tensor xhat(xv.shape(), 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m += xv[i * d + j];
    m /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double c = xv[i * d + j] - m;
      var += c * c;
    }
    var /= static_cast<double>(n);
    mean[j] = m;
    const double denom = var + eps;
    inv_std[j] = denom > 0.0 ? 1.0 / std::sqrt(denom) : 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      xhat[i * d + j] = (xv[i * d + j] - m) * inv_std[j];
    }
  }
  Tensor out(xv.shape(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      out[i * d + j] = gamma.value()[j] * xhat[i * d + j] + beta.value()[j];
    }
  }
  return tape_of(x).record(
      std::move(out), {x, gamma, beta},
      [gamma, xhat = std::move(xhat), inv_std = std::move(inv_std), n, d](
          const Tensor& g, std::vector<Tensor*>& gin) {
        const double nn = static_cast<double>(n);
        for (std::size_t j = 0; j < d; ++j) {
          double sum_g = 0.0, sum_gx = 0.0;
          for (std::size_t i = 0; i < n; ++i) {
            sum_g += g[i * d + j];
            sum_gx += g[i * d + j] * xhat[i * d + j];
          }
          if (gin[1]) (*gin[1])[j] += sum_gx;
          if (gin[2]) (*gin[2])[j] += sum_g;
          if (gin[0]) {
            const double gam = gamma.value()[j];
            for (std::size_t i = 0; i < n; ++i) {
              (*gin[0])[i * d + j] +=
                  gam * inv_std[j] *
                  (g[i * d + j] - sum_g / nn - xhat[i * d + j] * sum_gx / nn);
            }
          }
        }
      },
      "batch_norm");
}

namespace {

Var masked_softmax_impl(Var x, std::span<const unsigned char> mask,
                        const char* name) {
  const Tensor& xv = x.value();
  const std::size_t n = xv.rows(), d = xv.cols();
  std::vector<unsigned char> m(mask.begin(), mask.end());
  if (m.empty()) m.assign(xv.size(), 1);
  if (m.size() != xv.size()) throw DimensionError("softmax mask size mismatch");
  Tensor out(matrix_shape(n, d), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < d; ++j) {
      if (m[i * d + j]) mx = std::max(mx, xv[i * d + j]);
    }
    if (!std::isfinite(mx)) continue;
    double z = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      if (!m[i * d + j]) continue;
      out[i * d + j] = std::exp(xv[i * d + j] - mx);
      z += out[i * d + j];
    }
    for (std::size_t j = 0; j < d; ++j) out[i * d + j] /= z;
  }
  Tensor y = out;
  return tape_of(x).record(
      std::move(out), {x},
      [y = std::move(y), n, d](const Tensor& g, std::vector<Tensor*>& gin) {
        for (std::size_t i = 0; i < n; ++i) {
          double dot = 0.0;
          for (std::size_t j = 0; j < d; ++j) dot += g[i * d + j] * y[i * d + j];
          for (std::size_t j = 0; j < d; ++j) {
            (*gin[0])[i * d + j] += y[i * d + j] * (g[i * d + j] - dot);
          }
        }
      },
      name);
}

}  // namespace

Var softmax_rows(Var x) { return masked_softmax_impl(x, {}, "softmax_rows"); }

Var masked_softmax_rows(Var x, std::span<const unsigned char> mask) {
  if (mask.size() != x.value().size()) {
    throw DimensionError("masked_softmax_rows: mask size mismatch");
  }
  return masked_softmax_impl(x, mask, "masked_softmax_rows");
}

Var segment_softmax(Var x, std::span<const std::size_t> seg,
                    std::size_t num_segments) {
  const Tensor& xv = x.value();
  const std::size_t e_count = xv.rows(), d = xv.cols();
  if (seg.size() != e_count) {
    throw DimensionError("segment_softmax: segment ids do not match rows");
  }
  std::vector<double> mx(num_segments * d,
                         -std::numeric_limits<double>::infinity());
  for (std::size_t e = 0; e < e_count; ++e) {
    if (seg[e] >= num_segments) throw DimensionError("segment_softmax: bad id");
    for (std::size_t j = 0; j < d; ++j) {
      double& m = mx[seg[e] * d + j];
      m = std::max(m, xv[e * d + j]);
    }
  }
  std::vector<double> z(num_segments * d, 0.0);
  Tensor out(matrix_shape(e_count, d), 0.0);
  for (std::size_t e = 0; e < e_count; ++e) {
    for (std::size_t j = 0; j < d; ++j) {
      out[e * d + j] = std::exp(xv[e * d + j] - mx[seg[e] * d + j]);
      z[seg[e] * d + j] += out[e * d + j];
    }
  }
  for (std::size_t e = 0; e < e_count; ++e) {
    for (std::size_t j = 0; j < d; ++j) out[e * d + j] /= z[seg[e] * d + j];
  }
  Tensor y = out;
  std::vector<std::size_t> ids(seg.begin(), seg.end());
  return tape_of(x).record(
      std::move(out), {x},
      [y = std::move(y), ids = std::move(ids), num_segments, d](
          const Tensor& g, std::vector<Tensor*>& gin) {
        std::vector<double> dot(num_segments * d, 0.0);
        for (std::size_t e = 0; e < ids.size(); ++e) {
          for (std::size_t j = 0; j < d; ++j) {
            dot[ids[e] * d + j] += g[e * d + j] * y[e * d + j];
          }
        }
        for (std::size_t e = 0; e < ids.size(); ++e) {
          for (std::size_t j = 0; j < d; ++j) {
            (*gin[0])[e * d + j] +=
                y[e * d + j] * (g[e * d + j] - dot[ids[e] * d + j]);
          }
        }
      },
      "segment_softmax");
}

Var softmax_over(Var v, std::span<const std::size_t> idx) {
  if (idx.empty()) {
    throw NumericError("softmax_over: empty normalization set");
  }
  const Tensor& vv = v.value();
  for (std::size_t i : idx) {
    if (i >= vv.size()) throw DimensionError("softmax_over: index out of range");
  }
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t i : idx) mx = std::max(mx, vv[i]);
  Tensor out({idx.size()}, 0.0);
  double z = 0.0;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    out[k] = std::exp(vv[idx[k]] - mx);
    z += out[k];
  }
  for (double& o : out.storage()) o /= z;
  Tensor y = out;
  std::vector<std::size_t> ids(idx.begin(), idx.end());
  return tape_of(v).record(
      std::move(out), {v},
      [y = std::move(y), ids = std::move(ids)](const Tensor& g,
                                               std::vector<Tensor*>& gin) {
        double dot = 0.0;
        for (std::size_t k = 0; k < ids.size(); ++k) dot += g[k] * y[k];
        for (std::size_t k = 0; k < ids.size(); ++k) {
          (*gin[0])[ids[k]] += y[k] * (g[k] - dot);
        }
      },
      "softmax_over");
}

}  // namespace comrisk::ops

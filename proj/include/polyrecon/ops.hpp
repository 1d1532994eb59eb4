#pragma once

#include "polyrecon/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace polyrecon::nn {

namespace detail {

template <class S>
void require_same_dims(const char* op, const Tensor<S>& a, const Tensor<S>& b) {
  if (a.dims() != b.dims()) raise(Errc::ShapeMismatch, std::string(op) + ": dims differ");
}

}  // namespace detail

template <class S>
Tensor<S> add(const Tensor<S>& a, const Tensor<S>& b) {
  detail::require_same_dims("add", a, b);
  return detail::make_op<S>("add", a.dims(), {a.node(), b.node()}, a.array() + b.array(),
                            [](Node<S>& self) {
                              detail::accumulate(self.parents[0], self.grad);
                              detail::accumulate(self.parents[1], self.grad);
                            });
}

template <class S>
Tensor<S> sub(const Tensor<S>& a, const Tensor<S>& b) {
  detail::require_same_dims("sub", a, b);
  return detail::make_op<S>("sub", a.dims(), {a.node(), b.node()}, a.array() - b.array(),
                            [](Node<S>& self) {
                              detail::accumulate(self.parents[0], self.grad);
                              detail::accumulate(self.parents[1], -self.grad);
                            });
}

template <class S>
Tensor<S> mul(const Tensor<S>& a, const Tensor<S>& b) {
  detail::require_same_dims("mul", a, b);
  return detail::make_op<S>("mul", a.dims(), {a.node(), b.node()}, a.array() * b.array(),
                            [](Node<S>& self) {
                              detail::accumulate(self.parents[0],
                                                 self.grad * *self.parents[1]->value);
                              detail::accumulate(self.parents[1],
                                                 self.grad * *self.parents[0]->value);
                            });
}

template <class S>
Tensor<S> scale(const Tensor<S>& a, S factor) {
  return detail::make_op<S>("scale", a.dims(), {a.node()}, a.array() * factor,
                            [factor](Node<S>& self) {
                              detail::accumulate(self.parents[0], self.grad * factor);
                            });
}

// Adds a length-m bias row to every row of an n x m tensor.
template <class S>
Tensor<S> add_bias(const Tensor<S>& a, const Tensor<S>& bias) {
  if (bias.size() != a.cols()) raise(Errc::ShapeMismatch, "add_bias: bias width mismatch");
  MatrixRM<S> out = a.mat();
  out.rowwise() += Eigen::Map<const Eigen::RowVector<S, Eigen::Dynamic>>(bias.array().data(),
                                                                         bias.size());
  ArrayX<S> flat = Eigen::Map<ArrayX<S>>(out.data(), out.size());
  return detail::make_op<S>("add_bias", a.dims(), {a.node(), bias.node()}, std::move(flat),
                            [](Node<S>& self) {
                              detail::accumulate(self.parents[0], self.grad);
                              detail::accumulate_mat(
                                  self.parents[1],
                                  MatMap<S>(self.grad.data(), self.rows(), self.cols())
                                      .colwise()
                                      .sum());
                            });
}

template <class S>
Tensor<S> matmul(const Tensor<S>& a, const Tensor<S>& b, bool trans_a = false,
                 bool trans_b = false) {
  const long ar = trans_a ? a.cols() : a.rows();
  const long ak = trans_a ? a.rows() : a.cols();
  const long bk = trans_b ? b.cols() : b.rows();
  const long bc = trans_b ? b.rows() : b.cols();
  if (ak != bk) raise(Errc::ShapeMismatch, "matmul: inner dimensions differ");
  MatrixRM<S> out(ar, bc);
  {
    const auto A = a.mat();
    const auto B = b.mat();
    if (!trans_a && !trans_b) out.noalias() = A * B;
    else if (trans_a && !trans_b) out.noalias() = A.transpose() * B;
    else if (!trans_a && trans_b) out.noalias() = A * B.transpose();
    else out.noalias() = A.transpose() * B.transpose();
  }
  ArrayX<S> flat = Eigen::Map<ArrayX<S>>(out.data(), out.size());
  return detail::make_op<S>(
      "matmul", {ar, bc}, {a.node(), b.node()}, std::move(flat),
      [trans_a, trans_b](Node<S>& self) {
        const auto& pa = self.parents[0];
        const auto& pb = self.parents[1];
        const MatMap<S> G(self.grad.data(), self.rows(), self.cols());
        const ConstMatMap<S> A(pa->value->data(), pa->rows(), pa->cols());
        const ConstMatMap<S> B(pb->value->data(), pb->rows(), pb->cols());
        if (pa->requires_grad) {
          pa->ensure_grad();
          MatMap<S> dA(pa->grad.data(), pa->rows(), pa->cols());
          if (!trans_a && !trans_b) dA.noalias() += G * B.transpose();
          else if (trans_a && !trans_b) dA.noalias() += B * G.transpose();
          else if (!trans_a && trans_b) dA.noalias() += G * B;
          else dA.noalias() += B.transpose() * G.transpose();
        }
        if (pb->requires_grad) {
          pb->ensure_grad();
          MatMap<S> dB(pb->grad.data(), pb->rows(), pb->cols());
          if (!trans_a && !trans_b) dB.noalias() += A.transpose() * G;
          else if (trans_a && !trans_b) dB.noalias() += A * G;
          else if (!trans_a && trans_b) dB.noalias() += G.transpose() * A;
          else dB.noalias() += G.transpose() * A.transpose();
        }
      });
}

template <class S>
Tensor<S> relu(const Tensor<S>& a) {
  return detail::make_op<S>("relu", a.dims(), {a.node()}, a.array().max(S(0)),
                            [](Node<S>& self) {
                              const ArrayX<S>& x = *self.parents[0]->value;
                              detail::accumulate(self.parents[0],
                                                 self.grad * (x > S(0)).template cast<S>());
                            });
}

template <class S>
Tensor<S> leaky_relu(const Tensor<S>& a, S alpha = S(0.01)) {
  const ArrayX<S>& x = a.array();
  return detail::make_op<S>(
      "leaky_relu", a.dims(), {a.node()}, (x > S(0)).select(x, alpha * x),
      [alpha](Node<S>& self) {
        const ArrayX<S>& x = *self.parents[0]->value;
        detail::accumulate(self.parents[0],
                           self.grad * (x > S(0)).select(ArrayX<S>::Ones(x.size()),
                                                         ArrayX<S>::Constant(x.size(), alpha)));
      });
}

template <class S>
Tensor<S> concat_cols(const std::vector<Tensor<S>>& parts) {
  if (parts.empty()) raise(Errc::ShapeMismatch, "concat_cols: no inputs");
  const long rows = parts.front().rows();
  long cols = 0;
  std::vector<std::shared_ptr<Node<S>>> parents;
  for (const Tensor<S>& p : parts) {
    if (p.rows() != rows) raise(Errc::ShapeMismatch, "concat_cols: row counts differ");
    cols += p.cols();
    parents.push_back(p.node());
  }
  MatrixRM<S> out(rows, cols);
  long at = 0;
  for (const Tensor<S>& p : parts) {
    out.middleCols(at, p.cols()) = p.mat();
    at += p.cols();
  }
  ArrayX<S> flat = Eigen::Map<ArrayX<S>>(out.data(), out.size());
  return detail::make_op<S>("concat_cols", {rows, cols}, std::move(parents), std::move(flat),
                            [](Node<S>& self) {
                              const MatMap<S> G(self.grad.data(), self.rows(), self.cols());
                              long at = 0;
                              for (const auto& parent : self.parents) {
                                detail::accumulate_mat(parent,
                                                       G.middleCols(at, parent->cols()));
                                at += parent->cols();
                              }
                            });
}

template <class S>
Tensor<S> concat_rows(const std::vector<Tensor<S>>& parts) {
  if (parts.empty()) raise(Errc::ShapeMismatch, "concat_rows: no inputs");
  const long cols = parts.front().cols();
  long rows = 0;
  std::vector<std::shared_ptr<Node<S>>> parents;
  for (const Tensor<S>& p : parts) {
    if (p.cols() != cols) raise(Errc::ShapeMismatch, "concat_rows: column counts differ");
    rows += p.rows();
    parents.push_back(p.node());
  }
  ArrayX<S> flat(rows * cols);
  long at = 0;
  for (const Tensor<S>& p : parts) {
    flat.segment(at, p.size()) = p.array();
    at += p.size();
  }
  return detail::make_op<S>("concat_rows", {rows, cols}, std::move(parents), std::move(flat),
                            [](Node<S>& self) {
                              long at = 0;
                              for (const auto& parent : self.parents) {
                                detail::accumulate(parent,
                                                   self.grad.segment(at, parent->size()));
                                at += parent->size();
                              }
                            });
}

// Shares storage; only the shape changes.
template <class S>
Tensor<S> reshape(const Tensor<S>& a, std::vector<long> dims) {
  if (dims_size(dims) != a.size()) raise(Errc::ShapeMismatch, "reshape: size mismatch");
  auto node = std::make_shared<Node<S>>();
  node->dims = std::move(dims);
  node->value = a.node()->value;
  node->op = "reshape";
  node->requires_grad = a.requires_grad();
  if (node->requires_grad) {
    node->parents = {a.node()};
    node->backward = [](Node<S>& self) { detail::accumulate(self.parents[0], self.grad); };
  }
  return Tensor<S>(node);
}

// Row-wise max over segments; ties keep the first row. Empty segments yield
// zero rows and receive no gradient.
template <class S>
Tensor<S> segmented_max(const Tensor<S>& a, const std::vector<int>& segments, int n_segments) {
  if (static_cast<long>(segments.size()) != a.rows()) {
    raise(Errc::ShapeMismatch, "segmented_max: segment ids do not match rows");
  }
  const long m = a.cols();
  const auto A = a.mat();
  MatrixRM<S> out = MatrixRM<S>::Zero(n_segments, m);
  std::vector<std::int32_t> argmax(static_cast<std::size_t>(n_segments) *
                                       static_cast<std::size_t>(m),
                                   -1);
  for (long i = 0; i < A.rows(); ++i) {
    const int s = segments[static_cast<std::size_t>(i)];
    if (s < 0 || s >= n_segments) raise(Errc::ShapeMismatch, "segmented_max: segment out of range");
    for (long c = 0; c < m; ++c) {
      auto& arg = argmax[static_cast<std::size_t>(s) * static_cast<std::size_t>(m) +
                         static_cast<std::size_t>(c)];
      if (arg < 0 || A(i, c) > out(s, c)) {
        out(s, c) = A(i, c);
        arg = static_cast<std::int32_t>(i);
      }
    }
  }
  ArrayX<S> flat = Eigen::Map<ArrayX<S>>(out.data(), out.size());
  return detail::make_op<S>(
      "segmented_max", {static_cast<long>(n_segments), m}, {a.node()}, std::move(flat),
      [argmax = std::move(argmax), m](Node<S>& self) {
        const auto& parent = self.parents[0];
        if (!parent->requires_grad) return;
        parent->ensure_grad();
        MatMap<S> dA(parent->grad.data(), parent->rows(), parent->cols());
        const MatMap<S> G(self.grad.data(), self.rows(), self.cols());
        for (long s = 0; s < self.rows(); ++s) {
          for (long c = 0; c < m; ++c) {
            const auto arg = argmax[static_cast<std::size_t>(s) * static_cast<std::size_t>(m) +
                                    static_cast<std::size_t>(c)];
            if (arg >= 0) dA(arg, c) += G(s, c);
          }
        }
      });
}

// Max over axis 0 (all rows form one segment).
template <class S>
Tensor<S> max_axis0(const Tensor<S>& a) {
  return segmented_max(a, std::vector<int>(static_cast<std::size_t>(a.rows()), 0), 1);
}

// out.row(index[i]) += a.row(i); index -1 skips the row.
template <class S>
Tensor<S> scatter_add(const Tensor<S>& a, const std::vector<int>& index, int n_out) {
  if (static_cast<long>(index.size()) != a.rows()) {
    raise(Errc::ShapeMismatch, "scatter_add: index does not match rows");
  }
  const long m = a.cols();
  const auto A = a.mat();
  MatrixRM<S> out = MatrixRM<S>::Zero(n_out, m);
  for (long i = 0; i < A.rows(); ++i) {
    const int s = index[static_cast<std::size_t>(i)];
    if (s < 0) continue;
    if (s >= n_out) raise(Errc::ShapeMismatch, "scatter_add: index out of range");
    out.row(s) += A.row(i);
  }
  ArrayX<S> flat = Eigen::Map<ArrayX<S>>(out.data(), out.size());
  return detail::make_op<S>("scatter_add", {static_cast<long>(n_out), m}, {a.node()},
                            std::move(flat), [index](Node<S>& self) {
                              const auto& parent = self.parents[0];
                              if (!parent->requires_grad) return;
                              parent->ensure_grad();
                              MatMap<S> dA(parent->grad.data(), parent->rows(), parent->cols());
                              const MatMap<S> G(self.grad.data(), self.rows(), self.cols());
                              for (long i = 0; i < dA.rows(); ++i) {
                                const int s = index[static_cast<std::size_t>(i)];
                                if (s >= 0) dA.row(i) += G.row(s);
                              }
                            });
}

// out.row(i) = a.row(index[i]); index -1 yields a zero row (used as padding).
template <class S>
Tensor<S> gather(const Tensor<S>& a, const std::vector<int>& index) {
  const long m = a.cols();
  const long n = static_cast<long>(index.size());
  const auto A = a.mat();
  MatrixRM<S> out = MatrixRM<S>::Zero(n, m);
  for (long i = 0; i < n; ++i) {
    const int s = index[static_cast<std::size_t>(i)];
    if (s < 0) continue;
    if (s >= a.rows()) raise(Errc::ShapeMismatch, "gather: index out of range");
    out.row(i) = A.row(s);
  }
  ArrayX<S> flat = Eigen::Map<ArrayX<S>>(out.data(), out.size());
  return detail::make_op<S>("gather", {n, m}, {a.node()}, std::move(flat),
                            [index](Node<S>& self) {
                              const auto& parent = self.parents[0];
                              if (!parent->requires_grad) return;
                              parent->ensure_grad();
                              MatMap<S> dA(parent->grad.data(), parent->rows(), parent->cols());
                              const MatMap<S> G(self.grad.data(), self.rows(), self.cols());
                              for (long i = 0; i < G.rows(); ++i) {
                                const int s = index[static_cast<std::size_t>(i)];
                                if (s >= 0) dA.row(s) += G.row(i);
                              }
                            });
}

// out.row(i) = a.row(i) * s[i].
template <class S>
Tensor<S> scale_rows(const Tensor<S>& a, const Tensor<S>& factors) {
  if (factors.size() != a.rows()) raise(Errc::ShapeMismatch, "scale_rows: factor count mismatch");
  const auto A = a.mat();
  MatrixRM<S> out = A;
  for (long i = 0; i < A.rows(); ++i) out.row(i) *= factors.array()[i];
  ArrayX<S> flat = Eigen::Map<ArrayX<S>>(out.data(), out.size());
  return detail::make_op<S>(
      "scale_rows", a.dims(), {a.node(), factors.node()}, std::move(flat), [](Node<S>& self) {
        const auto& pa = self.parents[0];
        const auto& pf = self.parents[1];
        const MatMap<S> G(self.grad.data(), self.rows(), self.cols());
        const ConstMatMap<S> A(pa->value->data(), pa->rows(), pa->cols());
        const ArrayX<S>& f = *pf->value;
        if (pa->requires_grad) {
          pa->ensure_grad();
          MatMap<S> dA(pa->grad.data(), pa->rows(), pa->cols());
          for (long i = 0; i < dA.rows(); ++i) dA.row(i) += G.row(i) * f[i];
        }
        if (pf->requires_grad) {
          pf->ensure_grad();
          for (long i = 0; i < A.rows(); ++i) pf->grad[i] += G.row(i).dot(A.row(i));
        }
      });
}

template <class S>
Tensor<S> softmax(const Tensor<S>& a) {
  const auto A = a.mat();
  MatrixRM<S> out(A.rows(), A.cols());
  for (long i = 0; i < A.rows(); ++i) {
    const S mx = A.row(i).maxCoeff();
    out.row(i) = (A.row(i).array() - mx).exp();
    out.row(i) /= out.row(i).sum();
  }
  ArrayX<S> flat = Eigen::Map<ArrayX<S>>(out.data(), out.size());
  return detail::make_op<S>(
      "softmax", a.dims(), {a.node()}, std::move(flat), [](Node<S>& self) {
        const auto& parent = self.parents[0];
        if (!parent->requires_grad) return;
        parent->ensure_grad();
        MatMap<S> dA(parent->grad.data(), parent->rows(), parent->cols());
        const MatMap<S> G(self.grad.data(), self.rows(), self.cols());
        const MatMap<S> P(self.value->data(), self.rows(), self.cols());
        for (long i = 0; i < dA.rows(); ++i) {
          const S inner = G.row(i).dot(P.row(i));
          dA.row(i).array() += P.row(i).array() * (G.row(i).array() - inner);
        }
      });
}

// Row-wise layer normalization with learned gain and bias.
template <class S>
Tensor<S> layernorm(const Tensor<S>& a, const Tensor<S>& gamma, const Tensor<S>& beta,
                    S eps = S(1e-5)) {
  if (gamma.size() != a.cols() || beta.size() != a.cols()) {
    raise(Errc::ShapeMismatch, "layernorm: gain/bias width mismatch");
  }
  const auto A = a.mat();
  const long m = A.cols();
  MatrixRM<S> xhat(A.rows(), m);
  ArrayX<S> inv_std(A.rows());
  for (long i = 0; i < A.rows(); ++i) {
    const S mean = A.row(i).mean();
    const S var = (A.row(i).array() - mean).square().sum() / static_cast<S>(m);
    inv_std[i] = S(1) / std::sqrt(var + eps);
    xhat.row(i) = (A.row(i).array() - mean) * inv_std[i];
  }
  MatrixRM<S> out(A.rows(), m);
  const Eigen::Map<const Eigen::RowVector<S, Eigen::Dynamic>> gr(gamma.array().data(), m);
  const Eigen::Map<const Eigen::RowVector<S, Eigen::Dynamic>> br(beta.array().data(), m);
  for (long i = 0; i < A.rows(); ++i) {
    out.row(i) = xhat.row(i).cwiseProduct(gr) + br;
  }
  ArrayX<S> flat = Eigen::Map<ArrayX<S>>(out.data(), out.size());
  return detail::make_op<S>(
      "layernorm", a.dims(), {a.node(), gamma.node(), beta.node()}, std::move(flat),
      [xhat = std::move(xhat), inv_std = std::move(inv_std), m](Node<S>& self) {
        const auto& pa = self.parents[0];
        const auto& pg = self.parents[1];
        const auto& pb = self.parents[2];
        const MatMap<S> G(self.grad.data(), self.rows(), self.cols());
        const ArrayX<S>& gamma = *pg->value;
        if (pg->requires_grad) {
          pg->ensure_grad();
          for (long i = 0; i < G.rows(); ++i) {
            pg->grad += (G.row(i).array() * xhat.row(i).array()).transpose();
          }
        }
        if (pb->requires_grad) {
          pb->ensure_grad();
          for (long i = 0; i < G.rows(); ++i) pb->grad += G.row(i).array().transpose();
        }
        if (pa->requires_grad) {
          pa->ensure_grad();
          MatMap<S> dA(pa->grad.data(), pa->rows(), pa->cols());
          for (long i = 0; i < G.rows(); ++i) {
            const Eigen::Array<S, 1, Eigen::Dynamic> dxhat =
                G.row(i).array() * gamma.transpose();
            const S mean_dxhat = dxhat.mean();
            const S mean_dxhat_xhat = (dxhat * xhat.row(i).array()).mean();
            dA.row(i).array() +=
                inv_std[i] * (dxhat - mean_dxhat - xhat.row(i).array() * mean_dxhat_xhat);
          }
        }
        (void)m;
      });
}

// Bilinear interpolation of an (R, R, C) grid at n query points with
// coordinates in [0, 1]^2 (pixel-center convention, clamp-to-edge).
// Gradients flow into the grid; the query coordinates are fixed.
template <class S>
Tensor<S> bilinear_interpolate(const Tensor<S>& grid, const MatrixRM<S>& uv) {
  if (grid.dims().size() != 3 || grid.dims()[0] != grid.dims()[1]) {
    raise(Errc::ShapeMismatch, "bilinear_interpolate: grid must be (R, R, C)");
  }
  const long R = grid.dims()[0];
  const long C = grid.dims()[2];
  const long n = uv.rows();
  struct Corner {
    std::int32_t row[4];
    S weight[4];
  };
  std::vector<Corner> corners(static_cast<std::size_t>(n));
  for (long q = 0; q < n; ++q) {
    const S u = uv(q, 0);
    const S v = uv(q, 1);
    if (u < S(-1e-6) || u > S(1) + S(1e-6) || v < S(-1e-6) || v > S(1) + S(1e-6)) {
      raise(Errc::QueryOutOfRange, "bilinear_interpolate: query outside [0,1]^2");
    }
    auto locate = [R](S x) {
      S pix = x * static_cast<S>(R) - S(0.5);
      pix = std::min(std::max(pix, S(0)), static_cast<S>(R - 1));
      long i0 = std::min(static_cast<long>(pix), R >= 2 ? R - 2 : 0L);
      return std::pair<long, S>(i0, R >= 2 ? pix - static_cast<S>(i0) : S(0));
    };
    const auto [iu, wu] = locate(u);
    const auto [iv, wv] = locate(v);
    const long iu1 = std::min(iu + 1, R - 1);
    const long iv1 = std::min(iv + 1, R - 1);
    Corner& c = corners[static_cast<std::size_t>(q)];
    c.row[0] = static_cast<std::int32_t>(iu * R + iv);
    c.row[1] = static_cast<std::int32_t>(iu * R + iv1);
    c.row[2] = static_cast<std::int32_t>(iu1 * R + iv);
    c.row[3] = static_cast<std::int32_t>(iu1 * R + iv1);
    c.weight[0] = (S(1) - wu) * (S(1) - wv);
    c.weight[1] = (S(1) - wu) * wv;
    c.weight[2] = wu * (S(1) - wv);
    c.weight[3] = wu * wv;
  }
  const ConstMatMap<S> Gr(grid.array().data(), R * R, C);
  MatrixRM<S> out = MatrixRM<S>::Zero(n, C);
  for (long q = 0; q < n; ++q) {
    const Corner& c = corners[static_cast<std::size_t>(q)];
    for (int k = 0; k < 4; ++k) out.row(q) += c.weight[k] * Gr.row(c.row[k]);
  }
  ArrayX<S> flat = Eigen::Map<ArrayX<S>>(out.data(), out.size());
  return detail::make_op<S>(
      "bilinear_interpolate", {n, C}, {grid.node()}, std::move(flat),
      [corners = std::move(corners), R, C](Node<S>& self) {
        const auto& parent = self.parents[0];
        if (!parent->requires_grad) return;
        parent->ensure_grad();
        MatMap<S> dG(parent->grad.data(), R * R, C);
        const MatMap<S> G(self.grad.data(), self.rows(), self.cols());
        for (long q = 0; q < G.rows(); ++q) {
          const Corner& c = corners[static_cast<std::size_t>(q)];
          for (int k = 0; k < 4; ++k) dG.row(c.row[k]) += c.weight[k] * G.row(q);
        }
      });
}

template <class S>
Tensor<S> sum_all(const Tensor<S>& a) {
  ArrayX<S> value(1);
  value[0] = a.array().sum();
  return detail::make_op<S>("sum_all", {1}, {a.node()}, std::move(value), [](Node<S>& self) {
    detail::accumulate(self.parents[0],
                       ArrayX<S>::Constant(self.parents[0]->size(), self.grad[0]));
  });
}

template <class S>
Tensor<S> mean_all(const Tensor<S>& a) {
  ArrayX<S> value(1);
  value[0] = a.array().mean();
  return detail::make_op<S>("mean_all", {1}, {a.node()}, std::move(value), [](Node<S>& self) {
    const S w = self.grad[0] / static_cast<S>(self.parents[0]->size());
    detail::accumulate(self.parents[0], ArrayX<S>::Constant(self.parents[0]->size(), w));
  });
}

// Mean over rows of softmax cross entropy, computed from logits.
template <class S>
Tensor<S> cross_entropy_with_logits(const Tensor<S>& logits, const std::vector<int>& labels) {
  if (static_cast<long>(labels.size()) != logits.rows()) {
    raise(Errc::ShapeMismatch, "cross_entropy: label count mismatch");
  }
  const auto L = logits.mat();
  MatrixRM<S> probs(L.rows(), L.cols());
  S total = S(0);
  for (long i = 0; i < L.rows(); ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    if (y < 0 || y >= L.cols()) raise(Errc::ShapeMismatch, "cross_entropy: label out of range");
    const S mx = L.row(i).maxCoeff();
    probs.row(i) = (L.row(i).array() - mx).exp();
    const S denom = probs.row(i).sum();
    probs.row(i) /= denom;
    total += std::log(denom) + mx - L(i, y);
  }
  ArrayX<S> value(1);
  value[0] = total / static_cast<S>(L.rows());
  return detail::make_op<S>(
      "cross_entropy", {1}, {logits.node()}, std::move(value),
      [probs = std::move(probs), labels](Node<S>& self) {
        const auto& parent = self.parents[0];
        if (!parent->requires_grad) return;
        parent->ensure_grad();
        MatMap<S> dL(parent->grad.data(), parent->rows(), parent->cols());
        const S w = self.grad[0] / static_cast<S>(probs.rows());
        for (long i = 0; i < probs.rows(); ++i) {
          dL.row(i) += w * probs.row(i);
          dL(i, labels[static_cast<std::size_t>(i)]) -= w;
        }
      });
}

// Mean of -alpha * (1 - p_t)^gamma * log(p_t) over rows; operates on
// probabilities (e.g. softmax output).
template <class S>
Tensor<S> focal_loss(const Tensor<S>& probs, const std::vector<int>& labels, S gamma = S(2),
                     S alpha = S(0.25)) {
  if (static_cast<long>(labels.size()) != probs.rows()) {
    raise(Errc::ShapeMismatch, "focal_loss: label count mismatch");
  }
  const auto P = probs.mat();
  const S floor = S(1e-7);
  S total = S(0);
  for (long i = 0; i < P.rows(); ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    if (y < 0 || y >= P.cols()) raise(Errc::ShapeMismatch, "focal_loss: label out of range");
    const S pt = std::clamp(P(i, y), floor, S(1) - floor);
    total += -alpha * std::pow(S(1) - pt, gamma) * std::log(pt);
  }
  ArrayX<S> value(1);
  value[0] = total / static_cast<S>(P.rows());
  return detail::make_op<S>(
      "focal_loss", {1}, {probs.node()}, std::move(value),
      [labels, gamma, alpha, floor](Node<S>& self) {
        const auto& parent = self.parents[0];
        if (!parent->requires_grad) return;
        parent->ensure_grad();
        MatMap<S> dP(parent->grad.data(), parent->rows(), parent->cols());
        const ConstMatMap<S> P(parent->value->data(), parent->rows(), parent->cols());
        const S w = self.grad[0] / static_cast<S>(P.rows());
        for (long i = 0; i < P.rows(); ++i) {
          const int y = labels[static_cast<std::size_t>(i)];
          const S pt = std::clamp(P(i, y), floor, S(1) - floor);
          const S one_minus = S(1) - pt;
          const S modulating =
              gamma > S(0) ? alpha * gamma * std::pow(one_minus, gamma - S(1)) * std::log(pt)
                           : S(0);
          dP(i, y) += w * (modulating - alpha * std::pow(one_minus, gamma) / pt);
        }
      });
}

}  // namespace polyrecon::nn

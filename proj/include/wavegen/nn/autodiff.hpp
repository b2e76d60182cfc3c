#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <memory>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>
#include <vector>

// Reverse-mode automatic differentiation on flat row-major 2-D tensors.
//
// Backward functions are themselves composed of taped operations, so the
// gradient of a gradient is available by calling backward() on a scalar
// built from first-order gradients. That second-order path is what the
// critic's gradient penalty trains through. Nonlinearities express their
// local derivative through the op's own output tensor (held via weak_ptr to
// avoid ownership cycles), which keeps higher-order derivatives exact;
// leaky_relu uses its activation mask, whose derivative is zero almost
// everywhere.

namespace wavegen::nn {

using Arr = Eigen::ArrayXd;
using MatMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                              Eigen::RowMajor>>;
using MutMatMap =
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

class Tensor;

struct Node : std::enable_shared_from_this<Node> {
  Arr val;
  int rows = 0;
  int cols = 0;
  bool requires_grad = false;
  std::vector<Tensor> parents;
  std::function<std::vector<Tensor>(const Tensor& upstream)> backward;
};

class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<Node> n) : n_(std::move(n)) {}

  static Tensor constant(int rows, int cols, Arr v) {
    auto n = std::make_shared<Node>();
    n->rows = rows;
    n->cols = cols;
    n->val = std::move(v);
    check_size(*n);
    return Tensor(std::move(n));
  }

  static Tensor zeros(int rows, int cols) {
    return constant(rows, cols, Arr::Zero(Eigen::Index(rows) * cols));
  }

  // Trainable leaf; gradients accumulate here.
  static Tensor leaf(int rows, int cols, Arr v) {
    Tensor t = constant(rows, cols, std::move(v));
    t.n_->requires_grad = true;
    return t;
  }

  bool defined() const { return bool(n_); }
  int rows() const { return n_->rows; }
  int cols() const { return n_->cols; }
  Eigen::Index size() const { return n_->val.size(); }
  const Arr& val() const { return n_->val; }
  Arr& mutable_val() { return n_->val; }
  bool requires_grad() const { return n_->requires_grad; }
  Node* node() const { return n_.get(); }
  std::shared_ptr<Node> shared() const { return n_; }

  MatMap mat() const { return MatMap(n_->val.data(), n_->rows, n_->cols); }

 private:
  static void check_size(const Node& n) {
    if (n.val.size() != Eigen::Index(n.rows) * n.cols)
      throw std::invalid_argument("tensor value size does not match shape");
  }
  std::shared_ptr<Node> n_;
};

namespace detail {

inline Tensor make_op(int rows, int cols, Arr val, std::vector<Tensor> parents,
                      std::function<std::vector<Tensor>(const Tensor&)> backward) {
  auto n = std::make_shared<Node>();
  n->rows = rows;
  n->cols = cols;
  n->val = std::move(val);
  if (n->val.size() != Eigen::Index(rows) * cols)
    throw std::invalid_argument("op produced wrong value size");
  for (const auto& p : parents) n->requires_grad |= p.requires_grad();
  if (n->requires_grad) {
    n->parents = std::move(parents);
    n->backward = std::move(backward);
  }
  return Tensor(std::move(n));
}

inline void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument(std::string(what) + ": shape mismatch");
}

}  // namespace detail

// --- elementwise -----------------------------------------------------------

inline Tensor add(const Tensor& a, const Tensor& b) {
  detail::require_same_shape(a, b, "add");
  return detail::make_op(a.rows(), a.cols(), a.val() + b.val(), {a, b},
                         [](const Tensor& g) { return std::vector<Tensor>{g, g}; });
}

inline Tensor neg(const Tensor& a);
inline Tensor sub(const Tensor& a, const Tensor& b) {
  detail::require_same_shape(a, b, "sub");
  return detail::make_op(a.rows(), a.cols(), a.val() - b.val(), {a, b},
                         [](const Tensor& g) {
                           return std::vector<Tensor>{g, neg(g)};
                         });
}

inline Tensor scale(const Tensor& a, double s) {
  return detail::make_op(a.rows(), a.cols(), a.val() * s, {a},
                         [s](const Tensor& g) {
                           return std::vector<Tensor>{scale(g, s)};
                         });
}

inline Tensor neg(const Tensor& a) { return scale(a, -1.0); }

inline Tensor add_scalar(const Tensor& a, double s) {
  return detail::make_op(a.rows(), a.cols(), a.val() + s, {a},
                         [](const Tensor& g) { return std::vector<Tensor>{g}; });
}

inline Tensor mul(const Tensor& a, const Tensor& b) {
  detail::require_same_shape(a, b, "mul");
  return detail::make_op(a.rows(), a.cols(), a.val() * b.val(), {a, b},
                         [a, b](const Tensor& g) {
                           return std::vector<Tensor>{mul(g, b), mul(g, a)};
                         });
}

inline Tensor div(const Tensor& a, const Tensor& b) {
  detail::require_same_shape(a, b, "div");
  return detail::make_op(a.rows(), a.cols(), a.val() / b.val(), {a, b},
                         [a, b](const Tensor& g) {
                           Tensor ga = div(g, b);
                           Tensor gb = neg(mul(ga, div(a, b)));
                           return std::vector<Tensor>{ga, gb};
                         });
}

inline Tensor square(const Tensor& a) { return mul(a, a); }

inline Tensor sqrt_t(const Tensor& a) {
  auto out = detail::make_op(a.rows(), a.cols(), a.val().sqrt(), {a}, nullptr);
  if (out.requires_grad()) {
    std::weak_ptr<Node> self = out.shared();
    out.node()->backward = [self](const Tensor& g) {
      Tensor y(self.lock());
      return std::vector<Tensor>{div(g, scale(y, 2.0))};
    };
  }
  return out;
}

inline Tensor tanh_t(const Tensor& a) {
  auto out = detail::make_op(a.rows(), a.cols(), a.val().tanh(), {a}, nullptr);
  if (out.requires_grad()) {
    std::weak_ptr<Node> self = out.shared();
    out.node()->backward = [self](const Tensor& g) {
      Tensor y(self.lock());
      return std::vector<Tensor>{mul(g, add_scalar(neg(square(y)), 1.0))};
    };
  }
  return out;
}

inline Tensor sigmoid(const Tensor& a) {
  Arr v = 1.0 / (1.0 + (-a.val()).exp());
  auto out = detail::make_op(a.rows(), a.cols(), std::move(v), {a}, nullptr);
  if (out.requires_grad()) {
    std::weak_ptr<Node> self = out.shared();
    out.node()->backward = [self](const Tensor& g) {
      Tensor y(self.lock());
      return std::vector<Tensor>{mul(g, mul(y, add_scalar(neg(y), 1.0)))};
    };
  }
  return out;
}

// max(x, slope*x). The mask is constant in the backward pass; its derivative
// is zero almost everywhere, so second-order gradients remain exact.
inline Tensor leaky_relu(const Tensor& a, double slope) {
  Arr mask(a.size());
  for (Eigen::Index i = 0; i < a.size(); ++i)
    mask[i] = a.val()[i] >= 0.0 ? 1.0 : slope;
  Tensor mask_t = Tensor::constant(a.rows(), a.cols(), std::move(mask));
  return detail::make_op(a.rows(), a.cols(), a.val() * mask_t.val(), {a},
                         [mask_t](const Tensor& g) {
                           return std::vector<Tensor>{mul(g, mask_t)};
                         });
}

// --- linear algebra ---------------------------------------------------------

inline Tensor transpose(const Tensor& a) {
  Arr v(a.size());
  MutMatMap(v.data(), a.cols(), a.rows()) = a.mat().transpose();
  return detail::make_op(a.cols(), a.rows(), std::move(v), {a},
                         [](const Tensor& g) {
                           return std::vector<Tensor>{transpose(g)};
                         });
}

inline Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matmul: inner dims differ");
  Arr v(Eigen::Index(a.rows()) * b.cols());
  MutMatMap(v.data(), a.rows(), b.cols()).noalias() = a.mat() * b.mat();
  return detail::make_op(a.rows(), b.cols(), std::move(v), {a, b},
                         [a, b](const Tensor& g) {
                           return std::vector<Tensor>{matmul(g, transpose(b)),
                                                      matmul(transpose(a), g)};
                         });
}

// --- shape ops ---------------------------------------------------------------

inline Tensor reshape(const Tensor& a, int rows, int cols) {
  if (Eigen::Index(rows) * cols != a.size())
    throw std::invalid_argument("reshape: element count changed");
  const int orig_r = a.rows(), orig_c = a.cols();
  return detail::make_op(rows, cols, a.val(), {a},
                         [orig_r, orig_c](const Tensor& g) {
                           return std::vector<Tensor>{reshape(g, orig_r, orig_c)};
                         });
}

inline Tensor slice_cols(const Tensor& a, int c0, int c1);

// Zero matrix with `a` written into columns [c0, c0 + a.cols()).
inline Tensor embed_cols(const Tensor& a, int total_cols, int c0) {
  Arr v = Arr::Zero(Eigen::Index(a.rows()) * total_cols);
  for (int r = 0; r < a.rows(); ++r)
    for (int c = 0; c < a.cols(); ++c)
      v[Eigen::Index(r) * total_cols + c0 + c] = a.val()[Eigen::Index(r) * a.cols() + c];
  const int w = a.cols();
  return detail::make_op(a.rows(), total_cols, std::move(v), {a},
                         [c0, w](const Tensor& g) {
                           return std::vector<Tensor>{slice_cols(g, c0, c0 + w)};
                         });
}

inline Tensor slice_cols(const Tensor& a, int c0, int c1) {
  if (c0 < 0 || c1 > a.cols() || c0 >= c1)
    throw std::invalid_argument("slice_cols: bad range");
  const int w = c1 - c0;
  Arr v(Eigen::Index(a.rows()) * w);
  for (int r = 0; r < a.rows(); ++r)
    for (int c = 0; c < w; ++c)
      v[Eigen::Index(r) * w + c] = a.val()[Eigen::Index(r) * a.cols() + c0 + c];
  const int total = a.cols();
  return detail::make_op(a.rows(), w, std::move(v), {a},
                         [c0, total](const Tensor& g) {
                           return std::vector<Tensor>{embed_cols(g, total, c0)};
                         });
}

inline Tensor slice_rows(const Tensor& a, int r0, int r1);

inline Tensor embed_rows(const Tensor& a, int total_rows, int r0) {
  Arr v = Arr::Zero(Eigen::Index(total_rows) * a.cols());
  v.segment(Eigen::Index(r0) * a.cols(), a.size()) = a.val();
  const int h = a.rows();
  return detail::make_op(total_rows, a.cols(), std::move(v), {a},
                         [r0, h](const Tensor& g) {
                           return std::vector<Tensor>{slice_rows(g, r0, r0 + h)};
                         });
}

inline Tensor slice_rows(const Tensor& a, int r0, int r1) {
  if (r0 < 0 || r1 > a.rows() || r0 >= r1)
    throw std::invalid_argument("slice_rows: bad range");
  const int h = r1 - r0;
  Arr v = a.val().segment(Eigen::Index(r0) * a.cols(), Eigen::Index(h) * a.cols());
  const int total = a.rows();
  return detail::make_op(h, a.cols(), std::move(v), {a},
                         [r0, total](const Tensor& g) {
                           return std::vector<Tensor>{embed_rows(g, total, r0)};
                         });
}

inline Tensor concat_cols(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_cols: empty");
  const int rows = parts[0].rows();
  int cols = 0;
  for (const auto& p : parts) {
    if (p.rows() != rows) throw std::invalid_argument("concat_cols: row mismatch");
    cols += p.cols();
  }
  Arr v(Eigen::Index(rows) * cols);
  int at = 0;
  std::vector<int> offsets;
  for (const auto& p : parts) {
    offsets.push_back(at);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < p.cols(); ++c)
        v[Eigen::Index(r) * cols + at + c] = p.val()[Eigen::Index(r) * p.cols() + c];
    at += p.cols();
  }
  std::vector<int> widths;
  for (const auto& p : parts) widths.push_back(p.cols());
  return detail::make_op(rows, cols, std::move(v), parts,
                         [offsets, widths](const Tensor& g) {
                           std::vector<Tensor> gs;
                           for (std::size_t i = 0; i < offsets.size(); ++i)
                             gs.push_back(slice_cols(g, offsets[i],
                                                     offsets[i] + widths[i]));
                           return gs;
                         });
}

inline Tensor concat_rows(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_rows: empty");
  const int cols = parts[0].cols();
  int rows = 0;
  for (const auto& p : parts) {
    if (p.cols() != cols) throw std::invalid_argument("concat_rows: col mismatch");
    rows += p.rows();
  }
  Arr v(Eigen::Index(rows) * cols);
  Eigen::Index at = 0;
  std::vector<int> offsets;
  int row_at = 0;
  std::vector<int> heights;
  for (const auto& p : parts) {
    offsets.push_back(row_at);
    heights.push_back(p.rows());
    v.segment(at, p.size()) = p.val();
    at += p.size();
    row_at += p.rows();
  }
  return detail::make_op(rows, cols, std::move(v), parts,
                         [offsets, heights](const Tensor& g) {
                           std::vector<Tensor> gs;
                           for (std::size_t i = 0; i < offsets.size(); ++i)
                             gs.push_back(slice_rows(g, offsets[i],
                                                     offsets[i] + heights[i]));
                           return gs;
                         });
}

inline Tensor scatter_cols(const Tensor& a, const std::vector<int>& idx, int total_cols);

// Columns of `a` picked by index; the inverse scatter adds, so repeated
// indices are handled correctly.
inline Tensor gather_cols(const Tensor& a, const std::vector<int>& idx) {
  const int w = int(idx.size());
  Arr v(Eigen::Index(a.rows()) * w);
  for (int r = 0; r < a.rows(); ++r)
    for (int c = 0; c < w; ++c)
      v[Eigen::Index(r) * w + c] = a.val()[Eigen::Index(r) * a.cols() + idx[c]];
  const int total = a.cols();
  return detail::make_op(a.rows(), w, std::move(v), {a},
                         [idx, total](const Tensor& g) {
                           return std::vector<Tensor>{scatter_cols(g, idx, total)};
                         });
}

inline Tensor scatter_cols(const Tensor& a, const std::vector<int>& idx,
                           int total_cols) {
  if (int(idx.size()) != a.cols())
    throw std::invalid_argument("scatter_cols: index count mismatch");
  Arr v = Arr::Zero(Eigen::Index(a.rows()) * total_cols);
  for (int r = 0; r < a.rows(); ++r)
    for (int c = 0; c < a.cols(); ++c)
      v[Eigen::Index(r) * total_cols + idx[c]] +=
          a.val()[Eigen::Index(r) * a.cols() + c];
  return detail::make_op(a.rows(), total_cols, std::move(v), {a},
                         [idx](const Tensor& g) {
                           return std::vector<Tensor>{gather_cols(g, idx)};
                         });
}

// --- reductions and broadcasts ----------------------------------------------

inline Tensor tile_cols(const Tensor& v, int cols);

inline Tensor rowsum(const Tensor& a) {
  Arr v(a.rows());
  for (int r = 0; r < a.rows(); ++r)
    v[r] = a.val().segment(Eigen::Index(r) * a.cols(), a.cols()).sum();
  const int c = a.cols();
  return detail::make_op(a.rows(), 1, std::move(v), {a},
                         [c](const Tensor& g) {
                           return std::vector<Tensor>{tile_cols(g, c)};
                         });
}

inline Tensor tile_cols(const Tensor& v, int cols) {
  if (v.cols() != 1) throw std::invalid_argument("tile_cols: expects a column");
  Arr out(Eigen::Index(v.rows()) * cols);
  for (int r = 0; r < v.rows(); ++r)
    out.segment(Eigen::Index(r) * cols, cols).setConstant(v.val()[r]);
  return detail::make_op(v.rows(), cols, std::move(out), {v},
                         [](const Tensor& g) {
                           return std::vector<Tensor>{rowsum(g)};
                         });
}

inline Tensor tile_rows(const Tensor& v, int rows);

inline Tensor colsum(const Tensor& a) {
  Arr v = Arr::Zero(a.cols());
  for (int r = 0; r < a.rows(); ++r)
    v += a.val().segment(Eigen::Index(r) * a.cols(), a.cols());
  const int rr = a.rows();
  return detail::make_op(1, a.cols(), std::move(v), {a},
                         [rr](const Tensor& g) {
                           return std::vector<Tensor>{tile_rows(g, rr)};
                         });
}

inline Tensor tile_rows(const Tensor& v, int rows) {
  if (v.rows() != 1) throw std::invalid_argument("tile_rows: expects a row");
  Arr out(Eigen::Index(rows) * v.cols());
  for (int r = 0; r < rows; ++r) out.segment(Eigen::Index(r) * v.cols(), v.cols()) = v.val();
  return detail::make_op(rows, v.cols(), std::move(out), {v},
                         [](const Tensor& g) {
                           return std::vector<Tensor>{colsum(g)};
                         });
}

inline Tensor broadcast_full(const Tensor& s, int rows, int cols);

inline Tensor sum_all(const Tensor& a) {
  Arr v(1);
  v[0] = a.val().sum();
  const int r = a.rows(), c = a.cols();
  return detail::make_op(1, 1, std::move(v), {a},
                         [r, c](const Tensor& g) {
                           return std::vector<Tensor>{broadcast_full(g, r, c)};
                         });
}

inline Tensor broadcast_full(const Tensor& s, int rows, int cols) {
  if (s.size() != 1) throw std::invalid_argument("broadcast_full: expects a scalar");
  return detail::make_op(rows, cols,
                         Arr::Constant(Eigen::Index(rows) * cols, s.val()[0]), {s},
                         [](const Tensor& g) {
                           return std::vector<Tensor>{sum_all(g)};
                         });
}

inline Tensor mean_all(const Tensor& a) {
  return scale(sum_all(a), 1.0 / double(a.size()));
}

// x + row vector broadcast over rows.
inline Tensor add_rowvec(const Tensor& x, const Tensor& v) {
  if (v.rows() != 1 || v.cols() != x.cols())
    throw std::invalid_argument("add_rowvec: shape mismatch");
  Arr out(x.size());
  for (int r = 0; r < x.rows(); ++r)
    out.segment(Eigen::Index(r) * x.cols(), x.cols()) =
        x.val().segment(Eigen::Index(r) * x.cols(), x.cols()) + v.val();
  return detail::make_op(x.rows(), x.cols(), std::move(out), {x, v},
                         [](const Tensor& g) {
                           return std::vector<Tensor>{g, colsum(g)};
                         });
}

// --- convolution -------------------------------------------------------------

struct ConvGeom {
  int batch = 0, h = 0, w = 0, c = 0;   // input, NHWC rows = batch
  int kh = 0, kw = 0, sh = 0, sw = 0, pad = 0;

  int oh() const { return (h + 2 * pad - kh) / sh + 1; }
  int ow() const { return (w + 2 * pad - kw) / sw + 1; }

  void validate() const {
    if (h + 2 * pad < kh || w + 2 * pad < kw)
      throw std::invalid_argument("conv kernel larger than padded input");
    if (sh < 1 || sw < 1) throw std::invalid_argument("conv stride must be >= 1");
  }
};

inline Tensor col2im(const Tensor& cols, const ConvGeom& g);

// (batch, H*W*C) -> (batch*OH*OW, KH*KW*C) patch matrix; zero padding.
inline Tensor im2col(const Tensor& x, const ConvGeom& g) {
  g.validate();
  if (x.rows() != g.batch || x.cols() != g.h * g.w * g.c)
    throw std::invalid_argument("im2col: input shape mismatch");
  const int oh = g.oh(), ow = g.ow();
  const int patch = g.kh * g.kw * g.c;
  Arr v = Arr::Zero(Eigen::Index(g.batch) * oh * ow * patch);
  for (int b = 0; b < g.batch; ++b) {
    const double* src = x.val().data() + Eigen::Index(b) * x.cols();
    for (int oy = 0; oy < oh; ++oy)
      for (int ox = 0; ox < ow; ++ox) {
        double* dst = v.data() +
                      ((Eigen::Index(b) * oh + oy) * ow + ox) * patch;
        for (int ky = 0; ky < g.kh; ++ky) {
          const int iy = oy * g.sh - g.pad + ky;
          if (iy < 0 || iy >= g.h) continue;
          for (int kx = 0; kx < g.kw; ++kx) {
            const int ix = ox * g.sw - g.pad + kx;
            if (ix < 0 || ix >= g.w) continue;
            const double* cell = src + (Eigen::Index(iy) * g.w + ix) * g.c;
            double* out = dst + (Eigen::Index(ky) * g.kw + kx) * g.c;
            for (int ch = 0; ch < g.c; ++ch) out[ch] = cell[ch];
          }
        }
      }
  }
  return detail::make_op(g.batch * oh * ow, patch, std::move(v), {x},
                         [g](const Tensor& grad) {
                           return std::vector<Tensor>{col2im(grad, g)};
                         });
}

// Adjoint of im2col: scatter-adds patch values back onto the image grid.
inline Tensor col2im(const Tensor& cols, const ConvGeom& g) {
  const int oh = g.oh(), ow = g.ow();
  const int patch = g.kh * g.kw * g.c;
  if (cols.rows() != g.batch * oh * ow || cols.cols() != patch)
    throw std::invalid_argument("col2im: input shape mismatch");
  Arr v = Arr::Zero(Eigen::Index(g.batch) * g.h * g.w * g.c);
  for (int b = 0; b < g.batch; ++b) {
    double* dst = v.data() + Eigen::Index(b) * g.h * g.w * g.c;
    for (int oy = 0; oy < oh; ++oy)
      for (int ox = 0; ox < ow; ++ox) {
        const double* src = cols.val().data() +
                            ((Eigen::Index(b) * oh + oy) * ow + ox) * patch;
        for (int ky = 0; ky < g.kh; ++ky) {
          const int iy = oy * g.sh - g.pad + ky;
          if (iy < 0 || iy >= g.h) continue;
          for (int kx = 0; kx < g.kw; ++kx) {
            const int ix = ox * g.sw - g.pad + kx;
            if (ix < 0 || ix >= g.w) continue;
            double* cell = dst + (Eigen::Index(iy) * g.w + ix) * g.c;
            const double* in = src + (Eigen::Index(ky) * g.kw + kx) * g.c;
            for (int ch = 0; ch < g.c; ++ch) cell[ch] += in[ch];
          }
        }
      }
  }
  return detail::make_op(g.batch, g.h * g.w * g.c, std::move(v), {cols},
                         [g](const Tensor& grad) {
                           return std::vector<Tensor>{im2col(grad, g)};
                         });
}

// --- reverse sweep ------------------------------------------------------------

using GradMap = std::unordered_map<const Node*, Tensor>;

// Gradients of a scalar with respect to every tensor that requires them.
// Gradient tensors are taped: building a scalar out of them and calling
// backward() again yields second-order derivatives.
inline GradMap backward(const Tensor& loss) {
  if (loss.size() != 1)
    throw std::invalid_argument("backward: loss must be a scalar");

  // iterative post-order over the requires_grad subgraph
  std::vector<Node*> order;
  std::unordered_set<const Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack;
  if (loss.requires_grad()) stack.push_back({loss.node(), 0});
  seen.insert(loss.node());
  while (!stack.empty()) {
    auto& [nd, next] = stack.back();
    if (next < nd->parents.size()) {
      Node* p = nd->parents[next].node();
      ++next;
      if (p->requires_grad && !seen.count(p)) {
        seen.insert(p);
        stack.push_back({p, 0});
      }
    } else {
      order.push_back(nd);
      stack.pop_back();
    }
  }

  GradMap grads;
  grads.emplace(loss.node(), Tensor::constant(1, 1, Arr::Ones(1)));
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* nd = *it;
    auto found = grads.find(nd);
    if (found == grads.end() || !nd->backward) continue;
    const std::vector<Tensor> pgrads = nd->backward(found->second);
    if (pgrads.size() != nd->parents.size())
      throw std::logic_error("backward produced wrong arity");
    for (std::size_t i = 0; i < pgrads.size(); ++i) {
      const Tensor& p = nd->parents[i];
      if (!p.requires_grad()) continue;
      auto slot = grads.find(p.node());
      if (slot == grads.end())
        grads.emplace(p.node(), pgrads[i]);
      else
        slot->second = add(slot->second, pgrads[i]);
    }
  }
  return grads;
}

inline Tensor grad_of(const GradMap& grads, const Tensor& t) {
  auto it = grads.find(t.node());
  if (it == grads.end()) return Tensor::zeros(t.rows(), t.cols());
  return it->second;
}

}  // namespace wavegen::nn

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "wavegen/array.hpp"
#include "wavegen/beamspec.hpp"
#include "wavegen/rng.hpp"
#include "wavegen/types.hpp"

namespace wavegen {

// Square-root factor of a correlation matrix, R = L L^H. Unit row norms give
// R a unit diagonal.
struct SqrtFactor {
  CMatrix L;

  double max_row_norm_error() const {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < L.rows(); ++i)
      worst = std::max(worst, std::abs(L.row(i).norm() - 1.0));
    return worst;
  }
};

struct FitOptions {
  int restarts = 8;
  int max_iters = 2000;
  double tol = 1e-8;  // on the gradient 2-norm of the reduced objective
  std::uint64_t seed = 0;
};

struct FitResult {
  CorrelationMatrix R;
  SqrtFactor L;
  double alpha = 0.0;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  int row_rerandomizations = 0;
  std::vector<double> objective_trace;  // winning restart, one entry per iteration
};

// Principal square root from the eigendecomposition; eigenvalues in
// [-1e-6, 0) are clamped to zero, anything lower is rejected as not PSD.
inline SqrtFactor hermitian_sqrt(const CorrelationMatrix& R) {
  R.validate(1e-6);
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(R.R);
  RVector lam = eig.eigenvalues();
  if (lam.minCoeff() < -1e-6)
    throw std::domain_error("matrix is materially not PSD (eigenvalue < -1e-6)");
  for (Eigen::Index i = 0; i < lam.size(); ++i) lam[i] = std::max(lam[i], 0.0);
  const CMatrix& v = eig.eigenvectors();
  CMatrix l = v * lam.cwiseSqrt().asDiagonal() * v.adjoint();
  return SqrtFactor{std::move(l)};
}

namespace detail {

// Steering matrix and desired-pattern samples, shared across evaluations.
// Scratch buffers are preallocated; this is the dataset pipeline's inner loop.
struct FitWorkspace {
  CMatrix a;        // M x I steering vectors
  CMatrix ah;       // I x M, adjoint kept contiguous for the hot product
  RVector b;        // desired levels on the grid
  double b_sq_sum;  // sum b_i^2

  FitWorkspace(const BeamSpec& spec, const ArrayGeometry& geom,
               const AngleGrid& grid)
      : a(steering_matrix(geom, grid)), ah(a.adjoint()), b(sample_on_grid(spec, grid)) {
    spec.validate();
    b_sq_sum = b.squaredNorm();
    if (b_sq_sum <= 0.0)
      throw std::domain_error("desired pattern is zero on the whole grid");
    const Eigen::Index mm = m(), ii = i();
    l_.resize(mm, mm);
    ltil_.resize(mm, mm);
    gtil_.resize(mm, mm);
    w_.resize(ii, mm);
    ws_.resize(ii, mm);
    p_.resize(ii);
    e_.resize(ii);
    row_norm_.resize(mm);
  }

  Eigen::Index m() const { return a.rows(); }
  Eigen::Index i() const { return a.cols(); }

  // p_i = a_i^H L L^H a_i for all grid angles.
  RVector pattern_of(const CMatrix& l) const {
    const CMatrix w = ah * l;  // I x M, row i = a_i^H L
    return w.rowwise().squaredNorm();
  }

  double opt_alpha(const RVector& p) const { return b.dot(p) / b_sq_sum; }

  double objective(double alpha, const RVector& p) const {
    return (alpha * b - p).squaredNorm() / double(i());
  }

  // Shared forward pass: row normalization, grid pattern, residual.
  double forward(const RVector& x) const {
    const Eigen::Index mm = m();
    unpack(x, l_);
    for (Eigen::Index r = 0; r < mm; ++r) {
      row_norm_[r] = l_.row(r).norm();
      ltil_.row(r) = l_.row(r) / row_norm_[r];
    }
    w_.noalias() = ah * ltil_;
    p_ = w_.rowwise().squaredNorm();
    const double alpha = opt_alpha(p_);
    e_ = alpha * b - p_;
    return e_.squaredNorm() / double(i());
  }

  double eval_value(const RVector& x) const { return forward(x); }

  // Gradient for the state cached by the most recent forward() call.
  void grad_of_forward(RVector& grad) const {
    const Eigen::Index mm = m();
    // dJ/dp_i at fixed alpha (alpha is the exact inner minimizer, so the
    // envelope theorem drops its dependence on L).
    const double scale = -2.0 / double(i());
    for (Eigen::Index r = 0; r < w_.rows(); ++r) ws_.row(r) = (scale * e_[r]) * w_.row(r);
    gtil_.noalias() = 2.0 * (a * ws_);
    for (Eigen::Index r = 0; r < mm; ++r) {
      // Projection onto the tangent space of the unit-norm row constraint.
      const Complex inner = ltil_.row(r).conjugate().cwiseProduct(gtil_.row(r)).sum();
      gtil_.row(r) = (gtil_.row(r) - std::real(inner) * ltil_.row(r)) / row_norm_[r];
    }
    pack(gtil_, grad);
  }

  // Reduced objective J(L) = min_alpha J(alpha, L) and its gradient with
  // respect to the unnormalized parameters (rows normalized inside).
  // Real layout: [Re L row-major | Im L row-major].
  double eval(const RVector& x, RVector& grad) const {
    const double obj = forward(x);
    grad_of_forward(grad);
    return obj;
  }

  static void unpack(const RVector& x, CMatrix& l) {
    const Eigen::Index mm = l.rows();
    for (Eigen::Index r = 0; r < mm; ++r)
      for (Eigen::Index c = 0; c < mm; ++c)
        l(r, c) = Complex(x[r * mm + c], x[mm * mm + r * mm + c]);
  }

  static void pack(const CMatrix& g, RVector& x) {
    const Eigen::Index mm = g.rows();
    x.resize(2 * mm * mm);
    for (Eigen::Index r = 0; r < mm; ++r)
      for (Eigen::Index c = 0; c < mm; ++c) {
        x[r * mm + c] = std::real(g(r, c));
        x[mm * mm + r * mm + c] = std::imag(g(r, c));
      }
  }

 private:
  mutable CMatrix l_, ltil_, gtil_, w_, ws_;
  mutable RVector p_, e_, row_norm_;
};

struct LbfgsOutcome {
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> trace;
};

// L-BFGS with Armijo backtracking. The objective is non-increasing across
// iterations by construction of the line search. Trial points use the
// value-only functional; `grad_at_cached` must return the gradient for the
// most recent `value` call, which keeps accepted steps to one forward pass.
inline LbfgsOutcome lbfgs_minimize(
    const std::function<double(const RVector&)>& value,
    const std::function<void(RVector&)>& grad_at_cached, RVector& x,
    int max_iters, double tol, int history = 8) {
  const Eigen::Index n = x.size();
  RVector grad(n), grad_new(n);
  double f = value(x);
  grad_at_cached(grad);
  LbfgsOutcome out;
  out.trace.push_back(f);

  std::vector<RVector> s_hist, y_hist;
  std::vector<double> rho_hist;

  for (int iter = 0; iter < max_iters; ++iter) {
    if (grad.norm() <= tol) {
      out.converged = true;
      break;
    }
    // Two-loop recursion.
    RVector q = grad;
    const int k = int(s_hist.size());
    std::vector<double> alpha_coef(k);
    for (int j = k - 1; j >= 0; --j) {
      alpha_coef[j] = rho_hist[j] * s_hist[j].dot(q);
      q -= alpha_coef[j] * y_hist[j];
    }
    if (k > 0) {
      const double gamma =
          s_hist[k - 1].dot(y_hist[k - 1]) / y_hist[k - 1].squaredNorm();
      q *= gamma;
    }
    for (int j = 0; j < k; ++j) {
      const double beta = rho_hist[j] * y_hist[j].dot(q);
      q += (alpha_coef[j] - beta) * s_hist[j];
    }
    RVector dir = -q;
    double slope = grad.dot(dir);
    if (slope >= 0.0) {  // fall back to steepest descent
      dir = -grad;
      slope = -grad.squaredNorm();
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
    }

    double step = 1.0;
    double f_new = f;
    RVector x_new = x;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      x_new = x + step * dir;
      f_new = value(x_new);
      if (f_new <= f + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // line search exhausted, stationary for our purposes
    grad_at_cached(grad_new);

    const RVector s_vec = x_new - x;
    const RVector y_vec = grad_new - grad;
    const double sy = s_vec.dot(y_vec);
    if (sy > 1e-12 * s_vec.norm() * y_vec.norm()) {
      s_hist.push_back(s_vec);
      y_hist.push_back(y_vec);
      rho_hist.push_back(1.0 / sy);
      if (int(s_hist.size()) > history) {
        s_hist.erase(s_hist.begin());
        y_hist.erase(y_hist.begin());
        rho_hist.erase(rho_hist.begin());
      }
    }
    x = x_new;
    grad = grad_new;
    f = f_new;
    out.iterations = iter + 1;
    out.trace.push_back(f);
  }
  if (grad.norm() <= tol) out.converged = true;
  out.objective = f;
  return out;
}

}  // namespace detail

// Mean squared beampattern error (1/I) sum_i [alpha b_i - a_i^H L L^H a_i]^2.
inline double fit_objective(double alpha, const SqrtFactor& L, const BeamSpec& spec,
                            const ArrayGeometry& geom, const AngleGrid& grid) {
  require(L.L.rows() == geom.m() && L.L.cols() == geom.m(),
          "sqrt factor does not match array size");
  detail::FitWorkspace ws(spec, geom, grid);
  return ws.objective(alpha, ws.pattern_of(L.L));
}

// Closed-form inner minimizer over the pattern scale:
// alpha* = sum_i b_i p_i / sum_i b_i^2.
inline double optimal_alpha(const SqrtFactor& L, const BeamSpec& spec,
                            const ArrayGeometry& geom, const AngleGrid& grid) {
  detail::FitWorkspace ws(spec, geom, grid);
  return ws.opt_alpha(ws.pattern_of(L.L));
}

// Least-squares fit of a unit-diagonal PSD correlation matrix to the desired
// beampattern, over a row-normalized square-root factor. Best local optimum
// over `restarts` random initializations; deterministic for a fixed seed.
inline FitResult fit_correlation(const BeamSpec& spec, const ArrayGeometry& geom,
                                 const AngleGrid& grid,
                                 const FitOptions& options = {}) {
  detail::FitWorkspace ws(spec, geom, grid);
  const Eigen::Index m = geom.m();

  FitResult best;
  best.objective = std::numeric_limits<double>::infinity();

  for (int restart = 0; restart < options.restarts; ++restart) {
    Rng rng(derive_seed(options.seed, 0xF17u, std::uint64_t(restart)));
    RVector x(2 * m * m);
    for (Eigen::Index i = 0; i < x.size(); ++i)
      x[i] = rng.normal() / std::sqrt(2.0 * double(m));

    int rerandomized = 0;
    auto value = [&](const RVector& v) {
      // A row collapsing to zero norm makes the normalization undefined;
      // redraw it and continue. Mutating through const_cast is confined to
      // this recovery path.
      RVector& vv = const_cast<RVector&>(v);
      for (Eigen::Index r = 0; r < m; ++r) {
        double nsq = 0.0;
        for (Eigen::Index c = 0; c < m; ++c) {
          const double re = vv[r * m + c], im = vv[m * m + r * m + c];
          nsq += re * re + im * im;
        }
        if (std::sqrt(nsq) < 1e-12) {
          for (Eigen::Index c = 0; c < m; ++c) {
            vv[r * m + c] = rng.normal() / std::sqrt(2.0 * double(m));
            vv[m * m + r * m + c] = rng.normal() / std::sqrt(2.0 * double(m));
          }
          ++rerandomized;
        }
      }
      return ws.eval_value(vv);
    };
    auto grad_at_cached = [&](RVector& grad) { ws.grad_of_forward(grad); };

    detail::LbfgsOutcome run = detail::lbfgs_minimize(value, grad_at_cached, x,
                                                      options.max_iters, options.tol);

    if (run.objective < best.objective) {
      CMatrix l(m, m);
      detail::FitWorkspace::unpack(x, l);
      for (Eigen::Index r = 0; r < m; ++r) l.row(r) /= l.row(r).norm();
      const RVector p = ws.pattern_of(l);
      best.L = SqrtFactor{l};
      best.R = CorrelationMatrix(l * l.adjoint());
      best.R.R.diagonal().setOnes();  // exact by construction, drop rounding
      best.alpha = ws.opt_alpha(p);
      best.objective = run.objective;
      best.iterations = run.iterations;
      best.converged = run.converged;
      best.row_rerandomizations = rerandomized;
      best.objective_trace = std::move(run.trace);
    }
  }
  return best;
}

}  // namespace wavegen

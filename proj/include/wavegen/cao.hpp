#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "wavegen/covfit.hpp"
#include "wavegen/rng.hpp"
#include "wavegen/types.hpp"

namespace wavegen {

struct CaoOptions {
  double tol = 1e-3;    // Frobenius norm of the change in X between iterations
  int max_iter = 10000;
};

struct CaoTrace {
  std::vector<double> objective_per_iter;  // ||X - sqrt(N) U L^H||_F, per iteration
  std::vector<double> delta_per_iter;      // ||X_k - X_{k-1}||_F
  int iterations = 0;
  bool converged = false;
};

struct CaoResult {
  CodeMatrix X;
  CaoTrace trace;
};

// Cyclic minimization of ||X - sqrt(N) U L^H||_F over unit-modulus X and
// semi-unitary U (U^H U = I). Each half-step solves its subproblem exactly,
// so the recorded objective never increases:
//   U-step: orthogonal Procrustes via the thin SVD of X L,
//   X-step: entrywise nearest unit-modulus point, X_nm = exp(j arg(T_nm)).
// arg(0) evaluates to 0, which keeps rank-deficient targets well defined.
inline CaoResult ca_synthesize_with_factor(const SqrtFactor& L, int n_samples,
                                           std::uint64_t seed,
                                           const CaoOptions& options = {}) {
  const Eigen::Index m = L.L.rows();
  require(L.L.cols() == m, "sqrt factor must be square");
  require(n_samples >= m, "need at least as many samples as waveforms");

  const double root_n = std::sqrt(double(n_samples));
  Rng rng(seed);
  CMatrix x(n_samples, m);
  for (Eigen::Index r = 0; r < n_samples; ++r)
    for (Eigen::Index c = 0; c < m; ++c)
      x(r, c) = std::polar(1.0, rng.uniform(0.0, 2.0 * std::numbers::pi));

  CaoResult out;
  const CMatrix lh = L.L.adjoint();
  for (int iter = 1; iter <= options.max_iter; ++iter) {
    Eigen::JacobiSVD<CMatrix> svd(x * L.L,
                                  Eigen::ComputeThinU | Eigen::ComputeThinV);
    const CMatrix u = svd.matrixU() * svd.matrixV().adjoint();
    const CMatrix target = root_n * u * lh;

    double delta_sq = 0.0;
    for (Eigen::Index c = 0; c < m; ++c)
      for (Eigen::Index r = 0; r < n_samples; ++r) {
        const Complex next = std::polar(1.0, std::arg(target(r, c)));
        delta_sq += std::norm(next - x(r, c));
        x(r, c) = next;
      }
    const double delta = std::sqrt(delta_sq);

    out.trace.objective_per_iter.push_back((x - target).norm());
    out.trace.delta_per_iter.push_back(delta);
    out.trace.iterations = iter;
    if (delta < options.tol) {
      out.trace.converged = true;
      break;
    }
  }
  out.X = CodeMatrix(std::move(x));
  return out;
}

inline CaoResult ca_synthesize(const CorrelationMatrix& R, int n_samples,
                               std::uint64_t seed, const CaoOptions& options = {}) {
  return ca_synthesize_with_factor(hermitian_sqrt(R), n_samples, seed, options);
}

}  // namespace wavegen

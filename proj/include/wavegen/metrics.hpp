#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "wavegen/array.hpp"
#include "wavegen/beamspec.hpp"
#include "wavegen/covfit.hpp"
#include "wavegen/types.hpp"

namespace wavegen {

// Similarity ||A^H B||_F between two code matrices. A proximity, not a
// distance: larger means more alike.
inline double similarity(const CodeMatrix& A, const CodeMatrix& B) {
  require(A.n() == B.n() && A.m() == B.m(), "similarity needs equal shapes");
  return (A.X.adjoint() * B.X).norm();
}

// Mean similarity of each sample to the plain entrywise mean of the set.
// Captures how concentrated the set is.
inline double c_in(const std::vector<CodeMatrix>& samples) {
  require(samples.size() >= 2, "c_in needs at least two samples");
  CMatrix mean = samples[0].X;
  for (std::size_t i = 1; i < samples.size(); ++i) {
    require(samples[i].n() == samples[0].n() && samples[i].m() == samples[0].m(),
            "c_in needs equal shapes");
    mean += samples[i].X;
  }
  mean /= double(samples.size());
  const CodeMatrix mean_cm(mean);
  double acc = 0.0;
  for (const auto& s : samples) acc += (s.X.adjoint() * mean).norm();
  return acc / double(samples.size());
}

// Mean nearest-neighbor similarity of generated samples to the data set,
// normalized by the mean data self-similarity so that a model copying the
// data directly scores 1.
inline double c_nn(const std::vector<CodeMatrix>& gan_samples,
                   const std::vector<CodeMatrix>& data_samples) {
  require(!gan_samples.empty() && !data_samples.empty(), "c_nn needs nonempty sets");
  double raw = 0.0;
  for (const auto& g : gan_samples) {
    double best = 0.0;
    for (const auto& d : data_samples) best = std::max(best, similarity(g, d));
    raw += best;
  }
  raw /= double(gan_samples.size());
  double norm = 0.0;
  for (const auto& d : data_samples) norm += similarity(d, d);
  norm /= double(data_samples.size());
  return raw / norm;
}

// |Tr(X^H X_tau)| with X_tau the copy of X delayed by tau rows, zero-filled
// (aperiodic convention).
inline double delayed_autocorrelation(const CodeMatrix& X, int tau) {
  const int n = int(X.n());
  if (std::abs(tau) >= n)
    throw std::domain_error("|tau| must be smaller than the code length");
  const int shift = std::abs(tau);
  Complex acc(0.0, 0.0);
  // Tr(X^H X_tau) = sum_m sum_n conj(X[n, m]) X[n - tau, m]
  for (Eigen::Index m = 0; m < X.m(); ++m)
    for (int row = shift; row < n; ++row) {
      if (tau >= 0)
        acc += std::conj(X.X(row, m)) * X.X(row - shift, m);
      else
        acc += std::conj(X.X(row - shift, m)) * X.X(row, m);
    }
  return std::abs(acc);
}

struct DiversityReport {
  double c_in_gan = 0.0;
  double c_in_data = 0.0;
  double c_nn = 0.0;
  int gan_samples_per_label = 0;
  int data_samples_per_label = 0;
};

// RMS beampattern mismatch at the optimal scale: sqrt of the mean squared
// residual between alpha* b(theta) and the pattern of R.
inline double beampattern_rmse(const CorrelationMatrix& R, const BeamSpec& spec,
                               const ArrayGeometry& geom, const AngleGrid& grid) {
  require(R.m() == geom.m(), "correlation matrix does not match array");
  detail::FitWorkspace ws(spec, geom, grid);
  // p_i = a_i^H R a_i, computed directly from R.
  RVector p(grid.size());
  for (Eigen::Index i = 0; i < grid.size(); ++i)
    p[i] = std::real(Complex(ws.a.col(i).adjoint() * R.R * ws.a.col(i)));
  const double alpha = ws.opt_alpha(p);
  return std::sqrt(ws.objective(alpha, p));
}

inline double beampattern_rmse(const CodeMatrix& X, const BeamSpec& spec,
                               const ArrayGeometry& geom, const AngleGrid& grid) {
  return beampattern_rmse(empirical_correlation(X), spec, geom, grid);
}

}  // namespace wavegen

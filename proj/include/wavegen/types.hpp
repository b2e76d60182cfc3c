#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace wavegen {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

struct shape_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Raised when training blows up; callers map this to a dedicated exit code.
struct divergence_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw shape_error(msg);
}

// N x M matrix of phase-code samples. Columns are per-antenna waveforms,
// rows are time samples; every entry has magnitude 1.
struct CodeMatrix {
  CMatrix X;

  CodeMatrix() = default;
  explicit CodeMatrix(CMatrix x) : X(std::move(x)) {}

  Eigen::Index n() const { return X.rows(); }
  Eigen::Index m() const { return X.cols(); }

  double max_modulus_error() const {
    double worst = 0.0;
    for (Eigen::Index j = 0; j < X.cols(); ++j)
      for (Eigen::Index i = 0; i < X.rows(); ++i)
        worst = std::max(worst, std::abs(std::abs(X(i, j)) - 1.0));
    return worst;
  }
};

// M x M Hermitian PSD matrix with unit diagonal; fully determines the
// transmit beampattern of a constant-modulus code set.
struct CorrelationMatrix {
  CMatrix R;

  CorrelationMatrix() = default;
  explicit CorrelationMatrix(CMatrix r) : R(std::move(r)) {}

  static CorrelationMatrix identity(Eigen::Index m) {
    return CorrelationMatrix(CMatrix::Identity(m, m));
  }

  Eigen::Index m() const { return R.rows(); }

  // Checks Hermitian symmetry and unit diagonal; PSD is checked separately
  // where an eigendecomposition is taken anyway.
  void validate(double tol = 1e-8) const {
    require(R.rows() == R.cols(), "correlation matrix must be square");
    if ((R - R.adjoint()).cwiseAbs().maxCoeff() > tol)
      throw std::invalid_argument("correlation matrix must be Hermitian");
    for (Eigen::Index i = 0; i < R.rows(); ++i)
      if (std::abs(R(i, i) - Complex(1.0, 0.0)) > tol)
        throw std::invalid_argument("correlation matrix must have unit diagonal");
  }
};

}  // namespace wavegen

#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "wavegen/types.hpp"

namespace wavegen {

// Co-located transmit array, element positions along one axis in units of
// wavelength. Immutable after construction.
struct ArrayGeometry {
  RVector positions;

  // Uniform linear array with half-wavelength spacing.
  explicit ArrayGeometry(Eigen::Index m) : positions(m) {
    require(m >= 1, "array needs at least one element");
    for (Eigen::Index i = 0; i < m; ++i) positions[i] = 0.5 * double(i);
  }

  explicit ArrayGeometry(RVector pos) : positions(std::move(pos)) {
    require(positions.size() >= 1, "array needs at least one element");
    for (Eigen::Index i = 1; i < positions.size(); ++i)
      require(positions[i] > positions[i - 1],
              "element positions must be strictly increasing");
  }

  Eigen::Index m() const { return positions.size(); }
};

// Angles in degrees measured from broadside, each in [-90, 90].
struct AngleGrid {
  RVector angles_deg;

  explicit AngleGrid(RVector a) : angles_deg(std::move(a)) {
    require(angles_deg.size() >= 2, "angle grid needs at least two points");
    for (Eigen::Index i = 0; i < angles_deg.size(); ++i)
      require(angles_deg[i] >= -90.0 && angles_deg[i] <= 90.0,
              "grid angle outside [-90, 90]");
    for (Eigen::Index i = 1; i < angles_deg.size(); ++i)
      require(angles_deg[i] > angles_deg[i - 1],
              "grid angles must be strictly increasing");
  }

  // [-90, 90] in 1 degree steps: 181 points.
  static AngleGrid standard(double step_deg = 1.0) {
    std::vector<double> a;
    for (double t = -90.0; t <= 90.0 + 1e-9; t += step_deg) a.push_back(t);
    return AngleGrid(Eigen::Map<const RVector>(a.data(), Eigen::Index(a.size())));
  }

  Eigen::Index size() const { return angles_deg.size(); }
};

// a(theta): element m responds exp(j 2 pi d_m sin theta), d_m in wavelengths.
inline CVector steering_vector(const ArrayGeometry& geom, double theta_deg) {
  if (theta_deg < -90.0 || theta_deg > 90.0)
    throw std::domain_error("steering angle outside [-90, 90] degrees");
  const double s = std::sin(theta_deg * std::numbers::pi / 180.0);
  CVector a(geom.m());
  for (Eigen::Index i = 0; i < geom.m(); ++i) {
    const double phase = 2.0 * std::numbers::pi * geom.positions[i] * s;
    a[i] = std::polar(1.0, phase);
  }
  return a;
}

// Steering vectors for a whole grid, one column per angle.
inline CMatrix steering_matrix(const ArrayGeometry& geom, const AngleGrid& grid) {
  CMatrix a(geom.m(), grid.size());
  for (Eigen::Index i = 0; i < grid.size(); ++i)
    a.col(i) = steering_vector(geom, grid.angles_deg[i]);
  return a;
}

// b(theta_i) = a(theta_i)^H R a(theta_i) over the grid.
inline RVector beampattern(const CorrelationMatrix& R, const ArrayGeometry& geom,
                           const AngleGrid& grid) {
  require(R.m() == geom.m(), "correlation matrix does not match array size");
  RVector b(grid.size());
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    const CVector a = steering_vector(geom, grid.angles_deg[i]);
    b[i] = std::real(Complex(a.adjoint() * R.R * a));
  }
  return b;
}

// X^H X / N. Each column of a unit-modulus X has squared norm N, so the
// diagonal is identically one; it is set exactly to remove rounding noise.
inline CorrelationMatrix empirical_correlation(const CodeMatrix& X) {
  require(X.n() >= 1 && X.m() >= 1, "empty code matrix");
  CMatrix g = (X.X.adjoint() * X.X) / double(X.n());
  g = 0.5 * (g + g.adjoint().eval());
  g.diagonal().setOnes();
  return CorrelationMatrix(std::move(g));
}

}  // namespace wavegen

#include <catch2/catch_amalgamated.hpp>

#include "wavegen/array.hpp"
#include "wavegen/rng.hpp"

using namespace wavegen;

namespace {

CodeMatrix random_unit_modulus(int n, int m, std::uint64_t seed) {
  Rng rng(seed);
  CMatrix x(n, m);
  for (int c = 0; c < m; ++c)
    for (int r = 0; r < n; ++r)
      x(r, c) = std::polar(1.0, rng.uniform(0.0, 2.0 * std::numbers::pi));
  return CodeMatrix(std::move(x));
}

}  // namespace

TEST_CASE("steering vector basics") {
  ArrayGeometry ula4(4);

  SECTION("broadside is all ones") {
    const CVector a = steering_vector(ula4, 0.0);
    for (int i = 0; i < 4; ++i) {
      REQUIRE(std::abs(a[i] - Complex(1.0, 0.0)) < 1e-12);
    }
  }

  SECTION("half-wavelength ULA at 30 degrees") {
    ArrayGeometry ula2(2);
    const CVector a = steering_vector(ula2, 30.0);
    REQUIRE(std::abs(a[0] - Complex(1.0, 0.0)) < 1e-12);
    // pi * sin(30 deg) = pi/2, so the second element is j
    REQUIRE(std::abs(a[1] - Complex(0.0, 1.0)) < 1e-12);
  }

  SECTION("entries have unit modulus") {
    Rng rng(7);
    for (int trial = 0; trial < 50; ++trial) {
      const double theta = rng.uniform(-90.0, 90.0);
      const CVector a = steering_vector(ula4, theta);
      for (int i = 0; i < 4; ++i) REQUIRE(std::abs(std::abs(a[i]) - 1.0) < 1e-14);
    }
  }

  SECTION("negated angle conjugates the vector") {
    Rng rng(8);
    for (int trial = 0; trial < 50; ++trial) {
      const double theta = rng.uniform(0.0, 90.0);
      const CVector a = steering_vector(ula4, theta);
      const CVector b = steering_vector(ula4, -theta);
      REQUIRE((b - a.conjugate()).norm() < 1e-12);
    }
  }

  SECTION("angle out of range throws") {
    REQUIRE_THROWS_AS(steering_vector(ula4, 90.5), std::domain_error);
    REQUIRE_THROWS_AS(steering_vector(ula4, -91.0), std::domain_error);
  }
}

TEST_CASE("beampattern") {
  ArrayGeometry geom(5);
  AngleGrid grid = AngleGrid::standard();

  SECTION("identity correlation is omnidirectional") {
    const RVector b = beampattern(CorrelationMatrix::identity(5), geom, grid);
    for (Eigen::Index i = 0; i < b.size(); ++i)
      REQUIRE(b[i] == Catch::Approx(5.0).margin(1e-10));
    // grid average of b / M is exactly 1 for R = I
    REQUIRE(b.mean() / 5.0 == Catch::Approx(1.0).margin(1e-12));
  }

  SECTION("coherent sum at broadside for the all-ones matrix") {
    ArrayGeometry g2(2);
    CorrelationMatrix ones(CMatrix::Ones(2, 2));
    const RVector b = beampattern(ones, g2, AngleGrid::standard());
    // theta = 0 sits at index 90 of the 181-point grid
    REQUIRE(b[90] == Catch::Approx(4.0).margin(1e-10));
  }

  SECTION("PSD correlation gives nonnegative pattern") {
    Rng rng(21);
    for (int trial = 0; trial < 10; ++trial) {
      CMatrix g(5, 5);
      for (int r = 0; r < 5; ++r)
        for (int c = 0; c < 5; ++c) g(r, c) = Complex(rng.normal(), rng.normal());
      CMatrix psd = g * g.adjoint();
      RVector d = psd.diagonal().real().cwiseSqrt();
      for (int r = 0; r < 5; ++r)
        for (int c = 0; c < 5; ++c) psd(r, c) /= d[r] * d[c];
      const RVector b = beampattern(CorrelationMatrix(psd), geom, grid);
      REQUIRE(b.minCoeff() >= -1e-10);
    }
  }

  SECTION("dimension mismatch throws") {
    REQUIRE_THROWS_AS(beampattern(CorrelationMatrix::identity(3), geom, grid),
                      shape_error);
  }
}

TEST_CASE("empirical correlation") {
  SECTION("unit diagonal and Hermitian for any unit-modulus input") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      const CodeMatrix x = random_unit_modulus(41, 10, seed);
      const CorrelationMatrix r = empirical_correlation(x);
      for (int i = 0; i < 10; ++i) REQUIRE(r.R(i, i) == Complex(1.0, 0.0));
      REQUIRE((r.R - r.R.adjoint()).cwiseAbs().maxCoeff() == 0.0);
      REQUIRE(r.R.cwiseAbs().maxCoeff() <= 1.0 + 1e-12);
    }
  }

  SECTION("single waveform gives [1]") {
    const CodeMatrix x = random_unit_modulus(16, 1, 4);
    const CorrelationMatrix r = empirical_correlation(x);
    REQUIRE(r.m() == 1);
    REQUIRE(r.R(0, 0) == Complex(1.0, 0.0));
  }

  SECTION("orthogonal DFT columns give identity") {
    const int n = 8;
    CMatrix x(n, n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c)
        x(r, c) = std::polar(1.0, 2.0 * std::numbers::pi * r * c / n);
    const CorrelationMatrix g = empirical_correlation(CodeMatrix(x));
    REQUIRE((g.R - CMatrix::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

#include <catch2/catch_amalgamated.hpp>

#include "wavegen/array.hpp"
#include "wavegen/cao.hpp"

using namespace wavegen;

namespace {

CMatrix random_complex(int rows, int cols, Rng& rng) {
  CMatrix m(rows, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) m(r, c) = Complex(rng.normal(), rng.normal());
  return m;
}

CMatrix random_semi_unitary(int rows, int cols, Rng& rng) {
  const CMatrix g = random_complex(rows, cols, rng);
  Eigen::HouseholderQR<CMatrix> qr(g);
  CMatrix q = qr.householderQ() * CMatrix::Identity(rows, cols);
  return q;
}

}  // namespace

TEST_CASE("single waveform converges immediately") {
  CorrelationMatrix r = CorrelationMatrix::identity(1);
  const CaoResult res = ca_synthesize(r, 8, 42);
  REQUIRE(res.trace.converged);
  REQUIRE(res.trace.iterations <= 2);
  const Complex gram = (res.X.X.adjoint() * res.X.X)(0, 0);
  REQUIRE(std::abs(gram - Complex(8.0, 0.0)) < 1e-12);
}

TEST_CASE("identity target improves over the random start") {
  const int n = 41, m = 10;
  const CorrelationMatrix r = CorrelationMatrix::identity(m);

  // residual of the raw random initialization, rebuilt from the same seed
  Rng rng(7);
  CMatrix x0(n, m);
  for (int row = 0; row < n; ++row)
    for (int col = 0; col < m; ++col)
      x0(row, col) = std::polar(1.0, rng.uniform(0.0, 2.0 * std::numbers::pi));
  const double initial = ((x0.adjoint() * x0) / double(n) - r.R).norm();

  const CaoResult res = ca_synthesize(r, n, 7);
  const double final_res = ((res.X.X.adjoint() * res.X.X) / double(n) - r.R).norm();
  REQUIRE(final_res < initial);

  for (std::size_t i = 1; i < res.trace.objective_per_iter.size(); ++i)
    REQUIRE(res.trace.objective_per_iter[i] <=
            res.trace.objective_per_iter[i - 1] + 1e-9);
}

TEST_CASE("fixed seed reproduces bit-identical output") {
  const CorrelationMatrix r = CorrelationMatrix::identity(4);
  const CaoResult a = ca_synthesize(r, 16, 123);
  const CaoResult b = ca_synthesize(r, 16, 123);
  REQUIRE((a.X.X - b.X.X).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE(a.trace.iterations == b.trace.iterations);
}

TEST_CASE("output is exactly unit modulus") {
  CMatrix rm(3, 3);
  rm << Complex(1, 0), Complex(0.4, 0.2), Complex(0.1, -0.3),
        Complex(0.4, -0.2), Complex(1, 0), Complex(0.5, 0.1),
        Complex(0.1, 0.3), Complex(0.5, -0.1), Complex(1, 0);
  // project to PSD just in case the handwritten entries are slightly indefinite
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(rm);
  RVector lam = eig.eigenvalues().cwiseMax(0.0);
  CMatrix psd = eig.eigenvectors() * lam.asDiagonal() * eig.eigenvectors().adjoint();
  RVector d = psd.diagonal().real().cwiseSqrt();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) psd(r, c) /= d[r] * d[c];

  const CaoResult res = ca_synthesize(CorrelationMatrix(psd), 12, 5);
  REQUIRE(res.X.max_modulus_error() < 1e-15);
}

TEST_CASE("procrustes step beats random semi-unitary candidates") {
  const int n = 3, m = 2;
  Rng rng(11);
  CMatrix x(n, m);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < m; ++c)
      x(r, c) = std::polar(1.0, rng.uniform(0.0, 2.0 * std::numbers::pi));
  CMatrix rmat(m, m);
  rmat << Complex(1, 0), Complex(0.6, 0.2), Complex(0.6, -0.2), Complex(1, 0);
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(rmat);
  REQUIRE(eig.eigenvalues().minCoeff() >= 0.0);
  const SqrtFactor l = hermitian_sqrt(CorrelationMatrix(rmat));

  const double root_n = std::sqrt(double(n));
  Eigen::JacobiSVD<CMatrix> svd(x * l.L, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const CMatrix u_opt = svd.matrixU() * svd.matrixV().adjoint();
  const double best = (x - root_n * u_opt * l.L.adjoint()).norm();

  for (int trial = 0; trial < 1000; ++trial) {
    const CMatrix u = random_semi_unitary(n, m, rng);
    REQUIRE((u.adjoint() * u - CMatrix::Identity(m, m)).norm() < 1e-10);
    const double obj = (x - root_n * u * l.L.adjoint()).norm();
    REQUIRE(best <= obj + 1e-12);
  }
}

TEST_CASE("rank-deficient targets do not crash") {
  // all-ones R has eigenvalues {2, 0}
  CorrelationMatrix ones(CMatrix::Ones(2, 2));
  const CaoResult res = ca_synthesize(ones, 10, 9);
  REQUIRE(res.X.max_modulus_error() < 1e-15);
  for (std::size_t i = 1; i < res.trace.objective_per_iter.size(); ++i)
    REQUIRE(res.trace.objective_per_iter[i] <=
            res.trace.objective_per_iter[i - 1] + 1e-9);
}

TEST_CASE("shape and PSD errors") {
  REQUIRE_THROWS_AS(ca_synthesize(CorrelationMatrix::identity(6), 4, 1), shape_error);
  CMatrix bad(2, 2);
  bad << Complex(1, 0), Complex(1.2, 0), Complex(1.2, 0), Complex(1, 0);
  REQUIRE_THROWS_AS(ca_synthesize(CorrelationMatrix(bad), 8, 1), std::domain_error);
}

TEST_CASE("stopping rule honors the tolerance") {
  const CorrelationMatrix r = CorrelationMatrix::identity(3);
  CaoOptions opts;
  opts.tol = 1e-3;
  const CaoResult res = ca_synthesize(r, 12, 3, opts);
  REQUIRE(res.trace.converged);
  REQUIRE(res.trace.delta_per_iter.back() < opts.tol);
  // every earlier delta was at or above the threshold
  for (std::size_t i = 0; i + 1 < res.trace.delta_per_iter.size(); ++i)
    REQUIRE(res.trace.delta_per_iter[i] >= opts.tol);

  CaoOptions tight;
  tight.tol = 0.0;  // cannot fire; must stop at max_iter
  tight.max_iter = 5;
  const CaoResult res2 = ca_synthesize(r, 12, 3, tight);
  REQUIRE_FALSE(res2.trace.converged);
  REQUIRE(res2.trace.iterations == 5);
}

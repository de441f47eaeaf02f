#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gaussifs/spectral.hpp"

using namespace gaussifs;

TEST_CASE("collocation grid reproduces polynomials") {
  CollocationGrid grid(32);
  REQUIRE(grid.size() == 32);
  const Eigen::VectorXd& x = grid.nodes();
  CHECK(x(0) == 0.0);
  CHECK(x(31) == doctest::Approx(1.0).epsilon(1e-15));
  for (int i = 0; i + 1 < grid.size(); ++i) CHECK(x(i) < x(i + 1));

  // interpolation is exact on polynomials of degree <= M
  Eigen::VectorXd f(grid.size());
  for (int i = 0; i < grid.size(); ++i) f(i) = std::pow(x(i), 3) - 0.5 * x(i);
  for (double y : {0.0, 0.137, 0.5, 0.901, 1.0}) {
    double interp = grid.interp_row(y).dot(f);
    CHECK(interp == doctest::Approx(y * y * y - 0.5 * y).epsilon(1e-13));
  }

  // differentiation matrix applied to x^3 gives 3x^2 at the nodes
  Eigen::VectorXd cube(grid.size()), df(grid.size());
  for (int i = 0; i < grid.size(); ++i) cube(i) = std::pow(x(i), 3);
  df = grid.diff_matrix() * cube;
  for (int i = 0; i < grid.size(); ++i)
    CHECK(df(i) == doctest::Approx(3.0 * x(i) * x(i)).epsilon(2e-10));
}

TEST_CASE("operator assembly guards") {
  CollocationGrid grid(16);
  CHECK_THROWS_AS(assemble_operator(SystemKind::Gauss, 0.3, 10, grid), std::domain_error);
  CHECK_THROWS_AS(assemble_operator(SystemKind::Gauss, 4.5, 10, grid), std::domain_error);
  CHECK_THROWS_AS(assemble_operator(SystemKind::Gauss, 0.7, kInfiniteTruncation, grid),
                  std::domain_error);
  CHECK_THROWS_AS(assemble_operator(SystemKind::Gauss, 1.0, 0, grid), std::domain_error);
  CHECK_THROWS_AS(assemble_operator(SystemKind::Gauss, 1.0, -2, grid), std::domain_error);

  CHECK(assemble_operator(SystemKind::Gauss, 0.6, 10, grid).below_convergence_region);
  CHECK_FALSE(assemble_operator(SystemKind::Gauss, 0.8, 10, grid).below_convergence_region);
  CHECK_FALSE(
      assemble_operator(SystemKind::Gauss, 0.8, kInfiniteTruncation, grid).below_convergence_region);
}

TEST_CASE("rows act correctly on constants") {
  CollocationGrid grid(24);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(grid.size());

  // applying the finite operator to 1 gives sum_{k<=n} |g_k'(x)|^t at each node
  OperatorMatrix gop = assemble_operator(SystemKind::Gauss, 1.0, 7, grid);
  Eigen::VectorXd img = gop.A * ones;
  for (int i = 0; i < grid.size(); ++i) {
    double x = grid.nodes()(i), direct = 0.0;
    for (long k = 1; k <= 7; ++k) direct += 1.0 / ((x + k) * (x + k));
    CHECK(img(i) == doctest::Approx(direct).epsilon(1e-12));
  }

  // the piecewise-affine family has constant slopes, so 1 maps to a constant
  OperatorMatrix lop = assemble_operator(SystemKind::LinearGauss, 0.9, 5, grid);
  Eigen::VectorXd limg = lop.A * ones;
  double expect = 0.0;
  for (long k = 1; k <= 5; ++k) expect += std::pow(1.0 / (k * (k + 1.0)), 0.9);
  for (int i = 0; i < grid.size(); ++i)
    CHECK(limg(i) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("leading eigenvalues at t = 1") {
  CollocationGrid grid(32);

  // two affine branches: lambda = a_1 + a_2 = 1/2 + 1/6 = 2/3 exactly
  SpectralData lin = leading_eigen(assemble_operator(SystemKind::LinearGauss, 1.0, 2, grid));
  CHECK(lin.lambda == doctest::Approx(2.0 / 3.0).epsilon(1e-13));

  // two nonlinear branches
  SpectralData g2 = leading_eigen(assemble_operator(SystemKind::Gauss, 1.0, 2, grid));
  CHECK(g2.lambda == doctest::Approx(0.561326919954431).epsilon(1e-9));

  // the untruncated operator at t = 1 fixes 1/(1+x): lambda = 1
  SpectralData ginf =
      leading_eigen(assemble_operator(SystemKind::Gauss, 1.0, kInfiniteTruncation, grid));
  CHECK(std::fabs(ginf.lambda - 1.0) < 1e-10);
  CHECK(ginf.iterations > 0);
  CHECK(ginf.residual < 1e-10);

  // dual weights: normalized, nonnegative, and paired with the eigenfunction
  CHECK(ginf.dual_weights.sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ginf.dual_weights.minCoeff() > 0.0);
  CHECK(ginf.dual_weights.dot(ginf.rho) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("eigenfunction identity holds to collocation accuracy") {
  CollocationGrid grid(32);
  OperatorMatrix op = assemble_operator(SystemKind::Gauss, 1.0, 200, grid);
  SpectralData sd = leading_eigen(op);
  Eigen::VectorXd resid = op.A * sd.rho - sd.lambda * sd.rho;
  CHECK(resid.cwiseAbs().maxCoeff() < 1e-12);

  // against the closed-form fixed point of the untruncated operator
  EigenCloseness ec = eigen_closeness_probe(1.0, kInfiniteTruncation, grid);
  CHECK(ec.dlambda < 1e-12);
  CHECK(ec.drho_sup < 1e-12);
}

TEST_CASE("power iteration reports nonconvergence") {
  CollocationGrid grid(32);
  OperatorMatrix op = assemble_operator(SystemKind::Gauss, 1.0, 50, grid);
  CHECK_THROWS_AS(leading_eigen(op, 1e-13, 1), NonConvergence);
}

TEST_CASE("tail perturbation probe") {
  CollocationGrid grid(48);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(grid.size());

  CHECK(perturbation_probe(1.0, 100, ones, grid) ==
        doctest::Approx(9.950167e-3).epsilon(1e-4));

  double prev = 1e9;
  for (long n : {50L, 100L, 200L, 400L}) {
    double p = perturbation_probe(1.0, n, ones, grid);
    CHECK(p < prev);
    CHECK(p <= 8.0 * std::pow(static_cast<double>(n), -1.0));
    prev = p;
  }
}

TEST_CASE("spectral gap halves as the truncation doubles") {
  CollocationGrid grid(32);
  double gap_prev = 0.0;
  for (long n : {50L, 100L, 200L, 400L}) {
    SpectralData sd = leading_eigen(assemble_operator(SystemKind::Gauss, 1.0, n, grid));
    double gap = std::fabs(sd.lambda - 1.0);
    if (gap_prev > 0.0) {
      double ratio = gap_prev / gap;
      CHECK(ratio > 1.7);
      CHECK(ratio < 2.3);
    }
    gap_prev = gap;
  }
}

TEST_CASE("zeta tail evaluation") {
  // forward recurrence zeta(s, a) - zeta(s, a+1) = a^{-s}
  for (double s : {1.55, 2.0, 3.1}) {
    for (double a : {500.0, 700.0, 1234.5}) {
      double diff = hurwitz_zeta(s, a) - hurwitz_zeta(s, a + 1.0);
      CHECK(diff == doctest::Approx(std::pow(a, -s)).epsilon(1e-12));
    }
  }
  // monotone decreasing in the offset
  CHECK(hurwitz_zeta(2.0, 600.0) > hurwitz_zeta(2.0, 601.0));
  // bracketed by the integral bounds int_a^inf and int_{a-1}^inf
  double z = hurwitz_zeta(2.0, 800.0);
  CHECK(z > 1.0 / 800.0);
  CHECK(z < 1.0 / 799.0);
  // the series needs a large offset; small ones are rejected
  CHECK_THROWS_AS(hurwitz_zeta(2.0, 10.0), std::domain_error);
}

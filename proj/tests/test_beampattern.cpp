#include <random>

#include "doctest.h"

#include "pattern_oracle.hpp"
#include "secbeam/beampattern.hpp"

using namespace secbeam;
using testing::bloch_brute_force;

TEST_CASE("rect pattern counts mainlobe angles") {
  const auto grid = AngularGrid::default_grid();
  const auto p = rect_pattern(grid, 0.0, deg2rad(10.0));
  CHECK(p.gains.sum() == doctest::Approx(21.0));
  CHECK(rect_pattern(grid, 0.0, deg2rad(180.0)).gains.sum() == doctest::Approx(181.0));
  CHECK(rect_pattern(grid, deg2rad(90.0), deg2rad(5.0)).gains.sum() == doctest::Approx(6.0));
  CHECK_THROWS_AS(rect_pattern(grid, 0.0, 0.0), std::invalid_argument);
  const auto coarse = AngularGrid::uniform(deg2rad(-90), deg2rad(90), deg2rad(30));
  CHECK_THROWS_AS(rect_pattern(coarse, deg2rad(15.0), deg2rad(2.0)), std::invalid_argument);
}

TEST_CASE("beampattern profile of simple covariances") {
  const UlaGeometry geom{6, 0.5};
  const auto grid = AngularGrid::default_grid();
  const auto flat = beampattern_profile(HermitianMatrix::identity(6), grid, geom);
  CHECK((flat.array() - 6.0).abs().maxCoeff() < 1e-12);
  const double th = deg2rad(20.0);
  const AngularGrid one{{th}, 0.0};
  CHECK(beampattern_profile(HermitianMatrix::outer(steering_vector(geom, th)), one, geom)(0) ==
        doctest::Approx(36.0));
  CHECK(beampattern_profile(HermitianMatrix::zero(6), grid, geom).norm() == 0.0);
}

TEST_CASE("flat template is matched by the scaled identity") {
  const UlaGeometry geom{8, 0.5};
  const auto grid = AngularGrid::default_grid();
  IdealPattern pat{grid, RealVector::Ones(grid.size())};
  const auto d = solve_desired_covariance(pat, geom, 2.0);
  CHECK(d.residual <= 1e-8);
  CHECK((d.r.matrix() - ComplexMatrix::Identity(8, 8) * 0.25).norm() <= 1e-6);
  CHECK(d.r.trace() == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(d.relative_gap <= 1e-7);
}

TEST_CASE("single grid angle is fitted exactly") {
  const UlaGeometry geom{4, 0.5};
  IdealPattern pat{AngularGrid{{deg2rad(12.0)}, 0.0}, RealVector::Constant(1, 3.0)};
  const auto d = solve_desired_covariance(pat, geom, 1.0);
  CHECK(d.residual <= 1e-8);
}

TEST_CASE("two-antenna fit matches the Bloch-sphere brute force") {
  const UlaGeometry geom{2, 0.5};
  AngularGrid grid{{deg2rad(-30.0), 0.0, deg2rad(30.0)}, deg2rad(30.0)};
  RealVector gains(3);
  gains << 0.0, 1.0, 0.0;
  IdealPattern pat{grid, gains};
  const auto d = solve_desired_covariance(pat, geom, 1.0);
  const double oracle = bloch_brute_force(pat, geom, 1.0, 0.01);
  CHECK(std::abs(d.residual - oracle) <= 0.01 * oracle);
  CHECK(d.residual <= oracle + 1e-9);
}

TEST_CASE("fit beats random feasible candidates") {
  const UlaGeometry geom{6, 0.5};
  const auto grid = AngularGrid::uniform(deg2rad(-90), deg2rad(90), deg2rad(2));
  const auto pat = rect_pattern(grid, deg2rad(-20), deg2rad(15));
  const auto d = solve_desired_covariance(pat, geom, 1.0);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(0.0, 10.0);
  for (int trial = 0; trial < 50; ++trial) {
    ComplexMatrix g(6, 3);
    for (Index i = 0; i < g.size(); ++i) g(i) = Complex(normal(rng), normal(rng));
    HermitianMatrix r(g * g.adjoint());
    r = r * (1.0 / r.trace());
    CHECK(d.residual <= pattern_mismatch(pat, geom, r, unif(rng)) + 1e-9);
  }
}

TEST_CASE("template scale is absorbed by eta") {
  const UlaGeometry geom{5, 0.5};
  const auto grid = AngularGrid::uniform(deg2rad(-90), deg2rad(90), deg2rad(3));
  auto pat = rect_pattern(grid, deg2rad(10), deg2rad(12));
  const auto base = solve_desired_covariance(pat, geom, 1.0);
  pat.gains *= 7.0;
  const auto scaled = solve_desired_covariance(pat, geom, 1.0);
  CHECK((scaled.r.matrix() - base.r.matrix()).norm() <= 1e-6);
  CHECK(scaled.eta * 7.0 == doctest::Approx(base.eta).epsilon(1e-6));
  CHECK(min_eigenvalue(base.r) >= -1e-8);
}

#include <sstream>

#include "doctest.h"

#include "conic_fixtures.hpp"
#include "secbeam/conic.hpp"

using namespace secbeam;
using namespace secbeam::conic;

TEST_CASE("minimum eigenvalue as a semidefinite program") {
  // min tr(C X) s.t. tr X = 1, X PSD  ->  lambda_min(C)
  ConicProblem p;
  p.add_block(2);
  RealMatrix c(2, 2);
  c << 1, 0, 0, 2;
  p.objective.add_block(0, c);
  p.add_equality(LinearFunctional().add_block(0, RealMatrix::Identity(2, 2)), 1.0, "trace");
  const auto sol = solve(p);
  REQUIRE(sol.optimal());
  CHECK(sol.primal_objective == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(sol.blocks[0](0, 0) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("projection onto a second-order cone") {
  // min t s.t. ||(x1 - 3, x2 - 4)|| <= t  ->  0 at x = (3, 4)
  ConicProblem p;
  const Index t = p.add_scalar(), x1 = p.add_scalar(), x2 = p.add_scalar();
  p.objective = LinearFunctional::scalar(t);
  p.add_soc({LinearFunctional::scalar(x1).add_constant(-3.0), LinearFunctional::scalar(x2).add_constant(-4.0)},
            LinearFunctional::scalar(t), "dist");
  p.add_inequality(LinearFunctional::scalar(x1), Sense::LessEqual, 1.0, "box");
  const auto sol = solve(p);
  REQUIRE(sol.optimal());
  // closest point with x1 <= 1 is (1, 4), distance 2
  CHECK(sol.primal_objective == doctest::Approx(2.0).epsilon(1e-7));
  CHECK(sol.scalars(x2) == doctest::Approx(4.0).epsilon(1e-6));
}

TEST_CASE("linear program agrees with vertex enumeration") {
  // max x + 2y + 3z s.t. x + y + z <= 4, x + 3z <= 6, y <= 3, x,y,z >= 0
  ConicProblem p;
  for (int i = 0; i < 3; ++i) p.add_scalar();
  p.objective = LinearFunctional().add_scalar(0, -1).add_scalar(1, -2).add_scalar(2, -3);
  p.add_inequality(LinearFunctional().add_scalar(0, 1).add_scalar(1, 1).add_scalar(2, 1), Sense::LessEqual, 4);
  p.add_inequality(LinearFunctional().add_scalar(0, 1).add_scalar(2, 3), Sense::LessEqual, 6);
  p.add_inequality(LinearFunctional::scalar(1), Sense::LessEqual, 3);
  for (int i = 0; i < 3; ++i) p.add_inequality(LinearFunctional::scalar(i), Sense::GreaterEqual, 0);

  // Enumerate every intersection of three active constraints.
  const StandardForm sf = compile(p);
  double best = 1e300;
  const Index m = sf.g.rows();
  for (Index i = 0; i < m; ++i)
    for (Index j = i + 1; j < m; ++j)
      for (Index k = j + 1; k < m; ++k) {
        RealMatrix g(3, 3);
        RealVector h(3);
        g << sf.g.row(i), sf.g.row(j), sf.g.row(k);
        h << sf.h(i), sf.h(j), sf.h(k);
        if (std::abs(g.determinant()) < 1e-12) continue;
        const RealVector x = g.lu().solve(h);
        if (((sf.h - sf.g * x).array() < -1e-9).any()) continue;
        best = std::min(best, sf.c.dot(x));
      }
  const auto sol = solve(p);
  REQUIRE(sol.optimal());
  CHECK(sol.primal_objective == doctest::Approx(best).epsilon(1e-7));
}

TEST_CASE("constructed optima over mixed cones") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto inst = testing::make_known_optimum(seed, {3, 2}, 3, 2, 3, 6);
    const auto sol = solve(inst.problem);
    INFO("seed " << seed);
    REQUIRE(sol.optimal());
    CHECK(std::abs(sol.primal_objective - inst.optimal_value) <= 1e-6 * std::max(1.0, std::abs(inst.optimal_value)));
    CHECK(check_certificate(inst.problem, sol).pass);
  }
}

TEST_CASE("infeasible problems are reported") {
  // X PSD with tr X = -1
  ConicProblem p;
  p.add_block(2);
  p.add_equality(LinearFunctional().add_block(0, RealMatrix::Identity(2, 2)), -1.0, "trace");
  const auto sol = solve(p);
  CHECK(sol.status == Status::Infeasible);

  ConicProblem q;
  const Index x = q.add_scalar();
  q.add_inequality(LinearFunctional::scalar(x), Sense::GreaterEqual, 2.0);
  q.add_inequality(LinearFunctional::scalar(x), Sense::LessEqual, 1.0);
  CHECK(solve(q).status == Status::Infeasible);
}

TEST_CASE("unbounded problems are reported") {
  ConicProblem p;
  const Index x = p.add_scalar();
  p.objective = LinearFunctional::scalar(x, -1.0);
  p.add_inequality(LinearFunctional::scalar(x), Sense::GreaterEqual, 0.0);
  CHECK(solve(p).status == Status::Unbounded);
}

TEST_CASE("solves are deterministic") {
  const auto inst = testing::make_known_optimum(7, {4}, 2, 1, 4, 5);
  const auto a = solve(inst.problem);
  const auto b = solve(inst.problem);
  REQUIRE(a.optimal());
  CHECK(a.iterations == b.iterations);
  CHECK(a.primal_objective == b.primal_objective);
  CHECK((a.blocks[0] - b.blocks[0]).norm() == 0.0);
}

TEST_CASE("certificate flags a perturbed solution") {
  ConicProblem p;
  p.add_block(2);
  RealMatrix c(2, 2);
  c << 1, 0, 0, 2;
  p.objective.add_block(0, c);
  p.add_equality(LinearFunctional().add_block(0, RealMatrix::Identity(2, 2)), 1.0, "trace");
  auto sol = solve(p);
  REQUIRE(check_certificate(p, sol).pass);
  sol.blocks[0](0, 0) += 1e-3;
  const auto rep = check_certificate(p, sol);
  CHECK_FALSE(rep.pass);
  CHECK(rep.entries.front().kind == CertificateEntry::Kind::Equality);
  CHECK_FALSE(rep.entries.front().ok);
}

TEST_CASE("standard form dump round-trips") {
  const auto inst = testing::make_known_optimum(3, {2}, 2, 1, 3, 3);
  const StandardForm sf = compile(inst.problem);
  std::stringstream ss;
  write_standard_form(ss, sf);
  const StandardForm back = read_standard_form(ss);
  CHECK(back.c == sf.c);
  CHECK(back.a == sf.a);
  CHECK(back.g == sf.g);
  CHECK(back.h == sf.h);
  CHECK(back.soc == sf.soc);
  CHECK(back.psd == sf.psd);
}

TEST_CASE("svec preserves the trace inner product") {
  RealMatrix a(3, 3), b(3, 3);
  a << 1, 2, 3, 2, 5, 6, 3, 6, 9;
  b << 2, -1, 0, -1, 4, 1, 0, 1, 3;
  CHECK(svec(a).dot(svec(b)) == doctest::Approx((a * b).trace()));
  CHECK((smat(svec(a), 3) - a).norm() == doctest::Approx(0.0));
}

#include <gtest/gtest.h>

#include <cmath>

#include "opde/manufactured.hpp"
#include "opde/principal_solver.hpp"
#include "opde/random.hpp"
#include "opde/verifier.hpp"

using namespace opde;

namespace {

OperatorModel scalar_op(double lambda) {
  Vector v(1);
  v << lambda;
  return OperatorModel::from_spectrum(v);
}

double relative_w4_error(const WeightedGridFunction& u, const WeightedGridFunction& exact, const OperatorModel& a) {
  return sobolev_norm(u - exact, a) / sobolev_norm(exact, a);
}

}  // namespace

TEST(FulllineSolve, ZeroForcing) {
  const Grid g(20.0, 512, 0.3);
  const auto u0 = fullline_solve(WeightedGridFunction::zero(g, 2), OperatorModel::identity(2));
  EXPECT_EQ(u0.samples().cwiseAbs().maxCoeff(), 0.0);
}

TEST(FulllineSolve, Linear) {
  Rng rng(41);
  const auto a = random_spd(3, 1.0, 3.0, rng);
  const Grid g(30.0, 1024, -0.5);
  const auto m = ManufacturedSolution::cubic(1.0, random_unit_vector(3, rng));
  const auto f = m.forcing(g, a, {});
  const auto u1 = fullline_solve(f, a);
  const auto u2 = fullline_solve(2.0 * f, a);
  EXPECT_LE((u2.samples() - 2.0 * u1.samples()).cwiseAbs().maxCoeff(), 1e-12 * u1.samples().cwiseAbs().maxCoeff());
}

TEST(FulllineSolve, SatisfiesEquation) {
  Rng rng(42);
  const auto a = random_spd(3, 1.0, 3.0, rng);
  for (double kappa : {0.0, 0.5, -0.5}) {
    const auto m = ManufacturedSolution::cubic(1.0, random_unit_vector(3, rng));
    const Grid g(m.suggested_length(a.lambda0(), kappa), 2048, kappa);
    const auto f = m.forcing(g, a, {});
    const auto u0 = fullline_solve(f, a);
    EXPECT_LE(l2k_norm(apply_P0(u0, a) - f) / l2k_norm(f), 1e-4) << kappa;
  }
}

TEST(FulllineSolve, Errors) {
  const Grid g(10.0, 256, 2.0);
  try {
    fullline_solve(WeightedGridFunction::zero(g, 1), OperatorModel::identity(1));
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InadmissibleWeight);
  }
  const Grid tiny(1.0, 8, 0.0);
  try {
    fullline_solve(WeightedGridFunction::zero(tiny, 1), OperatorModel::identity(1));
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::GridTooSmall);
  }
  EXPECT_THROW(fullline_solve(WeightedGridFunction::zero(Grid(10.0, 64, 0.0), 2), OperatorModel::identity(1)), Error);
}

TEST(BoundaryPhis, Examples) {
  const auto a = OperatorModel::identity(2);
  const Vector z = Vector::Zero(2);
  const Vector e1 = Vector::Unit(2, 0);

  const auto zero = boundary_phis({z, z, z}, a);
  EXPECT_EQ(zero.phi0, z);
  EXPECT_EQ(zero.phi1, z);
  EXPECT_EQ(zero.phi2, z);

  const auto first = boundary_phis({e1, z, z}, a);
  EXPECT_LT((first.phi0 + e1).norm(), 1e-15);
  EXPECT_LT((first.phi1 + e1).norm(), 1e-15);
  EXPECT_LT((first.phi2 + 0.5 * e1).norm(), 1e-15);

  const auto second = boundary_phis({z, e1, z}, a);
  EXPECT_LT(second.phi0.norm(), 1e-15);
  EXPECT_LT((second.phi1 + e1).norm(), 1e-15);
  EXPECT_LT((second.phi2 + e1).norm(), 1e-15);
}

TEST(BoundaryPhis, SolvesTraceSystem) {
  Rng rng(43);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = random_spd(4, 0.5, 6.0, rng);
    const std::array<Vector, 3> tr{random_unit_vector(4, rng), random_unit_vector(4, rng), random_unit_vector(4, rng)};
    const auto phi = boundary_phis(tr, a);
    for (int j = 0; j < 3; ++j) {
      EXPECT_LT((phi.derivative_at_origin(a, j) + tr[static_cast<std::size_t>(j)]).norm(), 1e-12);
    }
  }
  EXPECT_THROW(boundary_phis({Vector::Zero(3), Vector::Zero(4), Vector::Zero(4)}, OperatorModel::identity(4)), Error);
}

TEST(AssembleSolution, Examples) {
  const Grid g(20.0, 1024, 0.0);
  const auto a = OperatorModel::identity(2);
  Rng rng(44);
  const auto u0 = WeightedGridFunction::separable(g, [](double t) { return t * std::exp(-t); }, random_unit_vector(2, rng));
  const BoundaryCorrection none{Vector::Zero(2), Vector::Zero(2), Vector::Zero(2)};
  EXPECT_EQ(assemble_solution(u0, none, a).samples(), u0.samples());

  const BoundaryCorrection one{Vector::Unit(2, 0), Vector::Zero(2), Vector::Zero(2)};
  const auto u = assemble_solution(WeightedGridFunction::zero(g, 2), one, a);
  for (Eigen::Index k = 0; k < g.size(); ++k) {
    EXPECT_NEAR(u.samples()(k, 0), std::exp(-g.node(k)), 1e-15);
    EXPECT_EQ(u.samples()(k, 1), 0.0);
  }

  const auto s = OperatorModel::identity(1);
  Vector z(1), o(1);
  z << 0.0;
  o << 1.0;
  const Grid g1(40.0, 2048, 0.0);
  const auto t2 = assemble_solution(WeightedGridFunction::zero(g1, 1), {z, z, o}, s);
  for (Eigen::Index k = 0; k < g1.size(); ++k) {
    const double t = g1.node(k);
    EXPECT_NEAR(t2.samples()(k, 0), t * t * std::exp(-t), 1e-14);
  }
  EXPECT_LT(apply_P0(t2, s).samples().cwiseAbs().maxCoeff(), 1e-4);
  EXPECT_THROW(assemble_solution(WeightedGridFunction::zero(g1, 2), {z, z, o}, s), Error);
}

TEST(AssembleSolution, HomogeneousKernel) {
  Rng rng(45);
  const auto a = random_spd(3, 1.0, 3.0, rng);
  const Grid g(40.0, 2048, 0.0);
  const Vector z = Vector::Zero(3);
  const Vector phi = random_unit_vector(3, rng);
  const std::array<BoundaryCorrection, 3> terms{
      BoundaryCorrection{phi, z, z}, BoundaryCorrection{z, phi, z}, BoundaryCorrection{z, z, phi}};
  for (const auto& c : terms) {
    const auto u = correction_terms(g, c, a);
    const double scale = l2k_norm(u.mapped(a.power(4.0)));
    EXPECT_LT(l2k_norm(apply_P0(u, a)) / scale, 1e-4);
  }
}

TEST(ApplyP0, Examples) {
  const Grid g(30.0, 2048, 0.0);
  const auto a = OperatorModel::identity(1);
  EXPECT_EQ(apply_P0(WeightedGridFunction::zero(g, 1), a).samples().cwiseAbs().maxCoeff(), 0.0);

  const auto e1 = WeightedGridFunction::separable(g, [](double t) { return std::exp(-t); }, Vector::Ones(1));
  EXPECT_LT(apply_P0(e1, a).samples().cwiseAbs().maxCoeff(), 1e-5);

  const auto e2 = WeightedGridFunction::separable(g, [](double t) { return std::exp(-2.0 * t); }, Vector::Ones(1));
  const auto p = apply_P0(e2, a);
  for (Eigen::Index k = 0; k < g.size(); ++k) EXPECT_NEAR(p.samples()(k, 0), -3.0 * std::exp(-2.0 * g.node(k)), 1e-4);
}

TEST(ApplyP0, MatchesClosedFormOnCubic) {
  // P0 [t^3 e^{-t}] = 12 e^{-t} for A = 1.
  const Grid g(40.0, 2048, 0.0);
  const auto a = OperatorModel::identity(1);
  const auto u = ManufacturedSolution::cubic(1.0, Vector::Ones(1)).sample(g);
  const auto f = apply_P0(u, a);
  EXPECT_NEAR(f.samples()(0, 0), 12.0, 1e-5);
  // Trapezoid rule: O(h^2) against the closed form 72.
  EXPECT_NEAR(l2k_norm_squared(f), 72.0, 72.0 * 2e-4);
}

TEST(PrincipalSolve, ZeroForcing) {
  const Grid g(20.0, 512, 0.0);
  const auto r = principal_solve(WeightedGridFunction::zero(g, 2), OperatorModel::identity(2));
  EXPECT_EQ(r.solution.samples().cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(r.residual, 0.0);
}

TEST(PrincipalSolve, ManufacturedIdentity) {
  for (double kappa : {0.0, 1.0}) {
    const auto a = OperatorModel::identity(2);
    const auto m = ManufacturedSolution::cubic(1.0, Vector::Unit(2, 1));
    const Grid g(m.suggested_length(1.0, kappa), 2048, kappa);
    const auto r = principal_solve(m.forcing(g, a, {}), a);
    EXPECT_LT(relative_w4_error(r.solution, m.sample(g), a), 1e-3) << kappa;
    EXPECT_LT(r.residual, 1e-3);
    for (double tr : r.traces) EXPECT_LT(tr, 1e-5 * std::max(1.0, r.forcing_norm));
    EXPECT_GT(r.bound_constant, 0.0);
    EXPECT_TRUE(std::isfinite(r.bound_constant));
  }
}

TEST(PrincipalSolve, ManufacturedFromDiscreteForcing) {
  const auto a = OperatorModel::identity(1);
  const auto m = ManufacturedSolution::cubic(1.0, Vector::Ones(1));
  const Grid g(40.0, 2048, 0.0);
  const auto u_star = m.sample(g);
  const auto r = principal_solve(apply_P0(u_star, a), a);
  EXPECT_LT(relative_w4_error(r.solution, u_star, a), 1e-3);
}

TEST(PrincipalSolve, ZeroExtensionIsConsistentButCoarse) {
  const auto a = OperatorModel::identity(1);
  const auto m = ManufacturedSolution::cubic(1.0, Vector::Ones(1));
  const Grid g(40.0, 2048, 0.0);
  const auto f = m.forcing(g, a, {});
  const auto u = invert_P0(f, a, Extension::zero);
  const double err = relative_w4_error(u, m.sample(g), a);
  EXPECT_LT(err, 0.1);
  EXPECT_GT(err, relative_w4_error(invert_P0(f, a), m.sample(g), a));
}

TEST(PrincipalSolve, TraceAnnihilationRandomForcing) {
  Rng rng(46);
  const auto a = random_spd(4, 1.0, 3.0, rng);
  const Grid g(30.0, 2048, 0.4);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    const double c1 = normal(rng), c2 = normal(rng);
    const Vector x = random_unit_vector(4, rng);
    const auto f = WeightedGridFunction::separable(
        g, [&](double t) { return (c1 + c2 * std::sin(t)) * std::exp(-0.8 * t); }, x);
    const auto r = principal_solve(f, a);
    for (double tr : r.traces) EXPECT_LT(tr, 1e-5 * std::max(1.0, r.forcing_norm));
  }
}

TEST(PrincipalSolve, Linearity) {
  Rng rng(47);
  const auto a = random_spd(3, 1.0, 3.0, rng);
  const Grid g(30.0, 1024, 0.2);
  const auto f1 = ManufacturedSolution::cubic(1.2, random_unit_vector(3, rng)).forcing(g, a, {});
  const auto f2 = ManufacturedSolution({1.0, 0.0, 1.0}, 0.9, random_unit_vector(3, rng)).forcing(g, a, {});
  const auto u1 = principal_solve(f1, a).solution;
  const auto u2 = principal_solve(f2, a).solution;
  const auto u = principal_solve(2.0 * f1 + (-0.5) * f2, a).solution;
  const Matrix expected = 2.0 * u1.samples() - 0.5 * u2.samples();
  EXPECT_LE((u.samples() - expected).norm(), 1e-8 * expected.norm());
}

TEST(PrincipalSolve, IsomorphismRatioBracket) {
  const auto r = check_norm_equivalence(40, OperatorModel::identity(2), 0.0, 48);
  EXPECT_GT(r.min_ratio, 0.0);
  EXPECT_LT(r.max_ratio / r.min_ratio, 1e4);
}

TEST(PrincipalSolve, Errors) {
  const auto a = OperatorModel::identity(1);
  try {
    principal_solve(WeightedGridFunction::zero(Grid(10.0, 64, -2.0), 1), a);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InadmissibleWeight);
  }
  // Eleven points over a long interval cannot resolve the forcing.
  const Grid coarse(40.0, 12, 0.0);
  const auto f = ManufacturedSolution::cubic(1.0, Vector::Ones(1)).forcing(coarse, a, {});
  try {
    principal_solve(f, a);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ResidualTooLarge);
  }
}

TEST(Manufactured, DerivativesMatchGrid) {
  const Grid g(30.0, 4096, 0.0);
  const ManufacturedSolution m({0.5, -1.0, 0.0, 2.0}, 1.3, Vector::Ones(1));
  const auto u = m.sample(g);
  for (int order = 1; order <= 4; ++order) {
    const auto d = derivative(u, order);
    EXPECT_LT((d.samples() - m.sample(g, order).samples()).cwiseAbs().maxCoeff(), 1e-4) << order;
  }
  EXPECT_NEAR(m.profile(0.0, 1), -1.0 - 1.3 * 0.5, 1e-15);
  EXPECT_THROW(ManufacturedSolution({1.0}, 0.0, Vector::Ones(1)), Error);
}

TEST(Manufactured, ScalarOperator) {
  // P0(mu; lambda) at mu = -a for e^{-a t}.
  const auto a = scalar_op(2.0);
  const Grid g(10.0, 64, 0.0);
  const auto f = ManufacturedSolution({1.0}, 1.0, Vector::Ones(1)).forcing(g, a, {});
  const double expected = symbol(Complex(-1.0, 0.0), 2.0).real();
  for (Eigen::Index k = 0; k < g.size(); ++k) EXPECT_NEAR(f.samples()(k, 0), expected * std::exp(-g.node(k)), 1e-12);
}

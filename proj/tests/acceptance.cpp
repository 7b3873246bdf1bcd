// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "opde/certifier.hpp"
#include "opde/manufactured.hpp"
#include "opde/pencil.hpp"
#include "opde/perturbed_solver.hpp"
#include "opde/principal_solver.hpp"
#include "opde/random.hpp"
#include "opde/verifier.hpp"

using namespace opde;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// Shared sweep for criteria 1-3: 50 random SPD operators, n <= 8.
struct SweepCase {
  OperatorModel a;
  double kappa;
};

std::vector<SweepCase> resolvent_sweep() {
  Rng rng(1001);
  std::uniform_int_distribution<int> dim(1, 8);
  std::uniform_real_distribution<double> l0(0.25, 4.0);
  std::uniform_real_distribution<double> spread(1.0, 20.0);
  std::vector<SweepCase> out;
  for (int i = 0; i < 50; ++i) {
    const double lambda0 = l0(rng);
    const auto a = random_spd(dim(rng), lambda0, spread(rng), rng);
    for (double s : {0.0, 0.5, -0.5, 1.5, -1.5}) out.push_back({a, s * lambda0});
  }
  return out;
}

Outcome criterion1() {
  double worst = 0.0;
  int violations = 0;
  for (const auto& c : resolvent_sweep()) {
    const double b = bound_xi4(c.a, c.kappa, composite_xi_grid(c.a.lambda0()));
    worst = std::max(worst, b);
    if (b > 1.0 + 1e-12) ++violations;
  }
  return {violations == 0, "max bound_xi4 = " + fmt(worst) + ", violations " + std::to_string(violations) + "/250"};
}

Outcome criterion2() {
  int violations = 0;
  int positive_kappa = 0;
  double worst_excess = 0.0;
  for (const auto& c : resolvent_sweep()) {
    const auto r = bound_A4(c.a, c.kappa, composite_xi_grid(c.a.lambda0()));
    if (r.measured > r.closed_form + 1e-12) {
      ++violations;
      if (c.kappa > 0.0) ++positive_kappa;
      worst_excess = std::max(worst_excess, r.measured - r.closed_form);
    }
  }
  const auto id = OperatorModel::identity(3);
  const auto at_zero = bound_A4(id, 0.0, composite_xi_grid(1.0));
  const bool identity_ok = std::abs(at_zero.measured - 1.0) <= 1e-10;
  std::string detail = "violations " + std::to_string(violations) + "/250 (" + std::to_string(positive_kappa) +
                       " with kappa > 0), worst excess " + fmt(worst_excess) + "; identity sup " +
                       fmt(at_zero.measured);
  return {violations == 0 && identity_ok, detail};
}

Outcome criterion3() {
  long violations = 0;
  long checked = 0;
  for (const auto& c : resolvent_sweep()) {
    const double lb = symbol_lower_bound(c.a.lambda0(), c.kappa);
    for (double xi : composite_xi_grid(c.a.lambda0())) {
      for (double lambda : c.a.eigenvalues()) {
        ++checked;
        if (std::abs(symbol(Complex(0.5 * c.kappa, xi), lambda)) < lb) ++violations;
      }
    }
  }
  return {violations == 0, std::to_string(violations) + " violations in " + std::to_string(checked) + " evaluations"};
}

Outcome criterion4() {
  double err0 = 0.0;
  for (double l0 : {0.1, 1.0, 3.7, 250.0}) {
    const auto c = constants(l0, 0.0);
    const std::array<double, 4> expected{0.5, 1.0 / (2.0 * std::sqrt(2.0)), 0.5, 1.0};
    for (std::size_t j = 0; j < 4; ++j) err0 = std::max(err0, std::abs(c[j] - expected[j]));
  }
  const auto c = constants(1.0, 1.0);
  const std::array<double, 4> expected{1.0 / std::sqrt(3.0), 1.0 / std::sqrt(6.0), 1.0 / std::sqrt(3.0), 4.0 / 3.0};
  double err1 = 0.0;
  for (std::size_t j = 0; j < 4; ++j) err1 = std::max(err1, std::abs(c[j] - expected[j]));
  return {err0 == 0.0 && err1 <= 1e-15, "kappa=0 max error " + fmt(err0) + ", (1,1) max error " + fmt(err1)};
}

Outcome criterion5() {
  Rng rng(1005);
  bool pass = true;
  double worst_err = 0.0;
  double worst_residual = 0.0;
  double worst_trace = 0.0;
  double worst_gain = std::numeric_limits<double>::infinity();
  for (Eigen::Index n : {1, 4}) {
    const auto a = n == 1 ? OperatorModel::identity(1) : random_spd(n, 1.0, 3.0, rng);
    const double l0 = a.lambda0();
    const auto m = ManufacturedSolution::cubic(1.0, random_unit_vector(n, rng));
    for (double kappa : {0.0, 0.5 * l0, -0.5 * l0}) {
      const double length = m.suggested_length(l0, kappa);
      auto rel_error = [&](Eigen::Index points, SolveReport* keep) {
        const Grid g(length, points, kappa);
        PrincipalOptions opts;
        opts.residual_threshold = std::numeric_limits<double>::infinity();
        auto r = principal_solve(m.forcing(g, a, {}), a, opts);
        const auto exact = m.sample(g);
        const double e = sobolev_norm(r.solution - exact, a) / sobolev_norm(exact, a);
        if (keep) *keep = std::move(r);
        return e;
      };
      SolveReport r{.solution = WeightedGridFunction::zero(Grid(1.0, 16, 0.0), 1)};
      const double err = rel_error(2048, &r);
      worst_err = std::max(worst_err, err);
      worst_residual = std::max(worst_residual, r.residual);
      for (double tr : r.traces) worst_trace = std::max(worst_trace, tr);
      // Convergence order is read where truncation, not roundoff, dominates.
      const double gain = rel_error(256, nullptr) / rel_error(512, nullptr);
      worst_gain = std::min(worst_gain, gain);
      pass = pass && err <= 1e-3 && r.residual <= 1e-3 && gain >= 4.0;
      for (double tr : r.traces) pass = pass && tr <= 1e-5;
    }
  }
  return {pass, "max W4 error " + fmt(worst_err) + ", max residual " + fmt(worst_residual) + ", max trace " +
                    fmt(worst_trace) + ", min error ratio N=256/512 " + fmt(worst_gain)};
}

Outcome criterion6() {
  Rng rng(1006);
  std::uniform_int_distribution<int> dim(1, 6);
  std::uniform_real_distribution<double> l0(0.5, 2.0);
  std::uniform_real_distribution<double> spread(1.0, 4.0);
  double worst_trace = 0.0;
  double worst_grid_trace = 0.0;
  double worst_residual = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const double lambda0 = l0(rng);
    const Eigen::Index n = dim(rng);
    const auto a = random_spd(n, lambda0, spread(rng), rng);
    const std::array<Vector, 3> traces{random_unit_vector(n, rng), random_unit_vector(n, rng),
                                       random_unit_vector(n, rng)};
    const auto phi = boundary_phis(traces, a);
    const Grid g(40.0 / lambda0, 4096, 0.0);
    const auto w = correction_terms(g, phi, a);
    for (int j = 0; j < 3; ++j) {
      const Matrix weight = a.power(3.5 - j);
      const Vector& tr = traces[static_cast<std::size_t>(j)];
      // Closed-form traces of the semigroup terms, then the same traces read off the grid.
      worst_trace = std::max(worst_trace, (weight * (phi.derivative_at_origin(a, j) + tr)).norm());
      worst_grid_trace = std::max(worst_grid_trace, (weight * (derivative_at_origin(w, j) + tr)).norm());
    }
    const double scale = l2k_norm(w.mapped(a.power(4.0)));
    worst_residual = std::max(worst_residual, l2k_norm(apply_P0(w, a)) / scale);
  }
  return {worst_trace < 1e-8 && worst_grid_trace < 1e-6 && worst_residual < 1e-4,
          "max trace mismatch " + fmt(worst_trace) + " (grid stencils " + fmt(worst_grid_trace) +
              "), max P0 residual " + fmt(worst_residual)};
}

Outcome criterion7() {
  Rng rng(1007);
  std::uniform_int_distribution<int> dim(1, 6);
  std::uniform_real_distribution<double> l0(0.5, 2.0);
  std::uniform_real_distribution<double> spread(1.0, 4.0);
  std::uniform_real_distribution<double> weight(-1.9, 1.9);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const double lambda0 = l0(rng);
    const Eigen::Index n = dim(rng);
    const auto a = random_spd(n, lambda0, spread(rng), rng);
    const double kappa = weight(rng) * lambda0;
    DomainFamily family(lambda0, kappa, n, rng(), 1);
    const auto s = family.draw();
    worst = std::max(worst, check_energy_identity(s.sample(s.grid(kappa, 4096)), a).gap);
  }
  return {worst <= 1e-3, "max relative gap " + fmt(worst) + " over 200 trials"};
}

Outcome criterion8() {
  Rng rng(1008);
  std::uniform_int_distribution<int> dim(1, 6);
  std::uniform_real_distribution<double> l0(0.5, 2.0);
  std::uniform_real_distribution<double> spread(1.0, 4.0);
  std::uniform_real_distribution<double> weight(-1.9, 1.9);
  int violations = 0;
  int negative = 0;
  int negative_trials = 0;
  double worst = 0.0;
  double worst_nonneg = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const double lambda0 = l0(rng);
    const Eigen::Index n = dim(rng);
    const auto a = random_spd(n, lambda0, spread(rng), rng);
    const double kappa = weight(rng) * lambda0;
    DomainFamily family(lambda0, kappa, n, rng());
    const auto s = family.draw();
    const auto r = check_intermediate_estimates(s.sample(s.grid(kappa, 4096)), a);
    worst = std::max(worst, r.worst_ratio());
    if (kappa < 0.0) ++negative_trials;
    else worst_nonneg = std::max(worst_nonneg, r.worst_ratio());
    if (!r.holds()) {
      ++violations;
      if (kappa < 0.0) ++negative;
    }
  }
  return {violations == 0, "violations " + std::to_string(violations) + "/500 (" + std::to_string(negative) + " of " +
                               std::to_string(negative_trials) + " with kappa < 0), worst lhs/rhs " + fmt(worst) +
                               ", worst for kappa >= 0 " + fmt(worst_nonneg)};
}

Outcome criterion9() {
  Rng rng(1009);
  std::uniform_int_distribution<int> dim(1, 4);
  std::uniform_real_distribution<double> l0(0.5, 2.0);
  std::uniform_real_distribution<double> spread(1.0, 3.0);
  std::uniform_real_distribution<double> weight(-1.5, 1.5);
  std::uniform_real_distribution<double> target(0.1, 0.85);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int failures = 0;
  int negative_failures = 0;
  int thrown = 0;
  double worst_excess = -std::numeric_limits<double>::infinity();
  double worst_residual = 0.0;
  double worst_constant = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const double lambda0 = l0(rng);
    const Eigen::Index n = dim(rng);
    const auto a = random_spd(n, lambda0, spread(rng), rng);
    const double kappa = weight(rng) * lambda0;
    // B_j with unit norm scaled so that sum_j c_j ||B_j|| hits the target q.
    const auto c = constants(lambda0, kappa);
    std::array<Matrix, 4> b;
    std::array<double, 4> share{};
    double total = 0.0;
    for (std::size_t j = 0; j < 4; ++j) {
      b[j] = random_matrix(n, rng);
      b[j] /= op_norm(b[j]);
      share[j] = unit(rng);
      total += share[j];
    }
    const double q_target = target(rng);
    for (std::size_t j = 0; j < 4; ++j) b[j] *= q_target * share[j] / (total * c[j]);
    const auto p = make_normalized_perturbations(a, b);
    const auto cert = certify(a, p, kappa);

    const auto m = ManufacturedSolution::cubic(lambda0 + std::max(0.0, -0.5 * kappa), random_unit_vector(n, rng));
    const Grid g(m.suggested_length(lambda0, kappa), 4096, kappa);
    bool ok = cert.verdict == Verdict::RegularlySolvableCertified;
    try {
      const auto r = neumann_solve(m.forcing(g, a, p.coefficients), a, p);
      worst_excess = std::max(worst_excess, r.contraction_ratio - cert.q);
      worst_residual = std::max(worst_residual, r.residual);
      worst_constant = std::max(worst_constant, r.bound_constant);
      ok = ok && r.contraction_ratio <= cert.q + 0.05 && r.residual <= 1e-3 && std::isfinite(r.bound_constant) &&
           r.sobolev_norm <= r.bound_constant * r.forcing_norm * (1.0 + 1e-12);
    } catch (const Error&) {
      ok = false;
      ++thrown;
    }
    if (!ok) {
      ++failures;
      if (kappa < 0.0) ++negative_failures;
    }
  }
  return {failures == 0, "failures " + std::to_string(failures) + "/50 (" + std::to_string(negative_failures) +
                             " with kappa < 0, " + std::to_string(thrown) + " thrown), max ratio - q " + fmt(worst_excess) + ", max residual " +
                             fmt(worst_residual) + ", max C " + fmt(worst_constant)};
}

Outcome criterion10() {
  auto kappas = kappa_range(-2.2, 2.2, 0.01);
  for (double k : {1.99, 1.995, 1.999999, 2.0, 2.0000001}) {
    kappas.push_back(k);
    kappas.push_back(-k);
  }
  const auto rows = critical_sweep(OperatorModel::identity(1), kappas);
  int bad = 0;
  double min_c4 = std::numeric_limits<double>::infinity();
  for (const auto& r : rows) {
    const bool inadmissible = std::abs(r.kappa) >= 2.0;
    if ((r.verdict == Verdict::InadmissibleWeight) != inadmissible) ++bad;
    if (std::abs(r.kappa) >= 1.99) {
      min_c4 = std::min(min_c4, r.c[3]);
      if (!(r.c[3] >= 100.0)) ++bad;
    }
  }
  return {bad == 0, std::to_string(rows.size()) + " weights, mismatches " + std::to_string(bad) +
                        ", min c4 for |kappa| >= 1.99 " + fmt(min_c4)};
}

}  // namespace

int main() {
  const std::array<std::function<Outcome()>, 10> criteria{criterion1, criterion2, criterion3, criterion4, criterion5,
                                                          criterion6, criterion7, criterion8, criterion9, criterion10};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("criterion %zu: %s - %s\n", i + 1, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}

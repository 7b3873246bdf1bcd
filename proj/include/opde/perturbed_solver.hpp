#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "opde/certifier.hpp"
#include "opde/error.hpp"
#include "opde/grid.hpp"
#include "opde/operator_model.hpp"
#include "opde/principal_solver.hpp"

namespace opde {

/// P1 u = sum_j A_j d^{4-j}u/dt^{4-j}.
inline WeightedGridFunction apply_P1(const WeightedGridFunction& u, const PerturbationSet& p) {
  if (u.size() < kMinDerivativePoints) throw Error(ErrorKind::GridTooSmall, "apply_P1 needs N >= 9");
  if (p.A(4).rows() != u.dim()) throw Error(ErrorKind::DimensionMismatch, "perturbation dimension differs from u");
  WeightedGridFunction out = u.mapped(p.A(4));
  for (int j = 1; j <= 3; ++j) {
    if (p.beta[static_cast<std::size_t>(j - 1)] == 0.0 && p.A(j).isZero()) continue;
    out += derivative(u, 4 - j).mapped(p.A(j));
  }
  return out;
}

struct NeumannOptions {
  double tol = 1e-10;
  int max_iter = 200;
  Extension extension = Extension::smooth;
  /// Increments growing past this multiple of ||f|| count as divergence.
  double divergence_factor = 1e8;
};

/// u = P0^{-1} (E + P1 P0^{-1})^{-1} f by the Neumann series.
///
/// The series is accumulated through its increments dz_{m+1} = -P1 P0^{-1} dz_m
/// (dz_0 = f), which are exactly the differences z_{m+1} - z_m of the fixed-point
/// iteration z_{m+1} = f - P1 P0^{-1} z_m. Working with the increments keeps
/// their roundoff relative to their own size, so the geometric decay stays
/// visible down to the tolerance.
inline SolveReport neumann_solve(const WeightedGridFunction& f, const OperatorModel& a, const PerturbationSet& p,
                                 const NeumannOptions& options = {}) {
  const double kappa = f.grid().kappa();
  require_admissible(a.lambda0(), kappa);
  const SolvabilityCertificate cert = certify(a, p, kappa);

  const double f_norm = l2k_norm(f);

  WeightedGridFunction dz = f;
  WeightedGridFunction u = WeightedGridFunction::zero(f.grid(), f.dim());
  std::vector<double> increments{f_norm};
  double ratio = 0.0;
  bool converged = f_norm == 0.0 || p.is_zero();
  int iterations = 0;

  if (f_norm == 0.0) {
    iterations = 1;
  } else {
    while (iterations < options.max_iter) {
      const WeightedGridFunction step = invert_P0(dz, a, options.extension);
      u += step;
      ++iterations;
      if (p.is_zero()) break;
      dz = apply_P1(step, p);
      dz *= -1.0;
      const double norm = l2k_norm(dz);
      ratio = std::max(ratio, norm / increments.back());
      increments.push_back(norm);
      if (norm <= options.tol * f_norm) {
        converged = true;
        break;
      }
      if (!std::isfinite(norm) || norm > options.divergence_factor * f_norm) break;
    }
  }

  if (!converged) {
    throw Error(ErrorKind::NotContractive,
                "Neumann series did not reach tol after " + std::to_string(iterations) +
                    " steps (q = " + std::to_string(cert.q) + ", observed ratio " + std::to_string(ratio) + ")");
  }

  SolveReport report{.solution = u};
  report.forcing_norm = f_norm;
  report.iterations = iterations;
  report.contraction_ratio = ratio;
  report.increments = std::move(increments);
  report.certified = cert.verdict == Verdict::RegularlySolvableCertified;
  if (!report.certified) {
    report.warnings.push_back("UNCERTIFIED: q = " + std::to_string(cert.q) +
                              " >= 1; the sufficient condition does not hold, result is experimental");
  }
  const WeightedGridFunction residual = apply_P0(u, a) + apply_P1(u, p) - f;
  report.residual = relative_to(l2k_norm(residual), f_norm);
  report.traces = trace_norms(u, a);
  report.sobolev_norm = sobolev_norm(u, a);
  report.bound_constant = relative_to(report.sobolev_norm, f_norm);
  const double allowed = std::max(options.tol, 1e-3);
  if (report.residual > allowed) {
    throw Error(ErrorKind::ResidualTooLarge, "relative residual " + std::to_string(report.residual) + " exceeds " +
                                                 std::to_string(allowed));
  }
  return report;
}

}  // namespace opde

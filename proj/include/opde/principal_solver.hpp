#pragma once

#include <unsupported/Eigen/FFT>

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include "opde/error.hpp"
#include "opde/grid.hpp"
#include "opde/operator_model.hpp"
#include "opde/pencil.hpp"

namespace opde {

/// How the forcing is continued to t < 0 before the full-line Fourier solve.
///
/// `zero` is the textbook continuation by 0. Its jump at t = 0 limits the
/// discrete transform to roughly h^{1/2} accuracy in the W^4 norm. `smooth`
/// continues g = f e^{-kappa t/2} by a six-term Hestenes reflection, which is
/// C^5 across the origin and compactly supported in [-T/6, 0]. The restriction
/// to t >= 0 solves the same equation either way, and the boundary correction
/// removes the difference, so both yield the same solution of the half-line
/// problem up to discretization error.
enum class Extension { smooth, zero };

/// phi_0, phi_1, phi_2 of the semigroup ansatz
/// u = u0 + e^{-tA} phi_0 + t A e^{-tA} phi_1 + t^2 A^2 e^{-tA} phi_2.
struct BoundaryCorrection {
  Vector phi0;
  Vector phi1;
  Vector phi2;

  /// Exact d^order/dt^order of the three semigroup terms at t = 0.
  Vector derivative_at_origin(const OperatorModel& a, int order) const {
    switch (order) {
      case 0: return phi0;
      case 1: return a.matrix() * (phi1 - phi0);
      case 2: return a.power(2.0) * (phi0 - 2.0 * phi1 + 2.0 * phi2);
      default: throw Error(ErrorKind::GridTooSmall, "trace order must be 0..2");
    }
  }
};

struct SolveReport {
  WeightedGridFunction solution;
  double residual = 0.0;              // ||P u - f|| / ||f|| in L_{2,kappa}
  std::array<double, 3> traces{};     // ||A^{7/2-j} u^{(j)}(0)||
  double sobolev_norm = 0.0;          // ||u||_{W^4_{2,kappa}}
  double forcing_norm = 0.0;          // ||f||_{L_{2,kappa}}
  double bound_constant = 0.0;        // sobolev_norm / forcing_norm
  int iterations = 1;
  double contraction_ratio = 0.0;     // max ||dz_{m+1}|| / ||dz_m||
  bool certified = true;
  std::vector<double> increments{};   // ||dz_m|| per Neumann step
  std::vector<std::string> warnings{};
};

struct PrincipalOptions {
  Extension extension = Extension::smooth;
  double residual_threshold = 1e-3;
};

namespace detail {

inline constexpr int kHestenesTerms = 6;

/// a_j with sum_j a_j j^r = (-1)^r, r = 0..5: g(-t) = sum_j a_j g(j t)
/// matches g and its first five derivatives at 0.
inline constexpr std::array<double, kHestenesTerms> kHestenes{21.0, -70.0, 105.0, -84.0, 35.0, -6.0};

/// C-infinity step equal to 1 near 0 (all derivatives vanish there) and 0 for x >= 1.
inline double smooth_cutoff(double x) {
  if (x <= 0.0) return 1.0;
  if (x >= 1.0) return 0.0;
  const double a = std::exp(-1.0 / x);
  const double b = std::exp(-1.0 / (1.0 - x));
  return b / (a + b);
}

}  // namespace detail

/// Full-line particular solution u0 = v0 e^{kappa t/2}, where v0 solves
/// P0(d/dt + kappa/2; A) v0 = f e^{-kappa t/2} on the whole axis.
///
/// The transform runs over the periodic window [-N h, N h) of 2N samples;
/// each frequency is divided by P0(i xi + kappa/2; lambda_i) in the eigenbasis.
inline WeightedGridFunction fullline_solve(const WeightedGridFunction& f, const OperatorModel& a,
                                           Extension extension = Extension::smooth) {
  const Grid& grid = f.grid();
  const double kappa = grid.kappa();
  require_admissible(a.lambda0(), kappa);
  if (f.dim() != a.dim()) throw Error(ErrorKind::DimensionMismatch, "forcing dimension differs from dim(A)");
  const Eigen::Index n_pts = grid.size();
  if (n_pts < kMinDerivativePoints) throw Error(ErrorKind::GridTooSmall, "fullline_solve needs N >= 9");

  const Eigen::Index period = 2 * n_pts;
  const double h = grid.step();
  const Vector t = grid.nodes();
  const Vector damp = (-0.5 * kappa * t.array()).exp().matrix();
  const Vector grow = (0.5 * kappa * t.array()).exp().matrix();

  // Substituted forcing g = f e^{-kappa t/2}, in eigen-coordinates.
  const Matrix g = damp.asDiagonal() * f.samples() * a.eigenbasis();

  const double cutoff_length = grid.length() / detail::kHestenesTerms;
  std::vector<double> xi(static_cast<std::size_t>(period));
  for (Eigen::Index m = 0; m < period; ++m) {
    const Eigen::Index wrapped = m <= period / 2 ? m : m - period;
    xi[static_cast<std::size_t>(m)] = 2.0 * std::numbers::pi * static_cast<double>(wrapped) / (static_cast<double>(period) * h);
  }

  Eigen::FFT<double> fft;
  std::vector<Complex> buffer(static_cast<std::size_t>(period));
  std::vector<Complex> spectrum(static_cast<std::size_t>(period));
  Matrix v(n_pts, a.dim());
  for (Eigen::Index i = 0; i < a.dim(); ++i) {
    std::fill(buffer.begin(), buffer.end(), Complex(0.0, 0.0));
    for (Eigen::Index k = 0; k < n_pts; ++k) buffer[static_cast<std::size_t>(k)] = g(k, i);
    if (extension == Extension::zero) {
      buffer[0] *= 0.5;
    } else {
      for (Eigen::Index k = 1; k < n_pts; ++k) {
        const double tk = static_cast<double>(k) * h;
        if (tk >= cutoff_length) break;
        double mirrored = 0.0;
        for (int j = 1; j <= detail::kHestenesTerms; ++j) {
          mirrored += detail::kHestenes[static_cast<std::size_t>(j - 1)] * g(j * k, i);
        }
        buffer[static_cast<std::size_t>(period - k)] = mirrored * detail::smooth_cutoff(tk / cutoff_length);
      }
    }
    fft.fwd(spectrum, buffer);
    const double lambda = a.eigenvalues()(i);
    for (Eigen::Index m = 0; m < period; ++m) {
      const auto um = static_cast<std::size_t>(m);
      spectrum[um] /= symbol(Complex(0.5 * kappa, xi[um]), lambda);
    }
    fft.inv(buffer, spectrum);
    for (Eigen::Index k = 0; k < n_pts; ++k) v(k, i) = buffer[static_cast<std::size_t>(k)].real();
  }

  Matrix u0 = grow.asDiagonal() * (v * a.eigenbasis().transpose());
  return WeightedGridFunction(grid, std::move(u0));
}

/// Triangular solve of the trace system for (phi_0, phi_1, phi_2) given
/// (u0(0), u0'(0), u0''(0)).
inline BoundaryCorrection boundary_phis(const std::array<Vector, 3>& traces, const OperatorModel& a) {
  for (const auto& v : traces) {
    if (v.size() != a.dim()) throw Error(ErrorKind::DimensionMismatch, "trace vector size differs from dim(A)");
  }
  BoundaryCorrection c;
  c.phi0 = -traces[0];
  c.phi1 = c.phi0 - a.power(-1.0) * traces[1];
  c.phi2 = 0.5 * (-(a.power(-2.0) * traces[2]) - c.phi0 + 2.0 * c.phi1);
  return c;
}

/// Semigroup terms of the correction alone, sampled on `grid`.
inline WeightedGridFunction correction_terms(const Grid& grid, const BoundaryCorrection& phi, const OperatorModel& a) {
  const Vector c0 = a.to_eigen(phi.phi0);
  const Vector c1 = a.to_eigen(phi.phi1);
  const Vector c2 = a.to_eigen(phi.phi2);
  const Vector& lambda = a.eigenvalues();
  Matrix coeffs(grid.size(), a.dim());
  for (Eigen::Index k = 0; k < grid.size(); ++k) {
    const double t = grid.node(k);
    for (Eigen::Index i = 0; i < a.dim(); ++i) {
      const double tl = t * lambda(i);
      coeffs(k, i) = std::exp(-tl) * (c0(i) + tl * c1(i) + tl * tl * c2(i));
    }
  }
  return WeightedGridFunction(grid, coeffs * a.eigenbasis().transpose());
}

inline WeightedGridFunction assemble_solution(const WeightedGridFunction& u0, const BoundaryCorrection& phi,
                                              const OperatorModel& a) {
  if (u0.dim() != a.dim() || phi.phi0.size() != a.dim() || phi.phi1.size() != a.dim() ||
      phi.phi2.size() != a.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "correction and u0 must live in R^n with n = dim(A)");
  }
  return u0 + correction_terms(u0.grid(), phi, a);
}

/// P0(d/dt; A) u = -u'''' - 2 A u''' + 2 A^3 u' + A^4 u.
inline WeightedGridFunction apply_P0(const WeightedGridFunction& u, const OperatorModel& a) {
  if (u.dim() != a.dim()) throw Error(ErrorKind::DimensionMismatch, "function dimension differs from dim(A)");
  WeightedGridFunction out = u.mapped(a.power(4.0));
  out -= derivative(u, 4);
  out -= derivative(u, 3).mapped(2.0 * a.matrix());
  out += derivative(u, 1).mapped(2.0 * a.power(3.0));
  return out;
}

inline double relative_to(double value, double scale) { return scale > 0.0 ? value / scale : value; }

/// P0^{-1} f: full-line solve, trace extraction, boundary correction.
inline WeightedGridFunction invert_P0(const WeightedGridFunction& f, const OperatorModel& a,
                                      Extension extension = Extension::smooth) {
  const WeightedGridFunction u0 = fullline_solve(f, a, extension);
  const std::array<Vector, 3> traces{derivative_at_origin(u0, 0), derivative_at_origin(u0, 1),
                                     derivative_at_origin(u0, 2)};
  return assemble_solution(u0, boundary_phis(traces, a), a);
}

/// invert_P0 plus the residual, trace and norm diagnostics.
inline SolveReport principal_solve(const WeightedGridFunction& f, const OperatorModel& a,
                                   const PrincipalOptions& options = {}) {
  SolveReport report{.solution = invert_P0(f, a, options.extension)};
  report.forcing_norm = l2k_norm(f);
  report.residual = relative_to(l2k_norm(apply_P0(report.solution, a) - f), report.forcing_norm);
  report.traces = trace_norms(report.solution, a);
  report.sobolev_norm = sobolev_norm(report.solution, a);
  report.bound_constant = relative_to(report.sobolev_norm, report.forcing_norm);
  if (report.residual > options.residual_threshold) {
    throw Error(ErrorKind::ResidualTooLarge,
                "relative residual " + std::to_string(report.residual) + " exceeds " +
                    std::to_string(options.residual_threshold) + "; refine the grid or lengthen T");
  }
  return report;
}

}  // namespace opde

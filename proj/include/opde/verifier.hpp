#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

#include "opde/certifier.hpp"
#include "opde/error.hpp"
#include "opde/grid.hpp"
#include "opde/operator_model.hpp"
#include "opde/principal_solver.hpp"
#include "opde/random.hpp"

namespace opde {

/// One side-by-side comparison lhs <= rhs (+ slack).
struct Inequality {
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
  bool holds() const { return lhs <= rhs + slack; }
  /// rhs / lhs; > 1 means strict room, inf when lhs vanishes.
  double margin() const { return lhs > 0.0 ? rhs / lhs : std::numeric_limits<double>::infinity(); }
};

namespace detail {

inline void require_vanishing_value(const WeightedGridFunction& u) {
  const double scale = std::max(1.0, u.samples().cwiseAbs().maxCoeff());
  if (u.at(0).norm() > 1e-6 * scale) {
    throw Error(ErrorKind::BoundaryConditionViolated, "u(0) must vanish");
  }
}

inline void require_domain(const WeightedGridFunction& u, const OperatorModel& a) {
  const auto traces = trace_norms(u, a);
  const double scale = std::max(1.0, sobolev_norm(u, a));
  for (double tr : traces) {
    if (tr > 1e-6 * scale) throw Error(ErrorKind::NotInDomain, "traces u(0), u'(0), u''(0) must vanish");
  }
}

/// Second-order substitution: w = u e^{-kappa t/2} on the unweighted grid and
/// h = -(d/dt + kappa/2)^2 w + A^2 w.
struct AuxiliaryPair {
  WeightedGridFunction w;
  WeightedGridFunction dw;
  WeightedGridFunction h;
};

inline AuxiliaryPair auxiliary_pair(const WeightedGridFunction& u, const OperatorModel& a) {
  const double kappa = u.grid().kappa();
  const Grid flat = u.grid().with_kappa(0.0);
  const Vector damp = (-0.5 * kappa * flat.nodes().array()).exp().matrix();
  WeightedGridFunction w(flat, damp.asDiagonal() * u.samples());
  WeightedGridFunction dw = derivative(w, 1);
  WeightedGridFunction h = w.mapped(a.power(2.0) - 0.25 * kappa * kappa * Matrix::Identity(a.dim(), a.dim()));
  h -= derivative(w, 2);
  h -= kappa * dw;
  return {std::move(w), std::move(dw), std::move(h)};
}

}  // namespace detail

struct EnergyIdentity {
  double lhs = 0.0;  // Re(h, A^2 w)
  double rhs = 0.0;  // ||A w'||^2 + ||A^2 w||^2 - kappa^2/4 ||A w||^2
  double gap = 0.0;  // |lhs - rhs| / max(|lhs|, |rhs|)
};

/// Both sides of the integration-by-parts identity for the second-order
/// problem -(d/dt + kappa/2)^2 w + A^2 w = h, w = u e^{-kappa t/2}, w(0) = 0.
inline EnergyIdentity check_energy_identity(const WeightedGridFunction& u, const OperatorModel& a) {
  detail::require_vanishing_value(u);
  const double kappa = u.grid().kappa();
  const auto aux = detail::auxiliary_pair(u, a);
  const WeightedGridFunction a2w = aux.w.mapped(a.power(2.0));
  EnergyIdentity e;
  e.lhs = l2k_inner(aux.h, a2w);
  e.rhs = l2k_norm_squared(aux.dw.mapped(a.matrix())) + l2k_norm_squared(a2w) -
          0.25 * kappa * kappa * l2k_norm_squared(aux.w.mapped(a.matrix()));
  const double scale = std::max(std::abs(e.lhs), std::abs(e.rhs));
  e.gap = scale > 0.0 ? std::abs(e.lhs - e.rhs) / scale : 0.0;
  return e;
}

struct AuxEstimates {
  Inequality a2w;  // ||A^2 w|| <= gamma^{-1} ||h||
  Inequality aw1;  // ||A w'||^2 <= gamma^{-1} ||h||^2 / 4
  bool holds() const { return a2w.holds() && aw1.holds(); }
};

inline AuxEstimates check_aux_estimates(const WeightedGridFunction& u, const OperatorModel& a) {
  detail::require_vanishing_value(u);
  const double kappa = u.grid().kappa();
  require_admissible(a.lambda0(), kappa);
  const double g = gamma(a.lambda0(), kappa);
  const auto aux = detail::auxiliary_pair(u, a);
  const double h_norm = l2k_norm(aux.h);
  AuxEstimates r;
  r.a2w = {l2k_norm(aux.w.mapped(a.power(2.0))), h_norm / g, 1e-6};
  r.aw1 = {l2k_norm_squared(aux.dw.mapped(a.matrix())), 0.25 * h_norm * h_norm / g, 1e-6};
  return r;
}

struct IntermediateEstimates {
  std::array<Inequality, 4> intermediate;  // ||A^j u^{(4-j)}|| <= c_j ||P0 u||
  Inequality combined_high;  // ||A^2 u''||^2 + 2||A^3 u'||^2 + ||A^4 u||^2 <= gamma^{-2} ||P0 u||^2
  Inequality combined_mid;  // ||A u'''||^2 + 2||A^2 u''||^2 + ||A^3 u'||^2 <= gamma^{-1} ||P0 u||^2 / 4
  bool holds() const {
    return std::all_of(intermediate.begin(), intermediate.end(), [](const Inequality& i) { return i.holds(); }) &&
           combined_high.holds() && combined_mid.holds();
  }
  double worst_ratio() const {
    double worst = 0.0;
    for (const auto& i : intermediate) worst = std::max(worst, i.rhs > 0.0 ? i.lhs / i.rhs : 0.0);
    return worst;
  }
};

/// Intermediate-derivative estimates against ||P0 u||_{L_{2,kappa}} with the
/// certificate constants c_j(kappa), plus the two combined forms they come from.
inline IntermediateEstimates check_intermediate_estimates(const WeightedGridFunction& u, const OperatorModel& a) {
  const double kappa = u.grid().kappa();
  require_admissible(a.lambda0(), kappa);
  detail::require_domain(u, a);
  const auto c = constants(a.lambda0(), kappa);
  const double g = gamma(a.lambda0(), kappa);
  const double p0 = l2k_norm(apply_P0(u, a));

  std::array<double, 5> sq{};  // sq[j] = ||A^j u^{(4-j)}||^2, j = 1..4
  for (int j = 1; j <= 4; ++j) {
    const WeightedGridFunction d = (j == 4) ? u : derivative(u, 4 - j);
    sq[static_cast<std::size_t>(j)] = l2k_norm_squared(d.mapped(a.power(static_cast<double>(j))));
  }
  IntermediateEstimates r;
  for (std::size_t j = 1; j <= 4; ++j) {
    const double rhs = c[j - 1] * p0;
    r.intermediate[j - 1] = {std::sqrt(sq[j]), rhs, 1e-4 * rhs};
  }
  const double rhs14 = p0 * p0 / (g * g);
  const double rhs15 = 0.25 * p0 * p0 / g;
  r.combined_high = {sq[2] + 2.0 * sq[3] + sq[4], rhs14, 1e-4 * rhs14};
  r.combined_mid = {sq[1] + 2.0 * sq[2] + sq[3], rhs15, 1e-4 * rhs15};
  return r;
}

/// ||P0 u||^2 <= 4 ||u||_{W^4}^2 + 16 (||A u'''||^2 + ||A^3 u'||^2).
inline Inequality check_P0_boundedness(const WeightedGridFunction& u, const OperatorModel& a) {
  detail::require_domain(u, a);
  const double p0 = l2k_norm_squared(apply_P0(u, a));
  const double w4 = sobolev_norm(u, a);
  const double mid = l2k_norm_squared(derivative(u, 3).mapped(a.matrix())) +
                     l2k_norm_squared(derivative(u, 1).mapped(a.power(3.0)));
  return {p0, 4.0 * w4 * w4 + 16.0 * mid, 1e-6};
}

/// y = (d/dt + A)^2 u = u'' + 2 A u' + A^2 u.
inline WeightedGridFunction auxiliary_y(const WeightedGridFunction& u, const OperatorModel& a) {
  WeightedGridFunction y = derivative(u, 2);
  y += derivative(u, 1).mapped(2.0 * a.matrix());
  y += u.mapped(a.power(2.0));
  return y;
}

struct NormEquivalence {
  double min_ratio = std::numeric_limits<double>::infinity();
  double max_ratio = 0.0;
  int samples = 0;
};

/// ||P0 u||_{L_{2,kappa}} / ||u||_{W^4_{2,kappa}} over `sample_count` draws of
/// the randomized family.
inline NormEquivalence check_norm_equivalence(int sample_count, const OperatorModel& a, double kappa,
                                              std::uint64_t seed, Eigen::Index points = 2048) {
  require_admissible(a.lambda0(), kappa);
  DomainFamily family(a.lambda0(), kappa, a.dim(), seed);
  NormEquivalence r;
  for (int i = 0; i < sample_count; ++i) {
    const DomainSample s = family.draw();
    const WeightedGridFunction u = s.sample(s.grid(kappa, points));
    const double ratio = l2k_norm(apply_P0(u, a)) / sobolev_norm(u, a);
    r.min_ratio = std::min(r.min_ratio, ratio);
    r.max_ratio = std::max(r.max_ratio, ratio);
    ++r.samples;
  }
  return r;
}

}  // namespace opde

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "opde/error.hpp"
#include "opde/operator_model.hpp"

namespace opde {

using Complex = std::complex<double>;

/// Coefficients of mu^4, mu^3 A, mu^2 A^2, mu A^3, A^4 in
/// P0(mu; A) = (-mu + A)(mu + A)^3.
struct PencilCoefficients {
  static constexpr std::array<double, 5> values{-1.0, -2.0, 0.0, 2.0, 1.0};
};

inline bool admissible_weight(double lambda0, double kappa) { return std::abs(kappa) < 2.0 * lambda0; }

inline void require_admissible(double lambda0, double kappa) {
  if (!admissible_weight(lambda0, kappa)) {
    throw Error(ErrorKind::InadmissibleWeight, "|kappa| must be below 2 lambda0 (kappa = " + std::to_string(kappa) +
                                                   ", lambda0 = " + std::to_string(lambda0) + ")");
  }
}

/// Scalar symbol (-mu + lambda)(mu + lambda)^3.
inline Complex symbol(Complex mu, double lambda) {
  const Complex p = mu + lambda;
  return (lambda - mu) * p * p * p;
}

/// (lambda0^2 - kappa^2/4)(lambda0 + kappa/2)^2, the lower bound of
/// |P0(i xi + kappa/2; lambda)| over xi in R and lambda >= lambda0.
inline double symbol_lower_bound(double lambda0, double kappa) {
  require_admissible(lambda0, kappa);
  // Same factor order as symbol(kappa/2, lambda0) so the two agree to the bit.
  const double half = 0.5 * kappa;
  const double p = lambda0 + half;
  return (lambda0 - half) * p * p * p;
}

/// P0^{-1}(i xi + kappa/2; A) g, evaluated componentwise in the eigenbasis.
inline CVector resolvent_apply(const OperatorModel& a, double xi, double kappa, const CVector& g) {
  require_admissible(a.lambda0(), kappa);
  if (g.size() != a.dim()) throw Error(ErrorKind::DimensionMismatch, "vector size differs from dim(A)");
  const Matrix& q = a.eigenbasis();
  CVector c = q.transpose().cast<Complex>() * g;
  const Complex mu(0.5 * kappa, xi);
  for (Eigen::Index i = 0; i < c.size(); ++i) c(i) /= symbol(mu, a.eigenvalues()(i));
  return q.cast<Complex>() * c;
}

/// P0(i xi + kappa/2; A) g; the forward map matching resolvent_apply.
inline CVector pencil_apply(const OperatorModel& a, double xi, double kappa, const CVector& g) {
  const Matrix& q = a.eigenbasis();
  CVector c = q.transpose().cast<Complex>() * g;
  const Complex mu(0.5 * kappa, xi);
  for (Eigen::Index i = 0; i < c.size(); ++i) c(i) *= symbol(mu, a.eigenvalues()(i));
  return q.cast<Complex>() * c;
}

/// Symmetric composite frequency grid on [-1e4 lambda0, 1e4 lambda0]: a
/// linear block around the origin, logarithmic tails, and xi = 0.
inline std::vector<double> composite_xi_grid(double lambda0, std::size_t points = 4096) {
  const double reach = 1e4 * lambda0;
  const double inner = 10.0 * lambda0;
  const std::size_t per_side = std::max<std::size_t>(points / 2, 64);
  const std::size_t linear = per_side / 2;
  const std::size_t logarithmic = per_side - linear;
  std::vector<double> xs;
  xs.reserve(2 * per_side + 1);
  xs.push_back(0.0);
  for (std::size_t i = 1; i <= linear; ++i) xs.push_back(inner * static_cast<double>(i) / static_cast<double>(linear));
  const double log_lo = std::log(inner);
  const double log_hi = std::log(reach);
  for (std::size_t i = 1; i < logarithmic; ++i) {
    xs.push_back(std::exp(log_lo + (log_hi - log_lo) * static_cast<double>(i) / static_cast<double>(logarithmic)));
  }
  xs.push_back(reach);
  const std::size_t positive = xs.size();
  for (std::size_t i = 1; i < positive; ++i) xs.push_back(-xs[i]);
  std::sort(xs.begin(), xs.end());
  return xs;
}

/// sup over xi_grid and sigma(A) of xi^4 / |P0(i xi + kappa/2; lambda)|.
inline double bound_xi4(const OperatorModel& a, double kappa, std::span<const double> xi_grid) {
  require_admissible(a.lambda0(), kappa);
  double best = 0.0;
  for (double xi : xi_grid) {
    const Complex mu(0.5 * kappa, xi);
    const double xi4 = xi * xi * xi * xi;
    for (double lambda : a.eigenvalues()) best = std::max(best, xi4 / std::abs(symbol(mu, lambda)));
  }
  return best;
}

struct ResolventBound {
  double measured = 0.0;
  double closed_form = 0.0;
  /// Exact sup over xi of the same quantity: |symbol| is increasing in xi^2,
  /// so it is max over sigma(A) of lambda^4 / symbol(kappa/2, lambda).
  double spectral = 0.0;
};

/// Sampled sup of ||A^4 P0^{-1}(i xi + kappa/2; A)|| together with the
/// lambda0-only formula lambda0^4 / ((lambda0^2 - kappa^2/4)(lambda0 + kappa/2)^2).
///
/// The lambda0 formula bounds the sup only for kappa <= 0 or a single-point
/// spectrum; for kappa > 0 the ratio grows toward 1 with lambda.
inline ResolventBound bound_A4(const OperatorModel& a, double kappa, std::span<const double> xi_grid) {
  require_admissible(a.lambda0(), kappa);
  ResolventBound r;
  for (double xi : xi_grid) {
    const Complex mu(0.5 * kappa, xi);
    for (double lambda : a.eigenvalues()) {
      r.measured = std::max(r.measured, std::pow(lambda, 4) / std::abs(symbol(mu, lambda)));
    }
  }
  for (double lambda : a.eigenvalues()) {
    r.spectral = std::max(r.spectral, std::pow(lambda, 4) / symbol(Complex(0.5 * kappa, 0.0), lambda).real());
  }
  // symbol(kappa/2, lambda0) is the factored form of symbol_lower_bound.
  const double l0 = a.lambda0();
  r.closed_form = std::pow(l0, 4) / symbol(Complex(0.5 * kappa, 0.0), l0).real();
  return r;
}

}  // namespace opde

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>

#include "opde/grid.hpp"
#include "opde/operator_model.hpp"

namespace opde {

using Rng = std::mt19937_64;

inline Vector random_unit_vector(Eigen::Index n, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector x(n);
  do {
    for (Eigen::Index i = 0; i < n; ++i) x(i) = normal(rng);
  } while (x.norm() < 1e-8);
  return x / x.norm();
}

inline Matrix random_orthogonal(Eigen::Index n, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) g(i, j) = normal(rng);
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  return qr.householderQ();
}

inline Matrix random_matrix(Eigen::Index n, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) g(i, j) = normal(rng);
  }
  return g;
}

/// Random SPD operator with lambda0 exactly `lambda0` and the rest of the
/// spectrum uniform in [lambda0, spread * lambda0].
inline OperatorModel random_spd(Eigen::Index n, double lambda0, double spread, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vector values(n);
  values(0) = lambda0;
  for (Eigen::Index i = 1; i < n; ++i) values(i) = lambda0 * (1.0 + (spread - 1.0) * unit(rng));
  return OperatorModel::from_spectrum(values, random_orthogonal(n, rng));
}

/// u(t) = t^m e^{-a t} p(t) x with p a cubic; m = 3 gives an element of the
/// space with vanishing traces, m = 1 only u(0) = 0.
struct DomainSample {
  int vanishing_order = 3;
  double decay = 1.0;
  std::array<double, 4> poly{1.0, 0.0, 0.0, 0.0};
  Vector direction;

  double profile(double t) const {
    const double p = poly[0] + t * (poly[1] + t * (poly[2] + t * poly[3]));
    return std::pow(t, vanishing_order) * std::exp(-decay * t) * p;
  }

  WeightedGridFunction sample(const Grid& grid) const {
    return WeightedGridFunction::separable(grid, [this](double t) { return profile(t); }, direction);
  }

  /// Grid long enough that the weighted tail is negligible.
  Grid grid(double kappa, Eigen::Index points) const {
    return Grid(100.0 / (2.0 * decay + kappa), points, kappa);
  }
};

/// Randomized family t^m e^{-a t} p(t) x: a in [max(lambda0/2, lambda0/4 - kappa/2), 2 lambda0]
/// (the lower end keeps u e^{-kappa t/2} decaying), coefficients of p in [-1, 1],
/// x a random unit vector.
class DomainFamily {
 public:
  DomainFamily(double lambda0, double kappa, Eigen::Index dim, std::uint64_t seed, int vanishing_order = 3)
      : lambda0_(lambda0), kappa_(kappa), dim_(dim), order_(vanishing_order), rng_(seed) {}

  DomainSample draw() {
    const double lo = std::max(0.5 * lambda0_, 0.25 * lambda0_ - 0.5 * kappa_);
    std::uniform_real_distribution<double> decay(lo, 2.0 * lambda0_);
    std::uniform_real_distribution<double> coeff(-1.0, 1.0);
    DomainSample s;
    s.vanishing_order = order_;
    s.decay = decay(rng_);
    do {
      for (double& c : s.poly) c = coeff(rng_);
    } while (std::abs(s.poly[0]) + std::abs(s.poly[1]) + std::abs(s.poly[2]) + std::abs(s.poly[3]) < 1e-3);
    s.direction = random_unit_vector(dim_, rng_);
    return s;
  }

  Rng& rng() { return rng_; }

 private:
  double lambda0_;
  double kappa_;
  Eigen::Index dim_;
  int order_;
  Rng rng_;
};

}  // namespace opde

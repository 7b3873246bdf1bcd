#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <utility>
#include <vector>

#include "opde/error.hpp"
#include "opde/grid.hpp"
#include "opde/operator_model.hpp"

namespace opde {

/// u*(t) = p(t) e^{-a t} x with p a polynomial (coefficients ascending).
/// Derivatives and the forcing P0 u* + P1 u* are evaluated in closed form.
class ManufacturedSolution {
 public:
  ManufacturedSolution(std::vector<double> poly, double decay, Vector direction)
      : decay_(decay), direction_(std::move(direction)) {
    if (!(decay > 0.0)) throw Error(ErrorKind::ConfigInvalid, "manufactured decay must be positive");
    if (direction_.size() == 0) throw Error(ErrorKind::ConfigInvalid, "manufactured direction is empty");
    derivs_[0] = std::move(poly);
    for (std::size_t k = 1; k < derivs_.size(); ++k) derivs_[k] = differentiate(derivs_[k - 1]);
  }

  /// t^3 e^{-a t} x.
  static ManufacturedSolution cubic(double decay, Vector direction) {
    return ManufacturedSolution({0.0, 0.0, 0.0, 1.0}, decay, std::move(direction));
  }

  double decay() const { return decay_; }
  const Vector& direction() const { return direction_; }

  /// d^order/dt^order of the scalar profile p(t) e^{-a t}.
  double profile(double t, int order = 0) const {
    const auto& q = derivs_.at(static_cast<std::size_t>(order));
    double acc = 0.0;
    for (auto it = q.rbegin(); it != q.rend(); ++it) acc = acc * t + *it;
    return acc * std::exp(-decay_ * t);
  }

  WeightedGridFunction sample(const Grid& grid, int order = 0) const {
    return WeightedGridFunction::separable(grid, [&](double t) { return profile(t, order); }, direction_);
  }

  /// f = P0 u* + P1 u* with P0 u = -u'''' - 2A u''' + 2A^3 u' + A^4 u.
  WeightedGridFunction forcing(const Grid& grid, const OperatorModel& a, const std::array<Matrix, 4>& perturbation) const {
    const auto n = a.dim();
    if (direction_.size() != n) throw Error(ErrorKind::DimensionMismatch, "manufactured direction differs from dim(A)");
    std::array<Matrix, 5> m;  // m[k] multiplies u^{(k)}
    m[0] = a.power(4.0);
    m[1] = 2.0 * a.power(3.0);
    m[2] = Matrix::Zero(n, n);
    m[3] = -2.0 * a.matrix();
    m[4] = -Matrix::Identity(n, n);
    for (int j = 1; j <= 4; ++j) {
      const Matrix& aj = perturbation[static_cast<std::size_t>(j - 1)];
      if (aj.size() != 0) m[static_cast<std::size_t>(4 - j)] += aj;
    }
    std::array<Vector, 5> mx;
    for (std::size_t k = 0; k < 5; ++k) mx[k] = m[k] * direction_;
    Matrix s(grid.size(), n);
    for (Eigen::Index row = 0; row < grid.size(); ++row) {
      const double t = grid.node(row);
      Vector v = Vector::Zero(n);
      for (int k = 0; k <= 4; ++k) v += profile(t, k) * mx[static_cast<std::size_t>(k)];
      s.row(row) = v.transpose();
    }
    return WeightedGridFunction(grid, std::move(s));
  }

  /// Truncation length for which the weighted tail of u* is far below the
  /// grid error, and never shorter than Grid::default_length.
  double suggested_length(double lambda0, double kappa) const {
    if (!(decay_ + 0.5 * kappa > 0.0)) {
      throw Error(ErrorKind::ConfigInvalid, "manufactured solution is not in L_{2,kappa}: need decay > -kappa/2");
    }
    const double own = 40.0 / (decay_ + 0.5 * kappa);
    return std::max(Grid::default_length(lambda0, kappa), own);
  }

 private:
  // d/dt [q e^{-a t}] = (q' - a q) e^{-a t}.
  std::vector<double> differentiate(const std::vector<double>& q) const {
    std::vector<double> out(q.size(), 0.0);
    for (std::size_t i = 0; i < q.size(); ++i) {
      out[i] -= decay_ * q[i];
      if (i + 1 < q.size()) out[i] += static_cast<double>(i + 1) * q[i + 1];
    }
    return out;
  }

  double decay_;
  Vector direction_;
  std::array<std::vector<double>, 5> derivs_;
};

}  // namespace opde

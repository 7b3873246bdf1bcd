#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <functional>
#include <mutex>
#include <vector>

#include "opde/error.hpp"
#include "opde/operator_model.hpp"

namespace opde {

/// Uniform grid on the truncated half-line [0, T] carrying the weight
/// exponent kappa of L_{2,kappa}: node t_k = k T / (N - 1), weight e^{-kappa t_k}.
class Grid {
 public:
  Grid(double length, Eigen::Index points, double kappa) : length_(length), points_(points), kappa_(kappa) {
    if (!(length > 0.0) || !std::isfinite(length)) {
      throw Error(ErrorKind::GridTooSmall, "grid length must be positive");
    }
    if (points < 2) throw Error(ErrorKind::GridTooSmall, "grid needs at least two points");
    step_ = length_ / static_cast<double>(points_ - 1);
  }

  /// Truncation length for which e^{-(2 lambda0 - |kappa|) T} = e^{-30}.
  static double default_length(double lambda0, double kappa) {
    const double margin = 2.0 * lambda0 - std::abs(kappa);
    if (!(margin > 0.0)) throw Error(ErrorKind::InadmissibleWeight, "|kappa| >= 2 lambda0");
    return 30.0 / margin;
  }

  double length() const { return length_; }
  Eigen::Index size() const { return points_; }
  double step() const { return step_; }
  double kappa() const { return kappa_; }
  double node(Eigen::Index k) const { return k == points_ - 1 ? length_ : static_cast<double>(k) * step_; }
  double weight(Eigen::Index k) const { return std::exp(-kappa_ * node(k)); }

  Vector nodes() const {
    Vector t(points_);
    for (Eigen::Index k = 0; k < points_; ++k) t(k) = node(k);
    return t;
  }

  /// Trapezoid weights times e^{-kappa t_k}.
  Vector quadrature_weights() const {
    Vector w(points_);
    for (Eigen::Index k = 0; k < points_; ++k) w(k) = step_ * weight(k);
    w(0) *= 0.5;
    w(points_ - 1) *= 0.5;
    return w;
  }

  Grid with_kappa(double kappa) const { return Grid(length_, points_, kappa); }

  bool same_nodes(const Grid& other) const { return points_ == other.points_ && length_ == other.length_; }

 private:
  double length_;
  Eigen::Index points_;
  double kappa_;
  double step_ = 0.0;
};

/// H-valued function sampled on a Grid: row k holds u(t_k) in R^n.
class WeightedGridFunction {
 public:
  WeightedGridFunction(Grid grid, Matrix samples) : grid_(std::move(grid)), samples_(std::move(samples)) {
    if (samples_.rows() != grid_.size()) {
      throw Error(ErrorKind::DimensionMismatch, "sample count does not match grid size");
    }
  }

  static WeightedGridFunction zero(const Grid& grid, Eigen::Index n) {
    return WeightedGridFunction(grid, Matrix::Zero(grid.size(), n));
  }

  /// Samples t -> profile(t) * direction.
  static WeightedGridFunction separable(const Grid& grid, const std::function<double(double)>& profile,
                                        const Vector& direction) {
    Matrix s(grid.size(), direction.size());
    for (Eigen::Index k = 0; k < grid.size(); ++k) s.row(k) = profile(grid.node(k)) * direction.transpose();
    return WeightedGridFunction(grid, std::move(s));
  }

  const Grid& grid() const { return grid_; }
  const Matrix& samples() const { return samples_; }
  Matrix& samples() { return samples_; }
  Eigen::Index dim() const { return samples_.cols(); }
  Eigen::Index size() const { return samples_.rows(); }
  Vector at(Eigen::Index k) const { return samples_.row(k).transpose(); }

  /// Pointwise M u(t).
  WeightedGridFunction mapped(const Matrix& m) const {
    if (m.cols() != dim()) throw Error(ErrorKind::DimensionMismatch, "matrix does not act on R^n");
    return WeightedGridFunction(grid_, samples_ * m.transpose());
  }

  /// Same samples viewed on a grid with a different weight exponent.
  WeightedGridFunction reweighted(double kappa) const { return WeightedGridFunction(grid_.with_kappa(kappa), samples_); }

  WeightedGridFunction& operator+=(const WeightedGridFunction& o) {
    check_compatible(o);
    samples_ += o.samples_;
    return *this;
  }
  WeightedGridFunction& operator-=(const WeightedGridFunction& o) {
    check_compatible(o);
    samples_ -= o.samples_;
    return *this;
  }
  WeightedGridFunction& operator*=(double c) {
    samples_ *= c;
    return *this;
  }
  friend WeightedGridFunction operator+(WeightedGridFunction a, const WeightedGridFunction& b) { return a += b; }
  friend WeightedGridFunction operator-(WeightedGridFunction a, const WeightedGridFunction& b) { return a -= b; }
  friend WeightedGridFunction operator*(double c, WeightedGridFunction a) { return a *= c; }

 private:
  void check_compatible(const WeightedGridFunction& o) const {
    if (!grid_.same_nodes(o.grid_) || dim() != o.dim()) {
      throw Error(ErrorKind::DimensionMismatch, "grid functions live on different grids");
    }
  }

  Grid grid_;
  Matrix samples_;
};

namespace detail {

/// Fornberg's recursion: weights of the m-th derivative at x0 on nodes x.
inline std::vector<double> fornberg_weights(double x0, const std::vector<double>& x, int m) {
  const std::size_t n = x.size();
  std::vector<std::vector<double>> c(n, std::vector<double>(static_cast<std::size_t>(m) + 1, 0.0));
  double c1 = 1.0;
  double c4 = x[0] - x0;
  c[0][0] = 1.0;
  for (std::size_t i = 1; i < n; ++i) {
    const int mn = std::min(static_cast<int>(i), m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - x0;
    for (std::size_t j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k > 0; --k) {
          const auto uk = static_cast<std::size_t>(k);
          c[i][uk] = c1 * (k * c[i - 1][uk - 1] - c5 * c[i - 1][uk]) / c2;
        }
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k > 0; --k) {
        const auto uk = static_cast<std::size_t>(k);
        c[j][uk] = (c4 * c[j][uk] - k * c[j][uk - 1]) / c3;
      }
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = c[i][static_cast<std::size_t>(m)];
  return w;
}

}  // namespace detail

/// Unit-spacing stencils of sixth-order accuracy for one derivative order:
/// a centered interior stencil and one-sided rows for the nodes whose
/// centered window would leave the grid.
struct StencilTable {
  int order = 0;
  int width = 0;                           // points per stencil
  int half = 0;                            // interior reach
  std::vector<double> interior;            // offsets -half..half
  std::vector<std::vector<double>> edge;   // edge[r]: node r, window [0, width)

  static const StencilTable& get(int order) {
    static std::array<StencilTable, 5> tables;
    static std::once_flag once;
    std::call_once(once, [] {
      for (int d = 1; d <= 4; ++d) tables[static_cast<std::size_t>(d)] = build(d);
    });
    if (order < 1 || order > 4) throw Error(ErrorKind::GridTooSmall, "derivative order must be 1..4");
    return tables[static_cast<std::size_t>(order)];
  }

  static StencilTable build(int d) {
    StencilTable s;
    s.order = d;
    s.width = d + 6;
    if (s.width % 2 == 0) ++s.width;
    s.half = s.width / 2;
    std::vector<double> centered(static_cast<std::size_t>(s.width));
    for (int i = 0; i < s.width; ++i) centered[static_cast<std::size_t>(i)] = i - s.half;
    s.interior = detail::fornberg_weights(0.0, centered, d);
    std::vector<double> window(static_cast<std::size_t>(s.width));
    for (int i = 0; i < s.width; ++i) window[static_cast<std::size_t>(i)] = i;
    for (int r = 0; r < s.half; ++r) s.edge.push_back(detail::fornberg_weights(static_cast<double>(r), window, d));
    return s;
  }
};

inline constexpr Eigen::Index kMinDerivativePoints = 9;

/// d^order u / dt^order with sixth-order finite differences; one-sided near
/// both ends, exact on polynomials of degree <= 6.
inline WeightedGridFunction derivative(const WeightedGridFunction& u, int order) {
  const Eigen::Index n_pts = u.size();
  if (n_pts < kMinDerivativePoints) throw Error(ErrorKind::GridTooSmall, "derivative needs N >= 9");
  const StencilTable& st = StencilTable::get(order);
  if (n_pts < st.width) throw Error(ErrorKind::GridTooSmall, "grid narrower than the stencil");
  const double scale = std::pow(u.grid().step(), -order);
  const Matrix& s = u.samples();
  Matrix out = Matrix::Zero(n_pts, s.cols());
  for (Eigen::Index k = 0; k < n_pts; ++k) {
    const std::vector<double>* w = &st.interior;
    Eigen::Index lo = k - st.half;
    double sign = 1.0;
    bool reversed = false;
    if (k < st.half) {
      w = &st.edge[static_cast<std::size_t>(k)];
      lo = 0;
    } else if (k >= n_pts - st.half) {
      // Mirror of the left-edge row: reversing the window flips odd orders.
      w = &st.edge[static_cast<std::size_t>(n_pts - 1 - k)];
      lo = n_pts - st.width;
      reversed = true;
      sign = (order % 2 == 0) ? 1.0 : -1.0;
    }
    for (int i = 0; i < st.width; ++i) {
      const double wi = reversed ? (*w)[static_cast<std::size_t>(st.width - 1 - i)] : (*w)[static_cast<std::size_t>(i)];
      out.row(k) += wi * s.row(lo + i);
    }
    out.row(k) *= sign * scale;
  }
  return WeightedGridFunction(u.grid(), std::move(out));
}

/// Value of d^order u / dt^order at t = 0 (order 0 is u(0)), one-sided.
inline Vector derivative_at_origin(const WeightedGridFunction& u, int order) {
  if (order == 0) return u.at(0);
  if (u.size() < kMinDerivativePoints) throw Error(ErrorKind::GridTooSmall, "derivative needs N >= 9");
  const StencilTable& st = StencilTable::get(order);
  const auto& w = st.edge[0];
  Vector out = Vector::Zero(u.dim());
  for (int i = 0; i < st.width; ++i) out += w[static_cast<std::size_t>(i)] * u.samples().row(i).transpose();
  return out * std::pow(u.grid().step(), -order);
}

/// Weighted inner product (u, v)_{L_{2,kappa}} by the trapezoid rule.
inline double l2k_inner(const WeightedGridFunction& u, const WeightedGridFunction& v) {
  if (!u.grid().same_nodes(v.grid()) || u.dim() != v.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "grid functions live on different grids");
  }
  const Vector w = u.grid().quadrature_weights();
  return w.dot(u.samples().cwiseProduct(v.samples()).rowwise().sum());
}

inline double l2k_norm_squared(const WeightedGridFunction& u) {
  const Vector w = u.grid().quadrature_weights();
  return w.dot(u.samples().rowwise().squaredNorm());
}

/// (integral_0^T ||u(t)||^2 e^{-kappa t} dt)^{1/2}, trapezoid rule.
inline double l2k_norm(const WeightedGridFunction& u) { return std::sqrt(l2k_norm_squared(u)); }

/// (||u''''||^2 + ||A^4 u||^2)^{1/2} in L_{2,kappa}.
inline double sobolev_norm(const WeightedGridFunction& u, const OperatorModel& a) {
  const double d4 = l2k_norm_squared(derivative(u, 4));
  const double a4 = l2k_norm_squared(u.mapped(a.power(4.0)));
  return std::sqrt(d4 + a4);
}

/// ||A^{7/2-j} u^{(j)}(0)|| for j = 0, 1, 2.
inline std::array<double, 3> trace_norms(const WeightedGridFunction& u, const OperatorModel& a) {
  std::array<double, 3> out{};
  for (int j = 0; j < 3; ++j) {
    out[static_cast<std::size_t>(j)] = (a.power(3.5 - j) * derivative_at_origin(u, j)).norm();
  }
  return out;
}

}  // namespace opde

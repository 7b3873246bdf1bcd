#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "opde/error.hpp"

namespace opde {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CVector = Eigen::VectorXcd;

inline constexpr double kSymmetryTolerance = 1e-10;
inline constexpr double kOrthogonalityTolerance = 1e-12;

/// Largest singular value.
inline double op_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

/// Self-adjoint positive-definite operator on R^n, stored through its
/// eigendecomposition A = Q diag(lambda) Q^T with eigenvalues ascending.
///
/// All spectral calculus (fractional powers, the semigroup e^{-tA}, the
/// pencil resolvent) is evaluated in this basis, so the factorization is
/// done exactly once.
class OperatorModel {
 public:
  /// Eigendecomposes a symmetric matrix. Throws NotSymmetric or
  /// NotPositiveDefinite.
  static OperatorModel from_matrix(const Matrix& a) {
    if (a.rows() != a.cols() || a.rows() == 0) {
      throw Error(ErrorKind::DimensionMismatch, "operator matrix must be square and non-empty");
    }
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    if ((a - a.transpose()).cwiseAbs().maxCoeff() > kSymmetryTolerance * scale) {
      throw Error(ErrorKind::NotSymmetric, "operator matrix is not symmetric");
    }
    const Matrix sym = 0.5 * (a + a.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
    if (eig.info() != Eigen::Success) {
      throw Error(ErrorKind::NotSymmetric, "eigendecomposition failed");
    }
    return OperatorModel(eig.eigenvalues(), eig.eigenvectors());
  }

  /// Builds A from a spectrum and an (optional) orthonormal eigenbasis whose
  /// columns are the eigenvectors. Eigenpairs are re-sorted ascending.
  static OperatorModel from_spectrum(const Vector& eigenvalues, const Matrix& eigenbasis) {
    const auto n = eigenvalues.size();
    if (n == 0 || eigenbasis.rows() != n || eigenbasis.cols() != n) {
      throw Error(ErrorKind::DimensionMismatch, "eigenbasis must be n x n for n eigenvalues");
    }
    const Matrix gram = eigenbasis.transpose() * eigenbasis;
    if ((gram - Matrix::Identity(n, n)).cwiseAbs().maxCoeff() > kOrthogonalityTolerance * 1e3) {
      throw Error(ErrorKind::NotSymmetric, "eigenbasis is not orthonormal");
    }
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    std::sort(order.begin(), order.end(),
              [&](Eigen::Index l, Eigen::Index r) { return eigenvalues(l) < eigenvalues(r); });
    Vector values(n);
    Matrix basis(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      values(i) = eigenvalues(order[static_cast<std::size_t>(i)]);
      basis.col(i) = eigenbasis.col(order[static_cast<std::size_t>(i)]);
    }
    // Re-orthonormalize so the 1e-12 invariant holds even for inputs that
    // were typed with fewer digits.
    Eigen::HouseholderQR<Matrix> qr(basis);
    Matrix q = qr.householderQ();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (q.col(i).dot(basis.col(i)) < 0) q.col(i) *= -1.0;
    }
    return OperatorModel(values, q);
  }

  static OperatorModel from_spectrum(const Vector& eigenvalues) {
    return from_spectrum(eigenvalues, Matrix::Identity(eigenvalues.size(), eigenvalues.size()));
  }

  static OperatorModel identity(Eigen::Index n) { return from_spectrum(Vector::Ones(n)); }

  Eigen::Index dim() const { return eigenvalues_.size(); }
  const Vector& eigenvalues() const { return eigenvalues_; }
  const Matrix& eigenbasis() const { return basis_; }
  /// Lower bound of the spectrum.
  double lambda0() const { return eigenvalues_(0); }
  double lambda_max() const { return eigenvalues_(dim() - 1); }

  Matrix matrix() const { return power(1.0); }

  /// Q diag(lambda_i^s) Q^T; any real s since A > 0.
  Matrix power(double s) const {
    return basis_ * eigenvalues_.array().pow(s).matrix().asDiagonal() * basis_.transpose();
  }

  /// Coefficients of x in the eigenbasis (Q^T x).
  Vector to_eigen(const Vector& x) const { return basis_.transpose() * x; }
  Vector from_eigen(const Vector& c) const { return basis_ * c; }

 private:
  OperatorModel(Vector values, Matrix basis) : eigenvalues_(std::move(values)), basis_(std::move(basis)) {
    if (eigenvalues_(0) <= 0.0 || !std::isfinite(eigenvalues_(0))) {
      throw Error(ErrorKind::NotPositiveDefinite,
                  "smallest eigenvalue " + std::to_string(eigenvalues_(0)) + " is not positive");
    }
  }

  Vector eigenvalues_;
  Matrix basis_;
};

inline OperatorModel make_operator(const Matrix& a) { return OperatorModel::from_matrix(a); }

inline Matrix frac_power(const OperatorModel& a, double s) { return a.power(s); }

/// e^{-tA} phi.
inline Vector semigroup_apply(const OperatorModel& a, double t, const Vector& phi) {
  if (t < 0.0) throw Error(ErrorKind::NegativeTime, "semigroup requires t >= 0");
  if (phi.size() != a.dim()) throw Error(ErrorKind::DimensionMismatch, "vector size differs from dim(A)");
  if (t == 0.0) return phi;
  const Vector decay = (-t * a.eigenvalues().array()).exp().matrix();
  return a.from_eigen(decay.cwiseProduct(a.to_eigen(phi)));
}

/// Lower-order coefficients A_1..A_4 of the equation together with their
/// normalized forms B_j = A_j A^{-j} and beta_j = ||B_j||.
struct PerturbationSet {
  std::array<Matrix, 4> coefficients;  // A_j, j = 1..4 at index j-1
  std::array<Matrix, 4> normalized;    // B_j
  std::array<double, 4> beta{};        // ||B_j||_{H->H}

  const Matrix& A(int j) const { return coefficients.at(static_cast<std::size_t>(j - 1)); }
  const Matrix& B(int j) const { return normalized.at(static_cast<std::size_t>(j - 1)); }

  bool is_zero() const {
    for (double b : beta) {
      if (b != 0.0) return false;
    }
    return true;
  }
};

inline PerturbationSet make_perturbations(const OperatorModel& a, const std::array<Matrix, 4>& coefficients) {
  const auto n = a.dim();
  PerturbationSet p;
  for (std::size_t j = 0; j < 4; ++j) {
    const Matrix& aj = coefficients[j];
    if (aj.size() == 0) {
      p.coefficients[j] = Matrix::Zero(n, n);
    } else if (aj.rows() != n || aj.cols() != n) {
      throw Error(ErrorKind::DimensionMismatch, "A_" + std::to_string(j + 1) + " is not n x n");
    } else {
      p.coefficients[j] = aj;
    }
    p.normalized[j] = p.coefficients[j] * a.power(-static_cast<double>(j + 1));
    p.beta[j] = op_norm(p.normalized[j]);
  }
  return p;
}

/// Same as make_perturbations but takes B_j directly and sets A_j = B_j A^j.
inline PerturbationSet make_normalized_perturbations(const OperatorModel& a, const std::array<Matrix, 4>& normalized) {
  const auto n = a.dim();
  std::array<Matrix, 4> coefficients;
  for (std::size_t j = 0; j < 4; ++j) {
    const Matrix& bj = normalized[j];
    if (bj.size() == 0) {
      coefficients[j] = Matrix::Zero(n, n);
      continue;
    }
    if (bj.rows() != n || bj.cols() != n) {
      throw Error(ErrorKind::DimensionMismatch, "B_" + std::to_string(j + 1) + " is not n x n");
    }
    coefficients[j] = bj * a.power(static_cast<double>(j + 1));
  }
  PerturbationSet p = make_perturbations(a, coefficients);
  // Keep the caller's B_j bit-for-bit rather than the round trip through A^{-j}.
  for (std::size_t j = 0; j < 4; ++j) {
    if (normalized[j].size() != 0) {
      p.normalized[j] = normalized[j];
      p.beta[j] = op_norm(normalized[j]);
    }
  }
  return p;
}

inline PerturbationSet zero_perturbations(const OperatorModel& a) { return make_perturbations(a, {}); }

}  // namespace opde

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <optional>
#include <string>
#include <utility>

#include "qctl/error.hpp"

namespace qctl {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Index = Eigen::Index;

/// Default relative tolerance for Hermitian / psd certification.
inline constexpr double kCertifyTolerance = 1e-10;

/// Dense complex square matrix standing for a bounded operator on the
/// (finite-dimensional) system space. Carries optional Hermitian / psd
/// certificates, each remembering the tolerance it was issued at.
class Operator {
 public:
  Operator() = default;

  explicit Operator(Matrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols()) {
      throw DimensionError("Operator: matrix is " + std::to_string(m_.rows()) +
                           "x" + std::to_string(m_.cols()) + ", not square");
    }
  }

  static Operator identity(Index n) { return Operator(Matrix::Identity(n, n)); }
  static Operator zero(Index n) { return Operator(Matrix::Zero(n, n)); }

  Index dim() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }
  cplx operator()(Index i, Index j) const { return m_(i, j); }

  /// Tolerance the Hermitian flag was certified at, if any.
  std::optional<double> hermitian_tolerance() const { return hermitian_tol_; }
  std::optional<double> psd_tolerance() const { return psd_tol_; }
  /// Frobenius norm of the anti-Hermitian part dropped at certification.
  double discarded_anti_hermitian_norm() const { return discarded_; }

  double norm() const { return m_.norm(); }
  cplx trace() const { return m_.trace(); }

  friend Operator operator+(const Operator& a, const Operator& b) {
    check_same_dim(a, b, "operator+");
    return Operator(a.m_ + b.m_);
  }
  friend Operator operator-(const Operator& a, const Operator& b) {
    check_same_dim(a, b, "operator-");
    return Operator(a.m_ - b.m_);
  }
  friend Operator operator*(const Operator& a, const Operator& b) {
    check_same_dim(a, b, "operator*");
    return Operator(a.m_ * b.m_);
  }
  friend Operator operator*(cplx s, const Operator& a) { return Operator(s * a.m_); }
  friend Operator operator*(double s, const Operator& a) { return Operator(s * a.m_); }
  Operator operator-() const { return Operator(-m_); }

  static void check_same_dim(const Operator& a, const Operator& b, const char* where) {
    if (a.dim() != b.dim()) {
      throw DimensionError(std::string(where) + ": dimension mismatch (" +
                           std::to_string(a.dim()) + " vs " + std::to_string(b.dim()) + ")");
    }
  }

 private:
  friend class Certifier;

  Matrix m_;
  std::optional<double> hermitian_tol_;
  std::optional<double> psd_tol_;
  double discarded_ = 0.0;
};

inline Operator adjoint(const Operator& a) { return Operator(a.matrix().adjoint()); }

inline Operator commutator(const Operator& a, const Operator& b) {
  Operator::check_same_dim(a, b, "commutator");
  return Operator(a.matrix() * b.matrix() - b.matrix() * a.matrix());
}

/// ||(A - A*)/2||_F.
inline double anti_hermitian_norm(const Matrix& a) { return 0.5 * (a - a.adjoint()).norm(); }

inline Matrix hermitian_part(const Matrix& a) { return 0.5 * (a + a.adjoint()); }

class Certifier {
 public:
  static Operator hermitian(const Operator& a, double rel_tol) {
    const double anti = anti_hermitian_norm(a.m_);
    if (anti > rel_tol * a.m_.norm()) {
      throw DomainError("operator is not Hermitian: anti-Hermitian norm " + std::to_string(anti) +
                        " exceeds " + std::to_string(rel_tol) + " x ||A||_F");
    }
    Operator out(hermitian_part(a.m_));
    out.hermitian_tol_ = rel_tol;
    out.discarded_ = anti;
    return out;
  }

  static Operator psd(const Operator& a, double rel_tol) {
    Operator h = hermitian(a, rel_tol);
    if (h.dim() > 0) {
      Eigen::SelfAdjointEigenSolver<Matrix> es(h.m_, Eigen::EigenvaluesOnly);
      const double lo = es.eigenvalues().minCoeff();
      if (lo < -rel_tol * std::max(1.0, h.m_.norm())) {
        throw DomainError("operator is not positive semidefinite: min eigenvalue " +
                          std::to_string(lo));
      }
    }
    h.psd_tol_ = rel_tol;
    return h;
  }
};

/// Symmetrizes A and flags it Hermitian; throws DomainError when the
/// discarded anti-Hermitian part exceeds rel_tol * ||A||_F.
inline Operator certify_hermitian(const Operator& a, double rel_tol = kCertifyTolerance) {
  return Certifier::hermitian(a, rel_tol);
}

inline Operator certify_psd(const Operator& a, double rel_tol = kCertifyTolerance) {
  return Certifier::psd(a, rel_tol);
}

inline double min_hermitian_eigenvalue(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(a), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace qctl

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "qctl/error.hpp"
#include "qctl/operator.hpp"

namespace qctl {

/// Unique Hermitian psd square root. Eigenvalues in [-tol, 0) are clamped.
inline Operator psd_sqrt(const Operator& a, double rel_tol = kCertifyTolerance) {
  const Operator h = certify_hermitian(a, rel_tol);
  if (h.dim() == 0) return h;
  Eigen::SelfAdjointEigenSolver<Matrix> es(h.matrix());
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double floor = -rel_tol * std::max(1.0, h.norm());
  if (ev.minCoeff() < floor) {
    throw DomainError("psd_sqrt: min eigenvalue " + std::to_string(ev.minCoeff()) +
                      " below tolerance");
  }
  const Eigen::VectorXd root = ev.cwiseMax(0.0).cwiseSqrt();
  const Matrix& v = es.eigenvectors();
  Matrix s = v * root.cast<cplx>().asDiagonal() * v.adjoint();
  return certify_psd(Operator(hermitian_part(s)), rel_tol);
}

struct PolarDecomposition {
  Operator W;  // unitary factor
  Operator P;  // psd_sqrt(A* A)
  Index rank_deficiency = 0;
};

/// A = W P through the SVD A = U S V*: W = U V*, P = V S V*. For singular A
/// the unitary factor is completed from the singular-vector pairing and the
/// number of (relatively) vanishing singular values is reported.
inline PolarDecomposition polar_decompose(const Operator& a, double rel_tol = kCertifyTolerance) {
  const Index n = a.dim();
  if (n == 0) return {a, a, 0};
  Eigen::JacobiSVD<Matrix> svd(a.matrix(), Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::VectorXd& s = svd.singularValues();
  const Matrix& u = svd.matrixU();
  const Matrix& v = svd.matrixV();
  Index deficiency = 0;
  const double smax = s.size() ? s(0) : 0.0;
  for (Index i = 0; i < s.size(); ++i) {
    if (s(i) <= rel_tol * std::max(smax, std::numeric_limits<double>::min())) ++deficiency;
  }
  Matrix p = v * s.cast<cplx>().asDiagonal() * v.adjoint();
  return {Operator(u * v.adjoint()), Operator(hermitian_part(p)), deficiency};
}

/// Smallest |lambda_i(A) + mu_j(B)|; zero separation means A X + X B = C is singular.
inline double sylvester_separation(const Matrix& a, const Matrix& b) {
  Eigen::ComplexEigenSolver<Matrix> ea(a, false), eb(b, false);
  double sep = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < b.rows(); ++j) {
      sep = std::min(sep, std::abs(ea.eigenvalues()(i) + eb.eigenvalues()(j)));
    }
  }
  return sep;
}

/// Column-stacking vectorization and its inverse.
inline Vector vec(const Matrix& x) { return Eigen::Map<const Vector>(x.data(), x.size()); }
inline Matrix unvec(const Vector& v, Index n) { return Eigen::Map<const Matrix>(v.data(), n, n); }

/// Kronecker product a (x) b.
inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

/// Solves A X + X B = C by vectorization, (I (x) A + B^T (x) I) vec X = vec C.
/// Intended for dim <= 32.
inline Operator solve_sylvester(const Operator& a, const Operator& b, const Operator& c,
                                double rel_tol = 1e-12) {
  Operator::check_same_dim(a, b, "solve_sylvester");
  Operator::check_same_dim(a, c, "solve_sylvester");
  const Index n = a.dim();
  const double sep = sylvester_separation(a.matrix(), b.matrix());
  const double scale = std::max(1.0, a.norm() + b.norm());
  if (sep <= rel_tol * scale) {
    throw NearSingularError("solve_sylvester: spectra of A and -B overlap (separation " +
                                std::to_string(sep) + ")",
                            sep);
  }
  const Matrix id = Matrix::Identity(n, n);
  const Matrix big = kron(id, a.matrix()) + kron(b.matrix().transpose(), id);
  const Vector x = big.fullPivLu().solve(vec(c.matrix()));
  return Operator(unvec(x, n));
}

inline double sylvester_residual(const Operator& a, const Operator& b, const Operator& c,
                                 const Operator& x) {
  return (a.matrix() * x.matrix() + x.matrix() * b.matrix() - c.matrix()).norm();
}

namespace detail {

// Pade approximants of degree 3..13 and their 1-norm thresholds.
inline constexpr std::array<double, 5> kPadeTheta = {1.495585217958292e-2, 2.539398330063230e-1,
                                                      9.504178996162932e-1, 2.097847961257068e0,
                                                      5.371920351148152e0};

inline void pade_low(const Matrix& a, int m, Matrix& u, Matrix& v) {
  static const double c3[] = {120., 60., 12., 1.};
  static const double c5[] = {30240., 15120., 3360., 420., 30., 1.};
  static const double c7[] = {17297280., 8648640., 1995840., 277200., 25200., 1512., 56., 1.};
  static const double c9[] = {17643225600., 8821612800., 2075673600., 302702400., 30270240.,
                              2162160.,     110880.,     3960.,       90.,        1.};
  const double* c = m == 3 ? c3 : m == 5 ? c5 : m == 7 ? c7 : c9;
  const Index n = a.rows();
  const Matrix id = Matrix::Identity(n, n);
  const Matrix a2 = a * a;
  Matrix pow = id;
  Matrix uo = c[1] * id;
  Matrix ve = c[0] * id;
  for (int k = 2; k <= m; k += 2) {
    pow = pow * a2;
    uo += c[k + 1] * pow;
    ve += c[k] * pow;
  }
  u = a * uo;
  v = ve;
}

inline void pade13(const Matrix& a, Matrix& u, Matrix& v) {
  static const double b[] = {64764752532480000., 32382376266240000., 7771770303897600.,
                             1187353796428800.,  129060195264000.,   10559470521600.,
                             670442572800.,      33522128640.,       1323241920.,
                             40840800.,          960960.,            16380.,
                             182.,               1.};
  const Index n = a.rows();
  const Matrix id = Matrix::Identity(n, n);
  const Matrix a2 = a * a;
  const Matrix a4 = a2 * a2;
  const Matrix a6 = a4 * a2;
  const Matrix tmp = b[13] * a6 + b[11] * a4 + b[9] * a2;
  u = a * (a6 * tmp + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id);
  const Matrix tmp2 = b[12] * a6 + b[10] * a4 + b[8] * a2;
  v = a6 * tmp2 + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
}

inline double one_norm(const Matrix& a) {
  return a.size() ? a.cwiseAbs().colwise().sum().maxCoeff() : 0.0;
}

}  // namespace detail

/// exp(A) by scaling and squaring with a Pade core (Higham 2005).
/// exp(0) is returned as the exact identity.
inline Matrix matrix_exp(const Matrix& a) {
  const Index n = a.rows();
  if (a.isZero(0.0)) return Matrix::Identity(n, n);
  const double norm1 = detail::one_norm(a);
  Matrix u, v;
  int squarings = 0;
  bool done = false;
  constexpr std::array<int, 4> degrees = {3, 5, 7, 9};
  for (std::size_t i = 0; i < degrees.size(); ++i) {
    if (norm1 <= detail::kPadeTheta[i]) {
      detail::pade_low(a, degrees[i], u, v);
      done = true;
      break;
    }
  }
  if (!done) {
    squarings = std::max(0, static_cast<int>(std::ceil(std::log2(norm1 / detail::kPadeTheta[4]))));
    const Matrix scaled = a / std::ldexp(1.0, squarings);
    detail::pade13(scaled, u, v);
  }
  Matrix r = (v - u).partialPivLu().solve(v + u);
  for (int k = 0; k < squarings; ++k) r = r * r;
  return r;
}

inline Operator matrix_exp(const Operator& a) { return Operator(matrix_exp(a.matrix())); }

}  // namespace qctl

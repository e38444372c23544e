#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "qctl/qctl.hpp"

namespace qctl::test {

inline const cplx I1(0.0, 1.0);

inline Matrix diag(std::initializer_list<cplx> d) {
  Vector v(static_cast<Index>(d.size()));
  Index i = 0;
  for (cplx x : d) v(i++) = x;
  return v.asDiagonal();
}

inline Matrix sigma_x() { return (Matrix(2, 2) << 0, 1, 1, 0).finished(); }
inline Matrix sigma_y() { return (Matrix(2, 2) << 0, -I1, I1, 0).finished(); }
inline Matrix sigma_z() { return (Matrix(2, 2) << 1, 0, 0, -1).finished(); }
inline Matrix lowering() { return (Matrix(2, 2) << 0, 1, 0, 0).finished(); }

inline Operator scalar_op(double x) { return Operator(Matrix::Constant(1, 1, cplx(x))); }

/// H = 0, L = sigma_-, T = 1: the excited state decays as exp(-t).
inline HPModel qubit_decay() { return HPModel(Operator::zero(2), Operator(lowering()), 1.0); }

inline Vector excited() { return (Vector(2) << 0, 1).finished(); }

/// Random unitary model of dimension n with ||H||, ||L|| of order one.
inline HPModel random_model(std::mt19937_64& rng, Index n, double T = 1.0) {
  return HPModel(Operator(random_hermitian(rng, n)), Operator(random_gaussian(rng, n, n, 0.6)), T);
}

/// Controlled model F = -iH - D with D psd, no noise coupling in the drift
/// beyond Phi = L, Psi = -L*.
inline HPModel random_controlled_model(std::mt19937_64& rng, Index n, double T = 1.0) {
  HPModel m = random_model(rng, n, T);
  m.F_ = Operator(-I1 * m.H.matrix() - 0.5 * random_psd(rng, n));
  m.Phi_ = m.L;
  m.Psi_ = -adjoint(m.L);
  return m;
}

/// Hurwitz matrix: random Gaussian shifted left of the imaginary axis.
inline Matrix random_hurwitz(std::mt19937_64& rng, Index n) {
  Matrix a = random_gaussian(rng, n, n);
  const double shift = a.eigenvalues().real().maxCoeff() + 0.5;
  return a - shift * Matrix::Identity(n, n);
}

}  // namespace qctl::test

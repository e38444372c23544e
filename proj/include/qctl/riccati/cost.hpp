#pragma once

#include <optional>

#include "qctl/error.hpp"
#include "qctl/operator.hpp"

namespace qctl {

/// Smallest admissible eigenvalue of the control weight R.
inline constexpr double kMinControlWeight = 1e-8;

/// Quadratic cost weights: running Q, R, m, eta; terminal Q_T, m_T (or the
/// initial-cost pair Q_0, m_0 of the forward orientation).
struct CostSpec {
  Operator Q, R, m, eta;
  Operator QT, mT;
  std::optional<Operator> Q0, m0;

  /// Q = X*X, R = I, terminal M, no affine weights (the unitary-flow cost).
  static CostSpec quadratic(const Operator& X, const Operator& M) {
    const Index n = X.dim();
    CostSpec c;
    c.Q = Operator(X.matrix().adjoint() * X.matrix());
    c.R = Operator::identity(n);
    c.m = c.eta = c.mT = Operator::zero(n);
    c.QT = M;
    return c;
  }

  static CostSpec zeros(Index n) {
    CostSpec c;
    c.Q = c.m = c.eta = c.QT = c.mT = Operator::zero(n);
    c.R = Operator::identity(n);
    return c;
  }

  Index dim() const { return Q.dim(); }

  Operator initial_weight() const { return Q0 ? *Q0 : Operator::zero(dim()); }

  /// R^-1, after checking that R is Hermitian with eigenvalues above kMinControlWeight.
  Operator R_inverse() const {
    const Operator r = certify_hermitian(R);
    const double lo = min_hermitian_eigenvalue(r.matrix());
    if (lo <= kMinControlWeight) {
      throw DomainError("control weight R is not positive (min eigenvalue " + std::to_string(lo) + ")");
    }
    return Operator(hermitian_part(r.matrix().inverse()));
  }

  void validate() const {
    const Index n = Q.dim();
    if (n == 0) throw ValidationError("cost: Q is empty");
    for (const Operator* o : {&R, &m, &eta, &QT, &mT}) Operator::check_same_dim(Q, *o, "cost weights");
    if (Q0) Operator::check_same_dim(Q, *Q0, "cost weights");
    if (m0) Operator::check_same_dim(Q, *m0, "cost weights");
    certify_psd(Q);
    certify_psd(QT);
    if (Q0) certify_psd(*Q0);
    R_inverse();
  }
};

}  // namespace qctl

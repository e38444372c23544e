#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "qctl/error.hpp"
#include "qctl/linalg.hpp"
#include "qctl/operator.hpp"
#include "qctl/riccati/cost.hpp"
#include "qctl/riccati/ode.hpp"

namespace qctl {

struct CareResult {
  Operator Pi;
  double residual = 0.0;
  int iterations = 0;
  std::vector<double> residual_history;  // residual of each Newton iterate, starting guess first
  std::string initial_guess;             // "psd_sqrt(Q)" or "riccati_ode"
};

struct CareOptions {
  int max_iterations = 100;
  int stagnation_window = 5;
};

/// Residual F* Pi + Pi F + Phi* Pi Phi + Q - Pi G R^-1 G* Pi.
inline Matrix care_residual(const Matrix& F, const Matrix& S, const Matrix& Q, const Matrix* Phi, const Matrix& P) {
  Matrix r = F.adjoint() * P + P * F + Q - P * S * P;
  if (Phi) r += Phi->adjoint() * P * *Phi;
  return r;
}

/// Newton-Kleinman iteration for the algebraic Riccati equation
///   F* Pi + Pi F + Phi* Pi Phi + Q - Pi G R^-1 G* Pi = 0.
/// Each step solves the linearization A* D + D A + Phi* D Phi = -Res(Pi),
/// A = F - G R^-1 G* Pi: a Sylvester equation without Phi, the generalized
/// Lyapunov equation by vectorization with it.
inline CareResult solve_care(const Operator& F, const Operator& G, const Operator& R, const Operator& Q,
                             const std::optional<Operator>& Phi = std::nullopt, double tol = 1e-10,
                             const CareOptions& opt = {}) {
  Operator::check_same_dim(F, G, "solve_care");
  Operator::check_same_dim(F, R, "solve_care");
  Operator::check_same_dim(F, Q, "solve_care");
  if (Phi) Operator::check_same_dim(F, *Phi, "solve_care");
  certify_psd(Q);
  CostSpec cs = CostSpec::zeros(F.dim());
  cs.R = R;
  const Matrix Rinv = cs.R_inverse().matrix();
  const Index n = F.dim();
  const Matrix& f = F.matrix();
  const Matrix S = G.matrix() * Rinv * G.matrix().adjoint();
  const Matrix& q = Q.matrix();
  const Matrix* phi = Phi ? &Phi->matrix() : nullptr;

  CareResult res;
  Matrix P;
  if (Eigen::SelfAdjointEigenSolver<Matrix>(hermitian_part(f + f.adjoint()), Eigen::EigenvaluesOnly)
          .eigenvalues()
          .maxCoeff() <= 0.0) {
    P = psd_sqrt(Operator(hermitian_part(q))).matrix();
    res.initial_guess = "psd_sqrt(Q)";
  } else {
    // Long-horizon value of the Riccati ODE from zero terminal weight.
    HPModel m;
    m.H = Operator::zero(n);
    m.L = Operator::zero(n);
    m.F_ = F;
    m.G_ = G;
    m.Psi_ = Operator::zero(n);
    m.Phi_ = Phi ? *Phi : Operator::zero(n);
    m.T = 50.0 / F.norm();
    CostSpec c = CostSpec::zeros(n);
    c.Q = Operator(hermitian_part(q));
    c.R = R;
    P = solve_riccati_ode(m, c, TimeGrid(m.T, 5000)).Pi.front().matrix();
    res.initial_guess = "riccati_ode";
  }

  const Matrix id = Matrix::Identity(n, n);
  Matrix Res = care_residual(f, S, q, phi, P);
  double best = Res.norm();
  res.residual_history.push_back(best);
  int not_decreasing = 0;
  for (int it = 0; it < opt.max_iterations && Res.norm() > tol; ++it) {
    const Matrix A = f - S * P;
    Matrix D;
    if (phi) {
      const Matrix big = kron(id, A.adjoint()) + kron(A.transpose(), id) + kron(phi->transpose(), phi->adjoint());
      D = unvec(big.fullPivLu().solve(vec(-Res)), n);
    } else {
      D = solve_sylvester(Operator(A.adjoint()), Operator(A), Operator(-Res)).matrix();
    }
    P = hermitian_part(P + D);
    Res = care_residual(f, S, q, phi, P);
    const double rn = Res.norm();
    if (!std::isfinite(rn)) throw NumericalError("solve_care: Newton iterate is not finite");
    res.residual_history.push_back(rn);
    res.iterations = it + 1;
    if (rn >= best) {
      if (++not_decreasing >= opt.stagnation_window) {
        throw NumericalError("solve_care: Newton stagnated at residual " + std::to_string(rn));
      }
    } else {
      best = rn;
      not_decreasing = 0;
    }
  }
  res.residual = Res.norm();
  if (res.residual > tol) {
    throw NumericalError("solve_care: no convergence, residual " + std::to_string(res.residual));
  }
  const double lo = min_hermitian_eigenvalue(P);
  if (lo < -kCertifyTolerance * std::max(1.0, P.norm())) {
    throw NumericalError("solve_care: converged to a non-psd solution (min eigenvalue " + std::to_string(lo) + ")");
  }
  res.Pi = Operator(P);
  return res;
}

}  // namespace qctl

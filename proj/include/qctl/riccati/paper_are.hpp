#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "qctl/error.hpp"
#include "qctl/operator.hpp"

namespace qctl {

/// Coefficient convention of the stationary equation c1 i[H,Pi] + c2 Pi^2 + X^2 = 0.
enum class AreForm {
  paper,    // (i/2)[H,Pi] + Pi^2/4 + X^2 = 0, as stated
  derived,  // i[H,Pi] + Pi^2 + X^2 = 0, from F = -iH, Phi = L, Pi = L*L/2 in the dt-part
};

inline const char* to_string(AreForm f) { return f == AreForm::paper ? "paper" : "derived"; }

struct PaperAreOptions {
  AreForm form = AreForm::paper;
  double ridge = 1e-8;       // tie-break toward the smallest-norm minimizer
  int max_iterations = 5000;
  double gradient_tol = 1e-12;
};

struct PaperAreResult {
  bool feasible = false;         // true only for X = 0, with Pi = 0
  Operator Pi;                   // the solution, or the least-squares psd minimizer
  double residual = 0.0;         // ||c1 i[H,Pi] + c2 Pi^2 + X^2||_F at Pi
  double trace_obstruction = 0.0;  // tr(X^2); positive whenever X != 0
  double max_trace_identity = 0.0;  // max |tr(c1 i[H,Pi])| over every probed Pi
  int iterations = 0;
  AreForm form = AreForm::paper;
};

namespace detail {

inline void are_coefficients(AreForm f, double& c1, double& c2) {
  c1 = f == AreForm::paper ? 0.5 : 1.0;
  c2 = f == AreForm::paper ? 0.25 : 1.0;
}

inline Matrix psd_projection(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(a));
  const Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
  return hermitian_part(es.eigenvectors() * ev.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint());
}

}  // namespace detail

/// Residual matrix c1 i[H,Pi] + c2 Pi^2 + X^2.
inline Matrix paper_are_residual(const Matrix& H, const Matrix& X, const Matrix& Pi, AreForm form) {
  double c1, c2;
  detail::are_coefficients(form, c1, c2);
  return cplx(0.0, c1) * (H * Pi - Pi * H) + c2 * Pi * Pi + X * X;
}

/// |tr(c1 i[H,Pi])|, which vanishes for every Pi; taking the trace of the
/// equation therefore leaves c2 tr(Pi^2) + tr(X^2) = 0.
inline double trace_identity(const Matrix& H, const Matrix& Pi, AreForm form) {
  double c1, c2;
  detail::are_coefficients(form, c1, c2);
  return std::abs((cplx(0.0, c1) * (H * Pi - Pi * H)).trace());
}

/// Stationary equation of the unitary-flow problem. In finite dimension a
/// Hermitian solution forces tr(X^2) = -c2 tr(Pi^2) <= 0, so only X = 0 is
/// solvable (by Pi = 0). Otherwise an infeasibility certificate carrying
/// tr(X^2) is returned together with the projected-gradient least-squares
/// minimizer of the residual over the psd cone.
inline PaperAreResult solve_paper_are(const Operator& H_in, const Operator& X_in, const PaperAreOptions& opt = {}) {
  Operator::check_same_dim(H_in, X_in, "solve_paper_are");
  const Matrix H = certify_hermitian(H_in).matrix();
  const Matrix X = certify_hermitian(X_in).matrix();
  const Index n = H.rows();
  double c1, c2;
  detail::are_coefficients(opt.form, c1, c2);

  PaperAreResult res;
  res.form = opt.form;
  res.trace_obstruction = (X * X).trace().real();
  if (X.isZero(0.0)) {
    res.feasible = true;
    res.Pi = Operator::zero(n);
    res.residual = 0.0;
    return res;
  }

  auto objective = [&](const Matrix& P) {
    return paper_are_residual(H, X, P, opt.form).squaredNorm() + opt.ridge * P.squaredNorm();
  };
  auto gradient = [&](const Matrix& P) {
    const Matrix R = paper_are_residual(H, X, P, opt.form);
    return Matrix(hermitian_part(2.0 * (cplx(0.0, c1) * (R * H - H * R) + c2 * (R * P + P * R)) + 2.0 * opt.ridge * P));
  };

  Matrix P = Matrix::Zero(n, n);
  double val = objective(P);
  double step = 1.0;
  res.max_trace_identity = trace_identity(H, P, opt.form);
  for (int it = 0; it < opt.max_iterations; ++it) {
    const Matrix g = gradient(P);
    // Projected-gradient stationarity measure.
    const Matrix pg = P - detail::psd_projection(P - g);
    if (pg.norm() <= opt.gradient_tol) break;
    // Armijo backtracking along the projection arc.
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      const Matrix cand = detail::psd_projection(P - step * g);
      const double cv = objective(cand);
      res.max_trace_identity = std::max(res.max_trace_identity, trace_identity(H, cand, opt.form));
      const double decrease = 1e-4 / step * (cand - P).squaredNorm();
      if (cv <= val - decrease) {
        P = cand;
        val = cv;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    res.iterations = it + 1;
    if (!accepted) break;
    step = std::min(1.0, step * 2.0);
  }
  res.Pi = Operator(P);
  res.residual = paper_are_residual(H, X, P, opt.form).norm();
  return res;
}

}  // namespace qctl

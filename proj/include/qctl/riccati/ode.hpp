#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "qctl/error.hpp"
#include "qctl/flow/model.hpp"
#include "qctl/operator.hpp"
#include "qctl/riccati/cost.hpp"

namespace qctl {

struct RiccatiDiagnostics {
  double max_asymmetry = 0.0;  // largest ||Pi - Pi*||_F removed by symmetrization
  double min_eigenvalue = std::numeric_limits<double>::infinity();
  double noise_residual_dA = 0.0;     // max_t ||Pi Psi + Phi* Pi||_F
  double noise_residual_dAdag = 0.0;  // max_t ||Pi Phi + Psi* Pi||_F
};

/// Pi (and, once solved, r) at every node of the grid.
struct RiccatiTrajectory {
  TimeGrid grid;
  std::vector<Operator> Pi;
  std::vector<Operator> r;
  RiccatiDiagnostics diagnostics;
};

struct RiccatiOptions {
  double blowup_bound = 1e8;  // ||Pi||_F above this is reported as blow-up
};

namespace detail {

/// Constant coefficients of the deterministic Riccati right-hand side.
struct RiccatiCoefficients {
  Matrix F, Phi, Psi, G, S, Q;  // S = G R^-1 G*

  RiccatiCoefficients(const HPModel& model, const CostSpec& cost) {
    F = model.F().matrix();
    Phi = model.Phi().matrix();
    Psi = model.Psi().matrix();
    G = model.G().matrix();
    S = G * cost.R_inverse().matrix() * G.adjoint();
    Q = cost.Q.matrix();
  }

  /// P F + F* P + Phi* P Phi - P S P + Q.
  Matrix rhs(const Matrix& P) const {
    return P * F + F.adjoint() * P + Phi.adjoint() * P * Phi - P * S * P + Q;
  }
};

inline void check_common(const HPModel& model, const CostSpec& cost, const TimeGrid& grid) {
  model.validate();
  cost.validate();
  grid.validate();
  if (cost.dim() != model.dim()) throw DimensionError("cost and model dimensions differ");
}

}  // namespace detail

/// Integrates dPi/dt + Pi F + F* Pi + Phi* Pi Phi - Pi G R^-1 G* Pi + Q = 0
/// backward from Pi(T) = Q_T with RK4, symmetrizing after every step. The
/// noise-coefficient residuals are recorded, not enforced.
inline RiccatiTrajectory solve_riccati_ode(const HPModel& model, const CostSpec& cost, const TimeGrid& grid,
                                           const RiccatiOptions& opt = {}) {
  detail::check_common(model, cost, grid);
  const detail::RiccatiCoefficients c(model, cost);
  const double h = grid.dt();

  RiccatiTrajectory tr;
  tr.grid = grid;
  std::vector<Matrix> P(grid.nodes());
  P[grid.steps] = certify_psd(cost.QT).matrix();
  for (int k = grid.steps - 1; k >= 0; --k) {
    // s = T - t runs forward; dPi/ds = rhs(Pi).
    const Matrix& x = P[k + 1];
    const Matrix k1 = c.rhs(x);
    const Matrix k2 = c.rhs(x + 0.5 * h * k1);
    const Matrix k3 = c.rhs(x + 0.5 * h * k2);
    const Matrix k4 = c.rhs(x + h * k3);
    Matrix next = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    tr.diagnostics.max_asymmetry = std::max(tr.diagnostics.max_asymmetry, (next - next.adjoint()).norm());
    next = hermitian_part(next);
    const double n = next.norm();
    if (!std::isfinite(n) || n > opt.blowup_bound) {
      throw BlowUpError("Riccati solution blew up at t = " + std::to_string(grid.t(k)) + " (||Pi||_F = " +
                            std::to_string(n) + ")",
                        grid.t(k));
    }
    P[k] = std::move(next);
  }
  tr.Pi.reserve(P.size());
  for (Matrix& p : P) {
    auto& d = tr.diagnostics;
    d.min_eigenvalue = std::min(d.min_eigenvalue, min_hermitian_eigenvalue(p));
    d.noise_residual_dA = std::max(d.noise_residual_dA, (p * c.Psi + c.Phi.adjoint() * p).norm());
    d.noise_residual_dAdag = std::max(d.noise_residual_dAdag, (p * c.Phi + c.Psi.adjoint() * p).norm());
    tr.Pi.emplace_back(std::move(p));
  }
  return tr;
}

/// Forward orientation Pi(0) = Q_0, Pi' = Pi F + F* Pi + Phi* Pi Phi - Pi S Pi + Q,
/// obtained from the backward solver by reversing time (the coefficients are
/// constant).
inline RiccatiTrajectory solve_riccati_ode_forward(const HPModel& model, const CostSpec& cost, const TimeGrid& grid,
                                                   const RiccatiOptions& opt = {}) {
  CostSpec c = cost;
  c.QT = cost.initial_weight();
  RiccatiTrajectory tr = solve_riccati_ode(model, c, grid, opt);
  std::reverse(tr.Pi.begin(), tr.Pi.end());
  return tr;
}

/// Integrates dr/dt + (F - G R^-1 G* Pi)* r + Pi l + m* - Pi G R^-1 eta* = 0
/// backward from r(T) = m_T*, with l the affine drift. Pi at RK4 midpoints is
/// the cubic Hermite interpolant built from the Riccati right-hand side.
inline std::vector<Operator> solve_auxiliary_ode(const HPModel& model, const CostSpec& cost,
                                                 const RiccatiTrajectory& pi, const Operator& affine_drift,
                                                 const TimeGrid& grid) {
  detail::check_common(model, cost, grid);
  Operator::check_same_dim(model.H, affine_drift, "affine drift");
  if (pi.grid.steps != grid.steps || pi.grid.T != grid.T || static_cast<int>(pi.Pi.size()) != grid.nodes()) {
    throw ValidationError("solve_auxiliary_ode: Pi trajectory is on a different grid");
  }
  const detail::RiccatiCoefficients c(model, cost);
  const Matrix Rinv = cost.R_inverse().matrix();
  const Matrix GRinv = c.G * Rinv;
  const Matrix ell = affine_drift.matrix();
  const Matrix ms = cost.m.matrix().adjoint();
  const Matrix etas = cost.eta.matrix().adjoint();
  const double h = grid.dt();

  // dr/ds = (F - S Pi)* r + Pi l + m* - Pi G R^-1 eta*.
  auto rhs = [&](const Matrix& P, const Matrix& r) -> Matrix {
    return (c.F - c.S * P).adjoint() * r + P * ell + ms - P * GRinv * etas;
  };
  std::vector<Operator> out(grid.nodes());
  Matrix r = cost.mT.matrix().adjoint();
  out[grid.steps] = Operator(r);
  for (int k = grid.steps - 1; k >= 0; --k) {
    const Matrix& P1 = pi.Pi[k + 1].matrix();  // s start
    const Matrix& P0 = pi.Pi[k].matrix();      // s end
    // Hermite midpoint with dPi/dt = -rhs(Pi).
    const Matrix Pm = 0.5 * (P0 + P1) + (h / 8.0) * (-c.rhs(P0) + c.rhs(P1));
    const Matrix k1 = rhs(P1, r);
    const Matrix k2 = rhs(Pm, r + 0.5 * h * k1);
    const Matrix k3 = rhs(Pm, r + 0.5 * h * k2);
    const Matrix k4 = rhs(P0, r + h * k3);
    r = r + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    out[k] = Operator(r);
  }
  return out;
}

}  // namespace qctl

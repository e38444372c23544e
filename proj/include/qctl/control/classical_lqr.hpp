#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "qctl/error.hpp"
#include "qctl/flow/model.hpp"
#include "qctl/linalg.hpp"
#include "qctl/operator.hpp"
#include "qctl/random.hpp"
#include "qctl/riccati/cost.hpp"
#include "qctl/riccati/ode.hpp"

namespace qctl {

/// Noise-free instance: x = X xi with X' = F X + G u + L_drift, X(0) = C.
struct ClassicalLqrProblem {
  Operator F, G, L_drift, C;
  Vector xi;
  CostSpec cost;
  double T = 1.0;

  Index dim() const { return F.dim(); }

  void validate() const {
    if (F.dim() == 0) throw ValidationError("classical_lqr: F is empty");
    for (const Operator* o : {&G, &L_drift, &C}) Operator::check_same_dim(F, *o, "classical_lqr");
    if (xi.size() != F.dim()) throw DimensionError("classical_lqr: xi has the wrong dimension");
    cost.validate();
    if (cost.dim() != F.dim()) throw DimensionError("classical_lqr: cost and model dimensions differ");
    if (!(T > 0.0) || !std::isfinite(T)) throw ValidationError("classical_lqr: horizon must be positive");
  }

  /// The same coefficients as a model for the Riccati solvers (no noise).
  HPModel as_model() const {
    HPModel m;
    m.H = Operator::zero(dim());
    m.L = Operator::zero(dim());
    m.F_ = F;
    m.G_ = G;
    m.Psi_ = Operator::zero(dim());
    m.Phi_ = Operator::zero(dim());
    m.T = T;
    return m;
  }
};

struct ClassicalLqrReport {
  double feedback_cost = 0.0;      // closed loop u = -R^-1 (G* (Pi x + r xi) + eta* xi)
  double oracle_cost = 0.0;        // minimum of the time-discretized quadratic program
  double zero_control_cost = 0.0;  // u = 0
  double relative_gap = 0.0;       // |feedback - oracle| / max(1, |oracle|)
};

/// Random instance with Hurwitz F, affine drift and affine cost weights.
inline ClassicalLqrProblem random_classical_lqr(std::uint64_t seed, Index n, double T) {
  std::mt19937_64 rng = substream(seed, "classical_lqr");
  ClassicalLqrProblem p;
  Matrix f = random_gaussian(rng, n, n);
  const double shift = Eigen::ComplexEigenSolver<Matrix>(f).eigenvalues().real().maxCoeff() + 0.5;
  f -= shift * Matrix::Identity(n, n);
  p.F = Operator(f);
  p.G = Operator(random_gaussian(rng, n, n));
  p.L_drift = Operator(random_gaussian(rng, n, n, 0.5));
  p.C = Operator::identity(n);
  p.xi = random_unit_vector(rng, n);
  p.cost = CostSpec::zeros(n);
  p.cost.Q = Operator(random_psd(rng, n));
  p.cost.R = Operator(random_psd(rng, n) + 0.5 * Matrix::Identity(n, n));
  p.cost.m = Operator(random_gaussian(rng, n, n, 0.3));
  p.cost.eta = Operator(random_gaussian(rng, n, n, 0.3));
  p.cost.QT = Operator(random_psd(rng, n));
  p.cost.mT = Operator(random_gaussian(rng, n, n, 0.3));
  p.T = T;
  return p;
}

namespace detail {

/// Running integrand x*Qx + v*Rv + 2 Re(xi* m x) + 2 Re(xi* eta v).
inline double lqr_running(const ClassicalLqrProblem& p, const Vector& x, const Vector& v) {
  const CostSpec& c = p.cost;
  return (x.dot(c.Q.matrix() * x) + v.dot(c.R.matrix() * v)).real() +
         2.0 * (p.xi.dot(c.m.matrix() * x) + p.xi.dot(c.eta.matrix() * v)).real();
}

inline double lqr_terminal(const ClassicalLqrProblem& p, const Vector& x) {
  return x.dot(p.cost.QT.matrix() * x).real() + 2.0 * p.xi.dot(p.cost.mT.matrix() * x).real();
}

/// Cost of x' = F x + G v(t, x) + l by RK4, trapezoid quadrature on the grid.
/// `control(k, theta, x)` is the control at t_k + theta h.
template <class Control>
double lqr_closed_loop_cost(const ClassicalLqrProblem& p, const TimeGrid& grid, Control control) {
  const Matrix& F = p.F.matrix();
  const Matrix& G = p.G.matrix();
  const Vector ell = p.L_drift.matrix() * p.xi;
  const double h = grid.dt();
  auto f = [&](int k, double th, const Vector& x) -> Vector { return F * x + G * control(k, th, x) + ell; };
  Vector x = p.C.matrix() * p.xi;
  double cost = 0.5 * h * lqr_running(p, x, control(0, 0.0, x));
  for (int k = 0; k < grid.steps; ++k) {
    const Vector k1 = f(k, 0.0, x);
    const Vector k2 = f(k, 0.5, x + 0.5 * h * k1);
    const Vector k3 = f(k, 0.5, x + 0.5 * h * k2);
    const Vector k4 = f(k, 1.0, x + h * k3);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    const double w = k + 1 == grid.steps ? 0.5 : 1.0;
    cost += w * h * lqr_running(p, x, control(k + 1, 0.0, x));
  }
  return cost + lqr_terminal(p, x);
}

/// Exact minimum of the discretized problem: controls constant on each step,
/// states propagated exactly (zero-order hold), the same trapezoid weights on
/// the state cost and a rectangle rule on the control cost. Solved through the
/// KKT system of the equality-constrained quadratic program.
inline double lqr_oracle_cost(const ClassicalLqrProblem& p, const TimeGrid& grid) {
  const Index n = p.dim();
  const int N = grid.steps;
  const double h = grid.dt();
  const CostSpec& c = p.cost;

  Matrix aug = Matrix::Zero(2 * n + 1, 2 * n + 1);
  aug.block(0, 0, n, n) = p.F.matrix();
  aug.block(0, n, n, n) = p.G.matrix();
  aug.block(0, 2 * n, n, 1) = p.L_drift.matrix() * p.xi;
  const Matrix E = matrix_exp(Matrix(h * aug));
  const Matrix Ad = E.block(0, 0, n, n), Bd = E.block(0, n, n, n);
  const Vector cd = E.block(0, 2 * n, n, 1);

  // Unknowns: x_0..x_N, v_0..v_{N-1}, then multipliers for x_0 and each step.
  const Index nx = (N + 1) * n, nv = N * n, nz = nx + nv, nl = (N + 1) * n;
  auto xi_ = [&](int k) { return static_cast<Index>(k) * n; };
  auto vi_ = [&](int k) { return nx + static_cast<Index>(k) * n; };
  auto li_ = [&](int k) { return nz + static_cast<Index>(k) * n; };
  std::vector<Eigen::Triplet<cplx>> trip;
  Vector rhs = Vector::Zero(nz + nl);
  auto block = [&](Index r0, Index c0, const Matrix& b) {
    for (Index i = 0; i < b.rows(); ++i) {
      for (Index j = 0; j < b.cols(); ++j) {
        if (b(i, j) != cplx(0.0)) trip.emplace_back(r0 + i, c0 + j, b(i, j));
      }
    }
  };
  const Vector mxi = c.m.matrix().adjoint() * p.xi;
  const Vector exi = c.eta.matrix().adjoint() * p.xi;
  const Matrix id = Matrix::Identity(n, n);
  for (int k = 0; k <= N; ++k) {
    const double w = (k == 0 || k == N) ? 0.5 * h : h;
    Matrix hq = w * c.Q.matrix();
    Vector g = w * mxi;
    if (k == N) {
      hq += c.QT.matrix();
      g += c.mT.matrix().adjoint() * p.xi;
    }
    block(xi_(k), xi_(k), hq);
    rhs.segment(xi_(k), n) = -g;
  }
  for (int k = 0; k < N; ++k) {
    block(vi_(k), vi_(k), h * c.R.matrix());
    rhs.segment(vi_(k), n) = -h * exi;
  }
  // x_0 = C xi.
  block(li_(0), xi_(0), id);
  block(xi_(0), li_(0), id);
  rhs.segment(li_(0), n) = p.C.matrix() * p.xi;
  // x_{k+1} - Ad x_k - Bd v_k = cd.
  for (int k = 0; k < N; ++k) {
    const Index row = li_(k + 1);
    block(row, xi_(k + 1), id);
    block(row, xi_(k), -Ad);
    block(row, vi_(k), -Bd);
    block(xi_(k + 1), row, id);
    block(xi_(k), row, -Ad.adjoint());
    block(vi_(k), row, -Bd.adjoint());
    rhs.segment(row, n) = cd;
  }
  Eigen::SparseMatrix<cplx> K(nz + nl, nz + nl);
  K.setFromTriplets(trip.begin(), trip.end());
  Eigen::SparseLU<Eigen::SparseMatrix<cplx>> lu;
  lu.compute(K);
  if (lu.info() != Eigen::Success) throw NumericalError("classical_lqr: KKT factorization failed");
  const Vector z = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !z.allFinite()) throw NumericalError("classical_lqr: KKT solve failed");

  double cost = 0.0;
  for (int k = 0; k <= N; ++k) {
    const Vector x = z.segment(xi_(k), n);
    const double w = (k == 0 || k == N) ? 0.5 * h : h;
    cost += w * ((x.dot(c.Q.matrix() * x)).real() + 2.0 * p.xi.dot(c.m.matrix() * x).real());
    if (k < N) {
      const Vector v = z.segment(vi_(k), n);
      cost += h * ((v.dot(c.R.matrix() * v)).real() + 2.0 * p.xi.dot(c.eta.matrix() * v).real());
    }
  }
  return cost + lqr_terminal(p, z.segment(xi_(N), n));
}

}  // namespace detail

/// The Riccati feedback with all noise switched off, compared against the
/// brute-force minimum of the discretized problem.
inline ClassicalLqrReport classical_lqr_check(const ClassicalLqrProblem& p, const TimeGrid& grid) {
  p.validate();
  grid.validate();
  if (std::abs(grid.T - p.T) > 1e-12 * std::max(1.0, p.T)) throw ValidationError("classical_lqr: grid horizon differs");
  const HPModel model = p.as_model();
  const RiccatiTrajectory pi = solve_riccati_ode(model, p.cost, grid);
  const std::vector<Operator> r = solve_auxiliary_ode(model, p.cost, pi, p.L_drift, grid);
  const Matrix Rinv = p.cost.R_inverse().matrix();
  const Matrix Gs = p.G.matrix().adjoint();
  const Vector exi = p.cost.eta.matrix().adjoint() * p.xi;

  auto feedback = [&](int k, double th, const Vector& x) -> Vector {
    auto lerp = [&](const std::vector<Operator>& v) -> Matrix {
      if (th == 0.0) return v[k].matrix();
      return (1.0 - th) * v[k].matrix() + th * v[k + 1].matrix();
    };
    return -Rinv * (Gs * (lerp(pi.Pi) * x + lerp(r) * p.xi) + exi);
  };
  auto zero = [&](int, double, const Vector&) -> Vector { return Vector::Zero(p.dim()); };

  ClassicalLqrReport rep;
  rep.feedback_cost = detail::lqr_closed_loop_cost(p, grid, feedback);
  rep.zero_control_cost = detail::lqr_closed_loop_cost(p, grid, zero);
  rep.oracle_cost = detail::lqr_oracle_cost(p, grid);
  rep.relative_gap = std::abs(rep.feedback_cost - rep.oracle_cost) / std::max(1.0, std::abs(rep.oracle_cost));
  return rep;
}

}  // namespace qctl

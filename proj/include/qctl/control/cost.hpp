#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "qctl/control/gain.hpp"
#include "qctl/error.hpp"
#include "qctl/flow/model.hpp"
#include "qctl/flow/simulate.hpp"
#include "qctl/operator.hpp"

namespace qctl {

/// Imaginary part allowed in a reported cost, relative to max(1, |value|).
inline constexpr double kCostImagTolerance = 1e-10;

struct CostBreakdown {
  double running_state = 0.0;    // int of the X term
  double running_control = 0.0;  // int of the control-effort term
  double terminal = 0.0;
  double total() const { return running_state + running_control + terminal; }
};

/// Unset totals are NaN.
struct CostReport {
  double j_hat = std::numeric_limits<double>::quiet_NaN();
  double j = std::numeric_limits<double>::quiet_NaN();
  double j_tilde = std::numeric_limits<double>::quiet_NaN();
  CostBreakdown breakdown;  // of the functional that was evaluated
  std::optional<double> min_value_prediction;
  double max_imag_residue = 0.0;
};

namespace detail {

/// Real part of v after checking that its imaginary part is round-off.
inline double real_cost(cplx v, double& residue) {
  const double rel = std::abs(v.imag()) / std::max(1.0, std::abs(v.real()));
  residue = std::max(residue, rel);
  if (rel > kCostImagTolerance) {
    throw NumericalError("cost has an imaginary part " + std::to_string(v.imag()));
  }
  return v.real();
}

inline cplx trapezoid(const std::vector<cplx>& y, double h) {
  cplx s = 0.5 * (y.front() + y.back());
  for (std::size_t k = 1; k + 1 < y.size(); ++k) s += y[k];
  return h * s;
}

inline Operator square(const Operator& a) { return Operator(a.matrix().adjoint() * a.matrix()); }

}  // namespace detail

/// Cost of the unitary flow,
///   J_hat = int_0^T [ ||j_t(X) xi||^2 + ||j_t(L*L) xi||^2 / 4 ] dt + ||j_T(L) xi||^2 / 2,
/// through ||j_t(Y) xi||^2 = <xi, j_t(Y*Y) xi> (which also covers non-Hermitian X).
/// Trapezoid quadrature on the grid.
inline CostReport eval_cost_flow(const HPModel& model, const Operator& X, const ExpVectorState& state,
                                 const TimeGrid& grid, const FlowOptions& opt = {}) {
  Operator::check_same_dim(model.H, X, "eval_cost_flow");
  const Operator lsl = detail::square(model.L);
  const Trajectories tr = flow_expectations(model, state, {detail::square(X), detail::square(lsl), lsl}, grid, opt);
  CostReport rep;
  const double h = grid.dt();
  rep.breakdown.running_state = detail::real_cost(detail::trapezoid(tr.values[0], h), rep.max_imag_residue);
  rep.breakdown.running_control = 0.25 * detail::real_cost(detail::trapezoid(tr.values[1], h), rep.max_imag_residue);
  rep.breakdown.terminal = 0.5 * detail::real_cost(tr.values[2].back(), rep.max_imag_residue);
  rep.j_hat = rep.breakdown.total();
  return rep;
}

/// Cost of a unitary flow driven by the control u_t = B U_t,
///   J = int_0^T [ ||j_t(X) xi||^2 + ||u_t xi||^2 ] dt + <xi, j_T(M) xi>,
/// with ||u_t xi||^2 = <xi, U_t* B*B U_t xi>.
inline CostReport eval_cost_definition(const HPModel& model, const Operator& X, const Operator& B, const Operator& M,
                                       const ExpVectorState& state, const TimeGrid& grid,
                                       const FlowOptions& opt = {}) {
  Operator::check_same_dim(model.H, X, "eval_cost_definition");
  Operator::check_same_dim(model.H, B, "eval_cost_definition");
  Operator::check_same_dim(model.H, M, "eval_cost_definition");
  const Trajectories tr = flow_expectations(model, state, {detail::square(X), detail::square(B), M}, grid, opt);
  CostReport rep;
  const double h = grid.dt();
  rep.breakdown.running_state = detail::real_cost(detail::trapezoid(tr.values[0], h), rep.max_imag_residue);
  rep.breakdown.running_control = detail::real_cost(detail::trapezoid(tr.values[1], h), rep.max_imag_residue);
  rep.breakdown.terminal = detail::real_cost(tr.values[2].back(), rep.max_imag_residue);
  rep.j = rep.breakdown.total();
  return rep;
}

/// Controlled cost
///   J_tilde = int_0^T [ S_t(X*X) + S_t(K(t)*K(t)) ] dt + S_T(M),
/// S_t(Y) = <U_t xi, Y U_t xi> for dU = (F + K) U dt + Psi U dA + Phi U dAdag.
/// The affine part of the gains is not applied. Optimal gains also carry the
/// predicted minimum <xi, Pi(0) xi>.
inline CostReport eval_cost_controlled(const HPModel& model, const GainSchedule& gains, const Operator& X,
                                       const Operator& M, const ExpVectorState& state, const TimeGrid& grid,
                                       bool experimental_non_vacuum = false) {
  gains.validate(model.dim());
  if (gains.grid.steps != grid.steps || gains.grid.T != grid.T) {
    throw ValidationError("eval_cost_controlled: gains are on a different grid");
  }
  Operator::check_same_dim(model.H, X, "eval_cost_controlled");
  Operator::check_same_dim(model.H, M, "eval_cost_controlled");
  if (!model.G().matrix().isIdentity(0.0)) throw ValidationError("eval_cost_controlled: needs G = I (u enters the drift directly)");
  detail::check_sandwich_inputs(model, gains.K, grid, state, experimental_non_vacuum);
  const Matrix xsx = detail::square(X).matrix();
  std::vector<cplx> state_term(grid.nodes()), control_term(grid.nodes());
  cplx terminal = 0.0;
  detail::controlled_sandwich_states(model, gains.K, grid, state, experimental_non_vacuum, grid,
                                     [&](int k, const Matrix& rho) {
                                       const Matrix& K = gains.K[k].matrix();
                                       state_term[k] = (rho * xsx).trace();
                                       control_term[k] = (rho * (K.adjoint() * K)).trace();
                                       if (k == grid.steps) terminal = (rho * M.matrix()).trace();
                                     });
  CostReport rep;
  const double h = grid.dt();
  rep.breakdown.running_state = detail::real_cost(detail::trapezoid(state_term, h), rep.max_imag_residue);
  rep.breakdown.running_control = detail::real_cost(detail::trapezoid(control_term, h), rep.max_imag_residue);
  rep.breakdown.terminal = detail::real_cost(terminal, rep.max_imag_residue);
  rep.j_tilde = rep.breakdown.total();
  if (gains.provenance == GainProvenance::optimal && gains.Pi0) {
    const double n2 = state.norm_squared(grid.T);
    rep.min_value_prediction =
        n2 * detail::real_cost(state.xi0.dot(gains.Pi0->matrix() * state.xi0), rep.max_imag_residue);
  }
  return rep;
}

struct Lemma1Report {
  double j_hat = 0.0, j = 0.0, j_tilde = 0.0;
  double max_deviation = 0.0;  // largest pairwise |difference|
};

/// The three costs of the unitary flow with M = L*L/2 and u_t = -L*L U_t / 2.
/// J_hat and J come from the flow simulator; J_tilde from the controlled
/// sandwich with F = -iH, Phi = L, Psi = -L*, K = -L*L/2.
inline Lemma1Report lemma1_check(const HPModel& model, const Operator& X, const ExpVectorState& state,
                                 const TimeGrid& grid) {
  if (!model.is_hudson_parthasarathy()) throw ValidationError("lemma1_check: model must be in the unitary form");
  const Matrix lsl = model.L.matrix().adjoint() * model.L.matrix();
  const Operator M(0.5 * lsl);
  const Operator B(-0.5 * lsl);

  Lemma1Report rep;
  rep.j_hat = eval_cost_flow(model, X, state, grid).j_hat;
  rep.j = eval_cost_definition(model, X, B, M, state, grid).j;

  HPModel controlled = model;
  controlled.F_ = Operator(cplx(0.0, -1.0) * model.H.matrix());
  controlled.Phi_ = model.L;
  controlled.Psi_ = -adjoint(model.L);
  const GainSchedule gains = GainSchedule::constant(grid, B);
  rep.j_tilde = eval_cost_controlled(controlled, gains, X, M, state, grid, !state.vacuum()).j_tilde;

  rep.max_deviation = std::max({std::abs(rep.j_hat - rep.j), std::abs(rep.j_hat - rep.j_tilde),
                                std::abs(rep.j - rep.j_tilde)});
  return rep;
}

}  // namespace qctl

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "qctl/error.hpp"
#include "qctl/flow/model.hpp"
#include "qctl/operator.hpp"

namespace qctl {

/// Sampled expectation trajectories: values[observable][node].
struct Trajectories {
  std::vector<double> t;
  std::vector<std::vector<cplx>> values;

  double max_abs_diff(const Trajectories& o) const {
    if (values.size() != o.values.size()) throw DimensionError("trajectories: observable count differs");
    double d = 0.0;
    for (std::size_t j = 0; j < values.size(); ++j) {
      if (values[j].size() != o.values[j].size()) throw DimensionError("trajectories: node count differs");
      for (std::size_t k = 0; k < values[j].size(); ++k) d = std::max(d, std::abs(values[j][k] - o.values[j][k]));
    }
    return d;
  }

  /// Every `factor`-th node (used to compare a refined run with a coarse one).
  Trajectories subsample(int factor) const {
    Trajectories out;
    for (std::size_t k = 0; k < t.size(); k += factor) out.t.push_back(t[k]);
    out.values.resize(values.size());
    for (std::size_t j = 0; j < values.size(); ++j) {
      for (std::size_t k = 0; k < values[j].size(); k += factor) out.values[j].push_back(values[j][k]);
    }
    return out;
  }
};

/// theta0(Y) = i[H,Y] - (L*L Y + Y L*L - 2 L* Y L)/2.
inline Operator heisenberg_drift(const HPModel& model, const Operator& Y) {
  Operator::check_same_dim(model.H, Y, "heisenberg_drift");
  const Matrix& h = model.H.matrix();
  const Matrix& l = model.L.matrix();
  const Matrix& y = Y.matrix();
  const Matrix lsl = l.adjoint() * l;
  return Operator(cplx(0.0, 1.0) * (h * y - y * h) - 0.5 * (lsl * y + y * lsl - 2.0 * l.adjoint() * y * l));
}

/// Which generator flow_expectations integrates. Only `standard` is the
/// flow; the others exist so tests can show that the oracle rejects them.
enum class GeneratorVariant {
  standard,         // m' = m(theta0(Y) + f [L*,Y] + conj(f) [Y,L])
  swapped_f_terms,  // m' = m(theta0(Y) + conj(f) [L*,Y] + f [Y,L])
  no_jump_term,     // theta0 without the 2 L* Y L term
};

struct FlowOptions {
  GeneratorVariant variant = GeneratorVariant::standard;
  /// When set, the run is repeated on the doubled grid and GridTooCoarseError
  /// is thrown if any sample moves by more than refinement_tol.
  bool check_refinement = false;
  double refinement_tol = 1e-8;
};

namespace detail {

/// Right-hand side of a linear matrix ODE on the interval (a, b), on which
/// all piecewise-constant data are constant.
using MatrixRhs = std::function<Matrix(const Matrix&, double t, double a, double b)>;

inline Matrix rk4_step(const MatrixRhs& f, const Matrix& x, double t, double h, double a, double b) {
  const Matrix k1 = f(x, t, a, b);
  const Matrix k2 = f(x + 0.5 * h * k1, t + 0.5 * h, a, b);
  const Matrix k3 = f(x + 0.5 * h * k2, t + 0.5 * h, a, b);
  const Matrix k4 = f(x + h * k3, t + h, a, b);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Forward RK4 over the grid, splitting each step at the jumps of f so that
/// every sub-step sees constant data. `visit` is called at every node.
inline void integrate_forward(const MatrixRhs& f, Matrix x, const TimeGrid& grid, const PiecewiseConstant& fn,
                              const std::function<void(int, const Matrix&)>& visit) {
  visit(0, x);
  for (int k = 0; k < grid.steps; ++k) {
    const double t0 = grid.t(k), t1 = grid.t(k + 1);
    std::vector<double> cuts = fn.jumps_in(t0, t1);
    cuts.insert(cuts.begin(), t0);
    cuts.push_back(t1);
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      x = rk4_step(f, x, cuts[i], cuts[i + 1] - cuts[i], cuts[i], cuts[i + 1]);
    }
    visit(k + 1, x);
  }
}

inline Matrix initial_density(const ExpVectorState& state, double T) {
  return state.norm_squared(T) * (state.xi0 * state.xi0.adjoint());
}

inline void check_state(const HPModel& model, const ExpVectorState& state, const TimeGrid& grid) {
  state.validate();
  if (state.dim() != model.dim()) throw DimensionError("state dimension does not match the model");
  state.f.check_within(grid.T);
}

inline Trajectories sample(const TimeGrid& grid, const std::vector<Operator>& obs,
                           const std::function<void(const std::function<void(int, const Matrix&)>&)>& run) {
  Trajectories tr;
  tr.t.resize(grid.nodes());
  tr.values.assign(obs.size(), std::vector<cplx>(grid.nodes()));
  run([&](int k, const Matrix& rho) {
    tr.t[k] = grid.t(k);
    for (std::size_t j = 0; j < obs.size(); ++j) tr.values[j][k] = (rho * obs[j].matrix()).trace();
  });
  return tr;
}

inline void check_observables(const HPModel& model, const std::vector<Operator>& obs) {
  for (const auto& y : obs) Operator::check_same_dim(model.H, y, "observable");
}

template <class Run>
Trajectories with_refinement(const FlowOptions& opt, const TimeGrid& grid, Run run) {
  Trajectories coarse = run(grid);
  if (opt.check_refinement) {
    const Trajectories fine = run(grid.refined(2)).subsample(2);
    const double delta = coarse.max_abs_diff(fine);
    if (delta > opt.refinement_tol) {
      throw GridTooCoarseError("grid too coarse: step halving moved the output by " + std::to_string(delta), delta);
    }
  }
  return coarse;
}

}  // namespace detail

/// Expectations m_t(Y) = <xi, j_t(Y) xi> for xi = c xi0 (x) psi(f), unitary
/// (Hudson-Parthasarathy) model. Integrated in the Schroedinger picture,
///   rho' = -i[H,rho] + L rho L* - {L*L, rho}/2 + f [rho, L*] + conj(f) [L, rho],
/// rho_0 = |c|^2 exp(||f||^2) xi0 xi0*, m_t(Y) = tr(rho_t Y), which is the
/// adjoint of the Heisenberg reduction m' = m(theta0(Y) + f[L*,Y] + conj(f)[Y,L]).
inline Trajectories flow_expectations(const HPModel& model, const ExpVectorState& state,
                                      const std::vector<Operator>& observables, const TimeGrid& grid,
                                      const FlowOptions& opt = {}) {
  model.validate();
  grid.validate();
  detail::check_state(model, state, grid);
  detail::check_observables(model, observables);
  if (!model.is_hudson_parthasarathy()) {
    throw ValidationError("flow_expectations: model must be in the unitary (Hudson-Parthasarathy) form");
  }
  const cplx I(0.0, 1.0);
  const Matrix h = model.H.matrix();
  const Matrix l = model.L.matrix();
  const Matrix ls = l.adjoint();
  const Matrix lsl = ls * l;
  const Matrix rho0 = detail::initial_density(state, grid.T);
  const double jump = opt.variant == GeneratorVariant::no_jump_term ? 0.0 : 1.0;
  const bool swapped = opt.variant == GeneratorVariant::swapped_f_terms;

  auto rhs = [&](const Matrix& rho, double, double a, double b) -> Matrix {
    Matrix out = -I * (h * rho - rho * h) + jump * (l * rho * ls) - 0.5 * (lsl * rho + rho * lsl);
    cplx fv = state.f.on_interval(a, b);
    if (fv != cplx(0.0)) {
      if (swapped) fv = std::conj(fv);
      out += fv * (rho * ls - ls * rho) + std::conj(fv) * (l * rho - rho * l);
    }
    return out;
  };
  return detail::with_refinement(opt, grid, [&](const TimeGrid& g) {
    return detail::sample(g, observables, [&](const auto& visit) {
      detail::integrate_forward(rhs, rho0, g, state.f, visit);
    });
  });
}

namespace detail {

/// Vacuum-reduced state rho_t of the controlled evolution on grid g, with
/// the gains K given on `coarse` and linearly interpolated.
inline void controlled_sandwich_states(const HPModel& model, const std::vector<Operator>& K, const TimeGrid& coarse,
                                       const ExpVectorState& state, bool non_vacuum, const TimeGrid& g,
                                       const std::function<void(int, const Matrix&)>& visit) {
  const Matrix F = model.F().matrix();
  const Matrix Phi = model.Phi().matrix();
  const Matrix Psi = model.Psi().matrix();
  const double hc = coarse.dt();
  auto gain = [&](double t) -> Matrix {
    const double s = std::clamp(t / hc, 0.0, static_cast<double>(coarse.steps));
    const int k = std::min(static_cast<int>(std::floor(s)), coarse.steps - 1);
    const double th = s - k;
    return (1.0 - th) * K[k].matrix() + th * K[k + 1].matrix();
  };
  auto rhs = [&](const Matrix& rho, double t, double a, double b) -> Matrix {
    const Matrix A = F + gain(t);
    Matrix out = A * rho + rho * A.adjoint() + Phi * rho * Phi.adjoint();
    if (non_vacuum) {
      const cplx fv = state.f.on_interval(a, b);
      if (fv != cplx(0.0)) {
        out += fv * (Psi * rho + rho * Phi.adjoint()) + std::conj(fv) * (rho * Psi.adjoint() + Phi * rho);
      }
    }
    return out;
  };
  integrate_forward(rhs, initial_density(state, g.T), g, state.f, visit);
}

inline void check_sandwich_inputs(const HPModel& model, const std::vector<Operator>& K, const TimeGrid& grid,
                                  const ExpVectorState& state, bool experimental_non_vacuum) {
  model.validate();
  grid.validate();
  check_state(model, state, grid);
  if (static_cast<int>(K.size()) != grid.nodes()) {
    throw ValidationError("controlled_sandwich_flow: need one gain per grid node (" + std::to_string(grid.nodes()) +
                          "), got " + std::to_string(K.size()));
  }
  for (const auto& k : K) Operator::check_same_dim(model.H, k, "gain");
  if (!state.vacuum() && !experimental_non_vacuum) {
    throw ValidationError("controlled_sandwich_flow: non-vacuum states need the experimental flag");
  }
}

}  // namespace detail

/// Sandwich expectations S_t(Y) = <xi, U_t* Y U_t xi> for the controlled
/// evolution dU = (F + K(t)) U dt + Psi U dA + Phi U dAdag. In the vacuum
///   rho' = (F+K) rho + rho (F+K)* + Phi rho Phi*,  S_t(Y) = tr(rho_t Y),
/// K linearly interpolated between grid nodes. With experimental_non_vacuum
/// the exponential-vector terms f (Psi rho + rho Phi*) + conj(f) (rho Psi* + Phi rho)
/// are added.
inline Trajectories controlled_sandwich_flow(const HPModel& model, const std::vector<Operator>& K,
                                             const TimeGrid& grid, const std::vector<Operator>& observables,
                                             const ExpVectorState& state, const FlowOptions& opt = {},
                                             bool experimental_non_vacuum = false) {
  detail::check_sandwich_inputs(model, K, grid, state, experimental_non_vacuum);
  detail::check_observables(model, observables);
  return detail::with_refinement(opt, grid, [&](const TimeGrid& g) {
    return detail::sample(g, observables, [&](const auto& visit) {
      detail::controlled_sandwich_states(model, K, grid, state, experimental_non_vacuum, g, visit);
    });
  });
}

struct UnitarityReport {
  double residual = 0.0;            // max_t |m_t(I) - ||xi||^2| / ||xi||^2
  double hermiticity_drift = 0.0;   // max_t ||rho_t - rho_t*||_F / ||rho_t||_F
};

/// Conservation check of the flow: m_t(I) must stay at ||xi||^2 (= 1 for the
/// normalized vacuum state).
inline UnitarityReport unitarity_residual(const HPModel& model, const ExpVectorState& state, const TimeGrid& grid,
                                          const FlowOptions& opt = {}) {
  model.validate();
  grid.validate();
  detail::check_state(model, state, grid);
  const Operator id = Operator::identity(model.dim());
  const double n2 = state.norm_squared(grid.T);
  const Trajectories tr = flow_expectations(model, state, {id}, grid, FlowOptions{opt.variant, false, 0.0});
  UnitarityReport rep;
  for (cplx v : tr.values[0]) rep.residual = std::max(rep.residual, std::abs(v - n2) / n2);

  // Hermiticity of the evolved state (equivalently of j_t(Y) for Hermitian Y).
  const cplx I(0.0, 1.0);
  const Matrix h = model.H.matrix(), l = model.L.matrix(), ls = l.adjoint(), lsl = ls * l;
  auto rhs = [&](const Matrix& rho, double, double a, double b) -> Matrix {
    Matrix out = -I * (h * rho - rho * h) + l * rho * ls - 0.5 * (lsl * rho + rho * lsl);
    const cplx fv = state.f.on_interval(a, b);
    if (fv != cplx(0.0)) out += fv * (rho * ls - ls * rho) + std::conj(fv) * (l * rho - rho * l);
    return out;
  };
  detail::integrate_forward(rhs, detail::initial_density(state, grid.T), grid, state.f, [&](int, const Matrix& rho) {
    const double n = rho.norm();
    if (n > 0.0) rep.hermiticity_drift = std::max(rep.hermiticity_drift, (rho - rho.adjoint()).norm() / n);
  });
  return rep;
}

}  // namespace qctl

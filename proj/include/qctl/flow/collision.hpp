#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "qctl/error.hpp"
#include "qctl/flow/model.hpp"
#include "qctl/flow/simulate.hpp"
#include "qctl/linalg.hpp"

namespace qctl {

/// Number of retained mode levels of the collision oracle.
inline constexpr int kCollisionLevels = 4;
inline constexpr double kLeakageThreshold = 1e-6;

struct CollisionResult {
  Trajectories trajectories;
  double max_leakage = 0.0;  // largest relative population of the top mode level
  bool leakage_warning = false;
};

namespace detail {

/// Truncated coherent state sum_k alpha^k / sqrt(k!) |k>, renormalized.
inline Vector truncated_coherent(cplx alpha, int levels) {
  Vector v(levels);
  cplx term = 1.0;
  for (int k = 0; k < levels; ++k) {
    v(k) = term;
    term *= alpha / std::sqrt(static_cast<double>(k + 1));
  }
  return v / v.norm();
}

}  // namespace detail

/// Repeated-interaction discretization of the unitary evolution: each step
/// couples the system to a fresh `levels`-level bosonic mode prepared in the
/// truncated coherent state with amplitude (integral of f over the slice)/sqrt(dt),
/// applies exp(-iH dt (x) I + sqrt(dt) (L (x) a^dag - L* (x) a)) and traces the
/// mode out. First order in dt.
inline CollisionResult collision_oracle(const HPModel& model, const ExpVectorState& state,
                                        const std::vector<Operator>& observables, const TimeGrid& grid,
                                        int levels = kCollisionLevels) {
  model.validate();
  grid.validate();
  detail::check_state(model, state, grid);
  detail::check_observables(model, observables);
  if (!model.is_hudson_parthasarathy()) {
    throw ValidationError("collision_oracle: model must be in the unitary (Hudson-Parthasarathy) form");
  }
  if (levels < 2) throw ValidationError("collision_oracle: need at least 2 mode levels");

  const Index d = model.dim();
  const Index n = levels;
  const double h = grid.dt();
  const double sh = std::sqrt(h);
  Matrix a = Matrix::Zero(n, n);  // annihilation, a|k> = sqrt(k)|k-1>
  for (Index k = 1; k < n; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
  const Matrix In = Matrix::Identity(n, n);
  const Matrix& H = model.H.matrix();
  const Matrix& L = model.L.matrix();
  const Matrix gen = kron(-cplx(0.0, 1.0) * h * H, In) + sh * (kron(L, a.adjoint()) - kron(L.adjoint(), a));
  const Matrix U = matrix_exp(gen);
  const Matrix Ud = U.adjoint();

  CollisionResult res;
  Matrix rho = state.xi0 * state.xi0.adjoint();
  const double scale = state.norm_squared(grid.T);
  res.trajectories.t.resize(grid.nodes());
  res.trajectories.values.assign(observables.size(), std::vector<cplx>(grid.nodes()));
  auto record = [&](int k) {
    res.trajectories.t[k] = grid.t(k);
    for (std::size_t j = 0; j < observables.size(); ++j) {
      res.trajectories.values[j][k] = scale * (rho * observables[j].matrix()).trace();
    }
  };
  record(0);
  for (int k = 0; k < grid.steps; ++k) {
    const cplx alpha = state.f.integral(grid.t(k), grid.t(k + 1)) / sh;
    const Vector c = detail::truncated_coherent(alpha, levels);
    const Matrix joint = U * kron(rho, c * c.adjoint()) * Ud;
    Matrix next = Matrix::Zero(d, d);
    double top = 0.0;
    for (Index i = 0; i < d; ++i) {
      for (Index j = 0; j < d; ++j) {
        cplx s = 0.0;
        for (Index m = 0; m < n; ++m) s += joint(i * n + m, j * n + m);
        next(i, j) = s;
      }
      top += joint(i * n + n - 1, i * n + n - 1).real();
    }
    const double tr = next.trace().real();
    if (tr > 0.0) res.max_leakage = std::max(res.max_leakage, top / tr);
    rho = next;
    record(k + 1);
  }
  res.leakage_warning = res.max_leakage > kLeakageThreshold;
  return res;
}

}  // namespace qctl

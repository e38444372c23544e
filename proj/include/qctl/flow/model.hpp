#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "qctl/error.hpp"
#include "qctl/operator.hpp"

namespace qctl {

/// Default resolution of every time integrator.
inline constexpr int kStepsPerUnitTime = 2000;

/// Uniform grid on [0, T].
struct TimeGrid {
  double T = 1.0;
  int steps = kStepsPerUnitTime;

  TimeGrid() = default;
  TimeGrid(double horizon, int n) : T(horizon), steps(n) { validate(); }

  /// Default resolution for the horizon: kStepsPerUnitTime steps per unit time.
  static TimeGrid for_horizon(double horizon, int per_unit = kStepsPerUnitTime) {
    return TimeGrid(horizon, std::max(1, static_cast<int>(std::ceil(horizon * per_unit - 1e-9))));
  }

  double dt() const { return T / steps; }
  double t(int k) const { return k == steps ? T : k * dt(); }
  int nodes() const { return steps + 1; }
  TimeGrid refined(int factor = 2) const { return TimeGrid(T, steps * factor); }

  void validate() const {
    if (!(T > 0.0) || !std::isfinite(T)) throw ValidationError("time grid: horizon T must be positive");
    if (steps < 1) throw ValidationError("time grid: steps must be >= 1");
  }
};

/// f(t) = values[i] on [breakpoints[i], breakpoints[i+1]), zero elsewhere.
class PiecewiseConstant {
 public:
  PiecewiseConstant() = default;
  PiecewiseConstant(std::vector<double> breakpoints, std::vector<cplx> values)
      : b_(std::move(breakpoints)), v_(std::move(values)) {
    if (b_.empty() && v_.empty()) return;
    if (b_.size() != v_.size() + 1) {
      throw ValidationError("piecewise-constant function: need one more breakpoint than values");
    }
    for (std::size_t i = 0; i + 1 < b_.size(); ++i) {
      if (!(b_[i] < b_[i + 1])) throw ValidationError("piecewise-constant function: breakpoints must increase strictly");
    }
    if (b_.front() < 0.0) throw ValidationError("piecewise-constant function: breakpoints must be >= 0");
  }

  /// Constant c on [0, T].
  static PiecewiseConstant constant(cplx c, double T) { return PiecewiseConstant({0.0, T}, {c}); }

  const std::vector<double>& breakpoints() const { return b_; }
  const std::vector<cplx>& values() const { return v_; }

  bool is_zero() const {
    for (cplx v : v_) {
      if (v != cplx(0.0)) return false;
    }
    return true;
  }

  cplx operator()(double t) const {
    for (std::size_t i = 0; i < v_.size(); ++i) {
      if (t >= b_[i] && t < b_[i + 1]) return v_[i];
    }
    return 0.0;
  }

  /// Value on the open interval (a, b) when f has no jump there.
  cplx on_interval(double a, double b) const { return (*this)(0.5 * (a + b)); }

  /// Integral of f over [a, b].
  cplx integral(double a, double b) const {
    cplx s = 0.0;
    for (std::size_t i = 0; i < v_.size(); ++i) {
      const double lo = std::max(a, b_[i]), hi = std::min(b, b_[i + 1]);
      if (hi > lo) s += v_[i] * (hi - lo);
    }
    return s;
  }

  /// Integral of |f|^2 over [0, T].
  double norm_squared(double T) const {
    double s = 0.0;
    for (std::size_t i = 0; i < v_.size(); ++i) {
      const double lo = std::max(0.0, b_[i]), hi = std::min(T, b_[i + 1]);
      if (hi > lo) s += std::norm(v_[i]) * (hi - lo);
    }
    return s;
  }

  /// Breakpoints strictly inside (a, b).
  std::vector<double> jumps_in(double a, double b) const {
    std::vector<double> out;
    for (double x : b_) {
      if (x > a && x < b) out.push_back(x);
    }
    return out;
  }

  void check_within(double T) const {
    if (!b_.empty() && b_.back() > T * (1.0 + 1e-12)) {
      throw ValidationError("piecewise-constant function: breakpoints must lie in [0, T]");
    }
  }

 private:
  std::vector<double> b_;
  std::vector<cplx> v_;
};

/// c * xi0 (x) psi(f) with xi0 a unit vector and psi(f) the unnormalized
/// exponential vector, <psi(f), psi(f)> = exp(||f||^2).
struct ExpVectorState {
  Vector xi0;
  cplx amplitude = 1.0;
  PiecewiseConstant f;

  ExpVectorState() = default;
  explicit ExpVectorState(Vector x, PiecewiseConstant fn = {}, cplx c = 1.0)
      : xi0(std::move(x)), amplitude(c), f(std::move(fn)) {
    validate();
  }

  /// Accepts any nonzero vector; the norm moves into the amplitude.
  static ExpVectorState from_vector(const Vector& v, PiecewiseConstant fn = {}) {
    const double n = v.norm();
    if (!(n > 0.0)) throw ValidationError("state: xi0 must be nonzero");
    return ExpVectorState(v / n, std::move(fn), n);
  }

  bool vacuum() const { return f.is_zero(); }
  Index dim() const { return xi0.size(); }

  /// ||xi||^2 = |c|^2 exp(||f||^2).
  double norm_squared(double T) const { return std::norm(amplitude) * std::exp(f.norm_squared(T)); }

  void validate() const {
    if (xi0.size() == 0) throw ValidationError("state: xi0 is empty");
    if (std::abs(xi0.norm() - 1.0) > 1e-12) throw ValidationError("state: xi0 must be a unit vector");
  }
};

/// Coefficients of dU = (F U + u) dt + Psi U dA + Phi U dAdag. Without
/// explicit F, G, Psi, Phi the Hudson-Parthasarathy form is used:
/// F = -(iH + L*L/2), G = I, Psi = -L*, Phi = L.
struct HPModel {
  Operator H;
  Operator L;
  std::optional<Operator> F_, G_, Psi_, Phi_;
  double T = 1.0;

  HPModel() = default;
  HPModel(Operator h, Operator l, double horizon) : H(std::move(h)), L(std::move(l)), T(horizon) { validate(); }

  Index dim() const { return H.dim(); }

  Operator F() const {
    if (F_) return *F_;
    return Operator(-(cplx(0.0, 1.0) * H.matrix() + 0.5 * L.matrix().adjoint() * L.matrix()));
  }
  Operator G() const { return G_ ? *G_ : Operator::identity(dim()); }
  Operator Psi() const { return Psi_ ? *Psi_ : -adjoint(L); }
  Operator Phi() const { return Phi_ ? *Phi_ : L; }

  /// True when F, Psi, Phi are the defaults, i.e. the unitary evolution.
  bool is_hudson_parthasarathy() const { return !F_ && !Psi_ && !Phi_; }

  void validate() const {
    if (H.dim() == 0) throw ValidationError("model: H is empty");
    Operator::check_same_dim(H, L, "model (H, L)");
    certify_hermitian(H);
    for (const auto* o : {&F_, &G_, &Psi_, &Phi_}) {
      if (*o) Operator::check_same_dim(H, **o, "model coefficient");
    }
    if (!(T > 0.0) || !std::isfinite(T)) throw ValidationError("model: horizon T must be positive");
  }
};

}  // namespace qctl

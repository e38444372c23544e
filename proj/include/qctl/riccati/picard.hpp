#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "qctl/error.hpp"
#include "qctl/flow/model.hpp"
#include "qctl/riccati/cost.hpp"
#include "qctl/riccati/ode.hpp"

namespace qctl {

struct PicardResult {
  std::vector<std::vector<Operator>> iterates;  // iterates[n-1] = Pi_n on the grid, Pi_1 = Q_0
  /// decrease[n-1] = min over t of the smallest eigenvalue of Pi_n - Pi_{n+1}.
  std::vector<double> decrease;
  /// step[n-1] = max over t of ||Pi_n - Pi_{n+1}||_F.
  std::vector<double> step;
  double min_iterate_eigenvalue = std::numeric_limits<double>::infinity();

  const std::vector<Operator>& last() const { return iterates.back(); }
};

struct PicardOptions {
  double psd_tolerance = 1e-8;  // a more negative eigenvalue of an iterate is an error
  double stop_step = 0.0;       // stop early once max_t ||Pi_n - Pi_{n+1}||_F <= stop_step
};

/// Forward (Pi(0) = Q_0) iteration
///   Pi_{n+1}(t) = K_n(t,0) Q_0 + int_0^t K_n(t,s) (Q + Pi_n S Pi_n)(s) ds,
/// where K_n(t,s) is the propagator of the linear equation
///   P' = A_n* P + P A_n + Phi* P Phi,  A_n = F - S Pi_n,  S = G R^-1 G*.
/// With Phi = 0 the propagator is the sandwich K Q K*. The integral over each
/// step uses Simpson's rule and the propagators are RK4 half steps; Pi_n off
/// the grid comes from cubic Lagrange interpolation through four nodes.
inline PicardResult picard_iterate(const HPModel& model, const CostSpec& cost, const TimeGrid& grid, int n_iters,
                                   const PicardOptions& opt = {}) {
  detail::check_common(model, cost, grid);
  if (n_iters < 1) throw ValidationError("picard_iterate: need at least one iteration");
  const detail::RiccatiCoefficients c(model, cost);
  const double h = grid.dt();
  const Operator Q0 = certify_psd(cost.initial_weight());

  PicardResult res;
  res.iterates.emplace_back(grid.nodes(), Q0);
  auto lin = [&](const Matrix& X, const Matrix& pi) -> Matrix {
    const Matrix A = c.F - c.S * pi;
    return A.adjoint() * X + X * A + c.Phi.adjoint() * X * c.Phi;
  };
  // One RK4 step of length hs with Pi at the start, middle and end.
  auto propagate = [&](const Matrix& P, double hs, const Matrix& pi0, const Matrix& pim, const Matrix& pi1) -> Matrix {
    const Matrix k1 = lin(P, pi0);
    const Matrix k2 = lin(P + 0.5 * hs * k1, pim);
    const Matrix k3 = lin(P + 0.5 * hs * k2, pim);
    const Matrix k4 = lin(P + hs * k3, pi1);
    return P + (hs / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  };
  auto g = [&](const Matrix& p) -> Matrix { return c.Q + p * c.S * p; };

  for (int n = 1; n < n_iters; ++n) {
    const std::vector<Operator>& prev = res.iterates.back();
    std::vector<Operator> next(grid.nodes());
    // Pi_n at t_k + theta h.
    auto at = [&](int k, double theta) -> Matrix {
      if (grid.steps < 3) return (1.0 - theta) * prev[k].matrix() + theta * prev[k + 1].matrix();
      const int j0 = std::clamp(k - 1, 0, grid.steps - 3);
      const double x = k - j0 + theta;
      Matrix out = Matrix::Zero(c.F.rows(), c.F.cols());
      for (int a = 0; a < 4; ++a) {
        double w = 1.0;
        for (int b = 0; b < 4; ++b) {
          if (b != a) w *= (x - b) / static_cast<double>(a - b);
        }
        out += w * prev[j0 + a].matrix();
      }
      return out;
    };
    Matrix I = Q0.matrix();
    next[0] = Q0;
    for (int k = 0; k < grid.steps; ++k) {
      const Matrix& p0 = prev[k].matrix();
      const Matrix& p1 = prev[k + 1].matrix();
      const Matrix pq1 = at(k, 0.25), pm = at(k, 0.5), pq3 = at(k, 0.75);
      Matrix x = propagate(I + (h / 6.0) * g(p0), 0.5 * h, p0, pq1, pm);
      x = propagate(x + (4.0 * h / 6.0) * g(pm), 0.5 * h, pm, pq3, p1);
      I = hermitian_part(x + (h / 6.0) * g(p1));
      next[k + 1] = Operator(I);
    }
    double dec = std::numeric_limits<double>::infinity(), stp = 0.0;
    for (int k = 0; k < grid.nodes(); ++k) {
      const Matrix diff = prev[k].matrix() - next[k].matrix();
      dec = std::min(dec, min_hermitian_eigenvalue(diff));
      stp = std::max(stp, diff.norm());
      const double lo = min_hermitian_eigenvalue(next[k].matrix());
      res.min_iterate_eigenvalue = std::min(res.min_iterate_eigenvalue, lo);
      if (lo < -opt.psd_tolerance * std::max(1.0, next[k].norm())) {
        throw NumericalError("picard_iterate: iterate " + std::to_string(n + 1) + " lost positivity at t = " +
                             std::to_string(grid.t(k)) + " (min eigenvalue " + std::to_string(lo) + ")");
      }
    }
    res.decrease.push_back(dec);
    res.step.push_back(stp);
    res.iterates.push_back(std::move(next));
    if (stp <= opt.stop_step) break;
  }
  return res;
}

}  // namespace qctl

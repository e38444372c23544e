#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <thread>
#include <vector>

#include "qctl/control/cost.hpp"
#include "qctl/control/gain.hpp"
#include "qctl/error.hpp"
#include "qctl/random.hpp"
#include "qctl/riccati/cost.hpp"
#include "qctl/riccati/ode.hpp"

namespace qctl {

struct ProbeRow {
  int trial = 0;
  double epsilon = 0.0;
  double gap = 0.0;  // J_tilde(K_opt + eps Delta) - J_tilde(K_opt)
};

struct ProbeReport {
  std::vector<ProbeRow> rows;  // trial-major, epsilons in the given order
  double j_opt = 0.0;
  double min_value_prediction = 0.0;
  double prediction_error = 0.0;  // |j_opt - prediction|
  double min_gap = std::numeric_limits<double>::infinity();
  double gap_slope = std::numeric_limits<double>::quiet_NaN();  // fit of mean log gap against log eps
  double min_trial_slope = std::numeric_limits<double>::quiet_NaN();
  double max_trial_slope = std::numeric_limits<double>::quiet_NaN();
};

struct ProbeOptions {
  std::vector<double> epsilons{1e-1, 1e-2};
  int trials = 100;
  std::uint64_t seed = 0;
  unsigned threads = 0;  // 0: hardware concurrency
};

namespace detail {

/// Least-squares slope of y against x; NaN when undefined.
inline double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  if (x.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i] / n, my += y[i] / n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) sxy += (x[i] - mx) * (y[i] - my), sxx += (x[i] - mx) * (x[i] - mx);
  return sxx > 0 ? sxy / sxx : std::numeric_limits<double>::quiet_NaN();
}

/// Gaussian perturbation schedule with int ||Delta(t)||_F^2 dt = 1 (trapezoid).
inline std::vector<Matrix> unit_perturbation(std::mt19937_64& rng, const TimeGrid& grid, Index n) {
  std::vector<Matrix> d(grid.nodes());
  double sq = 0.0;
  for (int k = 0; k < grid.nodes(); ++k) {
    d[k] = random_gaussian(rng, n, n);
    sq += (k == 0 || k == grid.steps ? 0.5 : 1.0) * d[k].squaredNorm();
  }
  const double scale = 1.0 / std::sqrt(sq * grid.dt());
  for (auto& m : d) m *= scale;
  return d;
}

}  // namespace detail

/// Second-order check of the Riccati feedback: random unit perturbations of
/// K_opt = -Pi must raise J_tilde, by an amount quadratic in their size.
inline ProbeReport optimality_probe(const HPModel& model, const Operator& X, const Operator& M,
                                    const ExpVectorState& state, const TimeGrid& grid, const ProbeOptions& opt = {}) {
  if (!state.vacuum()) throw ValidationError("optimality_probe: vacuum states only");
  if (opt.epsilons.empty() || opt.trials < 1) throw ValidationError("optimality_probe: need epsilons and trials");
  for (double e : opt.epsilons) {
    if (!(e > 0.0)) throw ValidationError("optimality_probe: epsilons must be positive");
  }
  const CostSpec cost = CostSpec::quadratic(X, M);
  const RiccatiTrajectory pi = solve_riccati_ode(model, cost, grid);
  const GainSchedule best = feedback_gain(pi, {}, cost, model);
  const CostReport base = eval_cost_controlled(model, best, X, M, state, grid);

  ProbeReport rep;
  rep.j_opt = base.j_tilde;
  rep.min_value_prediction = *base.min_value_prediction;
  rep.prediction_error = std::abs(rep.j_opt - rep.min_value_prediction);

  const std::size_t ne = opt.epsilons.size();
  rep.rows.resize(static_cast<std::size_t>(opt.trials) * ne);
  auto run_trial = [&](int trial) {
    std::mt19937_64 rng = substream(opt.seed, "optimality_probe", static_cast<std::uint64_t>(trial));
    const std::vector<Matrix> delta = detail::unit_perturbation(rng, grid, model.dim());
    for (std::size_t e = 0; e < ne; ++e) {
      GainSchedule g = best;
      g.provenance = GainProvenance::perturbed;
      g.seed = opt.seed;
      g.epsilon = opt.epsilons[e];
      for (int k = 0; k < grid.nodes(); ++k) g.K[k] = Operator(best.K[k].matrix() + opt.epsilons[e] * delta[k]);
      const double j = eval_cost_controlled(model, g, X, M, state, grid).j_tilde;
      rep.rows[trial * ne + e] = ProbeRow{trial, opt.epsilons[e], j - rep.j_opt};
    }
  };
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned workers = std::min<unsigned>(opt.threads ? opt.threads : hw, static_cast<unsigned>(opt.trials));
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (int t = static_cast<int>(w); t < opt.trials; t += static_cast<int>(workers)) run_trial(t);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::vector<double> lx(ne), mean_ly(ne, 0.0);
  for (std::size_t e = 0; e < ne; ++e) lx[e] = std::log(opt.epsilons[e]);
  bool positive = true;
  std::vector<double> slopes;
  for (int t = 0; t < opt.trials; ++t) {
    std::vector<double> ly(ne);
    for (std::size_t e = 0; e < ne; ++e) {
      const double gap = rep.rows[t * ne + e].gap;
      rep.min_gap = std::min(rep.min_gap, gap);
      positive = positive && gap > 0.0;
      ly[e] = gap > 0.0 ? std::log(gap) : std::numeric_limits<double>::quiet_NaN();
      mean_ly[e] += ly[e] / opt.trials;
    }
    slopes.push_back(detail::fit_slope(lx, ly));
  }
  // A nonpositive gap has no logarithm; the slopes then stay NaN.
  if (positive) {
    rep.gap_slope = detail::fit_slope(lx, mean_ly);
    rep.min_trial_slope = *std::min_element(slopes.begin(), slopes.end());
    rep.max_trial_slope = *std::max_element(slopes.begin(), slopes.end());
  }
  return rep;
}

}  // namespace qctl

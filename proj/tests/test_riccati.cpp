#include <catch2/catch_amalgamated.hpp>

#include "support.hpp"

using namespace qctl;
using namespace qctl::test;

namespace {

/// Scalar model with F = f, Phi = 0 (and Psi = 0), G = g.
HPModel scalar_model(double f, double T = 1.0, double g = 1.0) {
  HPModel m(Operator::zero(1), Operator::zero(1), T);
  m.F_ = scalar_op(f);
  m.Phi_ = scalar_op(0.0);
  m.Psi_ = scalar_op(0.0);
  m.G_ = scalar_op(g);
  return m;
}

CostSpec scalar_cost(double q, double qt) {
  CostSpec c = CostSpec::zeros(1);
  c.Q = scalar_op(q);
  c.QT = scalar_op(qt);
  return c;
}

CostSpec random_cost(std::mt19937_64& rng, Index n) {
  CostSpec c = CostSpec::zeros(n);
  c.Q = Operator(random_psd(rng, n));
  c.QT = Operator(random_psd(rng, n, 0.5));
  c.Q0 = Operator(random_psd(rng, n, 0.5));
  c.R = Operator(random_psd(rng, n) + 0.5 * Matrix::Identity(n, n));
  return c;
}

}  // namespace

TEST_CASE("scalar closed forms of the Riccati ODE", "[riccati]") {
  const TimeGrid g(1.0, 2000);
  const RiccatiTrajectory t = solve_riccati_ode(scalar_model(0.0), scalar_cost(1.0, 0.0), g);
  CHECK(std::abs(t.Pi.front()(0, 0) - std::tanh(1.0)) <= 1e-8);
  CHECK(t.Pi.back()(0, 0) == 0.0);

  const double m0 = 2.5;
  const RiccatiTrajectory s = solve_riccati_ode(scalar_model(0.0), scalar_cost(0.0, m0), g);
  double err = 0.0;
  for (int k = 0; k < g.nodes(); ++k) err = std::max(err, std::abs(s.Pi[k](0, 0) - m0 / (1.0 + m0 * (1.0 - g.t(k)))));
  CHECK(err <= 1e-8);
  CHECK(s.Pi.back()(0, 0) == m0);

  const RiccatiTrajectory z = solve_riccati_ode(scalar_model(-0.4), scalar_cost(0.0, 0.0), g);
  for (const auto& p : z.Pi) CHECK(p.norm() == 0.0);
}

TEST_CASE("terminal condition is exact and Pi stays Hermitian", "[riccati]") {
  std::mt19937_64 rng = substream(41, "terminal");
  const HPModel m = random_controlled_model(rng, 4);
  const CostSpec c = random_cost(rng, 4);
  const RiccatiTrajectory t = solve_riccati_ode(m, c, TimeGrid(1.0, 500));
  CHECK(t.Pi.back().matrix() == c.QT.matrix());
  for (const auto& p : t.Pi) CHECK((p.matrix() - p.matrix().adjoint()).norm() <= 1e-8);
  CHECK(t.diagnostics.max_asymmetry <= 1e-8);
}

TEST_CASE("the Riccati ODE preserves the psd cone", "[riccati][property]") {
  for (int trial = 0; trial < 20; ++trial) {
    std::mt19937_64 rng = substream(42, "psd-cone", trial);
    const Index n = 1 + trial % 8;
    const HPModel m = random_controlled_model(rng, n);
    const RiccatiTrajectory t = solve_riccati_ode(m, random_cost(rng, n), TimeGrid(1.0, 400));
    CHECK(t.diagnostics.min_eigenvalue >= -1e-8);
  }
}

TEST_CASE("noise residuals are reported, not enforced", "[riccati]") {
  const TimeGrid g(1.0, 400);
  HPModel m = qubit_decay();
  m.F_ = Operator(Matrix::Zero(2, 2));
  CostSpec c = CostSpec::quadratic(Operator(sigma_x()), Operator::zero(2));
  const RiccatiTrajectory t = solve_riccati_ode(m, c, g);
  // Psi = -L*, Phi = L: Pi Psi + Phi* Pi = [L*, Pi] is nonzero for Pi not commuting with L.
  CHECK(t.diagnostics.noise_residual_dA > 1e-3);
  CHECK(t.diagnostics.noise_residual_dAdag > 1e-3);
}

TEST_CASE("blow-up is reported with its time", "[riccati]") {
  const TimeGrid g(1.0, 2000);
  try {
    solve_riccati_ode(scalar_model(20.0, 1.0, 0.0), scalar_cost(1.0, 0.0), g);
    FAIL("expected blow-up");
  } catch (const BlowUpError& e) {
    CHECK(e.time() > 0.0);
    CHECK(e.time() < 1.0);
  }
}

TEST_CASE("auxiliary equation", "[riccati]") {
  const TimeGrid g(1.0, 2000);
  const HPModel m = scalar_model(-0.5);
  CostSpec zero = scalar_cost(0.0, 0.0);
  const RiccatiTrajectory pi0 = solve_riccati_ode(m, zero, g);
  for (const auto& r : solve_auxiliary_ode(m, zero, pi0, scalar_op(0.0), g)) CHECK(r.norm() == 0.0);

  // Pi = 0: dr/dt + f r + m = 0 with r(T) = mT.
  CostSpec aff = zero;
  aff.m = scalar_op(0.3);
  aff.mT = scalar_op(0.2);
  const std::vector<Operator> r = solve_auxiliary_ode(m, aff, solve_riccati_ode(m, aff, g), scalar_op(0.7), g);
  double err = 0.0;
  const double f = -0.5;
  for (int k = 0; k < g.nodes(); ++k) {
    const double e = std::exp(f * (1.0 - g.t(k)));
    err = std::max(err, std::abs(r[k](0, 0) - (0.2 * e + 0.3 * (e - 1.0) / f)));
  }
  CHECK(err <= 1e-12);

  // Pi = m0 / (1 + m0 (T - t)) with affine drift l: dr/dt - Pi r + Pi l = 0, r(T) = 0,
  // so r - l = -l / (1 + m0 (T - t)).
  const double m0 = 1.5, l = 0.7;
  const HPModel m2 = scalar_model(0.0);
  const CostSpec c2 = scalar_cost(0.0, m0);
  const std::vector<Operator> r2 = solve_auxiliary_ode(m2, c2, solve_riccati_ode(m2, c2, g), scalar_op(l), g);
  err = 0.0;
  for (int k = 0; k < g.nodes(); ++k) {
    err = std::max(err, std::abs(r2[k](0, 0) - l * (1.0 - 1.0 / (1.0 + m0 * (1.0 - g.t(k))))));
  }
  CHECK(err <= 1e-10);

  CHECK_THROWS_AS(solve_auxiliary_ode(m, zero, pi0, scalar_op(0.0), TimeGrid(1.0, 100)), ValidationError);
}

TEST_CASE("Picard iteration examples", "[riccati]") {
  const TimeGrid g(1.0, 1000);
  CostSpec c = scalar_cost(1.0, 0.0);
  c.Q0 = scalar_op(0.4);
  const PicardResult p = picard_iterate(scalar_model(0.0), c, g, 3);
  for (const auto& x : p.iterates.front()) CHECK(x(0, 0) == 0.4);

  CostSpec zero = scalar_cost(0.0, 0.0);
  zero.Q0 = scalar_op(0.0);
  for (const auto& it : picard_iterate(scalar_model(-0.3), zero, g, 4).iterates) {
    for (const auto& x : it) CHECK(x.norm() == 0.0);
  }

  // Forward scalar Riccati with Pi(0) = 0, Q = 1: Pi(t) = tanh(t).
  CostSpec t = scalar_cost(1.0, 0.0);
  t.Q0 = scalar_op(0.0);
  const PicardResult q = picard_iterate(scalar_model(0.0), t, TimeGrid(1.0, 2000), 30);
  double gap = 0.0;
  for (int k = 0; k <= 2000; ++k) gap = std::max(gap, std::abs(q.last()[k](0, 0) - std::tanh(k / 2000.0)));
  CHECK(gap <= 1e-8);
  for (std::size_t n = 1; n < q.decrease.size(); ++n) CHECK(q.decrease[n] >= -1e-8);
  CHECK_THROWS_AS(picard_iterate(scalar_model(0.0), t, g, 0), ValidationError);
}

TEST_CASE("Picard iterates decrease and reach the Riccati solution", "[riccati][property]") {
  for (int trial = 0; trial < 4; ++trial) {
    std::mt19937_64 rng = substream(43, "picard", trial);
    const Index n = 2 + trial;
    const HPModel m = random_controlled_model(rng, n);
    const CostSpec c = random_cost(rng, n);
    const TimeGrid g(1.0, 1000);
    const PicardResult p = picard_iterate(m, c, g, 30);
    for (std::size_t k = 1; k < p.decrease.size(); ++k) CHECK(p.decrease[k] >= -1e-8);
    CHECK(p.min_iterate_eigenvalue >= -1e-8);
    const RiccatiTrajectory direct = solve_riccati_ode_forward(m, c, g);
    double gap = 0.0;
    for (int k = 0; k < g.nodes(); ++k) gap = std::max(gap, (p.last()[k].matrix() - direct.Pi[k].matrix()).norm());
    CHECK(gap <= 1e-6);
  }
}

TEST_CASE("CARE examples", "[riccati]") {
  const CareResult s = solve_care(scalar_op(-1), scalar_op(1), scalar_op(1), scalar_op(3));
  CHECK(std::abs(s.Pi(0, 0) - 1.0) <= 1e-10);
  CHECK(s.residual <= 1e-10);

  std::mt19937_64 rng = substream(44, "care-abs");
  const Matrix X = random_hermitian(rng, 3);
  const CareResult a = solve_care(Operator::zero(3), Operator::identity(3), Operator::identity(3),
                                  Operator(X * X));
  CHECK((a.Pi.matrix() - psd_sqrt(Operator(X * X)).matrix()).norm() <= 1e-9);

  const CareResult z = solve_care(Operator(random_hurwitz(rng, 3)), Operator::identity(3), Operator::identity(3),
                                  Operator::zero(3));
  CHECK(z.Pi.norm() <= 1e-12);
}

TEST_CASE("CARE on random Hurwitz instances", "[riccati][property]") {
  for (int trial = 0; trial < 20; ++trial) {
    std::mt19937_64 rng = substream(45, "care", trial);
    const Index n = 1 + trial % 6;
    const Operator F(random_hurwitz(rng, n)), G(random_gaussian(rng, n, n));
    const Operator R(random_psd(rng, n) + Matrix::Identity(n, n)), Q(random_psd(rng, n));
    std::optional<Operator> Phi;
    if (trial % 2) Phi = Operator(random_gaussian(rng, n, n, 0.2));
    const CareResult r = solve_care(F, G, R, Q, Phi, 1e-10);
    CHECK(r.residual <= 1e-10);
    CHECK(min_hermitian_eigenvalue(r.Pi.matrix()) >= -1e-10);
    // Quadratic convergence once the residual is below 1e-2.
    const auto& h = r.residual_history;
    for (std::size_t k = 1; k + 1 < h.size(); ++k) {
      if (h[k] < 1e-2 && h[k + 1] > 1e-12 * std::max(1.0, Q.norm())) CHECK(h[k + 1] <= 10.0 * h[k] * h[k] * std::max(1.0, r.Pi.norm()));
    }
  }
}

TEST_CASE("paper ARE", "[riccati]") {
  std::mt19937_64 rng = substream(46, "paper-are");
  const Operator H(random_hermitian(rng, 3));
  const PaperAreResult zero = solve_paper_are(H, Operator::zero(3));
  CHECK(zero.feasible);
  CHECK(zero.Pi.norm() == 0.0);
  CHECK(zero.residual == 0.0);

  const PaperAreResult id = solve_paper_are(H, Operator::identity(3));
  CHECK_FALSE(id.feasible);
  CHECK(std::abs(id.trace_obstruction - 3.0) <= 1e-14);

  // H = 0, scalar X: residual |pi^2 / 4 + x^2| over pi >= 0 is minimal at pi = 0.
  const double x = 0.8;
  const PaperAreResult s = solve_paper_are(scalar_op(0.0), scalar_op(x));
  double best = 1e300, best_pi = -1.0;
  for (int k = 0; k <= 4000; ++k) {
    const double pi = k * 1e-3;
    const double res = std::abs(0.25 * pi * pi + x * x);
    if (res < best) best = res, best_pi = pi;
  }
  CHECK(best_pi == 0.0);
  CHECK(s.Pi.norm() <= 1e-6);
  CHECK(std::abs(s.residual - x * x) <= 1e-6);

  CHECK_THROWS_AS(solve_paper_are(Operator(lowering()), Operator::zero(2)), DomainError);
}

TEST_CASE("paper ARE obstruction on random instances", "[riccati][property]") {
  for (int trial = 0; trial < 20; ++trial) {
    std::mt19937_64 rng = substream(47, "obstruction", trial);
    const Index n = 1 + trial % 5;
    const Operator H(random_hermitian(rng, n)), X(random_hermitian(rng, n));
    for (AreForm form : {AreForm::paper, AreForm::derived}) {
      PaperAreOptions opt;
      opt.form = form;
      const PaperAreResult r = solve_paper_are(H, X, opt);
      CHECK_FALSE(r.feasible);
      CHECK(r.trace_obstruction > 0.0);
      CHECK(std::abs(r.trace_obstruction - (X.matrix() * X.matrix()).trace().real()) <= 1e-12 * n);
      CHECK(r.max_trace_identity <= 1e-12 * std::max(1.0, H.norm() * std::max(1.0, r.Pi.norm())));
      CHECK(min_hermitian_eigenvalue(r.Pi.matrix()) >= -1e-12);
    }
    // The trace identity itself on arbitrary Hermitian Pi.
    const Matrix Pi = random_hermitian(rng, n, 5.0);
    const cplx tr = (0.5 * I1 * (H.matrix() * Pi - Pi * H.matrix())).trace();
    CHECK(std::abs(tr) <= 1e-12 * std::max(1.0, H.norm() * Pi.norm()));
  }
}

#include <catch2/catch_amalgamated.hpp>

#include "support.hpp"

using namespace qctl;
using namespace qctl::test;

namespace {

const Operator kExcitedProjector(diag({0, 1}));

ExpVectorState coherent_pulse() {
  return ExpVectorState(excited(), PiecewiseConstant({0.0, 0.5, 1.0}, {cplx(0.3, 0.1), cplx(-0.2, 0.2)}));
}

double oracle_deviation(const HPModel& m, const ExpVectorState& s, const std::vector<Operator>& obs, int steps,
                        GeneratorVariant v = GeneratorVariant::standard) {
  const TimeGrid g(m.T, steps);
  const Trajectories exact = flow_expectations(m, s, obs, g, FlowOptions{v});
  return exact.max_abs_diff(collision_oracle(m, s, obs, g, 6).trajectories);
}

}  // namespace

TEST_CASE("heisenberg_drift examples", "[flow]") {
  std::mt19937_64 rng = substream(31, "drift");
  const HPModel m = random_model(rng, 3);
  CHECK(heisenberg_drift(m, Operator::identity(3)).norm() <= 1e-14 * std::max(1.0, m.L.norm() * m.L.norm()));

  const HPModel diagonal(Operator::zero(3), Operator(diag({1, cplx(0, 2), -0.5})), 1.0);
  CHECK(heisenberg_drift(diagonal, Operator(diag({4, 5, 6}))).norm() <= 1e-14);

  // Amplitude damping: theta0(sigma_z) = 2 |1><1| by direct 2x2 arithmetic.
  const Operator t = heisenberg_drift(qubit_decay(), Operator(sigma_z()));
  CHECK((t.matrix() - diag({0, 2})).norm() <= 1e-15);
  CHECK_THROWS_AS(heisenberg_drift(qubit_decay(), Operator::identity(3)), DimensionError);
}

TEST_CASE("theta0 invariants", "[flow][property]") {
  for (int trial = 0; trial < 40; ++trial) {
    std::mt19937_64 rng = substream(32, "theta0", trial);
    const Index n = 1 + trial % 6;
    const HPModel m = random_model(rng, n);
    const double scale = std::max(1.0, m.L.norm() * m.L.norm() + m.H.norm());
    CHECK(heisenberg_drift(m, Operator::identity(n)).norm() <= 1e-14 * scale * n);
    const Operator Y(random_hermitian(rng, n));
    const Matrix t = heisenberg_drift(m, Y).matrix();
    CHECK((t - t.adjoint()).norm() <= 1e-14 * scale * std::max(1.0, Y.norm()) * n);
  }
}

TEST_CASE("flow_expectations examples", "[flow]") {
  const TimeGrid g(1.0, 2000);
  std::mt19937_64 rng = substream(33, "flow");
  const HPModel m = random_model(rng, 3);
  const ExpVectorState vac(random_unit_vector(rng, 3));
  const Trajectories id = flow_expectations(m, vac, {Operator::identity(3)}, g);
  for (cplx v : id.values[0]) CHECK(std::abs(v - 1.0) <= 1e-10);

  const HPModel frozen(Operator::zero(3), Operator::zero(3), 1.0);
  const Operator Y(random_hermitian(rng, 3));
  const Trajectories c = flow_expectations(frozen, vac, {Y}, g);
  for (cplx v : c.values[0]) CHECK(std::abs(v - c.values[0].front()) <= 1e-14);

  const Trajectories decay = flow_expectations(qubit_decay(), ExpVectorState(excited()), {kExcitedProjector}, g);
  double err = 0.0;
  for (std::size_t k = 0; k < decay.t.size(); ++k) {
    err = std::max(err, std::abs(decay.values[0][k] - std::exp(-decay.t[k])));
  }
  CHECK(err <= 1e-12);
}

TEST_CASE("non-vacuum states carry the exponential-vector weight", "[flow]") {
  const ExpVectorState s = coherent_pulse();
  const TimeGrid g(1.0, 2000);
  const Trajectories id = flow_expectations(qubit_decay(), s, {Operator::identity(2)}, g);
  const double n2 = std::exp(0.5 * (0.1 + 0.08));
  CHECK(std::abs(s.norm_squared(1.0) - n2) <= 1e-15);
  for (cplx v : id.values[0]) CHECK(std::abs(v - n2) <= 1e-10 * n2);
}

TEST_CASE("Cauchy-Schwarz in the reduction", "[flow][property]") {
  for (int trial = 0; trial < 10; ++trial) {
    std::mt19937_64 rng = substream(34, "cauchy-schwarz", trial);
    const Index n = 2 + trial % 3;
    const HPModel m = random_model(rng, n);
    const Operator Y(random_hermitian(rng, n));
    const Operator Y2(Y.matrix() * Y.matrix());
    const Trajectories tr = flow_expectations(m, ExpVectorState(random_unit_vector(rng, n)), {Y, Y2}, TimeGrid(1.0, 400));
    for (std::size_t k = 0; k < tr.t.size(); ++k) {
      CHECK(tr.values[1][k].real() >= std::norm(tr.values[0][k]) - 1e-8);
    }
  }
}

TEST_CASE("collision oracle trivial and decay cases", "[flow]") {
  const HPModel frozen(Operator::zero(2), Operator::zero(2), 1.0);
  const ExpVectorState s = coherent_pulse();
  const TimeGrid g(1.0, 100);
  const std::vector<Operator> obs = {kExcitedProjector, Operator(sigma_x())};
  const Trajectories a = flow_expectations(frozen, s, obs, g);
  const Trajectories b = collision_oracle(frozen, s, obs, g).trajectories;
  CHECK(a.max_abs_diff(b) <= 1e-12);

  const TimeGrid fine(1.0, 1000);
  const CollisionResult d = collision_oracle(qubit_decay(), ExpVectorState(excited()), {kExcitedProjector}, fine);
  double err = 0.0;
  for (std::size_t k = 0; k < d.trajectories.t.size(); ++k) {
    err = std::max(err, std::abs(d.trajectories.values[0][k] - std::exp(-d.trajectories.t[k])));
  }
  CHECK(err <= 2.0 * fine.dt());
  CHECK_FALSE(d.leakage_warning);
  CHECK_THROWS_AS(collision_oracle(qubit_decay(), ExpVectorState(excited()), {kExcitedProjector}, fine, 1),
                  ValidationError);
}

TEST_CASE("oracle deviation halves with the step", "[flow]") {
  const std::vector<Operator> obs = {kExcitedProjector, Operator(lowering())};
  const double r = oracle_deviation(qubit_decay(), coherent_pulse(), obs, 200) /
                   oracle_deviation(qubit_decay(), coherent_pulse(), obs, 400);
  CHECK(r >= 1.7);
  CHECK(r <= 2.3);
  for (int trial = 0; trial < 2; ++trial) {
    std::mt19937_64 rng = substream(35, "oracle-ratio", trial);
    const HPModel m = random_model(rng, 2);
    const ExpVectorState s(random_unit_vector(rng, 2), PiecewiseConstant({0.0, 0.4, 1.0}, {cplx(0.2, -0.1), cplx(0.1, 0.3)}));
    const std::vector<Operator> o = {Operator(random_hermitian(rng, 2))};
    const double q = oracle_deviation(m, s, o, 200) / oracle_deviation(m, s, o, 400);
    CHECK(q >= 1.7);
    CHECK(q <= 2.3);
  }
}

TEST_CASE("the oracle rejects the swapped f-term signs", "[flow]") {
  const std::vector<Operator> obs = {kExcitedProjector, Operator(lowering()), Operator(sigma_x())};
  const double good = oracle_deviation(qubit_decay(), coherent_pulse(), obs, 400);
  const double bad = oracle_deviation(qubit_decay(), coherent_pulse(), obs, 400, GeneratorVariant::swapped_f_terms);
  CHECK(bad > 20.0 * good);
  // The wrong generator does not converge to the oracle.
  const double bad_fine =
      oracle_deviation(qubit_decay(), coherent_pulse(), obs, 800, GeneratorVariant::swapped_f_terms);
  CHECK(bad_fine > 0.8 * bad);
}

TEST_CASE("unitarity residual", "[flow]") {
  std::mt19937_64 rng = substream(36, "unitarity");
  const HPModel m = random_model(rng, 3);
  const ExpVectorState vac(random_unit_vector(rng, 3));
  CHECK(unitarity_residual(m, vac, TimeGrid(1.0, 2000)).residual <= 1e-8);
  const HPModel closed(m.H, Operator::zero(3), 1.0);
  const UnitarityReport c = unitarity_residual(closed, vac, TimeGrid(1.0, 2000));
  CHECK(c.residual <= 1e-12);
  CHECK(c.hermiticity_drift <= 1e-12);

  // Dropping the jump term breaks conservation, increasingly with time.
  const HPModel decay = qubit_decay();
  HPModel longer = decay;
  longer.T = 0.2;
  const ExpVectorState ex(excited());
  const FlowOptions broken{GeneratorVariant::no_jump_term};
  const double r1 = unitarity_residual(longer, ex, TimeGrid(0.2, 400), broken).residual;
  const double r2 = unitarity_residual(decay, ex, TimeGrid(1.0, 2000), broken).residual;
  CHECK(r1 > 0.1);
  CHECK(r2 > 3.0 * r1);
}

TEST_CASE("RK4 converges at fourth order", "[flow]") {
  std::mt19937_64 rng = substream(37, "order");
  const HPModel m = random_model(rng, 3);
  const ExpVectorState s(random_unit_vector(rng, 3), PiecewiseConstant::constant(cplx(0.3, -0.2), 1.0));
  const std::vector<Operator> obs = {Operator(random_hermitian(rng, 3))};
  const Trajectories a = flow_expectations(m, s, obs, TimeGrid(1.0, 10));
  const Trajectories b = flow_expectations(m, s, obs, TimeGrid(1.0, 20));
  const Trajectories c = flow_expectations(m, s, obs, TimeGrid(1.0, 40));
  const double ratio = a.max_abs_diff(b.subsample(2)) / b.max_abs_diff(c.subsample(2));
  CHECK(ratio >= 12.0);
  CHECK(ratio <= 20.0);
}

TEST_CASE("step-halving check flags a coarse grid", "[flow]") {
  std::mt19937_64 rng = substream(38, "coarse");
  const HPModel m = random_model(rng, 2);
  const ExpVectorState vac(random_unit_vector(rng, 2));
  const std::vector<Operator> obs = {Operator(sigma_x())};
  CHECK_THROWS_AS(flow_expectations(m, vac, obs, TimeGrid(1.0, 4), FlowOptions{GeneratorVariant::standard, true, 1e-10}),
                  GridTooCoarseError);
  CHECK_NOTHROW(flow_expectations(m, vac, obs, TimeGrid(1.0, 2000), FlowOptions{GeneratorVariant::standard, true, 1e-8}));
}

TEST_CASE("flow input validation", "[flow]") {
  CHECK_THROWS_AS(TimeGrid(1.0, 0), ValidationError);
  CHECK_THROWS_AS(TimeGrid(-1.0, 10), ValidationError);
  CHECK_THROWS_AS(PiecewiseConstant({0.0, 0.5, 0.4}, {1.0, 2.0}), ValidationError);
  CHECK_THROWS_AS(ExpVectorState((Vector(2) << 1, 1).finished()), ValidationError);
  CHECK_THROWS_AS(HPModel(Operator(lowering()), Operator::zero(2), 1.0), DomainError);
  CHECK_THROWS_AS(flow_expectations(qubit_decay(), ExpVectorState(Vector::Ones(3) / std::sqrt(3.0)),
                                    {Operator::identity(2)}, TimeGrid(1.0, 10)),
                  DimensionError);
  // f must live inside [0, T].
  CHECK_THROWS_AS(flow_expectations(qubit_decay(), ExpVectorState(excited(), PiecewiseConstant({0.0, 2.0}, {1.0})),
                                    {Operator::identity(2)}, TimeGrid(1.0, 10)),
                  ValidationError);
}

TEST_CASE("controlled sandwich examples", "[flow]") {
  const TimeGrid g(1.0, 1000);
  HPModel unit = qubit_decay();
  const std::vector<Operator> zeroK(g.nodes(), Operator::zero(2));
  unit.F_ = unit.F();
  unit.Phi_ = unit.Phi();
  unit.Psi_ = unit.Psi();
  const Trajectories id = controlled_sandwich_flow(unit, zeroK, g, {Operator::identity(2)}, ExpVectorState(excited()));
  for (cplx v : id.values[0]) CHECK(std::abs(v - 1.0) <= 1e-10);

  std::mt19937_64 rng = substream(39, "sandwich");
  const Matrix H = random_hermitian(rng, 3);
  HPModel closed(Operator(H), Operator::zero(3), 1.0);
  closed.F_ = Operator(-I1 * H);
  closed.Phi_ = Operator::zero(3);
  const Vector xi = random_unit_vector(rng, 3);
  const Operator Y(random_hermitian(rng, 3));
  const Trajectories s = controlled_sandwich_flow(closed, std::vector<Operator>(g.nodes(), Operator::zero(3)), g, {Y},
                                                  ExpVectorState(xi));
  double err = 0.0;
  for (std::size_t k = 0; k < s.t.size(); k += 50) {
    const Matrix u = matrix_exp(Matrix(-I1 * H * s.t[k]));
    const cplx expect = xi.dot(u.adjoint() * Y.matrix() * u * xi);
    err = std::max(err, std::abs(s.values[0][k] - expect));
  }
  CHECK(err <= 1e-10);

  HPModel scalar(Operator::zero(1), Operator::zero(1), 1.0);
  scalar.F_ = scalar_op(-0.3);
  scalar.Phi_ = scalar_op(0.0);
  const Trajectories e = controlled_sandwich_flow(scalar, std::vector<Operator>(g.nodes(), scalar_op(0.1)), g,
                                                  {Operator::identity(1)}, ExpVectorState(Vector::Ones(1)));
  for (std::size_t k = 0; k < e.t.size(); ++k) {
    CHECK(std::abs(e.values[0][k] - std::exp(2.0 * (-0.3 + 0.1) * e.t[k])) <= 1e-12);
  }
  CHECK_THROWS_AS(controlled_sandwich_flow(scalar, std::vector<Operator>(3, scalar_op(0.0)), g,
                                           {Operator::identity(1)}, ExpVectorState(Vector::Ones(1))),
                  ValidationError);
}

TEST_CASE("sandwich reduction agrees with the collision oracle for the unitary model", "[flow]") {
  // With K = 0 and the default coefficients the sandwich is the unitary flow,
  // so its trajectories must converge to the repeated-interaction oracle.
  std::mt19937_64 rng = substream(40, "sandwich-oracle");
  HPModel m = random_model(rng, 2);
  const ExpVectorState vac(random_unit_vector(rng, 2));
  const std::vector<Operator> obs = {Operator(random_hermitian(rng, 2))};
  HPModel explicit_m = m;
  explicit_m.F_ = m.F();
  explicit_m.Phi_ = m.Phi();
  explicit_m.Psi_ = m.Psi();
  const TimeGrid g(1.0, 400);
  const Trajectories s = controlled_sandwich_flow(explicit_m, std::vector<Operator>(g.nodes(), Operator::zero(2)), g,
                                                  obs, vac);
  const Trajectories o = collision_oracle(m, vac, obs, g).trajectories;
  CHECK(s.max_abs_diff(o) <= 5.0 * g.dt());
  CHECK(s.max_abs_diff(flow_expectations(m, vac, obs, g)) <= 1e-10);
}

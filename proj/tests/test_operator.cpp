#include <catch2/catch_amalgamated.hpp>

#include "support.hpp"

using namespace qctl;
using namespace qctl::test;

TEST_CASE("commutator examples", "[operator]") {
  std::mt19937_64 rng = substream(1, "commutator");
  const Operator a(random_gaussian(rng, 3, 3));
  CHECK(commutator(a, Operator::identity(3)).norm() == 0.0);
  CHECK(commutator(Operator(diag({1, 2})), Operator(diag({3, 4}))).norm() == 0.0);
  const Matrix expect = 2.0 * I1 * sigma_z();
  CHECK((commutator(Operator(sigma_x()), Operator(sigma_y())).matrix() - expect).norm() == 0.0);
  CHECK_THROWS_AS(commutator(Operator::identity(2), Operator::identity(3)), DimensionError);
}

TEST_CASE("commutators are traceless", "[operator][property]") {
  for (int trial = 0; trial < 50; ++trial) {
    std::mt19937_64 rng = substream(2, "traceless", trial);
    const Index n = 1 + trial % 8;
    const Operator a(random_gaussian(rng, n, n, 3.0)), b(random_gaussian(rng, n, n, 0.5));
    CHECK(std::abs(commutator(a, b).trace()) <= 1e-12 * a.norm() * b.norm());
  }
}

TEST_CASE("non-square input is rejected", "[operator]") {
  CHECK_THROWS_AS(Operator(Matrix::Zero(2, 3)), DimensionError);
}

TEST_CASE("certification symmetrizes and records the discarded part", "[operator]") {
  Matrix a = sigma_x();
  a(0, 1) += 1e-13;
  const Operator h = certify_hermitian(Operator(a));
  CHECK((h.matrix() - h.matrix().adjoint()).norm() == 0.0);
  CHECK(h.discarded_anti_hermitian_norm() > 0.0);
  CHECK(h.hermitian_tolerance().has_value());
  CHECK_THROWS_AS(certify_hermitian(Operator(lowering())), DomainError);
  CHECK_THROWS_AS(certify_psd(Operator(sigma_z())), DomainError);
  CHECK_NOTHROW(certify_psd(Operator(diag({0, 2}))));
}

TEST_CASE("psd_sqrt examples", "[operator]") {
  CHECK((psd_sqrt(Operator::identity(3)).matrix() - Matrix::Identity(3, 3)).norm() <= 1e-14);
  CHECK((psd_sqrt(Operator(diag({4, 9}))).matrix() - diag({2, 3})).norm() <= 1e-14);
  CHECK_THROWS_AS(psd_sqrt(Operator(diag({1, -0.5}))), DomainError);
  for (int trial = 0; trial < 20; ++trial) {
    std::mt19937_64 rng = substream(3, "psd_sqrt", trial);
    const Index n = 1 + trial % 6;
    const Matrix a = random_gaussian(rng, n, n);
    const Matrix asa = a.adjoint() * a;
    const Matrix s = psd_sqrt(Operator(asa)).matrix();
    CHECK((s * s - asa).norm() <= 1e-12 * std::max(1.0, asa.norm()));
    CHECK((s * asa - asa * s).norm() <= 1e-11 * std::max(1.0, asa.norm()));
  }
}

TEST_CASE("psd_sqrt is monotone on commuting pairs", "[operator][property]") {
  for (int trial = 0; trial < 30; ++trial) {
    std::mt19937_64 rng = substream(4, "monotone", trial);
    const Index n = 2 + trial % 5;
    // A common eigenbasis from a random unitary, eigenvalues 0 <= a_i <= b_i.
    const Matrix u = matrix_exp(Matrix(I1 * random_hermitian(rng, n)));
    std::uniform_real_distribution<double> unif(0.0, 3.0);
    Vector ea(n), eb(n);
    for (Index i = 0; i < n; ++i) {
      ea(i) = unif(rng);
      eb(i) = ea(i).real() + unif(rng);
    }
    const Matrix A = hermitian_part(u * ea.asDiagonal() * u.adjoint());
    const Matrix B = hermitian_part(u * eb.asDiagonal() * u.adjoint());
    const Matrix gap = psd_sqrt(Operator(B)).matrix() - psd_sqrt(Operator(A)).matrix();
    CHECK(min_hermitian_eigenvalue(hermitian_part(gap)) >= -1e-10);
  }
}

TEST_CASE("polar_decompose examples and invariants", "[operator]") {
  const Matrix p = diag({2, 0.5});
  const PolarDecomposition hp = polar_decompose(Operator(p));
  CHECK((hp.W.matrix() - Matrix::Identity(2, 2)).norm() <= 1e-12);
  CHECK((hp.P.matrix() - p).norm() <= 1e-12);

  std::mt19937_64 rng = substream(5, "polar");
  const Matrix u = matrix_exp(Matrix(I1 * random_hermitian(rng, 3)));
  const PolarDecomposition up = polar_decompose(Operator(u));
  CHECK((up.W.matrix() - u).norm() <= 1e-12);
  CHECK((up.P.matrix() - Matrix::Identity(3, 3)).norm() <= 1e-12);

  for (int trial = 0; trial < 20; ++trial) {
    std::mt19937_64 r = substream(5, "polar-random", trial);
    const Matrix a = random_gaussian(r, 4, 4);
    const PolarDecomposition d = polar_decompose(Operator(a));
    CHECK((d.W.matrix() * d.P.matrix() - a).norm() <= 1e-12 * std::max(1.0, a.norm()));
    CHECK((d.W.matrix().adjoint() * d.W.matrix() - Matrix::Identity(4, 4)).norm() <= 1e-12);
    CHECK(d.rank_deficiency == 0);
  }

  // Normal input: A = P W as well.
  const Matrix normal = u * diag({2.0 * I1, 1.0 + I1, 3.0}) * u.adjoint();
  const PolarDecomposition nd = polar_decompose(Operator(normal));
  CHECK((nd.P.matrix() * nd.W.matrix() - normal).norm() <= 1e-10 * normal.norm());

  // Singular input: W is completed to a unitary and the deficiency reported.
  const PolarDecomposition sd = polar_decompose(Operator(lowering()));
  CHECK(sd.rank_deficiency == 1);
  CHECK((sd.W.matrix().adjoint() * sd.W.matrix() - Matrix::Identity(2, 2)).norm() <= 1e-10);
  CHECK((sd.W.matrix() * sd.P.matrix() - lowering()).norm() <= 1e-10);
}

TEST_CASE("solve_sylvester examples", "[operator]") {
  std::mt19937_64 rng = substream(6, "sylvester");
  const Operator c(random_gaussian(rng, 3, 3));
  const Operator x = solve_sylvester(Operator::identity(3), Operator::identity(3), c);
  CHECK((x.matrix() - 0.5 * c.matrix()).norm() <= 1e-14);
  CHECK(std::abs(solve_sylvester(scalar_op(2), scalar_op(3), scalar_op(10))(0, 0) - 2.0) <= 1e-14);

  for (int trial = 0; trial < 10; ++trial) {
    std::mt19937_64 r = substream(6, "sylvester-random", trial);
    const Operator a(random_hurwitz(r, 5) * -1.0), b(random_hurwitz(r, 5) * -1.0);
    const Operator cc(random_gaussian(r, 5, 5));
    const Operator xx = solve_sylvester(a, b, cc);
    CHECK(sylvester_residual(a, b, cc, xx) <= 1e-10 * (a.norm() + b.norm()) * xx.norm());
  }
  CHECK_THROWS_AS(solve_sylvester(scalar_op(1), scalar_op(-1), scalar_op(1)), NearSingularError);
  try {
    solve_sylvester(scalar_op(1), scalar_op(-1), scalar_op(1));
  } catch (const NearSingularError& e) {
    CHECK(e.separation() == 0.0);
  }
}

TEST_CASE("matrix_exp examples", "[operator]") {
  CHECK(matrix_exp(Matrix(Matrix::Zero(3, 3))) == Matrix::Identity(3, 3));
  const Matrix e = matrix_exp(Matrix(diag({1, -1})));
  CHECK((e - diag({std::exp(1.0), std::exp(-1.0)})).norm() <= 1e-14);
  const Matrix rot = matrix_exp(Matrix(-I1 * 0.7 * sigma_z()));
  CHECK((rot.adjoint() * rot - Matrix::Identity(2, 2)).norm() <= 1e-12);
  // Large-norm input exercises the squaring phase.
  const Matrix big = matrix_exp(Matrix(diag({20, -3})));
  CHECK(std::abs(big(0, 0) - std::exp(20.0)) <= 1e-13 * std::exp(20.0));
}

TEST_CASE("matrix_exp of skew-Hermitian input is unitary", "[operator][property]") {
  for (int trial = 0; trial < 30; ++trial) {
    std::mt19937_64 rng = substream(7, "expm-unitary", trial);
    const Index n = 1 + trial % 8;
    const Matrix k = I1 * random_hermitian(rng, n, 1.0 + trial);
    const Matrix u = matrix_exp(k);
    CHECK((u.adjoint() * u - Matrix::Identity(n, n)).norm() <= 1e-10);
  }
}

TEST_CASE("substreams are reproducible and distinct", "[random]") {
  std::mt19937_64 a = substream(9, "x", 0), b = substream(9, "x", 0), c = substream(9, "x", 1),
                  d = substream(9, "y", 0);
  const auto va = a(), vb = b(), vc = c(), vd = d();
  CHECK(va == vb);
  CHECK(va != vc);
  CHECK(va != vd);
}

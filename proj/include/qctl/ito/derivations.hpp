#pragma once

#include <map>
#include <string>
#include <vector>

#include "qctl/error.hpp"
#include "qctl/ito/calculus.hpp"
#include "qctl/ito/expr.hpp"
#include "qctl/ito/table.hpp"

namespace qctl::ito {

/// Replaces every occurrence of the named letter by `repl` (starred
/// occurrences by its adjoint). Differential-free expressions only.
inline Expr substitute(const Expr& e, const std::string& name, const Expr& repl, const ItoTable& table) {
  if (e.has_differentials() || repl.has_differentials()) {
    throw ValidationError("substitute: expressions must be free of differentials");
  }
  const Expr repl_star = adjoint_expr(repl, table);
  Expr out;
  for (const Term& t : e.terms()) {
    Expr acc = Expr::scalar(t.coeff);
    for (const Letter& l : t.word) {
      if (l.name == name) {
        acc = mul(acc, l.star ? repl_star : repl, table);
      } else {
        acc = mul(acc, Expr::letter(l), table);
      }
    }
    out += acc;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Flow generator of the Hudson-Parthasarathy evolution.

struct FlowGeneratorInputs {
  Expr H = Expr::letter(constant("H", true));
  Expr L = Expr::letter(constant("L"));
  Expr X = Expr::letter(constant("X"));
};

struct FlowGeneratorResult {
  Expr theta0, coef_dA, coef_dAdag;                  // derived, with U* ... U stripped
  Expr target_theta0, target_dA, target_dAdag;       // stated forms
  Expr residual_theta0, residual_dA, residual_dAdag;  // derived - target
  Expr full;                                         // d(U* X U) before stripping
  bool matches() const {
    return residual_theta0.is_zero() && residual_dA.is_zero() && residual_dAdag.is_zero();
  }
};

namespace detail {

inline void require_boson_fock(const ItoTable& table) {
  const auto& b = table.basis();
  if (!b.contains("dA") || !b.contains("dAdag") || b.star("dA") != "dAdag") {
    throw ValidationError("derive_flow_generator: table must provide the pair dA, dAdag");
  }
  const Expr expect = Expr::differential(kTime);
  if (!(mul_differentials("dA", "dAdag", table) == expect) || !mul_differentials("dAdag", "dA", table).is_zero() ||
      !mul_differentials("dA", "dA", table).is_zero() || !mul_differentials("dAdag", "dAdag", table).is_zero()) {
    throw ValidationError("derive_flow_generator: table is not the Boson Fock table (dA dAdag = dt, others 0)");
  }
}

// Strips U* on the left and U on the right of every term; terms of any other
// shape are kept verbatim so that a mismatch shows up in the residual.
inline Expr strip_conjugation(const Expr& e, const Letter& u) {
  std::vector<Term> out;
  for (const Term& t : e.terms()) {
    const Word& w = t.word;
    if (w.size() >= 2 && w.front() == u.starred() && w.back() == u) {
      out.push_back(Term{t.coeff, Word(w.begin() + 1, w.end() - 1), t.diff});
    } else {
      out.push_back(t);
    }
  }
  return Expr::from_terms(std::move(out));
}

}  // namespace detail

/// Computes d(U* X U) from dU = -((iH + L*L/2) dt + L* dA - L dAdag) U and its
/// adjoint with the Ito product rule, and compares the dt, dA and dAdag
/// coefficients with theta0(X) = i[H,X] - (L*LX + XL*L - 2L*XL)/2, [L*,X], [X,L].
inline FlowGeneratorResult derive_flow_generator(const ItoTable& table, const FlowGeneratorInputs& in = {}) {
  detail::require_boson_fock(table);
  const cplx I(0.0, 1.0);
  const Letter u = process("U");
  const Expr U = Expr::letter(u);
  const Expr Ustar = Expr::letter(u.starred());
  const Expr& H = in.H;
  const Expr& L = in.L;
  const Expr& X = in.X;
  const Expr Lstar = adjoint_expr(L, table);
  const Expr LsL = mul(Lstar, L, table);

  const Expr drift = Scalar(-I) * H - Scalar(0.5) * LsL;
  const Expr dU = with_differential(kTime, mul(drift, U, table)) +
                  with_differential("dA", mul(-Lstar, U, table)) +
                  with_differential("dAdag", mul(L, U, table));
  const Expr dUstar = adjoint_expr(dU, table);

  FlowGeneratorResult r;
  r.full = ito_product(Ustar, dUstar, mul(X, U, table), mul(X, dU, table), table);
  auto groups = collect(r.full);
  auto get = [&](const std::string& k) {
    auto it = groups.find(k);
    return it == groups.end() ? Expr::zero() : detail::strip_conjugation(it->second, u);
  };
  r.theta0 = get(kTime);
  r.coef_dA = get("dA");
  r.coef_dAdag = get("dAdag");
  // Anything outside the three groups (there should be none) lands in theta0's residual.
  Expr stray;
  for (const auto& [k, g] : groups) {
    if (k != kTime && k != "dA" && k != "dAdag") stray += with_differential(k, g);
  }

  const Expr HX = mul(H, X, table), XH = mul(X, H, table);
  r.target_theta0 = Scalar(I) * (HX - XH) -
                    Scalar(0.5) * (mul(LsL, X, table) + mul(X, LsL, table) -
                                   Scalar(2.0) * mul({Lstar, X, L}, table));
  r.target_dA = mul(Lstar, X, table) - mul(X, Lstar, table);
  r.target_dAdag = mul(X, L, table) - mul(L, X, table);
  r.residual_theta0 = r.theta0 - r.target_theta0 + stray;
  r.residual_dA = r.coef_dA - r.target_dA;
  r.residual_dAdag = r.coef_dAdag - r.target_dAdag;
  return r;
}

// ---------------------------------------------------------------------------
// Symbols of the controlled QSDE and its Riccati equations.

/// All coefficient processes are adapted. Pi and Q are self-adjoint; R and
/// R^-1 form an invertible self-adjoint pair (the link can be switched off
/// for a negative control).
struct ControlSymbols {
  Letter F = process("F"), G = process("G"), L = process("L");
  Letter w = process("w"), z = process("z");
  Letter Q = process("Q", true), m = process("m"), eta = process("eta");
  Letter Pi = process("Pi", true), r = process("r");
  Letter R, Rinv;

  explicit ControlSymbols(bool link_inverse = true) {
    auto [a, b] = invertible_pair("R");
    if (!link_inverse) {
      a.inverse.clear();
      b.inverse.clear();
    }
    R = a;
    Rinv = b;
  }

  static Letter Fa(const std::string& label) { return process("F[" + label + "]"); }
  static Letter Ba(const std::string& label) { return process("B[" + label + "]"); }
  static Letter Da(const std::string& label) { return process("D[" + label + "]"); }
  static Letter A() { return process("A"); }
  static Letter C() { return process("C"); }
};

namespace detail {

inline Expr lt(const Letter& l) { return Expr::letter(l); }

/// N = sum_a dM_a F_a w  (or with `tail` in place of w).
inline Expr noise_sum(const ItoTable& table, const Expr& tail) {
  Expr n;
  for (const auto& a : table.basis().labels) {
    n += with_differential(a, mul(lt(ControlSymbols::Fa(a)), tail, table));
  }
  return n;
}

/// d tau A + sum_a dM_a B_a  with the given coefficient letters.
inline Expr differential_of(const ItoTable& table, const Letter& dt_coef, Letter (*noise_coef)(const std::string&)) {
  Expr d = with_differential(kTime, lt(dt_coef));
  for (const auto& a : table.basis().labels) d += with_differential(a, lt(noise_coef(a)));
  return d;
}

}  // namespace detail

/// Left-hand sides of the Riccati equation and of the auxiliary equation of
/// the control problem, for orientation s = +1 (terminal cost) or -1 (initial
/// cost), with dPi and dr given as expressions.
struct RiccatiForms {
  Expr riccati;
  Expr auxiliary;
};

inline RiccatiForms riccati_forms(const ItoTable& table, const ControlSymbols& sym, const Expr& w, const Expr& z,
                                  const Expr& dPi, const Expr& dr, int s) {
  using detail::lt;
  const Scalar S(static_cast<double>(s));
  const Expr N = detail::noise_sum(table, w);
  const Expr Z = detail::noise_sum(table, z);
  const Expr Ns = adjoint_expr(N, table);
  const Expr Pi = lt(sym.Pi), r = lt(sym.r);
  const Expr F = lt(sym.F), Fs = lt(sym.F.starred()), G = lt(sym.G), Gs = lt(sym.G.starred());
  const Expr Rinv = lt(sym.Rinv);
  const Expr PGRG = mul({Pi, G, Rinv, Gs}, table);
  const Expr id = Expr::one();

  RiccatiForms out;
  const Expr ric_dt = mul(Fs, Pi, table) + mul(Pi, F, table) + lt(sym.Q) - mul(PGRG, Pi, table);
  out.riccati = with_differential(kTime, ric_dt) + mul(Ns, Pi, table) + mul(Pi, N, table) +
                S * mul({Ns, Pi, N}, table) + S * mul({adjoint_expr(N + S * id, table), dPi, N + S * id}, table);

  const Expr aux_dt = mul(Fs, r, table) - mul(PGRG, r, table) + mul(Pi, lt(sym.L), table) + lt(sym.m.starred()) -
                      mul({Pi, G, Rinv, lt(sym.eta.starred())}, table);
  out.auxiliary = with_differential(kTime, aux_dt) + mul(Ns, r, table) + mul(Pi, Z, table) + mul(dPi, Z, table) +
                  S * mul({Ns, Pi, Z}, table) + S * mul({Ns, dPi, Z}, table) +
                  mul(adjoint_expr(N + S * id, table), dr, table);
  return out;
}

// ---------------------------------------------------------------------------
// Cancellation in the optimality proof.

struct Theorem1Scenario {
  ItoTable table = ItoTable::boson_fock();
  bool general_wz = false;              // false: w = 0, z = id (linear regulator)
  bool apply_inverse_relation = true;   // false: R R^-1 no longer cancels
};

struct Theorem1Result {
  Expr residual;
  std::map<std::string, Expr> groups;  // residual collected by differential
  bool zero() const { return residual.is_zero(); }
};

/// With u = Lambda X + lambda + mu and X-hat = X - Y, the cross term K of the
/// cost integrand is d(X-hat* p) plus the running cross cost, p = r + Pi Y.
/// Subtracting X-hat* (Riccati) Y and X-hat* (auxiliary) after substituting
/// Lambda = -R^-1 G* Pi, lambda = -R^-1 (G* r + eta*) must leave zero.
inline Theorem1Result verify_theorem1_cancellation(const Theorem1Scenario& sc) {
  using detail::lt;
  const ItoTable& T = sc.table;
  const ControlSymbols sym(sc.apply_inverse_relation);
  const Expr w = sc.general_wz ? lt(sym.w) : Expr::zero();
  const Expr z = sc.general_wz ? lt(sym.z) : Expr::one();

  const Letter xh = process("Xh"), y = process("Y"), mu = process("mu");
  const Expr Xh = lt(xh), Y = lt(y), Mu = lt(mu);
  const Expr Pi = lt(sym.Pi), r = lt(sym.r), F = lt(sym.F), G = lt(sym.G), Gs = lt(sym.G.starred());
  const Expr R = lt(sym.R), Rinv = lt(sym.Rinv), Q = lt(sym.Q);
  const Expr ms = lt(sym.m.starred()), etas = lt(sym.eta.starred()), Ld = lt(sym.L);

  const Expr Lambda = -mul({Rinv, Gs, Pi}, T);
  const Expr lambda = -(mul({Rinv, Gs, r}, T) + mul(Rinv, etas, T));

  const Expr N = detail::noise_sum(T, w);
  const Expr Z = detail::noise_sum(T, z);
  const Expr dPi = detail::differential_of(T, ControlSymbols::A(), &ControlSymbols::Ba);
  const Expr dr = detail::differential_of(T, ControlSymbols::C(), &ControlSymbols::Da);

  const Expr GL = mul(G, Lambda, T);
  const Expr dXh = with_differential(kTime, mul(F, Xh, T) + mul(GL, Xh, T) + mul(G, Mu, T)) + mul(N, Xh, T);
  const Expr dY = with_differential(kTime, mul(F, Y, T) + mul(GL, Y, T) + mul(G, lambda, T) + Ld) + mul(N, Y, T) + Z;

  const Expr p = r + mul(Pi, Y, T);
  const Expr dp = ito_product(Pi, dPi, Y, dY, T) + dr;
  const Expr Xhs = adjoint_expr(Xh, T);
  const Expr u_hat = mul(Lambda, Xh, T) + Mu;  // Lambda X-hat + mu
  const Expr u_hat_s = adjoint_expr(u_hat, T);
  const Expr running = mul({Xhs, Q, Y}, T) + mul({u_hat_s, R, mul(Lambda, Y, T) + lambda}, T) + mul(Xhs, ms, T) +
                       mul(u_hat_s, etas, T);
  const Expr K = ito_product(Xhs, adjoint_expr(dXh, T), p, dp, T) + with_differential(kTime, running);

  const RiccatiForms forms = riccati_forms(T, sym, w, z, dPi, dr, +1);
  Theorem1Result res;
  res.residual = K - mul({Xhs, forms.riccati, Y}, T) - mul(Xhs, forms.auxiliary, T);
  res.groups = collect(res.residual);
  return res;
}

// ---------------------------------------------------------------------------
// Coefficient equations for A, B_a, C, D_a.

struct Proposition1Result {
  int orientation = 1;
  std::map<std::string, Expr> pi_equations;  // label -> expression that must vanish
  std::map<std::string, Expr> r_equations;
  std::map<std::string, Expr> printed_pi;    // the same equations as printed
  std::map<std::string, Expr> printed_r;
  std::map<std::string, Expr> diff_pi;       // derived - printed, nonzero entries only
  std::map<std::string, Expr> diff_r;
  bool matches_printed() const { return diff_pi.empty() && diff_r.empty(); }
};

namespace detail {

struct PrintedForms {
  std::map<std::string, Expr> pi, r;
};

// Reading of the printed equations: c_J(a,gamma) in the B-equation and the
// truncated scalar sum in the C-equation are taken literally; in the
// D-equation c_J(a,b) multiplies all three bracketed terms, and capital W is
// read as w.
inline PrintedForms printed_proposition1(const ItoTable& T, const ControlSymbols& sym, int s) {
  const Scalar S(static_cast<double>(s));
  const auto& basis = T.basis();
  const auto& I = basis.labels;
  const Expr w = lt(sym.w), z = lt(sym.z);
  const Expr Pi = lt(sym.Pi), r = lt(sym.r);
  const Expr F = lt(sym.F), Fs = lt(sym.F.starred()), G = lt(sym.G), Gs = lt(sym.G.starred());
  const Expr Rinv = lt(sym.Rinv);
  const Expr PGRG = mul({Pi, G, Rinv, Gs}, T);
  auto Fw = [&](const std::string& b, const Expr& tail) { return mul(lt(ControlSymbols::Fa(b)), tail, T); };
  // w* F*_{j(a)} with j(a) = a*.
  auto Wp = [&](const std::string& a) { return adjoint_expr(Fw(basis.star(a), w), T); };
  auto B = [&](const std::string& a) { return lt(ControlSymbols::Ba(a)); };
  auto D = [&](const std::string& a) { return lt(ControlSymbols::Da(a)); };
  auto c0 = [&](const std::string& a, const std::string& b) { return T.structure(kTime, a, b); };
  auto ce = [&](const std::string& e, const std::string& a, const std::string& b) { return T.structure(e, a, b); };
  auto rh = [&](const std::string& a, const Expr& e) { return rho(a, e, T); };

  PrintedForms out;
  {
    Expr eq = mul(Fs, Pi, T) + mul(Pi, F, T) + lt(sym.Q) - mul(PGRG, Pi, T) + S * lt(ControlSymbols::A());
    Expr sum;
    for (const auto& a : I) {
      for (const auto& b : I) {
        sum += c0(a, b) * mul(rh(b, mul(rh(a, Wp(a)), Pi, T)), Fw(b, w), T);
        sum += S * (c0(a, b) * mul(rh(b, rh(a, Wp(a))), B(b), T));
        sum += S * (c0(a, b) * mul(rh(b, B(a)), Fw(b, w), T));
        for (const auto& g : I) {
          for (const auto& e : I) {
            sum += (ce(e, a, b) * c0(e, g)) * mul(rh(g, mul(rh(b, rh(a, Wp(a))), B(b), T)), Fw(g, w), T);
          }
        }
      }
    }
    out.pi[kTime] = eq + S * sum;
  }
  for (const auto& J : I) {
    Expr eq = mul(rh(J, Wp(J)), Pi, T) + mul(rh(J, Pi), Fw(J, w), T) + S * B(J);
    for (const auto& a : I) {
      for (const auto& b : I) {
        const Scalar cj = ce(J, a, b);
        eq += cj * mul(rh(b, B(a)), Fw(b, w), T);
        eq += cj * mul(rh(b, rh(a, Wp(a))), B(b), T);
        eq += S * (cj * mul(rh(b, mul(rh(a, Wp(a)), Pi, T)), Fw(b, w), T));
        for (const auto& e : I) {
          for (const auto& g : I) {
            eq += S * ((ce(e, a, b) * ce(J, a, g)) * mul(rh(g, mul(rh(b, rh(a, Wp(a))), B(b), T)), Fw(g, w), T));
          }
        }
      }
    }
    out.pi[J] = eq;
  }
  {
    Expr eq = mul(Fs, r, T) - mul(PGRG, r, T) + mul(Pi, lt(sym.L), T) + lt(sym.m.starred()) -
              mul({Pi, G, Rinv, lt(sym.eta.starred())}, T) + S * lt(ControlSymbols::C());
    for (const auto& a : I) {
      for (const auto& b : I) {
        eq += c0(a, b) * mul(rh(b, B(a)), Fw(b, z), T);
        eq += S * (c0(a, b) * mul(rh(b, mul(rh(a, Wp(a)), Pi, T)), Fw(b, z), T));
        eq += c0(a, b) * mul(rh(b, rh(a, Wp(a))), D(b), T);
        for (const auto& g : I) {
          for (const auto& e : I) eq += S * Expr::scalar(ce(e, a, b) * c0(e, g));
        }
      }
    }
    out.r[kTime] = eq;
  }
  for (const auto& J : I) {
    Expr eq = mul(rh(J, Wp(J)), r, T) + mul(rh(J, Pi), Fw(J, z), T) + S * D(J);
    for (const auto& a : I) {
      for (const auto& b : I) {
        const Scalar cj = ce(J, a, b);
        eq += cj * (mul(rh(b, B(a)), Fw(b, z), T) + mul(rh(b, mul(rh(a, Wp(a)), Pi, T)), Fw(b, z), T) +
                    mul(rh(b, rh(a, Wp(a))), D(b), T));
        for (const auto& g : I) {
          for (const auto& e : I) {
            eq += S * ((ce(e, a, b) * ce(J, e, g)) * mul({rh(g, rh(b, rh(a, Wp(a)))), rh(g, B(b)), Fw(g, z)}, T));
          }
        }
      }
    }
    out.r[J] = eq;
  }
  return out;
}

inline std::map<std::string, Expr> diff_maps(const std::map<std::string, Expr>& a,
                                             const std::map<std::string, Expr>& b) {
  std::map<std::string, Expr> out;
  auto keys = a;
  for (const auto& [k, v] : b) keys.emplace(k, Expr::zero());
  for (const auto& [k, unused] : keys) {
    const Expr x = a.count(k) ? a.at(k) : Expr::zero();
    const Expr y = b.count(k) ? b.at(k) : Expr::zero();
    const Expr d = x - y;
    if (!d.is_zero()) out.emplace(k, d);
  }
  return out;
}

}  // namespace detail

/// Substitutes dPi = dt A + sum_a dM_a B_a (and dr = dt C + sum_a dM_a D_a)
/// into the Riccati and auxiliary equations, expands with the table and
/// collects the coefficient equations per label. Also builds the equations as
/// printed and reports the difference.
inline Proposition1Result expand_proposition1(const ItoTable& table, int orientation = +1) {
  if (orientation != 1 && orientation != -1) throw ValidationError("orientation must be +1 or -1");
  const ControlSymbols sym;
  const Expr dPi = detail::differential_of(table, ControlSymbols::A(), &ControlSymbols::Ba);
  const Expr dr = detail::differential_of(table, ControlSymbols::C(), &ControlSymbols::Da);
  const RiccatiForms f =
      riccati_forms(table, sym, detail::lt(sym.w), detail::lt(sym.z), dPi, dr, orientation);

  Proposition1Result res;
  res.orientation = orientation;
  res.pi_equations = collect(f.riccati);
  res.r_equations = collect(f.auxiliary);
  const auto printed = detail::printed_proposition1(table, sym, orientation);
  res.printed_pi = printed.pi;
  res.printed_r = printed.r;
  res.diff_pi = detail::diff_maps(res.pi_equations, res.printed_pi);
  res.diff_r = detail::diff_maps(res.r_equations, res.printed_r);
  return res;
}

struct LevyRiccatiResult {
  Expr derived;  // dPi = dt A + dM1 B1 + dM2 B2 solved from the coefficient equations
  Expr printed;  // the Levy-pair reduction as printed
  Expr diff;     // derived - printed
};

/// Solves the coefficient equations of a Levy-pair table (terminal-cost
/// orientation) for A, B1, B2 and compares dPi with the printed reduction.
inline LevyRiccatiResult levy_riccati_reduction(const ItoTable& T) {
  using detail::lt;
  if (!T.is_levy_pair()) throw ValidationError("levy_riccati_reduction: table is not a Levy pair");
  const auto& lab = T.basis().labels;
  for (const auto& J : lab) {
    for (const auto& a : lab) {
      for (const auto& b : lab) {
        if (!T.structure(J, a, b).is_zero()) throw ValidationError("levy_riccati_reduction: c_J must vanish");
      }
    }
  }
  const ControlSymbols sym;
  const Proposition1Result p = expand_proposition1(T, +1);
  const std::string m1 = lab[0], m2 = lab[1];

  // The dM_J equation reads (terms without B) + B_J = 0.
  std::map<std::string, Expr> B;
  for (const auto& J : lab) {
    const Expr BJ = lt(ControlSymbols::Ba(J));
    B[J] = BJ - p.pi_equations.at(J);
  }
  const Expr Aletter = lt(ControlSymbols::A());
  Expr A = Aletter - p.pi_equations.at(kTime);
  for (const auto& J : lab) A = substitute(A, ControlSymbols::Ba(J).name, B[J], T);

  LevyRiccatiResult out;
  out.derived = with_differential(kTime, A);
  for (const auto& J : lab) out.derived += with_differential(J, B[J]);

  const auto& sg = *T.sigma();
  const Scalar s11 = sg[0][0], s12 = sg[0][1], s21 = sg[1][0], s22 = sg[1][1];
  const Expr w = lt(sym.w), Pi = lt(sym.Pi), F = lt(sym.F), G = lt(sym.G), Gs = lt(sym.G.starred());
  const Expr F1w = mul(lt(ControlSymbols::Fa(m1)), w, T), F2w = mul(lt(ControlSymbols::Fa(m2)), w, T);
  const Expr wF1s = adjoint_expr(F1w, T), wF2s = adjoint_expr(F2w, T);
  auto r1 = [&](const Expr& e) { return rho(m1, e, T); };
  auto r2 = [&](const Expr& e) { return rho(m2, e, T); };

  const Expr left = -F + s11 * mul(r2(F2w), r1(r2(F1w)), T) + s12 * mul(r2(F2w), F2w, T) +
                    s22 * mul(r1(F1w), r2(r1(F2w)), T) + s21 * mul(r1(F1w), F1w, T);
  const Expr right = -mul(Pi, F, T) + s11 * mul({r1(r2(Pi)), r1(F2w), F1w}, T) + s12 * mul({Pi, r2(F2w), F2w}, T) +
                     s22 * mul({r2(r1(Pi)), r2(F1w), F2w}, T) + s21 * mul({Pi, r1(F1w), F1w}, T);
  const Expr middle = s11 * mul({r1(r2(wF1s)), r1(Pi), F1w}, T) + s12 * mul({wF1s, r2(Pi), F2w}, T) +
                      s22 * mul({r2(r1(wF2s)), r2(Pi), F2w}, T) + s21 * mul({wF2s, r1(Pi), F1w}, T);
  const Expr dt_part = mul(adjoint_expr(left, T), Pi, T) + right + middle - lt(sym.Q) +
                       mul({Pi, G, lt(sym.Rinv), Gs, Pi}, T);
  out.printed = with_differential(kTime, dt_part) -
                with_differential(m1, mul(r1(wF2s), Pi, T) + mul(r1(Pi), F1w, T)) -
                with_differential(m2, mul(r2(wF1s), Pi, T) + mul(r2(Pi), F2w, T));
  out.diff = out.derived - out.printed;
  return out;
}

}  // namespace qctl::ito

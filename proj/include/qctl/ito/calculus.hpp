#pragma once

#include <map>
#include <string>
#include <vector>

#include "qctl/error.hpp"
#include "qctl/ito/expr.hpp"
#include "qctl/ito/table.hpp"

namespace qctl::ito {

/// Key used by collect() for the differential-free group.
inline const std::string kNoDifferential = "1";

namespace detail {

inline int count_adapted(const Word& w) {
  int n = 0;
  for (const Letter& l : w) n += l.adapted ? 1 : 0;
  return n;
}

inline int sign_power(int rho, int n) { return (rho < 0 && (n % 2)) ? -1 : 1; }

inline Word concat(const Word& a, const Word& b) {
  Word w = a;
  w.insert(w.end(), b.begin(), b.end());
  return w;
}

inline void check_labels(const Expr& e, const ItoTable& table, const char* where) {
  for (const Term& t : e.terms()) {
    if (t.diff && !table.basis().contains(*t.diff)) {
      throw ValidationError(std::string(where) + ": unknown differential label '" + *t.diff + "'");
    }
  }
}

}  // namespace detail

/// dM_a dM_b expanded through the table.
inline Expr mul_differentials(const std::string& a, const std::string& b, const ItoTable& table) {
  std::vector<Term> out;
  for (const auto& [g, c] : table.product(a, b)) out.push_back(Term{c, {}, g});
  return Expr::from_terms(std::move(out));
}

/// Product in the Ito algebra. For (c1 dM_a w1)(c2 dM_b w2) the differential
/// dM_b is moved left across w1, picking up rho_b once per adapted letter, and
/// dM_a dM_b is then collapsed through the table.
inline Expr mul(const Expr& x, const Expr& y, const ItoTable& table) {
  detail::check_labels(x, table, "mul");
  detail::check_labels(y, table, "mul");
  std::vector<Term> out;
  for (const Term& s : x.terms()) {
    for (const Term& t : y.terms()) {
      const Word w = detail::concat(s.word, t.word);
      Scalar c = s.coeff * t.coeff;
      if (t.diff) {
        c = Scalar(static_cast<double>(
                detail::sign_power(table.basis().rho(*t.diff), detail::count_adapted(s.word)))) *
            c;
      }
      if (s.diff && t.diff) {
        for (const auto& [g, k] : table.product(*s.diff, *t.diff)) out.push_back(Term{k * c, w, g});
      } else {
        out.push_back(Term{c, w, s.diff ? s.diff : t.diff});
      }
    }
  }
  return Expr::from_terms(std::move(out));
}

/// Product of a chain of expressions, left to right.
inline Expr mul(std::initializer_list<Expr> factors, const ItoTable& table) {
  Expr acc = Expr::one();
  for (const Expr& f : factors) acc = mul(acc, f, table);
  return acc;
}

/// (c dM_a w)* = conj(c) w* dM_{a*} = conj(c) rho_{a*}^{#adapted(w)} dM_{a*} w*.
inline Expr adjoint_expr(const Expr& e, const ItoTable& table) {
  detail::check_labels(e, table, "adjoint_expr");
  std::vector<Term> out;
  for (const Term& t : e.terms()) {
    Scalar c = t.coeff.conj();
    std::optional<std::string> d;
    if (t.diff) {
      d = table.basis().star(*t.diff);
      c = Scalar(static_cast<double>(detail::sign_power(table.basis().rho(*d), detail::count_adapted(t.word)))) * c;
    }
    out.push_back(Term{c, adjoint(t.word), d});
  }
  return Expr::from_terms(std::move(out));
}

/// Adjoint of a differential-free expression.
inline Expr adjoint_expr(const Expr& e) {
  if (e.has_differentials()) {
    throw ValidationError("adjoint_expr: expression carries differentials; pass the Ito table");
  }
  return adjoint_expr(e, ItoTable::classical());
}

/// d(XY) = dX Y + X dY + dX dY for differential-free X, Y and differential
/// expressions dX, dY.
inline Expr ito_product(const Expr& x, const Expr& dx, const Expr& y, const Expr& dy, const ItoTable& table) {
  if (x.has_differentials() || y.has_differentials()) {
    throw ValidationError("ito_product: X and Y must be free of differentials");
  }
  for (const Expr* d : {&dx, &dy}) {
    for (const Term& t : d->terms()) {
      if (!t.diff) throw ValidationError("ito_product: dX and dY must be differential expressions");
    }
  }
  return mul(dx, y, table) + mul(x, dy, table) + mul(dx, dy, table);
}

/// Groups terms by differential. Each group holds the coefficient with the
/// differential stripped; the differential-free group sits under kNoDifferential.
inline std::map<std::string, Expr> collect(const Expr& e) {
  std::map<std::string, std::vector<Term>> groups;
  for (const Term& t : e.terms()) {
    groups[t.diff ? *t.diff : kNoDifferential].push_back(Term{t.coeff, t.word, std::nullopt});
  }
  std::map<std::string, Expr> out;
  for (auto& [k, v] : groups) out.emplace(k, Expr::from_terms(std::move(v)));
  return out;
}

/// Inverse of collect().
inline Expr reassemble(const std::map<std::string, Expr>& groups) {
  std::vector<Term> out;
  for (const auto& [k, g] : groups) {
    for (const Term& t : g.terms()) {
      out.push_back(Term{t.coeff, t.word, k == kNoDifferential ? std::nullopt : std::optional<std::string>(k)});
    }
  }
  return Expr::from_terms(std::move(out));
}

/// Coefficient group of one label (zero when absent).
inline Expr coefficient(const Expr& e, const std::string& label) {
  auto g = collect(e);
  auto it = g.find(label);
  return it == g.end() ? Expr::zero() : it->second;
}

/// dM_label times a differential-free expression, i.e. the term dM_label E.
inline Expr with_differential(const std::string& label, const Expr& e) {
  if (e.has_differentials()) throw ValidationError("with_differential: expression already carries a differential");
  std::vector<Term> out;
  for (const Term& t : e.terms()) out.push_back(Term{t.coeff, t.word, label});
  return Expr::from_terms(std::move(out));
}

/// The commutation automorphism rho_label applied to E: with global signs it
/// multiplies each term by rho^(number of adapted letters).
inline Expr rho(const std::string& label, const Expr& e, const ItoTable& table) {
  const int r = table.basis().rho(label);
  std::vector<Term> out;
  for (const Term& t : e.terms()) {
    out.push_back(Term{Scalar(static_cast<double>(detail::sign_power(r, detail::count_adapted(t.word)))) * t.coeff,
                       t.word, t.diff});
  }
  return Expr::from_terms(std::move(out));
}

}  // namespace qctl::ito

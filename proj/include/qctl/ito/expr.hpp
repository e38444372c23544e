#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "qctl/ito/scalar.hpp"

namespace qctl::ito {

/// An operator symbol inside a word. Identity is the empty word, so there is
/// no identity letter.
struct Letter {
  std::string name;
  bool star = false;
  /// Adapted processes pick up the rho sign of a differential they cross;
  /// constant (initial-space) operators commute with every differential.
  bool adapted = true;
  bool self_adjoint = false;
  /// Name of the letter that cancels this one when adjacent (R next to R^-1).
  std::string inverse;

  Letter starred() const {
    if (self_adjoint) return *this;
    Letter l = *this;
    l.star = !star;
    return l;
  }
  std::string str() const { return star ? name + "*" : name; }

  friend bool operator==(const Letter& a, const Letter& b) {
    return a.name == b.name && a.star == b.star;
  }
  friend bool operator<(const Letter& a, const Letter& b) {
    return std::tie(a.name, a.star) < std::tie(b.name, b.star);
  }
};

/// Adapted process (e.g. Pi, U, X-hat).
inline Letter process(std::string name, bool self_adjoint = false) {
  return Letter{std::move(name), false, true, self_adjoint, {}};
}

/// Constant operator on the initial space (e.g. H, L, X of the flow).
inline Letter constant(std::string name, bool self_adjoint = false) {
  return Letter{std::move(name), false, false, self_adjoint, {}};
}

/// Self-adjoint invertible pair (R, R^-1) whose adjacent products cancel.
inline std::pair<Letter, Letter> invertible_pair(const std::string& name, bool adapted = true) {
  Letter a{name, false, adapted, true, name + "^-1"};
  Letter b{name + "^-1", false, adapted, true, name};
  return {a, b};
}

using Word = std::vector<Letter>;

inline Word adjoint(const Word& w) {
  Word out;
  out.reserve(w.size());
  for (auto it = w.rbegin(); it != w.rend(); ++it) out.push_back(it->starred());
  return out;
}

/// Cancels adjacent inverse pairs until none remain.
inline Word simplify(const Word& w) {
  Word out;
  out.reserve(w.size());
  for (const Letter& l : w) {
    if (!out.empty() && !l.inverse.empty() && out.back().name == l.inverse &&
        out.back().star == l.star) {
      out.pop_back();
      continue;
    }
    out.push_back(l);
  }
  return out;
}

inline std::string word_str(const Word& w) {
  if (w.empty()) return "I";
  std::string s;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i) s += " ";
    s += w[i].str();
  }
  return s;
}

/// coeff * dM_diff * word. The differential, when present, sits to the left
/// of the word (left stochastic integral convention).
struct Term {
  Scalar coeff;
  Word word;
  std::optional<std::string> diff;
};

/// Canonical noncommutative expression: terms sorted by (differential, word),
/// like terms merged, zero coefficients dropped, at most one differential per
/// term.
class Expr {
 public:
  Expr() = default;

  static Expr from_terms(std::vector<Term> terms) {
    Expr e;
    e.terms_ = std::move(terms);
    e.canonicalize();
    return e;
  }
  static Expr scalar(const Scalar& s) { return from_terms({Term{s, {}, std::nullopt}}); }
  static Expr one() { return scalar(Scalar(1.0)); }
  static Expr zero() { return Expr(); }
  static Expr letter(const Letter& l) { return from_terms({Term{Scalar(1.0), {l}, std::nullopt}}); }
  static Expr word(const Word& w) { return from_terms({Term{Scalar(1.0), w, std::nullopt}}); }
  static Expr differential(const std::string& label) {
    return from_terms({Term{Scalar(1.0), {}, label}});
  }

  const std::vector<Term>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  bool has_differentials() const {
    return std::any_of(terms_.begin(), terms_.end(), [](const Term& t) { return t.diff.has_value(); });
  }

  friend Expr operator+(const Expr& a, const Expr& b) {
    std::vector<Term> t = a.terms_;
    t.insert(t.end(), b.terms_.begin(), b.terms_.end());
    return from_terms(std::move(t));
  }
  Expr operator-() const {
    Expr e = *this;
    for (Term& t : e.terms_) t.coeff = -t.coeff;
    return e;
  }
  friend Expr operator-(const Expr& a, const Expr& b) { return a + (-b); }
  friend Expr operator*(const Scalar& s, const Expr& e) {
    std::vector<Term> t = e.terms_;
    for (Term& x : t) x.coeff = s * x.coeff;
    return from_terms(std::move(t));
  }
  Expr& operator+=(const Expr& b) { return *this = *this + b; }
  Expr& operator-=(const Expr& b) { return *this = *this - b; }

  friend bool operator==(const Expr& a, const Expr& b) {
    if (a.terms_.size() != b.terms_.size()) return false;
    for (std::size_t i = 0; i < a.terms_.size(); ++i) {
      const Term& x = a.terms_[i];
      const Term& y = b.terms_[i];
      if (x.diff != y.diff || x.word != y.word || !(x.coeff == y.coeff)) return false;
    }
    return true;
  }

  std::string str() const {
    if (terms_.empty()) return "0";
    std::string s;
    for (std::size_t i = 0; i < terms_.size(); ++i) {
      const Term& t = terms_[i];
      if (i) s += "\n+ ";
      s += "(" + t.coeff.str() + ")";
      if (t.diff) s += " " + *t.diff;
      s += " " + word_str(t.word);
    }
    return s;
  }

  /// Re-establishes canonical form. Idempotent.
  void canonicalize() {
    for (Term& t : terms_) t.word = simplify(t.word);
    std::stable_sort(terms_.begin(), terms_.end(), [](const Term& a, const Term& b) {
      return std::tie(a.diff, a.word) < std::tie(b.diff, b.word);
    });
    std::vector<Term> merged;
    merged.reserve(terms_.size());
    for (Term& t : terms_) {
      if (!merged.empty() && merged.back().diff == t.diff && merged.back().word == t.word) {
        merged.back().coeff += t.coeff;
      } else {
        merged.push_back(std::move(t));
      }
    }
    merged.erase(std::remove_if(merged.begin(), merged.end(),
                                [](const Term& t) { return t.coeff.is_zero(); }),
                 merged.end());
    terms_ = std::move(merged);
  }

 private:
  std::vector<Term> terms_;
};

}  // namespace qctl::ito

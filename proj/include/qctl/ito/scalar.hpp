#pragma once

#include <algorithm>
#include <complex>
#include <compare>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace qctl::ito {

using cplx = std::complex<double>;

/// A named commuting scalar (structure constant, sigma entry, ...).
/// Real symbols are their own conjugates; a complex symbol s has the
/// distinct conjugate symbol conj(s).
struct ScalarSymbol {
  std::string name;
  bool conjugated = false;
  bool real = true;

  ScalarSymbol conj() const {
    if (real) return *this;
    return {name, !conjugated, real};
  }
  std::string str() const { return conjugated ? "conj(" + name + ")" : name; }

  friend auto operator<=>(const ScalarSymbol&, const ScalarSymbol&) = default;
  friend bool operator==(const ScalarSymbol&, const ScalarSymbol&) = default;
};

/// Commutative polynomial in ScalarSymbols with complex coefficients.
/// Arithmetic is exact as long as the numeric coefficients are dyadic
/// rationals, which covers every table and derivation in this toolkit.
class Scalar {
 public:
  using Monomial = std::vector<ScalarSymbol>;  // sorted, with repetition

  Scalar() = default;
  Scalar(cplx c) {  // NOLINT(google-explicit-constructor)
    if (c != cplx(0.0)) terms_[{}] = c;
  }
  Scalar(double c) : Scalar(cplx(c)) {}  // NOLINT(google-explicit-constructor)

  static Scalar symbol(std::string name, bool real = true) {
    Scalar s;
    s.terms_[{ScalarSymbol{std::move(name), false, real}}] = 1.0;
    return s;
  }

  bool is_zero() const { return terms_.empty(); }
  const std::map<Monomial, cplx>& terms() const { return terms_; }

  /// The value when the polynomial has no symbols.
  std::optional<cplx> numeric() const {
    if (terms_.empty()) return cplx(0.0);
    if (terms_.size() == 1 && terms_.begin()->first.empty()) return terms_.begin()->second;
    return std::nullopt;
  }

  Scalar conj() const {
    Scalar out;
    for (const auto& [mono, c] : terms_) {
      Monomial m;
      m.reserve(mono.size());
      for (const auto& s : mono) m.push_back(s.conj());
      std::sort(m.begin(), m.end());
      out.add(m, std::conj(c));
    }
    return out;
  }

  friend Scalar operator+(Scalar a, const Scalar& b) {
    for (const auto& [m, c] : b.terms_) a.add(m, c);
    return a;
  }
  friend Scalar operator-(Scalar a, const Scalar& b) {
    for (const auto& [m, c] : b.terms_) a.add(m, -c);
    return a;
  }
  Scalar operator-() const { return Scalar() - *this; }
  friend Scalar operator*(const Scalar& a, const Scalar& b) {
    Scalar out;
    for (const auto& [ma, ca] : a.terms_) {
      for (const auto& [mb, cb] : b.terms_) {
        Monomial m = ma;
        m.insert(m.end(), mb.begin(), mb.end());
        std::sort(m.begin(), m.end());
        out.add(m, ca * cb);
      }
    }
    return out;
  }
  Scalar& operator+=(const Scalar& b) { return *this = *this + b; }

  friend bool operator==(const Scalar&, const Scalar&) = default;

  std::string str() const {
    if (terms_.empty()) return "0";
    std::string out;
    bool first = true;
    for (const auto& [mono, c] : terms_) {
      if (!first) out += " + ";
      first = false;
      const bool unit = c == cplx(1.0);
      if (!unit || mono.empty()) out += format_complex(c);
      for (std::size_t i = 0; i < mono.size(); ++i) {
        if (i > 0 || !unit) out += "*";
        out += mono[i].str();
      }
    }
    return out;
  }

  static std::string format_complex(cplx c) {
    char buf[96];
    if (c.imag() == 0.0) {
      std::snprintf(buf, sizeof buf, "%.17g", c.real());
    } else if (c.real() == 0.0) {
      std::snprintf(buf, sizeof buf, "%.17gi", c.imag());
    } else {
      std::snprintf(buf, sizeof buf, "(%.17g%+.17gi)", c.real(), c.imag());
    }
    return buf;
  }

 private:
  void add(const Monomial& m, cplx c) {
    auto it = terms_.find(m);
    if (it == terms_.end()) {
      if (c != cplx(0.0)) terms_.emplace(m, c);
      return;
    }
    it->second += c;
    if (it->second == cplx(0.0)) terms_.erase(it);
  }

  std::map<Monomial, cplx> terms_;
};

}  // namespace qctl::ito

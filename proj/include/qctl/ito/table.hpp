#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qctl/error.hpp"
#include "qctl/ito/expr.hpp"
#include "qctl/ito/scalar.hpp"

namespace qctl::ito {

/// Label of the time differential d tau (taken to be Lebesgue dt).
inline const std::string kTime = "dt";

/// Noise differential labels with their involution a -> a* and rho signs.
struct NoiseBasis {
  std::vector<std::string> labels;  // noise labels, dt excluded
  std::map<std::string, std::string> involution;
  std::map<std::string, int> rho_sign;

  bool contains(const std::string& l) const {
    return l == kTime || std::find(labels.begin(), labels.end(), l) != labels.end();
  }

  std::string star(const std::string& l) const {
    if (l == kTime) return kTime;
    auto it = involution.find(l);
    if (it == involution.end()) throw ValidationError("unknown differential label '" + l + "'");
    return it->second;
  }

  int rho(const std::string& l) const {
    if (l == kTime) return 1;
    auto it = rho_sign.find(l);
    if (it == rho_sign.end()) throw ValidationError("unknown differential label '" + l + "'");
    return it->second;
  }

  void validate() const {
    for (const auto& l : labels) {
      if (l == kTime) throw ValidationError("noise label may not be '" + kTime + "'");
      const std::string s = star(l);
      if (!contains(s) || s == kTime) throw ValidationError("involution of '" + l + "' leaves the basis");
      if (star(s) != l) throw ValidationError("involution is not its own inverse at '" + l + "'");
      const int r = rho(l);
      if (r != 1 && r != -1) throw ValidationError("rho sign of '" + l + "' must be +1 or -1");
    }
  }
};

/// Ito multiplication table dM_a dM_b = sum_g c^g(a,b) dM_g with constant
/// structure scalars. dt times anything is zero.
class ItoTable {
 public:
  using Entry = std::vector<std::pair<std::string, Scalar>>;
  using Sigma = std::array<std::array<Scalar, 2>, 2>;

  ItoTable(NoiseBasis basis, std::map<std::pair<std::string, std::string>, Entry> products,
           std::optional<Sigma> sigma = std::nullopt, std::string name = "custom")
      : basis_(std::move(basis)), products_(std::move(products)), sigma_(std::move(sigma)),
        name_(std::move(name)) {
    basis_.validate();
    for (const auto& [key, entry] : products_) {
      if (!basis_.contains(key.first) || !basis_.contains(key.second) || key.first == kTime ||
          key.second == kTime) {
        throw ValidationError("Ito table entry for unknown pair (" + key.first + ", " + key.second + ")");
      }
      for (const auto& [g, c] : entry) {
        if (!basis_.contains(g)) throw ValidationError("Ito table expands over unknown label '" + g + "'");
      }
    }
    if (sigma_) validate_sigma();
  }

  const NoiseBasis& basis() const { return basis_; }
  const std::string& name() const { return name_; }
  const std::optional<Sigma>& sigma() const { return sigma_; }
  bool is_levy_pair() const { return sigma_.has_value(); }

  /// Expansion of dM_a dM_b as (label, scalar) pairs.
  Entry product(const std::string& a, const std::string& b) const {
    if (!basis_.contains(a)) throw ValidationError("unknown differential label '" + a + "'");
    if (!basis_.contains(b)) throw ValidationError("unknown differential label '" + b + "'");
    if (a == kTime || b == kTime) return {};
    auto it = products_.find({a, b});
    return it == products_.end() ? Entry{} : it->second;
  }

  /// Coefficient c_g(a, b) of dM_g in dM_a dM_b (g may be dt, giving c_0).
  Scalar structure(const std::string& g, const std::string& a, const std::string& b) const {
    Scalar s;
    for (const auto& [l, c] : product(a, b)) {
      if (l == g) s += c;
    }
    return s;
  }

  /// Deterministic calculus: dt only.
  static ItoTable classical() { return ItoTable(NoiseBasis{}, {}, std::nullopt, "classical"); }

  /// Levy pair (M1, M2 = M1*) with dM_b* dM_a = sigma_ba dt (indices 1-based
  /// in the math, 0-based in the array).
  static ItoTable levy_pair(const Sigma& sigma, int rho, const std::string& m1 = "dM1",
                            const std::string& m2 = "dM2", std::string name = "levy-pair") {
    NoiseBasis b;
    b.labels = {m1, m2};
    b.involution = {{m1, m2}, {m2, m1}};
    b.rho_sign = {{m1, rho}, {m2, rho}};
    const std::array<std::string, 2> lab = {m1, m2};
    std::map<std::pair<std::string, std::string>, Entry> prod;
    // dM_x dM_y = dM_{x*}^* dM_y = sigma_{x* y} dt.
    for (int x = 0; x < 2; ++x) {
      for (int y = 0; y < 2; ++y) {
        const int xs = 1 - x;
        const Scalar& s = sigma[xs][y];
        if (!s.is_zero()) prod[{lab[x], lab[y]}] = {{kTime, s}};
      }
    }
    return ItoTable(std::move(b), std::move(prod), sigma, std::move(name));
  }

  /// Boson Fock first-order white noise: dA dA^dag = dt, all other products 0.
  static ItoTable boson_fock() {
    Sigma s{};
    s[1][1] = Scalar(1.0);
    return levy_pair(s, +1, "dA", "dAdag", "boson-fock");
  }

  /// Levy pair with symbolic sigma: sigma_11, sigma_22 real, sigma_21 = conj(sigma_12).
  static ItoTable symbolic_levy_pair(int rho) {
    Sigma s;
    s[0][0] = Scalar::symbol("s11");
    s[1][1] = Scalar::symbol("s22");
    s[0][1] = Scalar::symbol("s12", false);
    s[1][0] = s[0][1].conj();
    return levy_pair(s, rho, "dM1", "dM2", rho > 0 ? "symbolic-boson-pair" : "symbolic-fermion-pair");
  }

  /// Full Hudson-Parthasarathy table including the gauge (number) process:
  /// dA dAdag = dt, dA dL = dA, dL dAdag = dAdag, dL dL = dL.
  static ItoTable boson_fock_with_number() {
    NoiseBasis b;
    b.labels = {"dA", "dAdag", "dLambda"};
    b.involution = {{"dA", "dAdag"}, {"dAdag", "dA"}, {"dLambda", "dLambda"}};
    b.rho_sign = {{"dA", 1}, {"dAdag", 1}, {"dLambda", 1}};
    std::map<std::pair<std::string, std::string>, Entry> prod;
    prod[{"dA", "dAdag"}] = {{kTime, Scalar(1.0)}};
    prod[{"dA", "dLambda"}] = {{"dA", Scalar(1.0)}};
    prod[{"dLambda", "dAdag"}] = {{"dAdag", Scalar(1.0)}};
    prod[{"dLambda", "dLambda"}] = {{"dLambda", Scalar(1.0)}};
    return ItoTable(std::move(b), std::move(prod), std::nullopt, "boson-fock-number");
  }

 private:
  void validate_sigma() const {
    bool numeric = true;
    std::array<std::array<cplx, 2>, 2> v{};
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        auto n = (*sigma_)[i][j].numeric();
        if (!n) numeric = false;
        else v[i][j] = *n;
      }
    }
    if (!numeric) return;
    // Hermitian psd 2x2: real nonnegative diagonal, v01 = conj(v10), det >= 0.
    const bool herm = v[0][0].imag() == 0.0 && v[1][1].imag() == 0.0 && v[0][1] == std::conj(v[1][0]);
    const double det = v[0][0].real() * v[1][1].real() - std::norm(v[0][1]);
    if (!herm || v[0][0].real() < 0.0 || v[1][1].real() < 0.0 || det < 0.0) {
      throw ValidationError("Levy-pair sigma matrix is not positive (Hermitian psd)");
    }
  }

  NoiseBasis basis_;
  std::map<std::pair<std::string, std::string>, Entry> products_;
  std::optional<Sigma> sigma_;
  std::string name_;
};

}  // namespace qctl::ito

#pragma once

#include <map>
#include <string>

#include <json.hpp>

#include "qctl/ito/calculus.hpp"
#include "qctl/ito/expr.hpp"

namespace qctl::ito {

/// Scalar as a list of [[re, im], [symbol, ...]] monomials.
inline nlohmann::ordered_json to_json(const Scalar& s) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const auto& [mono, c] : s.terms()) {
    nlohmann::ordered_json syms = nlohmann::ordered_json::array();
    for (const auto& sym : mono) syms.push_back(sym.str());
    // + 0.0 folds -0.0 into 0.0 so that equal scalars serialize identically.
    out.push_back({{c.real() + 0.0, c.imag() + 0.0}, syms});
  }
  return out;
}

/// Expression as a list of [coefficient, word, differential] triples in
/// canonical order; the differential is null when absent.
inline nlohmann::ordered_json to_json(const Expr& e) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const Term& t : e.terms()) {
    nlohmann::ordered_json word = nlohmann::ordered_json::array();
    for (const Letter& l : t.word) word.push_back(l.str());
    nlohmann::ordered_json d = t.diff ? nlohmann::ordered_json(*t.diff) : nlohmann::ordered_json(nullptr);
    out.push_back({to_json(t.coeff), word, d});
  }
  return out;
}

inline nlohmann::ordered_json to_json(const std::map<std::string, Expr>& groups) {
  nlohmann::ordered_json out = nlohmann::ordered_json::object();
  for (const auto& [k, v] : groups) out[k] = to_json(v);
  return out;
}

}  // namespace qctl::ito

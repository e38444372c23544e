#pragma once

#include <cmath>
#include <string>

#include <json.hpp>

#include "qctl/error.hpp"
#include "qctl/operator.hpp"

namespace qctl::io {

using json = nlohmann::ordered_json;

/// A complex entry [re, im].
inline cplx complex_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw ValidationError(where + ": complex entry must be [re, im]");
  }
  const cplx c(j[0].get<double>(), j[1].get<double>());
  if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) throw ValidationError(where + ": entry is not finite");
  return c;
}

inline json complex_to_json(cplx c) { return json::array({c.real(), c.imag()}); }

/// Row-major nested arrays of [re, im] entries; the matrix must be square.
inline Operator matrix_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw ValidationError(where + ": matrix literal must be a non-empty array of rows");
  const Index n = static_cast<Index>(j.size());
  Matrix m(n, n);
  for (Index i = 0; i < n; ++i) {
    const json& row = j[i];
    if (!row.is_array() || static_cast<Index>(row.size()) != n) {
      throw ValidationError(where + ": row " + std::to_string(i) + " must have " + std::to_string(n) + " entries");
    }
    for (Index k = 0; k < n; ++k) {
      m(i, k) = complex_from_json(row[k], where + "[" + std::to_string(i) + "][" + std::to_string(k) + "]");
    }
  }
  return Operator(m);
}

inline json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index k = 0; k < m.cols(); ++k) row.push_back(complex_to_json(m(i, k)));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Vector vector_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw ValidationError(where + ": vector literal must be a non-empty array");
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(i) = complex_from_json(j[i], where + "[" + std::to_string(i) + "]");
  return v;
}

}  // namespace qctl::io

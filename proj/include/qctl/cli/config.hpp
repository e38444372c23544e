#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qctl/control/classical_lqr.hpp"
#include "qctl/control/probe.hpp"
#include "qctl/error.hpp"
#include "qctl/flow/model.hpp"
#include "qctl/flow/simulate.hpp"
#include "qctl/io/matrix_json.hpp"
#include "qctl/riccati/cost.hpp"
#include "qctl/riccati/paper_are.hpp"

namespace qctl::cli {

using json = nlohmann::ordered_json;

inline const std::vector<std::string>& kinds() {
  static const std::vector<std::string> k{"derive",           "solve-are", "riccati",      "simulate",
                                          "probe-optimality", "lemma1",    "classical-lqr"};
  return k;
}

struct DeriveSpec {
  std::string table = "boson-fock";
  int orientation = 1;
  bool general_wz = false;
  std::optional<Matrix> sigma;  // numeric Levy pair
  int rho = 1;
};

struct AreSpec {
  std::string method = "care";  // care | paper
  Operator F, G, R, Q, H, X;
  std::optional<Operator> Phi;
  double tol = 1e-10;
  AreForm form = AreForm::paper;
};

/// Parsed and validated experiment description.
struct ExperimentConfig {
  std::string kind;
  json raw;  // the document as read, echoed into the manifest
  std::uint64_t seed = 0;
  std::string output;

  std::optional<HPModel> model;
  std::optional<ExpVectorState> state;
  std::optional<CostSpec> cost;
  std::optional<Operator> X, M;
  std::optional<int> steps;

  DeriveSpec derive;
  AreSpec are;
  std::optional<Operator> affine_drift;
  int picard_iterations = 0;
  std::vector<Operator> observables;
  GeneratorVariant variant = GeneratorVariant::standard;
  int collision_levels = 0;
  ProbeOptions probe;
  ClassicalLqrProblem lqr;

  TimeGrid grid(double T) const { return steps ? TimeGrid(T, *steps) : TimeGrid::for_horizon(T); }
};

namespace detail {

inline const json& require(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw ValidationError(where + ": missing field '" + key + "'");
  return j.at(key);
}

inline double number(const json& j, const std::string& where) {
  if (!j.is_number()) throw ValidationError(where + ": expected a number");
  return j.get<double>();
}

inline int integer(const json& j, const std::string& where) {
  if (!j.is_number_integer()) throw ValidationError(where + ": expected an integer");
  return j.get<int>();
}

inline std::optional<Operator> opt_matrix(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) return std::nullopt;
  return io::matrix_from_json(j.at(key), where + "." + key);
}

inline void same_dim(const Operator& a, Index n, const std::string& where) {
  if (a.dim() != n) throw DimensionError(where + ": expected dimension " + std::to_string(n));
}

inline HPModel parse_model(const json& j) {
  const std::string w = "model";
  if (!j.is_object()) throw ValidationError("model: expected an object");
  HPModel m;
  m.H = io::matrix_from_json(require(j, "H", w), "model.H");
  const Index n = m.H.dim();
  m.L = j.contains("L") ? io::matrix_from_json(j.at("L"), "model.L") : Operator::zero(n);
  m.F_ = opt_matrix(j, "F", w);
  m.G_ = opt_matrix(j, "G", w);
  m.Psi_ = opt_matrix(j, "Psi", w);
  m.Phi_ = opt_matrix(j, "Phi", w);
  m.T = j.contains("T") ? number(j.at("T"), "model.T") : 1.0;
  m.validate();
  return m;
}

inline ExpVectorState parse_state(const json& j, Index n, double T) {
  if (!j.is_object()) throw ValidationError("state: expected an object");
  const Vector v = io::vector_from_json(require(j, "xi0", "state"), "state.xi0");
  if (v.size() != n) throw DimensionError("state.xi0: expected dimension " + std::to_string(n));
  PiecewiseConstant f;
  if (j.contains("f")) {
    const json& jf = j.at("f");
    const json& bp = require(jf, "breakpoints", "state.f");
    const json& vals = require(jf, "values", "state.f");
    if (!bp.is_array() || !vals.is_array()) throw ValidationError("state.f: breakpoints and values must be arrays");
    std::vector<double> b;
    std::vector<cplx> c;
    for (std::size_t i = 0; i < bp.size(); ++i) b.push_back(number(bp[i], "state.f.breakpoints"));
    for (std::size_t i = 0; i < vals.size(); ++i) c.push_back(io::complex_from_json(vals[i], "state.f.values"));
    f = PiecewiseConstant(b, c);
  }
  ExpVectorState s = ExpVectorState::from_vector(v, f);
  s.f.check_within(T);
  return s;
}

/// Either explicit weights or the flow form {X, M} (Q = X*X, R = I, Q_T = M).
inline CostSpec parse_cost(const json& j, Index n, std::optional<Operator>& X, std::optional<Operator>& M) {
  if (!j.is_object()) throw ValidationError("cost: expected an object");
  const std::string w = "cost";
  X = opt_matrix(j, "X", w);
  M = opt_matrix(j, "M", w);
  if (X) same_dim(*X, n, "cost.X");
  if (M) same_dim(*M, n, "cost.M");
  CostSpec c = X ? CostSpec::quadratic(*X, M ? *M : Operator::zero(n)) : CostSpec::zeros(n);
  if (!X && M) c.QT = *M;
  if (auto q = opt_matrix(j, "Q", w)) c.Q = *q;
  if (auto r = opt_matrix(j, "R", w)) c.R = *r;
  if (auto m = opt_matrix(j, "m", w)) c.m = *m;
  if (auto e = opt_matrix(j, "eta", w)) c.eta = *e;
  if (auto q = opt_matrix(j, "QT", w)) c.QT = *q;
  if (auto m = opt_matrix(j, "mT", w)) c.mT = *m;
  c.Q0 = opt_matrix(j, "Q0", w);
  c.m0 = opt_matrix(j, "m0", w);
  if (c.dim() != n) throw DimensionError("cost: expected dimension " + std::to_string(n));
  c.validate();
  return c;
}

inline GeneratorVariant parse_variant(const std::string& s) {
  if (s == "standard") return GeneratorVariant::standard;
  if (s == "swapped_f_terms") return GeneratorVariant::swapped_f_terms;
  if (s == "no_jump_term") return GeneratorVariant::no_jump_term;
  throw ValidationError("simulate.variant: unknown variant '" + s + "'");
}

inline std::string string_field(const json& j, const char* key, const std::string& where, std::string fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_string()) throw ValidationError(where + "." + key + ": expected a string");
  return j.at(key).get<std::string>();
}

}  // namespace detail

/// Parses a configuration document; `kind_hint` (the subcommand) fills in or
/// must agree with the document's "kind".
inline ExperimentConfig parse_config(const json& doc, const std::string& kind_hint = "") {
  using namespace detail;
  if (!doc.is_object()) throw ValidationError("config: expected a JSON object");
  ExperimentConfig c;
  c.raw = doc;
  c.kind = string_field(doc, "kind", "config", kind_hint);
  if (!kind_hint.empty() && c.kind != kind_hint) {
    throw ValidationError("config: kind '" + c.kind + "' does not match subcommand '" + kind_hint + "'");
  }
  if (std::find(kinds().begin(), kinds().end(), c.kind) == kinds().end()) {
    throw ValidationError("config: unknown kind '" + c.kind + "'");
  }
  if (doc.contains("seed")) {
    if (!doc.at("seed").is_number_unsigned()) throw ValidationError("config.seed: expected an unsigned integer");
    c.seed = doc.at("seed").get<std::uint64_t>();
  }
  c.output = string_field(doc, "output", "config", "");
  if (doc.contains("steps")) {
    c.steps = integer(doc.at("steps"), "config.steps");
    if (*c.steps < 1) throw ValidationError("config.steps: must be positive");
  }

  const bool needs_model = c.kind == "riccati" || c.kind == "simulate" || c.kind == "probe-optimality" ||
                           c.kind == "lemma1";
  if (needs_model) {
    c.model = parse_model(require(doc, "model", "config"));
    const Index n = c.model->dim();
    if (c.kind != "riccati") c.state = parse_state(require(doc, "state", "config"), n, c.model->T);
    if (doc.contains("cost")) c.cost = parse_cost(doc.at("cost"), n, c.X, c.M);
  }

  if (c.kind == "derive") {
    const json& d = doc.contains("derive") ? doc.at("derive") : json::object();
    c.derive.table = string_field(d, "table", "derive", "boson-fock");
    if (d.contains("orientation")) c.derive.orientation = integer(d.at("orientation"), "derive.orientation");
    if (c.derive.orientation != 1 && c.derive.orientation != -1) {
      throw ValidationError("derive.orientation: must be +1 or -1");
    }
    if (d.contains("general_wz")) {
      if (!d.at("general_wz").is_boolean()) throw ValidationError("derive.general_wz: expected a boolean");
      c.derive.general_wz = d.at("general_wz").get<bool>();
    }
    if (c.derive.table == "levy-pair") {
      c.derive.sigma = io::matrix_from_json(require(d, "sigma", "derive"), "derive.sigma").matrix();
      if (c.derive.sigma->rows() != 2) throw DimensionError("derive.sigma: must be 2x2");
      if (d.contains("rho")) c.derive.rho = integer(d.at("rho"), "derive.rho");
      if (c.derive.rho != 1 && c.derive.rho != -1) throw ValidationError("derive.rho: must be +1 or -1");
    } else {
      static const std::vector<std::string> tables{"classical", "boson-fock", "boson-fock-with-number",
                                                   "symbolic-levy-boson", "symbolic-levy-fermion"};
      if (std::find(tables.begin(), tables.end(), c.derive.table) == tables.end()) {
        throw ValidationError("derive.table: unknown table '" + c.derive.table + "'");
      }
    }
  } else if (c.kind == "solve-are") {
    const json& a = require(doc, "are", "config");
    c.are.method = string_field(a, "method", "are", "care");
    if (c.are.method == "care") {
      c.are.F = io::matrix_from_json(require(a, "F", "are"), "are.F");
      const Index n = c.are.F.dim();
      c.are.G = a.contains("G") ? io::matrix_from_json(a.at("G"), "are.G") : Operator::identity(n);
      c.are.R = a.contains("R") ? io::matrix_from_json(a.at("R"), "are.R") : Operator::identity(n);
      c.are.Q = io::matrix_from_json(require(a, "Q", "are"), "are.Q");
      c.are.Phi = opt_matrix(a, "Phi", "are");
      for (const Operator* o : {&c.are.G, &c.are.R, &c.are.Q}) same_dim(*o, n, "are");
      if (c.are.Phi) same_dim(*c.are.Phi, n, "are.Phi");
      certify_psd(c.are.Q);
      CostSpec probe_r = CostSpec::zeros(n);
      probe_r.R = c.are.R;
      probe_r.R_inverse();
      if (a.contains("tol")) c.are.tol = number(a.at("tol"), "are.tol");
      if (!(c.are.tol > 0.0)) throw ValidationError("are.tol: must be positive");
    } else if (c.are.method == "paper") {
      c.are.H = io::matrix_from_json(require(a, "H", "are"), "are.H");
      c.are.X = io::matrix_from_json(require(a, "X", "are"), "are.X");
      same_dim(c.are.X, c.are.H.dim(), "are.X");
      certify_hermitian(c.are.H);
      certify_hermitian(c.are.X);
      const std::string form = string_field(a, "form", "are", "paper");
      if (form == "paper") {
        c.are.form = AreForm::paper;
      } else if (form == "derived") {
        c.are.form = AreForm::derived;
      } else {
        throw ValidationError("are.form: must be 'paper' or 'derived'");
      }
    } else {
      throw ValidationError("are.method: must be 'care' or 'paper'");
    }
  } else if (c.kind == "riccati") {
    if (!c.cost) throw ValidationError("config: missing field 'cost'");
    c.affine_drift = opt_matrix(doc, "affine_drift", "config");
    if (c.affine_drift) same_dim(*c.affine_drift, c.model->dim(), "affine_drift");
    if (doc.contains("picard_iterations")) {
      c.picard_iterations = integer(doc.at("picard_iterations"), "config.picard_iterations");
      if (c.picard_iterations < 0) throw ValidationError("config.picard_iterations: must be >= 0");
    }
  } else if (c.kind == "simulate") {
    const json& obs = require(doc, "observables", "config");
    if (!obs.is_array() || obs.empty()) throw ValidationError("config.observables: expected a non-empty array");
    for (std::size_t i = 0; i < obs.size(); ++i) {
      c.observables.push_back(io::matrix_from_json(obs[i], "observables[" + std::to_string(i) + "]"));
      same_dim(c.observables.back(), c.model->dim(), "observables");
    }
    c.variant = parse_variant(string_field(doc, "variant", "config", "standard"));
    if (doc.contains("collision_levels")) {
      c.collision_levels = integer(doc.at("collision_levels"), "config.collision_levels");
      if (c.collision_levels != 0 && c.collision_levels < 2) {
        throw ValidationError("config.collision_levels: 0 (off) or at least 2");
      }
    }
    if (!c.model->is_hudson_parthasarathy()) throw ValidationError("simulate: model must be in the unitary form");
  } else if (c.kind == "probe-optimality" || c.kind == "lemma1") {
    if (!c.X) throw ValidationError("config: cost.X is required for " + c.kind);
    if (c.kind == "probe-optimality") {
      if (!c.state->vacuum()) throw ValidationError("probe-optimality: vacuum states only");
      c.probe.seed = c.seed;
      if (doc.contains("epsilons")) {
        const json& e = doc.at("epsilons");
        if (!e.is_array() || e.empty()) throw ValidationError("config.epsilons: expected a non-empty array");
        c.probe.epsilons.clear();
        for (const auto& x : e) {
          c.probe.epsilons.push_back(number(x, "config.epsilons"));
          if (!(c.probe.epsilons.back() > 0.0)) throw ValidationError("config.epsilons: must be positive");
        }
      }
      if (doc.contains("trials")) c.probe.trials = integer(doc.at("trials"), "config.trials");
      if (c.probe.trials < 1) throw ValidationError("config.trials: must be positive");
    } else if (!c.model->is_hudson_parthasarathy()) {
      throw ValidationError("lemma1: model must be in the unitary form");
    }
  } else if (c.kind == "classical-lqr") {
    if (doc.contains("random")) {
      const json& r = doc.at("random");
      const int n = integer(require(r, "dim", "random"), "random.dim");
      if (n < 1) throw ValidationError("random.dim: must be positive");
      const double T = r.contains("T") ? number(r.at("T"), "random.T") : 1.0;
      if (!(T > 0.0)) throw ValidationError("random.T: must be positive");
      c.lqr = random_classical_lqr(c.seed, n, T);
    } else {
      const json& l = require(doc, "lqr", "config");
      c.lqr.F = io::matrix_from_json(require(l, "F", "lqr"), "lqr.F");
      const Index n = c.lqr.F.dim();
      c.lqr.G = l.contains("G") ? io::matrix_from_json(l.at("G"), "lqr.G") : Operator::identity(n);
      c.lqr.L_drift = l.contains("L_drift") ? io::matrix_from_json(l.at("L_drift"), "lqr.L_drift") : Operator::zero(n);
      c.lqr.C = l.contains("C") ? io::matrix_from_json(l.at("C"), "lqr.C") : Operator::identity(n);
      c.lqr.xi = io::vector_from_json(require(l, "xi", "lqr"), "lqr.xi");
      c.lqr.T = l.contains("T") ? number(l.at("T"), "lqr.T") : 1.0;
      std::optional<Operator> x, m;
      c.lqr.cost = doc.contains("cost") ? parse_cost(doc.at("cost"), n, x, m) : CostSpec::zeros(n);
    }
    c.lqr.validate();
  }
  return c;
}

inline ExperimentConfig load_config(const std::string& path, const std::string& kind_hint = "") {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("config: cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  json doc;
  try {
    doc = json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config: JSON parse error: ") + e.what());
  }
  return parse_config(doc, kind_hint);
}

}  // namespace qctl::cli

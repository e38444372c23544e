#pragma once

#include <chrono>
#include <filesystem>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qctl/cli/config.hpp"
#include "qctl/control/classical_lqr.hpp"
#include "qctl/control/cost.hpp"
#include "qctl/control/gain.hpp"
#include "qctl/control/probe.hpp"
#include "qctl/error.hpp"
#include "qctl/flow/collision.hpp"
#include "qctl/flow/simulate.hpp"
#include "qctl/io/csv.hpp"
#include "qctl/io/matrix_json.hpp"
#include "qctl/ito/derivations.hpp"
#include "qctl/ito/serialize.hpp"
#include "qctl/riccati/care.hpp"
#include "qctl/riccati/ode.hpp"
#include "qctl/riccati/paper_are.hpp"
#include "qctl/riccati/picard.hpp"

namespace qctl::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode { kOk = 0, kValidationFailure = 1, kNumericalFailure = 2, kOutputFailure = 3 };

/// Files produced by a run, in write order, plus the structured report.
struct Artifacts {
  std::vector<std::pair<std::string, std::string>> files;
  json report = json::object();
};

namespace detail {

inline ito::ItoTable derive_table(const DeriveSpec& d) {
  using ito::ItoTable;
  if (d.table == "classical") return ItoTable::classical();
  if (d.table == "boson-fock") return ItoTable::boson_fock();
  if (d.table == "boson-fock-with-number") return ItoTable::boson_fock_with_number();
  if (d.table == "symbolic-levy-boson") return ItoTable::symbolic_levy_pair(+1);
  if (d.table == "symbolic-levy-fermion") return ItoTable::symbolic_levy_pair(-1);
  ItoTable::Sigma s;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) s[i][j] = ito::Scalar((*d.sigma)(i, j));
  }
  return ItoTable::levy_pair(s, d.rho);
}

inline void run_derive(const ExperimentConfig& c, Artifacts& a) {
  const ito::ItoTable table = derive_table(c.derive);
  json& r = a.report;
  r["table"] = table.name();
  if (table.name() == "boson-fock") {
    const auto flow = ito::derive_flow_generator(table);
    r["flow"] = {{"dt", ito::to_json(flow.theta0)},
                 {"dA", ito::to_json(flow.coef_dA)},
                 {"dAdag", ito::to_json(flow.coef_dAdag)},
                 {"theta0_text", flow.theta0.str()},
                 {"dA_text", flow.coef_dA.str()},
                 {"dAdag_text", flow.coef_dAdag.str()},
                 {"matches", flow.matches()}};
  }
  ito::Theorem1Scenario sc;
  sc.table = table;
  sc.general_wz = c.derive.general_wz;
  const auto t1 = ito::verify_theorem1_cancellation(sc);
  r["theorem1"] = {{"general_wz", c.derive.general_wz}, {"zero", t1.zero()}, {"residual", ito::to_json(t1.groups)}};
  const auto p1 = ito::expand_proposition1(table, c.derive.orientation);
  r["proposition1"] = {{"orientation", p1.orientation},
                       {"pi_equations", ito::to_json(p1.pi_equations)},
                       {"r_equations", ito::to_json(p1.r_equations)},
                       {"diff_pi", ito::to_json(p1.diff_pi)},
                       {"diff_r", ito::to_json(p1.diff_r)},
                       {"matches_printed", p1.matches_printed()}};
  if (table.is_levy_pair() && c.derive.orientation == 1) {
    const auto lv = ito::levy_riccati_reduction(table);
    r["levy_riccati"] = {{"derived", ito::to_json(lv.derived)},
                         {"printed", ito::to_json(lv.printed)},
                         {"diff", ito::to_json(lv.diff)},
                         {"matches", lv.diff.is_zero()}};
  }
}

inline void run_solve_are(const ExperimentConfig& c, Artifacts& a) {
  json& r = a.report;
  r["method"] = c.are.method;
  if (c.are.method == "care") {
    const CareResult res = solve_care(c.are.F, c.are.G, c.are.R, c.are.Q, c.are.Phi, c.are.tol);
    r["residual"] = res.residual;
    r["iterations"] = res.iterations;
    r["initial_guess"] = res.initial_guess;
    r["residual_history"] = res.residual_history;
    r["Pi"] = io::matrix_to_json(res.Pi.matrix());
  } else {
    PaperAreOptions opt;
    opt.form = c.are.form;
    const PaperAreResult res = solve_paper_are(c.are.H, c.are.X, opt);
    r["form"] = to_string(res.form);
    r["feasible"] = res.feasible;
    r["trace_obstruction"] = res.trace_obstruction;
    r["residual"] = res.residual;
    r["max_trace_identity"] = res.max_trace_identity;
    r["iterations"] = res.iterations;
    r["Pi"] = io::matrix_to_json(res.Pi.matrix());
  }
}

inline void run_riccati(const ExperimentConfig& c, Artifacts& a) {
  const HPModel& m = *c.model;
  const TimeGrid grid = c.grid(m.T);
  RiccatiTrajectory tr = solve_riccati_ode(m, *c.cost, grid);
  tr.r = solve_auxiliary_ode(m, *c.cost, tr, c.affine_drift ? *c.affine_drift : Operator::zero(m.dim()), grid);
  io::CsvTable csv({"t", "i", "j", "pi_re", "pi_im", "r_re", "r_im"});
  for (int k = 0; k < grid.nodes(); ++k) {
    const Matrix& p = tr.Pi[k].matrix();
    const Matrix& rr = tr.r[k].matrix();
    for (Index i = 0; i < p.rows(); ++i) {
      for (Index j = 0; j < p.cols(); ++j) {
        csv.add_row({grid.t(k), static_cast<double>(i), static_cast<double>(j), p(i, j).real(), p(i, j).imag(),
                     rr(i, j).real(), rr(i, j).imag()});
      }
    }
  }
  a.files.emplace_back("riccati.csv", csv.text());
  json& r = a.report;
  r["steps"] = grid.steps;
  r["T"] = grid.T;
  r["Pi0"] = io::matrix_to_json(tr.Pi.front().matrix());
  r["max_asymmetry"] = tr.diagnostics.max_asymmetry;
  r["min_eigenvalue"] = tr.diagnostics.min_eigenvalue;
  r["noise_residual_dA"] = tr.diagnostics.noise_residual_dA;
  r["noise_residual_dAdag"] = tr.diagnostics.noise_residual_dAdag;
  if (c.picard_iterations > 0) {
    const PicardResult pr = picard_iterate(m, *c.cost, grid, c.picard_iterations);
    const RiccatiTrajectory fw = solve_riccati_ode_forward(m, *c.cost, grid);
    double gap = 0.0;
    for (int k = 0; k < grid.nodes(); ++k) gap = std::max(gap, (pr.last()[k].matrix() - fw.Pi[k].matrix()).norm());
    r["picard"] = {{"iterations", pr.iterates.size()},
                   {"decrease", pr.decrease},
                   {"step", pr.step},
                   {"min_iterate_eigenvalue", pr.min_iterate_eigenvalue},
                   {"gap_to_forward_ode", gap}};
  }
}

inline void add_trajectories(const Trajectories& tr, const std::string& name, Artifacts& a) {
  io::CsvTable csv({"t", "observable_index", "value_re", "value_im"});
  for (std::size_t k = 0; k < tr.t.size(); ++k) {
    for (std::size_t j = 0; j < tr.values.size(); ++j) {
      csv.add_row({tr.t[k], static_cast<double>(j), tr.values[j][k].real(), tr.values[j][k].imag()});
    }
  }
  a.files.emplace_back(name, csv.text());
}

inline void run_simulate(const ExperimentConfig& c, Artifacts& a) {
  const HPModel& m = *c.model;
  const TimeGrid grid = c.grid(m.T);
  FlowOptions opt;
  opt.variant = c.variant;
  const Trajectories tr = flow_expectations(m, *c.state, c.observables, grid, opt);
  add_trajectories(tr, "trajectories.csv", a);
  const UnitarityReport u = unitarity_residual(m, *c.state, grid, opt);
  json& r = a.report;
  r["steps"] = grid.steps;
  r["T"] = grid.T;
  r["unitarity_residual"] = u.residual;
  r["hermiticity_drift"] = u.hermiticity_drift;
  if (c.collision_levels > 0) {
    const CollisionResult col = collision_oracle(m, *c.state, c.observables, grid, c.collision_levels);
    add_trajectories(col.trajectories, "collision.csv", a);
    r["oracle_max_deviation"] = tr.max_abs_diff(col.trajectories);
    r["max_leakage"] = col.max_leakage;
    r["leakage_warning"] = col.leakage_warning;
  }
}

inline json cost_json(const CostReport& c) {
  json j = json::object();
  j["running_state"] = c.breakdown.running_state;
  j["running_control"] = c.breakdown.running_control;
  j["terminal"] = c.breakdown.terminal;
  return j;
}

inline void run_probe(const ExperimentConfig& c, Artifacts& a) {
  const HPModel& m = *c.model;
  const TimeGrid grid = c.grid(m.T);
  const Operator M = c.M ? *c.M : Operator::zero(m.dim());
  const ProbeReport p = optimality_probe(m, *c.X, M, *c.state, grid, c.probe);
  io::CsvTable csv({"trial", "epsilon", "gap"});
  for (const ProbeRow& row : p.rows) csv.add_row({static_cast<double>(row.trial), row.epsilon, row.gap});
  a.files.emplace_back("probe.csv", csv.text());
  json& r = a.report;
  r["steps"] = grid.steps;
  r["trials"] = c.probe.trials;
  r["epsilons"] = c.probe.epsilons;
  r["j_tilde"] = p.j_opt;
  r["min_value_prediction"] = p.min_value_prediction;
  r["prediction_error"] = p.prediction_error;
  r["min_gap"] = p.min_gap;
  r["gap_slope"] = p.gap_slope;
  r["min_trial_slope"] = p.min_trial_slope;
  r["max_trial_slope"] = p.max_trial_slope;
}

inline void run_lemma1(const ExperimentConfig& c, Artifacts& a) {
  const HPModel& m = *c.model;
  const TimeGrid grid = c.grid(m.T);
  const Lemma1Report l = lemma1_check(m, *c.X, *c.state, grid);
  json& r = a.report;
  r["steps"] = grid.steps;
  r["j_hat"] = l.j_hat;
  r["j"] = l.j;
  r["j_tilde"] = l.j_tilde;
  r["max_deviation"] = l.max_deviation;
  r["breakdown_j_hat"] = cost_json(eval_cost_flow(m, *c.X, *c.state, grid));
}

inline void run_classical_lqr(const ExperimentConfig& c, Artifacts& a) {
  const TimeGrid grid = c.grid(c.lqr.T);
  const ClassicalLqrReport l = classical_lqr_check(c.lqr, grid);
  json& r = a.report;
  r["steps"] = grid.steps;
  r["dim"] = c.lqr.dim();
  r["feedback_cost"] = l.feedback_cost;
  r["oracle_cost"] = l.oracle_cost;
  r["zero_control_cost"] = l.zero_control_cost;
  r["relative_gap"] = l.relative_gap;
}

inline void run_kind(const ExperimentConfig& c, Artifacts& a) {
  a.report["kind"] = c.kind;
  if (c.kind == "derive") return run_derive(c, a);
  if (c.kind == "solve-are") return run_solve_are(c, a);
  if (c.kind == "riccati") return run_riccati(c, a);
  if (c.kind == "simulate") return run_simulate(c, a);
  if (c.kind == "probe-optimality") return run_probe(c, a);
  if (c.kind == "lemma1") return run_lemma1(c, a);
  if (c.kind == "classical-lqr") return run_classical_lqr(c, a);
  throw ValidationError("unknown kind '" + c.kind + "'");
}

/// One-line JSON error record.
inline std::string error_line(const std::string& category, const std::string& message) {
  return json{{"error", category}, {"message", message}}.dump();
}

}  // namespace detail

/// Runs an experiment and writes report.json, the module's CSVs and
/// manifest.json into out_dir. Validation failures write nothing and return 1;
/// numerical failures still write the report (with the diagnostic) and the
/// manifest and return 2.
inline int run(const ExperimentConfig& c, const std::string& out_dir, std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  if (out_dir.empty()) {
    err << detail::error_line("validation", "no output directory (use --out or the config's \"output\")") << '\n';
    return kValidationFailure;
  }
  Artifacts a;
  std::string status = "ok";
  int code = kOk;
  try {
    detail::run_kind(c, a);
  } catch (const ValidationError& e) {
    err << detail::error_line("validation", e.what()) << '\n';
    return kValidationFailure;
  } catch (const NumericalError& e) {
    status = "numerical_error";
    code = kNumericalFailure;
    a.report["error"] = e.what();
    if (const auto* b = dynamic_cast<const BlowUpError*>(&e)) a.report["blowup_time"] = b->time();
    if (const auto* g = dynamic_cast<const GridTooCoarseError*>(&e)) a.report["refinement_delta"] = g->delta();
    if (const auto* s = dynamic_cast<const NearSingularError*>(&e)) a.report["separation"] = s->separation();
    err << detail::error_line("numerical", e.what()) << '\n';
  }
  a.report["status"] = status;
  a.files.emplace_back("report.json", a.report.dump(2) + "\n");

  try {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    json outputs = json::array();
    for (const auto& [name, content] : a.files) {
      io::write_file((fs::path(out_dir) / name).string(), content);
      outputs.push_back(name);
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    json manifest = json::object();
    manifest["toolkit"] = "qctl";
    manifest["version"] = kVersion;
    manifest["kind"] = c.kind;
    manifest["status"] = status;
    manifest["seed"] = c.seed;
    manifest["wall_time_seconds"] = wall;
    manifest["outputs"] = outputs;
    manifest["config"] = c.raw;
    io::write_file((fs::path(out_dir) / "manifest.json").string(), manifest.dump(2) + "\n");
  } catch (const std::exception& e) {
    err << detail::error_line("output", e.what()) << '\n';
    return kOutputFailure;
  }
  return code;
}

}  // namespace qctl::cli

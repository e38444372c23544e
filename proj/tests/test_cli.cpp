#include <sys/wait.h>

#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kScratch = QCTL_SCRATCH_DIR;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Runs a subcommand into a fresh output directory and returns the exit code.
int run_cli(const std::string& sub, const fs::path& config, const fs::path& out) {
  fs::remove_all(out);
  fs::create_directories(kScratch);
  const std::string cmd = std::string("\"") + QCTL_BIN + "\" " + sub + " --config \"" + config.string() +
                          "\" --out \"" + out.string() + "\" 2> \"" + out.string() + ".stderr\"";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path config(const std::string& name) { return fs::path(QCTL_CONFIG_DIR) / (name + ".json"); }

fs::path write_config(const std::string& name, const std::string& text) {
  fs::create_directories(kScratch);
  const fs::path p = kScratch / (name + ".json");
  std::ofstream(p) << text;
  return p;
}

}  // namespace

TEST_CASE("derive output matches the golden file", "[cli]") {
  const fs::path out = kScratch / "derive";
  REQUIRE(run_cli("derive", config("derive_boson_fock"), out) == 0);
  const std::string report = slurp(out / "report.json");
  CHECK(report == slurp(fs::path(QCTL_GOLDEN_DIR) / "derive_boson_fock.json"));
  const json j = json::parse(report);
  CHECK(j["flow"]["matches"] == true);
  CHECK(j["theorem1"]["zero"] == true);
  const json m = json::parse(slurp(out / "manifest.json"));
  CHECK(m["status"] == "ok");
  CHECK(m["kind"] == "derive");
}

TEST_CASE("riccati run reports tanh(1)", "[cli]") {
  const fs::path out = kScratch / "riccati";
  REQUIRE(run_cli("riccati", config("riccati_tanh"), out) == 0);
  const json j = json::parse(slurp(out / "report.json"));
  CHECK(std::abs(j["Pi0"][0][0][0].get<double>() - std::tanh(1.0)) <= 1e-8);
  CHECK(j.contains("noise_residual_dA"));
  CHECK(j.contains("noise_residual_dAdag"));
  const std::string csv = slurp(out / "riccati.csv");
  CHECK(csv.rfind("t,i,j,pi_re,pi_im,r_re,r_im\n", 0) == 0);
}

TEST_CASE("every shipped config runs", "[cli]") {
  const std::pair<const char*, const char*> runs[] = {
      {"simulate", "simulate_qubit_decay"},    {"lemma1", "lemma1_qubit_decay"},
      {"probe-optimality", "probe_qubit"},     {"solve-are", "solve_are_care_scalar"},
      {"solve-are", "solve_are_paper"},        {"classical-lqr", "classical_lqr_scalar"},
      {"riccati", "riccati_qubit_picard"}};
  for (const auto& [sub, name] : runs) {
    INFO(name);
    const fs::path out = kScratch / name;
    REQUIRE(run_cli(sub, config(name), out) == 0);
    const json m = json::parse(slurp(out / "manifest.json"));
    CHECK(m["status"] == "ok");
    for (const auto& f : m["outputs"]) CHECK(fs::exists(out / f.get<std::string>()));
  }
  const json lemma = json::parse(slurp(kScratch / "lemma1_qubit_decay" / "report.json"));
  CHECK(lemma["max_deviation"].get<double>() <= 1e-6);
  const json care = json::parse(slurp(kScratch / "solve_are_care_scalar" / "report.json"));
  CHECK(std::abs(care["Pi"][0][0][0].get<double>() - 1.0) <= 1e-10);
  const json paper = json::parse(slurp(kScratch / "solve_are_paper" / "report.json"));
  CHECK(paper["feasible"] == false);
  CHECK(std::abs(paper["trace_obstruction"].get<double>() - 2.0) <= 1e-12);
}

TEST_CASE("malformed input exits 1 and writes nothing", "[cli]") {
  const fs::path bad = write_config("bad_literal", R"({"kind": "riccati", "model": {"H": [[[0, 0], [1]]], "L": [[[0, 0]]], "T": 1}})");
  const fs::path out = kScratch / "bad_literal";
  CHECK(run_cli("riccati", bad, out) == 1);
  CHECK_FALSE(fs::exists(out / "report.json"));
  CHECK_FALSE(fs::exists(out / "manifest.json"));
  const json err = json::parse(slurp(out.string() + ".stderr"));
  CHECK(err["error"] == "validation");

  const fs::path syntax = write_config("bad_syntax", "{\"kind\": ");
  CHECK(run_cli("riccati", syntax, kScratch / "bad_syntax") == 1);

  const fs::path herm = write_config("bad_hermitian",
                                     R"({"kind": "simulate", "model": {"H": [[[0, 0], [1, 0]], [[0, 0], [0, 0]]],
                                         "L": [[[0, 0], [0, 0]], [[0, 0], [0, 0]]], "T": 1},
                                         "state": {"xi0": [[1, 0], [0, 0]]}})");
  CHECK(run_cli("simulate", herm, kScratch / "bad_hermitian") == 1);
  CHECK_FALSE(fs::exists(kScratch / "bad_hermitian" / "report.json"));
}

TEST_CASE("numerical failure exits 2 with a report", "[cli]") {
  const fs::path cfg = write_config("blowup", R"({"kind": "riccati",
      "model": {"H": [[[0, 0]]], "L": [[[0, 0]]], "F": [[[20, 0]]], "G": [[[0, 0]]], "Phi": [[[0, 0]]], "Psi": [[[0, 0]]], "T": 1},
      "cost": {"Q": [[[1, 0]]]}, "steps": 2000})");
  const fs::path out = kScratch / "blowup";
  CHECK(run_cli("riccati", cfg, out) == 2);
  const json j = json::parse(slurp(out / "report.json"));
  CHECK(j["status"] == "numerical_error");
  CHECK(j["blowup_time"].get<double>() > 0.0);
  CHECK(json::parse(slurp(out / "manifest.json"))["status"] == "numerical_error");
}

TEST_CASE("repeated runs produce byte-identical CSVs", "[cli]") {
  const std::pair<const char*, const char*> runs[] = {{"simulate", "simulate_qubit_decay"},
                                                      {"probe-optimality", "probe_qubit"},
                                                      {"riccati", "riccati_qubit_picard"}};
  for (const auto& [sub, name] : runs) {
    INFO(name);
    const fs::path a = kScratch / (std::string(name) + "_a"), b = kScratch / (std::string(name) + "_b");
    REQUIRE(run_cli(sub, config(name), a) == 0);
    REQUIRE(run_cli(sub, config(name), b) == 0);
    for (const auto& e : fs::directory_iterator(a)) {
      if (e.path().extension() != ".csv") continue;
      CHECK(slurp(e.path()) == slurp(b / e.path().filename()));
    }
  }
}

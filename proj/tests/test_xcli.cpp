#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "urbm/config.hpp"
#include "urbm/experiments.hpp"
#include "urbm/io.hpp"

namespace fs = std::filesystem;

namespace {

// Fresh scratch directory under the system temp root.
std::string scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("urbm_xcli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir.string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::string first_line(const std::string& path) {
  const std::string text = slurp(path);
  return text.substr(0, text.find('\n'));
}

// name -> content hash from a finalized run directory.
std::map<std::string, std::string> manifest_hashes(const std::string& dir) {
  const nlohmann::json m = nlohmann::json::parse(slurp(dir + "/manifest.json"));
  std::map<std::string, std::string> out;
  for (const auto& entry : m.at("files")) out[entry.at("name")] = entry.at("sha256");
  return out;
}

// Field named by the ConfigError that the flat config provokes ("" if none).
std::string rejected_field(const std::string& experiment, const nlohmann::json& flat) {
  try {
    urbm::resolve_config(experiment, flat);
  } catch (const urbm::ConfigError& e) {
    return e.field();
  }
  return "";
}

// Tiny-but-complete configs used by the end-to-end cases.
nlohmann::json tiny_ite(const std::string& out) {
  nlohmann::json flat;
  flat["ansatz.n"] = 2;
  flat["ansatz.m"] = 2;
  flat["model.boundary"] = "open";
  flat["integrator.steps"] = 30;
  flat["integrator.record_every"] = 10;
  flat["seed"] = 5;
  flat["out"] = out;
  return flat;
}

nlohmann::json tiny_quench(const std::string& out) {
  nlohmann::json flat;
  flat["ansatz.n"] = 3;
  flat["ansatz.alpha"] = 2;
  flat["integrator.steps"] = 100;
  flat["integrator.t_max"] = 0.05;
  flat["integrator.record_every"] = 20;
  flat["seed"] = 3;
  flat["out"] = out;
  return flat;
}

nlohmann::json tiny_open(const std::string& out, int workers) {
  nlohmann::json flat;
  flat["ansatz.n"] = 2;
  flat["ansatz.m"] = 2;
  flat["open.n_traj"] = 3;
  flat["open.exact_engine"] = true;
  flat["integrator.t_max"] = 0.05;
  flat["integrator.record_every"] = 20;
  flat["seed"] = 9;
  flat["workers"] = workers;
  flat["out"] = out;
  return flat;
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("per-experiment defaults fill the config") {
    const auto quench = urbm::resolve_config("quench", nlohmann::json::object());
    CHECK(quench.experiment == "quench");
    CHECK(quench.model == "tfi");
    CHECK(quench.boundary == "periodic");
    CHECK(quench.n == 8);
    CHECK(quench.m == 32);  // alpha = 4
    CHECK(quench.dt == 5e-4);
    CHECK(quench.t_max == 2.0);
    CHECK(quench.h_i == 0.5);
    CHECK(quench.h_f == 1.0);

    nlohmann::json hb;
    hb["model.kind"] = "heisenberg";
    const auto heis = urbm::resolve_config("quench", hb);
    CHECK(heis.dt == 2e-4);
    CHECK(heis.t_max == 1.0);
    CHECK(heis.jz_i == 1.0);
    CHECK(heis.jz_f == 0.5);
    CHECK(heis.hz == 1.0);

    const auto open = urbm::resolve_config("open", nlohmann::json::object());
    CHECK(open.boundary == "open");
    CHECK(open.n == 6);
    CHECK(open.m == 36);  // alpha = 6
    CHECK(open.h_i == 1.0);
    CHECK(open.gamma == 0.05);
    CHECK(open.n_traj == 2000);

    const auto ite = urbm::resolve_config("ite", nlohmann::json::object());
    CHECK(ite.n == 6);
    CHECK(ite.dtau == 1e-2);
    CHECK(ite.steps == 2500);
    CHECK(ite.record_every == 10);
  }

  TEST_CASE("hidden count follows the density ratio") {
    nlohmann::json flat;
    flat["ansatz.n"] = 14;
    flat["ansatz.alpha"] = 8;
    const auto cfg = urbm::resolve_config("quench", flat);
    CHECK(cfg.m == 112);
    CHECK(cfg.alpha == 8.0);

    nlohmann::json direct;
    direct["ansatz.n"] = 3;
    direct["ansatz.m"] = 5;
    CHECK(urbm::resolve_config("quench", direct).alpha == doctest::Approx(5.0 / 3.0));

    // Both keys are fine when they agree, rejected when they contradict.
    nlohmann::json both = direct;
    both["ansatz.alpha"] = 5.0 / 3.0;
    CHECK(urbm::resolve_config("quench", both).m == 5);
    both["ansatz.alpha"] = 2;
    CHECK(rejected_field("quench", both) == "ansatz.m");

    nlohmann::json frac;
    frac["ansatz.n"] = 3;
    frac["ansatz.alpha"] = 0.7;
    CHECK(rejected_field("quench", frac) == "ansatz.alpha");
  }

  TEST_CASE("rejected configurations name the offending field") {
    CHECK(rejected_field("quench", {{"integrator.step", 3}}) == "integrator.step");
    CHECK(rejected_field("quench", {{"integrator.dt", 0.0}}) == "integrator.dt");
    CHECK(rejected_field("quench", {{"integrator.t_max", -1.0}}) == "integrator.t_max");
    CHECK(rejected_field("ite", {{"integrator.steps", 0}}) == "integrator.steps");
    CHECK(rejected_field("quench", {{"ansatz.n", 20}}) == "ansatz.n");  // enumeration guard
    CHECK(rejected_field("quench", {{"model.kind", "xy"}}) == "model.kind");
    CHECK(rejected_field("quench", {{"model.boundary", "twisted"}}) == "model.boundary");
    CHECK(rejected_field("autocorr", {{"autocorr.sizes", {5, 7}}}) == "autocorr.sizes");
    CHECK(rejected_field("circuit_check", {{"circuit.n_max", 13}}) == "circuit.n_max");
    CHECK(rejected_field("gradient_scan", {{"scan.sizes", {0}}}) == "scan.sizes");
    CHECK(rejected_field("nonsense", nlohmann::json::object()) == "experiment");
    CHECK(rejected_field("quench", nlohmann::json::object()).empty());
  }

  TEST_CASE("the triangular model pins the site count to the lattice") {
    nlohmann::json flat;
    flat["model.kind"] = "tafi2d";
    const auto cfg = urbm::resolve_config("quench", flat);
    CHECK(cfg.lx == 4);
    CHECK(cfg.ly == 3);
    CHECK(cfg.n == 12);
    CHECK(cfg.t_max == 1.5);

    flat["ansatz.n"] = 12;  // consistent: accepted
    CHECK(urbm::resolve_config("quench", flat).n == 12);
    flat["ansatz.n"] = 11;
    CHECK(rejected_field("quench", flat) == "ansatz.n");
  }

  TEST_CASE("file values lose to command-line overrides") {
    const std::string dir = scratch("cfgfile");
    const std::string path = dir + "/run.json";
    urbm::io::write_text_file(path, R"({"model.h_f": 0.7, "ansatz.n": 4})");

    nlohmann::json flat = urbm::load_config_file(path);
    CHECK(flat.at("model.h_f") == 0.7);
    urbm::apply_overrides(flat, {"model.h_f=0.9", "open.exact_engine=true",
                                 "noise.deltas=[0.1]", "model.boundary=open"});
    const auto cfg = urbm::resolve_config("quench", flat);
    CHECK(cfg.h_f == 0.9);
    CHECK(cfg.n == 4);
    CHECK(cfg.exact_engine == true);
    CHECK(cfg.boundary == "open");  // bare words stay strings
    REQUIRE(cfg.deltas.size() == 1);
    CHECK(cfg.deltas[0] == 0.1);

    CHECK_THROWS_AS(urbm::apply_overrides(flat, {"missing-equals"}), urbm::ConfigError);
  }

  TEST_CASE("config files must be flat single objects") {
    CHECK(urbm::load_config_file("").empty());
    CHECK_THROWS_AS(urbm::load_config_file("/nonexistent/u.json"), urbm::ConfigError);

    const std::string dir = scratch("cfgshape");
    urbm::io::write_text_file(dir + "/nested.json", R"({"model": {"h_f": 0.7}})");
    CHECK_THROWS_AS(urbm::load_config_file(dir + "/nested.json"), urbm::ConfigError);
    urbm::io::write_text_file(dir + "/array.json", "[1, 2]");
    CHECK_THROWS_AS(urbm::load_config_file(dir + "/array.json"), urbm::ConfigError);
    urbm::io::write_text_file(dir + "/broken.json", "{");
    CHECK_THROWS_AS(urbm::load_config_file(dir + "/broken.json"), urbm::ConfigError);
  }

  TEST_CASE("an echoed config resolves back to itself") {
    nlohmann::json flat;
    flat["ansatz.n"] = 4;
    flat["open.n_traj"] = 7;
    flat["seed"] = 42;
    flat["out"] = "/tmp/somewhere";
    const auto cfg = urbm::resolve_config("open", flat);
    const auto again = urbm::resolve_config(cfg.experiment, cfg.echo());
    CHECK(cfg.echo() == again.echo());
  }
}

TEST_SUITE("io") {
  TEST_CASE("seventeen digits round-trip any double") {
    const double values[] = {3.141592653589793,  1.0 / 3.0,     1e300, 5e-324,
                             -2.225073858507201e-308, 0.1 + 0.2, 0.0,   -42.0};
    for (const double v : values) {
      const std::string text = urbm::io::format_double(v);
      CHECK(std::strtod(text.c_str(), nullptr) == v);
    }
  }

  TEST_CASE("csv text uses bare line feeds and checks row width") {
    CHECK(urbm::io::csv_text({"a", "b"}, {{"1", "2"}, {"3", "4"}}) == "a,b\n1,2\n3,4\n");
    CHECK(urbm::io::csv_text({"a"}, {}) == "a\n");
    CHECK_THROWS(urbm::io::csv_text({"a", "b"}, {{"1"}}));
  }

  TEST_CASE("content hashing matches the published vectors") {
    CHECK(urbm::io::sha256_hex("") ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(urbm::io::sha256_hex("abc") ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  }

  TEST_CASE("the manifest lists every emitted file exactly once") {
    const std::string dir = scratch("manifest");
    {
      urbm::io::RunWriter w(dir);
      w.csv("table.csv", {"x"}, {{"1"}});
      w.text("note.txt", "first");
      w.text("note.txt", "second");  // overwrite: still one manifest entry
      w.jsonl("events.jsonl", {nlohmann::json{{"k", 1}}, nlohmann::json{{"k", 2}}});
      w.metadata()["tag"] = "t";
      w.finalize();
      CHECK_THROWS(w.finalize());
      CHECK_THROWS(w.text("late.txt", "x"));
    }
    const nlohmann::json m = nlohmann::json::parse(slurp(dir + "/manifest.json"));
    std::vector<std::string> names;
    for (const auto& entry : m.at("files")) {
      names.push_back(entry.at("name"));
      const std::string content = slurp(dir + "/" + std::string(entry.at("name")));
      CHECK(urbm::io::sha256_hex(content) == entry.at("sha256"));
      CHECK(content.size() == entry.at("bytes"));
    }
    std::sort(names.begin(), names.end());
    CHECK(names ==
          std::vector<std::string>{"events.jsonl", "metadata.json", "note.txt", "table.csv"});
    CHECK(slurp(dir + "/note.txt") == "second");

    CHECK_THROWS(urbm::io::RunWriter(dir).text("sub/dir.txt", "x"));
  }
}

TEST_SUITE("experiments") {
  TEST_CASE("a small relaxation run reproduces bitwise") {
    const std::string a = scratch("ite_a"), b = scratch("ite_b");
    REQUIRE(urbm::run_experiment(urbm::resolve_config("ite", tiny_ite(a))) == 0);
    REQUIRE(urbm::run_experiment(urbm::resolve_config("ite", tiny_ite(b))) == 0);

    for (const char* name : {"series.csv", "params_final.json", "metadata.json", "manifest.json"})
      CHECK(fs::exists(fs::path(a) / name));

    // Same config, same seed: identical data files (metadata differs in
    // wall time and output path, so it is compared by key presence only).
    const auto ha = manifest_hashes(a), hb = manifest_hashes(b);
    CHECK(ha.at("series.csv") == hb.at("series.csv"));
    CHECK(ha.at("params_final.json") == hb.at("params_final.json"));

    CHECK(first_line(a + "/series.csv") ==
          "step,tau,energy_re,energy_im,f_norm,solver_path,min_eigenvalue_estimate,energy_exact");
    const nlohmann::json meta = nlohmann::json::parse(slurp(a + "/metadata.json"));
    CHECK(meta.at("ite_sign") == -1);
    CHECK(meta.at("rng").at("engine") == "mt19937_64");
    CHECK(meta.at("oracle").contains("ground_energy"));
    CHECK(meta.at("config").at("ansatz.n") == 2);
    CHECK(meta.contains("solver_path_counts"));
    CHECK(meta.at("wall_time_seconds").get<double>() > 0.0);
  }

  TEST_CASE("a quench run carries the exact reference columns") {
    const std::string dir = scratch("quench");
    REQUIRE(urbm::run_experiment(urbm::resolve_config("quench", tiny_quench(dir))) == 0);
    CHECK(first_line(dir + "/series.csv") == "t,sx1_urbm,sx1_exact,sxsx_urbm,sxsx_exact");
    CHECK(fs::exists(fs::path(dir) / "prep.csv"));
    CHECK(fs::exists(fs::path(dir) / "diagnostics.csv"));
    CHECK(fs::exists(fs::path(dir) / "params_initial.json"));
    const nlohmann::json meta = nlohmann::json::parse(slurp(dir + "/metadata.json"));
    CHECK(meta.at("oracle").at("max_abs_deviation").contains("sx1"));
    CHECK(meta.at("preparation").contains("ground_energy_exact"));
  }

  TEST_CASE("heisenberg quenches report the mean magnetization") {
    const std::string dir = scratch("quench_heis");
    nlohmann::json flat = tiny_quench(dir);
    flat["model.kind"] = "heisenberg";
    flat["integrator.t_max"] = 0.02;
    flat["integrator.steps"] = 50;
    REQUIRE(urbm::run_experiment(urbm::resolve_config("quench", flat)) == 0);
    CHECK(first_line(dir + "/series.csv") == "t,mz_urbm,mz_exact,sxsx_urbm,sxsx_exact");
  }

  TEST_CASE("open trajectories are reproducible and worker-invariant") {
    const std::string a = scratch("open_a"), b = scratch("open_b");
    REQUIRE(urbm::run_experiment(urbm::resolve_config("open", tiny_open(a, 1))) == 0);
    REQUIRE(urbm::run_experiment(urbm::resolve_config("open", tiny_open(b, 2))) == 0);

    const auto ha = manifest_hashes(a), hb = manifest_hashes(b);
    CHECK(ha.at("ensemble.csv") == hb.at("ensemble.csv"));
    CHECK(ha.at("trajectories.jsonl") == hb.at("trajectories.jsonl"));

    CHECK(first_line(a + "/ensemble.csv") ==
          "t,sx1_mean,sx1_stderr,sxsx_mean,sxsx_stderr,sx1_lindblad,sxsx_lindblad,"
          "sx1_exact_mean,sx1_exact_stderr,sxsx_exact_mean,sxsx_exact_stderr");

    // One jsonl record per trajectory, seeds seed_base + i.
    std::istringstream lines(slurp(a + "/trajectories.jsonl"));
    std::string line;
    std::vector<std::uint64_t> seeds;
    while (std::getline(lines, line))
      seeds.push_back(nlohmann::json::parse(line).at("seed").get<std::uint64_t>());
    CHECK(seeds == std::vector<std::uint64_t>{9, 10, 11});

    const nlohmann::json meta = nlohmann::json::parse(slurp(a + "/metadata.json"));
    CHECK(meta.at("oracle").at("max_trace_drift").get<double>() < 1e-8);
    CHECK(meta.at("result").at("n_trajectories") == 3);
  }

  TEST_CASE("noise scan columns are labelled by their amplitude") {
    const std::string dir = scratch("noise");
    nlohmann::json flat;
    flat["ansatz.n"] = 3;
    flat["ansatz.m"] = 3;
    flat["integrator.t_max"] = 0.02;
    flat["integrator.steps"] = 50;
    flat["noise.deltas"] = {1e-4, 1e-2};
    flat["seed"] = 6;
    flat["out"] = dir;
    REQUIRE(urbm::run_experiment(urbm::resolve_config("noise_scan", flat)) == 0);
    CHECK(first_line(dir + "/noise.csv") == "t,sx1_exact,sx1_delta1e-04,sx1_delta1e-02");
    const nlohmann::json meta = nlohmann::json::parse(slurp(dir + "/metadata.json"));
    CHECK(meta.at("result").at("max_abs_deviation").contains("delta1e-04"));
  }

  TEST_CASE("gradient scan emits one row per size with the fitted slope") {
    const std::string dir = scratch("scan");
    nlohmann::json flat;
    flat["scan.sizes"] = {2, 3};
    flat["scan.m"] = 2;
    flat["scan.n_init"] = 3;
    flat["model.boundary"] = "open";
    flat["seed"] = 4;
    flat["out"] = dir;
    REQUIRE(urbm::run_experiment(urbm::resolve_config("gradient_scan", flat)) == 0);
    const std::string csv = slurp(dir + "/scan.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);  // header + one row per size
    const nlohmann::json meta = nlohmann::json::parse(slurp(dir + "/metadata.json"));
    CHECK(std::isfinite(meta.at("result").at("log_mean_f_slope").get<double>()));
  }

  TEST_CASE("the classical study and the circuit identities run end to end") {
    const std::string adir = scratch("autocorr");
    nlohmann::json af;
    af["autocorr.sizes"] = {4, 6};
    af["autocorr.temperature"] = 1.0;
    af["autocorr.sweeps"] = 4000;
    af["autocorr.max_lag"] = 50;
    af["autocorr.n_seeds"] = 2;
    af["autocorr.discard"] = 500;
    af["seed"] = 2;
    af["out"] = adir;
    REQUIRE(urbm::run_experiment(urbm::resolve_config("autocorr", af)) == 0);
    for (const char* name : {"tau.csv", "tau_median.csv", "acf.csv", "series_l4.csv"})
      CHECK(fs::exists(fs::path(adir) / name));
    CHECK(first_line(adir + "/acf.csv") == "lag,c_l4,c_l6");

    const std::string cdir = scratch("circuit");
    nlohmann::json cf;
    cf["circuit.n_sets"] = 3;
    cf["seed"] = 1;
    cf["out"] = cdir;
    REQUIRE(urbm::run_experiment(urbm::resolve_config("circuit_check", cf)) == 0);
    const nlohmann::json meta = nlohmann::json::parse(slurp(cdir + "/metadata.json"));
    CHECK(meta.at("result").at("min_fidelity").get<double>() > 1.0 - 1e-10);
    CHECK(meta.at("result").at("max_ensemble_residual").get<double>() < 1e-10);
    CHECK(meta.at("result").at("max_realw_error").get<double>() < 1e-12);
  }

  TEST_CASE("failures surface as exit codes with flushed partial output") {
    // Config guards inside the run map to exit 2 without finalizing.
    const std::string g = scratch("guard");
    nlohmann::json bad = tiny_quench(g);
    bad["integrator.t_max"] = 0.00075;  // 1.5 steps of dt
    CHECK(urbm::run_experiment(urbm::resolve_config("quench", bad)) == 2);
    CHECK_FALSE(fs::exists(fs::path(g) / "metadata.json"));

    nlohmann::json mc = tiny_open(scratch("openmc"), 1);
    mc["sampling.mode"] = "mc";
    CHECK(urbm::run_experiment(urbm::resolve_config("open", mc)) == 2);

    auto no_out = urbm::resolve_config("ite", tiny_ite(scratch("noout")));
    no_out.out_dir.clear();
    CHECK(urbm::run_experiment(no_out) == 2);

    // Numerical failures map to exit 1 and still flush metadata + manifest.
    const std::string f = scratch("fail");
    nlohmann::json flat = tiny_ite(f);
    flat["model.boundary"] = "periodic";  // two-site periodic chain is rejected downstream
    CHECK(urbm::run_experiment(urbm::resolve_config("ite", flat)) == 1);
    const nlohmann::json meta = nlohmann::json::parse(slurp(f + "/metadata.json"));
    CHECK(meta.contains("error"));
    CHECK(fs::exists(fs::path(f) / "manifest.json"));
  }

  TEST_CASE("the command-line wrapper resolves file, overrides and plumbing") {
    const std::string dir = scratch("cli");
    const std::string cfgpath = dir + "/cfg.json";
    urbm::io::write_text_file(cfgpath, R"({"ansatz.n": 2, "ansatz.m": 2})");
    const std::string out = dir + "/run";
    CHECK(urbm::cli_main("ite", cfgpath,
                         {"model.boundary=open", "integrator.steps=20",
                          "integrator.record_every=10"},
                         out, 5, 1) == 0);
    CHECK(fs::exists(fs::path(out) / "series.csv"));
    const nlohmann::json meta = nlohmann::json::parse(slurp(out + "/metadata.json"));
    CHECK(meta.at("config").at("seed") == 5);

    CHECK(urbm::cli_main("ite", "/nonexistent/cfg.json", {}, out, {}, {}) == 2);
    CHECK(urbm::cli_main("ite", cfgpath, {"malformed"}, out, {}, {}) == 2);
    CHECK(urbm::cli_main("warp", cfgpath, {}, out, {}, {}) == 2);
  }
}

#include <doctest.h>

#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "rcxr/cli.hpp"
#include "rcxr/io.hpp"

using namespace rcxr;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string write_config(const std::filesystem::path& dir, const std::string& name, const Json& j) {
  const auto path = dir / name;
  write_text_file(path, j.dump(2));
  return path.string();
}

Json sample_config(double q_min = 0.3) {
  return Json{
      {"layers",
       Json::array({Json{{"name", "oxide"}, {"elements", {{"Si", 22.05}, {"O", 44.1}}}, {"thickness_nm", 1.0},
                         {"roughness_nm", 0.1}},
                    Json{{"name", "substrate"}, {"elements", {{"Si", 49.94}}}, {"thickness_nm", nullptr},
                         {"roughness_nm", 0.1}}})},
      {"delta", {{"depth_nm", 18.1}, {"shape", "gaussian"}, {"fwhm_nm", 0.9}, {"n2d_per_nm2", 2.77}}},
      {"simulate", {{"energy_ev", 1300.0}, {"q_min_per_nm", q_min}, {"q_max_per_nm", 5.2}, {"q_points", 981}}},
      {"tables_dir", RCXR_TEST_TABLES_DIR}};
}

}  // namespace

TEST_CASE("exit-code mapping is total and never zero") {
  for (int k = 0; k <= static_cast<int>(ErrorKind::EdgeStraddle); ++k) {
    CHECK(exit_code(static_cast<ErrorKind>(k)) != 0);
  }
  CHECK(exit_code(ErrorKind::Schema) == 2);
  CHECK(exit_code(ErrorKind::TableMissing) == 3);
  CHECK(exit_code(ErrorKind::Io) == 3);
  CHECK(exit_code(ErrorKind::NoLayerDetected) == 4);
  CHECK(exit_code(ErrorKind::EdgeStraddle) == 5);
  CHECK(exit_code(ErrorKind::OutOfBand) == 6);
}

TEST_CASE("usage errors exit 2") {
  CHECK(run({}).code == 2);
  CHECK(run({"analyze"}).code == 2);
  CHECK(run({"--version"}).code == 0);
}

TEST_CASE("simulate then analyze") {
  const auto dir = test::scratch_dir("cli_simulate");
  const auto cfg = write_config(dir, "stack.json", sample_config());
  const auto curve = (dir / "curve.dat").string();
  const auto sim = run({"simulate", "--config", cfg, "--output", curve});
  REQUIRE(sim.code == 0);
  CHECK(std::filesystem::exists(dir / "curve.dat.manifest.json"));

  const auto result = (dir / "result.json").string();
  const auto a = run({"analyze", curve, "--output", result});
  REQUIRE(a.code == 0);
  const auto j = read_json_file(result);
  CHECK(j["result"]["depth_nm"]["value"].get<double>() == doctest::Approx(18.1).epsilon(0.3 / 18.1));
  const auto m = read_json_file(dir / "result.json.manifest.json");
  CHECK(m["inputs"][0]["sha256"].get<std::string>().size() == 64);

  const auto clipped = run({"analyze", curve, "--window", "0.1,6"});
  CHECK(clipped.code == 0);
  CHECK(clipped.err.find("warning") != std::string::npos);
}

TEST_CASE("simulate error paths") {
  const auto dir = test::scratch_dir("cli_simulate_errors");
  auto born = sample_config(0.0);
  born["simulate"]["solver"] = "born";
  const auto r1 = run({"simulate", "--config", write_config(dir, "born.json", born), "--output",
                       (dir / "x.dat").string()});
  CHECK(r1.code == 2);
  CHECK(r1.err.find("singular") != std::string::npos);

  auto bad = sample_config();
  bad["simulate"]["energy_ev"] = "high";
  const auto r2 = run({"simulate", "--config", write_config(dir, "bad.json", bad), "--output",
                       (dir / "x.dat").string()});
  CHECK(r2.code == 2);
  CHECK(r2.err.find("/simulate/energy_ev") != std::string::npos);

  const auto r3 = run({"simulate", "--config", write_config(dir, "ok.json", sample_config()), "--tables-dir",
                       "/nonexistent", "--output", (dir / "x.dat").string()});
  CHECK(r3.code == 3);
}

TEST_CASE("analyze error paths") {
  const auto dir = test::scratch_dir("cli_analyze_errors");
  const auto truncated = dir / "cut.dat";
  write_text_file(truncated, "# energy_ev = 1300\n# abscissa = q_per_nm\n1.0 1e-5\n1.1\n");
  const auto r = run({"analyze", truncated.string()});
  CHECK(r.code == 2);
  CHECK(r.err.find(":4") != std::string::npos);

  auto host = sample_config();
  host.erase("delta");
  const auto curve = (dir / "host.dat").string();
  REQUIRE(run({"simulate", "--config", write_config(dir, "host.json", host), "--output", curve}).code == 0);
  CHECK(run({"analyze", curve}).code == 4);
  CHECK(run({"diff-analyze", curve, curve}).code == 5);
}

TEST_CASE("fit-resonance rejects zero sheet density") {
  const auto dir = test::scratch_dir("cli_resonance");
  EnergyScan s;
  s.theta_deg = 10.0;
  for (double e = 1310.0; e <= 1342.0; e += 1.0) {
    s.energy_ev.push_back(e);
    s.r.push_back(1e-6);
  }
  std::ostringstream text;
  write_scan(text, s);
  write_text_file(dir / "scan.dat", text.str());
  auto cfg = sample_config();
  cfg["resonance"] = {{"n2d_per_nm2", 0.0}, {"depth_nm", 18.0}};
  const auto r = run({"fit-resonance", (dir / "scan.dat").string(), "--config", write_config(dir, "r.json", cfg)});
  CHECK(r.code == 2);
}

TEST_CASE("synth-suite to an unwritable directory exits 3") {
  CHECK(run({"synth-suite", "--output", "/proc/rcxr-suite", "--seed", "1"}).code == 3);
}

TEST_CASE("simulated energy scan inverts to its own thickness") {
  const auto dir = test::scratch_dir("cli_scan");
  auto scan_cfg = sample_config();
  scan_cfg["delta"]["depth_nm"] = 18.0;
  scan_cfg["delta"]["fwhm_nm"] = 1.6;
  scan_cfg["simulate"] = {{"theta_deg", 10.0}, {"energy_min_ev", 1310.0}, {"energy_max_ev", 1342.0},
                          {"energy_step_ev", 0.25}};
  const auto scan = (dir / "scan.dat").string();
  REQUIRE(run({"simulate", "--config", write_config(dir, "scan.json", scan_cfg), "--output", scan}).code == 0);

  auto fit_cfg = sample_config();
  fit_cfg.erase("delta");
  fit_cfg["resonance"] = {{"n2d_per_nm2", 2.77}, {"depth_nm", 18.0}, {"measured_sigma", 0.01}};
  const auto cfg = write_config(dir, "fit.json", fit_cfg);
  const auto out = (dir / "thickness.json").string();
  REQUIRE(run({"fit-resonance", scan, "--config", cfg, "--output", out}).code == 0);
  CHECK(read_json_file(out)["result"]["delta_nm"].get<double>() == doctest::Approx(1.6).epsilon(0.02));

  fit_cfg["resonance"]["measured_delta_r_over_r"] = 3.0;
  const auto r = run({"fit-resonance", scan, "--config", write_config(dir, "far.json", fit_cfg)});
  CHECK(r.code == 6);
  CHECK(r.err.find("band") != std::string::npos);
}

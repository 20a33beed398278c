#include "cli.hpp"

#include "fibrebend/csv.hpp"

#include "support.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <numbers>
#include <sstream>

namespace fs = std::filesystem;
using namespace fibrebend;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

nlohmann::json manifest(const fs::path& dir) { return nlohmann::json::parse(read_text(dir / "manifest.json")); }

std::size_t line_count(const std::string& text) { return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')); }

}  // namespace

TEST(Cli, NoArgumentsPrintsUsage) {
  const Outcome o = run({});
  EXPECT_EQ(o.code, cli::kExitValidation);
  EXPECT_NE(o.err.find("Usage:"), std::string::npos);
}

TEST(Cli, HelpAndVersion) {
  EXPECT_EQ(run({"--help"}).code, cli::kExitOk);
  EXPECT_EQ(run({"--version"}).code, cli::kExitOk);
}

TEST(Cli, UnknownSubcommandOrOption) {
  EXPECT_EQ(run({"frobnicate"}).code, cli::kExitValidation);
  EXPECT_EQ(run({"simulate", "--bogus"}).code, cli::kExitValidation);
}

TEST(Cli, MisspelledOverrideRejectedWithoutManifest) {
  const fs::path dir = fbtest::temp_dir("cli_badkey");
  const Outcome o = run({"-o", dir.string(), "-s", "winding.turnz=30", "simulate"});
  EXPECT_EQ(o.code, cli::kExitValidation);
  EXPECT_NE(o.err.find("turnz"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir / "manifest.json"));
}

TEST(Cli, UnknownConfigSectionRejected) {
  const fs::path dir = fbtest::temp_dir("cli_badsection");
  write_text(dir / "run.ini", "[geometry]\nkind = A\n[windings]\nturns = 30\n");
  EXPECT_EQ(run({"-o", dir.string(), "-c", (dir / "run.ini").string(), "design"}).code, cli::kExitValidation);
}

TEST(Cli, DesignWritesSpecAndManifest) {
  const fs::path dir = fbtest::temp_dir("cli_design");
  ASSERT_EQ(run({"-o", dir.string(), "design"}).code, cli::kExitOk);
  const auto m = manifest(dir);
  EXPECT_EQ(m["status"], "ok");
  EXPECT_EQ(m["command"], "design");
  ASSERT_FALSE(m["outputs"].empty());
  for (const auto& o : m["outputs"])
    EXPECT_EQ(o["sha256"], cli::sha256_hex(read_text(dir / o["path"].get<std::string>()))) << o["path"];
}

TEST(Cli, Sha256KnownVector) {
  EXPECT_EQ(cli::sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Cli, UnstableSimulationExitsOneWithFailedManifest) {
  const fs::path dir = fbtest::temp_dir("cli_unstable");
  const Outcome o = run({"-o", dir.string(), "-s", "winding.turns=9", "simulate"});
  EXPECT_EQ(o.code, cli::kExitRuntime);
  EXPECT_NE(o.err.find("instability"), std::string::npos);
  EXPECT_EQ(manifest(dir)["status"], "failed");
  EXPECT_TRUE(fs::exists(dir / "result.csv"));
}

TEST(Cli, StableSimulationWritesPlots) {
  const fs::path dir = fbtest::temp_dir("cli_sim");
  ASSERT_EQ(run({"-o", dir.string(), "-s", "winding.turns=30", "-s", "schedule.samples=5", "simulate"}).code,
            cli::kExitOk);
  for (const char* f : {"result.csv", "angle_pressure.svg", "expansion_pressure.svg", "trajectory.svg"})
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  const CsvTable t = read_csv(dir / "result.csv");
  EXPECT_EQ(t.rows.size(), 6u);
  EXPECT_NEAR(t.number(5, t.column("theta_deg")), 90.0, 0.5);
}

TEST(Cli, ReverseScheduleAddsHysteresis) {
  const fs::path dir = fbtest::temp_dir("cli_hyst");
  ASSERT_EQ(run({"-o", dir.string(), "-s", "winding.turns=30", "-s", "schedule.kind=stepped", "-s",
                 "schedule.with_reverse=true", "simulate"})
                .code,
            cli::kExitOk);
  EXPECT_TRUE(fs::exists(dir / "hysteresis.csv"));
  EXPECT_TRUE(fs::exists(dir / "hysteresis.svg"));
}

TEST(Cli, DefaultSweepLayout) {
  const fs::path dir = fbtest::temp_dir("cli_sweep");
  ASSERT_EQ(run({"-o", dir.string(), "sweep"}).code, cli::kExitOk);
  std::size_t full = 0, partial = 0;
  for (const auto& e : fs::directory_iterator(dir / "sweep")) {
    const std::string n = e.path().filename().string();
    (n.find(".partial.csv") != std::string::npos ? partial : full)++;
  }
  EXPECT_EQ(full, 7u);
  EXPECT_EQ(partial, 3u);
  const std::string summary = read_text(dir / "summary.csv");
  EXPECT_EQ(line_count(summary), 11u);
  EXPECT_NE(summary.find("30 turns SH at 100 kPa"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "summary.svg"));
}

TEST(Cli, SweepIsByteIdenticalAcrossRunsAndJobCounts) {
  const fs::path a = fbtest::temp_dir("cli_sweep_a"), b = fbtest::temp_dir("cli_sweep_b");
  ASSERT_EQ(run({"-o", a.string(), "sweep", "--turns", "9,30", "-j", "1"}).code, cli::kExitOk);
  ASSERT_EQ(run({"-o", b.string(), "sweep", "--turns", "9,30", "-j", "4"}).code, cli::kExitOk);
  EXPECT_EQ(read_text(a / "summary.csv"), read_text(b / "summary.csv"));
  EXPECT_EQ(read_text(a / "summary.svg"), read_text(b / "summary.svg"));
  for (const auto& e : fs::directory_iterator(a / "sweep"))
    EXPECT_EQ(read_text(e.path()), read_text(b / "sweep" / e.path().filename())) << e.path();
  EXPECT_EQ(manifest(a)["outputs"], manifest(b)["outputs"]);
}

TEST(Cli, SweepRejectsBadTurns) {
  const fs::path dir = fbtest::temp_dir("cli_sweep_bad");
  EXPECT_EQ(run({"-o", dir.string(), "sweep", "--turns", "0"}).code, cli::kExitValidation);
  EXPECT_EQ(run({"-o", dir.string(), "sweep", "--styles", "TH"}).code, cli::kExitValidation);
}

TEST(Cli, AnalyzeArcFixture) {
  const fs::path dir = fbtest::temp_dir("cli_analyze");
  const auto f = fbtest::arc_fixture(build_geometry_a({}), std::numbers::pi);
  const auto [nodes, disp] = fbtest::to_csv(f.histories);
  write_text(dir / "nodes.csv", nodes);
  write_text(dir / "disp.csv", disp);
  ASSERT_EQ(run({"-o", dir.string(), "analyze", "--nodes", (dir / "nodes.csv").string(), "--displacements",
                 (dir / "disp.csv").string(), "--tip-node", std::to_string(f.tip_id)})
                .code,
            cli::kExitOk);
  const CsvTable t = read_csv(dir / "analysis.csv");
  EXPECT_NEAR(t.number(t.rows.size() - 1, t.column("theta_deg")), 90.0, 1e-6);
  EXPECT_EQ(manifest(dir)["inputs"].size(), 2u);
}

TEST(Cli, AnalyzeNeedsOneInputKind) {
  const fs::path dir = fbtest::temp_dir("cli_analyze_bad");
  EXPECT_EQ(run({"-o", dir.string(), "analyze"}).code, cli::kExitValidation);
}

TEST(Cli, WindGeometryBWritesBothChambers) {
  const fs::path dir = fbtest::temp_dir("cli_wind_b");
  ASSERT_EQ(run({"-o", dir.string(), "-s", "geometry.kind=B", "wind"}).code, cli::kExitOk);
  EXPECT_TRUE(fs::exists(dir / "fiber_1.csv"));
  EXPECT_TRUE(fs::exists(dir / "fiber_2.csv"));
}

TEST(Cli, ExportDeckParses) {
  const fs::path dir = fbtest::temp_dir("cli_deck");
  ASSERT_EQ(run({"-o", dir.string(), "export-deck"}).code, cli::kExitOk);
  EXPECT_EQ(read_text(dir / "model.deck").rfind("FIBREBEND-DECK", 0), 0u);
}

TEST(Cli, OutputDirectoryFromEnvironment) {
  const fs::path dir = fbtest::temp_dir("cli_env");
  ::setenv("FIBREBEND_OUT", dir.c_str(), 1);
  EXPECT_EQ(cli::default_output_dir(), dir);
  const int code = run({"design"}).code;
  ::unsetenv("FIBREBEND_OUT");
  EXPECT_EQ(code, cli::kExitOk);
  EXPECT_TRUE(fs::exists(dir / "spec.json"));
  EXPECT_EQ(cli::default_output_dir(), fs::path("out"));
}

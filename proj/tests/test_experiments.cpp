#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <gtest/gtest.h>

#include <colprune/errors.hpp>

#include "colprune/experiments/artifacts.hpp"
#include "colprune/experiments/config.hpp"
#include "colprune/experiments/experiments.hpp"
#include "colprune/experiments/pool.hpp"
#include "colprune/experiments/svg.hpp"
#include "colprune/experiments/verify.hpp"

namespace fs = std::filesystem;
using namespace colprune;
using namespace colprune::experiments;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("colprune_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST(KeyValue, ParsesCommentsAndTypes) {
  const KeyValueConfig c = KeyValueConfig::parse(
      "# a comment\n"
      "flow.d = 12   # trailing\n"
      "\n"
      "compare.c_lambda_grid = 0.1, 0.2,0.3\n"
      "implicit.regularized = false\n"
      "seed = 18446744073709551615\n");
  EXPECT_EQ(c.get_long("flow.d", 0), 12);
  EXPECT_EQ(c.get_doubles("compare.c_lambda_grid", {}), (std::vector<double>{0.1, 0.2, 0.3}));
  EXPECT_FALSE(c.get_bool("implicit.regularized", true));
  EXPECT_EQ(c.get_u64("seed", 0), std::numeric_limits<std::uint64_t>::max());
  EXPECT_DOUBLE_EQ(c.get_double("missing.key", 2.5), 2.5);
}

TEST(KeyValue, RejectsMalformedInput) {
  EXPECT_THROW(KeyValueConfig::parse("no equals sign\n"), InvalidArgument);
  EXPECT_THROW(KeyValueConfig::parse("Bad Key = 1\n"), InvalidArgument);
  const KeyValueConfig c = KeyValueConfig::parse("flow.d = twelve\n");
  EXPECT_THROW(c.get_long("flow.d", 0), InvalidArgument);
}

TEST(KeyValue, LaterAssignmentsOverrideEarlierOnes) {
  // file < --set < --seed, as layered by the CLI
  KeyValueConfig c = KeyValueConfig::parse("seed = 3\nflow.d = 10\n");
  c.assign("flow.d=20");
  c.set("seed", "9");
  EXPECT_EQ(c.get_long("flow.d", 0), 20);
  EXPECT_EQ(c.get_u64("seed", 0), 9u);
  EXPECT_THROW(c.assign("flow.d"), InvalidArgument);
}

TEST(KeyValue, TracksUnusedKeysAndEffectiveValues) {
  const KeyValueConfig c = KeyValueConfig::parse("flow.d = 10\nflow.typo = 1\n");
  (void)c.get_long("flow.d", 0);
  (void)c.get_double("flow.alpha0", 1e-4);
  EXPECT_EQ(c.unused(), (std::vector<std::string>{"flow.typo"}));
  const nlohmann::json eff = c.effective();
  EXPECT_EQ(eff.at("flow.d"), "10");
  EXPECT_TRUE(eff.contains("flow.alpha0"));
}

TEST(Settings, PresetAndOverrides) {
  KeyValueConfig c = KeyValueConfig::parse("implicit.preset = desk\nimplicit.k = 150\n");
  const ImplicitRegSettings s = ImplicitRegSettings::from_config(c);
  EXPECT_EQ(s.d, 200);
  EXPECT_EQ(s.k, 150);
  EXPECT_EQ(s.r, 1);
  EXPECT_DOUBLE_EQ(s.sigma_r_star, 1.0);
  EXPECT_THROW(FlowDiagnosticsSettings::from_config(KeyValueConfig::parse("flow.r = 2\n")), InvalidArgument);
}

TEST(Csv, RoundTripIsExact) {
  const fs::path dir = scratch("csv");
  CsvTable t;
  t.header = {"a", "b"};
  t.rows = {{1.0 / 3.0, -2e-300}, {std::nan(""), 1e300}};
  write_csv(t, dir / "t.csv");
  const CsvTable back = read_csv(dir / "t.csv");
  EXPECT_EQ(back.header, t.header);
  EXPECT_EQ(back.rows[0][0], t.rows[0][0]);
  EXPECT_EQ(back.rows[0][1], t.rows[0][1]);
  EXPECT_TRUE(std::isnan(back.rows[1][0]));
  EXPECT_EQ(back.values("b")[1], 1e300);
  EXPECT_THROW(t.column("zzz"), InvalidArgument);
}

TEST(Svg, RenderingFromCsvIsBitStable) {
  const fs::path dir = scratch("svg");
  CsvTable t;
  t.header = {"n", "err"};
  for (int i = 1; i <= 20; ++i) t.rows.push_back({static_cast<double>(i * 10), 1.0 / (i * i)});
  write_csv(t, dir / "t.csv");
  PlotSpec spec = make_plot("decay", "n", "error");
  spec.log_x = spec.log_y = true;
  spec.markers.push_back({50.0, "prune"});
  const std::string a = render_lines(read_csv(dir / "t.csv"), "n", {"err"}, spec);
  const std::string b = render_lines(read_csv(dir / "t.csv"), "n", {"err"}, spec);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.rfind("<svg", 0), 0u);
  EXPECT_NE(a.find("</svg>"), std::string::npos);
  EXPECT_NE(a.find("prune"), std::string::npos);
  const std::string h1 = render_histogram(t, "err", 10, 0.0, 1.0, make_plot("h", "err", "count"));
  EXPECT_EQ(h1, render_histogram(t, "err", 10, 0.0, 1.0, make_plot("h", "err", "count")));
}

TEST(Artifacts, ManifestRecordsEverything) {
  const fs::path dir = scratch("manifest");
  ArtifactDir out(dir / "nested");
  out.write_text("a.txt", "hi\n");
  out.write_json("report.json", nlohmann::json{{"x", 1}});
  EXPECT_EQ(out.written(), (std::vector<std::string>{"a.txt", "report.json"}));
  const nlohmann::json m = make_manifest("verify", nlohmann::json{{"seed", "1"}}, {1, 2}, 0.5, out.written());
  for (const char* key : {"command", "version", "schema_version", "config", "seeds", "wall_seconds", "finished_at",
                          "files"}) {
    EXPECT_TRUE(m.contains(key)) << key;
  }
  EXPECT_TRUE(fs::exists(dir / "nested" / "report.json"));
}

TEST(Stats, MedianSlopeAndDecay) {
  EXPECT_DOUBLE_EQ(median({3, 1, 2}), 2.0);
  EXPECT_DOUBLE_EQ(median({4, 1, 2, 3}), 2.5);
  EXPECT_DOUBLE_EQ(median({1, std::nan(""), 3}), 2.0);
  EXPECT_NEAR(loglog_slope({1, 10, 100}, {1, 0.1, 0.01}), -1.0, 1e-12);
  EXPECT_NEAR(loglog_slope({250, 1000, 4000}, {2, 1, 0.5}), -0.5, 1e-12);

  std::vector<double> geometric;
  for (int i = 0; i < 2000; ++i) geometric.push_back(std::pow(0.97, i));
  EXPECT_TRUE(decays_by_factor(geometric, 10, 200, 1e-8));
  std::vector<double> slow;
  for (int i = 0; i < 2000; ++i) slow.push_back(1.0 / (1 + i));
  EXPECT_FALSE(decays_by_factor(slow, 10, 200, 1e-8));
  EXPECT_FALSE(decays_by_factor(std::vector<double>(100, 1.0), 10, 200, 1e-8));

  EXPECT_NEAR(small_init_bound(200, 200), 1.0 / (8e6 * 200 * std::log(4e4)), 1e-25);
}

TEST(Pool, RunsEveryIndexOnceAndPropagatesErrors) {
  std::vector<std::atomic<int>> hits(100);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i]++; });
  for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
  EXPECT_THROW(parallel_for(10, 3,
                            [](std::size_t i) {
                              if (i == 5) throw std::runtime_error("boom");
                            }),
               std::runtime_error);
  parallel_for(0, 2, [](std::size_t) { FAIL(); });
}

namespace {

VerifySettings quick_verify() {
  VerifySettings s;
  s.fd_instances = 5;
  s.bound_seeds = 2;
  s.bound_steps = 300;
  s.mono_seeds = 1;
  s.mono_steps = 300;
  s.ortho_seeds = 1;
  s.eig_instances = 2;
  return s;
}

}  // namespace

TEST(Verify, FiniteDifferenceSuitePassesAndCatchesCorruptedGradient) {
  VerifySettings s = quick_verify();
  EXPECT_TRUE(verify_finite_difference(s).passed);
  s.gradient_offset = 1e-3;
  EXPECT_FALSE(verify_finite_difference(s).passed);
}

TEST(Verify, QuickRunIsGreenAndDeterministic) {
  VerifySettings s = quick_verify();
  s.suites = {"finite_difference", "boundedness", "monotonicity", "eigen_oracle"};
  const VerifyResult a = run_verify(s);
  const VerifyResult b = run_verify(s);
  EXPECT_TRUE(a.passed()) << a.to_json().dump(2);
  EXPECT_EQ(a.to_json().dump(), b.to_json().dump());
}

TEST(Verify, UnknownSuiteIsRejected) {
  VerifySettings s = quick_verify();
  s.suites = {"nonsense"};
  EXPECT_THROW(run_verify(s), InvalidArgument);
}

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "abphase/errors.hpp"
#include "abphase/sinusoid_fit.hpp"
#include "config.hpp"
#include "experiments.hpp"

using namespace abphase;
using namespace abphase::runner;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

std::size_t parse_error_line(const std::string& text, std::size_t* column = nullptr) {
  try {
    parse_config(text);
  } catch (const ParseError& e) {
    if (column) *column = e.column();
    return e.line();
  }
  return 0;
}

std::string template_for(const std::string& name) {
  const auto* d = find_experiment(name);
  EXPECT_NE(d, nullptr);
  return config_template(*d);
}

std::string replace_line(std::string text, const std::string& prefix, const std::string& line) {
  const auto pos = text.find("\n" + prefix);
  EXPECT_NE(pos, std::string::npos) << prefix;
  const auto end = text.find('\n', pos + 1);
  return text.replace(pos + 1, end - pos - 1, line);
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("abphase-test-" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(ABPHASE_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

}  // namespace

TEST(Schema, SixExperimentsWithTemplatesThatParse) {
  const auto& all = list_experiments();
  ASSERT_EQ(all.size(), 6u);
  for (const auto& d : all) {
    const Config c = parse_config(config_template(d));
    EXPECT_EQ(c.experiment(), d.name);
    EXPECT_TRUE(c.natural_units());
    EXPECT_FALSE(d.relation.empty());
  }
  EXPECT_EQ(find_experiment("nope"), nullptr);
}

TEST(Parser, ExpressionsUnitsAndDefaults) {
  std::string text = template_for("andreev-sweep");
  text = replace_line(text, "delta_theta", "delta_theta = 180 [deg]");
  text = replace_line(text, "bias", "bias = 2e-3 * 5");
  const Config c = parse_config(text);
  EXPECT_NEAR(c.real("junction", "delta_theta"), kPi, 1e-15);
  EXPECT_NEAR(c.real("junction", "bias"), 1e-2, 1e-18);
  EXPECT_NEAR(c.real("junction", "rho1"), 1.0 / (2.0 * kPi), 1e-17);
  EXPECT_EQ(c.integer("sweep", "points"), 201);

  const Config minimal = parse_config("experiment = andreev-sweep\n[junction]\nbias = 0.01\n");
  EXPECT_EQ(minimal.integer("protocol", "repetitions"), 1);
}

TEST(Parser, ErrorsCarryLineAndColumn) {
  std::size_t col = 0;
  EXPECT_EQ(parse_error_line("experiment = trajectory\n[dynamics]\ndt = 1e-3\nbogus = 4\n", &col), 4u);
  EXPECT_EQ(col, 1u);
  EXPECT_EQ(parse_error_line("experiment = trajectory\n[dynamics]\ndt = 1 + * 2\n", &col), 3u);
  EXPECT_GT(col, 5u);
  EXPECT_EQ(parse_error_line("experiment = nope\n"), 1u);
  EXPECT_EQ(parse_error_line("[dynamics]\ndt = 1\n"), 1u);
  EXPECT_EQ(parse_error_line("experiment = trajectory\n[dynamics]\ndt = 1\n[dynamics]\n"), 4u);
  EXPECT_EQ(parse_error_line("experiment = trajectory\n[dynamics]\ndt = 1\ndt = 2\n"), 4u);
  EXPECT_EQ(parse_error_line("experiment = trajectory\n[ramp]\n"), 2u);
  EXPECT_EQ(parse_error_line("experiment = trajectory\n[units]\nsystem = metric\n"), 3u);
  EXPECT_EQ(parse_error_line("experiment = trajectory\n[units]\nhbar = 2\n"), 3u);
  EXPECT_EQ(parse_error_line("experiment = andreev-sweep\n[sweep]\npoints = 2.5\n"), 3u);
  EXPECT_EQ(parse_error_line("experiment = andreev-sweep\n[sweep]\npoints\n"), 3u);
  EXPECT_EQ(parse_error_line("experiment = conservation-suite\n[ramp]\nshape = cubic\n"), 3u);
  EXPECT_EQ(parse_error_line("experiment = gauge-audit\n[gauge]\nbase = azimuthal\n"), 2u);
  EXPECT_EQ(parse_error_line("experiment = gauge-audit\n[gauge.1]\nchi = x +\n"), 3u);
}

TEST(Parser, UnitDiscipline) {
  // Natural mode takes bare numbers only.
  EXPECT_EQ(parse_error_line("experiment = trajectory\n[charge]\nx = 1 [cm]\n"), 3u);
  const std::string g = "experiment = trajectory\n[units]\nsystem = gaussian\n[charge]\n";
  const Config c = parse_config(g + "x = 2 [cm]\nvx = 3e9 [cm / s]\n");
  EXPECT_EQ(c.real("charge", "x"), 2.0);
  EXPECT_EQ(c.real("charge", "vx"), 3e9);
  EXPECT_NEAR(c.units().c, 2.99792458e10, 1.0);
  EXPECT_EQ(parse_error_line(g + "x = 2\n"), 5u);
  EXPECT_EQ(parse_error_line(g + "x = 2 [m]\n"), 5u);
}

TEST(Parser, ResolvedListingIsSortedAndComplete) {
  const Config c = parse_config(template_for("trajectory"));
  const auto r = c.resolved();
  ASSERT_GE(r.size(), 3u);
  EXPECT_EQ(r[0], "experiment = trajectory");
  EXPECT_EQ(r[1], "seed = 0");
  EXPECT_TRUE(std::is_sorted(r.begin() + 2, r.end()));
  EXPECT_NE(std::find(r.begin(), r.end(), "dynamics.dt = 0.001"), r.end());
}

TEST(FormatNumber, ShortestRoundTrip) {
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(1e-300), "1e-300");
  EXPECT_EQ(std::stod(format_number(kPi)), kPi);
}

TEST(Experiments, AndreevTemplateReproducesPeriod) {
  const RunReport r = run_experiment(parse_config(template_for("andreev-sweep")));
  EXPECT_TRUE(r.failures.empty());
  ASSERT_EQ(r.datasets.size(), 1u);
  std::vector<double> x;
  std::vector<double> y;
  for (const auto& row : r.datasets[0].rows) {
    x.push_back(row[0]);
    y.push_back(row[1]);
  }
  EXPECT_NEAR(fit_sinusoid(x, y).period(), kPi, 1e-8);
}

TEST(Experiments, TrajectoryTemplateHasNoDeflection) {
  const RunReport r = run_experiment(parse_config(template_for("trajectory")));
  EXPECT_TRUE(r.failures.empty());
  bool found = false;
  for (const auto& line : r.summary) {
    if (line.rfind("deflection_rad = ", 0) == 0) {
      found = true;
      EXPECT_LT(std::abs(std::stod(line.substr(17))), 1e-12);
    }
  }
  EXPECT_TRUE(found);
}

TEST(Cli, MalformedConfigExitsTwoWithoutOutputs) {
  const fs::path dir = scratch("malformed");
  const fs::path cfg = dir / "bad.toml";
  std::ofstream(cfg) << "experiment = trajectory\n[dynamics]\nfrobnicate = 1\n";
  const fs::path out = dir / "out";
  EXPECT_EQ(run_cli("run " + cfg.string() + " --out-dir " + out.string()), 2);
  EXPECT_FALSE(fs::exists(out));
  EXPECT_EQ(run_cli("run " + (dir / "missing.toml").string()), 2);
}

TEST(Cli, GaugeAuditVerdictAndDeterministicRerun) {
  const fs::path dir = scratch("audit");
  const fs::path cfg = dir / "audit.toml";
  std::ofstream(cfg) << template_for("gauge-audit");
  ASSERT_EQ(run_cli("run " + cfg.string() + " --out-dir " + (dir / "a").string()), 0);
  ASSERT_EQ(run_cli("run " + cfg.string() + " --out-dir " + (dir / "b").string()), 0);
  const std::string manifest = slurp(dir / "a" / "manifest.txt");
  EXPECT_NE(manifest.find("gauge-invariant"), std::string::npos);
  for (const auto& entry : fs::directory_iterator(dir / "a")) {
    EXPECT_EQ(slurp(entry.path()), slurp(dir / "b" / entry.path().filename())) << entry.path();
  }
}

TEST(Cli, AndreevCsvPeriodAndSeedOverride) {
  const fs::path dir = scratch("andreev");
  const fs::path cfg = dir / "andreev.toml";
  std::string text = template_for("andreev-sweep");
  text = replace_line(text, "repetitions", "repetitions = 50");
  text = replace_line(text, "noise", "noise = 0.01");
  std::ofstream(cfg) << text;
  ASSERT_EQ(run_cli("run " + cfg.string() + " --seed 5 --out-dir " + (dir / "a").string()), 0);
  ASSERT_EQ(run_cli("run " + cfg.string() + " --seed 6 --out-dir " + (dir / "b").string()), 0);
  std::ifstream csv(dir / "a" / "andreev_sweep.csv");
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line.rfind("flux,current,std_error", 0), 0u);
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> s;
  while (std::getline(csv, line)) {
    std::stringstream ss(line);
    std::string f;
    std::getline(ss, f, ',');
    x.push_back(std::stod(f));
    std::getline(ss, f, ',');
    y.push_back(std::stod(f));
    std::getline(ss, f, ',');
    s.push_back(std::stod(f));
  }
  ASSERT_EQ(x.size(), 201u);
  const auto fit = fit_sinusoid(x, y, s);
  EXPECT_LT(std::abs(fit.period() - kPi), 4.0 * fit.period_se());
  EXPECT_NE(slurp(dir / "a" / "andreev_sweep.csv"), slurp(dir / "b" / "andreev_sweep.csv"));
  EXPECT_NE(slurp(dir / "a" / "manifest.txt").find("seed = 5"), std::string::npos);
}

TEST(Cli, ListTemplateAndVersion) {
  EXPECT_EQ(run_cli("list"), 0);
  EXPECT_EQ(run_cli("--version"), 0);
  EXPECT_EQ(run_cli("template trajectory"), 0);
  EXPECT_NE(run_cli("template nope"), 0);
}

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <json.hpp>

#include "fpr/commands.hpp"
#include "fpr/config.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace fpr {
namespace {

const fs::path kCli = FPR_CLI_PATH;
const fs::path kConfigs = FPR_CONFIG_DIR;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::path(FPR_TEST_SCRATCH) / "cli" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Run {
  int status = -1;
  std::string out, err;
};

Run run_cli(const std::string& args, const fs::path& dir) {
  const fs::path out = dir / "stdout.txt", err = dir / "stderr.txt";
  const std::string cmd = kCli.string() + " " + args + " >" + out.string() + " 2>" + err.string();
  const int raw = std::system(cmd.c_str());
  Run r;
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

fs::path write_file(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
  return p;
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

TEST(ConfigText, SectionsCommentsAndErrors) {
  const auto kv = parse_config_text("# top\n[params]\nprocess = ou # trailing\n\n[run]\nseed=4\n");
  EXPECT_EQ(kv.at("params.process"), "ou");
  EXPECT_EQ(kv.at("run.seed"), "4");
  EXPECT_THROW(parse_config_text("process = ou\n"), ConfigError);
  EXPECT_THROW(parse_config_text("[params]\nbeta = 1\nbeta = 2\n"), ConfigError);
  EXPECT_THROW(parse_config_text("[params\n"), ConfigError);
}

TEST(ConfigText, ErrorsNameTheKey) {
  auto key_of = [](const std::string& text) {
    try {
      ExperimentConfig::from_text(text);
    } catch (const ConfigError& e) {
      return e.key();
    }
    return std::string("<none>");
  };
  EXPECT_EQ(key_of("[params]\nbeta = 1\n"), "params.process");
  EXPECT_EQ(key_of("[params]\nprocess = ou\nbogus = 1\n"), "params.bogus");
  EXPECT_EQ(key_of("[params]\nprocess = ou\nbeta = abc\n"), "params.beta");
  EXPECT_EQ(key_of("[params]\nprocess = ou\nsigma = -1\n"), "params.sigma");
  EXPECT_EQ(key_of("[params]\nprocess = heston\n"), "params.process");
  EXPECT_EQ(key_of("[params]\nprocess = wf1d\nx0 = 1.5\n"), "params.x0");
  EXPECT_EQ(key_of("[params]\nprocess = ou\n[sweep]\nbetas =\n"), "sweep.betas");
  EXPECT_EQ(key_of("[params]\nprocess = ou\n[grid]\nM = 2\n"), "grid.M");
}

TEST(ConfigText, JsonRoundTrip) {
  const auto c = ExperimentConfig::load(kConfigs / "wf2d_h1.conf");
  const auto d = ExperimentConfig::from_json(c.to_json());
  EXPECT_EQ(c.to_json(), d.to_json());
  EXPECT_EQ(d.snapshots, (std::vector<int>{5, 10, 15, 20}));
}

TEST(Cli, MissingKeyExitsWithJson) {
  const auto dir = scratch("missing");
  const auto conf = write_file(dir / "bad.conf", "[params]\nbeta = 1\n");
  const auto r = run_cli("solve-ratio --config " + conf.string() + " --out " + (dir / "o").string(), dir);
  EXPECT_EQ(r.status, 2);
  const auto err = json::parse(r.err.substr(0, r.err.find('\n')));
  EXPECT_EQ(err.at("error"), "config");
  EXPECT_EQ(err.at("key"), "params.process");
}

TEST(Cli, UnknownKeyAndBadFlags) {
  const auto dir = scratch("unknown");
  const auto conf = write_file(dir / "bad.conf", "[params]\nprocess = ou\nbogus = 1\n");
  auto r = run_cli("sample --config " + conf.string() + " --out " + (dir / "o").string(), dir);
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.err.find("params.bogus"), std::string::npos);
  r = run_cli("frobnicate", dir);
  EXPECT_EQ(r.status, 2);
  r = run_cli("solve-ratio --config " + (dir / "absent.conf").string(), dir);
  EXPECT_EQ(r.status, 2);
}

TEST(Cli, EmptySweepIsAnError) {
  const auto dir = scratch("sweep");
  const auto conf = write_file(dir / "s.conf", "[params]\nprocess = ou\n");
  const auto r = run_cli("validate-ou --config " + conf.string() + " --out " + (dir / "o").string(), dir);
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.err.find("sweep.betas"), std::string::npos);
}

TEST(Cli, UnknownConvergenceProblem) {
  const auto dir = scratch("conv");
  const auto r = run_cli("convergence --problem nope --out " + (dir / "o").string(), dir);
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.err.find("invalid-parameter"), std::string::npos);
}

TEST(Cli, ConvergenceWritesOrderTable) {
  const auto dir = scratch("conv1d");
  const auto out = dir / "o";
  const auto r = run_cli("convergence --problem cn1d-mms --out " + out.string(), dir);
  ASSERT_EQ(r.status, 0) << r.err;
  const auto m = read_json(out / "manifest.json");
  EXPECT_GE(m.at("summary").at("space_order").get<double>(), 1.9);
  EXPECT_GE(m.at("summary").at("time_order").get<double>(), 1.9);
  EXPECT_EQ(slurp(out / "convergence.csv").substr(0, 27), "sweep,level,h,k,error,order");
}

TEST(Cli, TinyBetaFieldIsOne) {
  const auto dir = scratch("tiny");
  const auto conf = write_file(dir / "t.conf",
                               "[params]\nprocess = ou\nbeta = 5e-20\n[grid]\nM = 100\nN = 50\n");
  const auto out = dir / "o";
  const auto r = run_cli("solve-ratio --config " + conf.string() + " --normalized --out " + out.string(), dir);
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(fs::path(r.out.substr(0, r.out.find('\n'))), out / "manifest.json");
  std::ifstream in(out / "field.csv");
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "t,x,V");
  double worst = 0.0;
  int rows = 0;
  while (std::getline(in, line)) {
    worst = std::max(worst, std::abs(std::stod(line.substr(line.rfind(',') + 1)) - 1.0));
    ++rows;
  }
  EXPECT_GT(rows, 100);
  EXPECT_LT(worst, 1e-6);
  EXPECT_TRUE(fs::exists(out / "field_norm.csv"));
  const auto m = read_json(out / "manifest.json");
  EXPECT_EQ(m.at("command"), "solve-ratio");
  EXPECT_EQ(m.at("config").at("params").at("beta").get<double>(), 5e-20);
  EXPECT_TRUE(m.contains("timings"));
  EXPECT_TRUE(m.contains("bound"));
}

TEST(Cli, Wf2dSnapshots) {
  const auto dir = scratch("wf2d");
  const auto out = dir / "o";
  const auto r = run_cli("solve-ratio --config " + (kConfigs / "wf2d_h1.conf").string() + " --out " + out.string(), dir);
  ASSERT_EQ(r.status, 0) << r.err;
  std::ifstream in(out / "field.csv");
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "t,x,y,V");
  std::set<std::string> times;
  while (std::getline(in, line)) times.insert(line.substr(0, line.find(',')));
  EXPECT_EQ(times, (std::set<std::string>{"0.25", "0.5", "0.75", "1"}));
  EXPECT_TRUE(fs::exists(out / "field.bin"));
}

TEST(Cli, ForcedIdentityAcceptsAll) {
  const auto dir = scratch("identity");
  const auto out = dir / "o";
  const auto r = run_cli("sample --config " + (kConfigs / "wf1d_identity.conf").string() + " --out " + out.string(), dir);
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(read_json(out / "summary.json").at("acceptance_rate").get<double>(), 1.0);
}

TEST(Cli, LargeBetaReportsRejection) {
  const auto dir = scratch("beta25");
  const auto out = dir / "o";
  const auto r = run_cli("sample --config " + (kConfigs / "ou_beta25.conf").string() + " --out " + out.string(), dir);
  ASSERT_EQ(r.status, 0) << r.err;
  const auto s = read_json(out / "summary.json");
  EXPECT_GE(s.at("rejected_fraction").get<double>(), 0.99);
}

TEST(Cli, ValidateOuTrend) {
  const auto dir = scratch("validate");
  const auto out = dir / "o";
  const auto r = run_cli("validate-ou --config " + (kConfigs / "ou_validate.conf").string() + " --out " + out.string(), dir);
  ASSERT_EQ(r.status, 0) << r.err;
  std::ifstream in(out / "validate_ou.csv");
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "beta,max_abs_error,mean_abs_error,n_points");
  std::vector<double> errs;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string b, e;
    std::getline(ss, b, ',');
    std::getline(ss, e, ',');
    errs.push_back(std::stod(e));
  }
  ASSERT_EQ(errs.size(), 3u);
  EXPECT_LT(errs[0], 1e-4);
  EXPECT_LT(errs[0], errs[1]);
  EXPECT_LT(errs[1], errs[2]);
  EXPECT_TRUE(read_json(out / "manifest.json").at("summary").at("max_error_increasing_in_beta").get<bool>());
}

TEST(Cli, SeedFlagOverridesConfig) {
  const auto dir = scratch("seed");
  const auto conf = kConfigs / "ou_identity.conf";
  ASSERT_EQ(run_cli("sample --config " + conf.string() + " --seed 99 --jobs 2 --out " + (dir / "a").string(), dir).status, 0);
  ASSERT_EQ(run_cli("sample --config " + conf.string() + " --seed 99 --out " + (dir / "b").string(), dir).status, 0);
  EXPECT_EQ(read_json(dir / "a" / "manifest.json").at("seeds").at("root").get<std::uint64_t>(), 99u);
  EXPECT_EQ(slurp(dir / "a" / "paths" / "path_00003.csv"), slurp(dir / "b" / "paths" / "path_00003.csv"));
  ASSERT_EQ(run_cli("sample --config " + conf.string() + " --seed 100 --out " + (dir / "c").string(), dir).status, 0);
  EXPECT_NE(slurp(dir / "a" / "paths" / "path_00003.csv"), slurp(dir / "c" / "paths" / "path_00003.csv"));
}

TEST(Cli, RerunFromManifestIsByteIdentical) {
  const auto dir = scratch("rerun");
  const auto first = dir / "first", second = dir / "second";
  ASSERT_EQ(run_cli("sample --config " + (kConfigs / "ou_validate.conf").string() + " --out " + first.string(), dir).status, 0);
  const auto r = run_cli("sample --from-manifest " + (first / "manifest.json").string() + " --out " + second.string(), dir);
  ASSERT_EQ(r.status, 0) << r.err;
  int compared = 0;
  for (const auto& e : fs::recursive_directory_iterator(first)) {
    if (e.path().extension() != ".csv") continue;
    const auto rel = fs::relative(e.path(), first);
    EXPECT_EQ(slurp(e.path()), slurp(second / rel)) << rel;
    ++compared;
  }
  EXPECT_GT(compared, 1);
  const auto wrong = run_cli("solve-ratio --from-manifest " + (first / "manifest.json").string() + " --out " + (dir / "x").string(), dir);
  EXPECT_EQ(wrong.status, 2);
}

TEST(Commands, UnknownCommandIsInvalid) {
  ExperimentConfig c;
  c.process = "ou";
  EXPECT_THROW(run_command("dance", c, CommandOptions{scratch("cmd")}), Error);
}

}  // namespace
}  // namespace fpr

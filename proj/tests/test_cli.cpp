#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mgsim/mgsim.hpp"

namespace fs = std::filesystem;
using namespace mgsim;

namespace {

struct Run {
  int code = -1;
  std::string output;
};

Run run(const std::string& args, const std::string& stdin_text = {}) {
  std::string cmd = std::string(MGSIM_CLI_PATH) + " " + args + " 2>&1";
  fs::path input;
  if (!stdin_text.empty()) {
    input = fs::temp_directory_path() / "mgsim_cli_stdin.txt";
    std::ofstream(input) << stdin_text;
    cmd += " < " + input.string();
  }
  Run r;
  FILE* p = ::popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) r.output.append(buf, n);
  const int status = ::pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("mgsim_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path dataset(const std::string& name, std::size_t buildings, std::size_t hours, int seed) {
  const auto dir = scratch(name) / "data";
  const auto r = run("gen-dataset --buildings " + std::to_string(buildings) + " --hours " + std::to_string(hours) +
                     " --seed " + std::to_string(seed) + " --out " + dir.string());
  EXPECT_EQ(r.code, 0) << r.output;
  return dir;
}

}  // namespace

TEST(Cli, GenDatasetWritesInputFiles) {
  const auto dir = dataset("gen", 2, 168, 7);
  EXPECT_TRUE(fs::exists(dir / "Building_1.csv"));
  EXPECT_TRUE(fs::exists(dir / "Building_2.csv"));
  EXPECT_TRUE(fs::exists(dir / "weather.csv"));
  EXPECT_TRUE(fs::exists(dir / "solar_generation_1kW.csv"));
  EXPECT_TRUE(fs::exists(dir / "building_attributes.json"));
  EXPECT_EQ(lines_of(slurp(dir / "Building_1.csv")).size(), 169u);

  const auto again = scratch("gen_again") / "data";
  ASSERT_EQ(run("gen-dataset --buildings 2 --hours 168 --seed 7 --out " + again.string()).code, 0);
  for (const auto& entry : fs::directory_iterator(dir)) {
    EXPECT_EQ(slurp(entry.path()), slurp(again / entry.path().filename())) << entry.path();
  }
}

TEST(Cli, SimulateRbcWritesOneRowPerHourAndIsReproducible) {
  const auto dir = dataset("sim", 2, 168, 7);
  const auto out1 = dir.parent_path() / "a.csv", out2 = dir.parent_path() / "b.csv";
  ASSERT_EQ(run("simulate --data " + dir.string() + " --agent rbc --seed 3 --out " + out1.string()).code, 0);
  ASSERT_EQ(run("simulate --data " + dir.string() + " --agent rbc --seed 3 --out " + out2.string()).code, 0);
  const auto text = slurp(out1);
  EXPECT_EQ(text, slurp(out2));
  const auto rows = lines_of(text);
  ASSERT_EQ(rows.size(), 169u);
  EXPECT_EQ(rows[0].rfind("hour_index,net_electric_consumption,", 0), 0u);
}

TEST(Cli, SimulateRandomIsSeeded) {
  const auto dir = dataset("rand", 2, 48, 1);
  const auto a = dir.parent_path() / "a.csv", b = dir.parent_path() / "b.csv", c = dir.parent_path() / "c.csv";
  ASSERT_EQ(run("simulate --data " + dir.string() + " --agent random --seed 5 --out " + a.string()).code, 0);
  ASSERT_EQ(run("simulate --data " + dir.string() + " --agent random --seed 5 --out " + b.string()).code, 0);
  ASSERT_EQ(run("simulate --data " + dir.string() + " --agent random --seed 6 --out " + c.string()).code, 0);
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_NE(slurp(a), slurp(c));
}

TEST(Cli, SimulateQlearnExportsFinalEpisode) {
  const auto dir = dataset("qlearn", 1, 72, 2);
  const auto out = dir.parent_path() / "q.csv";
  const auto r = run("simulate --data " + dir.string() + " --agent qlearn --episodes 4 --seed 9 --verbose --out " +
                     out.string());
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_NE(r.output.find("episode 4 return"), std::string::npos);

  // Independent replay of the same schedule in-process.
  auto ds = std::make_shared<const Dataset>(load_dataset(SimulationConfig{.data_path = dir, .seed = 9}));
  Environment env(ds);
  QLearningAgent agent(env, QAgentConfig{}, 9);
  EpisodeRecord last;
  for (int ep = 0; ep < 4; ++ep) last = run_q_episode(env, agent, 0.1 * (3 - ep) / 3.0, true);
  std::ostringstream expect;
  write_trajectory_csv(expect, env, last);
  EXPECT_EQ(slurp(out), expect.str());
}

TEST(Cli, ScoreOfRbcTrajectoryIsOne) {
  const auto dir = dataset("score", 2, 168, 7);
  const auto traj = dir.parent_path() / "rbc.csv";
  ASSERT_EQ(run("simulate --data " + dir.string() + " --agent rbc --out " + traj.string()).code, 0);
  const auto r = run("score --data " + dir.string() + " --trajectory " + traj.string());
  ASSERT_EQ(r.code, 0) << r.output;
  const auto rows = lines_of(r.output);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].find("quadratic"), std::string::npos);
  EXPECT_EQ(rows[1], "data\t1.000000\t1.000000\t1.000000\t1.000000\t1.000000\t1.000000");
}

TEST(Cli, ScoreAcrossZonesAddsGrandAverage) {
  std::string args = "score";
  std::vector<fs::path> dirs;
  for (int z = 0; z < 4; ++z) {
    const auto dir = dataset("zone" + std::to_string(z), 2, 72, 20 + z);
    const auto traj = dir.parent_path() / "random.csv";
    ASSERT_EQ(run("simulate --data " + dir.string() + " --agent random --seed 1 --out " + traj.string()).code, 0);
    args += " --data " + dir.string() + " --trajectory " + traj.string() + " --label zone" + std::to_string(z);
  }
  const auto out = scratch("zones") / "report.tsv";
  const auto r = run(args + " --out " + out.string());
  ASSERT_EQ(r.code, 0) << r.output;
  const auto rows = lines_of(slurp(out));
  ASSERT_EQ(rows.size(), 6u);
  EXPECT_EQ(rows[1].rfind("zone0\t", 0), 0u);
  EXPECT_EQ(rows[5].rfind("average\t", 0), 0u);

  // Grand average equals the mean of the zone averages.
  double mean = 0.0;
  for (int i = 1; i <= 4; ++i) mean += std::stod(rows[i].substr(rows[i].rfind('\t') + 1)) / 4.0;
  EXPECT_NEAR(std::stod(rows[5].substr(rows[5].rfind('\t') + 1)), mean, 2e-6);
}

TEST(Cli, ScoreMetricSubsetAndLengthMismatch) {
  const auto dir = dataset("subset", 1, 48, 3);
  const auto traj = dir.parent_path() / "rbc.csv";
  ASSERT_EQ(run("simulate --data " + dir.string() + " --agent rbc --out " + traj.string()).code, 0);
  const auto r = run("score --data " + dir.string() + " --trajectory " + traj.string() + " --metrics quadratic,ramping");
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_EQ(lines_of(r.output)[0], "dataset\tquadratic\tramping\taverage_score");

  const auto bad = run("score --data " + dir.string() + " --trajectory " + traj.string() + " --end 23");
  EXPECT_NE(bad.code, 0);
  EXPECT_NE(bad.output.find("rows"), std::string::npos);
}

TEST(Cli, ServeStdioAnswersHello) {
  const auto dir = dataset("stdio", 1, 48, 3);
  const auto r = run("serve --stdio --data " + dir.string(), "{\"type\":\"hello\",\"id\":1,\"payload\":{}}\n");
  ASSERT_EQ(r.code, 0) << r.output;
  const auto j = nlohmann::json::parse(lines_of(r.output).at(0));
  EXPECT_EQ(j["type"], "hello");
  EXPECT_EQ(j["id"], 1);
}

TEST(Cli, ServeTcpOnOccupiedPortFailsCleanly) {
  const auto dir = dataset("occupied", 1, 48, 3);
  const auto ds = std::make_shared<const Dataset>(load_dataset(SimulationConfig{.data_path = dir}));
  server::TcpServer holder(ds, EnvironmentOptions::from(*ds));
  const auto port = holder.listen("127.0.0.1", 0);
  const auto r = run("serve --data " + dir.string() + " --tcp 127.0.0.1:" + std::to_string(port));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.output.find("error: cannot listen"), std::string::npos) << r.output;
}

TEST(Cli, ServeLogReplaysInProcess) {
  const auto dir = dataset("replay", 1, 24, 3);
  const auto logs = dir.parent_path() / "logs";
  std::string script = "{\"type\":\"hello\",\"id\":1}\n{\"type\":\"reset\",\"id\":2}\n";
  for (int i = 0; i < 24; ++i) {
    script += "{\"type\":\"step\",\"id\":" + std::to_string(3 + i) + ",\"payload\":{\"actions\":[[0.3,-0.2,0.1]]}}\n";
  }
  script += "{\"type\":\"done\",\"id\":100}\n";
  const auto r = run("serve --stdio --data " + dir.string() + " --log-dir " + logs.string(), script);
  ASSERT_EQ(r.code, 0) << r.output;
  const auto check = run("replay --data " + dir.string() + " --log " + (logs / "session_0.jsonl").string());
  EXPECT_EQ(check.code, 0) << check.output;
  EXPECT_EQ(check.output, "match\n");
}

TEST(Cli, BadArgumentsFail) {
  EXPECT_NE(run("simulate --data /nonexistent --out x.csv").code, 0);
  EXPECT_NE(run("").code, 0);
  const auto dir = dataset("badagent", 1, 24, 3);
  EXPECT_NE(run("simulate --data " + dir.string() + " --agent sac --out x.csv").code, 0);
}

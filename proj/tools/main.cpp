#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "mgsim/mgsim.hpp"

namespace fs = std::filesystem;
using namespace mgsim;

namespace {

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

struct DataOptions {
  std::string data;
  std::string mode = "decentralized";
  std::uint64_t seed = 0;
  std::optional<std::size_t> start;
  std::optional<std::size_t> end;
};

void add_data_options(CLI::App* cmd, DataOptions& o, bool with_mode = true) {
  cmd->add_option("--data", o.data, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  if (with_mode) {
    cmd->add_option("--mode", o.mode, "Control mode")
        ->check(CLI::IsMember({"decentralized", "central"}))
        ->capture_default_str();
  }
  cmd->add_option("--seed", o.seed, "Seed for forecasts and stochastic agents")->capture_default_str();
  cmd->add_option("--start", o.start, "First simulated hour (inclusive)");
  cmd->add_option("--end", o.end, "Last simulated hour (inclusive)");
}

std::shared_ptr<const Dataset> load(const DataOptions& o, const std::string& data_dir) {
  SimulationConfig cfg;
  cfg.data_path = data_dir;
  cfg.central_agent = parse_mode(o.mode) == ControlMode::central;
  cfg.seed = o.seed;
  if (o.start || o.end) {
    // Fill the missing bound from the weather file length.
    std::size_t hours = 0;
    {
      std::ifstream in(fs::path(data_dir) / cfg.weather_file);
      std::string line;
      while (std::getline(in, line)) {
        if (!line.empty() && line != "\r") ++hours;
      }
      if (hours > 0) --hours;
    }
    cfg.simulation_period = Period{o.start.value_or(0), o.end.value_or(hours == 0 ? 0 : hours - 1)};
  }
  return std::make_shared<const Dataset>(load_dataset(cfg));
}

void write_file(const std::string& path, const std::string& text) {
  if (auto parent = fs::path(path).parent_path(); !parent.empty()) fs::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

// ---------------------------------------------------------------------------

int cmd_gen_dataset(std::size_t buildings, std::size_t hours, std::uint64_t seed, const std::string& out) {
  const auto ds = generate_synthetic_dataset(buildings, hours, seed);
  save_dataset(ds, out);
  std::cout << "wrote " << buildings << " buildings x " << hours << " h to " << out << '\n';
  return 0;
}

struct SimulateOptions {
  DataOptions data;
  std::string agent = "rbc";
  std::size_t episodes = 1;
  std::string out;
  std::string qtable_out;
  double alpha = 0.1;
  double gamma = 0.9;
  double epsilon = 0.1;
  bool verbose = false;
};

int cmd_simulate(const SimulateOptions& o) {
  const auto ds = load(o.data, o.data.data);
  Environment env(ds, EnvironmentOptions::from(*ds));
  EpisodeRecord rec;

  if (o.agent == "rbc") {
    for (std::size_t ep = 0; ep < o.episodes; ++ep) {
      rec = run_rbc_episode(env);
      if (o.verbose) std::cout << "episode " << ep + 1 << " return " << csv::format_double(rec.total_return) << '\n';
    }
  } else if (o.agent == "random") {
    std::mt19937_64 rng(o.data.seed);
    const auto counts = env.action_counts();
    for (std::size_t ep = 0; ep < o.episodes; ++ep) {
      rec = run_episode(env, [&](const Environment& e, const States&) { return random_actions(counts, e.mode(), rng); });
      if (o.verbose) std::cout << "episode " << ep + 1 << " return " << csv::format_double(rec.total_return) << '\n';
    }
  } else {
    QAgentConfig cfg;
    cfg.params = {o.alpha, o.gamma, o.epsilon};
    QLearningAgent agent(env, cfg, o.data.seed);
    // Exploration decays linearly so the exported final episode is greedy.
    for (std::size_t ep = 0; ep < o.episodes; ++ep) {
      const double eps = o.episodes > 1 ? o.epsilon * static_cast<double>(o.episodes - 1 - ep) /
                                              static_cast<double>(o.episodes - 1)
                                        : 0.0;
      rec = run_q_episode(env, agent, eps, true);
      if (o.verbose) std::cout << "episode " << ep + 1 << " return " << csv::format_double(rec.total_return) << '\n';
    }
    if (!o.qtable_out.empty()) {
      std::ostringstream q;
      for (const auto& t : agent.tables()) t.write(q);
      write_file(o.qtable_out, q.str());
    }
  }

  std::ostringstream traj;
  write_trajectory_csv(traj, env, rec);
  write_file(o.out, traj.str());
  if (o.verbose) std::cout << "wrote " << rec.trackers.size() << " rows to " << o.out << '\n';
  return 0;
}

struct ScoreOptions {
  DataOptions data;
  std::vector<std::string> datasets;
  std::vector<std::string> trajectories;
  std::vector<std::string> labels;
  std::vector<std::string> metrics;
  std::string out;
};

int cmd_score(const ScoreOptions& o) {
  if (o.datasets.size() != o.trajectories.size()) {
    throw std::runtime_error("give one --trajectory per --data (" + std::to_string(o.datasets.size()) + " vs " +
                             std::to_string(o.trajectories.size()) + ")");
  }
  if (!o.labels.empty() && o.labels.size() != o.datasets.size()) throw std::runtime_error("give one --label per --data");
  std::vector<Metric> metrics;
  for (const auto& m : o.metrics) metrics.push_back(parse_metric(m));
  if (metrics.empty()) metrics = challenge_metrics();

  std::vector<ReportRow> rows;
  std::vector<MetricReport> reports;
  for (std::size_t i = 0; i < o.datasets.size(); ++i) {
    const auto ds = load(o.data, o.datasets[i]);
    Environment env(ds, EnvironmentOptions::from(*ds));
    const auto baseline = run_rbc_episode(env);

    std::ifstream in(o.trajectories[i]);
    if (!in) throw std::runtime_error("cannot open " + o.trajectories[i]);
    const auto agent = read_trajectory_column(in);
    if (agent.size() != baseline.trackers.net_electric_consumption.size()) {
      throw std::runtime_error("trajectory " + o.trajectories[i] + " has " + std::to_string(agent.size()) +
                               " rows but the simulation period has " +
                               std::to_string(baseline.trackers.net_electric_consumption.size()));
    }
    const auto months = env.period_months();
    auto report = score(agent, baseline.trackers.net_electric_consumption, months, metrics);
    rows.push_back({o.labels.empty() ? fs::path(o.datasets[i]).filename().string() : o.labels[i], report});
    reports.push_back(std::move(report));
  }
  if (rows.size() > 1) rows.push_back({"average", average_reports(reports)});

  std::ostringstream table;
  write_report_table(table, rows);
  if (o.out.empty()) {
    std::cout << table.str();
  } else {
    write_file(o.out, table.str());
  }
  return 0;
}

struct ServeOptions {
  DataOptions data;
  bool stdio = false;
  std::string tcp;
  std::string log_dir;
};

int cmd_serve(const ServeOptions& o) {
  const auto ds = load(o.data, o.data.data);
  const auto options = EnvironmentOptions::from(*ds);
  if (o.stdio) {
    std::ios::sync_with_stdio(false);
    const auto log = server::serve_stream(std::cin, std::cout, ds, options);
    if (!o.log_dir.empty()) {
      fs::create_directories(o.log_dir);
      std::ofstream out(fs::path(o.log_dir) / "session_0.jsonl");
      log.write(out);
    }
    return 0;
  }
  const auto ep = server::parse_endpoint(o.tcp);
  std::optional<fs::path> log_dir;
  if (!o.log_dir.empty()) {
    fs::create_directories(o.log_dir);
    log_dir = o.log_dir;
  }
  server::TcpServer srv(ds, options, log_dir);
  const auto port = srv.listen(ep.host, ep.port);
  std::cout << "listening on " << ep.host << ':' << port << std::endl;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  srv.start();
  while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  srv.stop();
  return 0;
}

int cmd_replay(const DataOptions& o, const std::string& log_path) {
  const auto ds = load(o, o.data);
  std::ifstream in(log_path);
  if (!in) throw std::runtime_error("cannot open " + log_path);
  const auto log = protocol::SessionLog::read(in);
  const bool ok = protocol::replay_check(ds, EnvironmentOptions::from(*ds), log);
  std::cout << (ok ? "match" : "mismatch") << '\n';
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-building demand-response simulation"};
  app.require_subcommand(1);

  std::size_t gen_buildings = 2, gen_hours = 8760;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen-dataset", "Write a seeded synthetic dataset");
  gen->add_option("--buildings", gen_buildings, "Number of buildings")->check(CLI::PositiveNumber)->capture_default_str();
  gen->add_option("--hours", gen_hours, "Horizon in hours (at least 24)")->capture_default_str();
  gen->add_option("--seed", gen_seed, "Generator seed")->capture_default_str();
  gen->add_option("--out", gen_out, "Output directory")->required();

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Run episodes and export the last trajectory");
  add_data_options(simulate, sim.data);
  simulate->add_option("--agent", sim.agent, "Controller")
      ->check(CLI::IsMember({"rbc", "random", "qlearn"}))
      ->capture_default_str();
  simulate->add_option("--episodes", sim.episodes, "Episodes to run")->check(CLI::PositiveNumber)->capture_default_str();
  simulate->add_option("--out", sim.out, "Trajectory CSV")->required();
  simulate->add_option("--qtable", sim.qtable_out, "Write the learned Q-table here (qlearn)");
  simulate->add_option("--alpha", sim.alpha, "Learning rate (qlearn)")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  simulate->add_option("--gamma", sim.gamma, "Discount (qlearn)")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  simulate->add_option("--epsilon", sim.epsilon, "Initial exploration rate (qlearn)")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  simulate->add_flag("--verbose,-v", sim.verbose, "Print per-episode returns");

  ScoreOptions sc;
  auto* scorecmd = app.add_subcommand("score", "Score trajectories against the rule-based baseline");
  scorecmd->add_option("--data", sc.datasets, "Dataset directory (repeat per zone)")->required();
  scorecmd->add_option("--trajectory", sc.trajectories, "Trajectory CSV (repeat, same order as --data)")->required();
  scorecmd->add_option("--label", sc.labels, "Row label per dataset");
  scorecmd->add_option("--metrics", sc.metrics, "Metric subset")->delimiter(',');
  scorecmd->add_option("--seed", sc.data.seed, "Forecast seed")->capture_default_str();
  scorecmd->add_option("--start", sc.data.start, "First simulated hour (inclusive)");
  scorecmd->add_option("--end", sc.data.end, "Last simulated hour (inclusive)");
  scorecmd->add_option("--out", sc.out, "Report file (stdout if omitted)");

  ServeOptions sv;
  auto* serve = app.add_subcommand("serve", "Serve the environment over line-delimited JSON");
  add_data_options(serve, sv.data);
  auto* stdio_flag = serve->add_flag("--stdio", sv.stdio, "Use standard input/output");
  serve->add_option("--tcp", sv.tcp, "Listen address host:port")->default_val("127.0.0.1:7460")->excludes(stdio_flag);
  serve->add_option("--log-dir", sv.log_dir, "Write one session log per connection here");

  DataOptions rp;
  std::string rp_log;
  auto* replay = app.add_subcommand("replay", "Check a session log against an in-process run");
  add_data_options(replay, rp);
  replay->add_option("--log", rp_log, "Session log")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return cmd_gen_dataset(gen_buildings, gen_hours, gen_seed, gen_out);
    if (*simulate) return cmd_simulate(sim);
    if (*scorecmd) return cmd_score(sc);
    if (*serve) return cmd_serve(sv);
    if (*replay) return cmd_replay(rp, rp_log);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

#include <gtest/gtest.h>

#include <random>
#include <sstream>
#include <vector>

#include "mgsim/agents.hpp"
#include "mgsim/synthetic.hpp"
#include "support.hpp"

using namespace mgsim;

TEST(Rbc, StandardScheduleReadout) {
  const auto p = RbcPolicy::standard();
  EXPECT_EQ(rbc_act(p, 23), p.charge_rate);
  EXPECT_GT(p.charge_rate, 0.0);
  EXPECT_EQ(rbc_act(p, 12), -p.discharge_rate);
  for (int h = 1; h <= 24; ++h) EXPECT_NE(rbc_act(p, h), 0.0) << h;
}

TEST(Rbc, IdleOutsideBothSets) {
  RbcPolicy p;
  p.charge_hours = {1, 2};
  p.discharge_hours = {12};
  p.charge_rate = p.discharge_rate = 0.5;
  EXPECT_EQ(rbc_act(p, 5), 0.0);
  EXPECT_NO_THROW(p.validate());
  p.discharge_hours.push_back(2);
  EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(Rbc, SameValueOnEveryStorageAction) {
  auto ds = testsupport::share(generate_synthetic_dataset(3, 48, 1));
  Environment env(ds);
  env.reset();
  const auto a = rbc_actions(RbcPolicy::standard(), env);
  for (const auto& row : a) {
    for (double v : row) EXPECT_EQ(v, rbc_act(RbcPolicy::standard(), env.current_hour()));
  }
}

TEST(QLearning, UpdateMatchesBellmanStep) {
  QTable q({2}, {{0.0, 1.0}}, {0.5, 0.9, 0.0});
  q.set({1}, {0}, 2.0);
  const double oracle = 0.0 + 0.5 * (1.0 + 0.9 * 2.0 - 0.0);
  EXPECT_NEAR(q_update(q, {0}, {1}, 1.0, {1}), oracle, 1e-12);
  EXPECT_NEAR(q.value({0}, {1}), 1.4, 1e-12);
}

TEST(QLearning, ZeroAlphaLeavesValue) {
  QTable q({2}, {{0.0, 1.0}}, {0.0, 0.9, 0.0});
  q.set({0}, {0}, 0.7);
  q.set({1}, {1}, 5.0);
  EXPECT_EQ(q_update(q, {0}, {0}, 3.0, {1}), 0.7);
}

TEST(QLearning, MyopicUpdateStoresReward) {
  QTable q({2}, {{0.0, 1.0}}, {1.0, 0.0, 0.0});
  q.set({1}, {1}, 5.0);
  EXPECT_EQ(q_update(q, {0}, {0}, -2.5, {1}), -2.5);
}

TEST(QLearning, TerminalDropsBootstrap) {
  QTable q({2}, {{0.0}}, {1.0, 0.9, 0.0});
  q.set({1}, {0}, 10.0);
  EXPECT_EQ(q.update({0}, {0}, 1.0, {1}, true), 1.0);
}

TEST(QLearning, RepeatedUpdatesConvergeGeometrically) {
  const double alpha = 0.3, gamma = 0.8, r = 2.0, next = 4.0;
  QTable q({2}, {{0.0}}, {alpha, gamma, 0.0});
  q.set({1}, {0}, next);
  const double target = r + gamma * next;
  double gap = target;  // Q starts at 0
  for (int i = 0; i < 30; ++i) {
    q.update({0}, {0}, r, {1});
    gap *= 1.0 - alpha;
    EXPECT_NEAR(target - q.value({0}, {0}), gap, 1e-12);
  }
}

TEST(QLearning, ParamsAreRangeChecked) {
  EXPECT_THROW(QTable({2}, {{0.0}}, {1.5, 0.9, 0.1}), std::invalid_argument);
  EXPECT_THROW(QTable({2}, {{0.0}}, {0.1, -0.1, 0.1}), std::invalid_argument);
  EXPECT_THROW(QTable({2}, {{0.0}}, {0.1, 0.9, 2.0}), std::invalid_argument);
  EXPECT_THROW(QTable({0}, {{0.0}}), std::invalid_argument);
}

TEST(QLearning, GreedyTieBreakAndDominance) {
  QTable q({3}, {{-1.0, 0.0, 1.0}, {-1.0, 1.0}}, {0.1, 0.9, 0.0});
  std::mt19937_64 rng(1);
  EXPECT_EQ(epsilon_greedy_act(q, {0}, rng), (ActionKey{0, 0}));
  q.set({0}, {2, 1}, 0.5);
  EXPECT_EQ(epsilon_greedy_act(q, {0}, rng), (ActionKey{2, 1}));
}

TEST(QLearning, ArgmaxInvariantUnderShift) {
  QTable q({1}, {{0.0, 1.0, 2.0}}, {0.1, 0.9, 0.0});
  q.set({0}, {0}, 0.3);
  q.set({0}, {1}, 0.9);
  q.set({0}, {2}, -0.2);
  const auto before = q.greedy({0});
  for (int a = 0; a < 3; ++a) q.set({0}, {a}, q.value({0}, {a}) + 17.5);
  EXPECT_EQ(q.greedy({0}), before);
}

TEST(QLearning, FullExplorationIsSeeded) {
  QTable q({1}, {{0.0, 1.0, 2.0}}, {0.1, 0.9, 1.0});
  std::mt19937_64 a(42), b(42);
  std::vector<int> counts(3, 0);
  for (int i = 0; i < 300; ++i) {
    const auto x = q.epsilon_greedy({0}, a);
    EXPECT_EQ(x, q.epsilon_greedy({0}, b));
    ++counts[x[0]];
  }
  for (int c : counts) EXPECT_GT(c, 50);
}

TEST(Discretize, Boundaries) {
  const std::vector<Bounds> b = {{0.0, 1.0}};
  const std::vector<int> bins = {4};
  EXPECT_EQ(discretize(std::vector<double>{0.0}, b, bins)[0], 0);
  EXPECT_EQ(discretize(std::vector<double>{1.0}, b, bins)[0], 3);
  EXPECT_EQ(discretize(std::vector<double>{0.6}, b, bins)[0], static_cast<int>(std::floor(0.6 * 4)));
  EXPECT_EQ(discretize(std::vector<double>{0.6}, b, bins)[0], 2);
  EXPECT_EQ(discretize(std::vector<double>{0.5}, b, bins)[0], 2);  // inner edge goes up
  EXPECT_EQ(discretize(std::vector<double>{-3.0}, b, bins)[0], 0);
  EXPECT_EQ(discretize(std::vector<double>{9.0}, b, bins)[0], 3);
}

TEST(QLearning, TableWriteFormat) {
  QTable q({2, 3}, {{-1.0, 1.0}}, {0.1, 0.9, 0.0});
  q.set({1, 2}, {1}, 0.25);
  std::ostringstream out;
  q.write(out);
  EXPECT_EQ(out.str(), "1,2\t0\t0\n1,2\t1\t0.25\n");
}

TEST(QLearning, AgentRunsAreReproducible) {
  auto ds = testsupport::share(generate_synthetic_dataset(2, 72, 3));
  auto run = [&] {
    Environment env(ds);
    QLearningAgent agent(env, QAgentConfig{}, 99);
    run_q_episode(env, agent, 0.5, true);
    return run_q_episode(env, agent, 0.5, true);
  };
  const auto a = run();
  const auto b = run();
  EXPECT_EQ(a.executed_actions, b.executed_actions);
  EXPECT_EQ(a.trackers, b.trackers);
}

TEST(QLearning, CentralAgentUsesOneTable) {
  auto d = generate_synthetic_dataset(2, 48, 3);
  d.mode = ControlMode::central;
  auto ds = testsupport::share(std::move(d));
  Environment env(ds);
  QLearningAgent agent(env, QAgentConfig{}, 1);
  EXPECT_EQ(agent.tables().size(), 1u);
  const auto rec = run_q_episode(env, agent, 0.3, true);
  EXPECT_EQ(rec.trackers.size(), 48u);
}

TEST(Random, SeededAndInRange) {
  const std::vector<std::size_t> counts = {3, 2};
  std::mt19937_64 a(5), b(5);
  const auto x = random_actions(counts, ControlMode::decentralized, a);
  EXPECT_EQ(x, random_actions(counts, ControlMode::decentralized, b));
  ASSERT_EQ(x.size(), 2u);
  for (const auto& row : x) {
    for (double v : row) {
      EXPECT_GE(v, -1.0);
      EXPECT_LE(v, 1.0);
    }
  }
  EXPECT_EQ(random_actions(counts, ControlMode::central, a)[0].size(), 5u);
}

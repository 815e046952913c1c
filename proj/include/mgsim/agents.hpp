#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "mgsim/csv.hpp"
#include "mgsim/environment.hpp"
#include "mgsim/types.hpp"

namespace mgsim {

// ---------------------------------------------------------------------------
// Rule-based controller

/// Time-of-day storage rule used as the normalization baseline: charge during
/// `charge_hours`, discharge during `discharge_hours`, idle otherwise. Hours are
/// hour-of-day values 1..24.
struct RbcPolicy {
  std::vector<int> charge_hours;
  std::vector<int> discharge_hours;
  double charge_rate = 0.0;
  double discharge_rate = 0.0;

  /// Night charge (22..24, 1..8) and day discharge (9..21), each rate spread so
  /// that one full cycle is attempted per day.
  static RbcPolicy standard() {
    RbcPolicy p;
    p.charge_hours = {22, 23, 24, 1, 2, 3, 4, 5, 6, 7, 8};
    for (int h = 9; h <= 21; ++h) p.discharge_hours.push_back(h);
    p.charge_rate = 1.0 / static_cast<double>(p.charge_hours.size());
    p.discharge_rate = 1.0 / static_cast<double>(p.discharge_hours.size());
    return p;
  }

  void validate() const {
    for (int h : charge_hours) {
      if (std::find(discharge_hours.begin(), discharge_hours.end(), h) != discharge_hours.end()) {
        throw std::invalid_argument("RBC charge and discharge hours overlap at hour " + std::to_string(h));
      }
    }
    auto in_range = [](double r) { return r > 0.0 && r <= 1.0; };
    if (!in_range(charge_rate) || !in_range(discharge_rate)) {
      throw std::invalid_argument("RBC rates must be in (0, 1]");
    }
  }
};

/// Storage action prescribed by the rule for one hour of day.
inline double rbc_act(const RbcPolicy& p, int hour) {
  if (std::find(p.charge_hours.begin(), p.charge_hours.end(), hour) != p.charge_hours.end()) return p.charge_rate;
  if (std::find(p.discharge_hours.begin(), p.discharge_hours.end(), hour) != p.discharge_hours.end()) {
    return -p.discharge_rate;
  }
  return 0.0;
}

/// Fills every action of every building with the same value, shaped for `mode`.
inline Actions uniform_actions(std::span<const std::size_t> counts, ControlMode mode, double value) {
  if (mode == ControlMode::central) {
    return {std::vector<double>(std::accumulate(counts.begin(), counts.end(), std::size_t{0}), value)};
  }
  Actions a;
  for (auto c : counts) a.emplace_back(c, value);
  return a;
}

inline Actions rbc_actions(const RbcPolicy& p, const Environment& env) {
  return uniform_actions(env.action_counts(), env.mode(), rbc_act(p, env.current_hour()));
}

// ---------------------------------------------------------------------------
// Random agent

inline Actions random_actions(std::span<const std::size_t> counts, ControlMode mode, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Actions a = uniform_actions(counts, mode, 0.0);
  for (auto& row : a) {
    for (auto& v : row) v = u(rng);
  }
  return a;
}

// ---------------------------------------------------------------------------
// Tabular Q-learning

using StateKey = std::vector<int>;
using ActionKey = std::vector<int>;

/// Uniform binning: values are clipped into [low, high]; a value on an inner
/// bin edge goes to the upper bin and `high` maps to the last bin.
inline StateKey discretize(std::span<const double> state, std::span<const Bounds> bounds, std::span<const int> bins) {
  if (state.size() != bounds.size() || state.size() != bins.size()) {
    throw std::invalid_argument("discretize: state, bounds and bins differ in length");
  }
  StateKey key(state.size());
  for (std::size_t i = 0; i < state.size(); ++i) {
    const int n = bins[i];
    if (n < 1) throw std::invalid_argument("discretize: bin count must be >= 1");
    const double lo = bounds[i].low, hi = bounds[i].high;
    if (!(hi > lo)) {
      key[i] = 0;
      continue;
    }
    const double v = std::clamp(state[i], lo, hi);
    const auto b = static_cast<int>(std::floor((v - lo) / (hi - lo) * n));
    key[i] = std::clamp(b, 0, n - 1);
  }
  return key;
}

struct QLearningParams {
  double alpha = 0.1;    // learning rate
  double gamma = 0.9;    // discount
  double epsilon = 0.1;  // exploration rate
};

/// Sparse action-value table over discretized states and discrete action
/// tuples. Unseen entries read as 0.
class QTable {
 public:
  QTable(std::vector<int> state_bins, std::vector<std::vector<double>> action_levels, QLearningParams params = {})
      : state_bins_(std::move(state_bins)), action_levels_(std::move(action_levels)), params_(params) {
    for (int b : state_bins_) {
      if (b < 1) throw std::invalid_argument("QTable: bin count must be >= 1");
    }
    action_tuples_ = 1;
    for (const auto& lv : action_levels_) {
      if (lv.empty()) throw std::invalid_argument("QTable: every action dimension needs at least one level");
      action_tuples_ *= lv.size();
    }
    set_params(params);
  }

  void set_params(QLearningParams p) {
    if (p.alpha < 0.0 || p.alpha > 1.0) throw std::invalid_argument("QTable: alpha must be in [0, 1]");
    if (p.gamma < 0.0 || p.gamma > 1.0) throw std::invalid_argument("QTable: gamma must be in [0, 1]");
    if (p.epsilon < 0.0 || p.epsilon > 1.0) throw std::invalid_argument("QTable: epsilon must be in [0, 1]");
    params_ = p;
  }
  void set_epsilon(double eps) { set_params({params_.alpha, params_.gamma, eps}); }
  const QLearningParams& params() const { return params_; }

  std::size_t action_tuple_count() const { return action_tuples_; }
  std::size_t state_dims() const { return state_bins_.size(); }
  const std::vector<int>& state_bins() const { return state_bins_; }
  const std::vector<std::vector<double>>& action_levels() const { return action_levels_; }
  std::size_t size() const { return table_.size(); }

  /// Mixed-radix index; the first action dimension is most significant.
  std::size_t action_index(const ActionKey& a) const {
    if (a.size() != action_levels_.size()) throw std::invalid_argument("QTable: action tuple has wrong length");
    std::size_t idx = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i] < 0 || static_cast<std::size_t>(a[i]) >= action_levels_[i].size()) {
        throw std::out_of_range("QTable: action level out of range");
      }
      idx = idx * action_levels_[i].size() + static_cast<std::size_t>(a[i]);
    }
    return idx;
  }

  ActionKey action_key(std::size_t index) const {
    ActionKey a(action_levels_.size());
    for (std::size_t i = action_levels_.size(); i-- > 0;) {
      a[i] = static_cast<int>(index % action_levels_[i].size());
      index /= action_levels_[i].size();
    }
    return a;
  }

  std::vector<double> action_values(const ActionKey& a) const {
    std::vector<double> v(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) v[i] = action_levels_[i].at(static_cast<std::size_t>(a[i]));
    return v;
  }

  double value(const StateKey& s, const ActionKey& a) const {
    auto it = table_.find(state_index(s));
    return it == table_.end() ? 0.0 : it->second[action_index(a)];
  }

  void set(const StateKey& s, const ActionKey& a, double v) { row(s)[action_index(a)] = v; }

  double max_value(const StateKey& s) const {
    auto it = table_.find(state_index(s));
    if (it == table_.end()) return 0.0;
    return *std::max_element(it->second.begin(), it->second.end());
  }

  /// Q(s,a) <- Q(s,a) + alpha * (r + gamma * max_a' Q(s',a') - Q(s,a)).
  /// A terminal transition drops the bootstrap term.
  double update(const StateKey& s, const ActionKey& a, double reward, const StateKey& s_next, bool terminal = false) {
    const double future = terminal ? 0.0 : max_value(s_next);
    auto& q = row(s)[action_index(a)];
    q += params_.alpha * (reward + params_.gamma * future - q);
    return q;
  }

  /// Greedy action; ties go to the lowest action index.
  ActionKey greedy(const StateKey& s) const {
    auto it = table_.find(state_index(s));
    if (it == table_.end()) return action_key(0);
    const auto& q = it->second;
    return action_key(static_cast<std::size_t>(std::max_element(q.begin(), q.end()) - q.begin()));
  }

  ActionKey epsilon_greedy(const StateKey& s, std::mt19937_64& rng) const {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    if (params_.epsilon > 0.0 && u(rng) < params_.epsilon) {
      std::uniform_int_distribution<std::size_t> pick(0, action_tuples_ - 1);
      return action_key(pick(rng));
    }
    return greedy(s);
  }

  /// One line per stored entry: "<state bins>\t<action levels>\t<value>",
  /// tuples comma-separated, states in ascending index order.
  void write(std::ostream& out) const {
    std::map<std::uint64_t, const std::vector<double>*> sorted;
    for (const auto& [k, v] : table_) sorted.emplace(k, &v);
    for (const auto& [k, values] : sorted) {
      const auto s = state_key(k);
      std::string skey;
      for (std::size_t i = 0; i < s.size(); ++i) skey += (i ? "," : "") + std::to_string(s[i]);
      for (std::size_t ai = 0; ai < values->size(); ++ai) {
        const auto a = action_key(ai);
        out << skey << '\t';
        for (std::size_t i = 0; i < a.size(); ++i) out << (i ? "," : "") << a[i];
        out << '\t' << csv::format_double((*values)[ai]) << '\n';
      }
    }
  }

 private:
  std::uint64_t state_index(const StateKey& s) const {
    if (s.size() != state_bins_.size()) throw std::invalid_argument("QTable: state tuple has wrong length");
    std::uint64_t idx = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] < 0 || s[i] >= state_bins_[i]) throw std::out_of_range("QTable: state bin out of range");
      idx = idx * static_cast<std::uint64_t>(state_bins_[i]) + static_cast<std::uint64_t>(s[i]);
    }
    return idx;
  }

  StateKey state_key(std::uint64_t idx) const {
    StateKey s(state_bins_.size());
    for (std::size_t i = state_bins_.size(); i-- > 0;) {
      s[i] = static_cast<int>(idx % static_cast<std::uint64_t>(state_bins_[i]));
      idx /= static_cast<std::uint64_t>(state_bins_[i]);
    }
    return s;
  }

  std::vector<double>& row(const StateKey& s) {
    auto [it, inserted] = table_.try_emplace(state_index(s));
    if (inserted) it->second.assign(action_tuples_, 0.0);
    return it->second;
  }

  std::vector<int> state_bins_;
  std::vector<std::vector<double>> action_levels_;
  QLearningParams params_;
  std::size_t action_tuples_ = 1;
  std::unordered_map<std::uint64_t, std::vector<double>> table_;
};

inline double q_update(QTable& q, const StateKey& s, const ActionKey& a, double reward, const StateKey& s_next) {
  return q.update(s, a, reward, s_next);
}

inline ActionKey epsilon_greedy_act(const QTable& q, const StateKey& s, std::mt19937_64& rng) {
  return q.epsilon_greedy(s, rng);
}

struct QAgentConfig {
  /// State features per table and their bin counts.
  std::vector<StateId> features = {StateId::hour, StateId::cooling_storage_soc, StateId::dhw_storage_soc};
  std::vector<int> bins = {24, 5, 5};
  /// Discrete levels available to every action dimension.
  std::vector<double> levels = {-0.33, 0.0, 0.33};
  QLearningParams params{};
};

/// Independent tabular learners, one per observation row: one per building in
/// decentralized mode, a single joint learner in central mode.
class QLearningAgent {
 public:
  QLearningAgent(const Environment& env, QAgentConfig config, std::uint64_t seed)
      : config_(std::move(config)), rng_(seed) {
    if (config_.features.size() != config_.bins.size()) {
      throw std::invalid_argument("QAgentConfig: features and bins differ in length");
    }
    const auto spaces = env.state_action_spaces();
    for (std::size_t row = 0; row < spaces.states.size(); ++row) {
      Learner l;
      std::vector<int> bins;
      for (std::size_t i = 0; i < spaces.state_names[row].size(); ++i) {
        std::string name = spaces.state_names[row][i];
        if (auto slash = name.rfind('/'); slash != std::string::npos) name = name.substr(slash + 1);
        const auto sid = parse_state(name);
        for (std::size_t f = 0; f < config_.features.size(); ++f) {
          if (sid && *sid == config_.features[f]) {
            l.indices.push_back(i);
            l.bounds.push_back(spaces.states[row][i]);
            bins.push_back(config_.bins[f]);
          }
        }
      }
      l.bins = bins;
      std::vector<std::vector<double>> levels(spaces.actions[row].size(), config_.levels);
      learners_.emplace_back(std::move(l));
      tables_.emplace_back(std::move(bins), std::move(levels), config_.params);
    }
  }

  void set_epsilon(double eps) {
    for (auto& t : tables_) t.set_epsilon(eps);
  }

  /// Chooses actions for the given observation and remembers them for learn().
  Actions act(const States& states) {
    check_rows(states);
    Actions out;
    last_keys_.clear();
    last_actions_.clear();
    for (std::size_t row = 0; row < states.size(); ++row) {
      auto key = features(row, states[row]);
      auto a = tables_[row].epsilon_greedy(key, rng_);
      out.push_back(tables_[row].action_values(a));
      last_keys_.push_back(std::move(key));
      last_actions_.push_back(std::move(a));
    }
    return out;
  }

  /// Applies one update per table for the transition produced by the last act().
  void learn(const StepResult& step) {
    if (last_keys_.empty()) throw std::logic_error("learn() without a preceding act()");
    check_rows(step.states);
    if (step.rewards.size() != tables_.size()) throw std::invalid_argument("reward count does not match learners");
    for (std::size_t row = 0; row < tables_.size(); ++row) {
      const auto next = features(row, step.states[row]);
      tables_[row].update(last_keys_[row], last_actions_[row], step.rewards[row], next, step.done);
    }
  }

  const std::vector<QTable>& tables() const { return tables_; }

 private:
  struct Learner {
    std::vector<std::size_t> indices;
    std::vector<Bounds> bounds;
    std::vector<int> bins;
  };

  void check_rows(const States& states) const {
    if (states.size() != tables_.size()) throw std::invalid_argument("observation rows do not match learners");
  }

  StateKey features(std::size_t row, const std::vector<double>& state) const {
    const auto& l = learners_[row];
    std::vector<double> picked;
    picked.reserve(l.indices.size());
    for (auto i : l.indices) picked.push_back(state.at(i));
    return discretize(picked, l.bounds, l.bins);
  }

  QAgentConfig config_;
  std::mt19937_64 rng_;
  std::vector<Learner> learners_;
  std::vector<QTable> tables_;
  std::vector<StateKey> last_keys_;
  std::vector<ActionKey> last_actions_;
};

// ---------------------------------------------------------------------------
// Episode helpers

struct EpisodeRecord {
  double total_return = 0.0;
  TrackerSeries trackers;
  /// Executed (clamped) actions per step, per building.
  std::vector<std::vector<std::vector<double>>> executed_actions;
};

/// Runs one full episode from reset. `policy(env, states)` returns actions;
/// `on_step(result)` sees every step result.
template <class Policy, class OnStep>
EpisodeRecord run_episode(Environment& env, Policy&& policy, OnStep&& on_step) {
  EpisodeRecord rec;
  States states = env.reset();
  while (!env.done()) {
    auto result = env.step(policy(env, states));
    for (double r : result.rewards) rec.total_return += r;
    std::vector<std::vector<double>> executed;
    executed.reserve(result.info.size());
    for (const auto& bi : result.info) executed.push_back(bi.executed_actions);
    rec.executed_actions.push_back(std::move(executed));
    on_step(result);
    states = std::move(result.states);
  }
  rec.trackers = env.trackers();
  return rec;
}

template <class Policy>
EpisodeRecord run_episode(Environment& env, Policy&& policy) {
  return run_episode(env, std::forward<Policy>(policy), [](const StepResult&) {});
}

inline EpisodeRecord run_rbc_episode(Environment& env, const RbcPolicy& policy = RbcPolicy::standard()) {
  return run_episode(env, [&](const Environment& e, const States&) { return rbc_actions(policy, e); });
}

/// One Q-learning episode at exploration rate `epsilon`; learns only if `learn`.
inline EpisodeRecord run_q_episode(Environment& env, QLearningAgent& agent, double epsilon, bool learn) {
  agent.set_epsilon(epsilon);
  return run_episode(
      env, [&](const Environment&, const States& s) { return agent.act(s); },
      [&](const StepResult& r) {
        if (learn) agent.learn(r);
      });
}

}  // namespace mgsim

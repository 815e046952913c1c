#pragma once

#include <cmath>
#include <cstdint>
#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <regex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mgsim/environment.hpp"

// Line-delimited JSON protocol for driving an Environment from another
// process. See docs/protocol.md for the message catalogue.
namespace mgsim::protocol {

inline constexpr int kVersion = 1;

using json = nlohmann::ordered_json;

class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Encoding helpers shared by the server and tests

inline json encode_states(const States& states, ControlMode mode) {
  if (mode == ControlMode::central) return json(states.empty() ? std::vector<double>{} : states.front());
  return json(states);
}

inline json encode_rewards(const std::vector<double>& rewards, ControlMode mode) {
  if (mode == ControlMode::central) return json(rewards.empty() ? 0.0 : rewards.front());
  return json(rewards);
}

inline States decode_states(const json& j, ControlMode mode) {
  if (mode == ControlMode::central) return {j.get<std::vector<double>>()};
  return j.get<States>();
}

inline std::vector<double> decode_rewards(const json& j, ControlMode mode) {
  if (mode == ControlMode::central) return {j.get<double>()};
  return j.get<std::vector<double>>();
}

inline json encode_bounds(const std::vector<Bounds>& bounds) {
  json arr = json::array();
  for (const auto& b : bounds) arr.push_back({b.low, b.high});
  return arr;
}

inline json encode_result(const StepResult& r, ControlMode mode) {
  json executed = json::array();
  for (const auto& bi : r.info) executed.push_back(bi.executed_actions);
  json building_net = json::array();
  for (const auto& bi : r.info) building_net.push_back(bi.e_net);
  return {{"states", encode_states(r.states, mode)},
          {"rewards", encode_rewards(r.rewards, mode)},
          {"done", r.done},
          {"info", {{"district_net", r.district_net}, {"building_net", building_net}, {"executed_actions", executed}}}};
}

/// Actions from a step payload. Central mode takes a flat list (a single
/// nested list is accepted too); decentralized mode takes one list per building.
inline Actions decode_actions(const json& j, ControlMode mode) {
  if (!j.is_array()) throw ProtocolError("actions must be a list");
  if (mode == ControlMode::central) {
    if (j.size() == 1 && j[0].is_array()) return {j[0].get<std::vector<double>>()};
    return {j.get<std::vector<double>>()};
  }
  return j.get<Actions>();
}

// ---------------------------------------------------------------------------
// Session log

struct LoggedStep {
  Actions actions;
  double district_net = 0.0;
};

/// Actions and resulting district net per step, grouped by episode.
struct SessionLog {
  std::vector<std::vector<LoggedStep>> episodes;

  bool empty() const { return episodes.empty(); }

  /// JSON lines: {"event":"reset"} opens an episode, {"event":"step",...}
  /// records one step.
  void write(std::ostream& out) const {
    for (const auto& ep : episodes) {
      out << json{{"event", "reset"}}.dump() << '\n';
      for (const auto& s : ep) {
        out << json{{"event", "step"}, {"actions", s.actions}, {"district_net", s.district_net}}.dump() << '\n';
      }
    }
  }

  static SessionLog read(std::istream& in) {
    SessionLog log;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty() || line == "\r") continue;
      json j;
      try {
        j = json::parse(line);
      } catch (const json::exception& e) {
        throw ProtocolError("session log line " + std::to_string(lineno) + ": " + e.what());
      }
      const auto event = j.value("event", std::string{});
      if (event == "reset") {
        log.episodes.emplace_back();
      } else if (event == "step") {
        if (log.episodes.empty()) throw ProtocolError("session log: step before reset");
        log.episodes.back().push_back({j.at("actions").get<Actions>(), j.at("district_net").get<double>()});
      } else {
        throw ProtocolError("session log line " + std::to_string(lineno) + ": unknown event");
      }
    }
    return log;
  }
};

/// Replays a session log in-process. Returns false as soon as a district net
/// differs from the logged value by more than `tolerance` (relative to
/// max(1, |logged|)). Throws ProtocolError if the log does not fit the dataset.
inline bool replay_check(std::shared_ptr<const Dataset> dataset, const EnvironmentOptions& options, const SessionLog& log,
                         double tolerance = 1e-9) {
  Environment env(std::move(dataset), options);
  for (const auto& episode : log.episodes) {
    env.reset();
    for (const auto& step : episode) {
      if (env.done()) throw ProtocolError("log/config mismatch: more steps than the simulation period");
      StepResult r;
      try {
        r = env.step(step.actions);
      } catch (const std::invalid_argument& e) {
        throw ProtocolError(std::string("log/config mismatch: ") + e.what());
      }
      if (std::abs(r.district_net - step.district_net) > tolerance * std::max(1.0, std::abs(step.district_net))) {
        return false;
      }
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Session: one connection's private environment

class Session {
 public:
  Session(std::shared_ptr<const Dataset> dataset, EnvironmentOptions options)
      : env_(std::move(dataset), std::move(options)) {}

  /// Handles one request line and returns exactly one response line (without
  /// the trailing newline). Never throws for bad input.
  std::string handle(std::string_view line) {
    std::optional<std::int64_t> id;
    try {
      json req;
      try {
        req = json::parse(line);
      } catch (const json::exception&) {
        return error(salvage_id(line), "malformed message: not valid JSON");
      }
      if (!req.is_object()) return error(std::nullopt, "malformed message: expected an object");
      if (req.contains("id")) {
        if (!req.at("id").is_number_integer()) return error(std::nullopt, "malformed message: id must be an integer");
        id = req.at("id").get<std::int64_t>();
      } else {
        return error(std::nullopt, "malformed message: missing id");
      }
      if (last_id_ && *id <= *last_id_) return error(id, "id must increase monotonically");
      last_id_ = id;
      if (!req.contains("type") || !req.at("type").is_string()) return error(id, "malformed message: missing type");
      if (closed_) return error(id, "session closed");
      const auto type = req.at("type").get<std::string>();
      const json payload = req.value("payload", json::object());

      if (type == "hello") return on_hello(*id, payload);
      if (!greeted_) return error(id, "hello required before " + type);
      if (type == "spaces") return on_spaces(*id);
      if (type == "reset") return on_reset(*id);
      if (type == "step") return on_step(*id, payload);
      if (type == "done") return on_done(*id);
      return error(id, "unknown message type: " + type);
    } catch (const std::exception& e) {
      return error(id, e.what());
    }
  }

  bool closed() const { return closed_; }
  const SessionLog& log() const { return log_; }
  const Environment& environment() const { return env_; }

 private:
  static std::optional<std::int64_t> salvage_id(std::string_view line) {
    static const std::regex re(R"re("id"\s*:\s*(-?\d+))re");
    std::match_results<std::string_view::const_iterator> m;
    if (std::regex_search(line.begin(), line.end(), m, re)) {
      try {
        return std::stoll(m[1].str());
      } catch (const std::exception&) {
      }
    }
    return std::nullopt;
  }

  static std::string respond(const char* type, std::optional<std::int64_t> id, json payload) {
    json msg;
    msg["type"] = type;
    msg["id"] = id ? json(*id) : json(nullptr);
    msg["payload"] = std::move(payload);
    return msg.dump();
  }

  static std::string error(std::optional<std::int64_t> id, const std::string& message) {
    return respond("error", id, {{"message", message}});
  }

  std::string on_hello(std::int64_t id, const json& payload) {
    if (payload.is_object() && payload.contains("protocol") && payload["protocol"] != kVersion) {
      return error(id, "unsupported protocol version " + payload["protocol"].dump() + "; server speaks " +
                           std::to_string(kVersion));
    }
    greeted_ = true;
    json buildings = json::array();
    json actions = json::array();
    for (const auto& b : env_.buildings()) {
      buildings.push_back(b.id());
      json names = json::array();
      for (auto a : b.config().actions) names.push_back(std::string(to_string(a)));
      actions.push_back(std::move(names));
    }
    return respond("hello", id,
                   {{"protocol", kVersion},
                    {"mode", std::string(to_string(env_.mode()))},
                    {"buildings", buildings},
                    {"actions", actions},
                    {"period", {env_.period().start, env_.period().end}}});
  }

  std::string on_spaces(std::int64_t id) {
    const auto sp = env_.state_action_spaces();
    json states = json::array(), actions = json::array(), names = json::array();
    for (std::size_t i = 0; i < sp.states.size(); ++i) {
      states.push_back(encode_bounds(sp.states[i]));
      actions.push_back(encode_bounds(sp.actions[i]));
      names.push_back(sp.state_names[i]);
    }
    if (env_.mode() == ControlMode::central) {
      return respond("spaces", id, {{"states", states[0]}, {"actions", actions[0]}, {"state_names", names[0]}});
    }
    return respond("spaces", id, {{"states", states}, {"actions", actions}, {"state_names", names}});
  }

  std::string on_reset(std::int64_t id) {
    const auto states = env_.reset();
    log_.episodes.emplace_back();
    in_episode_ = true;
    return respond("result", id,
                   {{"states", encode_states(states, env_.mode())},
                    {"rewards", env_.mode() == ControlMode::central ? json(0.0) : json(std::vector<double>(env_.buildings().size(), 0.0))},
                    {"done", false}});
  }

  std::string on_step(std::int64_t id, const json& payload) {
    if (!in_episode_) return error(id, "reset required before step");
    if (env_.done()) return error(id, "episode finished; send reset");
    if (!payload.contains("actions")) return error(id, "step payload needs actions");
    Actions actions;
    try {
      actions = decode_actions(payload.at("actions"), env_.mode());
    } catch (const json::exception&) {
      return error(id, "actions must be numeric lists");
    }
    const auto result = env_.step(actions);
    log_.episodes.back().push_back({actions, result.district_net});
    return respond("result", id, encode_result(result, env_.mode()));
  }

  std::string on_done(std::int64_t id) {
    closed_ = true;
    std::size_t steps = 0;
    for (const auto& ep : log_.episodes) steps += ep.size();
    return respond("done", id, {{"episodes", log_.episodes.size()}, {"steps", steps}});
  }

  Environment env_;
  SessionLog log_;
  std::optional<std::int64_t> last_id_;
  bool greeted_ = false;
  bool in_episode_ = false;
  bool closed_ = false;
};

}  // namespace mgsim::protocol

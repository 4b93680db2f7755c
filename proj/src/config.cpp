#include "acer/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

namespace acer {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

/// key -> value pairs from `key = value` lines; '#' starts a comment.
std::map<std::string, std::string> parse_kv(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("config line " + std::to_string(line_no) +
                               ": expected key = value");
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty()) {
      throw std::runtime_error("config line " + std::to_string(line_no) + ": empty key");
    }
    kv[key] = value;
  }
  return kv;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw std::runtime_error("config key '" + key + "': bad number '" + v + "'");
  }
}

long to_long(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long n = std::stol(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return n;
  } catch (const std::exception&) {
    throw std::runtime_error("config key '" + key + "': bad integer '" + v + "'");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::runtime_error("config key '" + key + "': bad boolean '" + v + "'");
}

std::vector<int> to_int_list(const std::string& key, const std::string& v) {
  std::vector<int> out;
  std::istringstream in(v);
  std::string item;
  while (std::getline(in, item, ',')) {
    out.push_back(static_cast<int>(to_long(key, trim(item))));
  }
  if (out.empty()) throw std::runtime_error("config key '" + key + "': empty list");
  return out;
}

std::string read_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open config file: " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

const char* replay_mode_name(ReplayMode mode) {
  switch (mode) {
    case ReplayMode::uniform: return "uniform";
    case ReplayMode::per_clipped: return "per";
    case ReplayMode::acer: return "acer";
  }
  return "unknown";
}

ReplayMode replay_mode_from(const std::string& name) {
  if (name == "uniform") return ReplayMode::uniform;
  if (name == "per") return ReplayMode::per_clipped;
  if (name == "acer") return ReplayMode::acer;
  throw std::runtime_error("unknown replay mode: " + name);
}

const char* env_kind_name(EnvKind kind) {
  return kind == EnvKind::toy ? "toy" : "uav";
}

void RunConfig::validate() const {
  if (episodes < 1) throw std::runtime_error("config: episodes must be >= 1");
  if (max_steps < 1) throw std::runtime_error("config: max_steps must be >= 1");
  if (warmup_episodes < 0 || warmup_episodes >= episodes) {
    throw std::runtime_error("config: need 0 <= warmup_episodes < episodes");
  }
  if (replay_period < 1) throw std::runtime_error("config: replay_period must be >= 1");
  if (batch < 1) throw std::runtime_error("config: batch must be >= 1");
  if (!(temp_pool < batch)) throw std::runtime_error("config: need temp_pool < batch");
  if (!(batch <= buffer)) throw std::runtime_error("config: need batch <= buffer");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::runtime_error("config: alpha out of [0,1]");
  if (!(beta_start >= 0.0 && beta_start <= 1.0 && beta_end >= 0.0 && beta_end <= 1.0)) {
    throw std::runtime_error("config: beta out of [0,1]");
  }
  curriculum.validate();
  if (hidden.empty()) throw std::runtime_error("config: hidden layer list is empty");
}

RunConfig parse_run_config_text(const std::string& text) {
  RunConfig cfg;
  auto kv = parse_kv(text);

  const auto take = [&kv](const char* key) -> std::optional<std::string> {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    std::string v = it->second;
    kv.erase(it);
    return v;
  };

  if (auto v = take("mode")) cfg.mode = replay_mode_from(*v);
  if (auto v = take("env")) {
    if (*v == "toy") cfg.env = EnvKind::toy;
    else if (*v == "uav") cfg.env = EnvKind::uav;
    else throw std::runtime_error("config key 'env': expected toy or uav");
  }
  if (auto v = take("episodes")) cfg.episodes = static_cast<int>(to_long("episodes", *v));
  if (auto v = take("max_steps")) cfg.max_steps = static_cast<int>(to_long("max_steps", *v));
  if (auto v = take("warmup_episodes")) {
    cfg.warmup_episodes = static_cast<int>(to_long("warmup_episodes", *v));
  }
  if (auto v = take("replay_period")) {
    cfg.replay_period = static_cast<int>(to_long("replay_period", *v));
  }
  if (auto v = take("batch")) cfg.batch = static_cast<std::size_t>(to_long("batch", *v));
  if (auto v = take("temp_pool")) cfg.temp_pool = static_cast<std::size_t>(to_long("temp_pool", *v));
  if (auto v = take("buffer")) cfg.buffer = static_cast<std::size_t>(to_long("buffer", *v));
  if (auto v = take("alpha")) cfg.alpha = to_double("alpha", *v);
  if (auto v = take("beta_start")) cfg.beta_start = to_double("beta_start", *v);
  if (auto v = take("beta_end")) cfg.beta_end = to_double("beta_end", *v);
  if (auto v = take("refresh")) cfg.refresh = static_cast<std::size_t>(to_long("refresh", *v));
  if (auto v = take("synchronous")) cfg.synchronous = to_bool("synchronous", *v);
  if (auto v = take("eviction")) {
    if (*v == "stochastic") cfg.eviction = EvictionPolicy::stochastic;
    else if (*v == "min") cfg.eviction = EvictionPolicy::deterministic_min;
    else throw std::runtime_error("config key 'eviction': expected stochastic or min");
  }
  if (auto v = take("c_init")) cfg.curriculum.c_init = to_double("c_init", *v);
  if (auto v = take("c_incr")) cfg.curriculum.c_incr = to_double("c_incr", *v);
  if (auto v = take("c_period")) {
    cfg.curriculum.update_period = static_cast<int>(to_long("c_period", *v));
  }
  if (auto v = take("k1")) cfg.curriculum.k1 = to_double("k1", *v);
  if (auto v = take("k2")) cfg.curriculum.k2 = to_double("k2", *v);
  if (auto v = take("gamma")) cfg.td3.gamma = to_double("gamma", *v);
  if (auto v = take("tau_actor")) cfg.td3.tau_actor = to_double("tau_actor", *v);
  if (auto v = take("tau_critic")) cfg.td3.tau_critic = to_double("tau_critic", *v);
  if (auto v = take("actor_lr")) cfg.td3.actor_lr = to_double("actor_lr", *v);
  if (auto v = take("critic_lr")) cfg.td3.critic_lr = to_double("critic_lr", *v);
  if (auto v = take("actor_delay")) {
    cfg.td3.actor_delay = static_cast<int>(to_long("actor_delay", *v));
  }
  if (auto v = take("exploration_sigma")) {
    cfg.td3.exploration_sigma = to_double("exploration_sigma", *v);
  }
  if (auto v = take("smoothing_sigma")) cfg.td3.smoothing_sigma = to_double("smoothing_sigma", *v);
  if (auto v = take("smoothing_clip")) cfg.td3.smoothing_clip = to_double("smoothing_clip", *v);
  if (auto v = take("td_error_min_critics")) {
    cfg.td3.td_error_min_critics = to_bool("td_error_min_critics", *v);
  }
  if (auto v = take("hidden")) cfg.hidden = to_int_list("hidden", *v);
  if (auto v = take("seed")) cfg.seed = static_cast<std::uint64_t>(to_long("seed", *v));
  if (auto v = take("out")) cfg.out_dir = *v;
  if (auto v = take("scenario")) cfg.scenario = *v;

  if (!kv.empty()) {
    throw std::runtime_error("config: unknown key '" + kv.begin()->first + "'");
  }
  cfg.validate();
  return cfg;
}

RunConfig parse_run_config(const std::filesystem::path& file) {
  return parse_run_config_text(read_file(file));
}

Scenario parse_scenario_text(const std::string& text) {
  Scenario sc;
  auto kv = parse_kv(text);

  const auto take = [&kv](const char* key) -> std::optional<std::string> {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    std::string v = it->second;
    kv.erase(it);
    return v;
  };

  if (auto v = take("env")) {
    if (*v == "toy") sc.env = EnvKind::toy;
    else if (*v == "uav") sc.env = EnvKind::uav;
    else throw std::runtime_error("scenario key 'env': expected toy or uav");
  }
  if (auto v = take("extent_x")) sc.arena.extents[0] = to_double("extent_x", *v);
  if (auto v = take("extent_y")) sc.arena.extents[1] = to_double("extent_y", *v);
  if (auto v = take("extent_z")) sc.arena.extents[2] = to_double("extent_z", *v);
  if (auto v = take("target_radius")) sc.arena.target_radius = to_double("target_radius", *v);
  if (auto v = take("n_obstacles")) {
    sc.arena.n_obstacles = static_cast<int>(to_long("n_obstacles", *v));
  }
  if (auto v = take("obstacle_speed")) sc.arena.obstacle_speed = to_double("obstacle_speed", *v);
  if (auto v = take("obstacle_radius_min")) {
    sc.arena.obstacle_radius_min = to_double("obstacle_radius_min", *v);
  }
  if (auto v = take("obstacle_radius_max")) {
    sc.arena.obstacle_radius_max = to_double("obstacle_radius_max", *v);
  }
  if (auto v = take("min_start_distance")) {
    sc.arena.min_start_distance = to_double("min_start_distance", *v);
  }
  if (auto v = take("dt")) sc.arena.dt = to_double("dt", *v);
  if (auto v = take("radar_rays")) sc.arena.radar_rays = static_cast<int>(to_long("radar_rays", *v));
  if (auto v = take("radar_range")) sc.arena.radar_range = to_double("radar_range", *v);
  if (auto v = take("gravity")) sc.arena.gravity = to_double("gravity", *v);
  if (auto v = take("v_max")) sc.arena.v_max = to_double("v_max", *v);
  if (auto v = take("v_min")) sc.arena.v_min = to_double("v_min", *v);
  if (auto v = take("n_max")) sc.arena.n_max = to_double("n_max", *v);
  if (auto v = take("cruise_speed")) sc.arena.cruise_speed = to_double("cruise_speed", *v);
  if (auto v = take("max_steps")) sc.arena.max_steps = static_cast<int>(to_long("max_steps", *v));
  if (auto v = take("r_success")) sc.reward.r_success = to_double("r_success", *v);
  if (auto v = take("r_failure")) sc.reward.r_failure = to_double("r_failure", *v);
  if (auto v = take("lambda_position")) sc.reward.lambda_position = to_double("lambda_position", *v);
  if (auto v = take("lambda_angle")) sc.reward.lambda_angle = to_double("lambda_angle", *v);
  if (auto v = take("lambda_height")) sc.reward.lambda_height = to_double("lambda_height", *v);
  if (auto v = take("lambda_danger")) sc.reward.lambda_danger = to_double("lambda_danger", *v);
  if (auto v = take("lambda_velocity")) {
    sc.reward.lambda_velocity = to_double("lambda_velocity", *v);
  }

  if (!kv.empty()) {
    throw std::runtime_error("scenario: unknown key '" + kv.begin()->first + "'");
  }
  if (sc.env == EnvKind::uav) {
    sc.arena.validate();
    sc.reward.validate();
  }
  return sc;
}

Scenario parse_scenario(const std::filesystem::path& file) {
  return parse_scenario_text(read_file(file));
}

}  // namespace acer

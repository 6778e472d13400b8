#include "gait/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "gait/errors.hpp"

namespace gait {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double parse_double(const std::string& value, const std::string& key) {
    const std::string v = trim(value);
    double out = 0.0;
    const char* end = v.data() + v.size();
    const auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || ptr != end) {
        throw ConfigError("config: key '" + key + "' expects a number, got '" + value + "'");
    }
    return out;
}

long long parse_ll(const std::string& value, const std::string& key) {
    const std::string v = trim(value);
    long long out = 0;
    const char* end = v.data() + v.size();
    const auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || ptr != end) {
        throw ConfigError("config: key '" + key + "' expects an integer, got '" + value + "'");
    }
    return out;
}

int parse_int(const std::string& value, const std::string& key) {
    return static_cast<int>(parse_ll(value, key));
}

std::uint64_t parse_u64(const std::string& value, const std::string& key) {
    const std::string v = trim(value);
    std::uint64_t out = 0;
    const char* end = v.data() + v.size();
    const auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || ptr != end) {
        throw ConfigError("config: key '" + key + "' expects a non-negative integer, got '" +
                          value + "'");
    }
    return out;
}

template <typename T, typename Parse>
std::vector<T> parse_list(const std::string& value, const std::string& key, Parse parse) {
    std::vector<T> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) throw ConfigError("config: key '" + key + "' has an empty list entry");
        out.push_back(parse(item, key));
    }
    if (out.empty()) throw ConfigError("config: key '" + key + "' expects a non-empty list");
    return out;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    std::string section;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;

    auto fail_unknown = [&](const std::string& key) {
        const std::string where = section.empty() ? "top level" : "section [" + section + "]";
        throw ConfigError("config: unknown key '" + key + "' at " + where + " (line " +
                          std::to_string(line_no) + ")");
    };

    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = raw;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') {
                throw ConfigError("config: malformed section header at line " +
                                  std::to_string(line_no));
            }
            section = trim(line.substr(1, line.size() - 2));
            if (section != "env" && section != "budget" && section != "ddpg" &&
                section != "ppo" && section != "trpo" && section != "dagger") {
                throw ConfigError("config: unknown section [" + section + "] at line " +
                                  std::to_string(line_no));
            }
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config: expected 'key = value' at line " + std::to_string(line_no));
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("config: empty key at line " + std::to_string(line_no));

        if (section.empty()) {
            if (key == "seeds") cfg.seeds = parse_list<std::uint64_t>(value, key, parse_u64);
            else if (key == "out_dir") cfg.out_dir = value;
            else fail_unknown(key);
        } else if (section == "env") {
            EnvConfig& e = cfg.env;
            if (key == "target_velocity") e.target_velocity = parse_double(value, key);
            else if (key == "dt") e.dt = parse_double(value, key);
            else if (key == "mass") e.mass = parse_double(value, key);
            else if (key == "gravity") e.gravity = parse_double(value, key);
            else if (key == "rest_height") e.rest_height = parse_double(value, key);
            else if (key == "spring_k") e.spring_k = parse_double(value, key);
            else if (key == "spring_c") e.spring_c = parse_double(value, key);
            else if (key == "drive_scale") e.drive_scale = parse_double(value, key);
            else if (key == "drag_c") e.drag_c = parse_double(value, key);
            else if (key == "fall_fraction") e.fall_fraction = parse_double(value, key);
            else if (key == "max_steps") e.max_steps = parse_int(value, key);
            else if (key == "mix_seed") e.mix_seed = parse_u64(value, key);
            else fail_unknown(key);
        } else if (section == "budget") {
            if (key == "episodes") cfg.budget.episodes = parse_int(value, key);
            else if (key == "steps_per_episode") cfg.budget.steps_per_episode = parse_int(value, key);
            else fail_unknown(key);
        } else if (section == "ddpg") {
            DdpgConfig& d = cfg.algos.ddpg;
            if (key == "gamma") d.gamma = parse_double(value, key);
            else if (key == "tau") d.tau = parse_double(value, key);
            else if (key == "noise_sigma") d.noise_sigma = parse_double(value, key);
            else if (key == "batch_size") d.batch_size = parse_int(value, key);
            else if (key == "actor_lr") d.actor_lr = parse_double(value, key);
            else if (key == "critic_lr") d.critic_lr = parse_double(value, key);
            else if (key == "warmup_steps") d.warmup_steps = parse_int(value, key);
            else if (key == "update_every") d.update_every = parse_int(value, key);
            else if (key == "replay_capacity") d.replay_capacity = parse_int(value, key);
            else if (key == "hidden") d.hidden = parse_list<int>(value, key, parse_int);
            else fail_unknown(key);
        } else if (section == "ppo") {
            PpoConfig& p = cfg.algos.ppo;
            if (key == "gamma") p.gamma = parse_double(value, key);
            else if (key == "gae_lambda") p.gae_lambda = parse_double(value, key);
            else if (key == "clip_ratio") p.clip_ratio = parse_double(value, key);
            else if (key == "epochs_per_batch") p.epochs_per_batch = parse_int(value, key);
            else if (key == "minibatch_size") p.minibatch_size = parse_int(value, key);
            else if (key == "episodes_per_batch") p.episodes_per_batch = parse_int(value, key);
            else if (key == "policy_lr") p.policy_lr = parse_double(value, key);
            else if (key == "value_lr") p.value_lr = parse_double(value, key);
            else if (key == "init_log_std") p.init_log_std = parse_double(value, key);
            else if (key == "hidden") p.hidden = parse_list<int>(value, key, parse_int);
            else fail_unknown(key);
        } else if (section == "trpo") {
            TrpoConfig& t = cfg.algos.trpo;
            if (key == "gamma") t.gamma = parse_double(value, key);
            else if (key == "gae_lambda") t.gae_lambda = parse_double(value, key);
            else if (key == "kl_delta") t.kl_delta = parse_double(value, key);
            else if (key == "cg_iters") t.cg_iters = parse_int(value, key);
            else if (key == "cg_tol") t.cg_tol = parse_double(value, key);
            else if (key == "backtrack_coeff") t.backtrack_coeff = parse_double(value, key);
            else if (key == "backtrack_steps") t.backtrack_steps = parse_int(value, key);
            else if (key == "damping") t.damping = parse_double(value, key);
            else if (key == "episodes_per_batch") t.episodes_per_batch = parse_int(value, key);
            else if (key == "value_lr") t.value_lr = parse_double(value, key);
            else if (key == "value_epochs") t.value_epochs = parse_int(value, key);
            else if (key == "value_minibatch") t.value_minibatch = parse_int(value, key);
            else if (key == "init_log_std") t.init_log_std = parse_double(value, key);
            else if (key == "hidden") t.hidden = parse_list<int>(value, key, parse_int);
            else fail_unknown(key);
        } else if (section == "dagger") {
            DaggerConfig& g = cfg.dagger;
            if (key == "variant") g.variant = variant_from_name(trim(value));
            else if (key == "iterations") g.iterations = parse_int(value, key);
            else if (key == "trajectories_per_iteration")
                g.trajectories_per_iteration = parse_int(value, key);
            else if (key == "regression_epochs") g.regression_epochs = parse_int(value, key);
            else if (key == "regression_lr") g.regression_lr = parse_double(value, key);
            else if (key == "regression_minibatch") g.regression_minibatch = parse_int(value, key);
            else if (key == "epsilon") g.epsilon = parse_double(value, key);
            else if (key == "rollout_horizon") g.rollout_horizon = parse_int(value, key);
            else if (key == "convergence_fraction")
                g.convergence_fraction = parse_double(value, key);
            else if (key == "eval_episodes") g.eval_episodes = parse_int(value, key);
            else fail_unknown(key);
        }
    }
    if (cfg.seeds.empty()) throw ConfigError("config: at least one seed is required");
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("config: cannot open '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

}  // namespace gait

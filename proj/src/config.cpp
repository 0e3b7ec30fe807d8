#include "crowdnav/config.hpp"

#include <fstream>
#include <functional>
#include <map>

namespace crowdnav::config {

namespace {

double parse_double(const std::string& value, const std::string& context) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError(context + ": cannot parse '" + value + "' as a number");
    }
}

long parse_int(const std::string& value, const std::string& context) {
    try {
        std::size_t pos = 0;
        const long v = std::stol(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError(context + ": cannot parse '" + value + "' as an integer");
    }
}

bool parse_bool(const std::string& value, const std::string& context) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ConfigError(context + ": cannot parse '" + value + "' as a boolean");
}

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

}  // namespace

void RunConfig::finalize() {
    dvl.gamma = a2c.gamma;
    dvl.learning_rate = a2c.learning_rate;
    dvl.batch_size = a2c.batch_size;
    dvl.memory_capacity = a2c.memory_capacity;
    dvl.episodes = dvl_episodes;
}

void apply_key(RunConfig& cfg, const std::string& key, const std::string& value,
               const std::string& context) {
    // Table-2 hyperparameters
    if (key == "demos")
        cfg.a2c.imitation.demo_episodes = static_cast<int>(parse_int(value, context));
    else if (key == "imitation_lr")
        cfg.a2c.imitation.learning_rate = parse_double(value, context);
    else if (key == "imitation_epochs")
        cfg.a2c.imitation.epochs = static_cast<int>(parse_int(value, context));
    else if (key == "lr")
        cfg.a2c.learning_rate = parse_double(value, context);
    else if (key == "batch_size")
        cfg.a2c.batch_size = static_cast<std::size_t>(parse_int(value, context));
    else if (key == "episodes")
        cfg.a2c.episodes = static_cast<int>(parse_int(value, context));
    else if (key == "sync_interval")
        cfg.a2c.sync_interval = static_cast<int>(parse_int(value, context));
    else if (key == "memory_capacity")
        cfg.a2c.memory_capacity = static_cast<std::size_t>(parse_int(value, context));
    else if (key == "minibatches")
        cfg.a2c.minibatch_count = static_cast<int>(parse_int(value, context));
    else if (key == "entropy_coeff")
        cfg.a2c.entropy_coeff = parse_double(value, context);
    else if (key == "critic_coeff")
        cfg.a2c.critic_coeff = parse_double(value, context);
    else if (key == "gamma")
        cfg.a2c.gamma = parse_double(value, context);
    else if (key == "eval_interval")
        cfg.a2c.eval_interval = static_cast<int>(parse_int(value, context));
    // scenario keys
    else if (key == "circle_radius")
        cfg.scenario.circle_radius = parse_double(value, context);
    else if (key == "n_obstacles")
        cfg.scenario.n_obstacles = static_cast<int>(parse_int(value, context));
    else if (key == "radius_min")
        cfg.scenario.radius_min = parse_double(value, context);
    else if (key == "radius_max")
        cfg.scenario.radius_max = parse_double(value, context);
    else if (key == "v_pref")
        cfg.scenario.preferred_speed = parse_double(value, context);
    else if (key == "dt")
        cfg.scenario.dt = parse_double(value, context);
    else if (key == "t_max")
        cfg.scenario.t_max = parse_double(value, context);
    else if (key == "reward_proximity_sign")
        cfg.scenario.reward_proximity_sign = parse_double(value, context);
    else if (key == "robot_invisible")
        cfg.scenario.robot_invisible = parse_bool(value, context);
    // pipeline keys
    else if (key == "dvl_episodes")
        cfg.dvl_episodes = static_cast<int>(parse_int(value, context));
    else if (key == "eval_episodes")
        cfg.eval_episodes = static_cast<int>(parse_int(value, context));
    else if (key == "skip_dvl")
        cfg.skip_dvl = parse_bool(value, context);
    else
        throw ConfigError(context + ": unknown key '" + key + "'");
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    RunConfig cfg;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        const std::string context = path + ":" + std::to_string(line_no);
        if (eq == std::string::npos)
            throw ConfigError(context + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        apply_key(cfg, key, value, context);
    }
    cfg.finalize();
    return cfg;
}

}  // namespace crowdnav::config

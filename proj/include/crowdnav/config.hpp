#pragma once

#include <stdexcept>
#include <string>

#include "crowdnav/a2cmp.hpp"
#include "crowdnav/dvl.hpp"
#include "crowdnav/sim.hpp"

namespace crowdnav::config {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Everything a full run needs; file values can be overridden by CLI flags.
struct RunConfig {
    sim::ScenarioConfig scenario;
    a2cmp::A2cmpConfig a2c;
    dvl::DvlConfig dvl;
    int dvl_episodes = 1000;  // RL episodes of the DVL pretraining stage
    int eval_episodes = 100;
    bool skip_dvl = false;  // pipeline: feed ORCA demos straight to A2CMP

    // keeps the derived fields consistent after key edits
    void finalize();
};

// key on one line, `key = value`, `#` comments; throws ConfigError naming the
// offending line and key
RunConfig load_config(const std::string& path);

void apply_key(RunConfig& cfg, const std::string& key, const std::string& value,
               const std::string& context);

}  // namespace crowdnav::config

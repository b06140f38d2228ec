#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "asim/env.hpp"
#include "asim/layout.hpp"
#include "asim/rl/checkpoint.hpp"
#include "asim/rl/normalizer.hpp"
#include "asim/rl/ppo.hpp"

namespace asim::rl {

struct TrainOptions {
    PpoConfig ppo;
    EnvConfig env;       // pass the training population (60 by default here)
    ExitMask scenario;   // zero mask = all exits open
    int n_envs = 16;
    uint64_t seed = 1;
    std::string out_dir;  // empty: keep logs/checkpoints in memory only
    uint64_t cfg_hash = 0;

    TrainOptions() { env.occupant_count = 60; }
};

struct TrainSummaryRow {
    int64_t step = 0;
    double mean_reward = 0.0;       // completed episodes since the last summary
    double mean_episode_len = 0.0;  // in steps
    double policy_loss = 0.0;
    double value_loss = 0.0;
    double entropy = 0.0;
    double lr = 0.0;
    double beta = 0.0;
    double epsilon = 0.0;
};

std::string summary_header();
std::string format_summary_row(const TrainSummaryRow& r);

struct TrainResult {
    PolicyParams params;
    ObsNormalizer normalizer{1};
    std::vector<TrainSummaryRow> summaries;
    std::vector<double> episode_rewards;  // every completed episode, in order
    std::vector<int> episode_lengths;
    std::vector<std::string> checkpoint_paths;
    std::string log_path;  // empty when out_dir was empty
    int64_t steps_collected = 0;
};

// Collects from n_envs lockstep environments, updates every buffer_size
// steps, writes the training log and rotating checkpoints under out_dir.
// Byte-identical outputs for identical (seed, n_envs, configs).
TrainResult train(const BuildingLayout& layout, const TrainOptions& opt);

}  // namespace asim::rl

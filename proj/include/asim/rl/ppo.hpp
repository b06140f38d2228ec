#pragma once

#include <cstdint>

#include "asim/io.hpp"
#include "asim/rl/mlp.hpp"

namespace asim::rl {

struct PpoConfig {
    int64_t max_steps = 5'000'000;
    int time_horizon = 64;
    int64_t summary_frequency = 50'000;
    int keep_checkpoints = 100;
    int batch_size = 2048;
    int buffer_size = 20480;
    double learning_rate = 3e-4;
    double beta = 0.01;       // entropy bonus coefficient
    double epsilon = 0.2;     // clip range (policy and value)
    double lambda = 0.95;
    int num_epoch = 3;
    double gamma = 0.99;
    double extrinsic_strength = 1.0;
    // network
    int hidden_units = 128;
    int num_layers = 2;
    bool normalize = true;

    void validate() const;  // throws validation_error
};

// One flattened rollout ready for updates. Columns are transitions; obs are
// already normalized, advantages raw until ppo_update normalizes them.
struct RolloutBuffer {
    Matrix obs;      // obs_dim x n
    Matrix actions;  // act_dim x n
    Vector logp;
    Vector advantages;
    Vector returns;
    Vector values;  // V at collection time, for the clipped value loss

    int size() const { return static_cast<int>(logp.size()); }
};

struct LossTerms {
    double policy = 0.0;   // -mean(clipped surrogate)
    double value = 0.0;    // mean(clipped squared error), before the 0.5 factor
    double entropy = 0.0;  // mean policy entropy
    double total = 0.0;    // policy + 0.5*value - beta*entropy
};

// PPO loss over one minibatch; accumulates analytic gradients of `total` into
// *grads when non-null. Columns of obs/actions are samples.
LossTerms ppo_loss(const PolicyParams& p, const Matrix& obs, const Matrix& actions,
                   const Vector& logp_old, const Vector& advantages, const Vector& returns,
                   const Vector& values_old, double clip_eps, double beta,
                   PolicyParams* grads);

struct UpdateStats {
    double policy_loss = 0.0;
    double value_loss = 0.0;
    double entropy = 0.0;
    double lr = 0.0;
    double beta = 0.0;
    double epsilon = 0.0;
};

// num_epoch passes of shuffled batch_size minibatches; lr/beta/epsilon take
// their scheduled values at global_step. Advantages are normalized in place
// (mean 0, population std 1). Throws asim::error on a non-finite loss, with
// the offending term values in the message.
UpdateStats ppo_update(PolicyParams& p, Adam& opt, RolloutBuffer& buf, const PpoConfig& cfg,
                       int64_t global_step, Rng& shuffle_rng);

}  // namespace asim::rl

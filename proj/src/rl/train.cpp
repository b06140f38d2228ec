#include "asim/rl/train.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>

#include "asim/error.hpp"
#include "asim/rl/gae.hpp"

namespace asim::rl {

namespace fs = std::filesystem;

std::string summary_header() {
    return "step,mean_reward,mean_episode_len,policy_loss,value_loss,entropy,lr,beta,epsilon";
}

std::string format_summary_row(const TrainSummaryRow& r) {
    std::string s = std::to_string(r.step);
    for (double v : {r.mean_reward, r.mean_episode_len, r.policy_loss, r.value_loss, r.entropy,
                     r.lr, r.beta, r.epsilon}) {
        s += ',' + format_double(v, 6);
    }
    return s;
}

namespace {

Vector to_vector(const Observation& obs) {
    Vector v(kObsDim);
    for (int i = 0; i < kObsDim; ++i) v(i) = obs[i];
    return v;
}

// Per-environment collection stream, flushed into the rollout buffer.
struct EnvStream {
    std::vector<Vector> obs;
    std::vector<Vector> actions;
    std::vector<double> logp;
    std::vector<double> rewards;
    std::vector<double> values;
    std::vector<uint8_t> dones;

    void clear() {
        obs.clear();
        actions.clear();
        logp.clear();
        rewards.clear();
        values.clear();
        dones.clear();
    }
};

}  // namespace

TrainResult train(const BuildingLayout& layout, const TrainOptions& opt) {
    opt.ppo.validate();
    opt.env.validate();
    if (opt.n_envs < 1) throw validation_error("train: n_envs must be >= 1");
    if (opt.ppo.buffer_size % opt.n_envs != 0) {
        throw validation_error("train: buffer_size must be divisible by n_envs");
    }
    const int steps_per_env = opt.ppo.buffer_size / opt.n_envs;

    ExitMask scenario = opt.scenario;
    if (scenario.bits == 0) scenario = layout.full_mask();

    TrainResult result;
    Rng init_rng(derive_seed(opt.seed, SeedStream::NetworkInit, 0));
    result.params =
        PolicyParams::init(kObsDim, kActDim, opt.ppo.hidden_units, opt.ppo.num_layers, init_rng);
    result.normalizer = ObsNormalizer(kObsDim);
    Adam opt_state(result.params);
    Rng sample_rng(derive_seed(opt.seed, SeedStream::PolicySampling, 0));
    Rng shuffle_rng(derive_seed(opt.seed, SeedStream::PpoShuffle, 0));

    std::ofstream log;
    if (!opt.out_dir.empty()) {
        fs::create_directories(opt.out_dir);
        fs::create_directories(fs::path(opt.out_dir) / "checkpoints");
        result.log_path = (fs::path(opt.out_dir) / "training_log.csv").string();
        log.open(result.log_path, std::ios::binary);
        if (!log) throw error("cannot write training log: " + result.log_path);
        log << summary_header() << '\n';
    }

    std::vector<std::unique_ptr<ShooterEnv>> envs;
    std::vector<Rng> episode_seeds;
    std::vector<Vector> current_obs(opt.n_envs);   // raw observation per env
    std::vector<double> episode_reward(opt.n_envs, 0.0);
    std::vector<int> episode_len(opt.n_envs, 0);
    for (int i = 0; i < opt.n_envs; ++i) {
        envs.push_back(
            std::make_unique<ShooterEnv>(layout, scenario, EnvMode::Training, opt.env));
        episode_seeds.emplace_back(derive_seed(opt.seed, SeedStream::Scenario, i));
        current_obs[i] = to_vector(envs[i]->reset(episode_seeds[i].next_u64()));
    }

    std::vector<EnvStream> streams(opt.n_envs);
    UpdateStats last_update;
    last_update.lr = schedule(opt.ppo.learning_rate, 0, opt.ppo.max_steps);
    last_update.beta = schedule(opt.ppo.beta, 0, opt.ppo.max_steps);
    last_update.epsilon = schedule(opt.ppo.epsilon, 0, opt.ppo.max_steps);
    int episodes_at_summary = 0;
    double reward_acc = 0.0;
    int64_t len_acc = 0;
    int64_t next_summary = opt.ppo.summary_frequency;
    const int64_t checkpoint_every =
        (opt.ppo.max_steps + opt.ppo.keep_checkpoints - 1) / opt.ppo.keep_checkpoints;
    int64_t next_checkpoint = checkpoint_every;

    const int act_dim = kActDim;
    Matrix batch_obs(kObsDim, opt.n_envs);
    int64_t global_step = 0;

    auto save_rotating_checkpoint = [&](int64_t step, bool final) {
        if (opt.out_dir.empty()) return;
        char name[64];
        if (final) {
            std::snprintf(name, sizeof name, "checkpoint_final.bin");
        } else {
            std::snprintf(name, sizeof name, "checkpoint_%012lld.bin",
                          static_cast<long long>(step));
        }
        const std::string path = (fs::path(opt.out_dir) / "checkpoints" / name).string();
        save_checkpoint({result.params, result.normalizer, static_cast<uint64_t>(step),
                         opt.cfg_hash},
                        path);
        result.checkpoint_paths.push_back(path);
        while (static_cast<int>(result.checkpoint_paths.size()) > opt.ppo.keep_checkpoints) {
            fs::remove(result.checkpoint_paths.front());
            result.checkpoint_paths.erase(result.checkpoint_paths.begin());
        }
    };

    while (global_step < opt.ppo.max_steps) {
        // normalize this step's observations (updating the running stats)
        for (int i = 0; i < opt.n_envs; ++i) {
            if (opt.ppo.normalize) result.normalizer.update(current_obs[i]);
            batch_obs.col(i) =
                opt.ppo.normalize ? result.normalizer.apply(current_obs[i]) : current_obs[i];
        }
        const ForwardTrace tr = forward_batch(result.params, batch_obs);
        const Vector sigma = result.params.log_std.array().exp();

        for (int i = 0; i < opt.n_envs; ++i) {
            Vector action(act_dim);
            double logp = 0.0;
            for (int d = 0; d < act_dim; ++d) {
                const double z = sample_rng.normal();
                action(d) = tr.mean(d, i) + sigma(d) * z;
                logp += -0.5 * z * z - result.params.log_std(d) - 0.5 * 1.8378770664093453;
            }
            StepResult sr = envs[i]->step({action(0), action(1)});
            const double reward = sr.reward.total * opt.ppo.extrinsic_strength;

            streams[i].obs.push_back(batch_obs.col(i));
            streams[i].actions.push_back(action);
            streams[i].logp.push_back(logp);
            streams[i].rewards.push_back(reward);
            streams[i].values.push_back(tr.value(i));
            streams[i].dones.push_back(sr.done ? 1 : 0);

            episode_reward[i] += reward;
            episode_len[i] += 1;
            if (sr.done) {
                result.episode_rewards.push_back(episode_reward[i]);
                result.episode_lengths.push_back(episode_len[i]);
                reward_acc += episode_reward[i];
                len_acc += episode_len[i];
                episodes_at_summary += 1;
                episode_reward[i] = 0.0;
                episode_len[i] = 0;
                current_obs[i] = to_vector(envs[i]->reset(episode_seeds[i].next_u64()));
            } else {
                current_obs[i] = to_vector(sr.obs);
            }
        }
        global_step += opt.n_envs;

        if (static_cast<int>(streams[0].obs.size()) == steps_per_env) {
            // bootstrap values for the stream tails
            for (int i = 0; i < opt.n_envs; ++i) {
                batch_obs.col(i) = opt.ppo.normalize ? result.normalizer.apply(current_obs[i])
                                                     : current_obs[i];
            }
            const ForwardTrace tail = forward_batch(result.params, batch_obs);

            RolloutBuffer buf;
            buf.obs = Matrix(kObsDim, opt.ppo.buffer_size);
            buf.actions = Matrix(act_dim, opt.ppo.buffer_size);
            buf.logp = Vector(opt.ppo.buffer_size);
            buf.advantages = Vector(opt.ppo.buffer_size);
            buf.returns = Vector(opt.ppo.buffer_size);
            buf.values = Vector(opt.ppo.buffer_size);
            int at = 0;
            for (int i = 0; i < opt.n_envs; ++i) {
                EnvStream& s = streams[i];
                const GaeResult gae =
                    compute_gae(s.rewards, s.values, s.dones, tail.value(i), opt.ppo.gamma,
                                opt.ppo.lambda, opt.ppo.time_horizon);
                for (int k = 0; k < steps_per_env; ++k, ++at) {
                    buf.obs.col(at) = s.obs[k];
                    buf.actions.col(at) = s.actions[k];
                    buf.logp(at) = s.logp[k];
                    buf.advantages(at) = gae.advantages[k];
                    buf.returns(at) = gae.returns[k];
                    buf.values(at) = s.values[k];
                }
                s.clear();
            }
            last_update = ppo_update(result.params, opt_state, buf, opt.ppo, global_step,
                                     shuffle_rng);

            if (global_step >= next_checkpoint) {
                save_rotating_checkpoint(global_step, false);
                while (next_checkpoint <= global_step) next_checkpoint += checkpoint_every;
            }
        }

        if (global_step >= next_summary) {
            TrainSummaryRow row;
            row.step = global_step;
            row.mean_reward = episodes_at_summary ? reward_acc / episodes_at_summary
                                                  : std::nan("");
            row.mean_episode_len =
                episodes_at_summary ? static_cast<double>(len_acc) / episodes_at_summary
                                    : std::nan("");
            row.policy_loss = last_update.policy_loss;
            row.value_loss = last_update.value_loss;
            row.entropy = last_update.entropy;
            row.lr = last_update.lr;
            row.beta = last_update.beta;
            row.epsilon = last_update.epsilon;
            result.summaries.push_back(row);
            if (log) log << format_summary_row(row) << '\n';
            reward_acc = 0.0;
            len_acc = 0;
            episodes_at_summary = 0;
            while (next_summary <= global_step) next_summary += opt.ppo.summary_frequency;
        }
    }

    save_rotating_checkpoint(global_step, true);
    if (log) {
        log.flush();
        if (!log) throw error("training log write failed: " + result.log_path);
    }
    result.steps_collected = global_step;
    return result;
}

}  // namespace asim::rl

#include "asim/rl/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "asim/error.hpp"
#include "asim/rl/gae.hpp"

namespace asim::rl {

namespace {
constexpr double kLog2Pi = 1.8378770664093453;
}

void PpoConfig::validate() const {
    if (max_steps < 1) throw validation_error("ppo config: max_steps must be >= 1");
    if (buffer_size < 1 || batch_size < 1) {
        throw validation_error("ppo config: batch and buffer sizes must be >= 1");
    }
    if (buffer_size % batch_size != 0) {
        throw validation_error("ppo config: buffer_size must be divisible by batch_size");
    }
    if (!(gamma > 0.0 && gamma <= 1.0)) throw validation_error("ppo config: gamma must be in (0,1]");
    if (!(lambda >= 0.0 && lambda <= 1.0)) {
        throw validation_error("ppo config: lambda must be in [0,1]");
    }
    if (num_epoch < 1) throw validation_error("ppo config: num_epoch must be >= 1");
    if (time_horizon < 1) throw validation_error("ppo config: time_horizon must be >= 1");
    if (!(learning_rate > 0.0)) throw validation_error("ppo config: learning_rate must be > 0");
    if (epsilon <= 0.0) throw validation_error("ppo config: epsilon must be > 0");
    if (hidden_units < 1 || num_layers < 1) {
        throw validation_error("ppo config: network dimensions must be >= 1");
    }
}

LossTerms ppo_loss(const PolicyParams& p, const Matrix& obs, const Matrix& actions,
                   const Vector& logp_old, const Vector& advantages, const Vector& returns,
                   const Vector& values_old, double clip_eps, double beta, PolicyParams* grads) {
    const int n = static_cast<int>(obs.cols());
    const int act_dim = p.act_dim();
    const double inv_n = 1.0 / n;

    const ForwardTrace tr = forward_batch(p, obs);
    const Vector sigma = p.log_std.array().exp();
    const Vector inv_var = sigma.array().square().inverse();

    // log-probs of the taken actions under the current policy
    const Matrix diff = actions - tr.mean;  // act_dim x n
    Vector logp(n);
    for (int j = 0; j < n; ++j) {
        double q = 0.0;
        for (int i = 0; i < act_dim; ++i) q += diff(i, j) * diff(i, j) * inv_var(i);
        logp(j) = -0.5 * q - p.log_std.sum() - 0.5 * act_dim * kLog2Pi;
    }

    LossTerms terms;
    Matrix dmean = Matrix::Zero(act_dim, n);
    Vector dvalue = Vector::Zero(n);
    Vector dlog_std = Vector::Zero(act_dim);

    // clipped surrogate (gradient-ascent objective, negated into a loss)
    double surrogate = 0.0;
    for (int j = 0; j < n; ++j) {
        const double ratio = std::exp(logp(j) - logp_old(j));
        const double a = advantages(j);
        const double clipped = std::clamp(ratio, 1.0 - clip_eps, 1.0 + clip_eps);
        surrogate += std::min(ratio * a, clipped * a);
        const bool active = a >= 0.0 ? ratio <= 1.0 + clip_eps : ratio >= 1.0 - clip_eps;
        if (grads && active) {
            const double c = -inv_n * ratio * a;  // dLoss/dlogp_j
            for (int i = 0; i < act_dim; ++i) {
                dmean(i, j) += c * diff(i, j) * inv_var(i);
                dlog_std(i) += c * (diff(i, j) * diff(i, j) * inv_var(i) - 1.0);
            }
        }
    }
    terms.policy = -surrogate * inv_n;

    // clipped value loss
    double value_loss = 0.0;
    for (int j = 0; j < n; ++j) {
        const double v = tr.value(j);
        const double v_clip =
            values_old(j) + std::clamp(v - values_old(j), -clip_eps, clip_eps);
        const double e1 = v - returns(j);
        const double e2 = v_clip - returns(j);
        if (e1 * e1 >= e2 * e2) {
            value_loss += e1 * e1;
            if (grads) dvalue(j) += 0.5 * inv_n * 2.0 * e1;
        } else {
            value_loss += e2 * e2;
            if (grads && std::abs(v - values_old(j)) <= clip_eps) {
                dvalue(j) += 0.5 * inv_n * 2.0 * e2;
            }
        }
    }
    terms.value = value_loss * inv_n;

    // diagonal-Gaussian entropy is state-independent
    terms.entropy = p.log_std.sum() + 0.5 * act_dim * (1.0 + kLog2Pi);
    if (grads) dlog_std.array() -= beta;

    terms.total = terms.policy + 0.5 * terms.value - beta * terms.entropy;

    if (grads) {
        backward_batch(p, obs, tr, dmean, dvalue, *grads);
        grads->log_std += dlog_std;
    }
    return terms;
}

UpdateStats ppo_update(PolicyParams& p, Adam& opt, RolloutBuffer& buf, const PpoConfig& cfg,
                       int64_t global_step, Rng& shuffle_rng) {
    const int n = buf.size();
    if (n != cfg.buffer_size) {
        throw error("ppo update: buffer holds " + std::to_string(n) + " transitions, expected " +
                    std::to_string(cfg.buffer_size));
    }

    // per-buffer advantage normalization (population std)
    const double mean = buf.advantages.mean();
    const double var = (buf.advantages.array() - mean).square().mean();
    buf.advantages = (buf.advantages.array() - mean) / std::sqrt(var + 1e-8);

    UpdateStats stats;
    stats.lr = schedule(cfg.learning_rate, global_step, cfg.max_steps);
    stats.beta = schedule(cfg.beta, global_step, cfg.max_steps);
    stats.epsilon = schedule(cfg.epsilon, global_step, cfg.max_steps);

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    const int batches_per_epoch = n / cfg.batch_size;
    const int obs_dim = p.obs_dim();
    const int act_dim = p.act_dim();

    Matrix mb_obs(obs_dim, cfg.batch_size);
    Matrix mb_act(act_dim, cfg.batch_size);
    Vector mb_logp(cfg.batch_size), mb_adv(cfg.batch_size), mb_ret(cfg.batch_size),
        mb_val(cfg.batch_size);

    double acc_policy = 0.0, acc_value = 0.0, acc_entropy = 0.0;
    int minibatches = 0;
    for (int epoch = 0; epoch < cfg.num_epoch; ++epoch) {
        for (int i = n - 1; i > 0; --i) {  // Fisher-Yates
            const int j = static_cast<int>(shuffle_rng.below(static_cast<uint64_t>(i) + 1));
            std::swap(order[i], order[j]);
        }
        for (int b = 0; b < batches_per_epoch; ++b) {
            for (int k = 0; k < cfg.batch_size; ++k) {
                const int src = order[b * cfg.batch_size + k];
                mb_obs.col(k) = buf.obs.col(src);
                mb_act.col(k) = buf.actions.col(src);
                mb_logp(k) = buf.logp(src);
                mb_adv(k) = buf.advantages(src);
                mb_ret(k) = buf.returns(src);
                mb_val(k) = buf.values(src);
            }
            PolicyParams grads = PolicyParams::zeros_like(p);
            const LossTerms terms = ppo_loss(p, mb_obs, mb_act, mb_logp, mb_adv, mb_ret, mb_val,
                                             stats.epsilon, stats.beta, &grads);
            if (!std::isfinite(terms.total)) {
                throw error("ppo update aborted: non-finite loss (policy=" +
                            std::to_string(terms.policy) + ", value=" + std::to_string(terms.value) +
                            ", entropy=" + std::to_string(terms.entropy) + ") at step " +
                            std::to_string(global_step));
            }
            opt.step(p, grads, stats.lr);
            if (!p.finite()) {
                throw error("ppo update aborted: non-finite parameters after optimizer step at step " +
                            std::to_string(global_step));
            }
            acc_policy += terms.policy;
            acc_value += terms.value;
            acc_entropy += terms.entropy;
            ++minibatches;
        }
    }
    stats.policy_loss = acc_policy / minibatches;
    stats.value_loss = acc_value / minibatches;
    stats.entropy = acc_entropy / minibatches;
    return stats;
}

}  // namespace asim::rl

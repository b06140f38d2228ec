#include "asim/rl/gae.hpp"

#include "asim/error.hpp"

namespace asim::rl {

double schedule(double initial, int64_t step, int64_t max_steps) {
    const double frac = 1.0 - static_cast<double>(step) / static_cast<double>(max_steps);
    return initial * (frac > 0.0 ? frac : 0.0);
}

GaeResult compute_gae(std::span<const double> rewards, std::span<const double> values,
                      std::span<const uint8_t> dones, double bootstrap_value, double gamma,
                      double lambda, int horizon) {
    const size_t n = rewards.size();
    if (values.size() != n || dones.size() != n) {
        throw error("gae: rewards/values/dones lengths differ");
    }
    if (horizon < 1) throw error("gae: horizon must be >= 1");

    GaeResult out;
    out.advantages.resize(n);
    out.returns.resize(n);
    double tail = 0.0;
    for (size_t i = n; i-- > 0;) {
        const double not_done = dones[i] ? 0.0 : 1.0;
        const double next_value = (i + 1 < n) ? values[i + 1] : bootstrap_value;
        const double delta = rewards[i] + gamma * next_value * not_done - values[i];
        const bool cut = (i + 1 == n) || ((i + 1) % static_cast<size_t>(horizon) == 0);
        tail = delta + gamma * lambda * not_done * (cut ? 0.0 : tail);
        out.advantages[i] = tail;
        out.returns[i] = tail + values[i];
    }
    return out;
}

}  // namespace asim::rl

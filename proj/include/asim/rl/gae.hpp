#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace asim::rl {

// Linear anneal: initial * max(0, 1 - step/max_steps).
double schedule(double initial, int64_t step, int64_t max_steps);

struct GaeResult {
    std::vector<double> advantages;
    std::vector<double> returns;  // advantages + values
};

// Generalized advantage estimation over one time-ordered stream:
//   delta_t = r_t + gamma * V_{t+1} * (1 - done_t) - V_t
//   A_t = delta_t + gamma * lambda * (1 - done_t) * A_{t+1}
// The stream is cut into `horizon`-step segments; the recursion does not run
// across a cut (the segment bootstraps through delta's V_{t+1} term, which is
// `bootstrap_value` past the end of the stream). Throws on length mismatch.
GaeResult compute_gae(std::span<const double> rewards, std::span<const double> values,
                      std::span<const uint8_t> dones, double bootstrap_value, double gamma,
                      double lambda, int horizon);

}  // namespace asim::rl

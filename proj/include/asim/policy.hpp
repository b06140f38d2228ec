#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "asim/env.hpp"
#include "asim/rl/checkpoint.hpp"

namespace asim {

// Evaluation-time action source. Policies may keep per-episode state; use one
// instance per run.
class Policy {
public:
    virtual ~Policy() = default;
    virtual Vec2 act(const ShooterEnv& env) = 0;
};

// Scripted baseline: chases the nearest visible live occupant; with nothing
// in sight, sweeps the building by walking to the nearest unvisited coarse
// cell. Steers to keep clearance from exterior walls (contact ends an
// evaluation episode). Not omniscient — occupants outside line of sight are
// found only by the sweep.
class GreedySearchPolicy : public Policy {
public:
    Vec2 act(const ShooterEnv& env) override;

private:
    static constexpr double kCoarseCell = 4.0;

    void ensure_grid(const ShooterEnv& env);
    std::optional<Vec2> visible_target(const ShooterEnv& env) const;
    Vec2 exploration_waypoint(const ShooterEnv& env);
    Vec2 steer(const ShooterEnv& env, Vec2 desired) const;

    int nx_ = 0, ny_ = 0;
    Vec2 origin_;
    std::vector<uint8_t> visited_;
    std::optional<int> sweep_goal_;
};

// Deterministic trained policy: frozen normalizer, distribution mean, clipped
// to the unit action disc.
class NetworkPolicy : public Policy {
public:
    explicit NetworkPolicy(rl::Checkpoint checkpoint);
    Vec2 act(const ShooterEnv& env) override;
    const rl::Checkpoint& checkpoint() const { return ckpt_; }

private:
    rl::Checkpoint ckpt_;
};

}  // namespace asim

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "asim/geometry.hpp"
#include "asim/io.hpp"
#include "asim/layout.hpp"
#include "asim/occupants.hpp"

namespace asim {

inline constexpr int kObsDim = 39;  // 7 rays x 5 + velocity 2 + position 2
inline constexpr int kActDim = 2;

enum class EnvMode : std::uint8_t { Training, Evaluation };

struct EnvConfig {
    double dt = 0.1;                  // seconds per step
    double harm_radius = 2.7;         // meters (3 yards)
    double ray_range = 20.0;          // meters
    double shooter_speed = 2.0;       // m/s
    double shooter_radius = 0.4;      // collision disc
    double target_radius = 0.3;       // occupant disc for rays
    double occupant_speed = 1.5;      // m/s
    double freeze_time = 3.0;         // seconds before occupants react
    double no_target_timeout = 20.0;  // evaluation: end after this long without a new target
    int occupant_count = 100;         // evaluation population; training uses 60
    int max_episode_steps = 3000;     // training-only cap

    void validate() const;  // throws validation_error on non-positive fields
};

struct ShooterState {
    Vec2 pos;
    double heading = 0.0;  // radians; direction of motion
    Vec2 velocity;         // m/s
    int count = 0;         // targets reached so far
};

using Observation = std::array<double, kObsDim>;

struct RewardBreakdown {
    double r_target = 0.0;
    double r_exterior_wall = 0.0;
    double r_interior_wall = 0.0;
    double r_time = 0.0;
    double total = 0.0;
};

enum class EventKind : std::uint8_t {
    TargetReached,
    ExteriorWallHit,
    InteriorWallHit,
    OccupantEvacuated,
    EpisodeEnd,
};

enum class EndReason : std::uint8_t { None, ExteriorWall, Timeout, AllTerminal, StepCap };

const char* to_string(EventKind k);
const char* to_string(EndReason r);
EndReason end_reason_from_string(const std::string& s);  // throws parse_error

struct EpisodeEvent {
    int t = 0;        // step index at which the event fired
    EventKind kind = EventKind::EpisodeEnd;
    int subject = -1;                     // occupant id or wall index; -1 otherwise
    EndReason reason = EndReason::None;   // set for EpisodeEnd
};

struct StepResult {
    Observation obs{};
    RewardBreakdown reward;
    std::vector<EpisodeEvent> events;  // events fired during this step
    bool done = false;
    EndReason end_reason = EndReason::None;
};

// The incident environment: one shooter vs rule-based occupants in a masked
// layout. Observation is 7 rays x (3-way tag one-hot, miss flag, distance /
// ray_range) + velocity / shooter_speed + position normalized to bounds.
class ShooterEnv {
public:
    // Throws validation_error when the scenario closes every exit (an episode
    // needs the entrance plus at least one exit) or cfg is invalid.
    ShooterEnv(const BuildingLayout& layout, ExitMask scenario, EnvMode mode, EnvConfig cfg);

    // Starts a fresh episode; all randomness (shooter spawn, heading,
    // occupant spawns) derives from episode_seed.
    Observation reset(uint64_t episode_seed);

    Observation observe() const;

    // Applies one action (clipped to the unit disc, scaled by shooter_speed).
    // Throws asim::error when called after done.
    StepResult step(Vec2 action);

    bool done() const { return done_; }
    EndReason end_reason() const { return end_reason_; }
    int step_index() const { return step_idx_; }
    double time() const { return step_idx_ * cfg_.dt; }
    const EnvConfig& config() const { return cfg_; }
    EnvMode mode() const { return mode_; }
    const BuildingLayout& layout() const { return layout_; }
    const ShooterState& shooter() const { return shooter_; }
    const std::vector<OccupantState>& occupants() const { return occupants_; }
    const std::vector<EpisodeEvent>& event_log() const { return log_; }
    // Shooter positions: spawn plus one entry per step.
    const std::vector<Vec2>& trajectory() const { return trajectory_; }

    int evacuated_count() const;
    int harmed_count() const;

    // Deterministic state injection (tests, scripted demos). Call after
    // reset(); wall-contact flags are re-primed exactly as at spawn.
    void override_shooter(Vec2 pos, double heading);
    void override_occupant(int id, Vec2 pos);  // throws on unknown id

private:
    void move_shooter(Vec2 action, StepResult& out);
    void apply_harm(StepResult& out);
    void step_occupants(StepResult& out);
    void check_termination(StepResult& out);
    void push_event(StepResult& out, EpisodeEvent ev);

    BuildingLayout layout_;  // scenario mask already applied
    EnvMode mode_;
    EnvConfig cfg_;

    ShooterState shooter_;
    std::vector<OccupantState> occupants_;
    int step_idx_ = 0;
    int last_target_step_ = 0;
    bool done_ = true;  // reset() must run before step()
    EndReason end_reason_ = EndReason::None;
    std::vector<EpisodeEvent> log_;
    std::vector<Vec2> trajectory_;
    std::vector<uint8_t> wall_contact_;  // per collision wall, for onset edges
};

}  // namespace asim

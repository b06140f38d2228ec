#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "asim/env.hpp"
#include "asim/layout.hpp"
#include "asim/policy.hpp"
#include "asim/stats.hpp"

namespace asim {

struct ScenarioConfig {
    ExitMask mask;
    std::string label;         // "full", "no-5", "no-5-6"
    std::vector<int> blocked;  // ascending exit ids
    int runs = 100;
    int occupants = 100;
    uint64_t seed_base = 0;
};

// All ways to block n_blocked of the layout's exits, lexicographic by blocked
// ids: 1 / 6 / 15 scenarios for 0 / 1 / 2 on a six-exit layout.
std::vector<ScenarioConfig> enumerate_scenarios(int n_blocked, const BuildingLayout& layout);

// Label round-trip ("full", "no-5", "no-5-6" -> config); throws parse_error /
// validation_error for unknown ids or fully blocked exits.
ScenarioConfig scenario_from_label(const std::string& label, const BuildingLayout& layout);

struct RunMetrics {
    std::string scenario;
    int run_index = 0;
    uint64_t seed = 0;
    double evacuation_rate = 0.0;  // percent
    double harm_rate = 0.0;        // percent
    double duration_s = 0.0;
    EndReason end_reason = EndReason::None;
    int n_occupants = 0;
    double dt = 0.1;
    std::vector<EpisodeEvent> events;
    std::vector<Vec2> trajectory;  // spawn + one position per step
};

// Rates recomputed purely from the event log (the engine's counters never
// enter); duration and end reason come from the EpisodeEnd event.
RunMetrics compute_metrics(const std::vector<EpisodeEvent>& events, int n_occupants, double dt);

using PolicyFactory = std::function<std::unique_ptr<Policy>()>;

// One evaluation episode: seed = seed_base + run_index, deterministic policy.
RunMetrics run_episode(const BuildingLayout& masked_layout, const ScenarioConfig& scenario,
                       int run_index, Policy& policy, EnvConfig cfg);

// scenario.runs independent episodes, parallel over `threads` workers,
// results in run-index order regardless of scheduling.
std::vector<RunMetrics> run_scenario(const ScenarioConfig& scenario, const BuildingLayout& layout,
                                     const PolicyFactory& make_policy, EnvConfig cfg, int threads);

struct SweepReportRow {
    std::string label;
    int blocked_count = 0;
    int n_runs = 0;
    double evac_mean = 0.0, evac_sd = 0.0;
    double harm_mean = 0.0, harm_sd = 0.0;
};

struct SweepReport {
    std::vector<SweepReportRow> table;  // sorted descending by evac_mean
    // named ANOVA blocks, e.g. "exit-count effect on evacuation rate"
    std::vector<std::pair<std::string, AnovaResult>> anovas;
};

// Builds the scenario table plus the exit-count and per-count configuration
// ANOVAs (each block only when it has >= 2 groups).
SweepReport build_report(const std::vector<RunMetrics>& rows);

std::string render_report_text(const SweepReport& report);
std::string render_report_json(const SweepReport& report);

// results.csv round-trip
std::string results_header();
std::string format_result_row(const RunMetrics& m);
std::vector<RunMetrics> parse_results_csv(const std::string& text);  // throws with line numbers

}  // namespace asim

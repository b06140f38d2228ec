#include "asim/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "asim/error.hpp"
#include "asim/io.hpp"
#include "nlohmann/json.hpp"

namespace asim {
namespace {

std::vector<int> sorted_exit_ids(const BuildingLayout& layout) {
    std::vector<int> ids;
    ids.reserve(layout.exits().size());
    for (const Exit& e : layout.exits()) ids.push_back(e.id);
    std::sort(ids.begin(), ids.end());
    return ids;
}

std::string label_for(const std::vector<int>& blocked) {
    if (blocked.empty()) return "full";
    std::string s = "no";
    for (int id : blocked) s += "-" + std::to_string(id);
    return s;
}

ScenarioConfig make_scenario(const std::vector<int>& blocked, const BuildingLayout& layout) {
    ScenarioConfig sc;
    sc.blocked = blocked;
    sc.label = label_for(blocked);
    sc.mask = layout.full_mask();
    for (int id : blocked) sc.mask.close(id);
    return sc;
}

}  // namespace

std::vector<ScenarioConfig> enumerate_scenarios(int n_blocked, const BuildingLayout& layout) {
    const std::vector<int> ids = sorted_exit_ids(layout);
    if (n_blocked < 0 || n_blocked > 2)
        throw validation_error("scenario enumeration supports 0..2 blocked exits, got " +
                               std::to_string(n_blocked));
    if (n_blocked >= static_cast<int>(ids.size()))
        throw validation_error("cannot block " + std::to_string(n_blocked) + " of " +
                               std::to_string(ids.size()) + " exits");
    std::vector<ScenarioConfig> out;
    if (n_blocked == 0) {
        out.push_back(make_scenario({}, layout));
    } else if (n_blocked == 1) {
        for (int id : ids) out.push_back(make_scenario({id}, layout));
    } else {
        for (size_t i = 0; i < ids.size(); ++i)
            for (size_t j = i + 1; j < ids.size(); ++j)
                out.push_back(make_scenario({ids[i], ids[j]}, layout));
    }
    return out;
}

ScenarioConfig scenario_from_label(const std::string& label, const BuildingLayout& layout) {
    if (label == "full") return make_scenario({}, layout);
    if (label.rfind("no-", 0) != 0)
        throw parse_error("scenario label '" + label + "' (expected 'full' or 'no-<id>[-<id>...]')");
    std::vector<int> blocked;
    std::stringstream ss(label.substr(3));
    std::string tok;
    while (std::getline(ss, tok, '-')) {
        if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos)
            throw parse_error("scenario label '" + label + "': bad exit id '" + tok + "'");
        blocked.push_back(std::stoi(tok));
    }
    if (blocked.empty()) throw parse_error("scenario label '" + label + "': no exit ids");
    for (int id : blocked)
        if (id < 1 || id > 32 || !layout.full_mask().is_open(id))
            throw validation_error("scenario '" + label + "': layout has no exit " +
                                   std::to_string(id));
    std::vector<int> sorted = blocked;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw validation_error("scenario '" + label + "': duplicate exit id");
    if (sorted != blocked)
        throw parse_error("scenario label '" + label + "': exit ids must be ascending");
    if (blocked.size() >= layout.exits().size())
        throw validation_error("scenario '" + label + "' would block every exit");
    return make_scenario(blocked, layout);
}

RunMetrics compute_metrics(const std::vector<EpisodeEvent>& events, int n_occupants, double dt) {
    if (n_occupants <= 0) throw validation_error("compute_metrics: n_occupants must be positive");
    RunMetrics m;
    m.n_occupants = n_occupants;
    m.dt = dt;
    int evacuated = 0, harmed = 0;
    bool ended = false;
    for (const EpisodeEvent& ev : events) {
        switch (ev.kind) {
            case EventKind::OccupantEvacuated: ++evacuated; break;
            case EventKind::TargetReached: ++harmed; break;
            case EventKind::EpisodeEnd:
                ended = true;
                m.duration_s = (ev.t + 1) * dt;
                m.end_reason = ev.reason;
                break;
            default: break;
        }
    }
    if (!ended) throw validation_error("compute_metrics: event log has no episode end");
    m.evacuation_rate = 100.0 * evacuated / n_occupants;
    m.harm_rate = 100.0 * harmed / n_occupants;
    m.events = events;
    return m;
}

RunMetrics run_episode(const BuildingLayout& masked_layout, const ScenarioConfig& scenario,
                       int run_index, Policy& policy, EnvConfig cfg) {
    cfg.occupant_count = scenario.occupants;
    ShooterEnv env(masked_layout, scenario.mask, EnvMode::Evaluation, cfg);
    const uint64_t seed = scenario.seed_base + static_cast<uint64_t>(run_index);
    env.reset(seed);
    while (!env.done()) env.step(policy.act(env));
    RunMetrics m = compute_metrics(env.event_log(), scenario.occupants, cfg.dt);
    m.scenario = scenario.label;
    m.run_index = run_index;
    m.seed = seed;
    m.trajectory = env.trajectory();
    return m;
}

std::vector<RunMetrics> run_scenario(const ScenarioConfig& scenario, const BuildingLayout& layout,
                                     const PolicyFactory& make_policy, EnvConfig cfg, int threads) {
    if (scenario.runs <= 0) throw validation_error("scenario runs must be positive");
    // Mask once so every episode shares one nav grid (and its distance-field
    // cache); ShooterEnv keeps the reference when the mask already matches.
    const BuildingLayout masked = layout.current_mask() == scenario.mask
                                      ? layout
                                      : layout.with_exit_mask(scenario.mask);
    std::vector<RunMetrics> out(static_cast<size_t>(scenario.runs));
    if (threads < 1) threads = 1;
    threads = std::min<int>(threads, scenario.runs);

    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    std::string error_msg;
    std::mutex error_mutex;

    auto worker = [&]() {
        while (true) {
            const int i = next.fetch_add(1);
            if (i >= scenario.runs || failed.load()) return;
            try {
                auto policy = make_policy();
                out[static_cast<size_t>(i)] = run_episode(masked, scenario, i, *policy, cfg);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!failed.exchange(true))
                    error_msg = scenario.label + " run " + std::to_string(i) + ": " + e.what();
                return;
            }
        }
    };
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<size_t>(threads));
        for (int w = 0; w < threads; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failed.load()) throw std::runtime_error(error_msg);
    return out;
}

namespace {

int blocked_count_of(const std::string& label) {
    if (label == "full") return 0;
    return static_cast<int>(std::count(label.begin(), label.end(), '-'));
}

std::string count_group_name(int blocked) {
    switch (blocked) {
        case 0: return "all exits open";
        case 1: return "one exit blocked";
        case 2: return "two exits blocked";
        default: return std::to_string(blocked) + " exits blocked";
    }
}

struct Accumulator {
    std::vector<double> evac, harm;
};

AnovaResult anova_for(const std::vector<std::pair<std::string, const std::vector<double>*>>& groups) {
    std::vector<std::string> names;
    std::vector<std::vector<double>> data;
    for (const auto& [name, vals] : groups) {
        names.push_back(name);
        data.push_back(*vals);
    }
    return one_way_anova(data, names);
}

}  // namespace

SweepReport build_report(const std::vector<RunMetrics>& rows) {
    if (rows.empty()) throw validation_error("report needs at least one result row");

    // keyed by scenario label, in first-appearance order
    std::vector<std::string> order;
    std::map<std::string, Accumulator> per_scenario;
    for (const RunMetrics& m : rows) {
        auto it = per_scenario.find(m.scenario);
        if (it == per_scenario.end()) {
            order.push_back(m.scenario);
            it = per_scenario.emplace(m.scenario, Accumulator{}).first;
        }
        it->second.evac.push_back(m.evacuation_rate);
        it->second.harm.push_back(m.harm_rate);
    }

    SweepReport report;
    for (const std::string& label : order) {
        const Accumulator& acc = per_scenario.at(label);
        SweepReportRow row;
        row.label = label;
        row.blocked_count = blocked_count_of(label);
        row.n_runs = static_cast<int>(acc.evac.size());
        row.evac_mean = mean_of(acc.evac);
        row.evac_sd = sample_sd(acc.evac);
        row.harm_mean = mean_of(acc.harm);
        row.harm_sd = sample_sd(acc.harm);
        report.table.push_back(row);
    }
    std::stable_sort(report.table.begin(), report.table.end(),
                     [](const SweepReportRow& a, const SweepReportRow& b) {
                         return a.evac_mean > b.evac_mean;
                     });

    // Exit-count effect: pool scenarios by number of blocked exits.
    std::map<int, Accumulator> by_count;
    for (const std::string& label : order) {
        const Accumulator& acc = per_scenario.at(label);
        Accumulator& dst = by_count[blocked_count_of(label)];
        dst.evac.insert(dst.evac.end(), acc.evac.begin(), acc.evac.end());
        dst.harm.insert(dst.harm.end(), acc.harm.begin(), acc.harm.end());
    }
    if (by_count.size() >= 2) {
        std::vector<std::pair<std::string, const std::vector<double>*>> evac_groups, harm_groups;
        for (const auto& [count, acc] : by_count) {
            evac_groups.emplace_back(count_group_name(count), &acc.evac);
            harm_groups.emplace_back(count_group_name(count), &acc.harm);
        }
        report.anovas.emplace_back("exit-count effect on evacuation rate", anova_for(evac_groups));
        report.anovas.emplace_back("exit-count effect on harm rate", anova_for(harm_groups));
    }

    // Configuration effect at each count level. One-blocked scenarios are
    // compared against the fully open baseline; two-blocked scenarios are
    // compared among themselves.
    auto config_block = [&](int count, bool include_full, const std::string& title) {
        std::vector<std::pair<std::string, const std::vector<double>*>> evac_groups, harm_groups;
        for (const std::string& label : order) {
            const int c = blocked_count_of(label);
            if (c != count && !(include_full && c == 0)) continue;
            const Accumulator& acc = per_scenario.at(label);
            if (acc.evac.size() < 2) continue;
            evac_groups.emplace_back(label, &acc.evac);
            harm_groups.emplace_back(label, &acc.harm);
        }
        if (evac_groups.size() < 2) return;
        report.anovas.emplace_back(title + " on evacuation rate", anova_for(evac_groups));
        report.anovas.emplace_back(title + " on harm rate", anova_for(harm_groups));
    };
    config_block(1, true, "configuration effect, one blocked exit vs fully open");
    config_block(2, false, "configuration effect, two blocked exits");

    return report;
}

namespace {

std::string fmt(double v, int prec = 4) { return format_double(v, prec); }

}  // namespace

std::string render_report_text(const SweepReport& report) {
    std::string s;
    s += "scenario                 runs  evac mean    evac sd  harm mean    harm sd\n";
    for (const SweepReportRow& r : report.table) {
        char line[160];
        std::snprintf(line, sizeof line, "%-24s %4d %10s %10s %10s %10s\n", r.label.c_str(),
                      r.n_runs, fmt(r.evac_mean, 3).c_str(), fmt(r.evac_sd, 3).c_str(),
                      fmt(r.harm_mean, 3).c_str(), fmt(r.harm_sd, 3).c_str());
        s += line;
    }
    for (const auto& [name, a] : report.anovas) {
        s += "\nANOVA: " + name + "\n";
        s += "  F(" + std::to_string(a.df_between) + ", " + std::to_string(a.df_within) +
             ") = " + fmt(a.F) + ", p = " + format_double(a.p, 6) +
             ", partial eta^2 = " + fmt(a.eta_p_sq) + ", Cohen's d = " + fmt(a.d) + "\n";
        for (const GroupStat& g : a.groups)
            s += "    " + g.label + ": n=" + std::to_string(g.n) + " mean=" + fmt(g.mean, 3) +
                 " sd=" + fmt(g.sd, 3) + "\n";
    }
    return s;
}

std::string render_report_json(const SweepReport& report) {
    nlohmann::ordered_json j;
    j["table"] = nlohmann::ordered_json::array();
    for (const SweepReportRow& r : report.table) {
        nlohmann::ordered_json row;
        row["scenario"] = r.label;
        row["blocked_exits"] = r.blocked_count;
        row["runs"] = r.n_runs;
        row["evacuation_rate_mean"] = r.evac_mean;
        row["evacuation_rate_sd"] = r.evac_sd;
        row["harm_rate_mean"] = r.harm_mean;
        row["harm_rate_sd"] = r.harm_sd;
        j["table"].push_back(std::move(row));
    }
    j["anovas"] = nlohmann::ordered_json::array();
    for (const auto& [name, a] : report.anovas) {
        nlohmann::ordered_json block;
        block["name"] = name;
        block["f_statistic"] = a.F;
        block["df"] = {a.df_between, a.df_within};
        block["p_value"] = a.p;
        block["partial_eta_squared"] = a.eta_p_sq;
        block["cohen_d"] = a.d;
        block["groups"] = nlohmann::ordered_json::array();
        for (const GroupStat& g : a.groups) {
            nlohmann::ordered_json gg;
            gg["name"] = g.label;
            gg["n"] = g.n;
            gg["mean"] = g.mean;
            gg["sd"] = g.sd;
            block["groups"].push_back(std::move(gg));
        }
        j["anovas"].push_back(std::move(block));
    }
    return j.dump(2) + "\n";
}

std::string results_header() {
    return "scenario_label,run_index,seed,evacuation_rate,harm_rate,duration_s,end_reason";
}

std::string format_result_row(const RunMetrics& m) {
    return m.scenario + "," + std::to_string(m.run_index) + "," + std::to_string(m.seed) + "," +
           format_double(m.evacuation_rate, 4) + "," + format_double(m.harm_rate, 4) + "," +
           format_double(m.duration_s, 4) + "," + to_string(m.end_reason);
}

std::vector<RunMetrics> parse_results_csv(const std::string& text) {
    std::vector<RunMetrics> rows;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (lineno == 1) {
            if (line != results_header())
                throw parse_error("results line 1: unexpected header '" + line + "'");
            continue;
        }
        const std::vector<std::string> f = split_csv_line(line);
        if (f.size() != 7)
            throw parse_error("results line " + std::to_string(lineno) + ": expected 7 fields, got " +
                              std::to_string(f.size()));
        RunMetrics m;
        m.scenario = f[0];
        try {
            m.run_index = std::stoi(f[1]);
            m.seed = std::stoull(f[2]);
            m.evacuation_rate = std::stod(f[3]);
            m.harm_rate = std::stod(f[4]);
            m.duration_s = std::stod(f[5]);
        } catch (const std::exception&) {
            throw parse_error("results line " + std::to_string(lineno) + ": bad numeric field");
        }
        m.end_reason = end_reason_from_string(f[6]);
        rows.push_back(std::move(m));
    }
    if (rows.empty()) throw parse_error("results file has no data rows");
    return rows;
}

}  // namespace asim

// asim: train the incident agent, run evaluation sweeps over exit scenarios,
// and reduce the results to ANOVA reports and trajectory exports.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "asim/env.hpp"
#include "asim/error.hpp"
#include "asim/experiments.hpp"
#include "asim/io.hpp"
#include "asim/layout.hpp"
#include "asim/policy.hpp"
#include "asim/rl/checkpoint.hpp"
#include "asim/rl/train.hpp"
#include "asim/stats.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr const char* kToolVersion = "1.0.0";

std::string out_root() {
    const char* env = std::getenv("ASIM_OUT_ROOT");
    return (env && *env) ? std::string(env) : std::string(".");
}

std::string default_out_dir(const std::string& command) {
    return (fs::path(out_root()) / (command + "_out")).string();
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw asim::error("cannot create output directory " + dir + ": " + ec.message());
}

// ---- configuration -------------------------------------------------------

struct EffectiveConfig {
    asim::rl::PpoConfig ppo;
    asim::EnvConfig env;
};

void apply_ppo_json(asim::rl::PpoConfig& c, const json& j) {
    for (const auto& [key, val] : j.items()) {
        if (key == "max_steps") c.max_steps = val.get<int64_t>();
        else if (key == "time_horizon") c.time_horizon = val.get<int>();
        else if (key == "summary_frequency") c.summary_frequency = val.get<int64_t>();
        else if (key == "keep_checkpoints") c.keep_checkpoints = val.get<int>();
        else if (key == "batch_size") c.batch_size = val.get<int>();
        else if (key == "buffer_size") c.buffer_size = val.get<int>();
        else if (key == "learning_rate") c.learning_rate = val.get<double>();
        else if (key == "beta") c.beta = val.get<double>();
        else if (key == "epsilon") c.epsilon = val.get<double>();
        else if (key == "lambda") c.lambda = val.get<double>();
        else if (key == "num_epoch") c.num_epoch = val.get<int>();
        else if (key == "gamma") c.gamma = val.get<double>();
        else if (key == "extrinsic_strength") c.extrinsic_strength = val.get<double>();
        else if (key == "hidden_units") c.hidden_units = val.get<int>();
        else if (key == "num_layers") c.num_layers = val.get<int>();
        else if (key == "normalize") c.normalize = val.get<bool>();
        else throw asim::validation_error("config: unknown ppo key '" + key + "'");
    }
}

void apply_env_json(asim::EnvConfig& c, const json& j) {
    for (const auto& [key, val] : j.items()) {
        if (key == "dt") c.dt = val.get<double>();
        else if (key == "harm_radius") c.harm_radius = val.get<double>();
        else if (key == "ray_range") c.ray_range = val.get<double>();
        else if (key == "shooter_speed") c.shooter_speed = val.get<double>();
        else if (key == "shooter_radius") c.shooter_radius = val.get<double>();
        else if (key == "target_radius") c.target_radius = val.get<double>();
        else if (key == "occupant_speed") c.occupant_speed = val.get<double>();
        else if (key == "freeze_time") c.freeze_time = val.get<double>();
        else if (key == "no_target_timeout") c.no_target_timeout = val.get<double>();
        else if (key == "occupant_count") c.occupant_count = val.get<int>();
        else if (key == "max_episode_steps") c.max_episode_steps = val.get<int>();
        else throw asim::validation_error("config: unknown env key '" + key + "'");
    }
}

EffectiveConfig load_config(const std::string& path, int default_occupants) {
    EffectiveConfig cfg;
    cfg.env.occupant_count = default_occupants;
    if (path.empty()) return cfg;
    json doc;
    try {
        doc = json::parse(asim::read_text_file(path));
    } catch (const json::exception& e) {
        throw asim::parse_error("config " + path + " is not valid JSON: " + e.what());
    }
    for (const auto& [key, val] : doc.items()) {
        if (key == "ppo") apply_ppo_json(cfg.ppo, val);
        else if (key == "env") apply_env_json(cfg.env, val);
        else throw asim::validation_error("config: unknown top-level key '" + key + "'");
    }
    return cfg;
}

ordered_json ppo_to_json(const asim::rl::PpoConfig& c) {
    ordered_json j;
    j["max_steps"] = c.max_steps;
    j["time_horizon"] = c.time_horizon;
    j["summary_frequency"] = c.summary_frequency;
    j["keep_checkpoints"] = c.keep_checkpoints;
    j["batch_size"] = c.batch_size;
    j["buffer_size"] = c.buffer_size;
    j["learning_rate"] = c.learning_rate;
    j["beta"] = c.beta;
    j["epsilon"] = c.epsilon;
    j["lambda"] = c.lambda;
    j["num_epoch"] = c.num_epoch;
    j["gamma"] = c.gamma;
    j["extrinsic_strength"] = c.extrinsic_strength;
    j["hidden_units"] = c.hidden_units;
    j["num_layers"] = c.num_layers;
    j["normalize"] = c.normalize;
    return j;
}

ordered_json env_to_json(const asim::EnvConfig& c) {
    ordered_json j;
    j["dt"] = c.dt;
    j["harm_radius"] = c.harm_radius;
    j["ray_range"] = c.ray_range;
    j["shooter_speed"] = c.shooter_speed;
    j["shooter_radius"] = c.shooter_radius;
    j["target_radius"] = c.target_radius;
    j["occupant_speed"] = c.occupant_speed;
    j["freeze_time"] = c.freeze_time;
    j["no_target_timeout"] = c.no_target_timeout;
    j["occupant_count"] = c.occupant_count;
    j["max_episode_steps"] = c.max_episode_steps;
    return j;
}

uint64_t config_hash(const EffectiveConfig& cfg) {
    ordered_json j;
    j["ppo"] = ppo_to_json(cfg.ppo);
    j["env"] = env_to_json(cfg.env);
    return asim::fnv1a64(j.dump());
}

// Written before any run output; holds everything needed to replay the run.
void write_manifest(const std::string& out_dir, const std::string& command,
                    const std::string& layout_path, const EffectiveConfig& cfg, uint64_t seed,
                    const ordered_json& run_fields) {
    ordered_json m;
    m["tool"] = "asim";
    m["version"] = kToolVersion;
    m["command"] = command;
    m["created_utc"] = asim::iso8601_now_utc();
    m["seed"] = seed;
    m["layout"] = {{"path", layout_path}, {"fnv1a64", asim::hex64(asim::fnv1a64_file(layout_path))}};
    m["run"] = run_fields;
    m["ppo"] = ppo_to_json(cfg.ppo);
    m["env"] = env_to_json(cfg.env);
    asim::write_text_file((fs::path(out_dir) / "manifest.json").string(), m.dump(2) + "\n");
}

// ---- shared run output ----------------------------------------------------

std::string run_file(const std::string& out_dir, const std::string& label, int run_index,
                     const char* suffix) {
    char name[64];
    std::snprintf(name, sizeof name, "run_%05d_%s.csv", run_index, suffix);
    return (fs::path(out_dir) / "runs" / label / name).string();
}

void write_run_logs(const std::string& out_dir, const asim::RunMetrics& m) {
    ensure_dir((fs::path(out_dir) / "runs" / m.scenario).string());
    std::string ev = "t,kind,subject\n";
    for (const asim::EpisodeEvent& e : m.events) {
        ev += asim::format_double(e.t * m.dt, 4);
        ev += ",";
        ev += to_string(e.kind);
        ev += ",";
        ev += std::to_string(e.subject);
        ev += "\n";
    }
    asim::write_text_file(run_file(out_dir, m.scenario, m.run_index, "events"), ev);

    // One row per executed step: the shooter position entering that step.
    std::string tr = "t,x,y\n";
    const size_t steps = m.trajectory.empty() ? 0 : m.trajectory.size() - 1;
    for (size_t i = 0; i < steps; ++i) {
        tr += asim::format_double(i * m.dt, 4) + "," + asim::format_double(m.trajectory[i].x, 4) +
              "," + asim::format_double(m.trajectory[i].y, 4) + "\n";
    }
    asim::write_text_file(run_file(out_dir, m.scenario, m.run_index, "trajectory"), tr);
}

struct PolicyChoice {
    std::string kind = "greedy";  // "greedy" | "network"
    std::string checkpoint_path;
};

asim::PolicyFactory make_policy_factory(const PolicyChoice& choice) {
    if (choice.kind == "greedy") {
        return [] { return std::make_unique<asim::GreedySearchPolicy>(); };
    }
    if (choice.kind != "network")
        throw asim::validation_error("unknown policy '" + choice.kind + "' (greedy|network)");
    if (choice.checkpoint_path.empty())
        throw asim::validation_error("--policy network requires --checkpoint");
    auto ckpt = std::make_shared<asim::rl::Checkpoint>(
        asim::rl::load_checkpoint(choice.checkpoint_path));
    return [ckpt] { return std::make_unique<asim::NetworkPolicy>(*ckpt); };
}

ordered_json policy_json(const PolicyChoice& choice) {
    ordered_json j;
    j["kind"] = choice.kind;
    if (!choice.checkpoint_path.empty()) {
        j["checkpoint"] = choice.checkpoint_path;
        j["checkpoint_fnv1a64"] = asim::hex64(asim::fnv1a64_file(choice.checkpoint_path));
    }
    return j;
}

int run_scenario_set(const std::string& command, const std::string& layout_path,
                     const std::vector<asim::ScenarioConfig>& scenarios,
                     const EffectiveConfig& cfg, const PolicyChoice& choice, uint64_t seed,
                     int threads, const std::string& out_dir, const ordered_json& run_fields) {
    asim::BuildingLayout layout = asim::BuildingLayout::from_file(layout_path);
    const asim::PolicyFactory factory = make_policy_factory(choice);

    ensure_dir(out_dir);
    write_manifest(out_dir, command, layout_path, cfg, seed, run_fields);

    std::string csv = asim::results_header() + "\n";
    for (const asim::ScenarioConfig& sc : scenarios) {
        std::vector<asim::RunMetrics> rows = asim::run_scenario(sc, layout, factory, cfg.env, threads);
        for (const asim::RunMetrics& m : rows) {
            csv += asim::format_result_row(m) + "\n";
            write_run_logs(out_dir, m);
        }
        std::fprintf(stderr, "%s: %d runs done\n", sc.label.c_str(), sc.runs);
    }
    const std::string results_path = (fs::path(out_dir) / "results.csv").string();
    asim::write_text_file(results_path, csv);
    std::printf("wrote %s\n", results_path.c_str());
    return 0;
}

std::vector<asim::ScenarioConfig> scenarios_for(const std::string& blocked,
                                                const asim::BuildingLayout& layout, int runs,
                                                int occupants, uint64_t seed) {
    std::vector<asim::ScenarioConfig> out;
    auto add = [&](int n) {
        for (asim::ScenarioConfig sc : asim::enumerate_scenarios(n, layout)) {
            sc.runs = runs;
            sc.occupants = occupants;
            sc.seed_base = seed;
            out.push_back(std::move(sc));
        }
    };
    if (blocked == "all") {
        add(0);
        add(1);
        add(2);
    } else if (blocked == "0" || blocked == "1" || blocked == "2") {
        add(blocked[0] - '0');
    } else {
        throw asim::validation_error("--blocked must be one of 0, 1, 2, all");
    }
    return out;
}

// ---- subcommands ----------------------------------------------------------

int cmd_train(const std::string& layout_path, const std::string& config_path, uint64_t seed,
              int n_envs, std::string out_dir, int64_t max_steps_override, int occupants_override,
              const std::string& scenario_label) {
    asim::BuildingLayout layout = asim::BuildingLayout::from_file(layout_path);
    EffectiveConfig cfg = load_config(config_path, 60);
    if (max_steps_override > 0) cfg.ppo.max_steps = max_steps_override;
    if (occupants_override > 0) cfg.env.occupant_count = occupants_override;
    if (out_dir.empty()) out_dir = default_out_dir("train");

    asim::rl::TrainOptions opt;
    opt.ppo = cfg.ppo;
    opt.env = cfg.env;
    opt.scenario = asim::scenario_from_label(scenario_label, layout).mask;
    opt.n_envs = n_envs;
    opt.seed = seed;
    opt.out_dir = out_dir;
    opt.cfg_hash = config_hash(cfg);

    ensure_dir(out_dir);
    ordered_json run_fields;
    run_fields["n_envs"] = n_envs;
    run_fields["scenario"] = scenario_label;
    write_manifest(out_dir, "train", layout_path, cfg, seed, run_fields);

    asim::rl::TrainResult res = asim::rl::train(layout, opt);
    std::printf("trained %lld steps, %zu episodes finished\n",
                static_cast<long long>(res.steps_collected), res.episode_rewards.size());
    std::printf("log: %s\n", res.log_path.c_str());
    if (!res.checkpoint_paths.empty())
        std::printf("checkpoint: %s\n", res.checkpoint_paths.back().c_str());
    return 0;
}

int cmd_evaluate(const std::string& layout_path, const std::string& config_path,
                 const std::string& scenario_label, const PolicyChoice& choice, int runs,
                 uint64_t seed, int occupants, int threads, std::string out_dir) {
    if (out_dir.empty()) out_dir = default_out_dir("evaluate");
    asim::BuildingLayout layout = asim::BuildingLayout::from_file(layout_path);
    EffectiveConfig cfg = load_config(config_path, occupants > 0 ? occupants : 100);
    if (occupants > 0) cfg.env.occupant_count = occupants;

    asim::ScenarioConfig sc = asim::scenario_from_label(scenario_label, layout);
    sc.runs = runs;
    sc.occupants = cfg.env.occupant_count;
    sc.seed_base = seed;

    ordered_json run_fields;
    run_fields["scenario"] = scenario_label;
    run_fields["runs"] = runs;
    run_fields["threads"] = threads;
    run_fields["policy"] = policy_json(choice);
    return run_scenario_set("evaluate", layout_path, {sc}, cfg, choice, seed, threads, out_dir,
                            run_fields);
}

int cmd_sweep(const std::string& layout_path, const std::string& config_path,
              const std::string& blocked, const PolicyChoice& choice, int runs, uint64_t seed,
              int occupants, int threads, std::string out_dir) {
    if (out_dir.empty()) out_dir = default_out_dir("sweep");
    asim::BuildingLayout layout = asim::BuildingLayout::from_file(layout_path);
    EffectiveConfig cfg = load_config(config_path, occupants > 0 ? occupants : 100);
    if (occupants > 0) cfg.env.occupant_count = occupants;

    const std::vector<asim::ScenarioConfig> scenarios =
        scenarios_for(blocked, layout, runs, cfg.env.occupant_count, seed);

    ordered_json run_fields;
    run_fields["blocked"] = blocked;
    run_fields["runs_per_scenario"] = runs;
    run_fields["scenario_count"] = scenarios.size();
    run_fields["threads"] = threads;
    run_fields["policy"] = policy_json(choice);
    return run_scenario_set("sweep", layout_path, scenarios, cfg, choice, seed, threads, out_dir,
                            run_fields);
}

int cmd_stats(const std::string& results_path, std::string out_dir) {
    if (out_dir.empty()) out_dir = default_out_dir("stats");
    const std::vector<asim::RunMetrics> rows =
        asim::parse_results_csv(asim::read_text_file(results_path));
    const asim::SweepReport report = asim::build_report(rows);
    const std::string text = asim::render_report_text(report);

    ensure_dir(out_dir);
    asim::write_text_file((fs::path(out_dir) / "report.txt").string(), text);
    asim::write_text_file((fs::path(out_dir) / "report.json").string(),
                          asim::render_report_json(report));
    std::fputs(text.c_str(), stdout);
    std::printf("wrote %s and report.json\n", (fs::path(out_dir) / "report.txt").string().c_str());
    return 0;
}

int cmd_export_trajectories(const std::string& runs_dir, const std::string& format,
                            std::string out_dir) {
    if (format != "csv") throw asim::validation_error("unsupported format '" + format + "' (csv)");
    if (out_dir.empty()) out_dir = default_out_dir("trajectories");
    if (!fs::is_directory(runs_dir))
        throw asim::error("runs directory not found: " + runs_dir);

    // runs_dir/<scenario>/run_XXXXX_trajectory.csv -> overlay_<scenario>.csv
    std::vector<std::string> scenario_dirs;
    for (const auto& entry : fs::directory_iterator(runs_dir)) {
        if (entry.is_directory()) scenario_dirs.push_back(entry.path().filename().string());
    }
    std::sort(scenario_dirs.begin(), scenario_dirs.end());
    if (scenario_dirs.empty()) throw asim::error("no scenario directories under " + runs_dir);

    ensure_dir(out_dir);
    int total = 0;
    for (const std::string& label : scenario_dirs) {
        std::vector<std::pair<int, fs::path>> files;
        for (const auto& entry : fs::directory_iterator(fs::path(runs_dir) / label)) {
            const std::string name = entry.path().filename().string();
            if (name.rfind("run_", 0) == 0 && name.find("_trajectory.csv") != std::string::npos) {
                files.emplace_back(std::stoi(name.substr(4, 5)), entry.path());
            }
        }
        std::sort(files.begin(), files.end());
        if (files.empty()) continue;

        std::string overlay = "scenario,run_index,t,x,y\n";
        for (const auto& [idx, path] : files) {
            std::stringstream ss(asim::read_text_file(path.string()));
            std::string line;
            bool header = true;
            while (std::getline(ss, line)) {
                if (header) {
                    header = false;
                    if (line != "t,x,y")
                        throw asim::parse_error(path.string() + ": unexpected header '" + line + "'");
                    continue;
                }
                if (line.empty()) continue;
                overlay += label + "," + std::to_string(idx) + "," + line + "\n";
            }
            ++total;
        }
        asim::write_text_file((fs::path(out_dir) / ("overlay_" + label + ".csv")).string(), overlay);
    }
    if (total == 0) throw asim::error("no trajectory files under " + runs_dir);
    std::printf("exported %d trajectories across %zu scenarios to %s\n", total,
                scenario_dirs.size(), out_dir.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"active-incident building simulator: training, scenario sweeps, statistics"};
    app.require_subcommand(1);

    // train
    auto* train = app.add_subcommand("train", "train the incident agent with PPO");
    std::string t_layout, t_config, t_out, t_scenario = "full";
    uint64_t t_seed = 1;
    int t_envs = 16, t_occupants = 0;
    int64_t t_max_steps = 0;
    train->add_option("--layout", t_layout, "layout file")->required();
    train->add_option("--config", t_config, "JSON config ({\"ppo\":{...},\"env\":{...}})");
    train->add_option("--seed", t_seed, "master seed");
    train->add_option("--n-envs", t_envs, "parallel environments");
    train->add_option("--max-steps", t_max_steps, "override ppo.max_steps");
    train->add_option("--occupants", t_occupants, "override env.occupant_count");
    train->add_option("--scenario", t_scenario, "exit scenario label (default full)");
    train->add_option("--out", t_out, "output directory");

    // evaluate
    auto* eval = app.add_subcommand("evaluate", "run one exit scenario with a fixed policy");
    std::string e_layout, e_config, e_out, e_scenario = "full";
    PolicyChoice e_policy;
    uint64_t e_seed = 1;
    int e_runs = 100, e_occupants = 0, e_threads = static_cast<int>(std::thread::hardware_concurrency());
    eval->add_option("--layout", e_layout, "layout file")->required();
    eval->add_option("--config", e_config, "JSON config file");
    eval->add_option("--scenario", e_scenario, "scenario label, e.g. full or no-5-6");
    eval->add_option("--policy", e_policy.kind, "greedy|network");
    eval->add_option("--checkpoint", e_policy.checkpoint_path, "checkpoint for --policy network");
    eval->add_option("--runs", e_runs, "episodes to run");
    eval->add_option("--seed", e_seed, "seed base (episode seed = base + run index)");
    eval->add_option("--occupants", e_occupants, "occupants per episode");
    eval->add_option("--threads", e_threads, "worker threads");
    eval->add_option("--out", e_out, "output directory");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "run all scenarios for 0/1/2 blocked exits");
    std::string s_layout, s_config, s_out, s_blocked = "all";
    PolicyChoice s_policy;
    uint64_t s_seed = 1;
    int s_runs = 100, s_occupants = 0, s_threads = static_cast<int>(std::thread::hardware_concurrency());
    sweep->add_option("--layout", s_layout, "layout file")->required();
    sweep->add_option("--config", s_config, "JSON config file");
    sweep->add_option("--blocked", s_blocked, "0|1|2|all");
    sweep->add_option("--policy", s_policy.kind, "greedy|network");
    sweep->add_option("--checkpoint", s_policy.checkpoint_path, "checkpoint for --policy network");
    sweep->add_option("--runs", s_runs, "runs per scenario");
    sweep->add_option("--seed", s_seed, "seed base shared by all scenarios");
    sweep->add_option("--occupants", s_occupants, "occupants per episode");
    sweep->add_option("--threads", s_threads, "worker threads");
    sweep->add_option("--out", s_out, "output directory");

    // stats
    auto* stats = app.add_subcommand("stats", "ANOVA report from a results.csv");
    std::string st_results, st_out;
    stats->add_option("--results", st_results, "results.csv path")->required();
    stats->add_option("--out", st_out, "output directory");

    // export-trajectories
    auto* expt = app.add_subcommand("export-trajectories", "aggregate per-run shooter paths");
    std::string x_runs_dir, x_format = "csv", x_out;
    expt->add_option("--runs-dir", x_runs_dir, "the runs/ directory of a sweep or evaluate output")
        ->required();
    expt->add_option("--format", x_format, "output format (csv)");
    expt->add_option("--out", x_out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (train->parsed())
            return cmd_train(t_layout, t_config, t_seed, t_envs, t_out, t_max_steps, t_occupants,
                             t_scenario);
        if (eval->parsed())
            return cmd_evaluate(e_layout, e_config, e_scenario, e_policy, e_runs, e_seed,
                                e_occupants, e_threads, e_out);
        if (sweep->parsed())
            return cmd_sweep(s_layout, s_config, s_blocked, s_policy, s_runs, s_seed, s_occupants,
                             s_threads, s_out);
        if (stats->parsed()) return cmd_stats(st_results, st_out);
        if (expt->parsed()) return cmd_export_trajectories(x_runs_dir, x_format, x_out);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}

// ddqn_lab: command-line front end for training, grid reproduction, phase
// space analysis and the verification suites.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ddqn/analysis/phase_space.hpp"
#include "ddqn/envs/conformance.hpp"
#include "ddqn/envs/trace.hpp"
#include "ddqn/experiment/config.hpp"
#include "ddqn/experiment/presets.hpp"
#include "ddqn/experiment/run_log.hpp"
#include "ddqn/experiment/stats.hpp"
#include "ddqn/experiment/training.hpp"
#include "ddqn/nn/gradcheck.hpp"
#include "ddqn/nn/snapshot.hpp"

#ifndef DDQN_SOURCE_DATA_DIR
#define DDQN_SOURCE_DATA_DIR "tests/data"
#endif

namespace fs = std::filesystem;
using namespace ddqn;
using namespace ddqn::experiment;

namespace {

// --out wins; otherwise $DDQN_LAB_OUT (or ./runs) joined with a per-command name.
fs::path output_dir(const std::string& flag, const std::string& fallback) {
    if (!flag.empty()) return flag;
    const char* root = std::getenv("DDQN_LAB_OUT");
    return fs::path(root && *root ? root : "runs") / fallback;
}

template <class F>
void write_file(const fs::path& path, F&& body) {
    std::ofstream os(path, std::ios::trunc | std::ios::binary);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    body(os);
    if (!os) throw IoError("write to " + path.string() + " failed");
}

void print_run_summary(std::ostream& os, const RunLog& log) {
    const auto goal = analysis::first_goal_step(log);
    os << "steps " << log.steps_completed << ", episodes " << log.episodes.size();
    if (!log.episodes.empty()) os << ", last return " << csv::format(log.episodes.back().ret);
    if (log.config.env != EnvId::CartPole) os << ", first goal " << (goal ? std::to_string(*goal) : "never");
    if (log.stopped_early) os << " (stopped early)";
    os << '\n';
}

// Run directories under `root`: root itself if it holds config.json,
// otherwise its immediate subdirectories that do, in name order.
std::vector<fs::path> run_dirs_under(const fs::path& root) {
    if (fs::exists(root / "config.json")) return {root};
    if (!fs::is_directory(root)) throw IoError(root.string() + " is not a directory");
    std::vector<fs::path> dirs;
    for (const auto& e : fs::directory_iterator(root))
        if (e.is_directory() && fs::exists(e.path() / "config.json")) dirs.push_back(e.path());
    std::sort(dirs.begin(), dirs.end());
    return dirs;
}

// ---- train --------------------------------------------------------------------

struct TrainArgs {
    std::string config_path;
    std::string env = "mountaincar";
    std::optional<double> epsilon;
    std::optional<std::uint64_t> decay_steps;
    std::optional<std::string> arch;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> steps;
    std::optional<std::uint64_t> trace_capacity;
    std::vector<std::uint64_t> snapshots;
    std::string out;
};

int cmd_train(const TrainArgs& a) {
    TrainConfig c = a.config_path.empty() ? defaults_for(envs::env_from_string(a.env)) : load_config(a.config_path);
    if (a.arch) c.architecture = architecture_for(c.env, arch_preset_from_string(*a.arch));
    if (a.epsilon) c.schedule = EpsilonSchedule::constant(*a.epsilon);
    if (a.decay_steps) c.schedule = EpsilonSchedule::linear(1.0, 0.0, *a.decay_steps);
    if (a.seed) c.seed = *a.seed;
    if (a.steps) {
        c.total_env_steps = *a.steps;
        std::erase_if(c.snapshot_steps, [&](std::uint64_t s) { return s > *a.steps; });
    }
    if (!a.snapshots.empty()) c.snapshot_steps = a.snapshots;
    if (a.trace_capacity) c.trace_capacity = *a.trace_capacity;
    validate(c);

    const fs::path out = output_dir(a.out, "train");
    std::cout << config_text(c);
    fs::create_directories(out);
    write_text(out / "config.json", config_text(c));

    const RunLog log = run_training(c);
    save_run_log(out, log);
    print_run_summary(std::cout, log);
    std::cout << "wrote " << out.string() << '\n';
    if (!log.ok()) throw TrainingError(log.error);
    return 0;
}

// ---- grid ---------------------------------------------------------------------

struct GridArgs {
    int figure = 1;
    unsigned jobs = 1;
    std::optional<std::uint64_t> steps;
    std::uint64_t base_seed = 0;
    std::uint64_t interval = 1000;
    std::string out;
};

int cmd_grid(const GridArgs& a) {
    const auto grid = figure_grid(a.figure, a.base_seed, a.steps);
    const fs::path out = output_dir(a.out, "figure" + std::to_string(a.figure));
    fs::create_directories(out);

    nlohmann::ordered_json manifest = {{"figure", a.figure}, {"base_seed", a.base_seed}, {"variants", nlohmann::ordered_json::array()}};
    std::vector<TrainConfig> configs;
    std::vector<fs::path> dirs;
    for (const auto& v : grid) {
        nlohmann::ordered_json seeds = nlohmann::ordered_json::array();
        for (std::size_t i = 0; i < v.runs.size(); ++i) {
            configs.push_back(v.runs[i]);
            dirs.push_back(out / v.name / ("run_" + std::to_string(i)));
            seeds.push_back(v.runs[i].seed);
        }
        nlohmann::ordered_json base = to_json(v.runs.front());
        base.erase("seed");
        manifest["variants"].push_back({{"name", v.name}, {"seeds", seeds}, {"config", base}});
    }
    std::cout << manifest.dump(2) << '\n';
    write_text(out / "grid.json", manifest.dump(2) + "\n");

    const auto logs = run_grid(configs, a.jobs, [&](std::size_t i, const RunLog& log) {
        save_run_log(dirs[i], log);
        std::cerr << "[" << dirs[i].parent_path().filename().string() << "/" << dirs[i].filename().string() << "] ";
        if (log.ok()) print_run_summary(std::cerr, log);
        else std::cerr << "failed: " << log.error << '\n';
    });

    std::size_t k = 0, failures = 0;
    for (const auto& v : grid) {
        const std::vector<RunLog> variant_logs(logs.begin() + static_cast<std::ptrdiff_t>(k),
                                               logs.begin() + static_cast<std::ptrdiff_t>(k + v.runs.size()));
        k += v.runs.size();
        for (const auto& l : variant_logs) failures += l.ok() ? 0 : 1;
        const auto stats = aggregate_stats(variant_logs, regular_eval_points(v.runs.front().total_env_steps, a.interval));
        save_stats_csv(out / v.name / "stats.csv", stats);
        std::cout << v.name << ": ";
        if (!stats.points.empty() && !stats.points.back().missing)
            std::cout << "final median " << csv::format(stats.points.back().median) << ", mean "
                      << csv::format(stats.points.back().mean);
        else
            std::cout << "no completed episodes at the final step";
        std::cout << '\n';
    }
    std::cout << "wrote " << out.string() << '\n';
    if (failures) throw TrainingError(std::to_string(failures) + " run(s) failed");
    return 0;
}

// ---- stats --------------------------------------------------------------------

int cmd_stats(const std::vector<std::string>& inputs, std::uint64_t interval, const std::string& out_flag) {
    std::vector<fs::path> dirs;
    for (const auto& in : inputs) {
        const auto found = run_dirs_under(in);
        dirs.insert(dirs.end(), found.begin(), found.end());
    }
    if (dirs.size() < 2) throw UsageError("stats needs at least two run directories");
    std::vector<RunLog> logs;
    std::uint64_t total = 0;
    for (const auto& d : dirs) {
        logs.push_back(load_run_log(d));
        total = std::max(total, logs.back().steps_completed);
    }
    const auto stats = aggregate_stats(logs, regular_eval_points(total, interval));
    const fs::path out = out_flag.empty() ? (inputs.size() == 1 && !fs::exists(fs::path(inputs[0]) / "config.json")
                                                 ? fs::path(inputs[0]) / "stats.csv"
                                                 : output_dir("", "stats") / "stats.csv")
                                          : fs::path(out_flag);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    save_stats_csv(out, stats);
    std::cout << "runs " << logs.size() << ", points " << stats.points.size() << '\n';
    std::cout << "wrote " << out.string() << '\n';
    return 0;
}

// ---- phase --------------------------------------------------------------------

int cmd_phase(const std::string& run, std::vector<std::uint64_t> checkpoints, std::uint64_t window, int bins,
              const std::string& out_flag) {
    const RunLog log = load_run_log(run);
    if (log.config.env != EnvId::MountainCar) throw AnalysisError("phase plots are defined for MountainCar runs only");
    if (checkpoints.empty())
        for (const auto& [step, _] : log.snapshots) checkpoints.push_back(step);
    if (checkpoints.empty()) throw UsageError("no --checkpoint given and the run has no snapshots");
    const fs::path out = out_flag.empty() ? fs::path(run) / "phase" : fs::path(out_flag);
    fs::create_directories(out);
    for (const auto ckpt : checkpoints) {
        const auto rows = analysis::transition_window(log, ckpt, window);
        const auto h = analysis::phase_histogram(rows, bins, bins);
        const std::string stem = "phase_" + std::to_string(ckpt);
        write_file(out / (stem + ".pgm"), [&](std::ostream& os) { analysis::write_pgm(os, h); });
        write_file(out / (stem + ".csv"), [&](std::ostream& os) { analysis::write_histogram_csv(os, h); });
        write_file(out / ("window_" + std::to_string(ckpt) + ".csv"),
                   [&](std::ostream& os) { envs::write_trace(os, rows, 2); });
        std::uint64_t goals = 0;
        const auto goal = envs::goal_region(EnvId::MountainCar);
        for (const auto& r : rows) goals += goal(r.t.s_next) ? 1 : 0;
        std::cout << "checkpoint " << ckpt << ": " << rows.size() << " transitions, " << goals << " reach the goal\n";
    }
    std::cout << "wrote " << out.string() << '\n';
    return 0;
}

// ---- field --------------------------------------------------------------------

struct FieldArgs {
    std::string snapshot;
    std::string arch = "relu2";
    std::uint64_t seed = 0;
    int grid = 40;
    int trajectories = 10;
    int max_steps = 200;
    std::string out;
};

int cmd_field(const FieldArgs& a) {
    nn::MlpParams net;
    if (!a.snapshot.empty()) {
        net = nn::load_snapshot(a.snapshot);
    } else {
        Rng init = experiment::stream_rng(a.seed, experiment::Stream::Init);
        net = nn::glorot_init(architecture_for(EnvId::MountainCar, arch_preset_from_string(a.arch)), init);
    }
    if (net.input_dim() != 2 || net.output_dim() != 3) throw ShapeError("field needs a MountainCar Q-network (2 -> 3)");
    const fs::path out = output_dir(a.out, "field");
    fs::create_directories(out);

    nlohmann::ordered_json cfg = {{"network", a.snapshot.empty() ? "glorot:" + a.arch : a.snapshot},
                                  {"seed", a.seed},
                                  {"grid", a.grid},
                                  {"trajectories", a.trajectories},
                                  {"max_steps", a.max_steps}};
    std::cout << cfg.dump(2) << '\n';
    write_text(out / "config.json", cfg.dump(2) + "\n");

    const std::pair<const char*, analysis::Policy> policies[] = {{"uncontrolled", analysis::Policy::uncontrolled()},
                                                                 {"controlled", analysis::Policy::greedy(net)}};
    for (const auto& [name, policy] : policies) {
        const auto field = analysis::vector_field(policy, a.grid, a.grid);
        write_file(out / ("field_" + std::string(name) + ".csv"), [&](std::ostream& os) { analysis::write_field_csv(os, field); });
        // Same initial states for both controllers.
        Rng rng = experiment::stream_rng(a.seed, experiment::Stream::Reset);
        const auto trajs = analysis::rollout_random_inits(policy, a.trajectories, a.max_steps, rng);
        write_file(out / ("trajectories_" + std::string(name) + ".csv"),
                   [&](std::ostream& os) { analysis::write_trajectories_csv(os, trajs); });
        std::cout << name << ": " << analysis::goal_count(trajs) << " of " << trajs.size()
                  << " trajectories reach the goal\n";
    }
    std::cout << "wrote " << out.string() << '\n';
    return 0;
}

// ---- verify-env / grad-check -------------------------------------------------

int cmd_verify_env(const std::string& data, double tol) {
    bool ok = true;
    for (EnvId env : {EnvId::MountainCar, EnvId::CartPole, EnvId::Acrobot}) {
        const auto rec = envs::load_recorded_trace(envs::recording_path(data, env));
        const auto r = envs::check_against_recording(env, rec);
        const bool pass = r.passed(tol);
        ok = ok && pass;
        std::cout << (pass ? "PASS " : "FAIL ") << envs::to_string(env) << ": " << r.steps << " steps, " << r.episodes
                  << " episodes, max abs error " << csv::format(r.max_abs_error) << " (step " << r.worst_step
                  << "), termination mismatches " << r.termination_mismatches << '\n';
    }
    if (!ok) throw AnalysisError("environment dynamics deviate from the reference recordings");
    return 0;
}

int cmd_grad_check(int probes, double tol, std::uint64_t seed) {
    bool ok = true;
    Rng rng(seed);
    for (ArchPreset p : {ArchPreset::Linear, ArchPreset::Relu1, ArchPreset::Relu2, ArchPreset::Tanh2}) {
        const auto arch = architecture_for(EnvId::MountainCar, p);
        double worst = 0.0;
        for (int i = 0; i < probes; ++i) {
            const auto probe = nn::random_probe(arch, rng);
            worst = std::max(worst, nn::gradient_check(probe.params, probe.input, probe.output_grad).max_relative_error);
        }
        const bool pass = worst < tol;
        ok = ok && pass;
        std::cout << (pass ? "PASS " : "FAIL ") << to_string(p) << ": max relative error " << csv::format(worst) << " over "
                  << probes << " probes\n";
    }
    if (!ok) throw TrainingError("analytic gradients disagree with finite differences");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Double-DQN lab: greedy exploration on classic-control tasks"};
    app.set_version_flag("--version", std::string(DDQN_VERSION));
    app.require_subcommand(1);

    TrainArgs train;
    auto* t = app.add_subcommand("train", "train one agent and write a run directory");
    t->add_option("--config", train.config_path, "JSON config; flags below override it")->check(CLI::ExistingFile);
    t->add_option("--env", train.env, "mountaincar, cartpole or acrobot")->capture_default_str();
    t->add_option("--epsilon", train.epsilon, "constant exploration rate")->check(CLI::Range(0.0, 1.0));
    t->add_option("--decay-steps", train.decay_steps, "decay epsilon linearly from 1 to 0 over this many steps");
    t->add_option("--arch", train.arch, "linear, relu1, relu2 or tanh2");
    t->add_option("--seed", train.seed);
    t->add_option("--steps", train.steps, "total environment steps");
    t->add_option("--snapshot", train.snapshots, "steps at which to save the online network");
    t->add_option("--trace-capacity", train.trace_capacity, "keep only this many recent transitions (0 = all)");
    t->add_option("--out", train.out, "run directory");

    GridArgs grid;
    auto* g = app.add_subcommand("grid", "run every seed and variant of a figure preset");
    g->add_option("--figure", grid.figure, "1: epsilon ablation, 2: cartpole/acrobot, 3: architectures")
        ->required()
        ->check(CLI::Range(1, 3));
    g->add_option("--jobs", grid.jobs, "runs in parallel")->capture_default_str()->check(CLI::PositiveNumber);
    g->add_option("--steps", grid.steps, "override total environment steps");
    g->add_option("--base-seed", grid.base_seed)->capture_default_str();
    g->add_option("--interval", grid.interval, "stats evaluation interval")->capture_default_str()->check(CLI::PositiveNumber);
    g->add_option("--out", grid.out, "output root");

    std::vector<std::string> stats_in;
    std::uint64_t stats_interval = 1000;
    std::string stats_out;
    auto* s = app.add_subcommand("stats", "aggregate reward statistics over run directories");
    s->add_option("runs", stats_in, "run directories, or a directory of runs")->required();
    s->add_option("--interval", stats_interval)->capture_default_str()->check(CLI::PositiveNumber);
    s->add_option("--out", stats_out, "stats.csv path");

    std::string phase_run, phase_out;
    std::vector<std::uint64_t> phase_ckpt;
    std::uint64_t phase_window = 1000;
    int phase_bins = 100;
    auto* p = app.add_subcommand("phase", "state-visit histograms over transition windows");
    p->add_option("run", phase_run, "MountainCar run directory")->required();
    p->add_option("--checkpoint", phase_ckpt, "window end steps (default: every snapshot)");
    p->add_option("--window", phase_window, "transitions per window")->capture_default_str()->check(CLI::PositiveNumber);
    p->add_option("--bins", phase_bins, "bins per axis")->capture_default_str()->check(CLI::PositiveNumber);
    p->add_option("--out", phase_out);

    FieldArgs field;
    auto* f = app.add_subcommand("field", "vector fields and rollouts of a Q-network controller");
    f->add_option("--snapshot", field.snapshot, "network snapshot; default is a fresh Glorot network")->check(CLI::ExistingFile);
    f->add_option("--arch", field.arch, "architecture of the fresh network")->capture_default_str();
    f->add_option("--seed", field.seed)->capture_default_str();
    f->add_option("--grid", field.grid, "grid points per axis")->capture_default_str()->check(CLI::Range(2, 10000));
    f->add_option("--trajectories", field.trajectories)->capture_default_str()->check(CLI::PositiveNumber);
    f->add_option("--max-steps", field.max_steps)->capture_default_str()->check(CLI::NonNegativeNumber);
    f->add_option("--out", field.out);

    std::string data_dir = DDQN_SOURCE_DATA_DIR;
    double env_tol = 1e-9;
    auto* v = app.add_subcommand("verify-env", "replay reference recordings through the environments");
    v->add_option("--data", data_dir, "directory with reference_<env>.csv")->capture_default_str();
    v->add_option("--tol", env_tol)->capture_default_str();

    int gc_probes = 10;
    double gc_tol = 1e-5;
    std::uint64_t gc_seed = 0;
    auto* gc = app.add_subcommand("grad-check", "finite-difference check of backprop");
    gc->add_option("--probes", gc_probes)->capture_default_str()->check(CLI::PositiveNumber);
    gc->add_option("--tol", gc_tol)->capture_default_str();
    gc->add_option("--seed", gc_seed)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*t) return cmd_train(train);
        if (*g) return cmd_grid(grid);
        if (*s) return cmd_stats(stats_in, stats_interval, stats_out);
        if (*p) return cmd_phase(phase_run, phase_ckpt, phase_window, phase_bins, phase_out);
        if (*f) return cmd_field(field);
        if (*v) return cmd_verify_env(data_dir, env_tol);
        if (*gc) return cmd_grad_check(gc_probes, gc_tol, gc_seed);
    } catch (const std::exception& e) {
        std::cerr << "ddqn_lab: error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}

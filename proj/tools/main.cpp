#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "kto/baselines.hpp"
#include "kto/changepoint.hpp"
#include "kto/errors.hpp"
#include "kto/io.hpp"
#include "kto/operators.hpp"
#include "kto/optimize.hpp"
#include "kto/synth.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace kto;

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Reads a flat JSON object as CLI11 config items, so a command can be
// re-run from the config.json it echoed. The "command" entry scopes every
// key to that subcommand; explicit flags take precedence over the file.
class JsonConfig : public CLI::Config {
public:
    std::string to_config(const CLI::App*, bool, bool, std::string) const override {
        return "{}\n";
    }

    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
        json j;
        try {
            input >> j;
        } catch (const json::exception& e) {
            throw CLI::FileError(std::string("config parse: ") + e.what());
        }
        if (!j.is_object()) throw CLI::FileError("config must be a JSON object");
        std::vector<std::string> parents;
        if (j.contains("command")) parents.push_back(j["command"].get<std::string>());
        std::vector<CLI::ConfigItem> out;
        for (const auto& [key, value] : j.items()) {
            if (key == "command" || value.is_null()) continue;
            CLI::ConfigItem item;
            item.parents = parents;
            item.name = key;
            if (value.is_array()) {
                for (const json& e : value) item.inputs.push_back(scalar(e));
            } else {
                item.inputs.push_back(scalar(value));
            }
            out.push_back(std::move(item));
        }
        return out;
    }

private:
    static std::string scalar(const json& v) {
        if (v.is_string()) return v.get<std::string>();
        return v.dump();
    }
};

void write_json(const fs::path& path, const json& j) {
    write_file_atomic(path, j.dump(2) + "\n");
}

// iteration,value,eta rows of an optimizer run.
std::string trace_csv(const OptimizationResult& r) {
    std::string out = "iteration,value,eta\n";
    for (const TracePoint& p : r.trace) {
        out += std::to_string(p.iteration) + ',' + fmt(p.value) + ',' + fmt(p.eta) + '\n';
    }
    return out;
}

// index,re,im,modulus,timescale rows, 1-based index.
std::string eigenvalues_csv(const Eigen::VectorXcd& values, double lag_time) {
    std::string out = "index,re,im,modulus,timescale\n";
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        const std::complex<double> ev = values[i];
        out += std::to_string(i + 1) + ',' + fmt(ev.real()) + ',' + fmt(ev.imag()) + ',' +
               fmt(std::abs(ev)) + ',' + fmt(timescale(ev, lag_time)) + '\n';
    }
    return out;
}

// index,time,re_phi_j,im_phi_j,... rows; time is in steps when dt is unknown.
std::string series_csv(const Eigen::MatrixXcd& series, const std::vector<std::size_t>& indices,
                       double step_time) {
    std::string out = "index,time";
    for (std::size_t j : indices) {
        out += ",re_phi_" + std::to_string(j) + ",im_phi_" + std::to_string(j);
    }
    out += '\n';
    for (Eigen::Index t = 0; t < series.rows(); ++t) {
        out += std::to_string(t) + ',' + fmt(static_cast<double>(t) * step_time);
        for (std::size_t j : indices) {
            const std::complex<double> v = series(t, static_cast<Eigen::Index>(j - 1));
            out += ',' + fmt(v.real()) + ',' + fmt(v.imag());
        }
        out += '\n';
    }
    return out;
}

std::vector<std::size_t> all_indices(std::size_t m) {
    std::vector<std::size_t> idx(m);
    for (std::size_t j = 0; j < m; ++j) idx[j] = j + 1;
    return idx;
}

void require_flag(bool given, const std::string& name) {
    if (!given) throw InvalidArgument(name + " is required (flag or config entry)");
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
    std::string preset = "triple-well";
    std::string out;
    std::optional<std::uint64_t> seed;
    // triple-well family
    std::size_t steps = SdeConfig{}.n_steps;
    double dt = SdeConfig{}.dt;
    double diffusion = SdeConfig{}.diffusion;
    double x0 = SdeConfig{}.x0;
    std::size_t stride = SdeConfig{}.store_stride;
    std::vector<double> coeffs;
    // pendulum family
    std::size_t frames = PendulumConfig{}.n_frames;
    std::size_t width = PendulumConfig{}.width;
    std::size_t height = PendulumConfig{}.height;
    std::size_t period = PendulumConfig{}.period_frames;
    double amplitude = PendulumConfig{}.amplitude_px;
    double noise = PendulumConfig{}.noise_sigma;
    double blob_sigma = PendulumConfig{}.blob_sigma;
    double blob_peak = PendulumConfig{}.blob_peak;
};

void run_simulate_triple_well(const SimulateArgs& a) {
    SdeConfig cfg;
    cfg.n_steps = a.steps;
    cfg.dt = a.dt;
    cfg.diffusion = a.diffusion;
    cfg.x0 = a.x0;
    cfg.store_stride = a.stride;
    cfg.seed = a.seed.value_or(cfg.seed);
    if (!a.coeffs.empty()) cfg.potential = Potential(a.coeffs);

    const SimResult sim = simulate(cfg);
    const double stored_dt = cfg.dt * static_cast<double>(cfg.store_stride);

    std::string traj_csv = "stored_index,time,x\n";
    std::string labels_csv = "stored_index,label\n";
    for (std::size_t i = 0; i < sim.trajectory.count(); ++i) {
        const std::string idx = std::to_string(i);
        traj_csv += idx + ',' + fmt(static_cast<double>(i) * stored_dt) + ',' +
                    fmt(sim.trajectory.snapshot(i)[0]) + '\n';
        labels_csv += idx + ',' + std::to_string(sim.well_labels[i]) + '\n';
    }

    json echo;
    echo["command"] = "simulate";
    echo["preset"] = "triple-well";
    echo["steps"] = cfg.n_steps;
    echo["dt"] = cfg.dt;
    echo["diffusion"] = cfg.diffusion;
    echo["x0"] = cfg.x0;
    echo["stride"] = cfg.store_stride;
    echo["seed"] = cfg.seed;
    echo["coeffs"] = cfg.potential.coefficients();

    const fs::path out(a.out);
    save_kto1(sim.trajectory, out / "trajectory.kto1");
    write_file_atomic(out / "trajectory.csv", traj_csv);
    write_file_atomic(out / "well_labels.csv", labels_csv);
    write_json(out / "config.json", echo);
}

void run_simulate_pendulum(const SimulateArgs& a) {
    PendulumConfig cfg;
    cfg.n_frames = a.frames;
    cfg.width = a.width;
    cfg.height = a.height;
    cfg.period_frames = a.period;
    cfg.amplitude_px = a.amplitude;
    cfg.noise_sigma = a.noise;
    cfg.blob_sigma = a.blob_sigma;
    cfg.blob_peak = a.blob_peak;
    cfg.seed = a.seed.value_or(cfg.seed);

    const SnapshotSet frames = render_pendulum(cfg);

    json echo;
    echo["command"] = "simulate";
    echo["preset"] = "pendulum";
    echo["frames"] = cfg.n_frames;
    echo["width"] = cfg.width;
    echo["height"] = cfg.height;
    echo["period"] = cfg.period_frames;
    echo["amplitude"] = cfg.amplitude_px;
    echo["noise"] = cfg.noise_sigma;
    echo["blob-sigma"] = cfg.blob_sigma;
    echo["blob-peak"] = cfg.blob_peak;
    echo["seed"] = cfg.seed;

    const fs::path out(a.out);
    save_image_dir(frames, out / "frames");
    write_json(out / "config.json", echo);
}

// ---------------------------------------------------------------------------
// shared fit-style input handling

struct DataArgs {
    std::string input;
    std::optional<double> dt;
    std::size_t lag = 1;
    std::size_t stride = 1;
    std::optional<std::size_t> max_pairs;
};

void add_data_options(CLI::App* cmd, DataArgs& a) {
    cmd->add_option("--input", a.input, "trajectory: KTO1 file, CSV file, or frame directory");
    cmd->add_option("--dt", a.dt, "time between consecutive snapshots");
    cmd->add_option("--lag", a.lag, "lag in snapshot indices")->check(CLI::PositiveNumber);
    cmd->add_option("--stride", a.stride, "subsample window starts by this stride")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--max-pairs", a.max_pairs,
                    "cap the pair count by raising the stride (overrides --stride)")
        ->check(CLI::PositiveNumber);
}

// Loads the trajectory and resolves --max-pairs into a concrete stride so
// the echoed config pins the exact subsampling.
PairedDataset load_pairs(DataArgs& a) {
    require_flag(!a.input.empty(), "--input");
    const SnapshotSet traj = load_snapshots_auto(a.input, a.dt);
    if (a.max_pairs) {
        if (traj.count() <= a.lag) throw LagTooLarge("--lag leaves no pairs");
        const std::size_t available = (traj.count() - a.lag + a.stride - 1) / a.stride;
        if (available > *a.max_pairs) {
            a.stride = (traj.count() - a.lag + *a.max_pairs - 1) / *a.max_pairs;
        }
        a.max_pairs.reset();
    }
    return from_trajectory(traj, a.lag, a.stride);
}

void echo_data(json& echo, const DataArgs& a) {
    echo["input"] = a.input;
    if (a.dt) echo["dt"] = *a.dt;
    echo["lag"] = a.lag;
    echo["stride"] = a.stride;
}

// ---------------------------------------------------------------------------
// fit

struct FitArgs {
    DataArgs data;
    std::string kernel = "gaussian";
    double sigma = 0.0;
    int degree = 2;
    double offset = 1.0;
    std::optional<double> epsilon;
    std::string op = "koopman";
    std::size_t num_eigs = 10;
    std::string out;
};

KernelSpec kernel_from_args(const FitArgs& a) {
    if (a.kernel == "gaussian") {
        if (a.sigma <= 0.0) throw InvalidArgument("--sigma must be positive for the Gaussian kernel");
        return KernelSpec::gaussian(a.sigma);
    }
    return KernelSpec::polynomial(a.degree, a.offset);
}

void echo_fit(json& echo, const FitArgs& a) {
    echo_data(echo, a.data);
    echo["kernel"] = a.kernel;
    if (a.kernel == "gaussian") {
        echo["sigma"] = a.sigma;
    } else {
        echo["degree"] = a.degree;
        echo["offset"] = a.offset;
    }
    echo["epsilon"] = *a.epsilon;
    echo["operator"] = a.op;
    echo["num-eigs"] = a.num_eigs;
}

void run_fit(FitArgs& a) {
    require_flag(a.epsilon.has_value(), "--epsilon");
    const PairedDataset data = load_pairs(a.data);
    const KernelSpec kernel = kernel_from_args(a);
    const OperatorKind kind = operator_kind_from_name(a.op);
    const EigenDecomposition dec = fit(data, kernel, *a.epsilon, kind, a.num_eigs);

    const Eigen::MatrixXcd series = eigenfunction_series_all(dec, data.x);
    const double step_time = static_cast<double>(a.data.stride) * a.data.dt.value_or(1.0);

    json echo;
    echo["command"] = "fit";
    echo_fit(echo, a);

    const fs::path out(a.out);
    save_decomposition(dec, out / "decomposition.json");
    write_file_atomic(out / "eigenvalues.csv", eigenvalues_csv(dec.eigenvalues(), dec.lag_time()));
    write_file_atomic(out / "series.csv",
                      series_csv(series, all_indices(dec.num_eigenpairs()), step_time));
    write_json(out / "config.json", echo);
}

// ---------------------------------------------------------------------------
// summarize

struct SummarizeArgs {
    std::string decomposition;
    std::vector<std::size_t> indices;
    std::string starts = "best";
    double shrink = 0.5;
    double grow = 1.1;
    std::size_t max_iters = OptimizeConfig{}.max_iters;
    std::optional<double> eta0;
    std::optional<double> eta_min;
    std::optional<double> tol;
    std::vector<double> bounds;
    std::string out;
};

void save_snapshot(const SnapshotSet& training, const Eigen::VectorXd& x, const fs::path& stem) {
    const std::vector<std::size_t>& shape = training.shape();
    const SnapshotSet single(shape, 1, std::vector<double>(x.data(), x.data() + x.size()));
    const bool gray = shape.size() == 2;
    const bool rgb = shape.size() == 3 && shape[2] == 3;
    if (gray || rgb) {
        // Images clip to the displayable range instead of failing on the
        // few out-of-range pixels an unbounded run can produce.
        std::vector<double> clipped(single.data());
        for (double& v : clipped) v = std::clamp(v, 0.0, 255.0);
        save_image(SnapshotSet(shape, 1, std::move(clipped)), 0,
                   fs::path(stem).concat(gray ? ".pgm" : ".ppm"));
    } else {
        save_kto1(single, fs::path(stem).concat(".kto1"));
        save_csv(single, fs::path(stem).concat(".csv"));
    }
}

void run_summarize(SummarizeArgs& a) {
    require_flag(!a.decomposition.empty(), "--decomposition");
    require_flag(!a.indices.empty(), "--indices");
    if (!a.bounds.empty() && a.bounds.size() != 2) {
        throw InvalidArgument("--bounds takes exactly two values: lo,hi");
    }
    const EigenDecomposition dec = load_decomposition(a.decomposition);

    OptimizeConfig cfg;
    cfg.shrink = a.shrink;
    cfg.grow = a.grow;
    cfg.max_iters = a.max_iters;
    cfg.eta0 = a.eta0;
    cfg.eta_min = a.eta_min;
    cfg.tol = a.tol;
    if (!a.bounds.empty()) cfg.bounds = Bounds{a.bounds[0], a.bounds[1]};
    const StartPolicy starts =
        a.starts == "mean" ? StartPolicy::MeanSnapshot : StartPolicy::BestObserved;

    const std::vector<SummaryPair> sums = summarize_all(dec, a.indices, starts, cfg);

    json echo;
    echo["command"] = "summarize";
    echo["decomposition"] = a.decomposition;
    echo["indices"] = a.indices;
    echo["starts"] = a.starts;
    echo["shrink"] = a.shrink;
    echo["grow"] = a.grow;
    echo["max-iters"] = a.max_iters;
    if (a.eta0) echo["eta0"] = *a.eta0;
    if (a.eta_min) echo["eta-min"] = *a.eta_min;
    if (a.tol) echo["tol"] = *a.tol;
    if (!a.bounds.empty()) echo["bounds"] = a.bounds;

    const fs::path out(a.out);
    for (const SummaryPair& p : sums) {
        const std::string base = "phi_" + std::to_string(p.index);
        save_snapshot(dec.training_x(), p.min_result.x_star, out / (base + "_min"));
        save_snapshot(dec.training_x(), p.max_result.x_star, out / (base + "_max"));
        write_file_atomic(out / (base + "_min_trace.csv"), trace_csv(p.min_result));
        write_file_atomic(out / (base + "_max_trace.csv"), trace_csv(p.max_result));
    }
    write_json(out / "config.json", echo);
}

// ---------------------------------------------------------------------------
// changepoints

struct ChangepointArgs {
    std::string decomposition;
    std::string input;
    std::optional<double> dt;
    std::vector<std::size_t> indices;
    double rel_threshold = DetectOptions{}.rel_threshold;
    std::size_t min_separation = DetectOptions{}.min_separation;
    bool rolling_median = false;
    std::size_t median_window = DetectOptions{}.median_window;
    std::string out;
};

void run_changepoints(ChangepointArgs& a) {
    require_flag(!a.decomposition.empty(), "--decomposition");
    require_flag(!a.input.empty(), "--input");
    require_flag(!a.indices.empty(), "--indices");
    const EigenDecomposition dec = load_decomposition(a.decomposition);
    const SnapshotSet traj = load_snapshots_auto(a.input, a.dt);

    DetectOptions opts;
    opts.rel_threshold = a.rel_threshold;
    opts.min_separation = a.min_separation;
    opts.rolling_median = a.rolling_median;
    opts.median_window = a.median_window;
    const ChangePointReport report = detect(dec, traj, a.indices, opts);

    std::string csv = "time_index,eigen_index,jump,timescale\n";
    json events = json::array();
    for (const ChangePointEvent& e : report.events) {
        csv += std::to_string(e.time_index) + ',' + std::to_string(e.eigen_index) + ',' +
               fmt(e.jump) + ',' + fmt(e.timescale) + '\n';
        events.push_back({{"time_index", e.time_index},
                          {"eigen_index", e.eigen_index},
                          {"jump", e.jump},
                          {"timescale", e.timescale}});
    }
    json thresholds;
    for (const auto& [j, thr] : report.threshold_used) thresholds[std::to_string(j)] = thr;

    Eigen::MatrixXcd series(static_cast<Eigen::Index>(traj.count()),
                            static_cast<Eigen::Index>(a.indices.size()));
    for (std::size_t c = 0; c < a.indices.size(); ++c) {
        series.col(static_cast<Eigen::Index>(c)) =
            report.series.at(a.indices[c]).cast<std::complex<double>>();
    }
    std::string series_out = "index,time";
    for (std::size_t j : a.indices) series_out += ",re_phi_" + std::to_string(j);
    series_out += '\n';
    const double step = a.dt.value_or(1.0);
    for (Eigen::Index t = 0; t < series.rows(); ++t) {
        series_out += std::to_string(t) + ',' + fmt(static_cast<double>(t) * step);
        for (Eigen::Index c = 0; c < series.cols(); ++c) {
            series_out += ',' + fmt(series(t, c).real());
        }
        series_out += '\n';
    }

    json report_json;
    report_json["format"] = "kto-changepoints-v1";
    report_json["events"] = events;
    report_json["threshold_used"] = thresholds;

    json echo;
    echo["command"] = "changepoints";
    echo["decomposition"] = a.decomposition;
    echo["input"] = a.input;
    if (a.dt) echo["dt"] = *a.dt;
    echo["indices"] = a.indices;
    echo["rel-threshold"] = a.rel_threshold;
    echo["min-separation"] = a.min_separation;
    echo["rolling-median"] = a.rolling_median;
    echo["median-window"] = a.median_window;

    const fs::path out(a.out);
    write_file_atomic(out / "changepoints.csv", csv);
    write_json(out / "changepoints.json", report_json);
    write_file_atomic(out / "series.csv", series_out);
    write_json(out / "config.json", echo);
}

// ---------------------------------------------------------------------------
// dmd

struct DmdArgs {
    DataArgs data;
    std::optional<std::size_t> rank;
    std::string out;
};

void run_dmd(DmdArgs& a) {
    const PairedDataset data = load_pairs(a.data);
    const DmdResult dmd = exact_dmd(data, a.rank);
    const double lag_time =
        static_cast<double>(a.data.lag) * a.data.dt.value_or(1.0);

    json echo;
    echo["command"] = "dmd";
    echo_data(echo, a.data);
    if (a.rank) echo["rank"] = *a.rank;

    const fs::path out(a.out);
    write_file_atomic(out / "eigenvalues.csv", eigenvalues_csv(dmd.eigenvalues, lag_time));
    save_dmd(dmd, out / "dmd.json");
    write_json(out / "config.json", echo);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"kernel transfer operator toolkit"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "JSON config echoed by a previous run; explicit flags win");
    app.config_formatter(std::make_shared<JsonConfig>());

    SimulateArgs sim_args;
    CLI::App* sim = app.add_subcommand("simulate", "generate a synthetic dataset");
    sim->add_option("--preset", sim_args.preset, "triple-well or pendulum")
        ->check(CLI::IsMember({"triple-well", "pendulum"}));
    sim->add_option("--seed", sim_args.seed, "RNG seed (default 42 / 7 per preset)");
    sim->add_option("--steps", sim_args.steps, "integrator steps")->check(CLI::PositiveNumber);
    sim->add_option("--dt", sim_args.dt, "integrator step size")->check(CLI::PositiveNumber);
    sim->add_option("--diffusion", sim_args.diffusion, "diffusion coefficient D")
        ->check(CLI::PositiveNumber);
    sim->add_option("--x0", sim_args.x0, "initial state");
    sim->add_option("--stride", sim_args.stride, "store every n-th state")
        ->check(CLI::PositiveNumber);
    sim->add_option("--coeffs", sim_args.coeffs,
                    "potential polynomial coefficients, ascending degree")
        ->delimiter(',');
    sim->add_option("--frames", sim_args.frames, "pendulum frame count")
        ->check(CLI::PositiveNumber);
    sim->add_option("--width", sim_args.width, "frame width")->check(CLI::PositiveNumber);
    sim->add_option("--height", sim_args.height, "frame height")->check(CLI::PositiveNumber);
    sim->add_option("--period", sim_args.period, "swing period in frames")
        ->check(CLI::PositiveNumber);
    sim->add_option("--amplitude", sim_args.amplitude, "swing amplitude in pixels");
    sim->add_option("--noise", sim_args.noise, "per-pixel noise sigma");
    sim->add_option("--blob-sigma", sim_args.blob_sigma, "blob radius in pixels");
    sim->add_option("--blob-peak", sim_args.blob_peak, "blob peak intensity");
    sim->add_option("--out", sim_args.out, "output directory")->required();
    sim->callback([&] {
        fs::create_directories(sim_args.out);
        if (sim_args.preset == "pendulum") {
            run_simulate_pendulum(sim_args);
        } else {
            run_simulate_triple_well(sim_args);
        }
    });

    FitArgs fit_args;
    CLI::App* fit_cmd = app.add_subcommand("fit", "estimate a kernel transfer operator");
    add_data_options(fit_cmd, fit_args.data);
    fit_cmd->add_option("--kernel", fit_args.kernel, "kernel family")
        ->check(CLI::IsMember({"gaussian", "polynomial"}));
    fit_cmd->add_option("--sigma", fit_args.sigma, "Gaussian bandwidth");
    fit_cmd->add_option("--degree", fit_args.degree, "polynomial degree")
        ->check(CLI::PositiveNumber);
    fit_cmd->add_option("--offset", fit_args.offset, "polynomial offset c");
    fit_cmd->add_option("--epsilon", fit_args.epsilon, "ridge regularization");
    fit_cmd->add_option("--operator", fit_args.op, "koopman or pf")
        ->check(CLI::IsMember({"koopman", "pf"}));
    fit_cmd->add_option("--num-eigs", fit_args.num_eigs, "eigenpairs to keep")
        ->check(CLI::PositiveNumber);
    fit_cmd->add_option("--out", fit_args.out, "output directory")->required();
    fit_cmd->callback([&] {
        fs::create_directories(fit_args.out);
        run_fit(fit_args);
    });

    SummarizeArgs sum_args;
    CLI::App* sum = app.add_subcommand("summarize", "optimize eigenfunction extrema");
    sum->add_option("--decomposition", sum_args.decomposition, "decomposition JSON from fit");
    sum->add_option("--indices", sum_args.indices, "1-based eigenfunction indices")
        ->delimiter(',');
    sum->add_option("--starts", sum_args.starts, "start policy")
        ->check(CLI::IsMember({"best", "mean"}));
    sum->add_option("--shrink", sum_args.shrink, "step shrink factor");
    sum->add_option("--grow", sum_args.grow, "step growth factor");
    sum->add_option("--max-iters", sum_args.max_iters, "accepted-step budget");
    sum->add_option("--eta0", sum_args.eta0, "initial step size");
    sum->add_option("--eta-min", sum_args.eta_min, "termination step size");
    sum->add_option("--tol", sum_args.tol, "minimum accepted improvement");
    sum->add_option("--bounds", sum_args.bounds, "box constraint lo,hi")->delimiter(',');
    sum->add_option("--out", sum_args.out, "output directory")->required();
    sum->callback([&] {
        fs::create_directories(sum_args.out);
        run_summarize(sum_args);
    });

    ChangepointArgs cp_args;
    CLI::App* cp = app.add_subcommand("changepoints", "detect eigenfunction jumps");
    cp->add_option("--decomposition", cp_args.decomposition, "decomposition JSON from fit");
    cp->add_option("--input", cp_args.input, "trajectory to scan");
    cp->add_option("--dt", cp_args.dt, "time between trajectory snapshots");
    cp->add_option("--indices", cp_args.indices, "1-based eigenfunction indices")
        ->delimiter(',');
    cp->add_option("--rel-threshold", cp_args.rel_threshold, "jump threshold relative to range");
    cp->add_option("--min-separation", cp_args.min_separation, "suppression window");
    cp->add_flag("--rolling-median", cp_args.rolling_median, "median-filter the series first");
    cp->add_option("--median-window", cp_args.median_window, "odd filter window");
    cp->add_option("--out", cp_args.out, "output directory")->required();
    cp->callback([&] {
        fs::create_directories(cp_args.out);
        run_changepoints(cp_args);
    });

    DmdArgs dmd_args;
    CLI::App* dmd = app.add_subcommand("dmd", "exact DMD baseline spectrum");
    add_data_options(dmd, dmd_args.data);
    dmd->add_option("--rank", dmd_args.rank, "SVD truncation rank");
    dmd->add_option("--out", dmd_args.out, "output directory")->required();
    dmd->callback([&] {
        fs::create_directories(dmd_args.out);
        run_dmd(dmd_args);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

#include "tyshrink/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "tyshrink/anomaly.hpp"
#include "tyshrink/csv.hpp"
#include "tyshrink/estimators.hpp"
#include "tyshrink/simulation.hpp"

namespace tyshrink::cli {

namespace {

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct DistributionFlag {
    DistributionKind kind = DistributionKind::StudentT;
    double dof = 3.0;
};

DistributionFlag parse_distribution(const std::string& text) {
    if (text == "gaussian") {
        return {DistributionKind::Gaussian, 0.0};
    }
    constexpr std::string_view prefix = "student-t:";
    if (text.rfind(prefix, 0) == 0) {
        double dof = 0.0;
        try {
            dof = csv::parse_real(std::string_view(text).substr(prefix.size()));
        } catch (const csv::ParseError&) {
            throw UsageError("--dist: bad degrees of freedom in '" + text + "'");
        }
        if (!(dof > 0.0) || !std::isfinite(dof)) {
            throw UsageError("--dist: degrees of freedom must be > 0");
        }
        return {DistributionKind::StudentT, dof};
    }
    throw UsageError("--dist must be 'gaussian' or 'student-t:<dof>', got '" + text + "'");
}

Pilot parse_pilot(const std::string& text) {
    if (text == "normalized") return Pilot::NormalizedSampleCov;
    if (text == "lw") return Pilot::LedoitWolf;
    throw UsageError("--pilot must be 'normalized' or 'lw'");
}

EstimatorId parse_estimator(const std::string& text) {
    const auto id = parse_estimator_id(text);
    if (!id) {
        throw UsageError("unknown estimator '" + text + "'");
    }
    return *id;
}

std::vector<EstimatorId> parse_estimator_list(const std::string& text) {
    std::vector<EstimatorId> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) {
            out.push_back(parse_estimator(item));
        }
    }
    if (out.empty()) {
        throw UsageError("--estimators is empty");
    }
    return out;
}

void check_output_path(const std::string& path) {
    if (path == "-") {
        return;
    }
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty() && !std::filesystem::is_directory(parent)) {
        throw UsageError("output directory does not exist: " + parent.string());
    }
}

// Writes through `write` to a file, or to `out` when path is "-".
template <typename Writer>
void emit(const std::string& path, std::ostream& out, Writer&& write) {
    if (path == "-") {
        write(out);
        return;
    }
    std::ofstream file(path);
    if (!file) {
        throw UsageError("cannot write '" + path + "'");
    }
    write(file);
}

FixedPointConfig fixed_point_config(double tol, int max_iter) {
    if (!(tol > 0.0) || max_iter < 1) {
        throw UsageError("--tol must be > 0 and --max-iter >= 1");
    }
    FixedPointConfig config;
    config.tolerance = tol;
    config.max_iterations = max_iter;
    return config;
}

std::string rho_source(RhoProvenance provenance) {
    switch (provenance) {
        case RhoProvenance::Oracle: return "oracle";
        case RhoProvenance::PlugIn: return "plugin";
        case RhoProvenance::Fixed: return "fixed";
    }
    return "unknown";
}

int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::ZeroSample:
        case ErrorCode::DegenerateData:
        case ErrorCode::DegenerateLabels: return kDegenerate;
        case ErrorCode::InvalidParameter:
        case ErrorCode::DimensionMismatch: return kUsage;
        default: return kNumeric;
    }
}

struct FixedPointFlags {
    double tol = 1e-8;
    int max_iter = 200;

    void attach(CLI::App* app) {
        app->add_option("--tol", tol, "Relative Frobenius change that stops the iteration");
        app->add_option("--max-iter", max_iter, "Iteration cap");
    }
};

struct EstimateFlags {
    std::string input;
    std::string output;
    bool header = false;
    std::string estimator = "proposed";
    std::optional<double> rho;
    std::string pilot = "normalized";
    FixedPointFlags fixed_point;
};

int cmd_estimate(const EstimateFlags& flags, std::ostream& out) {
    check_output_path(flags.output);
    const EstimatorId id = parse_estimator(flags.estimator);
    const Pilot pilot = parse_pilot(flags.pilot);
    const FixedPointConfig config = fixed_point_config(flags.fixed_point.tol, flags.fixed_point.max_iter);
    if (flags.rho && id != EstimatorId::Proposed) {
        throw UsageError("--rho applies to the proposed estimator only");
    }
    if (flags.rho && !(*flags.rho > 0.0 && *flags.rho <= 1.0)) {
        throw UsageError("--rho must lie in (0, 1]");
    }

    const SampleMatrix samples = csv::read_matrix_file(flags.input, flags.header);

    std::optional<ShrinkageCoefficient> rho;
    CovarianceEstimate est = [&]() {
        switch (id) {
            case EstimatorId::Sample: return sample_covariance(samples);
            case EstimatorId::Normalized: return normalized_sample_covariance(samples);
            case EstimatorId::Tyler: return tyler_ml(samples, config);
            case EstimatorId::LedoitWolf: return ledoit_wolf(samples);
            case EstimatorId::Proposed:
                rho = flags.rho ? ShrinkageCoefficient::fixed(*flags.rho) : plugin_rho(samples, pilot);
                return regularized_tyler(samples, *rho, config);
            default:
                throw UsageError("estimator '" + flags.estimator + "' needs ground truth; use simulate");
        }
    }();

    emit(flags.output, out, [&](std::ostream& os) { csv::write_matrix(os, est.matrix.dense()); });

    out << "estimator=" << to_string(id) << '\n';
    out << "n=" << samples.rows() << '\n';
    out << "p=" << samples.cols() << '\n';
    if (rho) {
        out << "rho=" << csv::format_real(rho->value()) << '\n';
        out << "rho_source=" << rho_source(rho->provenance()) << '\n';
    } else if (est.shrinkage) {
        out << "rho=" << csv::format_real(*est.shrinkage) << '\n';
        out << "rho_source=" << to_string(id) << '\n';
    }
    out << "iterations=" << est.iterations_used << '\n';
    out << "residual=" << csv::format_real(est.final_residual) << '\n';
    out << "converged=" << (est.converged ? "true" : "false") << '\n';
    out << "trace_normalized=" << (est.trace_normalized ? "true" : "false") << '\n';
    return kSuccess;
}

struct SimulateFlags {
    long p = 20;
    long n_start = 10;
    long n_stop = 100;
    long n_step = 10;
    int trials = 100;
    std::string dist = "student-t:3";
    double r = 0.7;
    std::string estimators = "proposed,lw,lw-clairvoyant,tyler,oracle";
    std::string pilot = "normalized";
    std::uint64_t seed = 1;
    int threads = 1;
    std::string output = "-";
    FixedPointFlags fixed_point;
};

int cmd_simulate(const SimulateFlags& flags, std::ostream& out) {
    check_output_path(flags.output);
    if (flags.p < 2) throw UsageError("--p must be >= 2");
    if (flags.n_start < 1 || flags.n_step < 1 || flags.n_stop < flags.n_start) {
        throw UsageError("need 1 <= --n-start <= --n-stop and --n-step >= 1");
    }
    if (flags.trials < 1) throw UsageError("--trials must be >= 1");
    if (flags.threads < 1) throw UsageError("--threads must be >= 1");
    if (!(flags.r >= 0.0 && flags.r < 1.0)) throw UsageError("--r must lie in [0, 1)");

    const DistributionFlag dist = parse_distribution(flags.dist);
    ExperimentPlan plan;
    plan.p = flags.p;
    for (long n = flags.n_start; n <= flags.n_stop; n += flags.n_step) {
        plan.n_values.push_back(n);
    }
    plan.trials = flags.trials;
    plan.distribution = dist.kind;
    plan.dof = dist.dof;
    plan.r = flags.r;
    plan.estimators = parse_estimator_list(flags.estimators);
    plan.pilot = parse_pilot(flags.pilot);
    plan.master_seed = flags.seed;
    plan.threads = flags.threads;
    plan.fixed_point = fixed_point_config(flags.fixed_point.tol, flags.fixed_point.max_iter);

    const auto records = run_mse_experiment(plan);
    emit(flags.output, out, [&](std::ostream& os) {
        os << "estimator,n,trials,failures,mse_mean,mse_std\n";
        for (const auto& rec : records) {
            os << to_string(rec.estimator) << ',' << rec.n << ',' << rec.trials << ',' << rec.failures << ','
               << csv::format_real(rec.mse_mean) << ',' << csv::format_real(rec.mse_std) << '\n';
        }
    });
    return kSuccess;
}

struct OracleGridFlags {
    long p = 20;
    long n = 30;
    std::string dist = "student-t:3";
    double r = 0.7;
    double step = 0.05;
    int trials = 2000;
    std::uint64_t seed = 1;
    int threads = 1;
    std::string output = "-";
};

int cmd_oracle_grid(const OracleGridFlags& flags, std::ostream& out, std::ostream& err) {
    check_output_path(flags.output);
    if (flags.p < 2 || flags.n < 1) throw UsageError("need --p >= 2 and --n >= 1");
    if (flags.trials < 1) throw UsageError("--trials must be >= 1");
    if (!(flags.step > 0.0 && flags.step <= 1.0)) throw UsageError("--step must lie in (0, 1]");
    if (!(flags.r >= 0.0 && flags.r < 1.0)) throw UsageError("--r must lie in [0, 1)");
    const DistributionFlag dist = parse_distribution(flags.dist);

    const auto grid = rho_grid(flags.step);
    const auto points = run_oracle_grid(flags.p, flags.n, dist.kind, dist.dof, flags.r, grid, flags.trials,
                                        flags.seed, flags.threads);
    emit(flags.output, out, [&](std::ostream& os) {
        os << "rho,mse\n";
        for (const auto& pt : points) {
            os << csv::format_real(pt.rho) << ',' << csv::format_real(pt.mse) << '\n';
        }
    });
    const auto best = std::min_element(points.begin(), points.end(),
                                       [](const auto& a, const auto& b) { return a.mse < b.mse; });
    std::ostream& summary = flags.output == "-" ? err : out;
    summary << "oracle_rho=" << csv::format_real(oracle_rho(ar1_covariance(flags.p, flags.r), flags.n).value())
            << '\n';
    summary << "argmin_rho=" << csv::format_real(best->rho) << '\n';
    return kSuccess;
}

struct DetectFlags {
    std::string input;
    std::string labels;
    bool header = false;
    bool synthetic = false;
    long p = 20;
    long length = 2000;
    double anomaly_rate = 0.1;
    double magnitude = 1.0;
    double drift = 0.0;
    std::string dist = "student-t:3";
    double r = 0.7;
    long train_size = 200;
    std::string train_range;
    int window = 50;
    std::string estimator = "proposed";
    std::optional<double> rho;
    std::string pilot = "normalized";
    std::uint64_t seed = 1;
    std::string output = "-";
    std::string scores_output;
    FixedPointFlags fixed_point;
};

std::pair<Eigen::Index, Eigen::Index> parse_range(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) {
        throw UsageError("--train-range must look like a:b");
    }
    try {
        const auto a = static_cast<Eigen::Index>(std::stoll(text.substr(0, colon)));
        const auto b = static_cast<Eigen::Index>(std::stoll(text.substr(colon + 1)));
        return {a, b};
    } catch (const std::exception&) {
        throw UsageError("--train-range must look like a:b");
    }
}

Eigen::VectorXi read_labels(const std::string& path, bool header) {
    const Eigen::MatrixXd raw = csv::read_matrix_file(path, header);
    if (raw.cols() != 1) {
        throw UsageError("labels file must have exactly one column");
    }
    Eigen::VectorXi labels(raw.rows());
    for (Eigen::Index k = 0; k < raw.rows(); ++k) {
        if (raw(k, 0) != 0.0 && raw(k, 0) != 1.0) {
            throw UsageError("labels must be 0 or 1");
        }
        labels(k) = static_cast<int>(raw(k, 0));
    }
    return labels;
}

int cmd_detect(const DetectFlags& flags, std::ostream& out) {
    check_output_path(flags.output);
    if (!flags.scores_output.empty()) {
        check_output_path(flags.scores_output);
    }
    if (flags.synthetic == !flags.input.empty()) {
        throw UsageError("give exactly one of --input or --synthetic");
    }
    if (flags.synthetic && !flags.labels.empty()) {
        throw UsageError("--labels cannot be combined with --synthetic");
    }
    if (flags.window < 1) throw UsageError("--window must be >= 1");

    DetectionConfig config;
    config.estimator = parse_estimator(flags.estimator);
    config.pilot = parse_pilot(flags.pilot);
    config.fixed_rho = flags.rho;
    if (flags.rho && config.estimator != EstimatorId::Proposed) {
        throw UsageError("--rho applies to the proposed estimator only");
    }
    if (flags.rho && !(*flags.rho > 0.0 && *flags.rho <= 1.0)) {
        throw UsageError("--rho must lie in (0, 1]");
    }
    config.window = flags.window;
    config.train_size = flags.train_size;
    if (!flags.train_range.empty()) {
        config.train_range = parse_range(flags.train_range);
    }
    config.fixed_point = fixed_point_config(flags.fixed_point.tol, flags.fixed_point.max_iter);

    TimeSeriesSet series;
    if (flags.synthetic) {
        if (flags.p < 1 || flags.length < 1) throw UsageError("need --p >= 1 and --T >= 1");
        if (!(flags.anomaly_rate > 0.0 && flags.anomaly_rate < 1.0)) {
            throw UsageError("--anomaly-rate must lie in (0, 1)");
        }
        if (!(flags.magnitude >= 0.0)) throw UsageError("--magnitude must be >= 0");
        if (!(flags.r >= 0.0 && flags.r < 1.0)) throw UsageError("--r must lie in [0, 1)");
        const DistributionFlag dist = parse_distribution(flags.dist);
        SyntheticSeriesConfig synth;
        synth.length = flags.length;
        synth.channels = flags.p;
        synth.dof = dist.kind == DistributionKind::Gaussian ? 0.0 : dist.dof;
        synth.r = flags.r;
        synth.anomaly_rate = flags.anomaly_rate;
        synth.magnitude = flags.magnitude;
        synth.drift_amplitude = flags.drift;
        series = synthetic_series(synth, RngSeed{flags.seed, 1});
    } else {
        series.data = csv::read_matrix_file(flags.input, flags.header);
        if (!flags.labels.empty()) {
            series.labels = read_labels(flags.labels, flags.header);
            if (series.labels->size() != series.data.rows()) {
                throw UsageError("labels length " + std::to_string(series.labels->size()) +
                                 " != data length " + std::to_string(series.data.rows()));
            }
        }
    }
    if (series.labels && (series.labels->sum() == 0 || series.labels->sum() == series.labels->size())) {
        throw Error(ErrorCode::DegenerateLabels, "labels contain a single class");
    }

    const DetectionResult result = run_detection(series, config, RngSeed{flags.seed, 0});

    const auto write_scores = [&](std::ostream& os) {
        os << "index,score" << (series.labels ? ",label" : "") << '\n';
        for (Eigen::Index k = 0; k < result.scores.size(); ++k) {
            os << k << ',' << csv::format_real(result.scores(k));
            if (series.labels) {
                os << ',' << (*series.labels)(k);
            }
            os << '\n';
        }
    };
    if (!flags.scores_output.empty()) {
        emit(flags.scores_output, out, write_scores);
    }
    if (result.roc) {
        emit(flags.output, out, [&](std::ostream& os) {
            os << "threshold,fpr,tpr\n";
            for (const auto& pt : result.roc->points) {
                os << csv::format_real(pt.threshold) << ',' << csv::format_real(pt.fpr) << ','
                   << csv::format_real(pt.tpr) << '\n';
            }
        });
        if (flags.output != "-") {
            out << "auc=" << csv::format_real(result.roc->auc) << '\n';
        }
    } else if (flags.scores_output.empty()) {
        emit(flags.output, out, write_scores);
    }
    if (flags.output != "-") {
        out << "estimator=" << to_string(config.estimator) << '\n';
        if (result.covariance.shrinkage) {
            out << "rho=" << csv::format_real(*result.covariance.shrinkage) << '\n';
        }
    }
    return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Robust shrinkage covariance estimation for elliptical samples", "tyshrink"};
    app.require_subcommand(1);

    EstimateFlags est;
    auto* estimate = app.add_subcommand("estimate", "Estimate a covariance matrix from a sample CSV");
    estimate->add_option("--input", est.input, "n x p sample CSV")->required()->check(CLI::ExistingFile);
    estimate->add_option("--output", est.output, "Output p x p CSV ('-' for stdout)")->required();
    estimate->add_flag("--header", est.header, "Skip the first line of the input");
    estimate->add_option("--estimator", est.estimator, "sample|normalized|tyler|proposed|lw");
    estimate->add_option("--rho", est.rho, "Fixed shrinkage coefficient (default: plug-in)");
    estimate->add_option("--pilot", est.pilot, "Plug-in pilot: normalized|lw");
    est.fixed_point.attach(estimate);

    SimulateFlags sim;
    auto* simulate = app.add_subcommand("simulate", "Monte-Carlo MSE sweep over sample sizes");
    simulate->add_option("--p", sim.p, "Dimension");
    simulate->add_option("--n-start", sim.n_start);
    simulate->add_option("--n-stop", sim.n_stop);
    simulate->add_option("--n-step", sim.n_step);
    simulate->add_option("--trials", sim.trials);
    simulate->add_option("--dist", sim.dist, "gaussian | student-t:<dof>");
    simulate->add_option("--r", sim.r, "AR(1) coefficient of the true covariance");
    simulate->add_option("--estimators", sim.estimators, "Comma-separated estimator ids");
    simulate->add_option("--pilot", sim.pilot, "Plug-in pilot: normalized|lw");
    simulate->add_option("--seed", sim.seed);
    simulate->add_option("--threads", sim.threads);
    simulate->add_option("--output", sim.output, "Output CSV ('-' for stdout)");
    sim.fixed_point.attach(simulate);

    OracleGridFlags grid;
    auto* oracle = app.add_subcommand("oracle-grid", "Empirical MSE of the clairvoyant estimator over a rho grid");
    oracle->add_option("--p", grid.p);
    oracle->add_option("--n", grid.n);
    oracle->add_option("--dist", grid.dist, "gaussian | student-t:<dof>");
    oracle->add_option("--r", grid.r);
    oracle->add_option("--step", grid.step, "Grid step in (0, 1]");
    oracle->add_option("--trials", grid.trials);
    oracle->add_option("--seed", grid.seed);
    oracle->add_option("--threads", grid.threads);
    oracle->add_option("--output", grid.output, "Output CSV ('-' for stdout)");

    DetectFlags det;
    auto* detect = app.add_subcommand("detect", "Covariance-based anomaly detection with ROC evaluation");
    detect->add_option("--input", det.input, "T x p data CSV")->check(CLI::ExistingFile);
    detect->add_option("--labels", det.labels, "T x 1 label CSV (0/1)")->check(CLI::ExistingFile);
    detect->add_flag("--header", det.header, "Skip the first line of input files");
    detect->add_flag("--synthetic", det.synthetic, "Generate a labeled synthetic series");
    detect->add_option("--p", det.p, "Synthetic channel count");
    detect->add_option("--T", det.length, "Synthetic series length");
    detect->add_option("--anomaly-rate", det.anomaly_rate);
    detect->add_option("--magnitude", det.magnitude, "Burst norm relative to the median row norm");
    detect->add_option("--drift", det.drift, "Amplitude of a slow sinusoidal drift");
    detect->add_option("--dist", det.dist, "gaussian | student-t:<dof>");
    detect->add_option("--r", det.r);
    detect->add_option("--train-size", det.train_size, "Randomly subsampled training slices");
    detect->add_option("--train-range", det.train_range, "Inclusive zero-based training range a:b");
    detect->add_option("--window", det.window, "Detrending half-window m");
    detect->add_option("--estimator", det.estimator, "sample|normalized|tyler|proposed|lw");
    detect->add_option("--rho", det.rho);
    detect->add_option("--pilot", det.pilot);
    detect->add_option("--seed", det.seed);
    detect->add_option("--output", det.output, "ROC CSV ('-' for stdout)");
    detect->add_option("--scores", det.scores_output, "Optional per-sample score CSV");
    det.fixed_point.attach(detect);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    if (!reversed.empty()) {
        reversed.pop_back();  // program name
    }
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kSuccess : kUsage;
    }

    try {
        if (estimate->parsed()) return cmd_estimate(est, out);
        if (simulate->parsed()) return cmd_simulate(sim, out);
        if (oracle->parsed()) return cmd_oracle_grid(grid, out, err);
        if (detect->parsed()) return cmd_detect(det, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const csv::ParseError& e) {
        err << "error: malformed input: " << e.what() << '\n';
        return kUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e.code());
    }
    return kUsage;
}

}  // namespace tyshrink::cli

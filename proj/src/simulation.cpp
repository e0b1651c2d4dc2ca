#include "tyshrink/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <optional>
#include <thread>

namespace tyshrink {

namespace {

// Runs body(t) for t in [0, count). Each t writes only its own slot, so the
// result is independent of scheduling.
template <typename Body>
void parallel_trials(int count, int threads, Body&& body) {
    const int workers = std::clamp(threads, 1, std::max(count, 1));
    if (workers == 1) {
        for (int t = 0; t < count; ++t) {
            body(t);
        }
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            for (int t = next++; t < count; t = next++) {
                try {
                    body(t);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) {
                        failure = std::current_exception();
                    }
                }
            }
        });
    }
    pool.clear();
    if (failure) {
        std::rethrow_exception(failure);
    }
}

EllipticalSpec make_spec(Eigen::Index p, DistributionKind distribution, double dof, double r) {
    SymMatrixd sigma = ar1_covariance(p, r);
    return distribution == DistributionKind::Gaussian ? EllipticalSpec::gaussian(std::move(sigma))
                                                      : EllipticalSpec::student_t(dof, std::move(sigma));
}

bool applicable(EstimatorId id, Eigen::Index n, Eigen::Index p) {
    switch (id) {
        case EstimatorId::Tyler: return n >= p;
        case EstimatorId::LedoitWolf:
        case EstimatorId::LedoitWolfClairvoyant: return n >= 2;
        default: return true;
    }
}

SymMatrixd estimate(EstimatorId id, const ExperimentPlan& plan, const SampleMatrix& samples,
                    const Eigen::VectorXd& textures, const SymMatrixd& sigma) {
    switch (id) {
        case EstimatorId::Sample: return sample_covariance(samples).matrix;
        case EstimatorId::Normalized: return normalized_sample_covariance(samples).matrix;
        case EstimatorId::Tyler: return tyler_ml(samples, plan.fixed_point).matrix;
        case EstimatorId::Proposed:
            return regularized_tyler(samples, plugin_rho(samples, plan.pilot), plan.fixed_point).matrix;
        case EstimatorId::LedoitWolf: return ledoit_wolf(samples).matrix;
        case EstimatorId::LedoitWolfClairvoyant: return clairvoyant_ledoit_wolf(samples, textures).matrix;
        case EstimatorId::Oracle:
            return clairvoyant_shrinkage(samples, sigma, oracle_rho(sigma, samples.rows()).value()).matrix;
        case EstimatorId::Truth: return sigma;
    }
    throw Error(ErrorCode::InvalidParameter, "unknown estimator");
}

void validate(const ExperimentPlan& plan) {
    if (plan.p < 2) {
        throw Error(ErrorCode::InvalidParameter, "plan: p must be >= 2");
    }
    if (plan.trials < 1) {
        throw Error(ErrorCode::InvalidParameter, "plan: trials must be >= 1");
    }
    if (plan.n_values.empty() || plan.n_values.front() < 1) {
        throw Error(ErrorCode::InvalidParameter, "plan: n_values must be non-empty and positive");
    }
    if (std::adjacent_find(plan.n_values.begin(), plan.n_values.end(),
                           [](auto a, auto b) { return b <= a; }) != plan.n_values.end()) {
        throw Error(ErrorCode::InvalidParameter, "plan: n_values must be strictly increasing");
    }
    if (plan.estimators.empty()) {
        throw Error(ErrorCode::InvalidParameter, "plan: no estimators");
    }
}

}  // namespace

double MseRecord::standard_error() const {
    return trials > 0 ? mse_std / std::sqrt(static_cast<double>(trials)) : 0.0;
}

std::vector<MseRecord> run_mse_experiment(const ExperimentPlan& plan) {
    validate(plan);
    const EllipticalSpec spec = make_spec(plan.p, plan.distribution, plan.dof, plan.r);
    const SymMatrixd& sigma = spec.sigma();
    const Eigen::Index n_max = plan.n_values.back();
    const std::size_t num_e = plan.estimators.size();
    const std::size_t num_n = plan.n_values.size();
    const double nan = std::numeric_limits<double>::quiet_NaN();

    // errors[(e * num_n + k) * trials + t]; NaN marks a failed trial.
    std::vector<double> errors(num_e * num_n * static_cast<std::size_t>(plan.trials), nan);
    parallel_trials(plan.trials, plan.threads, [&](int t) {
        // Rows are drawn sequentially, so the first n rows of one n_max draw
        // equal a fresh draw of size n.
        const SampleDraw draw = draw_samples(spec, n_max, RngSeed{plan.master_seed, static_cast<std::uint64_t>(t)});
        for (std::size_t k = 0; k < num_n; ++k) {
            const Eigen::Index n = plan.n_values[k];
            const SampleMatrix samples = draw.samples.topRows(n);
            const Eigen::VectorXd textures = draw.textures.head(n);
            for (std::size_t e = 0; e < num_e; ++e) {
                const EstimatorId id = plan.estimators[e];
                if (!applicable(id, n, plan.p)) {
                    continue;
                }
                double value = nan;
                try {
                    const SymMatrixd est = trace_normalized(estimate(id, plan, samples, textures, sigma));
                    value = frobenius_dist_sq(est, sigma);
                } catch (const Error&) {
                    value = nan;
                }
                errors[(e * num_n + k) * static_cast<std::size_t>(plan.trials) + static_cast<std::size_t>(t)] = value;
            }
        }
    });

    std::vector<MseRecord> records;
    records.reserve(num_e * num_n);
    for (std::size_t e = 0; e < num_e; ++e) {
        for (std::size_t k = 0; k < num_n; ++k) {
            const Eigen::Index n = plan.n_values[k];
            MseRecord rec{plan.estimators[e], n, 0, 0, false, nan, nan};
            if (!applicable(rec.estimator, n, plan.p)) {
                rec.skipped = true;
                records.push_back(rec);
                continue;
            }
            double sum = 0.0;
            for (int t = 0; t < plan.trials; ++t) {
                const double v = errors[(e * num_n + k) * static_cast<std::size_t>(plan.trials) + static_cast<std::size_t>(t)];
                if (std::isnan(v)) {
                    ++rec.failures;
                } else {
                    ++rec.trials;
                    sum += v;
                }
            }
            if (rec.trials > 0) {
                rec.mse_mean = sum / rec.trials;
                double ss = 0.0;
                for (int t = 0; t < plan.trials; ++t) {
                    const double v = errors[(e * num_n + k) * static_cast<std::size_t>(plan.trials) + static_cast<std::size_t>(t)];
                    if (!std::isnan(v)) {
                        ss += (v - rec.mse_mean) * (v - rec.mse_mean);
                    }
                }
                rec.mse_std = rec.trials > 1 ? std::sqrt(ss / (rec.trials - 1)) : 0.0;
            }
            records.push_back(rec);
        }
    }
    return records;
}

std::vector<double> rho_grid(double step) {
    if (!(step > 0.0 && step <= 1.0)) {
        throw Error(ErrorCode::InvalidParameter, "rho grid step must lie in (0, 1]");
    }
    std::vector<double> grid;
    const auto count = static_cast<int>(std::floor(1.0 / step + 1e-9));
    for (int k = 0; k <= count; ++k) {
        // Round away accumulated binary error so 3 * 0.1 reports as 0.3.
        grid.push_back(std::min(1.0, std::round(k * step * 1e12) / 1e12));
    }
    if (grid.back() < 1.0 - 1e-12) {
        grid.push_back(1.0);
    }
    return grid;
}

std::vector<OraclePoint> run_oracle_grid(Eigen::Index p, Eigen::Index n, DistributionKind distribution,
                                         double dof, double r, const std::vector<double>& grid, int trials,
                                         std::uint64_t master_seed, int threads) {
    if (grid.empty()) {
        throw Error(ErrorCode::InvalidParameter, "oracle grid: rho grid is empty");
    }
    for (double rho : grid) {
        if (!(rho >= 0.0 && rho <= 1.0)) {
            throw Error(ErrorCode::InvalidParameter, "oracle grid: rho values must lie in [0, 1]");
        }
    }
    if (trials < 1) {
        throw Error(ErrorCode::InvalidParameter, "oracle grid: trials must be >= 1");
    }
    const EllipticalSpec spec = make_spec(p, distribution, dof, r);
    const Eigen::MatrixXd& sigma = spec.sigma().dense();
    const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(p, p);

    std::vector<double> errors(grid.size() * static_cast<std::size_t>(trials));
    parallel_trials(trials, threads, [&](int t) {
        const SampleDraw draw = draw_samples(spec, n, RngSeed{master_seed, static_cast<std::uint64_t>(t)});
        const Eigen::MatrixXd scatter = clairvoyant_shrinkage(draw.samples, spec.sigma(), 0.0).matrix.dense();
        for (std::size_t g = 0; g < grid.size(); ++g) {
            const Eigen::MatrixXd shrunk = (1.0 - grid[g]) * scatter + grid[g] * identity;
            errors[g * static_cast<std::size_t>(trials) + static_cast<std::size_t>(t)] = (shrunk - sigma).squaredNorm();
        }
    });

    std::vector<OraclePoint> out;
    out.reserve(grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g) {
        double sum = 0.0;
        for (int t = 0; t < trials; ++t) {
            sum += errors[g * static_cast<std::size_t>(trials) + static_cast<std::size_t>(t)];
        }
        out.push_back({grid[g], sum / trials});
    }
    return out;
}

}  // namespace tyshrink

#pragma once

// Seeded Monte-Carlo harness for estimator MSE sweeps and for the empirical
// check of the oracle shrinkage coefficient.

#include <cstdint>
#include <vector>

#include "tyshrink/estimators.hpp"
#include "tyshrink/sampling.hpp"

namespace tyshrink {

struct ExperimentPlan {
    Eigen::Index p = 20;
    std::vector<Eigen::Index> n_values;  // strictly increasing
    int trials = 100;
    DistributionKind distribution = DistributionKind::StudentT;
    double dof = 3.0;
    double r = 0.7;
    std::vector<EstimatorId> estimators;
    Pilot pilot = Pilot::NormalizedSampleCov;
    std::uint64_t master_seed = 0;
    int threads = 1;
    FixedPointConfig fixed_point;
};

struct MseRecord {
    EstimatorId estimator;
    Eigen::Index n;
    int trials;     // trials that contributed to the mean
    int failures;   // trials dropped because the estimator raised
    bool skipped;   // estimator not applicable at this n (tyler with n < p)
    double mse_mean;
    double mse_std; // sample standard deviation across trials

    double standard_error() const;
};

/// For every (estimator, n): mean and standard deviation over trials of
/// ||tr-normalized estimate - tr-normalized sigma||_F^2. Trial t draws from
/// RngSeed{master_seed, t}, so records do not depend on the thread count.
/// Records are ordered by estimator (plan order), then n.
std::vector<MseRecord> run_mse_experiment(const ExperimentPlan& plan);

struct OraclePoint {
    double rho;
    double mse;
};

/// Empirical E||clairvoyant(rho) - sigma||_F^2 (no normalization) at each rho.
std::vector<OraclePoint> run_oracle_grid(Eigen::Index p, Eigen::Index n, DistributionKind distribution,
                                         double dof, double r, const std::vector<double>& rho_grid, int trials,
                                         std::uint64_t master_seed, int threads = 1);

/// Grid 0, step, 2 step, ..., 1 (1 is always included).
std::vector<double> rho_grid(double step);

}  // namespace tyshrink

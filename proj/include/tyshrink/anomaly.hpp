#pragma once

// Covariance-based anomaly detection on multichannel time series:
// local-mean detrending, the quadratic-form score y^T Sigma^{-1} y, and ROC
// evaluation against ground-truth labels.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "tyshrink/estimators.hpp"
#include "tyshrink/sampling.hpp"

namespace tyshrink {

struct TimeSeriesSet {
    Eigen::MatrixXd data;                 // T x p, row k = x[k]^T
    std::optional<Eigen::VectorXi> labels;  // length T, entries 0/1

    Eigen::Index length() const noexcept { return data.rows(); }
    Eigen::Index channels() const noexcept { return data.cols(); }
};

/// y[k] = x[k] - mean(x[j] : |j - k| <= m, 0 <= j < T). Windows are truncated
/// at the ends of the series. Labels pass through.
TimeSeriesSet detrend(const TimeSeriesSet& series, int m);

/// t_k = y[k]^T cov^{-1} y[k] for every row.
Eigen::VectorXd score(const TimeSeriesSet& series, const SymMatrixd& cov);

struct RocPoint {
    double threshold;  // rows with score >= threshold are flagged
    double fpr;
    double tpr;
};

struct RocCurve {
    std::vector<RocPoint> points;  // from (0, 0) at +inf to (1, 1) at -inf
    double auc = 0.0;
};

/// Threshold sweep over the distinct score values; tied scores enter the
/// curve together. AUC by the trapezoid rule.
RocCurve roc(const Eigen::Ref<const Eigen::VectorXd>& scores,
             const Eigen::Ref<const Eigen::VectorXi>& labels);

/// Picks training rows, ascending: either the inclusive range [first, last]
/// (supervised mode) or `count` rows uniformly without replacement
/// (unsupervised mode).
std::vector<Eigen::Index> training_indices(Eigen::Index length, Eigen::Index count,
                                           std::optional<std::pair<Eigen::Index, Eigen::Index>> range,
                                           RngSeed seed);

struct DetectionConfig {
    EstimatorId estimator = EstimatorId::Proposed;
    Pilot pilot = Pilot::NormalizedSampleCov;
    std::optional<double> fixed_rho;  // proposed estimator only
    int window = 50;
    Eigen::Index train_size = 200;
    std::optional<std::pair<Eigen::Index, Eigen::Index>> train_range;
    FixedPointConfig fixed_point;
};

struct DetectionResult {
    TimeSeriesSet detrended;
    CovarianceEstimate covariance;
    Eigen::VectorXd scores;
    std::optional<RocCurve> roc;  // present when the series carries labels
};

/// Detrend, estimate the covariance from training rows, score every row.
/// Supports sample, normalized, tyler, proposed and lw estimators.
DetectionResult run_detection(const TimeSeriesSet& series, const DetectionConfig& config, RngSeed seed);

struct SyntheticSeriesConfig {
    Eigen::Index length = 2000;
    Eigen::Index channels = 20;
    double dof = 3.0;             // <= 0 selects Gaussian background
    double r = 0.7;               // AR(1) cross-channel correlation
    double anomaly_rate = 0.1;
    double magnitude = 1.0;       // burst norm relative to median row norm
    double drift_amplitude = 0.0; // slow per-channel sinusoidal drift
};

/// Elliptical background plus injected bursts, labeled.
TimeSeriesSet synthetic_series(const SyntheticSeriesConfig& config, RngSeed seed);

}  // namespace tyshrink

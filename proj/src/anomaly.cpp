#include "tyshrink/anomaly.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace tyshrink {

TimeSeriesSet detrend(const TimeSeriesSet& series, int m) {
    if (m < 1) {
        throw Error(ErrorCode::InvalidParameter, "detrend: window m must be >= 1");
    }
    const Eigen::Index length = series.length();
    const Eigen::Index p = series.channels();
    if (series.labels && series.labels->size() != length) {
        throw Error(ErrorCode::DimensionMismatch, "detrend: labels length != series length");
    }

    // Prefix sums make each window mean O(p).
    Eigen::MatrixXd prefix = Eigen::MatrixXd::Zero(length + 1, p);
    for (Eigen::Index k = 0; k < length; ++k) {
        prefix.row(k + 1) = prefix.row(k) + series.data.row(k);
    }

    TimeSeriesSet out{Eigen::MatrixXd(length, p), series.labels};
    for (Eigen::Index k = 0; k < length; ++k) {
        const Eigen::Index lo = std::max<Eigen::Index>(0, k - m);
        const Eigen::Index hi = std::min<Eigen::Index>(length - 1, k + m);
        const double count = static_cast<double>(hi - lo + 1);
        out.data.row(k) = series.data.row(k) - (prefix.row(hi + 1) - prefix.row(lo)) / count;
    }
    return out;
}

Eigen::VectorXd score(const TimeSeriesSet& series, const SymMatrixd& cov) {
    if (cov.dim() != series.channels()) {
        throw Error(ErrorCode::DimensionMismatch, "score: covariance dimension != channel count");
    }
    const auto factor = spd_factorize(cov);
    Eigen::MatrixXd whitened = series.data.transpose();
    factor.lower().solveInPlace(whitened);
    return whitened.colwise().squaredNorm().transpose();
}

RocCurve roc(const Eigen::Ref<const Eigen::VectorXd>& scores, const Eigen::Ref<const Eigen::VectorXi>& labels) {
    if (scores.size() != labels.size()) {
        throw Error(ErrorCode::DimensionMismatch, "roc: scores and labels differ in length");
    }
    Eigen::Index positives = 0;
    for (Eigen::Index k = 0; k < labels.size(); ++k) {
        if (labels(k) != 0 && labels(k) != 1) {
            throw Error(ErrorCode::InvalidParameter, "roc: labels must be 0 or 1");
        }
        positives += labels(k);
    }
    const Eigen::Index negatives = labels.size() - positives;
    if (positives == 0 || negatives == 0) {
        throw Error(ErrorCode::DegenerateLabels, "roc: need at least one positive and one negative label");
    }

    std::vector<Eigen::Index> order(static_cast<std::size_t>(scores.size()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return scores(a) > scores(b); });

    const double inf = std::numeric_limits<double>::infinity();
    RocCurve curve;
    curve.points.push_back({inf, 0.0, 0.0});
    Eigen::Index tp = 0;
    Eigen::Index fp = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        const double threshold = scores(order[i]);
        while (i < order.size() && scores(order[i]) == threshold) {
            if (labels(order[i]) == 1) {
                ++tp;
            } else {
                ++fp;
            }
            ++i;
        }
        curve.points.push_back({threshold, static_cast<double>(fp) / static_cast<double>(negatives),
                                static_cast<double>(tp) / static_cast<double>(positives)});
    }
    curve.points.push_back({-inf, 1.0, 1.0});

    for (std::size_t k = 1; k < curve.points.size(); ++k) {
        const auto& a = curve.points[k - 1];
        const auto& b = curve.points[k];
        curve.auc += (b.fpr - a.fpr) * 0.5 * (a.tpr + b.tpr);
    }
    return curve;
}

std::vector<Eigen::Index> training_indices(Eigen::Index length, Eigen::Index count,
                                           std::optional<std::pair<Eigen::Index, Eigen::Index>> range,
                                           RngSeed seed) {
    std::vector<Eigen::Index> out;
    if (range) {
        const auto [first, last] = *range;
        if (first < 0 || last < first || last >= length) {
            throw Error(ErrorCode::InvalidParameter, "training range outside the series");
        }
        out.resize(static_cast<std::size_t>(last - first + 1));
        std::iota(out.begin(), out.end(), first);
        return out;
    }
    if (count < 1 || count > length) {
        throw Error(ErrorCode::InvalidParameter, "training size must lie in [1, T]");
    }
    std::vector<Eigen::Index> pool(static_cast<std::size_t>(length));
    std::iota(pool.begin(), pool.end(), Eigen::Index{0});
    Rng rng(seed);
    // Partial Fisher-Yates; uniform() < 1 keeps the pick in range.
    for (Eigen::Index i = 0; i < count; ++i) {
        const auto remaining = static_cast<double>(length - i);
        const auto j = i + static_cast<Eigen::Index>(std::floor(rng.uniform() * remaining));
        std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
    }
    out.assign(pool.begin(), pool.begin() + count);
    std::sort(out.begin(), out.end());
    return out;
}

DetectionResult run_detection(const TimeSeriesSet& series, const DetectionConfig& config, RngSeed seed) {
    if (series.length() < 1 || series.channels() < 1) {
        throw Error(ErrorCode::InvalidParameter, "run_detection: empty series");
    }
    TimeSeriesSet detrended = detrend(series, config.window);
    if (detrended.data.cwiseAbs().maxCoeff() == 0.0) {
        throw Error(ErrorCode::DegenerateData, "detrended data is identically zero");
    }

    const auto rows = training_indices(detrended.length(), config.train_size, config.train_range, seed);
    SampleMatrix train(static_cast<Eigen::Index>(rows.size()), detrended.channels());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        train.row(static_cast<Eigen::Index>(i)) = detrended.data.row(rows[i]);
    }

    CovarianceEstimate cov = [&]() {
        switch (config.estimator) {
            case EstimatorId::Sample: return sample_covariance(train);
            case EstimatorId::Normalized: return normalized_sample_covariance(train);
            case EstimatorId::Tyler: return tyler_ml(train, config.fixed_point);
            case EstimatorId::LedoitWolf: return ledoit_wolf(train);
            case EstimatorId::Proposed: {
                const ShrinkageCoefficient rho = config.fixed_rho
                                                     ? ShrinkageCoefficient::fixed(*config.fixed_rho)
                                                     : plugin_rho(train, config.pilot);
                return regularized_tyler(train, rho, config.fixed_point);
            }
            default:
                throw Error(ErrorCode::InvalidParameter,
                            "estimator '" + to_string(config.estimator) + "' needs ground truth; not usable for detection");
        }
    }();

    DetectionResult result{std::move(detrended), std::move(cov), Eigen::VectorXd(), std::nullopt};
    result.scores = score(result.detrended, result.covariance.matrix);
    if (result.detrended.labels) {
        result.roc = roc(result.scores, *result.detrended.labels);
    }
    return result;
}

TimeSeriesSet synthetic_series(const SyntheticSeriesConfig& config, RngSeed seed) {
    const SymMatrixd sigma = ar1_covariance(config.channels, config.r);
    const EllipticalSpec spec =
        config.dof > 0.0 ? EllipticalSpec::student_t(config.dof, sigma) : EllipticalSpec::gaussian(sigma);
    const SampleDraw background = draw_samples(spec, config.length, seed);
    InjectedSamples injected = inject_anomalies(background.samples, config.anomaly_rate, config.magnitude,
                                                RngSeed{seed.master, ~seed.stream});
    if (config.drift_amplitude != 0.0) {
        const double period = static_cast<double>(config.length) / 2.0;
        for (Eigen::Index k = 0; k < config.length; ++k) {
            for (Eigen::Index c = 0; c < config.channels; ++c) {
                const double phase = 2.0 * std::numbers::pi * static_cast<double>(k) / period + static_cast<double>(c);
                injected.samples(k, c) += config.drift_amplitude * std::sin(phase);
            }
        }
    }
    return TimeSeriesSet{std::move(injected.samples), std::move(injected.labels)};
}

}  // namespace tyshrink

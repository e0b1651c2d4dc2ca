#include "tyshrink/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace tyshrink {

namespace {

void require_nonempty(const Eigen::Ref<const SampleMatrix>& samples, const char* who) {
    if (samples.rows() < 1 || samples.cols() < 1) {
        throw Error(ErrorCode::InvalidParameter, std::string(who) + ": need n >= 1 and p >= 1");
    }
}

void require_trace_p(const SymMatrixd& sigma, const char* who) {
    const double p = static_cast<double>(sigma.dim());
    if (!(std::abs(sigma.trace() - p) <= 1e-9)) {
        throw Error(ErrorCode::NotTraceNormalized,
                    std::string(who) + ": trace " + std::to_string(sigma.trace()) + " != p = " +
                        std::to_string(sigma.dim()));
    }
}

// (p/n) sum_i s_i s_i^T / (s_i^T sigma^{-1} s_i) for unit-norm rows s_i.
// All quadratic forms share one factorization and one multi-RHS solve.
Eigen::MatrixXd weighted_scatter(const SampleMatrix& normalized, const SymMatrixd& sigma) {
    const auto n = normalized.rows();
    const auto p = normalized.cols();
    const auto factor = spd_factorize(sigma);
    Eigen::MatrixXd whitened = normalized.transpose();
    factor.lower().solveInPlace(whitened);
    const Eigen::VectorXd weights = whitened.colwise().squaredNorm().cwiseInverse().transpose();
    Eigen::MatrixXd scatter =
        normalized.transpose() * weights.asDiagonal() * normalized;
    scatter *= static_cast<double>(p) / static_cast<double>(n);
    return scatter;
}

double relative_change(const Eigen::MatrixXd& next, const Eigen::MatrixXd& prev) {
    return (next - prev).norm() / prev.norm();
}

// Shared loop for the regularized (rho > 0) and plain (rho = 0) iterations.
CovarianceEstimate fixed_point(const SampleMatrix& normalized, double rho,
                               const FixedPointConfig& config) {
    const auto p = normalized.cols();
    if (!(config.tolerance > 0.0) || config.max_iterations < 1) {
        throw Error(ErrorCode::InvalidParameter, "fixed point: tolerance > 0 and max_iterations >= 1 required");
    }
    Eigen::MatrixXd current = Eigen::MatrixXd::Identity(p, p);
    if (config.initial) {
        if (config.initial->dim() != p) {
            throw Error(ErrorCode::DimensionMismatch, "fixed point: initial matrix has wrong dimension");
        }
        spd_factorize(*config.initial);
        current = config.initial->dense();
    }

    const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(p, p);
    CovarianceEstimate out{SymMatrixd(current), true, 0, 0.0, false, std::nullopt};
    for (int it = 1; it <= config.max_iterations; ++it) {
        Eigen::MatrixXd next = rho == 1.0 ? identity
                                          : Eigen::MatrixXd((1.0 - rho) * weighted_scatter(normalized, SymMatrixd(current)) +
                                                            rho * identity);
        next *= static_cast<double>(p) / next.trace();
        next = SymMatrixd(next).dense();

        const double change = relative_change(next, current);
        current = std::move(next);
        if (config.observer) {
            config.observer(it, current);
        }
        out.iterations_used = it;
        out.final_residual = change;
        if (change < config.tolerance || rho == 1.0) {
            out.converged = true;
            if (rho == 1.0) {
                out.final_residual = 0.0;
            }
            break;
        }
    }
    out.matrix = SymMatrixd(current);
    return out;
}

}  // namespace

ShrinkageCoefficient::ShrinkageCoefficient(double value, RhoProvenance provenance)
    : value_(value), provenance_(provenance) {
    if (!(value > 0.0 && value <= 1.0)) {
        throw Error(ErrorCode::InvalidParameter,
                    "shrinkage coefficient " + std::to_string(value) + " outside (0, 1]");
    }
}

CovarianceEstimate sample_covariance(const Eigen::Ref<const SampleMatrix>& samples) {
    require_nonempty(samples, "sample_covariance");
    const double n = static_cast<double>(samples.rows());
    Eigen::MatrixXd s = samples.transpose() * samples / n;
    return CovarianceEstimate{SymMatrixd(s), false, 0, 0.0, true, std::nullopt};
}

CovarianceEstimate normalized_sample_covariance(const Eigen::Ref<const SampleMatrix>& samples) {
    require_nonempty(samples, "normalized_sample_covariance");
    const SampleMatrix s = normalize_rows(samples);
    const double scale = static_cast<double>(s.cols()) / static_cast<double>(s.rows());
    Eigen::MatrixXd r = scale * (s.transpose() * s);
    return CovarianceEstimate{SymMatrixd(r), true, 0, 0.0, true, std::nullopt};
}

double shrinkage_from_trace_sq(Eigen::Index p, Eigen::Index n, double trace_sq) {
    const double pd = static_cast<double>(p);
    const double nd = static_cast<double>(n);
    // Scaled by p so that integer inputs (Sigma = I) evaluate exactly.
    const double numerator = pd * pd * pd + (pd - 2.0) * trace_sq;
    const double denominator =
        pd * (pd * pd - nd * pd - 2.0 * nd) + (pd * (nd + 1.0) + 2.0 * (nd - 1.0)) * trace_sq;
    return numerator / denominator;
}

ShrinkageCoefficient oracle_rho(const SymMatrixd& sigma, Eigen::Index n) {
    if (sigma.dim() < 2) {
        throw Error(ErrorCode::InvalidParameter, "oracle_rho: p must be >= 2");
    }
    if (n < 1) {
        throw Error(ErrorCode::InvalidParameter, "oracle_rho: n must be >= 1");
    }
    require_trace_p(sigma, "oracle_rho");
    const double trace_sq = sigma.dense().squaredNorm();
    return {shrinkage_from_trace_sq(sigma.dim(), n, trace_sq), RhoProvenance::Oracle};
}

ShrinkageMoments shrinkage_moments(const SymMatrixd& sigma, Eigen::Index n) {
    if (n < 1) {
        throw Error(ErrorCode::InvalidParameter, "shrinkage_moments: n must be >= 1");
    }
    const auto eig = eigen_sym(sigma);
    const double p = static_cast<double>(sigma.dim());
    const double nd = static_cast<double>(n);
    const double tr = eig.values.sum();
    const double tr_sq = eig.values.squaredNorm();
    const double shape = nd * (1.0 + 2.0 / p);
    ShrinkageMoments m{};
    m.m11 = tr;
    m.m12 = tr_sq;
    m.m2 = (1.0 - 1.0 / nd + 2.0 / shape) * tr_sq + tr * tr / shape;
    m.trace_sigma = tr;
    m.p = sigma.dim();
    return m;
}

ShrinkageCoefficient oracle_rho_via_moments(const SymMatrixd& sigma, Eigen::Index n) {
    if (sigma.dim() < 2) {
        throw Error(ErrorCode::InvalidParameter, "oracle_rho_via_moments: p must be >= 2");
    }
    require_trace_p(sigma, "oracle_rho_via_moments");
    const auto m = shrinkage_moments(sigma, n);
    const double p = static_cast<double>(m.p);
    const double value = (m.m2 - m.m11 - m.m12 + m.trace_sigma) / (m.m2 - 2.0 * m.m11 + p);
    return {value, RhoProvenance::Oracle};
}

ShrinkageCoefficient plugin_rho(const Eigen::Ref<const SampleMatrix>& samples, Pilot pilot) {
    require_nonempty(samples, "plugin_rho");
    const auto p = samples.cols();
    if (p < 2) {
        throw Error(ErrorCode::InvalidParameter, "plugin_rho: p must be >= 2");
    }
    const CovarianceEstimate pilot_estimate = pilot == Pilot::LedoitWolf
                                                  ? ledoit_wolf(samples)
                                                  : normalized_sample_covariance(samples);
    const SymMatrixd m = trace_normalized(pilot_estimate.matrix);
    // Tr(M^2) >= Tr(M)^2 / p = p for any symmetric M of trace p; the floor
    // only strips round-off.
    const double trace_sq = std::max(m.dense().squaredNorm(), static_cast<double>(p));
    return {shrinkage_from_trace_sq(p, samples.rows(), trace_sq), RhoProvenance::PlugIn};
}

CovarianceEstimate regularized_tyler(const Eigen::Ref<const SampleMatrix>& samples,
                                     const ShrinkageCoefficient& rho,
                                     const FixedPointConfig& config) {
    require_nonempty(samples, "regularized_tyler");
    const SampleMatrix normalized = normalize_rows(samples);
    CovarianceEstimate out = fixed_point(normalized, rho.value(), config);
    out.shrinkage = rho.value();
    return out;
}

CovarianceEstimate tyler_ml(const Eigen::Ref<const SampleMatrix>& samples, const FixedPointConfig& config) {
    require_nonempty(samples, "tyler_ml");
    if (samples.rows() < samples.cols()) {
        throw Error(ErrorCode::NotEnoughSamples, "n < p (n = " + std::to_string(samples.rows()) +
                                                     ", p = " + std::to_string(samples.cols()) + ")");
    }
    const SampleMatrix normalized = normalize_rows(samples);
    CovarianceEstimate out = fixed_point(normalized, 0.0, config);
    out.final_residual = tyler_residual(samples, out.matrix);
    return out;
}

double tyler_residual(const Eigen::Ref<const SampleMatrix>& samples, const SymMatrixd& sigma) {
    require_nonempty(samples, "tyler_residual");
    if (sigma.dim() != samples.cols()) {
        throw Error(ErrorCode::DimensionMismatch, "tyler_residual: dimension mismatch");
    }
    const SampleMatrix normalized = normalize_rows(samples);
    const Eigen::MatrixXd mapped = weighted_scatter(normalized, sigma);
    return relative_change(mapped, sigma.dense());
}

CovarianceEstimate clairvoyant_shrinkage(const Eigen::Ref<const SampleMatrix>& samples,
                                         const SymMatrixd& sigma, double rho) {
    require_nonempty(samples, "clairvoyant_shrinkage");
    if (!(rho >= 0.0 && rho <= 1.0)) {
        throw Error(ErrorCode::InvalidParameter, "clairvoyant_shrinkage: rho must lie in [0, 1]");
    }
    if (sigma.dim() != samples.cols()) {
        throw Error(ErrorCode::DimensionMismatch, "clairvoyant_shrinkage: dimension mismatch");
    }
    const auto p = samples.cols();
    const SampleMatrix normalized = normalize_rows(samples);
    Eigen::MatrixXd out = rho * Eigen::MatrixXd::Identity(p, p);
    if (rho < 1.0) {
        out += (1.0 - rho) * weighted_scatter(normalized, sigma);
    } else {
        spd_factorize(sigma);
    }
    return CovarianceEstimate{SymMatrixd(out), false, 0, 0.0, true, rho};
}

CovarianceEstimate ledoit_wolf(const Eigen::Ref<const SampleMatrix>& samples) {
    require_nonempty(samples, "ledoit_wolf");
    const auto n = samples.rows();
    const auto p = samples.cols();
    if (n < 2) {
        throw Error(ErrorCode::NotEnoughSamples, "ledoit_wolf: need n >= 2");
    }
    const double nd = static_cast<double>(n);
    const Eigen::MatrixXd s = samples.transpose() * samples / nd;
    const double mu = s.trace() / static_cast<double>(p);
    if (!(mu > 0.0)) {
        throw Error(ErrorCode::DegenerateData, "ledoit_wolf: all samples are zero");
    }
    const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(p, p);
    const double delta_sq = (s - mu * identity).squaredNorm();
    if (delta_sq < 1e-300) {
        return CovarianceEstimate{SymMatrixd(identity), true, 0, 0.0, true, 1.0};
    }

    // ||x x^T - S||_F^2 = ||x||^4 - 2 x^T S x + ||S||_F^2
    const double s_norm_sq = s.squaredNorm();
    double deviation = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto x = samples.row(i);
        const double xx = x.squaredNorm();
        deviation += xx * xx - 2.0 * x.dot(x * s) + s_norm_sq;
    }
    const double beta_sq = std::min(delta_sq, std::max(deviation, 0.0) / (nd * nd));
    const double intensity = beta_sq / delta_sq;

    const Eigen::MatrixXd shrunk = intensity * mu * identity + (1.0 - intensity) * s;
    CovarianceEstimate out{trace_normalized(SymMatrixd(shrunk)), true, 0, 0.0, true, intensity};
    return out;
}

CovarianceEstimate clairvoyant_ledoit_wolf(const Eigen::Ref<const SampleMatrix>& samples,
                                           const Eigen::Ref<const Eigen::VectorXd>& textures) {
    if (textures.size() != samples.rows()) {
        throw Error(ErrorCode::DimensionMismatch, "clairvoyant_ledoit_wolf: textures length != n");
    }
    if (!(textures.minCoeff() > 0.0)) {
        throw Error(ErrorCode::InvalidParameter, "clairvoyant_ledoit_wolf: textures must be > 0");
    }
    const SampleMatrix gaussian = textures.cwiseInverse().asDiagonal() * samples;
    return ledoit_wolf(gaussian);
}

std::optional<EstimatorId> parse_estimator_id(const std::string& name) {
    if (name == "sample") return EstimatorId::Sample;
    if (name == "normalized") return EstimatorId::Normalized;
    if (name == "tyler") return EstimatorId::Tyler;
    if (name == "proposed") return EstimatorId::Proposed;
    if (name == "lw") return EstimatorId::LedoitWolf;
    if (name == "lw-clairvoyant") return EstimatorId::LedoitWolfClairvoyant;
    if (name == "oracle") return EstimatorId::Oracle;
    if (name == "true") return EstimatorId::Truth;
    return std::nullopt;
}

std::string to_string(EstimatorId id) {
    switch (id) {
        case EstimatorId::Sample: return "sample";
        case EstimatorId::Normalized: return "normalized";
        case EstimatorId::Tyler: return "tyler";
        case EstimatorId::Proposed: return "proposed";
        case EstimatorId::LedoitWolf: return "lw";
        case EstimatorId::LedoitWolfClairvoyant: return "lw-clairvoyant";
        case EstimatorId::Oracle: return "oracle";
        case EstimatorId::Truth: return "true";
    }
    return "unknown";
}

}  // namespace tyshrink

#pragma once

// Covariance estimators for elliptical samples: the sample covariance, the
// normalized sample covariance, Tyler's fixed point, its shrinkage-regularized
// variant, and the Ledoit-Wolf baselines. Also the closed-form shrinkage
// coefficient, evaluated from the true covariance (oracle) or from a pilot
// estimate (plug-in).

#include <functional>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "tyshrink/numerics.hpp"
#include "tyshrink/sampling.hpp"

namespace tyshrink {

struct CovarianceEstimate {
    SymMatrixd matrix;
    bool trace_normalized = false;
    int iterations_used = 0;
    double final_residual = 0.0;
    // False when an iterative estimator hit max_iterations; matrix then holds
    // the last iterate.
    bool converged = true;
    // Weight placed on the identity target, for estimators that shrink.
    std::optional<double> shrinkage;
};

enum class RhoProvenance { Oracle, PlugIn, Fixed };

/// Shrinkage weight toward the identity, always in (0, 1].
class ShrinkageCoefficient {
public:
    ShrinkageCoefficient(double value, RhoProvenance provenance);

    static ShrinkageCoefficient fixed(double value) { return {value, RhoProvenance::Fixed}; }

    double value() const noexcept { return value_; }
    RhoProvenance provenance() const noexcept { return provenance_; }

private:
    double value_;
    RhoProvenance provenance_;
};

/// Called with (iteration index starting at 1, normalized iterate).
using IterateObserver = std::function<void(int, const Eigen::MatrixXd&)>;

struct FixedPointConfig {
    double tolerance = 1e-8;  // relative Frobenius change between iterates
    int max_iterations = 200;
    std::optional<SymMatrixd> initial;  // identity when empty
    IterateObserver observer;
};

/// (1/n) sum x_i x_i^T, no centering.
CovarianceEstimate sample_covariance(const Eigen::Ref<const SampleMatrix>& samples);

/// (p/n) sum s_i s_i^T over the row-normalized samples; trace is p.
CovarianceEstimate normalized_sample_covariance(const Eigen::Ref<const SampleMatrix>& samples);

/// Closed-form MSE-optimal shrinkage coefficient given p, n and Tr(M^2) of a
/// trace-p matrix M:
///   [p^2 + (1 - 2/p) T] / [(p^2 - n p - 2n) + (n + 1 + 2(n - 1)/p) T].
double shrinkage_from_trace_sq(Eigen::Index p, Eigen::Index n, double trace_sq);

/// Oracle coefficient from the true covariance. sigma must have trace p.
ShrinkageCoefficient oracle_rho(const SymMatrixd& sigma, Eigen::Index n);

/// Second-order moments of the clairvoyant matrix C = (p/n) sum s_i s_i^T / (s_i^T sigma^-1 s_i),
/// computed from the eigenvalues of sigma.
struct ShrinkageMoments {
    double m2;   // E Tr(C^2)
    double m11;  // E Tr(C)
    double m12;  // E Tr(C sigma)
    double trace_sigma;
    Eigen::Index p;
};

ShrinkageMoments shrinkage_moments(const SymMatrixd& sigma, Eigen::Index n);

/// Oracle coefficient through (m2 - m11 - m12 + Tr sigma) / (m2 - 2 m11 + p).
ShrinkageCoefficient oracle_rho_via_moments(const SymMatrixd& sigma, Eigen::Index n);

enum class Pilot { NormalizedSampleCov, LedoitWolf };

/// Oracle formula with Tr(M^2) of a trace-normalized pilot M in place of Tr(sigma^2).
ShrinkageCoefficient plugin_rho(const Eigen::Ref<const SampleMatrix>& samples, Pilot pilot);

/// Shrinkage-regularized Tyler iteration with trace normalization after
/// every step. Any n, p. rho = 1 returns the identity.
CovarianceEstimate regularized_tyler(const Eigen::Ref<const SampleMatrix>& samples,
                                     const ShrinkageCoefficient& rho,
                                     const FixedPointConfig& config = {});

/// Unregularized Tyler fixed point, trace-normalized. Requires n >= p.
/// final_residual is ||S - map(S)||_F / ||S||_F at the returned S.
CovarianceEstimate tyler_ml(const Eigen::Ref<const SampleMatrix>& samples,
                            const FixedPointConfig& config = {});

/// Relative residual of Tyler's fixed-point equation at sigma.
double tyler_residual(const Eigen::Ref<const SampleMatrix>& samples, const SymMatrixd& sigma);

/// One-shot shrinkage using the true sigma in the weights. Not normalized.
CovarianceEstimate clairvoyant_shrinkage(const Eigen::Ref<const SampleMatrix>& samples,
                                         const SymMatrixd& sigma, double rho);

/// Ledoit-Wolf shrinkage of the (uncentered) sample covariance toward mu I,
/// trace-normalized to p.
CovarianceEstimate ledoit_wolf(const Eigen::Ref<const SampleMatrix>& samples);

/// Ledoit-Wolf on x_i / nu_i with the true textures nu_i.
CovarianceEstimate clairvoyant_ledoit_wolf(const Eigen::Ref<const SampleMatrix>& samples,
                                           const Eigen::Ref<const Eigen::VectorXd>& textures);

/// Estimator names shared by the simulation harness, the detector and the CLI.
/// Oracle and Truth need the true covariance; LedoitWolfClairvoyant needs the
/// true textures.
enum class EstimatorId { Sample, Normalized, Tyler, Proposed, LedoitWolf, LedoitWolfClairvoyant, Oracle, Truth };

std::optional<EstimatorId> parse_estimator_id(const std::string& name);
std::string to_string(EstimatorId id);

}  // namespace tyshrink

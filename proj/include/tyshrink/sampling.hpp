#pragma once

#include <cstdint>
#include <random>
#include <utility>

#include <Eigen/Dense>

#include "tyshrink/numerics.hpp"

namespace tyshrink {

/// Row i is the i-th observation x_i^T.
using SampleMatrix = Eigen::MatrixXd;

/// (master, stream) fully determines a random sequence. Simulation trials use
/// stream = trial index so trials can run in any order.
struct RngSeed {
    std::uint64_t master = 0;
    std::uint64_t stream = 0;
};

/// Random source pinned to std::mt19937_64 (whose output sequence is fixed by
/// the standard) plus the Boost.Random 1.74 normal/gamma/uniform samplers.
/// The engine is keyed by splitmix64(master) xor splitmix64(~stream).
class Rng {
public:
    explicit Rng(RngSeed seed);

    double normal();
    double uniform();  // [0, 1)
    double chi_square(double dof);

    /// Standard normal vector of length p.
    Eigen::VectorXd normal_vector(Eigen::Index p);

    std::mt19937_64& engine() noexcept { return engine_; }

private:
    std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

enum class DistributionKind { Gaussian, StudentT };

/// x = nu * u with u ~ N(0, sigma). Gaussian fixes nu = 1; Student-T uses
/// nu = sqrt(dof / chi2_dof).
class EllipticalSpec {
public:
    static EllipticalSpec gaussian(SymMatrixd sigma);
    static EllipticalSpec student_t(double dof, SymMatrixd sigma);

    DistributionKind kind() const noexcept { return kind_; }
    double dof() const noexcept { return dof_; }
    const SymMatrixd& sigma() const noexcept { return sigma_; }
    Eigen::Index dim() const noexcept { return sigma_.dim(); }

private:
    EllipticalSpec(DistributionKind kind, double dof, SymMatrixd sigma);

    DistributionKind kind_;
    double dof_;
    SymMatrixd sigma_;
};

/// Toeplitz matrix with entries r^|i-j|.
SymMatrixd ar1_covariance(Eigen::Index p, double r);

struct SampleDraw {
    SampleMatrix samples;     // n x p
    Eigen::VectorXd textures; // nu_i, all ones for Gaussian
};

SampleDraw draw_samples(const EllipticalSpec& spec, Eigen::Index n, RngSeed seed);

/// Projects each row onto the unit sphere. Throws ZeroSample for a row whose
/// norm is below 1e-300.
SampleMatrix normalize_rows(const Eigen::Ref<const SampleMatrix>& samples);

struct InjectedSamples {
    SampleMatrix samples;
    Eigen::VectorXi labels;  // 1 where a burst was added
};

/// Adds a burst of norm magnitude * median(row norm), in a uniformly random
/// direction, to each row selected with probability rate.
InjectedSamples inject_anomalies(const Eigen::Ref<const SampleMatrix>& samples, double rate,
                                 double magnitude, RngSeed seed);

}  // namespace tyshrink

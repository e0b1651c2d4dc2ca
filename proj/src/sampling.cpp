#include "tyshrink/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <boost/random/gamma_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

namespace tyshrink {

namespace {

// Integer dof up to this bound draws chi-square as a sum of squared normals;
// larger or fractional dof goes through the gamma sampler.
constexpr double kMaxSummedDof = 64.0;

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

Rng::Rng(RngSeed seed) : engine_(splitmix64(seed.master) ^ splitmix64(~seed.stream)) {}

double Rng::normal() {
    boost::random::normal_distribution<double> dist(0.0, 1.0);
    return dist(engine_);
}

double Rng::uniform() {
    boost::random::uniform_01<double> dist;
    return dist(engine_);
}

double Rng::chi_square(double dof) {
    if (!(dof > 0.0)) {
        throw Error(ErrorCode::InvalidParameter, "chi-square dof must be > 0");
    }
    if (dof <= kMaxSummedDof && std::floor(dof) == dof) {
        double g = 0.0;
        for (int k = 0; k < static_cast<int>(dof); ++k) {
            const double z = normal();
            g += z * z;
        }
        return g;
    }
    boost::random::gamma_distribution<double> dist(0.5 * dof, 2.0);
    return dist(engine_);
}

Eigen::VectorXd Rng::normal_vector(Eigen::Index p) {
    Eigen::VectorXd z(p);
    for (Eigen::Index k = 0; k < p; ++k) {
        z(k) = normal();
    }
    return z;
}

EllipticalSpec::EllipticalSpec(DistributionKind kind, double dof, SymMatrixd sigma)
    : kind_(kind), dof_(dof), sigma_(std::move(sigma)) {
    const double p = static_cast<double>(sigma_.dim());
    if (std::abs(sigma_.trace() - p) > 1e-9) {
        throw Error(ErrorCode::NotTraceNormalized,
                    "sigma trace " + std::to_string(sigma_.trace()) + " != p");
    }
    if (kind_ == DistributionKind::StudentT && !(dof_ > 0.0)) {
        throw Error(ErrorCode::InvalidParameter, "Student-T dof must be > 0");
    }
}

EllipticalSpec EllipticalSpec::gaussian(SymMatrixd sigma) {
    return EllipticalSpec(DistributionKind::Gaussian, 0.0, std::move(sigma));
}

EllipticalSpec EllipticalSpec::student_t(double dof, SymMatrixd sigma) {
    return EllipticalSpec(DistributionKind::StudentT, dof, std::move(sigma));
}

SymMatrixd ar1_covariance(Eigen::Index p, double r) {
    if (p < 1) {
        throw Error(ErrorCode::InvalidParameter, "ar1_covariance: p must be >= 1");
    }
    if (!(r >= 0.0 && r < 1.0)) {
        throw Error(ErrorCode::InvalidParameter, "ar1_covariance: r must lie in [0, 1)");
    }
    Eigen::MatrixXd m(p, p);
    for (Eigen::Index i = 0; i < p; ++i) {
        for (Eigen::Index j = 0; j < p; ++j) {
            m(i, j) = std::pow(r, static_cast<double>(std::abs(i - j)));
        }
    }
    return SymMatrixd(m);
}

SampleDraw draw_samples(const EllipticalSpec& spec, Eigen::Index n, RngSeed seed) {
    if (n < 1) {
        throw Error(ErrorCode::InvalidParameter, "draw_samples: n must be >= 1");
    }
    const Eigen::Index p = spec.dim();
    const auto factor = spd_factorize(spec.sigma());
    Rng rng(seed);

    SampleDraw out{SampleMatrix(n, p), Eigen::VectorXd::Ones(n)};
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::VectorXd z = rng.normal_vector(p);
        const Eigen::VectorXd u = factor.lower() * z;
        double nu = 1.0;
        if (spec.kind() == DistributionKind::StudentT) {
            nu = std::sqrt(spec.dof() / rng.chi_square(spec.dof()));
        }
        out.textures(i) = nu;
        out.samples.row(i) = nu * u.transpose();
    }
    return out;
}

SampleMatrix normalize_rows(const Eigen::Ref<const SampleMatrix>& samples) {
    SampleMatrix out(samples.rows(), samples.cols());
    for (Eigen::Index i = 0; i < samples.rows(); ++i) {
        const double norm = samples.row(i).norm();
        if (!(norm >= 1e-300)) {
            throw Error(ErrorCode::ZeroSample, "row " + std::to_string(i) + " has zero norm");
        }
        out.row(i) = samples.row(i) / norm;
    }
    return out;
}

InjectedSamples inject_anomalies(const Eigen::Ref<const SampleMatrix>& samples, double rate,
                                 double magnitude, RngSeed seed) {
    if (!(rate > 0.0 && rate < 1.0)) {
        throw Error(ErrorCode::InvalidParameter, "inject_anomalies: rate must lie in (0, 1)");
    }
    if (!(magnitude >= 0.0)) {
        throw Error(ErrorCode::InvalidParameter, "inject_anomalies: magnitude must be >= 0");
    }
    const Eigen::Index n = samples.rows();
    const Eigen::Index p = samples.cols();

    std::vector<double> norms(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        norms[static_cast<std::size_t>(i)] = samples.row(i).norm();
    }
    std::vector<double> sorted = norms;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t mid = sorted.size() / 2;
    const double median =
        sorted.size() % 2 == 1 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
    const double burst_norm = magnitude * median;

    Rng rng(seed);
    InjectedSamples out{samples, Eigen::VectorXi::Zero(n)};
    for (Eigen::Index i = 0; i < n; ++i) {
        if (rng.uniform() >= rate) {
            continue;
        }
        out.labels(i) = 1;
        Eigen::VectorXd direction = rng.normal_vector(p);
        const double dn = direction.norm();
        if (burst_norm > 0.0 && dn > 0.0) {
            out.samples.row(i) += (burst_norm / dn) * direction.transpose();
        }
    }
    return out;
}

}  // namespace tyshrink

#include <gtest/gtest.h>

#include <random>

#include "tyshrink/numerics.hpp"
#include "tyshrink/sampling.hpp"

using namespace tyshrink;

namespace {

Eigen::MatrixXd random_spd(Eigen::Index p, std::mt19937_64& gen) {
    std::normal_distribution<double> d(0.0, 1.0);
    Eigen::MatrixXd a(p, p);
    for (Eigen::Index i = 0; i < p; ++i)
        for (Eigen::Index j = 0; j < p; ++j) a(i, j) = d(gen);
    return a * a.transpose() + 0.1 * Eigen::MatrixXd::Identity(p, p);
}

}  // namespace

TEST(SymMatrix, StorageIsExactlySymmetric) {
    Eigen::MatrixXd a(2, 2);
    a << 1.0, 0.3, 0.1, 2.0;
    const SymMatrixd s(a);
    EXPECT_EQ(s(0, 1), s(1, 0));
    EXPECT_DOUBLE_EQ(s(0, 1), 0.2);
}

TEST(SymMatrix, RejectsNonSquare) {
    EXPECT_THROW(SymMatrixd(Eigen::MatrixXd::Zero(2, 3)), Error);
    EXPECT_THROW(SymMatrixd(Eigen::MatrixXd::Zero(0, 0)), Error);
}

TEST(SpdFactorize, IdentityAndDiagonal) {
    const auto f = spd_factorize(SymMatrixd::identity(3));
    EXPECT_TRUE(f.factor().isApprox(Eigen::MatrixXd::Identity(3, 3)));

    const auto g = spd_factorize(SymMatrixd(Eigen::Vector2d(4.0, 9.0).asDiagonal().toDenseMatrix()));
    EXPECT_DOUBLE_EQ(g.factor()(0, 0), 2.0);
    EXPECT_DOUBLE_EQ(g.factor()(1, 1), 3.0);
    EXPECT_DOUBLE_EQ(g.factor()(1, 0), 0.0);
}

TEST(SpdFactorize, Ar1Reconstruction) {
    const SymMatrixd sigma = ar1_covariance(5, 0.7);
    const auto f = spd_factorize(sigma);
    const Eigen::MatrixXd rec = f.factor() * f.factor().transpose();
    EXPECT_LT((rec - sigma.dense()).norm() / sigma.dense().norm(), 1e-10);
    for (Eigen::Index i = 0; i < 5; ++i) EXPECT_GT(f.factor()(i, i), 0.0);
}

TEST(SpdFactorize, RejectsIndefiniteAndNearSingular) {
    Eigen::MatrixXd a(2, 2);
    a << 1.0, 2.0, 2.0, 1.0;
    try {
        spd_factorize(SymMatrixd(a));
        FAIL() << "expected NotPositiveDefinite";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NotPositiveDefinite);
    }
    // Rank one: second pivot is round-off.
    Eigen::MatrixXd b(2, 2);
    b << 1.0, 1.0, 1.0, 1.0;
    EXPECT_THROW(spd_factorize(SymMatrixd(b)), Error);
    EXPECT_THROW(spd_factorize(SymMatrixd::zero(3)), Error);
}

TEST(SpdFactorize, RandomReconstructionUpToDim100) {
    std::mt19937_64 gen(11);
    for (Eigen::Index p : {1, 2, 7, 30, 100}) {
        const SymMatrixd m(random_spd(p, gen));
        const auto f = spd_factorize(m);
        const Eigen::MatrixXd rec = f.factor() * f.factor().transpose();
        EXPECT_LT((rec - m.dense()).norm() / m.dense().norm(), 1e-10) << "p=" << p;
    }
}

TEST(QuadForm, Examples) {
    EXPECT_DOUBLE_EQ(quad_form(spd_factorize(SymMatrixd::identity(2)), Eigen::Vector2d(3, 4)), 25.0);
    const auto f = spd_factorize(SymMatrixd(Eigen::Vector2d(1.0, 4.0).asDiagonal().toDenseMatrix()));
    EXPECT_DOUBLE_EQ(quad_form(f, Eigen::Vector2d(0, 2)), 1.0);
    EXPECT_THROW(quad_form(f, Eigen::Vector3d(1, 2, 3)), Error);
}

TEST(QuadForm, MatchesExplicitInverseAndIsPositive) {
    std::mt19937_64 gen(5);
    std::normal_distribution<double> d(0.0, 1.0);
    for (int rep = 0; rep < 20; ++rep) {
        const Eigen::Index p = 2 + rep;
        const SymMatrixd m(random_spd(p, gen));
        const auto f = spd_factorize(m);
        Eigen::VectorXd v(p);
        for (Eigen::Index k = 0; k < p; ++k) v(k) = d(gen);
        const double oracle = v.dot(m.dense().inverse() * v);
        const double q = quad_form(f, v);
        EXPECT_GT(q, 0.0);
        EXPECT_NEAR(q, oracle, 1e-10 * std::max(1.0, std::abs(oracle)));
        EXPECT_LT((spd_solve(f, v) - m.dense().inverse() * v).norm(), 1e-8 * (1.0 + v.norm()));
    }
}

TEST(FrobeniusDistSq, Examples) {
    const SymMatrixd ar = ar1_covariance(3, 0.7);
    EXPECT_DOUBLE_EQ(frobenius_dist_sq(ar, ar), 0.0);
    EXPECT_DOUBLE_EQ(frobenius_dist_sq(SymMatrixd::identity(2), SymMatrixd::zero(2)), 2.0);
    // 4 * 0.7^2 + 2 * 0.49^2
    EXPECT_NEAR(frobenius_dist_sq(ar, SymMatrixd::identity(3)), 2.4402, 1e-12);
    EXPECT_THROW(frobenius_dist_sq(SymMatrixd::identity(2), SymMatrixd::identity(3)), Error);
}

TEST(EigenSym, Examples) {
    const auto d = eigen_sym(SymMatrixd(Eigen::Vector2d(1.0, 3.0).asDiagonal().toDenseMatrix()));
    EXPECT_NEAR(d.values(0), 3.0, 1e-14);
    EXPECT_NEAR(d.values(1), 1.0, 1e-14);

    const auto id = eigen_sym(SymMatrixd::identity(4));
    for (Eigen::Index k = 0; k < 4; ++k) EXPECT_NEAR(id.values(k), 1.0, 1e-14);

    const auto ar = eigen_sym(ar1_covariance(3, 0.7));
    EXPECT_NEAR(ar.values.sum(), 3.0, 1e-10);
}

TEST(EigenSym, ReconstructionOrthonormalityAndTrace) {
    std::mt19937_64 gen(3);
    for (Eigen::Index p : {2, 5, 17, 40}) {
        const SymMatrixd m(random_spd(p, gen));
        const auto e = eigen_sym(m);
        const Eigen::MatrixXd rec = e.vectors * e.values.asDiagonal() * e.vectors.transpose();
        EXPECT_LT((rec - m.dense()).norm() / m.dense().norm(), 1e-9);
        EXPECT_LT((e.vectors.transpose() * e.vectors - Eigen::MatrixXd::Identity(p, p)).norm(), 1e-10);
        EXPECT_NEAR(e.values.sum(), m.trace(), 1e-10 * std::max(1.0, m.trace()));
        for (Eigen::Index k = 1; k < p; ++k) EXPECT_GE(e.values(k - 1), e.values(k));
    }
}

TEST(TraceNormalized, ScalesToDimension) {
    const SymMatrixd m(Eigen::Vector3d(1.0, 2.0, 3.0).asDiagonal().toDenseMatrix());
    EXPECT_NEAR(trace_normalized(m).trace(), 3.0, 1e-14);
    EXPECT_THROW(trace_normalized(SymMatrixd::zero(2)), Error);
}

TEST(Numerics, TemplatedOnScalar) {
    const SymMatrix<float> m(Eigen::MatrixXf::Identity(3, 3) * 4.0f);
    const auto f = spd_factorize(m);
    EXPECT_FLOAT_EQ(quad_form(f, Eigen::Vector3f(2, 0, 0)), 1.0f);
}

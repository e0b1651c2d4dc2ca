#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "tyshrink/simulation.hpp"

using namespace tyshrink;

namespace {

ExperimentPlan small_plan() {
    ExperimentPlan plan;
    plan.p = 6;
    plan.n_values = {3, 6, 12};
    plan.trials = 8;
    plan.estimators = {EstimatorId::Truth, EstimatorId::Proposed, EstimatorId::Tyler, EstimatorId::LedoitWolf,
                       EstimatorId::LedoitWolfClairvoyant, EstimatorId::Oracle, EstimatorId::Sample,
                       EstimatorId::Normalized};
    plan.master_seed = 5;
    return plan;
}

const MseRecord& find(const std::vector<MseRecord>& recs, EstimatorId id, Eigen::Index n) {
    return *std::find_if(recs.begin(), recs.end(), [&](const auto& r) { return r.estimator == id && r.n == n; });
}

}  // namespace

TEST(MseExperiment, TruthHasZeroErrorAndTylerSkippedBelowP) {
    const auto recs = run_mse_experiment(small_plan());
    ASSERT_EQ(recs.size(), 8u * 3u);
    for (Eigen::Index n : {3, 6, 12}) {
        EXPECT_EQ(find(recs, EstimatorId::Truth, n).mse_mean, 0.0);
        EXPECT_EQ(find(recs, EstimatorId::Truth, n).trials, 8);
    }
    EXPECT_TRUE(find(recs, EstimatorId::Tyler, 3).skipped);
    EXPECT_FALSE(find(recs, EstimatorId::Tyler, 6).skipped);
    for (const auto& r : recs) {
        if (!r.skipped) {
            EXPECT_EQ(r.trials + r.failures, 8);
            EXPECT_GE(r.mse_mean, 0.0);
            EXPECT_GE(r.mse_std, 0.0);
        }
    }
}

TEST(MseExperiment, DeterministicAcrossRunsAndThreadCounts) {
    auto plan = small_plan();
    const auto a = run_mse_experiment(plan);
    const auto b = run_mse_experiment(plan);
    plan.threads = 4;
    const auto c = run_mse_experiment(plan);
    ASSERT_EQ(a.size(), c.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (a[k].skipped) continue;
        EXPECT_EQ(a[k].mse_mean, b[k].mse_mean);
        EXPECT_EQ(a[k].mse_mean, c[k].mse_mean);
        EXPECT_EQ(a[k].mse_std, c[k].mse_std);
    }
}

TEST(MseExperiment, InvalidPlans) {
    auto plan = small_plan();
    plan.n_values = {6, 6};
    EXPECT_THROW(run_mse_experiment(plan), Error);
    plan = small_plan();
    plan.trials = 0;
    EXPECT_THROW(run_mse_experiment(plan), Error);
    plan = small_plan();
    plan.estimators.clear();
    EXPECT_THROW(run_mse_experiment(plan), Error);
}

TEST(MseExperiment, ErrorDecreasesWithSampleSize) {
    ExperimentPlan plan;
    plan.p = 20;
    plan.n_values = {10, 100};
    plan.trials = 30;
    plan.estimators = {EstimatorId::Proposed, EstimatorId::LedoitWolf, EstimatorId::LedoitWolfClairvoyant,
                       EstimatorId::Oracle, EstimatorId::Sample};
    plan.master_seed = 2;
    const auto recs = run_mse_experiment(plan);
    for (auto id : plan.estimators) {
        EXPECT_LT(find(recs, id, 100).mse_mean, find(recs, id, 10).mse_mean) << to_string(id);
    }
}

TEST(MseExperiment, OracleNotWorseThanProposed) {
    ExperimentPlan plan;
    plan.p = 20;
    plan.n_values = {10, 30, 60};
    plan.trials = 40;
    plan.estimators = {EstimatorId::Proposed, EstimatorId::Oracle};
    plan.master_seed = 3;
    const auto recs = run_mse_experiment(plan);
    for (Eigen::Index n : plan.n_values) {
        const auto& prop = find(recs, EstimatorId::Proposed, n);
        const auto& orac = find(recs, EstimatorId::Oracle, n);
        EXPECT_LE(orac.mse_mean, prop.mse_mean + 2.0 * prop.standard_error()) << "n=" << n;
    }
}

TEST(RhoGrid, Construction) {
    const auto g = rho_grid(0.05);
    ASSERT_EQ(g.size(), 21u);
    EXPECT_EQ(g.front(), 0.0);
    EXPECT_EQ(g.back(), 1.0);
    EXPECT_EQ(rho_grid(0.3).back(), 1.0);
    EXPECT_THROW(rho_grid(0.0), Error);
}

TEST(OracleGrid, IdentityTruthFavoursFullShrinkage) {
    const auto pts = run_oracle_grid(5, 10, DistributionKind::StudentT, 3.0, 0.0, {0.0, 1.0}, 20, 1);
    ASSERT_EQ(pts.size(), 2u);
    EXPECT_EQ(pts[1].mse, 0.0);
    EXPECT_GT(pts[0].mse, 0.0);
}

TEST(OracleGrid, MinimumNearOracleAndCurveConvex) {
    const auto grid = rho_grid(0.05);
    const auto pts = run_oracle_grid(20, 30, DistributionKind::StudentT, 3.0, 0.7, grid, 400, 9);
    const auto best = std::min_element(pts.begin(), pts.end(), [](auto a, auto b) { return a.mse < b.mse; });
    const double rho_o = oracle_rho(ar1_covariance(20, 0.7), 30).value();
    EXPECT_LE(std::abs(best->rho - rho_o), 0.1);
    // Empirical MSE is quadratic in rho for a fixed set of draws.
    const auto k = static_cast<std::size_t>(best - pts.begin());
    for (std::size_t j = 0; j + 1 < pts.size(); ++j) {
        if (j + 1 <= k) EXPECT_GT(pts[j].mse, pts[j + 1].mse);
        if (j >= k) EXPECT_LT(pts[j].mse, pts[j + 1].mse);
    }
}

TEST(OracleGrid, Deterministic) {
    const auto a = run_oracle_grid(6, 8, DistributionKind::Gaussian, 0.0, 0.5, {0.1, 0.5}, 10, 4);
    const auto b = run_oracle_grid(6, 8, DistributionKind::Gaussian, 0.0, 0.5, {0.1, 0.5}, 10, 4, 3);
    EXPECT_EQ(a[0].mse, b[0].mse);
    EXPECT_EQ(a[1].mse, b[1].mse);
    EXPECT_THROW(run_oracle_grid(6, 8, DistributionKind::Gaussian, 0.0, 0.5, {}, 10, 4), Error);
    EXPECT_THROW(run_oracle_grid(6, 8, DistributionKind::Gaussian, 0.0, 0.5, {1.5}, 10, 4), Error);
}

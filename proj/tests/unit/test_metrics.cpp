#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "cpmfit/errors.hpp"
#include "cpmfit/metrics.hpp"
#include "cpmfit/superellipse.hpp"
#include "oracles.hpp"

namespace cpmfit {
namespace {

const BetaVector kCircle{0.0, 1.0, 1.0, 0.0, 2.0};

TEST(Rmse, Examples) {
    const std::vector<double> a{1, 2, 3};
    EXPECT_DOUBLE_EQ(rmse(a, a), 0.0);
    EXPECT_NEAR(rmse(std::vector<double>{0, 0}, std::vector<double>{3, 4}), std::sqrt(12.5), 1e-15);
    EXPECT_DOUBLE_EQ(rmse(std::vector<double>{1}, std::vector<double>{4}), 3.0);
}

TEST(Rmse, Errors) {
    EXPECT_THROW(rmse(std::vector<double>{1, 2}, std::vector<double>{1}), LengthMismatchError);
    EXPECT_THROW(rmse(std::vector<double>{}, std::vector<double>{}), EmptyInputError);
}

TEST(Mape, Examples) {
    const std::vector<double> a{2, 4};
    EXPECT_DOUBLE_EQ(mape(a, a).value, 0.0);
    EXPECT_DOUBLE_EQ(mape(std::vector<double>{2}, std::vector<double>{1}).value, 50.0);
    const MapeResult r = mape(std::vector<double>{1e-15, 2}, std::vector<double>{1, 2});
    EXPECT_DOUBLE_EQ(r.value, 0.0);
    EXPECT_EQ(r.n_skipped, 1u);
    EXPECT_EQ(r.n_used, 1u);
}

TEST(Mape, AllSkippedIsUndefined) {
    EXPECT_THROW(mape(std::vector<double>{0.0, 1e-13}, std::vector<double>{1, 1}), UndefinedMapeError);
    EXPECT_THROW(mape(std::vector<double>{1}, std::vector<double>{1, 2}), LengthMismatchError);
}

TEST(Metrics, PermutationInvariant) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> d(0.5, 2.0);
    std::vector<double> t(30), p(30);
    for (std::size_t i = 0; i < t.size(); ++i) {
        t[i] = d(rng);
        p[i] = d(rng);
    }
    const double r0 = rmse(t, p);
    const double m0 = mape(t, p).value;
    std::vector<std::size_t> idx(t.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::shuffle(idx.begin(), idx.end(), rng);
    std::vector<double> t2, p2;
    for (auto i : idx) {
        t2.push_back(t[i]);
        p2.push_back(p[i]);
    }
    EXPECT_NEAR(rmse(t2, p2), r0, 1e-14);
    EXPECT_NEAR(mape(t2, p2).value, m0, 1e-12);
}

TEST(ResidualSd, Examples) {
    EXPECT_DOUBLE_EQ(residual_sd(std::vector<double>{1, 1, 1}), 0.0);
    EXPECT_NEAR(residual_sd(std::vector<double>{0, 2}), std::numbers::sqrt2, 1e-15);
    EXPECT_NEAR(residual_sd(std::vector<double>{-1, 0, 1}), 1.0, 1e-15);
    EXPECT_THROW(residual_sd(std::vector<double>{1}), InsufficientDataError);
}

TEST(NearestPoint, Examples) {
    EXPECT_NEAR(nearest_point_on_curve(kCircle, {0.6, 0.8}).distance_squared, 0.0, 1e-15);
    EXPECT_NEAR(nearest_point_on_curve(kCircle, {0.0, 0.0}).distance_squared, 1.0, 1e-12);
    const NearestPoint far = nearest_point_on_curve(kCircle, {2.0, 0.0});
    EXPECT_NEAR(far.distance_squared, 1.0, 1e-12);
    EXPECT_NEAR(far.point.m_dot, 1.0, 1e-9);
    EXPECT_NEAR(far.point.pi, 0.0, 1e-9);
}

TEST(NearestPoint, AgreesWithBruteForceOracle) {
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> unit(-0.3, 1.3);
    for (int i = 0; i < 1000; ++i) {
        const BetaVector b = testing::random_beta(rng, {.cur_lo = 1.05, .cur_hi = 20.0});
        const OperatingPoint p{unit(rng), unit(rng)};
        const double ours = nearest_point_on_curve(b, p).distance_squared;
        const double oracle = testing::brute_force_distance2(b, p);
        ASSERT_NEAR(ours, oracle, 1e-8) << "pair " << i;
        ASSERT_LE(ours, oracle + 1e-14) << "projection worse than sampled point, pair " << i;
    }
}

TEST(NearestPoint, ReturnedPointLiesOnCurve) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const BetaVector b = testing::random_beta(rng);
        const NearestPoint np = nearest_point_on_curve(b, {unit(rng), unit(rng)});
        EXPECT_LT(std::abs(implicit_residual(b, np.point)), 1e-9);
    }
}

TEST(OrthoSum, Examples) {
    EXPECT_NEAR(ortho_sum(kCircle, sample_curve(kCircle, 20)), 0.0, 1e-20);
    const std::vector<OperatingPoint> two{{0.0, 0.0}, {2.0, 0.0}};
    EXPECT_NEAR(ortho_sum(kCircle, two), 2.0, 1e-12);
    EXPECT_THROW(ortho_sum(kCircle, std::vector<OperatingPoint>{}), EmptyInputError);
}

TEST(OrthoSum, NormalOffsetsGiveKnownSum) {
    // Offsets of delta along the unit normal of the implicit function.
    std::mt19937_64 rng(31);
    const double delta = 0.01;
    for (int trial = 0; trial < 10; ++trial) {
        const BetaVector b = testing::random_beta(rng);
        const double sm = b.m_ch - b.m_zs;
        const double sp = b.pi_zs - b.pi_ch;
        std::vector<OperatingPoint> pts;
        for (int i = 0; i < 20; ++i) {
            const double t = std::numbers::pi / 2.0 * (0.2 + 0.6 * i / 19.0);
            const OperatingPoint q = testing::curve_point_from_angle(b, t);
            const double u = (q.m_dot - b.m_zs) / sm;
            const double v = (q.pi - b.pi_ch) / sp;
            double gx = b.cur * std::pow(u, b.cur - 1.0) / sm;
            double gy = b.cur * std::pow(v, b.cur - 1.0) / sp;
            const double n = std::hypot(gx, gy);
            gx /= n;
            gy /= n;
            const double sign = (i % 2 == 0) ? 1.0 : -1.0;
            pts.push_back({q.m_dot + sign * delta * gx, q.pi + sign * delta * gy});
        }
        double oracle = 0.0;
        for (const auto& p : pts) oracle += testing::brute_force_distance2(b, p);
        const double got = ortho_sum(b, pts);
        EXPECT_NEAR(got, oracle, 1e-8);
        EXPECT_NEAR(got, 20.0 * delta * delta, 1e-4);
    }
}

TEST(OrthoSum, NonNegativeAndZeroOnlyOnCurve) {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        const BetaVector b = testing::random_beta(rng);
        const OperatingPoint p{unit(rng), unit(rng)};
        const std::vector<OperatingPoint> one{p};
        const double d = ortho_sum(b, one);
        EXPECT_GE(d, 0.0);
        if (std::abs(implicit_residual(b, p)) > 1e-6) EXPECT_GT(d, 0.0);
    }
}

TEST(EvaluatePrediction, OnCurvePointsGiveZeroMetrics) {
    std::mt19937_64 rng(2);
    const BetaVector b = testing::random_beta(rng);
    const auto pts = testing::sample_interior(b, 15);
    for (EvalMode mode : {EvalMode::Pressure, EvalMode::Massflow}) {
        const Evaluation ev = evaluate_prediction(b, pts, mode);
        EXPECT_NEAR(ev.rmse.value, 0.0, 1e-10);
        EXPECT_NEAR(ev.mape.value, 0.0, 1e-8);
        EXPECT_NEAR(ev.ortho.value, 0.0, 1e-10);
        EXPECT_EQ(ev.n_out_of_domain, 0u);
        EXPECT_EQ(ev.n_points, 15u);
    }
}

TEST(EvaluatePrediction, ThreeFourFivePoint) {
    const std::vector<OperatingPoint> one{{0.6, 0.9}};
    const Evaluation ev = evaluate_prediction(kCircle, one, EvalMode::Pressure);
    EXPECT_NEAR(ev.rmse.value, 0.1, 1e-15);
    EXPECT_NEAR(ev.max_abs_error, 0.1, 1e-15);
    EXPECT_EQ(ev.rmse.kind, MetricKind::Rmse);
    EXPECT_FALSE(ev.residual_sd.defined());
}

TEST(EvaluatePrediction, ClampsOutOfDomainAbscissa) {
    const std::vector<OperatingPoint> one{{1.5, 0.1}};
    const Evaluation ev = evaluate_prediction(kCircle, one, EvalMode::Pressure);
    EXPECT_EQ(ev.n_out_of_domain, 1u);
    ASSERT_EQ(ev.out_of_domain.size(), 1u);
    EXPECT_TRUE(ev.out_of_domain[0]);
    EXPECT_NEAR(ev.rmse.value, 0.1, 1e-15);  // prediction is pi_ch = 0
}

TEST(EvaluatePrediction, SummariesCountEveryPoint) {
    std::mt19937_64 rng(8);
    const BetaVector b = testing::random_beta(rng);
    auto pts = testing::add_noise(testing::sample_interior(b, 12), 0.01, rng);
    pts.push_back({0.5, 0.0});  // truth pi = 0 is skipped by MAPE
    const Evaluation ev = evaluate_prediction(b, pts, EvalMode::Pressure);
    for (const ErrorSummary* s : {&ev.rmse, &ev.mape, &ev.residual_sd, &ev.ortho}) {
        EXPECT_EQ(s->n_valid + s->n_skipped, pts.size());
        EXPECT_GE(s->sd, 0.0);
    }
    EXPECT_EQ(ev.mape.n_skipped, 1u);
    EXPECT_EQ(ev.get(MetricKind::Ortho).kind, MetricKind::Ortho);
}

TEST(EvaluatePrediction, MapeDivergesWhileOrthoStaysSmall) {
    // Choke region of a normalized line: truth pressures near zero.
    const BetaVector b{0.0, 1.0, 1.0, 0.0, 3.0};
    std::vector<OperatingPoint> pts;
    for (int i = 0; i < 10; ++i) {
        const double m = 0.9990 + 0.0001 * i;
        pts.push_back({m, pressure_at(b, m) * 0.001 + 1e-4});
    }
    pts.push_back({1.0, 1e-4});
    const Evaluation ev = evaluate_prediction(b, pts, EvalMode::Pressure);
    EXPECT_GT(ev.mape.value, 100.0);
    EXPECT_LT(ev.ortho.value, 0.01);
}

TEST(MetricNames, RoundTrip) {
    for (MetricKind k : {MetricKind::Rmse, MetricKind::Mape, MetricKind::Ortho}) {
        EXPECT_EQ(parse_metric(to_string(k)), k);
    }
    EXPECT_EQ(parse_mode("massflow"), EvalMode::Massflow);
    EXPECT_THROW(parse_metric("bogus"), DomainError);
}

}  // namespace
}  // namespace cpmfit

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "hpns/jeffery_hamel.hpp"
#include "hpns/transform.hpp"
#include "hpns/weighted_spaces.hpp"

using namespace hpns;

TEST(Weights, EtaValues) {
    EXPECT_DOUBLE_EQ(eta(2, 0, 1), 0.5);
    EXPECT_DOUBLE_EQ(eta(3, 1, 2), 2.0 / 17.0);
    EXPECT_NEAR(eta(2.5, 1.5, 1e-8) / std::pow(1e-8, 1.5), 1.0, 1e-12);
    EXPECT_THROW(eta(2, -0.5, 0.0), DomainError);
}

TEST(Weights, MuValues) {
    EXPECT_DOUBLE_EQ(mu(2, 0, 1, 1), 0.5);
    EXPECT_DOUBLE_EQ(mu(2, 1, 0.5, 4), 1.0 / 20.0);
    EXPECT_DOUBLE_EQ(mu(3.5, 0, 0.7, 1), 1.0 / (1 + std::pow(0.7, 3.5)));
    EXPECT_DOUBLE_EQ(mu(2, -0.5, 1, 4), std::pow(4.0, 0.5) / 17.0 * (1 + std::pow(4.0, -0.5)));
    EXPECT_THROW(mu(2, -0.5, 0.0, 2), DomainError);
    EXPECT_THROW(mu(2, 0, 1.0, 0.5), DomainError);
}

TEST(Weights, CutoffPlateausAndMidpoint) {
    EXPECT_EQ(cutoff_chi(0.0), 1.0);
    EXPECT_EQ(cutoff_chi(0.5), 1.0);
    EXPECT_EQ(cutoff_chi(1.0), 1.0);
    EXPECT_DOUBLE_EQ(cutoff_chi(1.5), 0.5);
    EXPECT_EQ(cutoff_chi(2.0), 0.0);
    EXPECT_EQ(cutoff_chi(3.0), 0.0);
    for (double t = 1.0; t < 2.0; t += 0.01) EXPECT_GE(cutoff_chi(t), cutoff_chi(t + 0.01));
}

TEST(NormBoundary, WeightHasUnitNorm) {
    const auto kg = KGrid::log_spaced(1e-4, 100, 200);
    for (double q : {0.0, 0.5, 1.5}) {
        const auto t = BoundaryTrace::sample(kg, [&](double k) { return cplx(eta(2.5, q, k)); });
        EXPECT_NEAR(norm_boundary(kg, t, {Family::A, 2.5, q}).value, 1.0, 1e-14);
    }
    EXPECT_EQ(norm_boundary(kg, BoundaryTrace(kg.size()), {Family::T, 2.5, 1.5}).value, 0.0);
}

TEST(NormBoundary, GaussianMaximum) {
    // sup (1 + k²) e^{−k²/2} = 2e^{−1/2} at k² = 1.
    const auto kg = KGrid::uniform(1e-3, 10);
    const auto t = BoundaryTrace::sample(kg, [](double k) { return cplx(std::exp(-k * k / 2)); });
    EXPECT_NEAR(norm_boundary(kg, t, {Family::A, 2, 0}).value, 2 * std::exp(-0.5), 1e-9);
}

TEST(NormBoundary, TSumsDerivativeTerms) {
    const auto kg = KGrid::log_spaced(1e-3, 50, 300);
    const auto t = BoundaryTrace::sample(kg, [](double k) { return cplx(std::exp(-k * k), 0.3 * k * std::exp(-k * k)); });
    const auto r = norm_boundary(kg, t, {Family::T, 2, 1.5});
    ASSERT_EQ(r.terms.size(), 2u);
    double s = 0;
    for (const auto& term : r.terms) s += term.value;
    EXPECT_DOUBLE_EQ(r.value, s);
    EXPECT_EQ(r.terms[1].q, -0.5);
    EXPECT_TRUE(std::isfinite(r.value));
}

TEST(NormBulk, WeightHasUnitNorm) {
    const auto kg = KGrid::log_spaced(1e-3, 40, 64);
    const auto yg = YGrid::stretched(100, 64, 0.05);
    const auto f = SpectralField::sample(kg, yg, [](double k, double y) { return cplx(mu(2.5, 1.5, k, y)); });
    EXPECT_NEAR(norm_bulk(kg, yg, f, {Family::B, 2.5, 1.5}).value, 1.0, 1e-14);
    EXPECT_EQ(norm_bulk(kg, yg, SpectralField(kg.size(), yg.size()), {Family::U, 2.5, 1.5}).value, 0.0);
}

TEST(NormBulk, FamilyTermCounts) {
    const auto kg = KGrid::log_spaced(1e-2, 20, 40);
    const auto yg = YGrid::stretched(60, 40, 0.05);
    const auto f = SpectralField::sample(kg, yg, [](double k, double y) { return cplx(std::exp(-std::abs(k) * y) / (y * y * y)); });
    EXPECT_EQ(norm_bulk(kg, yg, f, {Family::U, 2.5, 1.5}).terms.size(), 2u * 3u);
    EXPECT_EQ(norm_bulk(kg, yg, f, {Family::P, 2.5, 2.5}).terms.size(), 2u * 3u);
    EXPECT_EQ(norm_bulk(kg, yg, f, {Family::R, 2.5, 2.5}).terms.size(), 2u * 2u);
    EXPECT_THROW(SpaceIndex(Family::R, 0.5, 2), DomainError);
    EXPECT_THROW(SpaceIndex(Family::U, 2, -1), DomainError);
}

TEST(NormBulk, JefferyHamelVelocityIsInU) {
    // Finiteness: the U_{2.5,0} grid-sup of û_JH stays bounded as the grid refines.
    const auto s = solve_jh(0.01, 0, ThetaGrid());
    std::vector<double> vals;
    for (std::size_t n : {64u, 128u, 256u}) {
        const auto kg = KGrid::log_spaced(1e-4, 40, n);
        const auto yg = YGrid::stretched(200, n / 2, 0.02);
        const auto t = spectral_trace(s, kg, yg);
        vals.push_back(norm_bulk(kg, yg, t.u, {Family::U, 2.5, 0}).value);
    }
    EXPECT_TRUE(std::isfinite(vals.back()));
    EXPECT_LT(std::abs(vals[2] - vals[1]), 0.1 * vals[2]);
}

TEST(TaylorProject, Examples) {
    const auto kg = KGrid::uniform(1e-3, 5);
    const auto odd = BoundaryTrace::sample(kg, [](double k) { return cplx(0, std::sin(k)); });
    const auto g1 = taylor_project(kg, odd, 1.5);
    for (std::size_t i = 0; i < kg.size(); ++i) EXPECT_NEAR(std::abs(g1[i] - odd[i]), 0.0, 1e-12);

    const auto one = BoundaryTrace::sample(kg, [](double) { return cplx(1.0); });
    const auto g2 = taylor_project(kg, one, 1.5);
    for (std::size_t i = 0; i < kg.size(); ++i) EXPECT_NEAR(std::abs(g2[i] - (1 - cutoff_chi(std::abs(kg[i])))), 0.0, 1e-12);

    // Gaussian with ⌊q⌋ = 2: value and slope vanish at 0.
    const auto fine = KGrid::uniform(1e-5, 3);
    const auto gauss = BoundaryTrace::sample(fine, [](double k) { return cplx(std::exp(-k * k / 2), 0.2 * k); });
    const auto g3 = taylor_project(fine, gauss, 2.5);
    const std::size_t z = *fine.zero_index();
    EXPECT_LT(std::abs(g3[z]), 1e-14);
    EXPECT_LT(std::abs((g3[z + 1] - g3[z - 1]) / 2e-5), 1e-8);
    EXPECT_GT(norm_boundary(fine, taylor_project(fine, gauss, 2.5), {Family::W, 2, 1.5}).value, 0.0);
}

TEST(Inclusion, NormsOrderedUpToGridConstant) {
    const auto kg = KGrid::log_spaced(1e-3, 30, 120);
    const auto t = BoundaryTrace::sample(kg, [](double k) { return cplx(std::pow(std::abs(k), 1.2) * std::exp(-std::abs(k))); });
    const double lo = norm_boundary(kg, t, {Family::A, 1.0, 0.5}).value;
    const double hi = norm_boundary(kg, t, {Family::A, 2.0, 1.0}).value;
    double c = 0;
    for (std::size_t i = 0; i < kg.size(); ++i)
        if (kg[i] != 0) c = std::max(c, eta(2.0, 1.0, kg[i]) / eta(1.0, 0.5, kg[i]));
    EXPECT_LE(lo, c * hi * (1 + 1e-12));
}

TEST(Regularity, SupDecayBoundedByNorm) {
    // |f(x,y)| ≤ ∫|f̂|dk ≤ ‖f̂;B‖ y^{−q}∫dk/(1+(|k|y)^α) ≤ 2α/(α−1)·‖f̂;B‖ y^{−1−q}.
    const double alpha = 2.5, q = 0.5;
    const auto kg = KGrid::log_spaced(1e-5, 60, 400);
    const auto yg = YGrid::stretched(50, 40, 0.05);
    const auto f = SpectralField::sample(kg, yg, [&](double k, double y) {
        return mu(alpha, q, k, y) * std::polar(1.0, 0.3 * k) * (1 + 0.5 * std::cos(k * y));
    });
    const double norm = norm_bulk(kg, yg, f, {Family::B, alpha, q}).value;
    std::vector<double> xs;
    for (double x = -5; x <= 5; x += 0.1) xs.push_back(x);
    const InverseTransform inv(kg, xs);
    for (std::size_t j = 0; j < yg.size(); j += 5) {
        const auto vals = inv.apply(f, j);
        double sup = 0;
        for (double v : vals) sup = std::max(sup, std::abs(v));
        EXPECT_LE(std::pow(yg[j], 1 + q) * sup, 2 * alpha / (alpha - 1) * norm);
    }
}

TEST(ConvolutionBound, FiniteAndStableUnderRefinement) {
    auto run = [](int per_decade) {
        std::vector<double> ks, ys;
        for (int i = 0; i <= 6 * per_decade; ++i) ks.push_back(std::pow(10.0, -4 + double(i) / per_decade));
        for (int i = 0; i <= 3 * per_decade; ++i) ys.push_back(std::pow(10.0, double(i) / per_decade));
        return convolution_weight_bound(2.5, 0.5, ks, ys);
    };
    const auto a = run(3);
    const auto b = run(6);
    EXPECT_TRUE(std::isfinite(a.sup_ratio));
    EXPECT_LT(std::abs(b.sup_ratio - a.sup_ratio), 0.1 * b.sup_ratio);
}

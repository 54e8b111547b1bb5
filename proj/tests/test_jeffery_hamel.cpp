#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "hpns/jeffery_hamel.hpp"
#include "support/shooting.hpp"

using namespace hpns;

namespace {

double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

TEST(ApplyL, ZeroMapsToZero) {
    const ThetaGrid g(129);
    const std::vector<double> z(129, 0.0);
    for (double v : apply_L(g, z)) EXPECT_EQ(v, 0.0);
}

TEST(ApplyL, VanishesAtStart) {
    const ThetaGrid g(257);
    std::vector<double> s(257);
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = std::exp(g[i]);
    EXPECT_EQ(apply_L(g, s).front(), 0.0);
}

TEST(ApplyL, CosineEndValueMatchesFineQuadrature) {
    const ThetaGrid g(1025);
    std::vector<double> c(g.size());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = std::cos(2 * g[i]);
    // Gauss-Legendre on many panels: L[cos2θ](π/2) = −½∫cos2s sin2s ds = 0.
    const GaussLegendre gl(20);
    double ref = 0;
    for (int p = 0; p < 64; ++p) {
        const double a = -pi / 2 + pi * p / 64, b = a + pi / 64;
        ref += gl.integrate([](double s) { return -0.5 * std::cos(2 * s) * std::sin(2 * s); }, a, b);
    }
    EXPECT_NEAR(apply_L(g, c).back(), ref, 1e-13);
}

TEST(ApplyL, InvertsTheHarmonicOperator) {
    const ThetaGrid g(2049);
    std::vector<double> gv(g.size());
    for (std::size_t i = 0; i < gv.size(); ++i) gv[i] = std::exp(std::sin(g[i])) + g[i] * g[i];
    const auto L = apply_L(g, gv);
    std::vector<double> h(g.size());
    for (std::size_t i = 0; i < h.size(); ++i) h[i] = 0.3 * std::sin(2 * g[i]) - 1.1 * std::cos(2 * g[i]) - L[i];
    const double dx = g.spacing();
    double r = 0;
    for (std::size_t i = 2; i + 2 < h.size(); ++i) {
        const double hpp = (-h[i - 2] + 16 * h[i - 1] - 30 * h[i] + 16 * h[i + 1] - h[i + 2]) / (12 * dx * dx);
        r = std::max(r, std::abs(hpp + 4 * h[i] - gv[i]));
    }
    EXPECT_LT(r, 1e-6);
}

TEST(SolveJH, ZeroFluxIsZeroSolution) {
    const auto s = solve_jh(0.0, 0, ThetaGrid());
    EXPECT_EQ(s.A, 0.0);
    EXPECT_EQ(s.C, 0.0);
    EXPECT_EQ(s.sup_f(), 0.0);
}

TEST(SolveJH, RejectsInvalidRequests) {
    const ThetaGrid g;
    EXPECT_THROW(solve_jh(0.01, 1, g), InvalidBranch);
    EXPECT_THROW(solve_jh(0.0, -1, g), InvalidBranch);
    EXPECT_THROW(solve_jh(-0.01, 2, g), InvalidBranch);
    EXPECT_THROW(solve_jh(0.06, 0, g), DomainError);
    JHOptions opt;
    opt.max_iter = 2;
    try {
        solve_jh(-0.04, 1, g, opt);
        FAIL() << "expected NonConvergence";
    } catch (const NonConvergence& e) {
        EXPECT_EQ(e.parameter(), -0.04);
    }
}

// Reference values from the shooting oracle (RK4, step π/32768, Newton).
TEST(SolveJH, MatchesFrozenShootingValues) {
    const ThetaGrid g;
    const auto m = solve_jh(-0.01, -1, g);
    EXPECT_NEAR(m.A, -0.3911411610825553, 1e-10);
    EXPECT_NEAR(m.C, 0.03184365208684855, 1e-10);
    const auto p = solve_jh(-0.01, 1, g);
    EXPECT_NEAR(p.A, 0.3911411610825553, 1e-10);
    EXPECT_NEAR(p.A, std::sqrt(0.48 / pi), 50 * 0.01);
    const auto s = solve_jh(0.01, 0, g);
    EXPECT_NEAR(s.C, 0.006378878027273774, 1e-12);
    EXPECT_NEAR(*std::max_element(s.f.begin(), s.f.end()), 0.006372120677943909, 1e-12);
    EXPECT_NEAR(solve_jh(-0.01, 0, g).C, -0.006353547656089811, 1e-12);
}

TEST(SolveJH, AgreesWithShootingOracleOnEveryBranch) {
    const ThetaGrid g;
    for (double phi : {-0.03, -0.01, -0.002, 0.004, 0.02}) {
        for (int b : {-1, 0, 1}) {
            if (b != 0 && phi > 0) continue;
            const auto s = solve_jh(phi, b, g);
            const auto o = oracle::shoot_branch(phi, b);
            EXPECT_NEAR(s.A, o.A, 1e-10) << phi << " " << b;
            EXPECT_NEAR(s.C, o.C, 1e-10) << phi << " " << b;
            EXPECT_LT(sup_diff(s.f, o.f), 1e-10) << phi << " " << b;
            EXPECT_NEAR(s.f_prime.front(), o.fp0, 1e-9);
        }
    }
}

TEST(SolveJHProperties, BoundaryFluxAndBall) {
    const ThetaGrid g;
    for (double phi : {-0.05, -0.02, -0.005, 0.001, 0.03, 0.05}) {
        for (int b : {-1, 0, 1}) {
            if (b != 0 && phi > 0) continue;
            const auto s = solve_jh(phi, b, g);
            EXPECT_LT(std::abs(s.f.front()), 1e-12);
            EXPECT_LT(std::abs(s.f.back()), 1e-12);
            EXPECT_NEAR(flux_of(s), phi, 1e-8);
            const double A0 = b == 0 ? 0.0 : b * std::sqrt(-48 * phi / pi);
            EXPECT_LE(std::abs(s.A - A0), 50 * std::abs(phi));
            double fbar = 0;
            for (std::size_t i = 0; i < g.size(); ++i) {
                const double c2 = std::cos(g[i]) * std::cos(g[i]);
                const double base = s.A * std::sin(2 * g[i]) + s.C * c2 - s.A * s.A / 3 * c2 * c2;
                fbar = std::max(fbar, std::abs(s.f[i] - base));
            }
            EXPECT_LE(fbar, 600 * std::pow(std::abs(phi), 1.5));
        }
    }
}

TEST(SolveJHProperties, OdeResidualOnSymmetricBranch) {
    const ThetaGrid g;
    for (double phi : {-0.02, 0.01, 0.05}) {
        const auto s = solve_jh(phi, 0, g);
        EXPECT_LT(ode_residual(s), 10 * 1e-12) << phi;
    }
}

// On the asymmetric branches f'''''' ≈ 64A, so the 4th-order difference
// quotient alone carries an error near h⁴·64A/90 ≈ 2e-11 plus rounding of
// a few ulps of f amplified by 64/(12h²); the residual sits at that floor,
// not at 10·tol.
TEST(SolveJHProperties, OdeResidualOnAsymmetricBranchesAtDifferenceFloor) {
    const ThetaGrid g;
    const double h = g.spacing();
    for (double phi : {-0.02, -0.005}) {
        const auto s = solve_jh(phi, 1, g);
        const double floor = std::pow(h, 4) * 64 * std::abs(s.A) / 90 + 1e-15 * s.sup_f() * 6 / (h * h);
        EXPECT_LT(ode_residual(s), 10 * 1e-12 + 2 * floor) << phi;
    }
}

TEST(SolveJHProperties, ReflectionAndParity) {
    const ThetaGrid g;
    for (double phi : {-0.04, -0.01, -0.001}) {
        const auto p = solve_jh(phi, 1, g);
        const auto m = solve_jh(phi, -1, g);
        const auto z = solve_jh(phi, 0, g);
        const std::size_t n = g.size();
        double refl = 0, par = 0;
        for (std::size_t i = 0; i < n; ++i) {
            refl = std::max(refl, std::abs(p.f[i] - m.f[n - 1 - i]));
            par = std::max(par, std::abs(z.f[i] - z.f[n - 1 - i]));
        }
        EXPECT_LT(refl, 1e-10);
        EXPECT_LT(par, 1e-10);
    }
}

TEST(SolveJHProperties, LeadingOrderErrors) {
    const ThetaGrid g;
    auto err0 = [&](double phi) {
        const auto s = solve_jh(phi, 0, g);
        double e = 0;
        for (std::size_t i = 0; i < g.size(); ++i)
            e = std::max(e, std::abs(s.f[i] - 2 * phi / pi * std::cos(g[i]) * std::cos(g[i])));
        return e;
    };
    EXPECT_NEAR(err0(1e-3), 5.9116549519e-8, 1e-12);
    EXPECT_NEAR(err0(1e-4), 5.9105276035e-10, 1e-14);
    for (double phi : {1e-3, -1e-3, 1e-4, -1e-4, 0.05}) EXPECT_LE(err0(phi), 600 * std::pow(std::abs(phi), 1.5));
    for (double phi : {-1e-2, -1e-3}) {
        const auto s = solve_jh(phi, 1, g);
        double e = 0;
        for (std::size_t i = 0; i < g.size(); ++i) e = std::max(e, std::abs(s.f[i] - std::sqrt(-48 * phi / pi) * std::sin(2 * g[i])));
        EXPECT_LT(e / std::abs(phi), 2.0);
    }
}

TEST(EvalCartesian, AxisScalingAndDiagonal) {
    const auto s = solve_jh(0.01, 0, ThetaGrid());
    const auto a = eval_cartesian(s, 0.0, 2.0);
    EXPECT_EQ(a.u, 0.0);
    EXPECT_NEAR(a.v, s.f[512] / 2.0, 1e-16);
    const auto b = eval_cartesian(s, 0.7, 1.3);
    const auto c = eval_cartesian(s, 2.1, 3.9);
    EXPECT_NEAR(c.u, b.u / 3.0, 1e-17);
    EXPECT_NEAR(c.v, b.v / 3.0, 1e-17);
    const auto o = oracle::shoot_branch(0.01, 0, 1024, 32);
    const double fq = o.f[768];  // θ = π/4
    const auto d = eval_cartesian(s, 1.0, 1.0);
    EXPECT_NEAR(d.u, fq / 2, 1e-12);
    EXPECT_NEAR(d.v, fq / 2, 1e-12);
    EXPECT_THROW(eval_cartesian(s, 1.0, 0.0), DomainError);
}

TEST(ScanBranches, RowCountsAndOrdering) {
    const ThetaGrid g;
    const auto one = scan_branches(0.01, 0.01, 1, g);
    ASSERT_EQ(one.size(), 1u);
    EXPECT_EQ(one[0].branch, 0);
    const auto three = scan_branches(-0.01, -0.01, 1, g);
    ASSERT_EQ(three.size(), 3u);
    EXPECT_NEAR(three[0].A, -0.3911411610825553, 1e-10);
    EXPECT_NEAR(three[2].A, 0.3911411610825553, 1e-10);
    EXPECT_LT(std::abs(three[1].A), 1e-4);
    const auto t = scan_branches(-0.02, 0.02, 9, g);
    EXPECT_EQ(t.size(), 4u * 3 + 1 + 4);
    for (std::size_t i = 1; i < t.size(); ++i)
        EXPECT_TRUE(t[i - 1].phi < t[i].phi || (t[i - 1].phi == t[i].phi && t[i - 1].branch < t[i].branch));
}

TEST(SpectralTrace, ZeroFluxGivesZeroField) {
    const auto kg = KGrid::log_spaced(0.01, 10, 16);
    const auto yg = YGrid::stretched(10, 8, 0.1);
    const auto t = spectral_trace(solve_jh(0.0, 0, ThetaGrid()), kg, yg);
    EXPECT_EQ(t.u.max_abs(), 0.0);
    EXPECT_EQ(t.v.max_abs(), 0.0);
}

TEST(SpectralTrace, ZeroModeCarriesFluxAndAsymmetry) {
    const ThetaGrid g;
    const auto s = solve_jh(-0.01, 1, g);
    const JHTransform G(s);
    const auto g0 = G.direct(0.0);
    EXPECT_NEAR(g0[1].real(), -0.01, 1e-10);
    // ∫u dx = ∫ tanθ f dθ from the shooting profile.
    const auto o = oracle::shoot_branch(-0.01, 1, 4096, 8);
    std::vector<double> w(o.f.size());
    for (std::size_t i = 1; i + 1 < w.size(); ++i) w[i] = std::tan(o.theta[i]) * o.f[i];
    w.front() = -o.fp0;  // limit of tanθ·f at −π/2
    w.back() = std::tan(o.theta[w.size() - 2]) * o.f[w.size() - 2];
    double asym = 0;
    for (std::size_t i = 0; i + 1 < w.size(); ++i) asym += 0.5 * (w[i] + w[i + 1]) * (o.theta[i + 1] - o.theta[i]);
    EXPECT_NEAR(g0[0].real(), asym, 1e-6);
    EXPECT_LT(std::abs(g0[0].imag()), 1e-12);
    const auto kg = KGrid::log_spaced(1e-3, 5, 20);
    const auto yg = YGrid::stretched(20, 10, 0.2);
    const auto t = spectral_trace(s, kg, yg);
    for (std::size_t j = 0; j < yg.size(); ++j) EXPECT_NEAR(two_pi * t.u(*kg.zero_index(), j).real(), asym, 1e-6);
}

TEST(SpectralTrace, TabulationMatchesDirectQuadrature) {
    const auto s = solve_jh(-0.02, -1, ThetaGrid());
    const JHTransform G(s);
    for (double kap : {-20.0, -3.3, -0.5, -1e-3, 2e-7, 0.02, 0.9, 7.0, 30.0}) {
        const auto a = G(kap);
        const auto b = G.direct(kap);
        EXPECT_LT(std::abs(a[0] - b[0]), 1e-11) << kap;
        EXPECT_LT(std::abs(a[1] - b[1]), 1e-11) << kap;
    }
}

TEST(SpectralTrace, InverseTransformRoundTrip) {
    const auto s = solve_jh(-0.01, 1, ThetaGrid());
    const auto kg = KGrid::uniform(0.002, 40.0);
    const YGrid yg(std::vector<double>{1.0, 2.5});
    const auto t = spectral_trace(s, kg, yg);
    EXPECT_EQ(hermitian_defect(kg, t.u), 0.0);
    // Half-line 6th-order quadrature of ∫ e^{ikx} f̂ dk on each side of k = 0.
    const std::size_t z = *kg.zero_index();
    std::vector<double> kp(kg.modes().begin() + z, kg.modes().end());
    const CumulativeQuadrature q(kp, 6);
    for (std::size_t j = 0; j < yg.size(); ++j) {
        for (double x : {-3.0, -0.4, 0.0, 1.2, 4.0}) {
            std::vector<cplx> iu(kp.size()), iv(kp.size());
            for (std::size_t i = 0; i < kp.size(); ++i) {
                const cplx e = std::polar(1.0, kp[i] * x);
                iu[i] = e * t.u(z + i, j);
                iv[i] = e * t.v(z + i, j);
            }
            const double u = 2 * q.total<cplx>(iu).real();
            const double v = 2 * q.total<cplx>(iv).real();
            const auto ref = eval_cartesian(s, x, yg[j]);
            EXPECT_NEAR(u, ref.u, 1e-8) << x << " " << yg[j];
            EXPECT_NEAR(v, ref.v, 1e-8) << x << " " << yg[j];
        }
    }
}

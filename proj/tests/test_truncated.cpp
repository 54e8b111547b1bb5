#include <gtest/gtest.h>

#include <cmath>

#include "hpns/truncated.hpp"

using namespace hpns;

namespace {

VelocityFn jh_only(const JHSolution& jh) { return perturbed_jh_boundary(jh, 0.0); }

SimulateOptions small_mesh(std::size_t nr, std::size_t nt) {
    SimulateOptions o;
    o.n_r = nr;
    o.n_theta = nt;
    return o;
}

double jh_error(const FDSolution& s, const JHSolution& jh) {
    double err = 0.0;
    double scale = 0.0;
    for (std::size_t i = 0; i < s.mesh.n_r(); ++i)
        for (std::size_t j = 0; j < s.mesh.n_theta(); ++j) {
            const auto p = s.mesh.point(i, j);
            const auto u = eval_cartesian(jh, p.x, p.y);
            const std::size_t n = s.mesh.index(i, j);
            const double r = std::hypot(p.x, p.y);
            err = std::max(err, r * std::hypot(u.u - s.ux[n], u.v - s.uy[n]));
            scale = std::max(scale, r * std::hypot(u.u, u.v));
        }
    return err / scale;
}

}  // namespace

TEST(HalfDiskMesh, Validation) {
    EXPECT_THROW(HalfDiskMesh(50, 32, 64), MeshError);
    EXPECT_THROW(HalfDiskMesh(50, 64, 63), MeshError);
    EXPECT_THROW(HalfDiskMesh(3, 64, 64), MeshError);
    const HalfDiskMesh m(50, 64, 65);
    EXPECT_DOUBLE_EQ(m.rho(0), 1.0);
    EXPECT_NEAR(m.rho(63), 50.0, 1e-12);
    for (std::size_t j = 0; j < 65; ++j) EXPECT_EQ(m.theta(j), -m.theta(64 - j));
    EXPECT_EQ(m.theta(32), 0.0);
    EXPECT_NEAR(m.point(10, 0).y, 1.0, 1e-15);
}

TEST(Simulate, RejectsInvalidParameters) {
    EXPECT_THROW(simulate_truncated(0.06, 0.0, 50, small_mesh(64, 64)), DomainError);
    EXPECT_THROW(simulate_truncated(0.01, 1.5, 50, small_mesh(64, 64)), DomainError);
    EXPECT_THROW(simulate_truncated(0.01, 0.0, 2000, small_mesh(64, 64)), DomainError);
    EXPECT_THROW(simulate_truncated(0.01, 0.0, 50, small_mesh(32, 64)), MeshError);
}

TEST(Simulate, ReproducesJefferyHamelWithSecondOrderConvergence) {
    const JHSolution jh = solve_jh(0.05, 0, ThetaGrid(1025));
    const auto coarse = simulate_truncated(0.05, 0.0, 50, small_mesh(64, 64));
    const auto fine = simulate_truncated(0.05, 0.0, 50, small_mesh(128, 128));
    EXPECT_FALSE(coarse.pseudo_time);
    EXPECT_LT(coarse.residual, 1e-9);
    EXPECT_LT(std::abs(coarse.closure_defect), 1e-12);
    const double e1 = jh_error(coarse, jh);
    const double e2 = jh_error(fine, jh);
    EXPECT_LT(e1, 2e-3);
    EXPECT_GE(e1 / e2, 3.0);
}

TEST(Simulate, PseudoTimeFallbackReachesTheNewtonSolution) {
    auto opt = small_mesh(64, 64);
    const auto newton = simulate_truncated(-0.03, 0.3, 20, opt);
    opt.newton.max_iter = 0;
    const auto pseudo = simulate_truncated(-0.03, 0.3, 20, opt);
    EXPECT_TRUE(pseudo.pseudo_time);
    double d = 0.0;
    for (std::size_t n = 0; n < newton.psi.size(); ++n) d = std::max(d, std::abs(newton.psi[n] - pseudo.psi[n]));
    EXPECT_LT(d, 1e-9);
}

TEST(Simulate, FluxThroughHalfCircles) {
    // The flux through the arc ρ equals the flux entering through the chord
    // |x| < ρ of the bottom line.
    const double phi = 0.05;
    const JHSolution jh = solve_jh(phi, 0, ThetaGrid(1025));
    const auto s = simulate_truncated(phi, 0.5, 100, small_mesh(128, 128));
    const GaussLegendre gl(20);
    for (std::size_t i = 0; i < s.mesh.n_r(); i += 9) {
        const double rho = s.mesh.rho(i);
        double chord = 0.0;
        for (int piece = 0; piece < 16; ++piece) {
            const double a = -rho + 2.0 * rho * piece / 16.0;
            chord += gl.integrate([&](double x) { return eval_cartesian(jh, x, 1.0).v; }, a, a + rho / 8.0);
        }
        EXPECT_NEAR(flux_through_arc(s, i), chord, 1e-6) << "rho = " << rho;
        EXPECT_NEAR(flux_through_arc_quadrature(s, i), chord, 2e-5) << "rho = " << rho;
    }
    EXPECT_NEAR(flux_through_arc(s, s.mesh.n_r() - 1), phi, 1e-6);
}

TEST(Simulate, MirrorSymmetry) {
    const JHSolution jh = solve_jh(-0.02, 0, ThetaGrid(1025));
    const HalfDiskMesh mesh(20, 64, 64);
    const auto a = simulate_with_boundary(mesh, perturbed_jh_boundary(jh, 0.5));
    const auto b = simulate_with_boundary(mesh, perturbed_jh_boundary(jh, -0.5));
    double d = 0.0;
    double m = 0.0;
    for (std::size_t i = 0; i < mesh.n_r(); ++i)
        for (std::size_t j = 0; j < mesh.n_theta(); ++j) {
            const std::size_t n = mesh.index(i, j);
            const std::size_t r = mesh.index(i, mesh.n_theta() - 1 - j);
            d = std::max({d, std::abs(a.ux[n] + b.ux[r]), std::abs(a.uy[n] - b.uy[r])});
            m = std::max(m, std::hypot(a.ux[n], a.uy[n]));
        }
    EXPECT_LT(d, 1e-8 * m);
}

TEST(Profile, JefferyHamelProfileAndFlux) {
    const double phi = 0.05;
    const JHSolution jh = solve_jh(phi, 0, ThetaGrid(1025));
    const auto s = simulate_truncated(phi, 0.0, 50, small_mesh(128, 128));
    const auto rows = profile_on_halfcircle(s, 40.0);
    ASSERT_EQ(rows.size(), 128u);
    double flux = 0.0;
    for (std::size_t j = 0; j < rows.size(); ++j) {
        const double w = (j == 0 || j + 1 == rows.size()) ? 0.5 : 1.0;
        flux += w * rows[j].r_ur * s.mesh.htheta();
        // The mesh is centred at (0, 1), so the JH profile is seen at an O(1/r) offset.
        EXPECT_NEAR(rows[j].r_ur, jh.at(rows[j].theta), 0.05 * jh.sup_f());
        EXPECT_NEAR(rows[j].r_utheta, 0.0, 0.05 * jh.sup_f());
    }
    EXPECT_NEAR(flux, phi, 1e-5);
    EXPECT_LT(profile_deviation(s, jh_only(jh), 40.0), 1e-3);
    EXPECT_THROW(profile_on_halfcircle(s, 60.0), OutOfDomain);
    EXPECT_THROW(profile_on_halfcircle(s, 0.5), OutOfDomain);
}

TEST(Profile, PositiveFluxPerturbationIsAsymmetric) {
    const auto s = simulate_truncated(0.05, 1.0, 50, small_mesh(96, 96));
    const auto rows = profile_on_halfcircle(s, 20.0);
    std::size_t arg = 0;
    for (std::size_t j = 0; j < rows.size(); ++j)
        if (rows[j].r_ur > rows[arg].r_ur) arg = j;
    EXPECT_GT(std::abs(rows[arg].theta), 2.0 * s.mesh.htheta());
    double asym = 0.0;
    for (std::size_t j = 0; j < rows.size(); ++j)
        asym = std::max(asym, std::abs(rows[j].r_ur - rows[rows.size() - 1 - j].r_ur));
    EXPECT_GT(asym, 0.1 * rows[arg].r_ur);
}

TEST(Compare, IdenticalAndJefferyHamel) {
    const double phi = -0.02;
    const JHSolution jh = solve_jh(phi, 0, ThetaGrid(1025));
    const auto s = simulate_truncated(phi, 0.0, 200, small_mesh(128, 128));
    const Window w{5.0, 50.0, 61};
    EXPECT_EQ(compare(as_velocity_fn(s), s, w), 0.0);
    EXPECT_LT(compare(jh_only(jh), s, w), 0.01);
    EXPECT_THROW(compare(jh_only(jh), s, Window{5.0, 199.0, 61}), OutOfDomain);
    EXPECT_THROW(compare(jh_only(jh), s, Window{0.5, 50.0, 61}), OutOfDomain);
}

TEST(SpectralVelocity, InverseTransformOfKnownField) {
    const auto kg = KGrid::graded(1e-4, 20, 1.1, 0.1);
    const auto yg = YGrid::standard(200, 128);
    NSSolution s;
    s.jh = solve_jh(0.01, 0, ThetaGrid(513));
    s.u1.u = SpectralField::sample(kg, yg, [](double k, double y) { return cplx(std::exp(-k * k / 2 - (y - 1))); });
    s.u1.v = SpectralField(kg.size(), yg.size());
    const auto f = spectral_velocity(kg, yg, s, false);
    const std::vector<Point> pts{{0.0, 1.0}, {1.3, 2.0}, {-2.5, 1.7}, {4.0, 3.2}};
    const auto u = f(pts);
    for (std::size_t p = 0; p < pts.size(); ++p) {
        const double exact = std::sqrt(two_pi) * std::exp(-pts[p].x * pts[p].x / 2 - (pts[p].y - 1));
        EXPECT_NEAR(u[p].u, exact, 1e-6);
        EXPECT_NEAR(u[p].v, 0.0, 1e-15);
    }
    const auto g = spectral_velocity(kg, yg, s, true);
    const auto j = eval_cartesian(s.jh, 1.3, 2.0);
    EXPECT_NEAR(g(std::vector<Point>{{1.3, 2.0}})[0].v, j.v, 1e-15);
    EXPECT_THROW(f(std::vector<Point>{{0.0, 0.5}}), OutOfDomain);
}

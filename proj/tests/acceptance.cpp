// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "hpns/truncated.hpp"
#include "hpns/weighted_spaces.hpp"
#include "support/shooting.hpp"

using namespace hpns;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

std::string format(const char* f, auto... v) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, v...);
    return buf;
}

int failures = 0;

void run(const char* name, double budget_s, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double t = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (budget_s > 0 && t > budget_s) {
        o.pass = false;
        o.detail += format("; over the %.0f s budget", budget_s);
    }
    if (!o.pass) ++failures;
    std::printf("%s %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str(), t);
    std::fflush(stdout);
}

Outcome jh_leading_order() {
    const ThetaGrid g;
    std::map<double, double> err;
    bool bound = true;
    for (double phi : {1e-3, -1e-3, 1e-4, -1e-4}) {
        const auto s = solve_jh(phi, 0, g);
        double e = 0;
        for (std::size_t i = 0; i < g.size(); ++i) e = std::max(e, std::abs(s.f[i] - 2 * phi / pi * std::cos(g[i]) * std::cos(g[i])));
        err[phi] = e;
        bound = bound && e <= 600 * std::pow(std::abs(phi), 1.5);
    }
    const double ep = std::log10(err[1e-3] / err[1e-4]);
    const double em = std::log10(err[-1e-3] / err[-1e-4]);
    const bool exponent = std::abs(ep - 1.5) <= 0.2 && std::abs(em - 1.5) <= 0.2;
    return {bound && exponent,
            format("error(1e-3) %.3e, error(1e-4) %.3e, bound 600|phi|^1.5 %s; exponent %.3f (phi>0), %.3f (phi<0), "
                   "required 1.5 +- 0.2 %s",
                   err[1e-3], err[1e-4], bound ? "holds" : "violated", ep, em, exponent ? "holds" : "violated")};
}

Outcome branch_structure() {
    const ThetaGrid g;
    const auto rows = scan_branches(-0.02, 0.02, 41, g);
    std::map<double, int> count;
    for (const auto& r : rows) ++count[r.phi];
    bool structure = true;
    for (const auto& [phi, n] : count)
        if (phi != 0.0) structure = structure && n == (phi > 0 ? 1 : 3);
    double ball = 0, oracle_rel = 0;
    for (const auto& r : rows) {
        if (r.branch == 0) continue;
        const double A0 = r.branch * std::sqrt(-48 * r.phi / pi);
        ball = std::max(ball, std::abs(r.A - A0) / (50 * std::abs(r.phi)));
        const auto o = oracle::shoot_branch(r.phi, r.branch);
        oracle_rel = std::max(oracle_rel, std::abs(r.A - o.A) / std::abs(o.A));
    }
    return {structure && ball <= 1 && oracle_rel <= 0.01,
            format("%zu rows over %zu phi values, 1 branch for phi>0 and 3 for phi<0 %s; max |A - A0|/(50|phi|) = %.3f; "
                   "max relative deviation from shooting %.2e",
                   rows.size(), count.size(), structure ? "holds" : "violated", ball, oracle_rel)};
}

Outcome reflection_identity() {
    const ThetaGrid g;
    const std::size_t n = g.size();
    double d = 0;
    for (int m = 1; m <= 10; ++m) {
        const double phi = -0.005 * m;
        const auto p = solve_jh(phi, 1, g);
        const auto q = solve_jh(phi, -1, g);
        for (std::size_t i = 0; i < n; ++i) d = std::max(d, std::abs(p.f[i] - q.f[n - 1 - i]));
    }
    return {d < 1e-10, format("max |f+(theta) - f-(-theta)| over 10 phi in [-0.05, -0.005] = %.2e (tol 1e-10)", d)};
}

cplx forcing_R(double k, double y) { return std::exp(-(y - 2.0) * (y - 2.0)) * std::exp(-0.1 * k * k) * (1.0 + 0.2 * y + cplx(0.0, 0.3 * k)); }
cplx forcing_S(double k, double y) { return cplx(0.0, 0.5 * k) * std::exp(-(y - 2.5) * (y - 2.5) - 0.1 * k * k); }
cplx gauss(double k) { return std::exp(-k * k / 2); }
cplx gauss_odd(double k) { return cplx(0.0, 0.3 * k) * std::exp(-k * k / 2); }

Outcome stokes_oracle() {
    const auto kg = KGrid::from_positive({0.1, 1.0, 10.0}, false);
    const auto yg = YGrid::stretched(200, 1024, 0.005);
    const SpectralField zero(kg.size(), yg.size());
    const ForcingTensor Q{SpectralField::sample(kg, yg, forcing_R), SpectralField::sample(kg, yg, forcing_S)};
    double worst = 0;
    for (bool forced : {false, true}) {
        const auto sol = solve_stokes(kg, yg, forced ? Q : ForcingTensor{zero, zero}, BoundaryTrace::sample(kg, gauss),
                                      BoundaryTrace::sample(kg, gauss_odd));
        std::vector<double> ys;
        std::vector<std::size_t> idx;
        for (std::size_t j = 0; j < yg.size() && yg[j] <= 30; j += 7) ys.push_back(yg[j]), idx.push_back(j);
        for (std::size_t i = 0; i < kg.size(); ++i) {
            const double k = kg[i];
            auto R = [&](double y) { return forced ? forcing_R(k, y) : cplx(0.0); };
            auto S = [&](double y) { return forced ? forcing_S(k, y) : cplx(0.0); };
            const auto ref = march_mode_oracle(k, R, S, gauss(k), gauss_odd(k), ys, {60.0, 1e-3});
            const std::vector<std::pair<const SpectralField*, const std::vector<cplx>*>> parts{
                {&sol.u_hat, &ref.u}, {&sol.v_hat, &ref.v}, {&sol.p_hat, &ref.p}};
            for (const auto& [f, r] : parts) {
                double err = 0, scale = 0;
                for (std::size_t m = 0; m < idx.size(); ++m) {
                    err = std::max(err, std::abs((*f)(i, idx[m]) - (*r)[m]));
                    scale = std::max(scale, std::abs((*r)[m]));
                }
                worst = std::max(worst, err / scale);
            }
        }
    }
    return {worst < 1e-8, format("max relative difference of u, v, p at k in {0.1, 1, 10}, zero and Gaussian forcing = %.2e (tol 1e-8)", worst)};
}

Outcome stokes_residual() {
    // Unforced solve with Gaussian boundary data; the physical-space Stokes
    // residual by second-order finite differences at interior points.
    const auto kg = KGrid::graded(1e-4, 14, 1.1, 0.05);
    const double hb = 0.002;
    std::vector<double> nodes;
    for (int i = 0; i <= 1500; ++i) nodes.push_back(1 + hb * i);
    for (double h = hb; nodes.back() < 200; h *= 1.05) nodes.push_back(nodes.back() + h);
    const YGrid yg(nodes);
    const SpectralField zero(kg.size(), yg.size());
    const auto sol = solve_stokes(kg, yg, {zero, zero}, BoundaryTrace::sample(kg, gauss), BoundaryTrace::sample(kg, gauss_odd));

    double div = 0;
    const std::span<const double> ys(nodes.data(), 1501);
    for (std::size_t i = 0; i < kg.size(); ++i) {
        const std::vector<cplx> u(sol.u_hat.column(i).begin(), sol.u_hat.column(i).begin() + 1501);
        const std::vector<cplx> v(sol.v_hat.column(i).begin(), sol.v_hat.column(i).begin() + 1501);
        const auto dv = differentiate<cplx>(ys, v, 1, 7);
        for (std::size_t j = 3; j + 3 < 1501; ++j) div = std::max(div, std::abs(dv[j] + cplx(0, kg[i]) * u[j]));
    }

    auto residual = [&](double h) {
        const int s = static_cast<int>(std::lround(h / hb));
        double res = 0;
        for (double x0 : {-1.0, 0.0, 0.7, 2.0}) {
            const std::vector<double> xs{x0 - h, x0, x0 + h};
            const InverseTransform T(kg, xs);
            for (int j : {500, 750, 1000}) {
                const auto u0 = T.apply(sol.u_hat, j), up = T.apply(sol.u_hat, j + s), um = T.apply(sol.u_hat, j - s);
                const auto v0 = T.apply(sol.v_hat, j), vp = T.apply(sol.v_hat, j + s), vm = T.apply(sol.v_hat, j - s);
                const auto p0 = T.apply(sol.p_hat, j), pp = T.apply(sol.p_hat, j + s), pm = T.apply(sol.p_hat, j - s);
                const double mx = (u0[0] + u0[2] + up[1] + um[1] - 4 * u0[1]) / (h * h) - (p0[2] - p0[0]) / (2 * h);
                const double my = (v0[0] + v0[2] + vp[1] + vm[1] - 4 * v0[1]) / (h * h) - (pp[1] - pm[1]) / (2 * h);
                const double d = (u0[2] - u0[0]) / (2 * h) + (vp[1] - vm[1]) / (2 * h);
                res = std::max({res, std::abs(mx), std::abs(my), std::abs(d)});
            }
        }
        return res;
    };
    const double coarse = residual(0.008);
    const double fine = residual(0.004);
    return {fine < 1e-5 && div < 1e-8 && coarse / fine >= 3,
            format("finite-difference residual %.2e (h=0.008), %.2e (h=0.004), ratio %.2f (tol 1e-5, ratio >= 3); "
                   "spectral divergence %.2e (tol 1e-8)",
                   coarse, fine, coarse / fine, div)};
}

Outcome compatibility_logic() {
    const auto kg = KGrid::uniform(0.01, 5);
    const auto yg = YGrid::stretched(200, 1024, 0.005);
    const double phi = 0.0137;
    const auto R = SpectralField::sample(kg, yg, [](double k, double y) { return cplx(std::exp(-(y - 2) * (y - 2) - k * k)); });
    const ForcingTensor Q{R, SpectralField(kg.size(), yg.size())};
    const double I = 0.5 * std::sqrt(pi) * (1 + std::erf(1.0));
    const auto balanced = BoundaryTrace::sample(kg, [&](double k) { return cplx(-I * std::exp(-k * k)); });
    const auto flux = BoundaryTrace::sample(kg, [&](double k) { return cplx(phi * std::exp(-k * k)); });
    const auto bad = compatibility(kg, yg, Q, balanced, flux, 1.5);
    const auto ok = compatibility(kg, yg, Q, balanced, BoundaryTrace(kg.size()), 1.5);
    const bool flagged = !bad.satisfied && bad.residuals[1] == cplx(phi);
    const double r0 = std::abs(ok.residuals[0]);
    return {flagged && ok.satisfied && r0 < 1e-12,
            format("v*(0) = %.4f flagged %s with residual %.17g; balanced pair residual %.2e (tol 1e-12), %s",
                   phi, bad.satisfied ? "no" : "yes", bad.residuals[1].real(), r0, ok.satisfied ? "satisfied" : "not satisfied")};
}

struct NSRun {
    KGrid kg = KGrid::graded(1e-4, 25, 1.12, 0.4);
    YGrid yg = YGrid::standard(200, 128);
    NSSolution sol;
};

Outcome ns_fixed_point(NSRun& run) {
    const double phi = -0.01, q = 1.5;
    auto us = BoundaryTrace::sample(run.kg, [](double k) { return cplx(0, k * std::exp(-k * k / 2)); });
    us *= 1e-3 / norm_boundary(run.kg, us, SpaceIndex(Family::T, 2.5, q)).value;
    const NSProblem pb{phi, 0, us, BoundaryTrace(run.kg.size()), run.kg, run.yg};
    const NSOptions opt;
    run.sol = picard_solve(pb, opt);
    const auto& s = run.sol;
    const std::size_t sweeps = s.trace_log.size();
    const double dist = sweeps ? s.trace_log.back().distance : 0.0;
    double flux = 0;
    for (double f : flux_profile(run.kg, s.u_jh.v + s.u1.v)) flux = std::max(flux, std::abs(f - phi));
    const auto Q = assemble_forcing(run.kg, run.yg, s.u_jh, s.u1, opt.conv_tol);
    const double bound = norm_bulk(run.kg, run.yg, Q.R, SpaceIndex(Family::R, 2.5, q + 1)).value / q;
    const double slope = decay_report(run.kg, run.yg, s.u1).slope;
    const bool pass = s.converged && sweeps <= 25 && dist < 1e-10 && flux < 1e-9 && std::abs(s.a) <= bound && slope <= -q + 0.3;
    return {pass, format("converged %s in %zu sweeps (max 25), final distance %.2e (tol 1e-10); flux defect %.2e (tol 1e-9); "
                         "|a| = %.2e <= bound %.3e (A = 2 pi a = %.2e); decay slope %.3f (required <= %.1f)",
                         s.converged ? "yes" : "no", sweeps, dist, flux, std::abs(s.a), bound, std::abs(s.A), slope, -q + 0.3)};
}

Outcome cross_validation(const NSRun& run) {
    if (!run.sol.converged) return {false, "no converged spectral solution"};
    const double R = 200;
    const auto spec = spectral_velocity(run.kg, run.yg, run.sol);
    const HalfDiskMesh mesh(R, 256, 192);
    const auto fd = simulate_with_boundary(mesh, matched_boundary(run.kg, run.yg, run.sol, R), {}, -0.01, 0.0);
    const auto jh = perturbed_jh_boundary(run.sol.jh, 0.0);
    const Window w;
    const double full = compare(spec, fd, w);
    const double pert = compare(spec, fd, w, jh);
    return {full < 0.03 && pert < 0.03,
            format("relative L2 on r in [5, 50] at R = 200: full velocity %.2e, perturbation only %.2e (tol 3e-2)", full, pert)};
}

Outcome section_contrast() {
    const double R = 200, r = 100;
    auto d = [&](double phi) {
        const auto s = simulate_truncated(phi, 0.5, R);
        return profile_deviation(s, perturbed_jh_boundary(solve_jh(phi, 0, ThetaGrid(1025)), 0.0), r);
    };
    const double dm = d(-0.05);
    const double dp = d(0.05);
    return {dm < 0.2 * dp, format("d(-0.05, 0.5) = %.4g, d(+0.05, 0.5) = %.4g, ratio %.3f (required < 0.2)", dm, dp, dm / dp)};
}

Outcome convolution_bound() {
    auto bound = [](int per_decade) {
        std::vector<double> ks, ys;
        for (int i = 0; i <= 6 * per_decade; ++i) ks.push_back(std::pow(10.0, -4 + double(i) / per_decade));
        for (int i = 0; i <= 3 * per_decade; ++i) ys.push_back(std::pow(10.0, double(i) / per_decade));
        return convolution_weight_bound(2.5, 0.5, ks, ys).sup_ratio;
    };
    const double a = bound(3);
    const double b = bound(6);
    const double change = std::abs(b - a) / b;
    return {std::isfinite(a) && std::isfinite(b) && change < 0.1,
            format("discrete sup %.6g (3 per decade), %.6g (6 per decade), relative change %.2e (tol 0.1)", a, b, change)};
}

}  // namespace

int main() {
    run("JH leading order", 5, jh_leading_order);
    run("Branch structure", 30, branch_structure);
    run("Reflection identity", 0, reflection_identity);
    run("Stokes oracle equivalence", 10, stokes_oracle);
    run("Stokes residual and divergence", 0, stokes_residual);
    run("Compatibility logic", 0, compatibility_logic);
    NSRun ns;
    run("NS fixed point", 300, [&] { return ns_fixed_point(ns); });
    run("Cross-validation", 0, [&] { return cross_validation(ns); });
    run("Qualitative contrast at R = 200", 600, section_contrast);
    run("Convolution weight bound", 0, convolution_bound);
    std::printf("%d of 10 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}

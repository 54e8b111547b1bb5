#pragma once

// Steady Navier-Stokes on the truncated half-disk {y > 1, |(x, y - 1)| < R}
// with Dirichlet velocity on the whole boundary, as a physical-space check
// on the spectral solver.
//
// Log-polar mesh about (0, 1): x = ρ sinθ, y = 1 + ρ cosθ, s = ln ρ,
// ρ ∈ [ρ_min, R], θ ∈ [−π/2, π/2]. With u = (∂yψ, −∂xψ) and ω = −Δψ,
//
//     ψ_ss + ψ_θθ + ρ²ω = 0,
//     ω_ss + ω_θθ − (ψ_s ω_θ − ψ_θ ω_s) = 0,
//
// discretised by central differences. Wall vorticity comes from Thom's
// formula, so the unknowns are (ψ, ω) at interior nodes only. The half-disk
// of radius ρ_min about (0, 1) is cut out and carries the same Dirichlet data.

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "hpns/errors.hpp"
#include "hpns/jeffery_hamel.hpp"
#include "hpns/navier_stokes.hpp"
#include "hpns/transform.hpp"
#include "hpns/numerics.hpp"

namespace hpns {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

/// Velocity evaluated at a batch of points.
using VelocityFn = std::function<std::vector<Velocity>(std::span<const Point>)>;

class HalfDiskMesh {
public:
    HalfDiskMesh(double R, std::size_t n_r, std::size_t n_theta, double rho_min = 1.0)
        : R_(R), rho_min_(rho_min), s_(n_r), theta_(n_theta) {
        if (n_r < 64 || n_theta < 64) throw MeshError("HalfDiskMesh: n_r and n_theta must be at least 64");
        if (!(rho_min > 0.0) || !(R > 4.0 * rho_min)) throw MeshError("HalfDiskMesh: need 0 < 4 rho_min < R");
        const double s0 = std::log(rho_min);
        hs_ = (std::log(R) - s0) / static_cast<double>(n_r - 1);
        for (std::size_t i = 0; i < n_r; ++i) s_[i] = s0 + hs_ * static_cast<double>(i);
        s_.back() = std::log(R);
        const auto m = static_cast<double>(n_theta - 1);
        ht_ = pi / m;
        // Exactly antisymmetric about θ = 0.
        for (std::size_t j = 0; j < n_theta; ++j) theta_[j] = (2.0 * static_cast<double>(j) - m) * pi / (2.0 * m);
    }

    double R() const { return R_; }
    double rho_min() const { return rho_min_; }
    std::size_t n_r() const { return s_.size(); }
    std::size_t n_theta() const { return theta_.size(); }
    double hs() const { return hs_; }
    double htheta() const { return ht_; }
    double s(std::size_t i) const { return s_[i]; }
    double rho(std::size_t i) const { return std::exp(s_[i]); }
    double theta(std::size_t j) const { return theta_[j]; }
    std::span<const double> s_nodes() const { return s_; }
    std::span<const double> theta_nodes() const { return theta_; }

    Point point(std::size_t i, std::size_t j) const { return at(rho(i), theta_[j]); }
    static Point at(double rho, double th) { return {rho * std::sin(th), 1.0 + rho * std::cos(th)}; }

    bool boundary(std::size_t i, std::size_t j) const {
        return i == 0 || j == 0 || i + 1 == n_r() || j + 1 == n_theta();
    }
    std::size_t index(std::size_t i, std::size_t j) const { return i * n_theta() + j; }
    std::size_t size() const { return n_r() * n_theta(); }

private:
    double R_;
    double rho_min_;
    double hs_ = 0.0;
    double ht_ = 0.0;
    std::vector<double> s_;
    std::vector<double> theta_;
};

struct NewtonOptions {
    double tol = 1e-10;
    int max_iter = 25;
    int max_pseudo_steps = 400;
    double dt0 = 1e-2;
};

struct FDSolution {
    HalfDiskMesh mesh;
    double phi = 0.0;
    double nu = 0.0;
    /// Nodal values, index mesh.index(i, j).
    std::vector<double> psi;
    std::vector<double> omega;
    std::vector<double> ux;
    std::vector<double> uy;
    double residual = 0.0;
    int newton_iterations = 0;
    bool pseudo_time = false;
    /// Mismatch of ∮ u·n around the boundary before redistribution.
    double closure_defect = 0.0;

    double u_rho(std::size_t n) const {
        const double th = mesh.theta(n % mesh.n_theta());
        return ux[n] * std::sin(th) + uy[n] * std::cos(th);
    }
    double u_theta(std::size_t n) const {
        const double th = mesh.theta(n % mesh.n_theta());
        return ux[n] * std::cos(th) - uy[n] * std::sin(th);
    }
};

namespace detail {

/// Nodes of the boundary loop: left ray outward, outer arc, right ray inward,
/// inner arc back to the start.
inline std::vector<std::array<std::size_t, 2>> boundary_loop(const HalfDiskMesh& m) {
    const std::size_t nr = m.n_r();
    const std::size_t nt = m.n_theta();
    std::vector<std::array<std::size_t, 2>> path;
    for (std::size_t i = 0; i < nr; ++i) path.push_back({i, 0});
    for (std::size_t j = 1; j < nt; ++j) path.push_back({nr - 1, j});
    for (std::size_t i = nr - 1; i-- > 0;) path.push_back({i, nt - 1});
    for (std::size_t j = nt - 1; j-- > 0;) path.push_back({0, j});
    return path;
}

/// Point on the boundary segment from node a to node b at parameter t ∈ [0, 1],
/// with the tangent d(x, y)/dt.
inline std::array<Point, 2> boundary_segment(const HalfDiskMesh& m, std::array<std::size_t, 2> a,
                                             std::array<std::size_t, 2> b, double t) {
    if (a[1] == b[1]) {
        const double th = m.theta(a[1]);
        const double r0 = m.rho(a[0]);
        const double r1 = m.rho(b[0]);
        const double r = r0 + t * (r1 - r0);
        return {HalfDiskMesh::at(r, th), Point{(r1 - r0) * std::sin(th), (r1 - r0) * std::cos(th)}};
    }
    const double r = m.rho(a[0]);
    const double t0 = m.theta(a[1]);
    const double t1 = m.theta(b[1]);
    const double th = t0 + t * (t1 - t0);
    return {HalfDiskMesh::at(r, th), Point{r * std::cos(th) * (t1 - t0), -r * std::sin(th) * (t1 - t0)}};
}

struct BoundaryState {
    std::vector<double> psi;      // on boundary nodes, 0 elsewhere
    std::vector<Velocity> vel;    // on boundary nodes
    double closure = 0.0;
};

inline BoundaryState boundary_state(const HalfDiskMesh& m, const VelocityFn& bc) {
    const auto path = boundary_loop(m);
    const GaussLegendre gl(10);
    std::vector<Point> pts;
    pts.reserve(path.size() * (gl.x.size() + 1));
    std::vector<Point> tangents;
    for (std::size_t p = 0; p < path.size(); ++p) {
        pts.push_back(m.point(path[p][0], path[p][1]));
        const auto& b = path[(p + 1) % path.size()];
        for (double xq : gl.x) {
            const auto seg = boundary_segment(m, path[p], b, 0.5 * (1.0 + xq));
            pts.push_back(seg[0]);
            tangents.push_back(seg[1]);
        }
    }
    const auto vel = bc(pts);
    if (vel.size() != pts.size()) throw ValidationError("boundary data: wrong number of samples");

    BoundaryState st;
    st.psi.assign(m.size(), 0.0);
    st.vel.assign(m.size(), Velocity{});
    const std::size_t stride = gl.x.size() + 1;
    std::vector<double> dpsi(path.size());
    std::vector<double> length(path.size());
    double total = 0.0;
    for (std::size_t p = 0; p < path.size(); ++p) {
        st.vel[m.index(path[p][0], path[p][1])] = vel[p * stride];
        double acc = 0.0;
        double len = 0.0;
        for (std::size_t q = 0; q < gl.x.size(); ++q) {
            const Velocity& u = vel[p * stride + 1 + q];
            const Point& t = tangents[p * gl.x.size() + q];
            // dψ = u dy − v dx
            acc += 0.5 * gl.w[q] * (u.u * t.y - u.v * t.x);
            len += 0.5 * gl.w[q] * std::hypot(t.x, t.y);
        }
        dpsi[p] = acc;
        length[p] = len;
        total += acc;
    }
    st.closure = total;
    // Spread the loop mismatch in proportion to arc length.
    double perimeter = 0.0;
    for (double l : length) perimeter += l;
    double psi = 0.0;
    for (std::size_t p = 0; p < path.size(); ++p) {
        st.psi[m.index(path[p][0], path[p][1])] = psi;
        psi += dpsi[p] - total * length[p] / perimeter;
    }
    return st;
}

}  // namespace detail

/// Solves the truncated problem with Dirichlet data `bc` on the whole boundary.
inline FDSolution simulate_with_boundary(const HalfDiskMesh& mesh, const VelocityFn& bc, const NewtonOptions& opt = {},
                                         double phi = 0.0, double nu = 0.0) {
    using SpMat = Eigen::SparseMatrix<double>;
    const std::size_t nr = mesh.n_r();
    const std::size_t nt = mesh.n_theta();
    const double hs = mesh.hs();
    const double ht = mesh.htheta();
    const auto bs = detail::boundary_state(mesh, bc);

    // Boundary data for Thom's formula: normal derivative of ψ and the
    // tangential second derivative from boundary values.
    std::vector<double> dn(mesh.size(), 0.0);
    std::vector<double> tan2(mesh.size(), 0.0);
    for (std::size_t i = 1; i + 1 < nr; ++i) {
        for (std::size_t j : {std::size_t{0}, nt - 1}) {
            const std::size_t n = mesh.index(i, j);
            const double th = mesh.theta(j);
            const double ur = bs.vel[n].u * std::sin(th) + bs.vel[n].v * std::cos(th);
            dn[n] = -mesh.rho(i) * ur;
            tan2[n] = (bs.psi[mesh.index(i + 1, j)] - 2.0 * bs.psi[n] + bs.psi[mesh.index(i - 1, j)]) / (hs * hs);
        }
    }
    for (std::size_t j = 1; j + 1 < nt; ++j) {
        for (std::size_t i : {std::size_t{0}, nr - 1}) {
            const std::size_t n = mesh.index(i, j);
            const double th = mesh.theta(j);
            const double ut = bs.vel[n].u * std::cos(th) - bs.vel[n].v * std::sin(th);
            dn[n] = mesh.rho(i) * ut;
            tan2[n] = (bs.psi[mesh.index(i, j + 1)] - 2.0 * bs.psi[n] + bs.psi[mesh.index(i, j - 1)]) / (ht * ht);
        }
    }

    const std::size_t ni = nr - 2;
    const std::size_t nj = nt - 2;
    const std::size_t N = 2 * ni * nj;
    auto unknown = [&](std::size_t i, std::size_t j) { return 2 * ((i - 1) * nj + (j - 1)); };

    // Value of ψ or ω at a node, with its derivative with respect to one unknown.
    struct Aff {
        double v;
        long idx;
        double c;
    };
    Eigen::VectorXd U = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(N));
    auto psi = [&](std::size_t i, std::size_t j) -> Aff {
        if (mesh.boundary(i, j)) return {bs.psi[mesh.index(i, j)], -1, 0.0};
        const auto k = static_cast<long>(unknown(i, j));
        return {U[k], k, 1.0};
    };
    auto omega = [&](std::size_t i, std::size_t j) -> Aff {
        if (!mesh.boundary(i, j)) {
            const auto k = static_cast<long>(unknown(i, j) + 1);
            return {U[k], k, 1.0};
        }
        const std::size_t n = mesh.index(i, j);
        const double r2 = std::exp(2.0 * mesh.s(i));
        Aff in{};
        double h = 0.0;
        double sgn = 1.0;
        if (j == 0) {
            in = psi(i, 1), h = ht;
        } else if (j + 1 == nt) {
            in = psi(i, nt - 2), h = ht, sgn = -1.0;
        } else if (i == 0) {
            in = psi(1, j), h = hs;
        } else {
            in = psi(nr - 2, j), h = hs, sgn = -1.0;
        }
        const double normal2 = 2.0 * (in.v - bs.psi[n] - sgn * h * dn[n]) / (h * h);
        return {-(tan2[n] + normal2) / r2, in.idx, -2.0 / (h * h * r2) * in.c};
    };

    std::vector<Eigen::Triplet<double>> trip;
    Eigen::VectorXd F(static_cast<Eigen::Index>(N));
    auto assemble = [&](double inv_dt) {
        trip.clear();
        trip.reserve(N * 14);
        auto emit = [&](std::size_t row, const Aff& a, double w) {
            if (a.idx >= 0) trip.emplace_back(static_cast<int>(row), static_cast<int>(a.idx), w * a.c);
        };
        const double cs = 1.0 / (hs * hs);
        const double ct = 1.0 / (ht * ht);
        for (std::size_t i = 1; i + 1 < nr; ++i) {
            const double r2 = std::exp(2.0 * mesh.s(i));
            for (std::size_t j = 1; j + 1 < nt; ++j) {
                const std::size_t r1 = unknown(i, j);
                const std::size_t r2w = r1 + 1;
                const Aff pC = psi(i, j), pE = psi(i + 1, j), pW = psi(i - 1, j), pN = psi(i, j + 1), pS = psi(i, j - 1);
                const Aff wC = omega(i, j), wE = omega(i + 1, j), wW = omega(i - 1, j), wN = omega(i, j + 1),
                          wS = omega(i, j - 1);

                F[static_cast<Eigen::Index>(r1)] =
                    cs * (pE.v - 2.0 * pC.v + pW.v) + ct * (pN.v - 2.0 * pC.v + pS.v) + r2 * wC.v;
                emit(r1, pE, cs), emit(r1, pW, cs), emit(r1, pN, ct), emit(r1, pS, ct);
                emit(r1, pC, -2.0 * (cs + ct)), emit(r1, wC, r2);

                const double ps = (pE.v - pW.v) / (2.0 * hs);
                const double pt = (pN.v - pS.v) / (2.0 * ht);
                const double ws = (wE.v - wW.v) / (2.0 * hs);
                const double wt = (wN.v - wS.v) / (2.0 * ht);
                F[static_cast<Eigen::Index>(r2w)] = cs * (wE.v - 2.0 * wC.v + wW.v) +
                                                    ct * (wN.v - 2.0 * wC.v + wS.v) - (ps * wt - pt * ws);
                emit(r2w, wE, cs - pt / (2.0 * hs)), emit(r2w, wW, cs + pt / (2.0 * hs));
                emit(r2w, wN, ct + ps / (2.0 * ht)), emit(r2w, wS, ct - ps / (2.0 * ht));
                emit(r2w, wC, -2.0 * (cs + ct));
                emit(r2w, pE, -wt / (2.0 * hs)), emit(r2w, pW, wt / (2.0 * hs));
                emit(r2w, pN, ws / (2.0 * ht)), emit(r2w, pS, -ws / (2.0 * ht));
                trip.emplace_back(static_cast<int>(r2w), static_cast<int>(r2w), -inv_dt);
            }
        }
        SpMat J(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N));
        J.setFromTriplets(trip.begin(), trip.end());
        return J;
    };

    Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
    bool analysed = false;
    auto step = [&](double inv_dt) -> double {
        SpMat J = assemble(inv_dt);
        if (!analysed) lu.analyzePattern(J), analysed = true;
        lu.factorize(J);
        if (lu.info() != Eigen::Success) throw NewtonDivergence("simulate: singular Jacobian");
        const Eigen::VectorXd d = lu.solve(-F);
        U += d;
        return d.lpNorm<Eigen::Infinity>();
    };
    auto residual = [&]() {
        assemble(0.0);
        return F.lpNorm<Eigen::Infinity>();
    };

    int iters = 0;
    bool pseudo = false;
    bool done = false;
    const double r0 = residual();
    for (int it = 0; it < opt.max_iter; ++it) {
        const double d = step(0.0);
        ++iters;
        if (!std::isfinite(d) || d > 1e6 * std::max(1.0, r0)) break;
        if (d <= opt.tol) {
            done = true;
            break;
        }
    }
    if (!done) {
        // Pseudo-time continuation on the vorticity transport equation,
        // switched-evolution-relaxation control of the step.
        pseudo = true;
        U.setZero();
        double dt = opt.dt0;
        double fprev = residual();
        for (int it = 0; it < opt.max_pseudo_steps; ++it) {
            const double d = step(1.0 / dt);
            ++iters;
            if (!std::isfinite(d)) break;
            const double f = residual();
            dt *= std::clamp(fprev / std::max(f, 1e-300), 1.5, 10.0);
            fprev = f;
            if (dt > 1e8 && d <= opt.tol) {
                done = true;
                break;
            }
        }
        if (!done) throw NewtonDivergence("simulate: Newton and pseudo-time continuation both failed");
    }

    FDSolution sol{mesh, phi, nu, {}, {}, {}, {}, residual(), iters, pseudo, bs.closure};
    sol.psi.assign(mesh.size(), 0.0);
    sol.omega.assign(mesh.size(), 0.0);
    sol.ux.assign(mesh.size(), 0.0);
    sol.uy.assign(mesh.size(), 0.0);
    for (std::size_t i = 0; i < nr; ++i) {
        for (std::size_t j = 0; j < nt; ++j) {
            const std::size_t n = mesh.index(i, j);
            sol.psi[n] = psi(i, j).v;
            const bool corner = (i == 0 || i + 1 == nr) && (j == 0 || j + 1 == nt);
            if (!corner) sol.omega[n] = omega(i, j).v;
            if (mesh.boundary(i, j)) {
                sol.ux[n] = bs.vel[n].u;
                sol.uy[n] = bs.vel[n].v;
                continue;
            }
            const double rho = mesh.rho(i);
            const double ur = -(psi(i, j + 1).v - psi(i, j - 1).v) / (2.0 * ht * rho);
            const double ut = (psi(i + 1, j).v - psi(i - 1, j).v) / (2.0 * hs * rho);
            const double th = mesh.theta(j);
            sol.ux[n] = ur * std::sin(th) + ut * std::cos(th);
            sol.uy[n] = ur * std::cos(th) - ut * std::sin(th);
        }
    }
    for (std::size_t i : {std::size_t{0}, nr - 1})
        for (std::size_t j : {std::size_t{0}, nt - 1}) {
            const std::size_t ii = i == 0 ? 1 : nr - 2;
            const std::size_t jj = j == 0 ? 1 : nt - 2;
            sol.omega[mesh.index(i, j)] = 0.5 * (sol.omega[mesh.index(ii, j)] + sol.omega[mesh.index(i, jj)]);
        }
    return sol;
}

/// Symmetric Jeffery-Hamel flow plus the perturbation (ν/r) sin2θ e_r, both
/// about the origin.
inline VelocityFn perturbed_jh_boundary(const JHSolution& jh, double nu) {
    return [&jh, nu](std::span<const Point> pts) {
        std::vector<Velocity> out(pts.size());
        for (std::size_t p = 0; p < pts.size(); ++p) {
            const auto [x, y] = pts[p];
            Velocity u = eval_cartesian(jh, x, y);
            const double r2 = x * x + y * y;
            const double a = nu * 2.0 * x * y / (r2 * r2);
            u.u += a * x;
            u.v += a * y;
            out[p] = u;
        }
        return out;
    };
}

struct SimulateOptions {
    std::size_t n_r = 256;
    std::size_t n_theta = 192;
    double rho_min = 1.0;
    std::size_t jh_points = 1025;
    NewtonOptions newton;
};

inline FDSolution simulate_truncated(double phi, double nu, double R, const SimulateOptions& opt = {}) {
    if (!(std::abs(phi) <= 0.05)) throw DomainError("simulate: |phi| must not exceed 0.05");
    if (!(nu >= 0.0 && nu <= 1.0)) throw DomainError("simulate: nu must lie in [0, 1]");
    if (!(R <= 1000.0)) throw DomainError("simulate: R must not exceed 1000");
    const HalfDiskMesh mesh(R, opt.n_r, opt.n_theta, opt.rho_min);
    const JHSolution jh = solve_jh(phi, 0, ThetaGrid(opt.jh_points));
    return simulate_with_boundary(mesh, perturbed_jh_boundary(jh, nu), opt.newton, phi, nu);
}

/// Cartesian velocity at (x, y) by 4×4 Lagrange interpolation in (s, θ).
inline Velocity velocity_at(const FDSolution& sol, double x, double y) {
    const auto& m = sol.mesh;
    const double rho = std::hypot(x, y - 1.0);
    const double th = std::atan2(x, y - 1.0);
    if (!(y >= 1.0) || rho < m.rho_min() * (1.0 - 1e-12) || rho > m.R() * (1.0 + 1e-12))
        throw OutOfDomain("velocity_at: point outside the mesh");
    const auto ws = interpolation_weights(m.s_nodes(), std::log(rho), 4);
    const auto wt = interpolation_weights(m.theta_nodes(), std::clamp(th, -pi / 2, pi / 2), 4);
    Velocity u;
    for (std::size_t a = 0; a < ws.w.size(); ++a)
        for (std::size_t b = 0; b < wt.w.size(); ++b) {
            const std::size_t n = m.index(ws.start + a, wt.start + b);
            const double w = ws.w[a] * wt.w[b];
            u.u += w * sol.ux[n];
            u.v += w * sol.uy[n];
        }
    return u;
}

struct ProfileRow {
    double theta = 0.0;
    double r_ur = 0.0;
    double r_utheta = 0.0;
};

/// ρ·u_ρ and ρ·u_θ on the mesh half-circle of radius r, at the θ nodes.
inline std::vector<ProfileRow> profile_on_halfcircle(const FDSolution& sol, double r) {
    const auto& m = sol.mesh;
    if (!(r >= m.rho_min() && r <= m.R())) throw OutOfDomain("profile_on_halfcircle: radius outside the mesh");
    const auto ws = interpolation_weights(m.s_nodes(), std::log(r), 4);
    std::vector<ProfileRow> rows(m.n_theta());
    for (std::size_t j = 0; j < m.n_theta(); ++j) {
        double ur = 0.0;
        double ut = 0.0;
        for (std::size_t a = 0; a < ws.w.size(); ++a) {
            const std::size_t n = m.index(ws.start + a, j);
            ur += ws.w[a] * sol.u_rho(n);
            ut += ws.w[a] * sol.u_theta(n);
        }
        rows[j] = {m.theta(j), r * ur, r * ut};
    }
    return rows;
}

/// Flux ∫ ρ u_ρ dθ through the mesh arc i, as the jump of ψ across it.
inline double flux_through_arc(const FDSolution& sol, std::size_t i) {
    const auto& m = sol.mesh;
    return sol.psi[m.index(i, 0)] - sol.psi[m.index(i, m.n_theta() - 1)];
}

/// The same flux by the trapezoid rule on the nodal velocities.
inline double flux_through_arc_quadrature(const FDSolution& sol, std::size_t i) {
    const auto& m = sol.mesh;
    double acc = 0.0;
    for (std::size_t j = 0; j < m.n_theta(); ++j) {
        const double w = (j == 0 || j + 1 == m.n_theta()) ? 0.5 : 1.0;
        acc += w * m.rho(i) * sol.u_rho(m.index(i, j));
    }
    return acc * m.htheta();
}

/// Relative L²(θ) distance of the profile at radius r from the profile of
/// `reference` sampled at the same points.
inline double profile_deviation(const FDSolution& sol, const VelocityFn& reference, double r) {
    const auto rows = profile_on_halfcircle(sol, r);
    std::vector<Point> pts;
    for (const auto& row : rows) pts.push_back(HalfDiskMesh::at(r, row.theta));
    const auto ref = reference(pts);
    double num = 0.0;
    double den = 0.0;
    for (std::size_t j = 0; j < rows.size(); ++j) {
        const double th = rows[j].theta;
        const double ur = r * (ref[j].u * std::sin(th) + ref[j].v * std::cos(th));
        const double ut = r * (ref[j].u * std::cos(th) - ref[j].v * std::sin(th));
        num += std::pow(rows[j].r_ur - ur, 2) + std::pow(rows[j].r_utheta - ut, 2);
        den += ur * ur + ut * ut;
    }
    if (!(den > 0.0)) throw ValidationError("profile_deviation: reference profile vanishes");
    return std::sqrt(num / den);
}

struct Window {
    double r_min = 5.0;
    double r_max = 50.0;
    std::size_t n = 121;
};

/// Cartesian sample points with r_min ≤ |(x, y − 1)| ≤ r_max, y ≥ 1.
inline std::vector<Point> window_points(const Window& w) {
    std::vector<Point> pts;
    const double h = 2.0 * w.r_max / static_cast<double>(w.n - 1);
    for (std::size_t a = 0; a < w.n; ++a)
        for (std::size_t b = 0; b < w.n / 2 + 1; ++b) {
            const Point p{-w.r_max + h * static_cast<double>(a), 1.0 + h * static_cast<double>(b)};
            const double r = std::hypot(p.x, p.y - 1.0);
            if (r >= w.r_min && r <= w.r_max) pts.push_back(p);
        }
    return pts;
}

/// ‖u_spec − u_fd‖₂ / ‖u_fd‖₂ on the window. With `subtract`, both fields
/// are compared after removing it.
inline double compare(const VelocityFn& spec, const FDSolution& fd, const Window& w,
                      const VelocityFn& subtract = nullptr) {
    const auto& m = fd.mesh;
    if (!(w.r_min >= m.rho_min() && w.r_min < w.r_max)) throw OutOfDomain("compare: invalid window");
    if (w.r_max > m.rho(m.n_r() - 4)) throw OutOfDomain("compare: window reaches the outer arc");
    const auto pts = window_points(w);
    auto us = spec(pts);
    std::vector<Velocity> ref;
    if (subtract) ref = subtract(pts);
    double num = 0.0;
    double den = 0.0;
    for (std::size_t p = 0; p < pts.size(); ++p) {
        Velocity uf = velocity_at(fd, pts[p].x, pts[p].y);
        if (subtract) {
            uf.u -= ref[p].u, uf.v -= ref[p].v;
            us[p].u -= ref[p].u, us[p].v -= ref[p].v;
        }
        num += std::pow(us[p].u - uf.u, 2) + std::pow(us[p].v - uf.v, 2);
        den += uf.u * uf.u + uf.v * uf.v;
    }
    if (!(den > 0.0)) return num > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    return std::sqrt(num / den);
}

/// Wraps the mesh solution itself as a batch velocity function.
inline VelocityFn as_velocity_fn(const FDSolution& sol) {
    return [&sol](std::span<const Point> pts) {
        std::vector<Velocity> out(pts.size());
        for (std::size_t p = 0; p < pts.size(); ++p) out[p] = velocity_at(sol, pts[p].x, pts[p].y);
        return out;
    };
}

/// Physical velocity of a spectral solution: the Jeffery-Hamel part in
/// closed form plus the inverse transform of û₁, interpolated in y.
inline VelocityFn spectral_velocity(const KGrid& kg, const YGrid& yg, const NSSolution& s, bool include_jh = true) {
    return [&kg, &yg, &s, include_jh](std::span<const Point> pts) {
        std::map<double, std::size_t> xs;
        for (const auto& p : pts) {
            if (!(p.y >= 1.0 && p.y <= yg.nodes().back())) throw OutOfDomain("spectral_velocity: y outside the grid");
            xs.emplace(p.x, 0);
        }
        std::vector<double> xv;
        for (auto& [x, i] : xs) i = xv.size(), xv.push_back(x);
        const InverseTransform inv(kg, xv);
        std::vector<Velocity> out(pts.size());
        std::vector<cplx> fu(kg.size());
        std::vector<cplx> fv(kg.size());
        for (std::size_t p = 0; p < pts.size(); ++p) {
            const auto sw = interpolation_weights(yg.nodes(), pts[p].y, 6);
            const std::size_t xi = xs.at(pts[p].x);
            Velocity u;
            for (std::size_t a = 0; a < sw.w.size(); ++a) {
                for (std::size_t i = 0; i < kg.size(); ++i) {
                    fu[i] = s.u1.u(i, sw.start + a);
                    fv[i] = s.u1.v(i, sw.start + a);
                }
                u.u += sw.w[a] * inv.apply(xi, fu).real();
                u.v += sw.w[a] * inv.apply(xi, fv).real();
            }
            if (include_jh) {
                const Velocity j = eval_cartesian(s.jh, pts[p].x, pts[p].y);
                u.u += j.u, u.v += j.v;
            }
            out[p] = u;
        }
        return out;
    };
}

/// Dirichlet data matched to a spectral solution: the spectral velocity on
/// the bottom line and the inner arc, u_Φ⁰ on the outer arc of radius R.
inline VelocityFn matched_boundary(const KGrid& kg, const YGrid& yg, const NSSolution& s, double R) {
    return [spec = spectral_velocity(kg, yg, s), &s, R](std::span<const Point> pts) {
        std::vector<Velocity> out(pts.size());
        std::vector<Point> inner;
        std::vector<std::size_t> where;
        for (std::size_t p = 0; p < pts.size(); ++p) {
            if (std::hypot(pts[p].x, pts[p].y - 1.0) >= R * (1.0 - 1e-12)) {
                out[p] = eval_cartesian(s.jh, pts[p].x, pts[p].y);
            } else {
                inner.push_back({pts[p].x, std::max(pts[p].y, 1.0)});
                where.push_back(p);
            }
        }
        const auto v = spec(inner);
        for (std::size_t q = 0; q < where.size(); ++q) out[where[q]] = v[q];
        return out;
    };
}

/// Rebuilds a solution from nodal Cartesian velocities, e.g. read back from
/// a field file; ψ and ω are left empty.
inline FDSolution fd_from_nodal(const HalfDiskMesh& mesh, std::vector<double> ux, std::vector<double> uy, double phi = 0.0,
                                double nu = 0.0) {
    if (ux.size() != mesh.size() || uy.size() != mesh.size()) throw MeshError("fd_from_nodal: size mismatch");
    FDSolution s{mesh, phi, nu, {}, {}, std::move(ux), std::move(uy)};
    return s;
}

}  // namespace hpns

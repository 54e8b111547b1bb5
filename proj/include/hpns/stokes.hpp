#pragma once

// Stokes problem in the half-plane y > 1 with Dirichlet data (u*, v*) on
// y = 1 and forcing div Q, Q = [[S, R], [R, −S]] (traceless, symmetric):
//
//   Δu − ∇p = div Q,   div u = 0,   u → 0.
//
// Solved mode by mode in Fourier space from the Green representation in
// terms of T^± = (T_< − T_>^+, σT_< + σT_>^−), their traces B^± at y = 1 and
// the boundary propagator U_r w = (y−1)^r e^{−|k|(y−1)} w. Here σ = i sign k.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hpns/errors.hpp"
#include "hpns/field.hpp"
#include "hpns/green_quadrature.hpp"
#include "hpns/grid.hpp"
#include "hpns/numerics.hpp"
#include "hpns/weighted_spaces.hpp"

namespace hpns {

inline cplx sigma_symbol(double k) {
    if (k == 0.0) return 0.0;
    return {0.0, k > 0 ? 1.0 : -1.0};
}

/// (U_r w)(k, y) = (y−1)^r e^{−|k|(y−1)} w(k).
inline SpectralField op_U(int r, const KGrid& kg, const YGrid& yg, const BoundaryTrace& w) {
    if (r < 0) throw DomainError("op_U: r must be non-negative");
    SpectralField out(kg.size(), yg.size());
    for (std::size_t i = 0; i < kg.size(); ++i)
        for (std::size_t j = 0; j < yg.size(); ++j) {
            const double t = yg[j] - 1.0;
            out(i, j) = std::pow(t, r) * std::exp(-std::abs(kg[i]) * t) * w[i];
        }
    return out;
}

enum class GreenOp { Less, GreaterPlus, GreaterMinus, Plus, Minus };

/// One of T_<, T_>^+, T_>^−, T^+, T^− applied to a bulk field.
inline SpectralField apply_green(GreenOp op, const KGrid& kg, const YGrid& yg, const SpectralField& w,
                                 const TailOptions& opt = {}) {
    const GreenQuadrature gq(yg);
    const auto tails = self_similar_tails(kg, yg, w, opt, "green operator");
    SpectralField out(kg.size(), yg.size());
    parallel_for(kg.size(), [&](std::size_t i) {
        const std::span<const cplx> col[] = {w.column(i)};
        const TailValues tv[] = {tails[i]};
        const auto r = gq.apply(std::abs(kg[i]), col, opt, tv)[0];
        const cplx s = sigma_symbol(kg[i]);
        auto dst = out.column(i);
        for (std::size_t j = 0; j < yg.size(); ++j) {
            switch (op) {
                case GreenOp::Less: dst[j] = r.less[j]; break;
                case GreenOp::GreaterPlus: dst[j] = r.greater_p[j]; break;
                case GreenOp::GreaterMinus: dst[j] = r.greater_m[j]; break;
                case GreenOp::Plus: dst[j] = r.less[j] - r.greater_p[j]; break;
                case GreenOp::Minus: dst[j] = s * (r.less[j] + r.greater_m[j]); break;
            }
        }
    });
    return out;
}

inline SpectralField op_Tless(const KGrid& kg, const YGrid& yg, const SpectralField& w, const TailOptions& o = {}) {
    return apply_green(GreenOp::Less, kg, yg, w, o);
}
inline SpectralField op_Tgreater(int sign, const KGrid& kg, const YGrid& yg, const SpectralField& w,
                                 const TailOptions& o = {}) {
    return apply_green(sign > 0 ? GreenOp::GreaterPlus : GreenOp::GreaterMinus, kg, yg, w, o);
}
inline SpectralField op_Tplus(const KGrid& kg, const YGrid& yg, const SpectralField& w, const TailOptions& o = {}) {
    return apply_green(GreenOp::Plus, kg, yg, w, o);
}
inline SpectralField op_Tminus(const KGrid& kg, const YGrid& yg, const SpectralField& w, const TailOptions& o = {}) {
    return apply_green(GreenOp::Minus, kg, yg, w, o);
}
/// B^± w = (T^± w)|_{y=1}.
inline BoundaryTrace op_B(int sign, const KGrid& kg, const YGrid& yg, const SpectralField& w, const TailOptions& o = {}) {
    const auto f = apply_green(sign > 0 ? GreenOp::Plus : GreenOp::Minus, kg, yg, w, o);
    BoundaryTrace t(kg.size());
    for (std::size_t i = 0; i < kg.size(); ++i) t[i] = f(i, 0);
    return t;
}

struct StokesOptions {
    TailOptions tail{};
    double symmetry_tol = 1e-12;
};

struct StokesSolution {
    SpectralField u_hat, v_hat, p_hat;
    BoundaryTrace u_r, v_r;  // effective boundary data after subtracting B^± terms
};

namespace detail {

struct StokesColumn {
    std::vector<cplx> u, v, p;
    cplx ur, vr;
};

// Columns R, S, (y−1)R, (y−1)S with their tails.
inline StokesColumn stokes_column(const GreenQuadrature& gq, double k, std::span<const std::span<const cplx>> ws,
                                  std::span<const TailValues> tails, cplx ustar, cplx vstar, const TailOptions& opt) {
    const auto& yg = gq.grid();
    const std::size_t n = yg.size();
    const auto S = ws[1];
    const auto g = gq.apply(std::abs(k), ws, opt, tails);
    const double a = std::abs(k);
    const cplx sg = sigma_symbol(k);
    const cplx ik(0.0, k);
    auto Tp = [&](int w, std::size_t j) { return g[w].less[j] - g[w].greater_p[j]; };
    auto Tm = [&](int w, std::size_t j) { return sg * (g[w].less[j] + g[w].greater_m[j]); };
    enum { iR = 0, iS = 1, itR = 2, itS = 3 };

    StokesColumn c;
    c.ur = ustar - Tp(iR, 0) + ik * Tp(itS, 0) + Tm(iS, 0) + ik * Tm(itR, 0);
    c.vr = vstar - ik * Tp(itR, 0) + ik * Tm(itS, 0);
    c.u.resize(n);
    c.v.resize(n);
    c.p.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double Y = yg[j] - 1.0;
        const double E = std::exp(-a * Y);
        // (z − y) = (z − 1) − (y − 1)
        const cplx TpR = Tp(iR, j), TpS = Tp(iS, j), TmR = Tm(iR, j), TmS = Tm(iS, j);
        const cplx TpRy = Tp(itR, j) - Y * TpR, TpSy = Tp(itS, j) - Y * TpS;
        const cplx TmRy = Tm(itR, j) - Y * TmR, TmSy = Tm(itS, j) - Y * TmS;
        c.u[j] = (TpR - ik * TpSy) - (TmS + ik * TmRy) + E * ((1.0 - a * Y) * c.ur - ik * Y * c.vr);
        c.v[j] = ik * TpRy - ik * TmSy + E * ((1.0 + a * Y) * c.vr - ik * Y * c.ur);
        c.p[j] = -2.0 * ik * TpR + 2.0 * ik * TmS + S[j] - E * 2.0 * ik * (c.ur + sg * c.vr);
    }
    return c;
}

}  // namespace detail

/// Stokes velocity and pressure for forcing Q = [[S, R], [R, −S]] and data (u*, v*).
inline StokesSolution solve_stokes(const KGrid& kg, const YGrid& yg, const ForcingTensor& Q, const BoundaryTrace& ustar,
                                   const BoundaryTrace& vstar, const StokesOptions& opt = {}) {
    if (Q.R.nk() != kg.size() || Q.S.nk() != kg.size() || Q.R.ny() != yg.size() || Q.S.ny() != yg.size() ||
        ustar.size() != kg.size() || vstar.size() != kg.size())
        throw MeshError("solve_stokes: field shapes do not match the grids");
    require_hermitian(kg, Q.R, "forcing R", opt.symmetry_tol);
    require_hermitian(kg, Q.S, "forcing S", opt.symmetry_tol);
    require_hermitian(kg, ustar, "boundary u*", opt.symmetry_tol);
    require_hermitian(kg, vstar, "boundary v*", opt.symmetry_tol);

    const GreenQuadrature gq(yg);
    SpectralField tR = Q.R, tS = Q.S;
    for (std::size_t i = 0; i < kg.size(); ++i)
        for (std::size_t j = 0; j < yg.size(); ++j) {
            tR(i, j) *= yg[j] - 1.0;
            tS(i, j) *= yg[j] - 1.0;
        }
    const SpectralField* fields[] = {&Q.R, &Q.S, &tR, &tS};
    std::vector<std::vector<TailValues>> tails;
    // (y−1)R and (y−1)S enter only with a factor ik, so their k = 0 tails are never used.
    for (int f = 0; f < 4; ++f) tails.push_back(self_similar_tails(kg, yg, *fields[f], opt.tail, "solve_stokes", f < 2));
    StokesSolution sol{SpectralField(kg.size(), yg.size()), SpectralField(kg.size(), yg.size()),
                       SpectralField(kg.size(), yg.size()), BoundaryTrace(kg.size()), BoundaryTrace(kg.size())};
    parallel_for(kg.size(), [&](std::size_t i) {
        const std::span<const cplx> ws[] = {Q.R.column(i), Q.S.column(i), tR.column(i), tS.column(i)};
        const TailValues tv[] = {tails[0][i], tails[1][i], tails[2][i], tails[3][i]};
        const auto c = detail::stokes_column(gq, kg[i], ws, tv, ustar[i], vstar[i], opt.tail);
        std::copy(c.u.begin(), c.u.end(), sol.u_hat.column(i).begin());
        std::copy(c.v.begin(), c.v.end(), sol.v_hat.column(i).begin());
        std::copy(c.p.begin(), c.p.end(), sol.p_hat.column(i).begin());
        sol.u_r[i] = c.ur;
        sol.v_r[i] = c.vr;
    });
    return sol;
}

/// Conditions at k = 0 under which the solution inherits the decay of the data.
/// Regime 1 (1 < q < 2): û*(0) + ∫R̂(0,y)dy = 0 and v̂*(0) = 0.
/// Regime 2 (2 < q < 3) adds
///   ∂_k û*(0) + ∫∂_k R̂(0,y)dy − 2i∫(y−1)Ŝ(0,y)dy = 0,
///   ∂_k v̂*(0) + i∫(y−1)R̂(0,y)dy = 0.
struct CompatibilityReport {
    int regime = 1;
    std::vector<std::string> names;
    std::vector<cplx> residuals;
    double tol = 0.0;
    bool satisfied = true;
};

inline int compatibility_regime(double q) {
    if (q > 1.0 && q < 2.0) return 1;
    if (q > 2.0 && q < 3.0) return 2;
    throw DomainError("compatibility: q must lie in (1,2) or (2,3)");
}

namespace detail {

/// ∂_k at k = 0 from a centred 7-point stencil (values at k_z−3..k_z+3).
template <class Get>
cplx k_derivative_at_zero(const KGrid& kg, Get&& get) {
    const std::size_t z = *kg.zero_index();
    if (z < 3 || z + 3 >= kg.size()) throw MeshError("compatibility: need three modes on each side of k = 0");
    std::vector<double> nodes(7);
    for (int r = 0; r < 7; ++r) nodes[r] = kg[z - 3 + r];
    const auto w = fornberg_weights(0.0, nodes, 1);
    cplx d = 0.0;
    for (int r = 0; r < 7; ++r) d += w[1][r] * get(z - 3 + r);
    return d;
}

}  // namespace detail

inline CompatibilityReport compatibility(const KGrid& kg, const YGrid& yg, const ForcingTensor& Q,
                                         const BoundaryTrace& ustar, const BoundaryTrace& vstar, double q,
                                         double tol = 1e-10, const TailOptions& opt = {}) {
    if (!kg.include_zero()) throw MeshError("compatibility: k-grid must contain k = 0");
    CompatibilityReport rep;
    rep.regime = compatibility_regime(q);
    rep.tol = tol;
    const std::size_t z = *kg.zero_index();
    const std::size_t ny = yg.size();
    const auto R0 = Q.R.column(z);
    rep.names = {"u*(0) + int R(0,y)", "v*(0)"};
    const CumulativeQuadrature yq(yg.nodes(), 6);
    const cplx intR = yq.total<cplx>(R0) + 2.0 * self_similar_tails(kg, yg, Q.R, opt, "compatibility")[z].decay;
    rep.residuals = {ustar[z] + intR, vstar[z]};
    if (rep.regime == 2) {
        std::vector<cplx> dR(ny), tS(ny), tR(ny);
        for (std::size_t j = 0; j < ny; ++j) {
            dR[j] = detail::k_derivative_at_zero(kg, [&](std::size_t i) { return Q.R(i, j); });
            tS[j] = (yg[j] - 1.0) * Q.S(z, j);
            tR[j] = (yg[j] - 1.0) * R0[j];
        }
        const cplx du = detail::k_derivative_at_zero(kg, [&](std::size_t i) { return ustar[i]; });
        const cplx dv = detail::k_derivative_at_zero(kg, [&](std::size_t i) { return vstar[i]; });
        const cplx I(0.0, 1.0);
        rep.names.push_back("d_k u*(0) + int d_k R(0,y) - 2i int (y-1) S(0,y)");
        rep.residuals.push_back(du + integrate_to_infinity(yg, dR, opt, "compatibility") -
                                2.0 * I * integrate_to_infinity(yg, tS, opt, "compatibility"));
        rep.names.push_back("d_k v*(0) + i int (y-1) R(0,y)");
        rep.residuals.push_back(dv + I * integrate_to_infinity(yg, tR, opt, "compatibility"));
    }
    for (const auto& r : rep.residuals) rep.satisfied = rep.satisfied && std::abs(r) <= tol;
    return rep;
}

// ---------------------------------------------------------------------------
// Independent reference: march the first-order system r' = L r + q̂ for a
// single mode. r = (û, v̂, γ, η) with γ = ω + R̂, p̂ = −η + Ŝ; L has
// eigenvalues ±|k| and P projects onto the decaying pair.

using ModeState = std::array<cplx, 4>;

struct MarchOptions {
    double y_far = 60.0;     // the growing part is integrated back from here with zero data
    double max_step = 2e-3;  // also limited by |k|·h ≤ 0.02
};

struct MarchResult {
    std::vector<double> y;
    std::vector<cplx> u, v, p;
};

inline MarchResult march_mode_oracle(double k, const std::function<cplx(double)>& R,
                                     const std::function<cplx(double)>& S, cplx ub, cplx vb,
                                     std::span<const double> ys, const MarchOptions& opt = {}) {
    if (k == 0.0) throw DomainError("march_mode_oracle: k must be non-zero");
    for (double y : ys)
        if (y < 1.0 || y > opt.y_far) throw DomainError("march_mode_oracle: output point outside [1, y_far]");
    const double a = std::abs(k);
    const cplx ik(0.0, k);
    using M4 = std::array<std::array<cplx, 4>, 4>;
    const M4 L = {{{0.0, ik, -1.0, 0.0}, {-ik, 0.0, 0.0, 0.0}, {0.0, 0.0, 0.0, ik}, {0.0, 0.0, -ik, 0.0}}};
    const double s = 1.0 / (2.0 * a);
    const M4 P = {{{s * a, -s * ik, s * 0.5, 0.0}, {s * ik, s * a, 0.0, -s * 0.5}, {0.0, 0.0, s * a, -s * ik},
                   {0.0, 0.0, s * ik, s * a}}};
    auto mul = [](const M4& m, const ModeState& x) {
        ModeState r{};
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) r[i] += m[i][j] * x[j];
        return r;
    };
    auto forcing = [&](double y) { return ModeState{R(y), 0.0, -2.0 * ik * S(y), 2.0 * ik * R(y)}; };
    auto stable = [&](const ModeState& x) { return mul(P, x); };
    auto unstable = [&](const ModeState& x) {
        const auto px = mul(P, x);
        ModeState r;
        for (int i = 0; i < 4; ++i) r[i] = x[i] - px[i];
        return r;
    };
    auto axpy = [](const ModeState& x, cplx c, const ModeState& d) {
        ModeState r;
        for (int i = 0; i < 4; ++i) r[i] = x[i] + c * d[i];
        return r;
    };
    // RK4 for x' = L x + Proj q on [y0, y1] (either direction), projecting after each step.
    auto integrate = [&](ModeState x, double y0, double y1, bool keep_stable) {
        auto proj = [&](const ModeState& v) { return keep_stable ? stable(v) : unstable(v); };
        auto rhs = [&](double y, const ModeState& v) {
            const auto lv = mul(L, v);
            const auto f = proj(forcing(y));
            ModeState r;
            for (int i = 0; i < 4; ++i) r[i] = lv[i] + f[i];
            return r;
        };
        const double len = std::abs(y1 - y0);
        if (len == 0.0) return x;
        const double hmax = std::min(opt.max_step, 0.02 / a);
        const int n = static_cast<int>(std::ceil(len / hmax));
        const double h = (y1 - y0) / n;
        for (int st = 0; st < n; ++st) {
            const double y = y0 + st * h;
            const auto k1 = rhs(y, x);
            const auto k2 = rhs(y + h / 2, axpy(x, h / 2, k1));
            const auto k3 = rhs(y + h / 2, axpy(x, h / 2, k2));
            const auto k4 = rhs(y + h, axpy(x, h, k3));
            for (int i = 0; i < 4; ++i) x[i] += h / 6 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            x = proj(x);
        }
        return x;
    };

    // Growing part, backwards from y_far to 1, recorded at the sorted output points.
    std::vector<double> pts(ys.begin(), ys.end());
    std::vector<std::size_t> order(pts.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) { return pts[l] < pts[r]; });
    std::vector<ModeState> grow(pts.size());
    ModeState x{};
    double yc = opt.y_far;
    for (std::size_t oi = order.size(); oi-- > 0;) {
        x = integrate(x, yc, pts[order[oi]], false);
        yc = pts[order[oi]];
        grow[order[oi]] = x;
    }
    const ModeState x1 = integrate(x, yc, 1.0, false);

    // Decaying part: initial value in range(P) matching the Dirichlet data.
    // Range(P) is spanned by P e1 = (½, σ/2, 0, 0) and P e3 = (1/(4|k|), 0, ½, σ/2).
    const cplx sg = sigma_symbol(k);
    const cplx tu = ub - x1[0];
    const cplx tv = vb - x1[1];
    const cplx c1 = 2.0 * tv / sg;
    const cplx c3 = 4.0 * a * (tu - 0.5 * c1);
    ModeState st{0.5 * c1 + c3 / (4.0 * a), 0.5 * sg * c1, 0.5 * c3, 0.5 * sg * c3};

    MarchResult out;
    out.y = pts;
    out.u.resize(pts.size());
    out.v.resize(pts.size());
    out.p.resize(pts.size());
    yc = 1.0;
    for (std::size_t oi = 0; oi < order.size(); ++oi) {
        const std::size_t idx = order[oi];
        st = integrate(st, yc, pts[idx], true);
        yc = pts[idx];
        ModeState r;
        for (int i = 0; i < 4; ++i) r[i] = st[i] + grow[idx][i];
        out.u[idx] = r[0];
        out.v[idx] = r[1];
        out.p[idx] = -r[3] + S(pts[idx]);
    }
    return out;
}

}  // namespace hpns

#pragma once

// Stationary Navier-Stokes in y > 1 as a perturbation of Jeffery-Hamel flow:
// u = u_JH + u₁ with
//
//   Δu₁ − ∇p₁ = div(u_JH⊗u₁ + u₁⊗u_JH + u₁⊗u₁),   u₁|_{y=1} = (a g, 0) + u_s,
//
// solved by Picard iteration on the Stokes solver. The boundary carrier is
// g(k) = e^{−k²/2}, i.e. a√(2π)e^{−x²/2} in x, so the asymmetry coefficient
// of (1/√(2π))e^{−x²/2} is A = 2πa. Each sweep fixes a = −∫R̂(0,y)dy, which
// makes the first compatibility condition hold exactly.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iomanip>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "hpns/errors.hpp"
#include "hpns/field.hpp"
#include "hpns/green_quadrature.hpp"
#include "hpns/grid.hpp"
#include "hpns/jeffery_hamel.hpp"
#include "hpns/numerics.hpp"
#include "hpns/stokes.hpp"
#include "hpns/transform.hpp"
#include "hpns/weighted_spaces.hpp"

namespace hpns {

/// Spectral amplitude → coefficient of (1/√(2π))e^{−x²/2}.
inline constexpr double asymmetry_scale = two_pi;

inline double asymmetry_carrier(double k) { return std::exp(-0.5 * k * k); }

/// (f̂ * ĝ)(k) = ∫ f̂(k−ℓ) ĝ(ℓ) dℓ on a symmetric k-grid containing 0.
///
/// For every output k the ℓ-nodes are the grid nodes merged with k − (grid
/// nodes), so features of either factor near its origin are resolved; the
/// integral is split at the kinks ℓ = 0 and ℓ = k and integrated with local
/// 6-point rules. Off-grid values come from 6-point interpolation on the
/// half-line of their sign.
class KConvolution {
public:
    explicit KConvolution(const KGrid& kg, double conv_tol = 1e-8) : kg_(kg), conv_tol_(conv_tol) {
        if (!kg.include_zero()) throw MeshError("convolve_k: k-grid must contain k = 0");
        const std::size_t n = kg.size();
        z_ = *kg.zero_index();
        half_.resize(n - z_);
        for (std::size_t i = 0; i < half_.size(); ++i) half_[i] = kg[z_ + i];
        if (half_.size() < 6) throw MeshError("convolve_k: need at least 6 modes per half-line");
        const double kmax = kg.k_max();
        // Plans for k < 0 mirror those for k > 0, so Hermitian inputs give Hermitian output.
        plan_.resize(n);
        for (std::size_t i = z_; i < n; ++i) plan_[i] = build(kg[i], kmax);
        for (std::size_t i = 0; i < z_; ++i) {
            plan_[i] = plan_[kg.mirror(i)];
            for (auto& e : plan_[i]) {
                e.fs = static_cast<int>(n) - 1 - e.fs;
                e.gs = static_cast<int>(n) - 1 - e.gs;
                e.fdir = -e.fdir;
                e.gdir = -e.gdir;
            }
        }
        const CumulativeQuadrature q(kg.modes(), 6);
        total_w_ = q.total_weights();
    }

    const KGrid& grid() const { return kg_; }

    /// Convolution of one y-slice (values indexed like the k-grid).
    std::vector<cplx> apply(std::span<const cplx> f, std::span<const cplx> g) const {
        check_tail(f);
        check_tail(g);
        std::vector<cplx> out(kg_.size());
        for (std::size_t i = 0; i < plan_.size(); ++i) {
            cplx acc = 0.0;
            for (const auto& e : plan_[i]) {
                cplx fv = 0.0, gv = 0.0;
                for (int r = 0; r < 6; ++r) {
                    fv += e.fw[r] * f[e.fs + e.fdir * r];
                    gv += e.gw[r] * g[e.gs + e.gdir * r];
                }
                acc += e.w * fv * gv;
            }
            out[i] = acc;
        }
        return out;
    }

private:
    struct Entry {
        double w;
        int fs, fdir, gs, gdir;
        double fw[6], gw[6];
    };

    // 6-point stencil on the half-line of sign(x); returns global start and direction.
    void stencil(double x, int& start, int& dir, double* w) const {
        const auto sw = interpolation_weights(half_, std::abs(x), 6);
        dir = x >= 0 ? 1 : -1;
        start = static_cast<int>(z_) + dir * static_cast<int>(sw.start);
        for (int r = 0; r < 6; ++r) w[r] = sw.w[r];
    }

    std::vector<Entry> build(double k, double kmax) const {
        const double lo = std::max(-kmax, k - kmax);
        const double hi = std::min(kmax, k + kmax);
        struct Cand {
            double x;
            bool forced;
        };
        std::vector<Cand> c;
        const double eps = 1e-13 * kmax;
        for (double l : kg_.modes()) {
            if (l >= lo - eps && l <= hi + eps) c.push_back({std::clamp(l, lo, hi), false});
            const double m = k - l;
            if (m >= lo - eps && m <= hi + eps) c.push_back({std::clamp(m, lo, hi), false});
        }
        for (double b : {lo, hi, 0.0, k}) c.push_back({b, true});
        std::sort(c.begin(), c.end(), [](const Cand& a, const Cand& b) { return a.x < b.x; });

        // Thin near-coincident nodes so local stencils stay well conditioned.
        std::vector<Cand> kept;
        for (std::size_t i = 0; i < c.size(); ++i) {
            if (c[i].x < lo || c[i].x > hi) continue;
            if (kept.empty()) {
                kept.push_back(c[i]);
                continue;
            }
            const double gap = c[i].x - kept.back().x;
            if (gap <= eps) {
                kept.back().forced = kept.back().forced || c[i].forced;
                continue;
            }
            const double prev = kept.size() >= 2 ? kept.back().x - kept[kept.size() - 2].x : INFINITY;
            const double next = i + 1 < c.size() ? c[i + 1].x - c[i].x : INFINITY;
            if (gap < 0.25 * std::min(prev, next)) {
                if (!c[i].forced) continue;
                if (!kept.back().forced) kept.pop_back();
            }
            kept.push_back(c[i]);
        }

        std::vector<Entry> out;
        std::size_t s0 = 0;
        for (std::size_t i = 1; i < kept.size(); ++i) {
            if (!(kept[i].forced || i + 1 == kept.size())) continue;
            std::vector<double> seg;
            for (std::size_t j = s0; j <= i; ++j) seg.push_back(kept[j].x);
            s0 = i;
            if (seg.size() < 2) continue;
            const auto w = CumulativeQuadrature(seg, 6).total_weights();
            for (std::size_t j = 0; j < seg.size(); ++j) {
                Entry e{};
                e.w = w[j];
                stencil(k - seg[j], e.fs, e.fdir, e.fw);
                stencil(seg[j], e.gs, e.gdir, e.gw);
                out.push_back(e);
            }
        }
        return out;
    }

    void check_tail(std::span<const cplx> f) const {
        double mass = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) mass += total_w_[i] * std::abs(f[i]);
        if (mass == 0.0) return;
        const std::size_t n = f.size();
        double tail = 0.0;
        for (auto [a, b] : {std::pair{n - 1, n - 2}, std::pair{std::size_t{0}, std::size_t{1}}}) {
            const double fa = std::abs(f[a]);
            const double fb = std::abs(f[b]);
            if (fa == 0.0) continue;
            const double lam = std::log(fb / fa) / std::abs(kg_[a] - kg_[b]);
            tail += lam > 0.0 ? fa / lam : fa * kg_.k_max();
        }
        if (tail > conv_tol_ * mass) {
            std::ostringstream os;
            os << "convolve_k: spectral mass beyond k_max (" << std::scientific << std::setprecision(2) << tail / mass
               << " relative) exceeds conv_tol";
            throw ResolutionError(os.str());
        }
    }

    KGrid kg_;
    double conv_tol_;
    std::size_t z_ = 0;
    std::vector<double> half_;
    std::vector<std::vector<Entry>> plan_;
    std::vector<double> total_w_;
};

/// Pairs of convolutions, slice by slice.
struct ConvolutionPair {
    const SpectralField* f;
    const SpectralField* g;
};

inline std::vector<SpectralField> convolve_slices(const KConvolution& conv, const YGrid& yg,
                                                  std::span<const ConvolutionPair> pairs) {
    const std::size_t nk = conv.grid().size();
    std::vector<SpectralField> out(pairs.size(), SpectralField(nk, yg.size()));
    parallel_for(yg.size(), [&](std::size_t j) {
        for (std::size_t p = 0; p < pairs.size(); ++p) {
            const auto fs = pairs[p].f->slice(j);
            const auto gs = pairs[p].g->slice(j);
            const auto h = conv.apply(fs.values(), gs.values());
            for (std::size_t i = 0; i < nk; ++i) out[p](i, j) = h[i];
        }
    });
    return out;
}

inline SpectralField convolve_k(const KGrid& kg, const YGrid& yg, const SpectralField& f, const SpectralField& g,
                                double conv_tol = 1e-8) {
    const KConvolution conv(kg, conv_tol);
    const ConvolutionPair p[] = {{&f, &g}};
    return std::move(convolve_slices(conv, yg, p)[0]);
}

/// Q = u_JH⊗u₁ + u₁⊗u_JH + u₁⊗u₁ in Fourier space.
struct QuadraticTerms {
    SpectralField Q11, Q22, Q12;

    ForcingTensor forcing() const {
        SpectralField S = Q11 - Q22;
        S *= 0.5;
        return {Q12, S};
    }
    SpectralField trace() const { return Q11 + Q22; }
};

inline QuadraticTerms assemble_quadratic(const KConvolution& conv, const YGrid& yg, const VelocitySpectrum& jh,
                                         const VelocitySpectrum& u1) {
    // Q11 = (2u_JH + u₁)*u₁, Q22 = (2v_JH + v₁)*v₁, Q12 = (u_JH + u₁)*v₁ + v_JH*u₁
    SpectralField a = jh.u;
    a *= 2.0;
    a += u1.u;
    SpectralField b = jh.v;
    b *= 2.0;
    b += u1.v;
    const SpectralField c = jh.u + u1.u;
    const ConvolutionPair pairs[] = {{&a, &u1.u}, {&b, &u1.v}, {&c, &u1.v}, {&jh.v, &u1.u}};
    auto r = convolve_slices(conv, yg, pairs);
    QuadraticTerms q{std::move(r[0]), std::move(r[1]), std::move(r[2])};
    q.Q12 += r[3];
    return q;
}

inline ForcingTensor assemble_forcing(const KGrid& kg, const YGrid& yg, const VelocitySpectrum& jh,
                                      const VelocitySpectrum& u1, double conv_tol = 1e-8) {
    return assemble_quadratic(KConvolution(kg, conv_tol), yg, jh, u1).forcing();
}

/// a = −∫₁^∞ R̂(0,y) dy (spectral amplitude of the carrier e^{−k²/2}).
inline double update_asymmetry(const KGrid& kg, const YGrid& yg, const ForcingTensor& Q, const TailOptions& opt = {}) {
    if (!kg.include_zero()) throw MeshError("update_asymmetry: k-grid must contain k = 0");
    const std::size_t z = *kg.zero_index();
    const CumulativeQuadrature yq(yg.nodes(), 6);
    const cplx I = yq.total<cplx>(Q.R.column(z)) + 2.0 * self_similar_tails(kg, yg, Q.R, opt, "update_asymmetry")[z].decay;
    if (std::abs(I.imag()) > 1e-10) throw SymmetryError("update_asymmetry: ∫R̂(0,y)dy is not real");
    return -I.real();
}

struct NSProblem {
    double phi = -0.01;
    int branch = 0;
    BoundaryTrace us, vs;
    KGrid kgrid;
    YGrid ygrid;
    double alpha = 2.5;
    double q = 1.5;
};

struct NSOptions {
    double tol = 1e-10;
    int max_iter = 50;
    double damping = 1.0;
    double phi_max = 0.02;
    double trace_norm_max = 0.01;
    double conv_tol = 1e-8;
    std::size_t theta_points = 1025;
    StokesOptions stokes{{1e-6}, 1e-12};
};

struct IterationRecord {
    int sweep;
    double norm_u1;  // U_{α,q} norm of û₁
    double a;        // carrier amplitude; A = 2πa
    double distance; // U_{α,q} norm of the update
};

struct NSSolution {
    JHSolution jh;
    VelocitySpectrum u_jh;
    VelocitySpectrum u1;
    SpectralField p_hat;  // perturbation pressure p₁
    double a = 0.0;
    double A = 0.0;
    std::vector<IterationRecord> trace_log;
    bool converged = false;
};

inline double update_norm(const KGrid& kg, const YGrid& yg, const SpectralField& du, const SpectralField& dv,
                          const SpaceIndex& idx) {
    return std::max(norm_bulk(kg, yg, du, idx).value, norm_bulk(kg, yg, dv, idx).value);
}

/// Perturbation traces for the NS problem must vanish at k = 0 and be small in T_{α,q}.
inline void validate_ns_problem(const NSProblem& pb, const NSOptions& opt) {
    if (!(pb.q > 1.0 && pb.q < 2.0)) throw DomainError("ns: q must lie in (1,2)");
    if (!(pb.alpha > 1.0)) throw DomainError("ns: alpha must exceed 1");
    if (std::abs(pb.phi) > opt.phi_max) throw DomainError("ns: |phi| exceeds phi_max");
    if (!(opt.damping > 0.0 && opt.damping <= 1.0)) throw DomainError("ns: damping must lie in (0,1]");
    const auto& kg = pb.kgrid;
    if (!kg.include_zero()) throw MeshError("ns: k-grid must contain k = 0");
    if (pb.us.size() != kg.size() || pb.vs.size() != kg.size()) throw MeshError("ns: trace size mismatch");
    const std::size_t z = *kg.zero_index();
    if (std::abs(pb.us[z]) > 1e-12 || std::abs(pb.vs[z]) > 1e-12)
        throw DomainError("ns: perturbation trace must vanish at k = 0");
    const SpaceIndex T(Family::T, pb.alpha, pb.q);
    const double nrm = std::max(norm_boundary(kg, pb.us, T).value, norm_boundary(kg, pb.vs, T).value);
    if (nrm > opt.trace_norm_max)
        throw DomainError("ns: perturbation trace norm " + std::to_string(nrm) + " exceeds trace_norm_max");
}

inline NSSolution picard_solve(const NSProblem& pb, const NSOptions& opt = {}) {
    validate_ns_problem(pb, opt);
    const auto& kg = pb.kgrid;
    const auto& yg = pb.ygrid;
    const std::size_t nk = kg.size(), ny = yg.size();
    const SpaceIndex U(Family::U, pb.alpha, pb.q);

    NSSolution sol{solve_jh(pb.phi, pb.branch, ThetaGrid(opt.theta_points)),
                   {SpectralField(nk, ny), SpectralField(nk, ny)},
                   {SpectralField(nk, ny), SpectralField(nk, ny)},
                   SpectralField(nk, ny),
                   0.0, 0.0, {}, false};
    sol.u_jh = spectral_trace(sol.jh, kg, yg);
    const KConvolution conv(kg, opt.conv_tol);

    int growing = 0;
    for (int sweep = 1; sweep <= opt.max_iter; ++sweep) {
        const auto quad = assemble_quadratic(conv, yg, sol.u_jh, sol.u1);
        const auto Q = quad.forcing();
        const double a = update_asymmetry(kg, yg, Q, opt.stokes.tail);
        BoundaryTrace ustar = pb.us;
        for (std::size_t i = 0; i < nk; ++i) ustar[i] += a * asymmetry_carrier(kg[i]);
        const auto st = solve_stokes(kg, yg, Q, ustar, pb.vs, opt.stokes);

        SpectralField du = st.u_hat - sol.u1.u;
        SpectralField dv = st.v_hat - sol.u1.v;
        du *= opt.damping;
        dv *= opt.damping;
        sol.u1.u += du;
        sol.u1.v += dv;
        sol.p_hat = st.p_hat;
        SpectralField half_trace = quad.trace();
        half_trace *= 0.5;
        sol.p_hat -= half_trace;
        sol.a = a;
        sol.A = asymmetry_scale * a;

        const double dist = update_norm(kg, yg, du, dv, U);
        const double nrm = update_norm(kg, yg, sol.u1.u, sol.u1.v, U);
        if (!std::isfinite(dist)) throw Divergence("picard_solve: non-finite update");
        if (!sol.trace_log.empty() && dist > sol.trace_log.back().distance)
            ++growing;
        else
            growing = 0;
        sol.trace_log.push_back({sweep, nrm, a, dist});
        if (dist < opt.tol) {
            sol.converged = true;
            return sol;
        }
        if (growing >= 5) throw Divergence("picard_solve: update distance grew for 5 consecutive sweeps");
    }
    throw NonConvergence("picard_solve: no convergence within max_iter sweeps", pb.phi);
}

/// 2π·v̂(0,y): the flux through each horizontal line.
inline std::vector<double> flux_profile(const KGrid& kg, const SpectralField& v) {
    const std::size_t z = *kg.zero_index();
    std::vector<double> out(v.ny());
    for (std::size_t j = 0; j < v.ny(); ++j) out[j] = two_pi * v(z, j).real();
    return out;
}

struct DecayRow {
    double y;
    double sup;       // sup_x |u₁(x,y)|
    double weighted;  // y · sup
};

struct DecayReport {
    std::vector<DecayRow> rows;
    double slope = 0.0;  // of log sup vs log y over the last decade
};

/// sup_x |f(x,y)| for a velocity pair, sampled on x ∈ y·[−x_span, x_span].
inline double sup_x(const KGrid& kg, const SpectralField& u, const SpectralField& v, std::size_t j, double y,
                    double x_span = 6.0, int nx = 121) {
    // Modes with |k|(y−1) > 45 are below rounding for Stokes-type decay; drop them.
    const double kcut = std::min(kg.k_max(), 45.0 / std::max(y - 1.0, 1e-3) + 1.0);
    const std::size_t z = *kg.zero_index();
    std::vector<double> pos;
    for (std::size_t i = z + 1; i < kg.size() && kg[i] <= kcut; ++i) pos.push_back(kg[i]);
    const auto sub = KGrid::from_positive(pos, true);
    std::vector<double> xs(nx);
    for (int i = 0; i < nx; ++i) xs[i] = y * x_span * (2.0 * i / (nx - 1) - 1.0);
    const InverseTransform inv(sub, xs);
    const std::size_t m = pos.size();
    std::vector<cplx> uu(sub.size()), vv(sub.size());
    for (std::size_t i = 0; i < sub.size(); ++i) {
        const std::size_t g = i <= m ? z - (m - i) : z + (i - m);
        uu[i] = u(g, j);
        vv[i] = v(g, j);
    }
    double s = 0.0;
    for (int i = 0; i < nx; ++i) s = std::max(s, std::hypot(inv.apply(i, uu).real(), inv.apply(i, vv).real()));
    return s;
}

inline DecayReport decay_report(const KGrid& kg, const YGrid& yg, const VelocitySpectrum& u1, int rows = 24) {
    DecayReport rep;
    const double ymax = yg.y_max();
    std::vector<std::size_t> idx;
    for (int r = 0; r < rows; ++r) {
        const double y = 1.0 + (ymax - 1.0) * std::pow(10.0, -3.0 * (rows - 1 - r) / (rows - 1));
        const std::size_t j = std::min(locate_interval(yg.nodes(), y) + 1, yg.size() - 1);
        if (idx.empty() || idx.back() != j) idx.push_back(j);
    }
    for (std::size_t j : idx) {
        const double s = sup_x(kg, u1.u, u1.v, j, yg[j]);
        rep.rows.push_back({yg[j], s, yg[j] * s});
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (const auto& r : rep.rows) {
        if (r.y < 0.1 * ymax || !(r.sup > 0.0)) continue;
        const double lx = std::log(r.y), ly = std::log(r.sup);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    rep.slope = n >= 2 ? (n * sxy - sx * sy) / (n * sxx - sx * sx) : 0.0;
    return rep;
}

}  // namespace hpns

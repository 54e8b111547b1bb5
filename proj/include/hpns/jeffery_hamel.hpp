#pragma once

// Jeffery-Hamel flows in the half-plane wedge. The profile f(θ) solves
//
//     f'' + f² + 4f = 2C,   f(±π/2) = 0,   ∫ f dθ = φ,
//
// and is constructed for small |φ| as f = A sin2θ + f1 + f̄ with
// f1 = C cos²θ − (A²/3) cos⁴θ, iterating the fixed-point maps for (Ā, f̄).
// The asymmetric branches (φ < 0 only) start from A₀ = ±√(−48φ/π).

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "hpns/errors.hpp"
#include "hpns/field.hpp"
#include "hpns/grid.hpp"
#include "hpns/numerics.hpp"

namespace hpns {

struct JHOptions {
    double tol = 1e-12;
    int max_iter = 200;
    double phi_max = 0.05;
    /// Relaxation factor in (0, 1]; 1 is the plain fixed-point map.
    double relaxation = 1.0;
};

struct JHSolution {
    double phi = 0.0;
    int branch = 0;
    double A = 0.0;
    double C = 0.0;
    std::vector<double> theta;
    std::vector<double> f;
    std::vector<double> f_prime;
    int iterations = 0;

    double sup_f() const {
        double m = 0.0;
        for (double v : f) m = std::max(m, std::abs(v));
        return m;
    }

    /// f at an arbitrary angle by 6-point local interpolation.
    double at(double th) const {
        if (th <= theta.front()) return f.front();
        if (th >= theta.back()) return f.back();
        return interpolate<double>(theta, f, th, 6);
    }
};

namespace detail {

/// Cumulative sine and cosine moments of g from −π/2.
struct LMoments {
    std::vector<double> Is;
    std::vector<double> Ic;
};

inline LMoments l_moments(const ThetaGrid& grid, std::span<const double> g, const CumulativeQuadrature& q) {
    const std::size_t n = grid.size();
    std::vector<double> gs(n);
    std::vector<double> gc(n);
    for (std::size_t i = 0; i < n; ++i) {
        gs[i] = g[i] * std::sin(2.0 * grid[i]);
        gc[i] = g[i] * std::cos(2.0 * grid[i]);
    }
    return {q.cumulative<double>(gs), q.cumulative<double>(gc)};
}

inline const CumulativeQuadrature& quadrature_for(const ThetaGrid& grid) {
    // One rule per grid size, shared across calls.
    static std::mutex m;
    static std::vector<std::pair<std::size_t, std::unique_ptr<CumulativeQuadrature>>> cache;
    std::lock_guard<std::mutex> lock(m);
    for (auto& [n, q] : cache)
        if (n == grid.size()) return *q;
    cache.emplace_back(grid.size(), std::make_unique<CumulativeQuadrature>(grid.nodes(), 6));
    return *cache.back().second;
}

}  // namespace detail

/// L[g](θ) = ½cos2θ ∫ g sin2s − ½sin2θ ∫ g cos2s, integrals from −π/2 to θ.
/// h = a sin2θ + b cos2θ − L[g] solves h'' + 4h = g.
inline std::vector<double> apply_L(const ThetaGrid& grid, std::span<const double> g) {
    if (g.size() != grid.size()) throw MeshError("apply_L: sample count does not match grid");
    const auto mom = detail::l_moments(grid, g, detail::quadrature_for(grid));
    std::vector<double> out(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double t = 2.0 * grid[i];
        out[i] = 0.5 * std::cos(t) * mom.Is[i] - 0.5 * std::sin(t) * mom.Ic[i];
    }
    return out;
}

/// d/dθ L[g] = −sin2θ ∫ g sin2s − cos2θ ∫ g cos2s.
inline std::vector<double> apply_L_prime(const ThetaGrid& grid, std::span<const double> g) {
    if (g.size() != grid.size()) throw MeshError("apply_L_prime: sample count does not match grid");
    const auto mom = detail::l_moments(grid, g, detail::quadrature_for(grid));
    std::vector<double> out(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double t = 2.0 * grid[i];
        out[i] = -std::sin(t) * mom.Is[i] - std::cos(t) * mom.Ic[i];
    }
    return out;
}

inline JHSolution solve_jh(double phi, int branch, const ThetaGrid& grid, const JHOptions& opt = {}) {
    if (branch < -1 || branch > 1) throw InvalidBranch("solve_jh: branch must be -1, 0 or +1");
    if (branch != 0 && phi >= 0.0)
        throw InvalidBranch("solve_jh: asymmetric branches exist only for phi < 0");
    if (!(std::abs(phi) <= opt.phi_max))
        throw DomainError("solve_jh: |phi| exceeds phi_max = " + std::to_string(opt.phi_max));
    if (!(opt.relaxation > 0.0 && opt.relaxation <= 1.0))
        throw DomainError("solve_jh: relaxation must lie in (0, 1]");

    const std::size_t n = grid.size();
    const auto& quad = detail::quadrature_for(grid);
    std::vector<double> s2(n);
    std::vector<double> c2(n);
    std::vector<double> cos2(n);
    for (std::size_t i = 0; i < n; ++i) {
        s2[i] = std::sin(2.0 * grid[i]);
        c2[i] = std::cos(2.0 * grid[i]);
        const double c = std::cos(grid[i]);
        cos2[i] = c * c;
    }
    s2.front() = s2.back() = 0.0;
    cos2.front() = cos2.back() = 0.0;

    JHSolution sol;
    sol.phi = phi;
    sol.branch = branch;
    sol.theta.assign(grid.nodes().begin(), grid.nodes().end());
    sol.f.assign(n, 0.0);
    sol.f_prime.assign(n, 0.0);
    if (phi == 0.0) return sol;

    const double A0 = branch == 0 ? 0.0 : branch * std::sqrt(-48.0 * phi / pi);
    const double denom = 48.0 * phi + 3.0 * pi * A0 * A0;
    double Abar = 0.0;
    std::vector<double> fbar(n, 0.0);
    std::vector<double> f0(n);
    std::vector<double> f1(n);
    std::vector<double> work(n);

    auto pressure_constant = [&](double A) { return 2.0 * phi / pi + 0.25 * A * A - (2.0 / pi) * quad.total<double>(fbar); };
    auto build_f01 = [&](double A, double C) {
        for (std::size_t i = 0; i < n; ++i) {
            f0[i] = A * s2[i];
            f1[i] = C * cos2[i] - (A * A / 3.0) * cos2[i] * cos2[i];
        }
    };

    int it = 0;
    for (;; ++it) {
        if (it >= opt.max_iter)
            throw NonConvergence("solve_jh: fixed point did not converge (phi too large?)", phi);
        const double A = A0 + Abar;
        const double C = pressure_constant(A);
        build_f01(A, C);

        for (std::size_t i = 0; i < n; ++i) work[i] = (A - (2.0 * f0[i] + 2.0 * f1[i] + fbar[i]) * s2[i]) * fbar[i];
        const double rhs = quad.total<double>(work);
        const double Abar_new = 48.0 / denom * (rhs - (pi / 48.0) * (3.0 * A0 + Abar) * Abar * Abar);

        for (std::size_t i = 0; i < n; ++i) work[i] = (2.0 * f0[i] + f1[i] + fbar[i]) * (f1[i] + fbar[i]);
        auto fbar_new = apply_L(grid, work);

        const double w = opt.relaxation;
        double change = std::abs(Abar_new - Abar);
        for (std::size_t i = 0; i < n; ++i) {
            change = std::max(change, std::abs(fbar_new[i] - fbar[i]));
            fbar[i] += w * (fbar_new[i] - fbar[i]);
        }
        Abar += w * (Abar_new - Abar);
        if (!std::isfinite(change)) throw NonConvergence("solve_jh: iteration diverged", phi);
        if (change < opt.tol) break;
    }

    sol.A = A0 + Abar;
    sol.C = pressure_constant(sol.A);
    build_f01(sol.A, sol.C);
    for (std::size_t i = 0; i < n; ++i) sol.f[i] = f0[i] + f1[i] + fbar[i];
    sol.f.front() = 0.0;

    for (std::size_t i = 0; i < n; ++i) work[i] = sol.f[i] * sol.f[i];
    const auto lp = apply_L_prime(grid, work);
    for (std::size_t i = 0; i < n; ++i) sol.f_prime[i] = 2.0 * sol.A * c2[i] - sol.C * s2[i] + lp[i];
    sol.iterations = it + 1;
    return sol;
}

/// max over interior nodes of |f'' + f² + 4f − 2C| with f'' from 4th-order
/// central differences.
inline double ode_residual(const JHSolution& sol) {
    const std::size_t n = sol.f.size();
    const double h = sol.theta[1] - sol.theta[0];
    double r = 0.0;
    for (std::size_t i = 2; i + 2 < n; ++i) {
        const auto& f = sol.f;
        const double fpp = (-f[i - 2] + 16.0 * f[i - 1] - 30.0 * f[i] + 16.0 * f[i + 1] - f[i + 2]) / (12.0 * h * h);
        r = std::max(r, std::abs(fpp + f[i] * f[i] + 4.0 * f[i] - 2.0 * sol.C));
    }
    return r;
}

inline double flux_of(const JHSolution& sol) {
    const ThetaGrid grid(sol.theta.size());
    return detail::quadrature_for(grid).total<double>(sol.f);
}

/// Velocity of the Jeffery-Hamel flow at (x, y), y > 0, with θ measured from
/// the y-axis (x = r sinθ, y = r cosθ).
struct Velocity {
    double u = 0.0;
    double v = 0.0;
};

inline Velocity eval_cartesian(const JHSolution& sol, double x, double y) {
    if (!(y > 0.0)) throw DomainError("eval_cartesian: y must be positive");
    const double s = x / y;
    const double fv = sol.at(std::atan(s)) / (1.0 + s * s);
    return {s * fv / y, fv / y};
}

struct BranchRow {
    double phi = 0.0;
    int branch = 0;
    double A = 0.0;
    double C = 0.0;
    double sup_f = 0.0;
    int iterations = 0;
};

/// Solves every admissible branch at n_samples fluxes spread uniformly over
/// [phi_min, phi_max] (a single sample sits at phi_max). Rows are sorted by
/// phi then branch.
inline std::vector<BranchRow> scan_branches(double phi_min, double phi_max, std::size_t n_samples,
                                            const ThetaGrid& grid, const JHOptions& opt = {}) {
    if (n_samples == 0) throw DomainError("scan_branches: n_samples must be positive");
    if (phi_min > phi_max) throw DomainError("scan_branches: phi_min must not exceed phi_max");
    std::vector<double> phis(n_samples);
    for (std::size_t i = 0; i < n_samples; ++i)
        phis[i] = n_samples == 1 ? phi_max
                                 : phi_min + (phi_max - phi_min) * static_cast<double>(i) / static_cast<double>(n_samples - 1);

    std::vector<std::vector<BranchRow>> rows(n_samples);
    detail::quadrature_for(grid);
    parallel_for(n_samples, [&](std::size_t i) {
        const double phi = phis[i];
        std::vector<int> branches = phi < 0.0 ? std::vector<int>{-1, 0, 1} : std::vector<int>{0};
        for (int b : branches) {
            const auto s = solve_jh(phi, b, grid, opt);
            rows[i].push_back({phi, b, s.A, s.C, s.sup_f(), s.iterations});
        }
    });
    std::vector<BranchRow> out;
    for (auto& r : rows) out.insert(out.end(), r.begin(), r.end());
    return out;
}

/// Fourier transforms in x of the Jeffery-Hamel velocity, convention
/// f(x) = ∫ e^{ikx} f̂(k) dk. By homogeneity û(k, y) = G_u(ky)/2π and
/// v̂(k, y) = G_v(ky)/2π with
///
///     G_v(κ) = ∫ e^{−iκ tanθ} f(θ) dθ,   G_u(κ) = ∫ e^{−iκ tanθ} tanθ f(θ) dθ.
///
/// G is evaluated in s = tanθ on Gauss-Legendre panels over [−S, S] plus
/// algebraic tails integrated through generalized exponential integrals,
/// then tabulated on a logarithmic grid in |κ| with the e^{−|κ|} decay
/// factored out.
class JHTransform {
public:
    explicit JHTransform(const JHSolution& sol, double s_cut = 100.0, double kappa_cut = 45.0,
                         double kappa_min = 1e-9, int per_decade = 80)
        : kappa_cut_(kappa_cut), kappa_min_(kappa_min) {
        if (sol.f.empty()) throw DomainError("JHTransform: empty solution");
        build_panels(sol, s_cut);
        build_tails(sol);
        const double lo = std::log(kappa_min);
        const double hi = std::log(kappa_cut);
        const auto m = static_cast<std::size_t>(std::ceil((hi - lo) / std::log(10.0) * per_decade)) + 1;
        logk_.resize(m);
        for (std::size_t i = 0; i < m; ++i) logk_[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(m - 1);
        for (int side = 0; side < 2; ++side) {
            gu_[side].resize(m);
            gv_[side].resize(m);
        }
        g0_ = direct(0.0);
        parallel_for(2 * m, [&](std::size_t j) {
            const int side = j < m ? 0 : 1;
            const std::size_t i = j % m;
            const double kap = (side == 0 ? 1.0 : -1.0) * std::exp(logk_[i]);
            const auto g = direct(kap);
            const double grow = std::exp(std::abs(kap));
            gu_[side][i] = g[0] * grow;
            gv_[side][i] = g[1] * grow;
        });
    }

    /// (G_u, G_v) by direct quadrature.
    std::array<cplx, 2> direct(double kappa) const {
        cplx gu = 0.0;
        cplx gv = 0.0;
        for (std::size_t i = 0; i < s_.size(); ++i) {
            const cplx e = std::polar(1.0, -kappa * s_[i]);
            gu += e * wu_[i];
            gv += e * wv_[i];
        }
        // Tails: Σ c_n ∫_S^∞ s^{-n} e^{∓iκs} ds = Σ c_n S^{1-n} E_n(±iκS).
        for (int side = 0; side < 2; ++side) {
            const cplx z(0.0, (side == 0 ? 1.0 : -1.0) * kappa * s_cut_);
            for (std::size_t nn = 2; nn < tail_u_[side].size(); ++nn) {
                const double cu = tail_u_[side][nn];
                const double cv = tail_v_[side][nn];
                if (cu == 0.0 && cv == 0.0) continue;
                const cplx en = expint_n(static_cast<int>(nn), z) * std::pow(s_cut_, 1.0 - static_cast<double>(nn));
                gu += cu * en;
                gv += cv * en;
            }
        }
        return {gu, gv};
    }

    /// Tabulated (G_u, G_v).
    std::array<cplx, 2> operator()(double kappa) const {
        const double a = std::abs(kappa);
        if (a >= kappa_cut_) return {cplx(0.0), cplx(0.0)};
        const int side = kappa >= 0.0 ? 0 : 1;
        if (a <= kappa_min_) {
            const double t = a / kappa_min_;
            const double decay = std::exp(-kappa_min_);
            return {g0_[0] + t * (decay * gu_[side][0] - g0_[0]), g0_[1] + t * (decay * gv_[side][0] - g0_[1])};
        }
        const double x = std::log(a);
        const double decay = std::exp(-a);
        return {decay * interpolate<cplx>(logk_, gu_[side], x, 6), decay * interpolate<cplx>(logk_, gv_[side], x, 6)};
    }

private:
    void build_panels(const JHSolution& sol, double s_cut) {
        s_cut_ = s_cut;
        const GaussLegendre gl(16);
        const double width = 0.125;
        const auto np = static_cast<std::size_t>(std::ceil(2.0 * s_cut / width));
        const double h = 2.0 * s_cut / static_cast<double>(np);
        for (std::size_t p = 0; p < np; ++p) {
            const double a = -s_cut + h * static_cast<double>(p);
            for (std::size_t q = 0; q < gl.x.size(); ++q) {
                const double s = a + 0.5 * h * (1.0 + gl.x[q]);
                const double fv = sol.at(std::atan(s)) / (1.0 + s * s);
                s_.push_back(s);
                wv_.push_back(0.5 * h * gl.w[q] * fv);
                wu_.push_back(0.5 * h * gl.w[q] * s * fv);
            }
        }
    }

    // Large-|s| expansions in w = 1/|s| from the Taylor series of f at ±π/2.
    void build_tails(const JHSolution& sol) {
        constexpr int N = 10;
        using Series = std::array<double, N + 1>;
        auto mul = [](const Series& a, const Series& b) {
            Series c{};
            for (int i = 0; i <= N; ++i)
                for (int j = 0; i + j <= N; ++j) c[i + j] += a[i] * b[j];
            return c;
        };
        auto compose = [&](const Series& outer, const Series& inner) {
            // outer(inner(w)) with inner[0] = 0.
            Series result{};
            Series power{};
            power[0] = 1.0;
            for (int i = 0; i <= N; ++i) {
                for (int j = 0; j <= N; ++j) result[j] += outer[i] * power[j];
                power = mul(power, inner);
            }
            return result;
        };
        // t = arctan(w), sin t, cos t as series in w.
        Series t{};
        for (int j = 1, sgn = 1; j <= N; j += 2, sgn = -sgn) t[j] = sgn / static_cast<double>(j);
        Series sin_s{};
        Series cos_s{};
        double fact = 1.0;
        for (int j = 0; j <= N; ++j) {
            if (j > 0) fact *= j;
            const int r = j % 4;
            if (j % 2 == 1) sin_s[j] = (r == 1 ? 1.0 : -1.0) / fact;
            else cos_s[j] = (r == 0 ? 1.0 : -1.0) / fact;
        }
        const Series sint = compose(sin_s, t);
        const Series cost = compose(cos_s, t);

        const double fp_lo = sol.f_prime.front();
        const double fp_hi = sol.f_prime.back();
        for (int side = 0; side < 2; ++side) {
            // Local series f(θ_end + τ) = Σ a_n τ^n from f'' = 2C − f² − 4f.
            Series a{};
            a[1] = side == 0 ? fp_hi : fp_lo;
            for (int m = 0; m + 2 <= N; ++m) {
                double sq = 0.0;
                for (int i = 0; i <= m; ++i) sq += a[i] * a[m - i];
                const double rhs = (m == 0 ? 2.0 * sol.C : 0.0) - sq - 4.0 * a[m];
                a[m + 2] = rhs / static_cast<double>((m + 2) * (m + 1));
            }
            // s → +∞: θ = π/2 − t (τ = −t); s → −∞: θ = −π/2 + t (τ = t).
            Series a_t = a;
            if (side == 0)
                for (int j = 1; j <= N; j += 2) a_t[j] = -a_t[j];
            const Series fw = compose(a_t, t);
            const Series fv = mul(fw, mul(sint, sint));
            Series fu = mul(fw, mul(sint, cost));
            if (side == 1)
                for (auto& c : fu) c = -c;
            tail_u_[side].assign(fu.begin(), fu.end());
            tail_v_[side].assign(fv.begin(), fv.end());
        }
    }

    double s_cut_ = 100.0;
    double kappa_cut_;
    double kappa_min_;
    std::vector<double> s_;
    std::vector<double> wu_;
    std::vector<double> wv_;
    std::array<std::vector<double>, 2> tail_u_;
    std::array<std::vector<double>, 2> tail_v_;
    std::vector<double> logk_;
    std::array<std::vector<cplx>, 2> gu_;
    std::array<std::vector<cplx>, 2> gv_;
    std::array<cplx, 2> g0_{};
};

struct VelocitySpectrum {
    SpectralField u;
    SpectralField v;
};

/// û_JH and v̂_JH on the tensor grid, made exactly Hermitian.
inline VelocitySpectrum spectral_trace(const JHSolution& sol, const KGrid& kg, const YGrid& yg) {
    VelocitySpectrum out{SpectralField(kg.size(), yg.size()), SpectralField(kg.size(), yg.size())};
    if (sol.phi == 0.0) return out;
    const JHTransform G(sol);
    for (std::size_t i = 0; i < kg.size(); ++i)
        for (std::size_t j = 0; j < yg.size(); ++j) {
            const auto g = G(kg[i] * yg[j]);
            out.u(i, j) = g[0] / two_pi;
            out.v(i, j) = g[1] / two_pi;
        }
    symmetrize(kg, out.u);
    symmetrize(kg, out.v);
    return out;
}

}  // namespace hpns

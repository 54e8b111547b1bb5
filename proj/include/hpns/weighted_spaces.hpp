#pragma once

// Weights and discrete norms of the weighted spaces used to measure decay.
// Boundary functions of k carry the weight
//     η_{α,q}(k) = |k|^q / (1 + |k|^{α+q}),
// bulk functions of (k, y) the weight
//     μ_{α,q}(k, y) = y^{−q} / (1 + (|k|y)^α)      (times 1 + (|k|y)^q if q < 0).
// All norms are grid suprema and therefore lower bounds of the true norms.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "hpns/errors.hpp"
#include "hpns/field.hpp"
#include "hpns/grid.hpp"
#include "hpns/numerics.hpp"

namespace hpns {

enum class Family { A, T, W, B, U, P, R };

inline const char* family_name(Family f) {
    switch (f) {
        case Family::A: return "A";
        case Family::T: return "T";
        case Family::W: return "W";
        case Family::B: return "B";
        case Family::U: return "U";
        case Family::P: return "P";
        case Family::R: return "R";
    }
    return "?";
}

inline Family parse_family(const std::string& s) {
    static const std::pair<const char*, Family> table[] = {{"A", Family::A}, {"T", Family::T}, {"W", Family::W}, {"B", Family::B},
                                                           {"U", Family::U}, {"P", Family::P}, {"R", Family::R}};
    for (const auto& [name, f] : table)
        if (s == name) return f;
    throw DomainError("unknown space family '" + s + "'");
}

struct SpaceIndex {
    Family family = Family::A;
    double alpha = 0.0;
    double q = 0.0;

    SpaceIndex() = default;
    SpaceIndex(Family f, double a, double qq) : family(f), alpha(a), q(qq) {
        if (!(alpha >= 0.0)) throw DomainError("SpaceIndex: alpha must be non-negative");
        if ((f == Family::P || f == Family::R) && (alpha < 1.0 || q < 1.0))
            throw DomainError("SpaceIndex: P and R require alpha >= 1 and q >= 1");
        if ((f == Family::T || f == Family::W || f == Family::U) && q < 0.0)
            throw DomainError("SpaceIndex: T, W and U require q >= 0");
    }

    bool is_boundary() const { return family == Family::A || family == Family::T || family == Family::W; }
};

struct NormTerm {
    int i = 0;  // order of ∂_k
    int j = 0;  // order of ∂_y
    double alpha = 0.0;
    double q = 0.0;
    double value = 0.0;
};

struct NormReport {
    SpaceIndex index;
    double value = 0.0;
    std::vector<NormTerm> terms;
};

inline double eta(double alpha, double q, double k) {
    const double a = std::abs(k);
    if (a == 0.0) {
        if (q < 0.0) throw DomainError("eta: k = 0 is outside the domain for q < 0");
        return q == 0.0 ? 1.0 : 0.0;
    }
    return std::pow(a, q) / (1.0 + std::pow(a, alpha + q));
}

inline double mu(double alpha, double q, double k, double y) {
    if (!(y >= 1.0)) throw DomainError("mu: y must be at least 1");
    const double ky = std::abs(k) * y;
    if (q < 0.0 && ky == 0.0) throw DomainError("mu: k = 0 is outside the domain for q < 0");
    double w = std::pow(y, -q) / (1.0 + std::pow(ky, alpha));
    if (q < 0.0) w *= 1.0 + std::pow(ky, q);
    return w;
}

/// Quintic smoothstep cut-off: 1 on [0,1], 0 on [2,∞).
inline double cutoff_chi(double t) {
    if (t < 0.0) throw DomainError("cutoff_chi: argument must be non-negative");
    if (t <= 1.0) return 1.0;
    if (t >= 2.0) return 0.0;
    const double s = t - 1.0;
    return 1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
}

/// ∂_k^m of k-samples, each half-line k ≥ 0 and k ≤ 0 separately with
/// (m+4)-point stencils (4th order). The value at k = 0 is the one-sided
/// derivative from k > 0.
inline std::vector<cplx> k_derivative(const KGrid& kg, std::span<const cplx> f, int m) {
    if (m == 0) return {f.begin(), f.end()};
    const std::size_t n = kg.size();
    std::vector<cplx> out(n);
    const std::size_t npts = static_cast<std::size_t>(m) + 4;
    const std::size_t z = kg.include_zero() ? *kg.zero_index() : n / 2;
    // Positive side: indices [z, n) (z is the first positive when no zero).
    const std::size_t pos0 = z;
    const std::size_t neg1 = kg.include_zero() ? z + 1 : z;  // negative side: [0, neg1)
    if (n - pos0 < npts || neg1 < npts)
        throw DomainError("k_derivative: too few modes per half-line for derivative order " + std::to_string(m));
    auto ks = kg.modes();
    const auto dp = differentiate<cplx>(ks.subspan(pos0), f.subspan(pos0), m, npts);
    const auto dn = differentiate<cplx>(ks.subspan(0, neg1), f.subspan(0, neg1), m, npts);
    for (std::size_t i = 0; i < neg1; ++i) out[i] = dn[i];
    for (std::size_t i = pos0; i < n; ++i) out[i] = dp[i - pos0];
    return out;
}

/// ∂_y^m of one k-column with (m+2)-point stencils (2nd order).
inline std::vector<cplx> y_derivative(const YGrid& yg, std::span<const cplx> f, int m) {
    if (m == 0) return {f.begin(), f.end()};
    const std::size_t npts = static_cast<std::size_t>(m) + 2;
    if (yg.size() < npts) throw DomainError("y_derivative: too few y-nodes for derivative order " + std::to_string(m));
    return differentiate<cplx>(yg.nodes(), f, m, npts);
}

/// sup over the grid of |f| / η_{α,q}, skipping k = 0 when q < 0.
inline double sup_ratio_A(const KGrid& kg, std::span<const cplx> f, double alpha, double q) {
    double s = 0.0;
    for (std::size_t i = 0; i < kg.size(); ++i) {
        if (kg[i] == 0.0) {
            if (q < 0.0) continue;
            if (q > 0.0) {
                if (std::abs(f[i]) > 0.0) return INFINITY;
                continue;
            }
        }
        s = std::max(s, std::abs(f[i]) / eta(alpha, q, kg[i]));
    }
    return s;
}

/// Norm in A, T or W. Derivatives in k are formed by finite differences.
inline NormReport norm_boundary(const KGrid& kg, const BoundaryTrace& trace, const SpaceIndex& idx) {
    if (!idx.is_boundary()) throw DomainError("norm_boundary: family must be A, T or W");
    if (trace.size() != kg.size()) throw MeshError("norm_boundary: trace does not match grid");
    require_hermitian(kg, trace, "norm_boundary", 1e-10);
    NormReport rep;
    rep.index = idx;
    if (idx.family == Family::A) {
        const double v = sup_ratio_A(kg, trace.values(), idx.alpha, idx.q);
        rep.terms.push_back({0, 0, idx.alpha, idx.q, v});
        rep.value = v;
        return rep;
    }
    const int imax = static_cast<int>(std::floor(idx.q));
    for (int i = 0; i <= imax; ++i) {
        const auto d = k_derivative(kg, trace.values(), i);
        const double qq = idx.family == Family::T ? std::min(0.0, idx.q - 1.0 - i) : idx.q - 1.0 - i;
        const double v = sup_ratio_A(kg, d, idx.alpha + 1.0, qq);
        rep.terms.push_back({i, 0, idx.alpha + 1.0, qq, v});
        rep.value += v;
    }
    return rep;
}

/// Norm in B, U, P or R with ∂_k (4th order, per half-line) and ∂_y (2nd order).
inline NormReport norm_bulk(const KGrid& kg, const YGrid& yg, const SpectralField& f, const SpaceIndex& idx) {
    if (idx.is_boundary()) throw DomainError("norm_bulk: family must be B, U, P or R");
    if (f.nk() != kg.size() || f.ny() != yg.size()) throw MeshError("norm_bulk: field does not match grids");
    NormReport rep;
    rep.index = idx;

    int imax = 0;
    int jmax = 0;
    switch (idx.family) {
        case Family::B: break;
        case Family::U: imax = static_cast<int>(std::floor(idx.q)); jmax = static_cast<int>(std::floor(idx.alpha)); break;
        case Family::P: imax = static_cast<int>(std::floor(idx.q)) - 1; jmax = static_cast<int>(std::floor(idx.alpha)); break;
        case Family::R: imax = static_cast<int>(std::floor(idx.q)) - 1; jmax = static_cast<int>(std::floor(idx.alpha)) - 1; break;
        default: break;
    }

    const std::size_t nk = kg.size();
    const std::size_t ny = yg.size();
    for (int i = 0; i <= imax; ++i) {
        // ∂_k^i on every y-row.
        SpectralField dk(nk, ny);
        std::vector<cplx> row(nk);
        for (std::size_t j = 0; j < ny; ++j) {
            for (std::size_t m = 0; m < nk; ++m) row[m] = f(m, j);
            const auto d = k_derivative(kg, row, i);
            for (std::size_t m = 0; m < nk; ++m) dk(m, j) = d[m];
        }
        for (int j = 0; j <= jmax; ++j) {
            const double a = idx.family == Family::B ? idx.alpha : idx.alpha + 1.0 - j;
            const double qq = idx.family == Family::B ? idx.q : idx.q - 1.0 - i + j;
            double s = 0.0;
            for (std::size_t m = 0; m < nk; ++m) {
                const double k = kg[m];
                if (k == 0.0 && qq < 0.0) continue;
                const auto col = y_derivative(yg, dk.column(m), j);
                for (std::size_t r = 0; r < ny; ++r) s = std::max(s, std::abs(col[r]) / mu(a, qq, k, yg[r]));
            }
            rep.terms.push_back({i, j, a, qq, s});
            rep.value += s;
        }
    }
    return rep;
}

/// ĝ = f̂ − (Σ_{i<⌊q⌋} k^i ∂_k^i f̂(0)/i!) χ(|k|). Derivatives at 0 from a
/// centred 7-point stencil across k = 0.
inline BoundaryTrace taylor_project(const KGrid& kg, const BoundaryTrace& f, double q) {
    const int order = static_cast<int>(std::floor(q));
    BoundaryTrace g = f;
    if (order <= 0) return g;
    if (!kg.include_zero()) throw DomainError("taylor_project: k-grid must contain k = 0");
    const std::size_t z = *kg.zero_index();
    const std::size_t half = 3;
    if (z < half || z + half >= kg.size()) throw DomainError("taylor_project: k-grid too small");
    auto nodes = kg.modes().subspan(z - half, 2 * half + 1);
    const auto c = fornberg_weights(0.0, nodes, order - 1);
    std::vector<cplx> d(order);
    for (int i = 0; i < order; ++i)
        for (std::size_t j = 0; j < nodes.size(); ++j) d[i] += c[i][j] * f[z - half + j];
    for (std::size_t m = 0; m < kg.size(); ++m) {
        const double k = kg[m];
        const double chi = cutoff_chi(std::abs(k));
        if (chi == 0.0) continue;
        cplx p = 0.0;
        double kp = 1.0;
        double fact = 1.0;
        for (int i = 0; i < order; ++i) {
            if (i > 0) {
                kp *= k;
                fact *= i;
            }
            p += kp / fact * d[i];
        }
        g[m] -= p * chi;
    }
    return g;
}

/// μ^ν_{α,0}(k, y) = (|k|y)^{−ν} / (1 + (|k|y)^{α−ν}).
inline double mu_nu(double alpha, double nu, double k, double y) {
    const double ky = std::abs(k) * y;
    return std::pow(ky, -nu) / (1.0 + std::pow(ky, alpha - nu));
}

struct ConvolutionBound {
    double sup_ratio = 0.0;
    double k_at_sup = 0.0;
    double y_at_sup = 0.0;
};

/// (μ_{α,0} * μ^ν_{α,0})(k, y) = ∫ μ_{α,0}(ℓ, y) μ^ν_{α,0}(k − ℓ, y) dℓ by
/// Gauss-Legendre, with t = |k − ℓ| = τ^{1/(1−ν)} removing the singularity.
inline double convolve_weights(double alpha, double nu, double k, double y) {
    static const GaussLegendre gl(24);
    const double p = 1.0 / (1.0 - nu);
    // t-breakpoints: the kink of μ_{α,0}(k ± t) at t = |k| and scales 1/y.
    std::vector<double> br{0.0};
    const double scale = 1.0 / y;
    for (double t = scale * 1e-3; t < scale * 1e7; t *= 2.0) br.push_back(t);
    if (k != 0.0) br.push_back(std::abs(k));
    std::sort(br.begin(), br.end());
    double total = 0.0;
    for (int sgn : {-1, 1}) {
        auto integrand = [&](double t) { return mu(alpha, 0.0, k + sgn * t, y) * mu_nu(alpha, nu, t, y); };
        // Singular first panel in τ = t^{1/p}.
        const double t1 = br[1];
        const double tau1 = std::pow(t1, 1.0 / p);
        total += gl.integrate([&](double tau) {
            if (tau <= 0.0) return 0.0;
            const double t = std::pow(tau, p);
            return integrand(t) * p * std::pow(tau, p - 1.0);
        }, 0.0, tau1);
        for (std::size_t b = 1; b + 1 < br.size(); ++b) {
            if (br[b + 1] <= br[b]) continue;
            total += gl.integrate(integrand, br[b], br[b + 1]);
        }
    }
    return total;
}

/// sup over the (k, y) grid of (μ_{α,0} * μ^ν_{α,0}) / μ_{α,1}.
inline ConvolutionBound convolution_weight_bound(double alpha, double nu, std::span<const double> ks, std::span<const double> ys) {
    if (!(alpha > 1.0) || !(nu > 0.0 && nu < 1.0)) throw DomainError("convolution_weight_bound: need alpha > 1, 0 < nu < 1");
    ConvolutionBound out;
    std::vector<double> ratio(ks.size() * ys.size());
    parallel_for(ratio.size(), [&](std::size_t n) {
        const double k = ks[n / ys.size()];
        const double y = ys[n % ys.size()];
        ratio[n] = convolve_weights(alpha, nu, k, y) / mu(alpha, 1.0, k, y);
    });
    for (std::size_t n = 0; n < ratio.size(); ++n) {
        if (ratio[n] > out.sup_ratio) {
            out.sup_ratio = ratio[n];
            out.k_at_sup = ks[n / ys.size()];
            out.y_at_sup = ys[n % ys.size()];
        }
    }
    return out;
}

}  // namespace hpns

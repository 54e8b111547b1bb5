#pragma once

// y-quadrature for the Stokes Green operators on one Fourier mode a = |k|:
//
//   (T_< w)(y)   = ½ ∫_1^y e^{−a(y−z)} (1 − χ(a(z−1))) w(z) dz
//   (T_>^± w)(y) = ½ ∫_y^∞ (e^{−a(z−y)} ± χ(a(z−1)) e^{a(z−y)}) w(z) dz
//
// w is replaced on every interval by its local 6-point interpolant and the
// exponential kernels are integrated exactly (moments ∫ e^{∓bs} s^j ds), so
// large a·h is harmless. Values at all nodes follow from O(n) recursions.
// Where the cut-off χ is in transition, or in the bounded growth term, the
// integrals use Gauss-Legendre on sub-intervals split at a(z−1) ∈ {1, 2}.
// Beyond y_max, w is continued as a power law fitted over the last decade.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "hpns/errors.hpp"
#include "hpns/field.hpp"
#include "hpns/grid.hpp"
#include "hpns/numerics.hpp"
#include "hpns/weighted_spaces.hpp"

namespace hpns {

/// ∫_0^1 e^{−b s} s^j ds and ∫_0^1 e^{−b(1−s)} s^j ds for j < N.
template <int N>
struct ExpMoments {
    std::array<double, N> right{};  // kernel e^{−bs}
    std::array<double, N> left{};   // kernel e^{−b(1−s)}

    explicit ExpMoments(double b) {
        const double eb = std::exp(-b);
        if (b < 4.0) {
            // Σ_n (∓b)^n / n! / (j+n+1)
            for (int j = 0; j < N; ++j) {
                double term = 1.0;
                double sr = 0.0;
                double sl = 0.0;
                for (int n = 0; n < 80; ++n) {
                    if (n > 0) term *= b / n;
                    const double c = term / (j + n + 1);
                    sr += (n % 2 ? -c : c);
                    sl += c;
                    if (c < 1e-18 * sl) break;
                }
                right[j] = sr;
                left[j] = eb * sl;
            }
        } else {
            right[0] = (1.0 - eb) / b;
            left[0] = (1.0 - eb) / b;
            for (int j = 1; j < N; ++j) {
                right[j] = (j * right[j - 1] - eb) / b;
                left[j] = (1.0 - j * left[j - 1]) / b;
            }
        }
    }
};

struct TailOptions {
    /// Allowed uncertainty of the tail estimate, relative to max(1, sup|w|).
    double tail_tol = 1e-9;
};

/// Power-law continuation of a column beyond y_max.
struct TailFit {
    bool negligible = true;
    cplx w_end = 0.0;
    double y_end = 0.0;
    double p_decade = 0.0;
    double p_half = 0.0;
    double scale = 0.0;
};

inline double fit_exponent(std::span<const double> y, std::span<const cplx> w, double y_lo) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] < y_lo * (1 - 1e-12)) continue;
        const double a = std::abs(w[i]);
        if (!(a > 0.0)) return INFINITY;
        const double lx = std::log(y[i]);
        const double ly = std::log(a);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    if (n < 3) return NAN;
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return -slope;
}

inline TailFit fit_tail(std::span<const double> y, std::span<const cplx> w, double tail_tol) {
    TailFit t;
    const double Y = y.back();
    t.y_end = Y;
    t.w_end = w.back();
    for (const auto& v : w) t.scale = std::max(t.scale, std::abs(v));
    double win = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i)
        if (y[i] >= 0.1 * Y) win = std::max(win, std::abs(w[i]));
    if (win * Y <= 1e-3 * tail_tol * std::max(1.0, t.scale)) return t;
    t.negligible = false;
    t.p_decade = fit_exponent(y, w, 0.1 * Y);
    t.p_half = fit_exponent(y, w, Y / std::sqrt(10.0));
    if (std::isnan(t.p_decade) || std::isnan(t.p_half))
        throw TailError("tail estimate needs at least three y-nodes in the last decade");
    return t;
}

namespace detail {

inline const GaussLegendre& gl10() {
    static const GaussLegendre g(10);
    return g;
}

/// ∫_Y^∞ e^{−a(z−Y)} (z/Y)^{−p} dz, or +∞ if divergent.
inline double power_tail_decay(double a, double p, double Y) {
    if (std::isinf(p)) return 0.0;
    if (a == 0.0) return p > 1.0 ? Y / (p - 1.0) : INFINITY;
    // z = Y e^u
    const double aY = a * Y;
    double u_max = std::log1p(45.0 / aY);
    if (p > 1.0) u_max = std::min(u_max, 45.0 / (p - 1.0));
    const auto& gl = gl10();
    double total = 0.0;
    double u = 0.0;
    while (u < u_max) {
        const double w = std::min({0.25, 0.5 / (aY * std::exp(u)), u_max - u});
        total += gl.integrate([&](double s) { return std::exp(-aY * std::expm1(s) + (1.0 - p) * s); }, u, u + w);
        u += w;
    }
    return Y * total;
}

/// ∫_Y^{z_c} χ(a(z−1)) e^{a(z−1)} (z/Y)^{−p} dz with z_c = 1 + 2/a (a > 0),
/// or ∫_Y^∞ (z/Y)^{−p} dz when a = 0.
inline double power_tail_growth(double a, double p, double Y) {
    if (std::isinf(p)) return 0.0;
    if (a == 0.0) return p > 1.0 ? Y / (p - 1.0) : INFINITY;
    const double zc = 1.0 + 2.0 / a;
    if (zc <= Y) return 0.0;
    const double z1 = 1.0 + 1.0 / a;
    const auto& gl = gl10();
    auto f = [&](double u) {
        const double z = Y * std::exp(u);
        return cutoff_chi(std::max(0.0, a * (z - 1.0))) * std::exp(a * (z - 1.0) - p * u) * z;
    };
    double total = 0.0;
    const double u_end = std::log(zc / Y);
    const double u_mid = z1 > Y ? std::log(z1 / Y) : 0.0;
    for (auto [lo, hi] : {std::pair{0.0, u_mid}, std::pair{u_mid, u_end}}) {
        if (hi <= lo) continue;
        const int np = static_cast<int>(std::ceil((hi - lo) / 0.25));
        const double w = (hi - lo) / np;
        for (int i = 0; i < np; ++i) total += gl.integrate(f, lo + i * w, lo + (i + 1) * w);
    }
    return total;
}

}  // namespace detail

/// Tail contributions for one column: ½∫_{Y}^∞ e^{−a(z−Y)} w and
/// ∫_Y^{z_c} χ e^{a(z−1)} w (without the ½), under the fitted power law.
struct TailValues {
    cplx decay = 0.0;
    cplx growth = 0.0;
};

inline TailValues tail_values(const TailFit& t, double a, double tail_tol, const char* what) {
    TailValues out;
    if (t.negligible) return out;
    const bool needs_growth = a == 0.0 || 1.0 + 2.0 / a > t.y_end;
    const double d1 = detail::power_tail_decay(a, t.p_decade, t.y_end);
    const double d2 = detail::power_tail_decay(a, t.p_half, t.y_end);
    const double g1 = needs_growth ? detail::power_tail_growth(a, t.p_decade, t.y_end) : 0.0;
    const double g2 = needs_growth ? detail::power_tail_growth(a, t.p_half, t.y_end) : 0.0;
    if (!std::isfinite(d1) || !std::isfinite(g1))
        throw TailError(std::string(what) + ": integrand decays too slowly (fitted exponent " +
                        std::to_string(t.p_decade) + " <= 1)");
    const double mag = std::abs(t.w_end);
    const double unc = mag * (std::abs(d1 - d2) * 0.5 + std::abs(g1 - g2));
    if (!(unc <= tail_tol * std::max(1.0, t.scale)))
    {
        std::ostringstream msg;
        msg << what << ": tail beyond y_max is not resolved (uncertainty " << unc << ", a = " << a
            << ", fitted exponents " << t.p_decade << " / " << t.p_half << ")";
        throw TailError(msg.str());
    }
    out.decay = 0.5 * t.w_end * d1;
    out.growth = t.w_end * g1;
    if (a == 0.0) out.decay = 0.5 * t.w_end * d1;
    return out;
}

/// ∫_1^∞ w dy on the grid plus the power-law tail.
inline cplx integrate_to_infinity(const YGrid& yg, std::span<const cplx> w, const TailOptions& opt, const char* what) {
    const CumulativeQuadrature q(yg.nodes(), 6);
    const auto fit = fit_tail(yg.nodes(), w, opt.tail_tol);
    const auto tv = tail_values(fit, 0.0, opt.tail_tol, what);
    return q.total<cplx>(w) + 2.0 * tv.decay;
}

/// Tails of every column of a field under the self-similar continuation
///
///   w(k, z) ≈ (Y/z)^m w(kz/Y, Y),   z > Y = y_max,
///
/// with m from the decay of ∫|ŵ(k,y)|dk ~ y^{−m−1} over the last decade.
/// Unlike a per-column power law this stays valid where |k|Y = O(1). The
/// uncertainty is the change when m is refitted over the last half-decade.
inline std::vector<TailValues> self_similar_tails(const KGrid& kg, const YGrid& yg, const SpectralField& w,
                                                  const TailOptions& opt, const char* what, bool zero_mode = true) {
    const std::size_t nk = kg.size(), ny = yg.size();
    std::vector<TailValues> out(nk);
    const double Y = yg.y_max();
    const auto kw = CumulativeQuadrature(kg.modes(), 6).total_weights();
    const double scale = std::max(1.0, w.max_abs());
    std::vector<double> ys, mass;
    double win = 0.0;
    for (std::size_t j = 0; j < ny; ++j) {
        if (yg[j] < 0.1 * Y * (1 - 1e-12)) continue;
        double m = 0.0;
        for (std::size_t i = 0; i < nk; ++i) m += kw[i] * std::abs(w(i, j));
        ys.push_back(yg[j]);
        mass.push_back(m);
        for (std::size_t i = 0; i < nk; ++i) win = std::max(win, std::abs(w(i, j)));
    }
    if (win * Y <= 1e-3 * opt.tail_tol * scale) return out;
    if (ys.size() < 3) throw TailError(std::string(what) + ": need at least three y-nodes in the last decade");
    auto exponent = [&](double y_lo) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int n = 0;
        for (std::size_t j = 0; j < ys.size(); ++j) {
            if (ys[j] < y_lo * (1 - 1e-12)) continue;
            if (!(mass[j] > 0.0)) return double(INFINITY);
            const double lx = std::log(ys[j]), ly = std::log(mass[j]);
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
            ++n;
        }
        if (n < 2) return double(NAN);
        return -(n * sxy - sx * sy) / (n * sxx - sx * sx) - 1.0;
    };
    // The k = 0 column fixes m when it carries mass; otherwise use ∫|ŵ|dk.
    const std::size_t z = *kg.zero_index();
    double m1 = exponent(0.1 * Y);
    double m2 = exponent(Y / std::sqrt(10.0));
    const auto col0 = w.column(z);
    double win0 = 0.0;
    for (std::size_t j = 0; j < ny; ++j)
        if (yg[j] >= 0.1 * Y * (1 - 1e-12)) win0 = std::max(win0, std::abs(col0[j]));
    if (win0 * Y > 1e-3 * opt.tail_tol * scale) {
        m1 = fit_exponent(yg.nodes(), col0, 0.1 * Y);
        m2 = fit_exponent(yg.nodes(), col0, Y / std::sqrt(10.0));
    }
    if (std::isnan(m2)) m2 = m1;

    // Last row, interpolated on the half-line of each sign.
    std::vector<double> half(nk - z);
    for (std::size_t i = 0; i < half.size(); ++i) half[i] = kg[z + i];
    std::vector<cplx> row_pos(half.size()), row_neg(half.size());
    for (std::size_t i = 0; i < half.size(); ++i) {
        row_pos[i] = w(z + i, ny - 1);
        row_neg[i] = w(z - i, ny - 1);
    }
    const double kmax = kg.k_max();
    const auto& gl = detail::gl10();

    auto tails_for = [&](double k, double m) {
        TailValues tv;
        if (std::isinf(m)) return tv;
        const double a = std::abs(k);
        if (a == 0.0) {
            if (!zero_mode) return tv;
            const cplx w0 = w(z, ny - 1);
            if (std::abs(w0) * Y <= 1e-3 * opt.tail_tol * scale) return tv;
            if (!(m > 1.0))
                throw TailError(std::string(what) + ": k = 0 integrand decays too slowly (fitted exponent " +
                                std::to_string(m) + " <= 1)");
            tv.decay = 0.5 * w0 * Y / (m - 1.0);
            tv.growth = w0 * Y / (m - 1.0);
            return tv;
        }
        const auto& row = k > 0 ? row_pos : row_neg;
        const double zc = 1.0 + 2.0 / a;
        double u_max = std::log(kmax / a);
        if (m > 1.0) u_max = std::min(u_max, 45.0 / (m - 1.0));
        const double u_decay = std::log1p(45.0 / (a * Y));
        const double u_grow = zc > Y ? std::log(zc / Y) : 0.0;
        u_max = std::min(u_max, std::max(u_decay, u_grow));
        double u = 0.0;
        while (u < u_max) {
            const double kap = a * std::exp(u);
            const std::size_t iv = std::min(locate_interval(half, kap), half.size() - 2);
            const double dk = half[iv + 1] - half[iv];
            double width = std::min({0.1, dk / kap, 0.5 / (a * Y * std::exp(u)), u_max - u});
            // Break at the χ transition points.
            for (double zb : {1.0 + 1.0 / a, zc}) {
                const double ub = std::log(zb / Y);
                if (ub > u + 1e-14 && ub < u + width) width = ub - u;
            }
            const double hw = 0.5 * width, mid = u + hw;
            for (std::size_t g = 0; g < gl.x.size(); ++g) {
                const double uu = mid + hw * gl.x[g];
                const double zz = Y * std::exp(uu);
                const double kk = a * std::exp(uu);
                if (kk > kmax) continue;
                const cplx wz = std::exp(-m * uu) * interpolate<cplx>(half, row, kk, 6) * (hw * gl.w[g] * zz);
                tv.decay += 0.5 * std::exp(-a * (zz - Y)) * wz;
                if (zz < zc) tv.growth += cutoff_chi(a * (zz - 1.0)) * std::exp(a * (zz - 1.0)) * wz;
            }
            u += width;
        }
        return tv;
    };

    double worst = 0.0;
    for (std::size_t i = 0; i < nk; ++i) {
        out[i] = tails_for(kg[i], m1);
        if (m2 != m1) {
            const auto alt = tails_for(kg[i], m2);
            worst = std::max(worst, std::abs(alt.decay - out[i].decay) + 0.5 * std::abs(alt.growth - out[i].growth));
        }
    }
    if (!(worst <= opt.tail_tol * scale)) {
        std::ostringstream msg;
        msg << what << ": tail beyond y_max is not resolved (uncertainty " << worst << ", exponents " << m1 << " / "
            << m2 << ")";
        throw TailError(msg.str());
    }
    return out;
}

/// Per-grid data for the interval rules.
class GreenQuadrature {
public:
    static constexpr int NP = 6;

    explicit GreenQuadrature(const YGrid& yg) : yg_(yg) {
        const std::size_t n = yg.size();
        if (n < static_cast<std::size_t>(NP)) throw MeshError("GreenQuadrature: need at least 6 y-nodes");
        if (yg.y_max() < 50.0) throw MeshError("GreenQuadrature: y_max must be at least 50");
        h_.resize(n - 1);
        start_.resize(n - 1);
        vinv_.resize(n - 1);
        for (std::size_t m = 0; m + 1 < n; ++m) {
            h_[m] = yg[m + 1] - yg[m];
            start_[m] = stencil_start(m, n, NP);
            Eigen::Matrix<double, NP, NP> V;
            for (int r = 0; r < NP; ++r) {
                const double s = (yg[start_[m] + r] - yg[m]) / h_[m];
                double p = 1.0;
                for (int j = 0; j < NP; ++j) {
                    V(r, j) = p;
                    p *= s;
                }
            }
            vinv_[m] = V.inverse();
        }
    }

    const YGrid& grid() const { return yg_; }

    /// Monomial coefficients (in s = (z − y_m)/h_m) of the interpolant of w on interval m.
    std::array<cplx, NP> coefficients(std::size_t m, std::span<const cplx> w) const {
        std::array<cplx, NP> c{};
        for (int j = 0; j < NP; ++j)
            for (int r = 0; r < NP; ++r) c[j] += vinv_[m](j, r) * w[start_[m] + r];
        return c;
    }

    struct Result {
        std::vector<cplx> less;      // T_< w
        std::vector<cplx> greater_p;  // T_>^+ w
        std::vector<cplx> greater_m;  // T_>^- w
    };

    /// T_<, T_>^+ and T_>^- of several columns w at every node for mode a.
    /// Tails are fitted per column unless supplied (one per column of ws).
    std::vector<Result> apply(double a, std::span<const std::span<const cplx>> ws, const TailOptions& opt,
                              std::span<const TailValues> given = {}) const {
        const std::size_t n = yg_.size();
        const std::size_t nw = ws.size();
        std::vector<Result> out(nw);
        for (auto& r : out) {
            r.less.assign(n, 0.0);
            r.greater_p.assign(n, 0.0);
            r.greater_m.assign(n, 0.0);
        }
        const auto& gl = detail::gl10();
        const double z1 = a > 0.0 ? 1.0 + 1.0 / a : INFINITY;  // χ starts to drop
        const double zc = a > 0.0 ? 1.0 + 2.0 / a : INFINITY;  // χ vanishes

        std::vector<TailValues> tails(nw);
        for (std::size_t w = 0; w < nw; ++w)
            tails[w] = given.empty() ? tail_values(fit_tail(yg_.nodes(), ws[w], opt.tail_tol), a, opt.tail_tol, "green operator")
                                     : given[w];

        std::vector<cplx> D(nw);
        std::vector<cplx> K(nw);
        for (std::size_t w = 0; w < nw; ++w) {
            D[w] = tails[w].decay;
            K[w] = tails[w].growth;
        }
        auto emit_greater = [&](std::size_t i) {
            const double g = a > 0.0 ? 0.5 * std::exp(-a * (yg_[i] - 1.0)) : 0.5;
            for (std::size_t w = 0; w < nw; ++w) {
                const cplx G = yg_[i] < zc ? g * K[w] : cplx(0.0);
                out[w].greater_p[i] = D[w] + G;
                out[w].greater_m[i] = D[w] - G;
            }
        };
        emit_greater(n - 1);

        // Backward sweep: decaying part D and bounded growth integral K.
        std::vector<std::array<cplx, NP>> coef(nw);
        for (std::size_t mm = n - 1; mm-- > 0;) {
            const double y0 = yg_[mm];
            const double y1 = yg_[mm + 1];
            const double h = h_[mm];
            const double b = a * h;
            const ExpMoments<NP> mom(b);
            const double eb = std::exp(-b);
            for (std::size_t w = 0; w < nw; ++w) {
                coef[w] = coefficients(mm, ws[w]);
                cplx I = 0.0;
                for (int j = 0; j < NP; ++j) I += coef[w][j] * mom.right[j];
                D[w] = eb * D[w] + 0.5 * h * I;
            }
            if (y0 < zc) {
                const double hi = std::min(y1, zc);
                auto piece = [&](double lo, double up) {
                    if (up <= lo) return;
                    for (std::size_t w = 0; w < nw; ++w) {
                        const auto& c = coef[w];
                        K[w] += gl.integrate([&](double z) {
                            const double s = (z - y0) / h;
                            cplx p = c[NP - 1];
                            for (int j = NP - 2; j >= 0; --j) p = p * s + c[j];
                            const double t = a * (z - 1.0);
                            return cutoff_chi(std::max(0.0, t)) * std::exp(t) * p;
                        }, lo, up);
                    }
                };
                if (z1 > y0 && z1 < hi) {
                    piece(y0, z1);
                    piece(z1, hi);
                } else {
                    piece(y0, hi);
                }
            }
            emit_greater(mm);
        }

        // Forward sweep for T_<.
        if (a > 0.0) {
            std::vector<cplx> L(nw, 0.0);
            for (std::size_t mm = 0; mm + 1 < n; ++mm) {
                const double y0 = yg_[mm];
                const double y1 = yg_[mm + 1];
                const double h = h_[mm];
                const double b = a * h;
                const double eb = std::exp(-b);
                for (std::size_t w = 0; w < nw; ++w) L[w] *= eb;
                if (y1 > z1) {
                    if (y0 >= zc) {
                        const ExpMoments<NP> mom(b);
                        for (std::size_t w = 0; w < nw; ++w) {
                            const auto c = coefficients(mm, ws[w]);
                            cplx I = 0.0;
                            for (int j = 0; j < NP; ++j) I += c[j] * mom.left[j];
                            L[w] += 0.5 * h * I;
                        }
                    } else {
                        // Transition: split at z1 and zc; exact moments past zc.
                        const double lo = std::max(y0, z1);
                        const double mid = std::min(y1, zc);
                        for (std::size_t w = 0; w < nw; ++w) {
                            const auto c = coefficients(mm, ws[w]);
                            auto poly = [&](double z) {
                                const double s = (z - y0) / h;
                                cplx p = c[NP - 1];
                                for (int j = NP - 2; j >= 0; --j) p = p * s + c[j];
                                return p;
                            };
                            cplx I = gl.integrate([&](double z) {
                                return std::exp(-a * (y1 - z)) * (1.0 - cutoff_chi(a * (z - 1.0))) * poly(z);
                            }, lo, mid);
                            if (mid < y1) {
                                I += gl.integrate([&](double z) { return std::exp(-a * (y1 - z)) * poly(z); }, mid, y1);
                            }
                            L[w] += 0.5 * I;
                        }
                    }
                }
                for (std::size_t w = 0; w < nw; ++w) out[w].less[mm + 1] = L[w];
            }
        }
        return out;
    }

private:
    YGrid yg_;
    std::vector<double> h_;
    std::vector<std::size_t> start_;
    std::vector<Eigen::Matrix<double, NP, NP>> vinv_;
};

}  // namespace hpns

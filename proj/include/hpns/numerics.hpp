#pragma once

// Small numerical kernels shared by every module: finite-difference weights
// on arbitrary nodes, local Lagrange interpolation, high-order cumulative
// quadrature, Gauss-Legendre rules, the generalized exponential integral and
// a deterministic parallel loop.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <numbers>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

namespace hpns {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Fornberg's algorithm. Returns weights c[m][j] such that
/// f^{(m)}(x0) ≈ Σ_j c[m][j] f(nodes[j]) for m = 0..max_order.
inline std::vector<std::vector<double>> fornberg_weights(double x0, std::span<const double> nodes,
                                                         int max_order) {
    const int n = static_cast<int>(nodes.size());
    std::vector<std::vector<double>> c(max_order + 1, std::vector<double>(n, 0.0));
    double c1 = 1.0;
    double c4 = nodes[0] - x0;
    c[0][0] = 1.0;
    for (int i = 1; i < n; ++i) {
        const int mn = std::min(i, max_order);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = nodes[i] - x0;
        for (int j = 0; j < i; ++j) {
            const double c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k) {
                    c[k][i] = c1 * (k * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for (int k = mn; k >= 1; --k) {
                c[k][j] = (c4 * c[k][j] - k * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    return c;
}

/// Index of the interval [nodes[i], nodes[i+1]] containing x (clamped).
inline std::size_t locate_interval(std::span<const double> nodes, double x) {
    if (x <= nodes.front()) return 0;
    if (x >= nodes.back()) return nodes.size() - 2;
    auto it = std::upper_bound(nodes.begin(), nodes.end(), x);
    return static_cast<std::size_t>(it - nodes.begin()) - 1;
}

/// First index of an `npts`-point stencil centred on interval i.
inline std::size_t stencil_start(std::size_t i, std::size_t n, std::size_t npts) {
    const std::ptrdiff_t half = static_cast<std::ptrdiff_t>(npts / 2) - 1;
    std::ptrdiff_t s = static_cast<std::ptrdiff_t>(i) - half;
    s = std::clamp<std::ptrdiff_t>(s, 0, static_cast<std::ptrdiff_t>(n - npts));
    return static_cast<std::size_t>(s);
}

struct StencilWeights {
    std::size_t start = 0;
    std::vector<double> w;
};

/// Lagrange interpolation weights for x on an `npts`-point local stencil.
inline StencilWeights interpolation_weights(std::span<const double> nodes, double x,
                                            std::size_t npts) {
    npts = std::min(npts, nodes.size());
    StencilWeights sw;
    sw.start = stencil_start(locate_interval(nodes, x), nodes.size(), npts);
    sw.w.assign(npts, 1.0);
    for (std::size_t j = 0; j < npts; ++j) {
        const double xj = nodes[sw.start + j];
        for (std::size_t m = 0; m < npts; ++m) {
            if (m == j) continue;
            const double xm = nodes[sw.start + m];
            sw.w[j] *= (x - xm) / (xj - xm);
        }
    }
    return sw;
}

template <typename T>
T interpolate(std::span<const double> nodes, std::span<const T> values, double x,
              std::size_t npts = 6) {
    const auto sw = interpolation_weights(nodes, x, npts);
    T acc{};
    for (std::size_t j = 0; j < sw.w.size(); ++j) acc += sw.w[j] * values[sw.start + j];
    return acc;
}

/// n-point Gauss-Legendre rule on [-1, 1].
struct GaussLegendre {
    std::vector<double> x;
    std::vector<double> w;

    explicit GaussLegendre(int n) : x(n), w(n) {
        for (int i = 0; i < (n + 1) / 2; ++i) {
            double z = std::cos(pi * (i + 0.75) / (n + 0.5));
            double pp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p1 = 1.0;
                double p2 = 0.0;
                for (int j = 1; j <= n; ++j) {
                    const double p3 = p2;
                    p2 = p1;
                    p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
                }
                pp = n * (z * p1 - p2) / (z * z - 1.0);
                const double z1 = z;
                z = z1 - p1 / pp;
                if (std::abs(z - z1) < 1e-16) break;
            }
            x[i] = -z;
            x[n - 1 - i] = z;
            w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
        }
    }

    template <typename F>
    auto integrate(F&& f, double a, double b) const {
        const double half = 0.5 * (b - a);
        const double mid = 0.5 * (b + a);
        decltype(f(a)) acc{};
        for (std::size_t i = 0; i < x.size(); ++i) acc += w[i] * f(mid + half * x[i]);
        return acc * half;
    }
};

/// High-order cumulative quadrature on arbitrary increasing nodes: the
/// integral over each interval uses the local interpolating polynomial
/// through `npts` neighbouring nodes (order npts for smooth integrands).
class CumulativeQuadrature {
public:
    explicit CumulativeQuadrature(std::span<const double> nodes, std::size_t npts = 6)
        : n_(nodes.size()) {
        if (n_ < 2) throw std::invalid_argument("CumulativeQuadrature: need at least two nodes");
        npts = std::min(npts, n_);
        const GaussLegendre gl(static_cast<int>((npts + 1) / 2 + 1));
        start_.resize(n_ - 1);
        weights_.assign((n_ - 1) * npts, 0.0);
        npts_ = npts;
        for (std::size_t i = 0; i + 1 < n_; ++i) {
            const std::size_t s = stencil_start(i, n_, npts);
            start_[i] = s;
            const double a = nodes[i];
            const double b = nodes[i + 1];
            for (std::size_t q = 0; q < gl.x.size(); ++q) {
                const double xq = 0.5 * (a + b) + 0.5 * (b - a) * gl.x[q];
                const double wq = 0.5 * (b - a) * gl.w[q];
                for (std::size_t j = 0; j < npts; ++j) {
                    double l = 1.0;
                    for (std::size_t m = 0; m < npts; ++m) {
                        if (m == j) continue;
                        l *= (xq - nodes[s + m]) / (nodes[s + j] - nodes[s + m]);
                    }
                    weights_[i * npts + j] += wq * l;
                }
            }
        }
    }

    std::size_t size() const { return n_; }

    /// Integral of f over the interval [nodes[i], nodes[i+1]].
    template <typename T>
    T interval(std::span<const T> f, std::size_t i) const {
        T acc{};
        const double* w = &weights_[i * npts_];
        for (std::size_t j = 0; j < npts_; ++j) acc += w[j] * f[start_[i] + j];
        return acc;
    }

    /// F[i] = ∫_{nodes[0]}^{nodes[i]} f.
    template <typename T>
    std::vector<T> cumulative(std::span<const T> f) const {
        std::vector<T> out(n_, T{});
        for (std::size_t i = 0; i + 1 < n_; ++i) out[i + 1] = out[i] + interval(f, i);
        return out;
    }

    template <typename T>
    T total(std::span<const T> f) const {
        T acc{};
        for (std::size_t i = 0; i + 1 < n_; ++i) acc += interval(f, i);
        return acc;
    }

    /// Per-node weights for the full integral.
    std::vector<double> total_weights() const {
        std::vector<double> w(n_, 0.0);
        for (std::size_t i = 0; i + 1 < n_; ++i)
            for (std::size_t j = 0; j < npts_; ++j) w[start_[i] + j] += weights_[i * npts_ + j];
        return w;
    }

private:
    std::size_t n_;
    std::size_t npts_ = 6;
    std::vector<std::size_t> start_;
    std::vector<double> weights_;
};

/// Derivative of order m of samples f on nodes x using `npts`-point local
/// stencils (centred in the interior, one-sided at the ends).
template <typename T>
std::vector<T> differentiate(std::span<const double> x, std::span<const T> f, int m,
                             std::size_t npts = 5) {
    const std::size_t n = x.size();
    npts = std::min(npts, n);
    std::vector<T> out(n, T{});
    for (std::size_t i = 0; i < n; ++i) {
        std::ptrdiff_t s = static_cast<std::ptrdiff_t>(i) - static_cast<std::ptrdiff_t>(npts / 2);
        s = std::clamp<std::ptrdiff_t>(s, 0, static_cast<std::ptrdiff_t>(n - npts));
        const auto c = fornberg_weights(x[i], x.subspan(static_cast<std::size_t>(s), npts), m);
        T acc{};
        for (std::size_t j = 0; j < npts; ++j) acc += c[m][j] * f[static_cast<std::size_t>(s) + j];
        out[i] = acc;
    }
    return out;
}

/// Generalized exponential integral E_n(z) = ∫_1^∞ e^{-zt} t^{-n} dt for
/// n ≥ 1 and Re z ≥ 0, z ≠ 0 (continued fraction for |z| > 1, series below).
inline cplx expint_n(int n, cplx z) {
    constexpr double euler = 0.57721566490153286061;
    constexpr double eps = 1e-16;
    if (z == cplx(0.0)) {
        if (n <= 1) throw std::domain_error("expint_n: E_1(0) diverges");
        return cplx(1.0 / (n - 1));
    }
    if (std::abs(z) > 1.0) {
        cplx b = z + double(n);
        cplx c = 1.0 / 1e-300;
        cplx d = 1.0 / b;
        cplx h = d;
        for (int i = 1; i < 100000; ++i) {
            const double an = -double(i) * (n - 1 + i);
            b += 2.0;
            d = 1.0 / (an * d + b);
            c = b + an / c;
            const cplx del = c * d;
            h *= del;
            if (std::abs(del - 1.0) < eps) break;
        }
        return h * std::exp(-z);
    }
    cplx ans = (n - 1 != 0) ? cplx(1.0 / (n - 1)) : -std::log(z) - euler;
    cplx fact = 1.0;
    for (int i = 1; i < 1000; ++i) {
        fact *= -z / double(i);
        cplx del;
        if (i != n - 1) {
            del = -fact / double(i - n + 1);
        } else {
            double psi = -euler;
            for (int m = 1; m <= n - 1; ++m) psi += 1.0 / m;
            del = fact * (-std::log(z) + psi);
        }
        ans += del;
        if (std::abs(del) < std::abs(ans) * eps) break;
    }
    return ans;
}

/// Thread count from HPNS_THREADS, defaulting to the hardware concurrency.
inline unsigned thread_count() {
    if (const char* env = std::getenv("HPNS_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Static-partition parallel loop over [0, n). Each index is processed by
/// exactly one thread, so results do not depend on scheduling.
template <typename F>
void parallel_for(std::size_t n, F&& body) {
    const unsigned nt = std::min<std::size_t>(thread_count(), std::max<std::size_t>(n, 1));
    if (nt <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(nt);
    pool.reserve(nt);
    for (unsigned t = 0; t < nt; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (std::size_t i = t; i < n; i += nt) body(i);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace hpns

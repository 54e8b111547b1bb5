#pragma once

// Inverse Fourier transform f(x) = ∫ e^{ikx} f̂(k) dk for samples on a
// nonuniform, symmetric KGrid. Each half-line is treated separately (f̂ may
// have a kink at k = 0); on every interval f̂ is replaced by its local
// 6-point interpolant and the product with e^{ikx} is integrated by
// Gauss-Legendre on enough subintervals to resolve the oscillation.

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "hpns/errors.hpp"
#include "hpns/field.hpp"
#include "hpns/grid.hpp"
#include "hpns/numerics.hpp"

namespace hpns {

class InverseTransform {
public:
    InverseTransform(const KGrid& kg, std::span<const double> xs, std::size_t npts = 6)
        : nk_(kg.size()), xs_(xs.begin(), xs.end()), w_(xs.size() * kg.size(), cplx(0.0)) {
        if (!kg.include_zero()) throw MeshError("InverseTransform: k-grid must contain k = 0");
        const std::size_t z = *kg.zero_index();
        const GaussLegendre gl(8);
        // Positive half-line nodes z..n-1, negative half-line nodes z..0.
        for (int side = 0; side < 2; ++side) {
            const std::size_t m = side == 0 ? nk_ - z : z + 1;
            std::vector<double> nodes(m);
            std::vector<std::size_t> index(m);
            for (std::size_t i = 0; i < m; ++i) {
                index[i] = side == 0 ? z + i : z - i;
                nodes[i] = std::abs(kg[index[i]]);
            }
            const std::size_t np = std::min(npts, m);
            for (std::size_t xi = 0; xi < xs_.size(); ++xi) {
                const double x = (side == 0 ? 1.0 : -1.0) * xs_[xi];
                cplx* row = &w_[xi * nk_];
                for (std::size_t iv = 0; iv + 1 < m; ++iv) {
                    const std::size_t s = stencil_start(iv, m, np);
                    const double a = nodes[iv];
                    const double b = nodes[iv + 1];
                    const auto sub = static_cast<std::size_t>(std::ceil(std::abs(x) * (b - a) / 1.5)) + 1;
                    const double h = (b - a) / static_cast<double>(sub);
                    for (std::size_t p = 0; p < sub; ++p) {
                        for (std::size_t q = 0; q < gl.x.size(); ++q) {
                            const double kq = a + h * (static_cast<double>(p) + 0.5 * (1.0 + gl.x[q]));
                            const cplx e = std::polar(0.5 * h * gl.w[q], kq * x);
                            for (std::size_t j = 0; j < np; ++j) {
                                double l = 1.0;
                                for (std::size_t r = 0; r < np; ++r)
                                    if (r != j) l *= (kq - nodes[s + r]) / (nodes[s + j] - nodes[s + r]);
                                row[index[s + j]] += e * l;
                            }
                        }
                    }
                }
            }
        }
    }

    std::size_t size() const { return xs_.size(); }
    std::span<const double> points() const { return xs_; }

    /// f(x_i) for one set of spectral samples (one value per k).
    cplx apply(std::size_t xi, std::span<const cplx> fk) const {
        cplx acc = 0.0;
        const cplx* row = &w_[xi * nk_];
        for (std::size_t i = 0; i < nk_; ++i) acc += row[i] * fk[i];
        return acc;
    }

    /// Real part of f(x_i, y_j) for every x-point and y-node.
    std::vector<double> apply(const SpectralField& f, std::size_t iy) const {
        std::vector<double> out(xs_.size(), 0.0);
        for (std::size_t xi = 0; xi < xs_.size(); ++xi) {
            cplx acc = 0.0;
            const cplx* row = &w_[xi * nk_];
            for (std::size_t i = 0; i < nk_; ++i) acc += row[i] * f(i, iy);
            out[xi] = acc.real();
        }
        return out;
    }

private:
    std::size_t nk_;
    std::vector<double> xs_;
    std::vector<cplx> w_;
};

}  // namespace hpns

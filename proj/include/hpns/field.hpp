#pragma once

// Complex samples on the Fourier grids. A SpectralField stores one column
// per k (contiguous in y); a BoundaryTrace is a function of k alone.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "hpns/errors.hpp"
#include "hpns/grid.hpp"
#include "hpns/numerics.hpp"

namespace hpns {

class BoundaryTrace {
public:
    BoundaryTrace() = default;
    explicit BoundaryTrace(std::size_t nk) : values_(nk, cplx(0.0)) {}
    explicit BoundaryTrace(std::vector<cplx> v) : values_(std::move(v)) {}

    template <typename F>
    static BoundaryTrace sample(const KGrid& kg, F&& f) {
        BoundaryTrace t(kg.size());
        for (std::size_t i = 0; i < kg.size(); ++i) t[i] = f(kg[i]);
        return t;
    }

    std::size_t size() const { return values_.size(); }
    cplx& operator[](std::size_t i) { return values_[i]; }
    const cplx& operator[](std::size_t i) const { return values_[i]; }
    std::span<const cplx> values() const { return values_; }
    std::span<cplx> values() { return values_; }

    BoundaryTrace& operator+=(const BoundaryTrace& o) {
        for (std::size_t i = 0; i < size(); ++i) values_[i] += o[i];
        return *this;
    }
    BoundaryTrace& operator*=(cplx s) {
        for (auto& v : values_) v *= s;
        return *this;
    }

    double max_abs() const {
        double m = 0.0;
        for (const auto& v : values_) m = std::max(m, std::abs(v));
        return m;
    }

private:
    std::vector<cplx> values_;
};

class SpectralField {
public:
    SpectralField() = default;
    SpectralField(std::size_t nk, std::size_t ny) : nk_(nk), ny_(ny), values_(nk * ny, cplx(0.0)) {}

    template <typename F>
    static SpectralField sample(const KGrid& kg, const YGrid& yg, F&& f) {
        SpectralField s(kg.size(), yg.size());
        for (std::size_t i = 0; i < kg.size(); ++i)
            for (std::size_t j = 0; j < yg.size(); ++j) s(i, j) = f(kg[i], yg[j]);
        return s;
    }

    std::size_t nk() const { return nk_; }
    std::size_t ny() const { return ny_; }

    cplx& operator()(std::size_t ik, std::size_t iy) { return values_[ik * ny_ + iy]; }
    const cplx& operator()(std::size_t ik, std::size_t iy) const { return values_[ik * ny_ + iy]; }

    std::span<cplx> column(std::size_t ik) { return {values_.data() + ik * ny_, ny_}; }
    std::span<const cplx> column(std::size_t ik) const { return {values_.data() + ik * ny_, ny_}; }

    std::span<const cplx> values() const { return values_; }
    std::span<cplx> values() { return values_; }

    /// Samples at y = nodes[iy] for every k.
    BoundaryTrace slice(std::size_t iy) const {
        BoundaryTrace t(nk_);
        for (std::size_t i = 0; i < nk_; ++i) t[i] = (*this)(i, iy);
        return t;
    }

    SpectralField& operator+=(const SpectralField& o) {
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
        return *this;
    }
    SpectralField& operator-=(const SpectralField& o) {
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
        return *this;
    }
    SpectralField& operator*=(cplx s) {
        for (auto& v : values_) v *= s;
        return *this;
    }
    friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
    friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
    friend SpectralField operator*(cplx s, SpectralField a) { return a *= s; }

    double max_abs() const {
        double m = 0.0;
        for (const auto& v : values_) m = std::max(m, std::abs(v));
        return m;
    }

private:
    std::size_t nk_ = 0;
    std::size_t ny_ = 0;
    std::vector<cplx> values_;
};

/// max |f(-k) - conj f(k)| over the grid.
inline double hermitian_defect(const KGrid& kg, const BoundaryTrace& t) {
    double d = 0.0;
    for (std::size_t i = 0; i < kg.size(); ++i) d = std::max(d, std::abs(t[kg.mirror(i)] - std::conj(t[i])));
    return d;
}

inline double hermitian_defect(const KGrid& kg, const SpectralField& f) {
    double d = 0.0;
    for (std::size_t i = 0; i < kg.size(); ++i)
        for (std::size_t j = 0; j < f.ny(); ++j)
            d = std::max(d, std::abs(f(kg.mirror(i), j) - std::conj(f(i, j))));
    return d;
}

/// Replaces f by the Hermitian part ½(f(k) + conj f(-k)).
inline void symmetrize(const KGrid& kg, SpectralField& f) {
    for (std::size_t i = 0; i < kg.size() / 2 + 1; ++i) {
        const std::size_t m = kg.mirror(i);
        for (std::size_t j = 0; j < f.ny(); ++j) {
            const cplx a = 0.5 * (f(i, j) + std::conj(f(m, j)));
            f(i, j) = a;
            f(m, j) = std::conj(a);
        }
    }
}

/// Traceless part of the symmetric forcing tensor: R = Q12, S = (Q11 - Q22)/2.
struct ForcingTensor {
    SpectralField R;
    SpectralField S;
};

inline void require_hermitian(const KGrid& kg, const BoundaryTrace& t, const char* what, double tol = 1e-12) {
    const double scale = std::max(1.0, t.max_abs());
    if (hermitian_defect(kg, t) > tol * scale)
        throw SymmetryError(std::string(what) + ": input is not Hermitian-symmetric");
}

inline void require_hermitian(const KGrid& kg, const SpectralField& f, const char* what, double tol = 1e-12) {
    const double scale = std::max(1.0, f.max_abs());
    if (hermitian_defect(kg, f) > tol * scale)
        throw SymmetryError(std::string(what) + ": input is not Hermitian-symmetric");
}

}  // namespace hpns

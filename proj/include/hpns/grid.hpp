#pragma once

// Discretisation grids: the angular grid of the Jeffery-Hamel profile, the
// Fourier grid in k (symmetric about zero) and the stretched grid in y ≥ 1.

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hpns/errors.hpp"
#include "hpns/numerics.hpp"

namespace hpns {

/// Uniform grid on [-π/2, π/2] including both endpoints.
class ThetaGrid {
public:
    explicit ThetaGrid(std::size_t n_points = 1025) : nodes_(n_points) {
        if (n_points < 65) throw DomainError("ThetaGrid: n_points must be at least 65");
        h_ = pi / static_cast<double>(n_points - 1);
        for (std::size_t i = 0; i < n_points; ++i) nodes_[i] = -0.5 * pi + h_ * static_cast<double>(i);
        nodes_.back() = 0.5 * pi;
    }

    std::size_t size() const { return nodes_.size(); }
    double spacing() const { return h_; }
    double operator[](std::size_t i) const { return nodes_[i]; }
    std::span<const double> nodes() const { return nodes_; }

private:
    std::vector<double> nodes_;
    double h_ = 0.0;
};

/// Fourier modes, strictly increasing and symmetric: modes[n-1-i] = -modes[i].
class KGrid {
public:
    KGrid() = default;

    /// Builds a grid from the positive magnitudes; mirrors them and
    /// optionally inserts k = 0.
    static KGrid from_positive(std::vector<double> positive, bool include_zero) {
        for (std::size_t i = 0; i < positive.size(); ++i) {
            if (positive[i] <= 0.0 || (i > 0 && positive[i] <= positive[i - 1]))
                throw DomainError("KGrid: positive magnitudes must be strictly increasing and > 0");
        }
        KGrid g;
        g.include_zero_ = include_zero;
        g.modes_.reserve(2 * positive.size() + 1);
        for (auto it = positive.rbegin(); it != positive.rend(); ++it) g.modes_.push_back(-*it);
        if (include_zero) g.modes_.push_back(0.0);
        for (double k : positive) g.modes_.push_back(k);
        g.k_max_ = positive.empty() ? 0.0 : positive.back();
        return g;
    }

    /// `n_half` log-spaced magnitudes in [k_min, k_max] plus mirror (and zero).
    static KGrid log_spaced(double k_min, double k_max, std::size_t n_half, bool include_zero = true) {
        if (!(k_min > 0.0 && k_max > k_min) || n_half < 2)
            throw DomainError("KGrid::log_spaced: need 0 < k_min < k_max and n_half >= 2");
        std::vector<double> pos(n_half);
        const double r = std::log(k_max / k_min) / static_cast<double>(n_half - 1);
        for (std::size_t i = 0; i < n_half; ++i) pos[i] = k_min * std::exp(r * static_cast<double>(i));
        pos.back() = k_max;
        return from_positive(std::move(pos), include_zero);
    }

    /// Uniform spacing dk up to k_max, always including zero.
    static KGrid uniform(double dk, double k_max) {
        if (!(dk > 0.0 && k_max >= dk)) throw DomainError("KGrid::uniform: need 0 < dk <= k_max");
        const auto n = static_cast<std::size_t>(std::floor(k_max / dk + 1e-9));
        std::vector<double> pos(n);
        for (std::size_t i = 0; i < n; ++i) pos[i] = dk * static_cast<double>(i + 1);
        return from_positive(std::move(pos), true);
    }

    /// Geometric magnitudes k_{i+1} = k_i·ratio from k_min, with the spacing
    /// capped at dk_max; the last node is k_max. Zero included.
    static KGrid graded(double k_min, double k_max, double ratio, double dk_max) {
        if (!(k_min > 0.0 && k_max > k_min && ratio > 1.0 && dk_max > 0.0))
            throw DomainError("KGrid::graded: need 0 < k_min < k_max, ratio > 1, dk_max > 0");
        std::vector<double> pos{k_min};
        while (pos.back() < k_max) pos.push_back(pos.back() + std::min(pos.back() * (ratio - 1.0), dk_max));
        if (pos.size() > 2 && k_max - pos[pos.size() - 2] < 0.5 * (pos[pos.size() - 2] - pos[pos.size() - 3]))
            pos.pop_back();
        pos.back() = k_max;
        return from_positive(std::move(pos), true);
    }

    /// Default grid for the spectral solvers.
    static KGrid standard(double k_max = 40.0, double k_min = 1e-4) { return graded(k_min, k_max, 1.08, 0.25); }

    std::size_t size() const { return modes_.size(); }
    double operator[](std::size_t i) const { return modes_[i]; }
    std::span<const double> modes() const { return modes_; }
    bool include_zero() const { return include_zero_; }
    double k_max() const { return k_max_; }

    /// Index of -k for the mode at index i.
    std::size_t mirror(std::size_t i) const { return modes_.size() - 1 - i; }

    std::optional<std::size_t> zero_index() const {
        if (!include_zero_) return std::nullopt;
        return modes_.size() / 2;
    }

private:
    std::vector<double> modes_;
    bool include_zero_ = false;
    double k_max_ = 0.0;
};

/// Geometrically stretched nodes on [1, y_max] with first node 1.
class YGrid {
public:
    YGrid() = default;

    explicit YGrid(std::vector<double> nodes) : nodes_(std::move(nodes)) {
        if (nodes_.size() < 2 || nodes_.front() != 1.0)
            throw DomainError("YGrid: need at least two nodes starting at y = 1");
        for (std::size_t i = 1; i < nodes_.size(); ++i)
            if (nodes_[i] <= nodes_[i - 1]) throw DomainError("YGrid: nodes must be strictly increasing");
    }

    /// n nodes with first step h0 and a constant growth ratio reaching y_max.
    static YGrid stretched(double y_max, std::size_t n, double h0) {
        if (n < 3 || !(y_max > 1.0) || !(h0 > 0.0))
            throw DomainError("YGrid::stretched: need n >= 3, y_max > 1, h0 > 0");
        const double span = y_max - 1.0;
        const double m = static_cast<double>(n - 1);
        if (h0 * m > span) throw DomainError("YGrid::stretched: first step too large for a growing grid");
        auto length = [&](double r) {
            return std::abs(r - 1.0) < 1e-14 ? h0 * m : h0 * (std::pow(r, m) - 1.0) / (r - 1.0);
        };
        double lo = 1.0;
        double hi = 2.0;
        while (length(hi) < span) hi *= 2.0;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            (length(mid) < span ? lo : hi) = mid;
        }
        const double r = 0.5 * (lo + hi);
        std::vector<double> y(n);
        y[0] = 1.0;
        double h = h0;
        for (std::size_t i = 1; i < n; ++i) {
            y[i] = y[i - 1] + h;
            h *= r;
        }
        y.back() = y_max;
        return YGrid(std::move(y));
    }

    /// Default grid: n nodes up to y_max with first step 0.01.
    static YGrid standard(double y_max = 200.0, std::size_t n = 256) {
        return stretched(y_max, n, 0.01);
    }

    std::size_t size() const { return nodes_.size(); }
    double operator[](std::size_t i) const { return nodes_[i]; }
    std::span<const double> nodes() const { return nodes_; }
    double y_max() const { return nodes_.back(); }

private:
    std::vector<double> nodes_;
};

}  // namespace hpns

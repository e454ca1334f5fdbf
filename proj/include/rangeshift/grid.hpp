#ifndef RANGESHIFT_GRID_HPP
#define RANGESHIFT_GRID_HPP

#include <cmath>

#include "rangeshift/common.hpp"

namespace rangeshift {

/// Uniform grid over [-R, R] with n points, x_i = -R + i h, h = 2R/(n-1).
struct Grid {
    double R = 0.0;
    int n = 0;
    double h = 0.0;

    Grid() = default;
    Grid(double half_width, int points) : R(half_width), n(points) {
        if (!(R > 0.0)) throw Error("discrete_operator.grid: R must be positive");
        if (n < 16) throw Error("discrete_operator.grid: n must be >= 16");
        h = 2.0 * R / static_cast<double>(n - 1);
        if (std::fabs(static_cast<double>(n - 1) * h - 2.0 * R) > 1e-12 * std::max(1.0, R))
            throw Error("discrete_operator.grid: spacing inconsistent with R");
    }

    /// Grid with spacing as close to h_target as the endpoint constraint allows.
    static Grid with_spacing(double half_width, double h_target) {
        if (!(h_target > 0.0)) throw Error("discrete_operator.grid: h must be positive");
        const int n = std::max(16, static_cast<int>(std::lround(2.0 * half_width / h_target)) + 1);
        return Grid(half_width, n);
    }

    double x(int i) const { return -R + h * static_cast<double>(i); }

    Vec abscissae() const {
        Vec xs(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) xs[static_cast<std::size_t>(i)] = x(i);
        return xs;
    }
};

}  // namespace rangeshift

#endif

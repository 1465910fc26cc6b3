#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "degen.hpp"

namespace testing_support {

inline std::string config_path(const std::string& name) { return std::string(DEGEN_CONFIG_DIR) + "/" + name; }

inline degen::Grid disk2_grid(std::size_t n) { return degen::build_grid(degen::DomainSpec::ball({0, 0}, 2.0), n); }

inline degen::Grid unit_square(std::size_t n) { return degen::build_grid(degen::DomainSpec::box({0, 0}, {1, 1}), n); }

inline degen::Grid unit_disk(std::size_t n) { return degen::build_grid(degen::DomainSpec::ball({0, 0}, 1.0), n); }

/// Component holding every interior node of the grid.
inline degen::Component whole_interior(const degen::Grid& grid) {
    degen::Component c;
    for (std::size_t node = 0; node < grid.node_count(); ++node)
        if (grid.is_interior(node)) c.nodes.push_back(node);
    c.id = {1, 1};
    return c;
}

inline degen::ZeroSet empty_zero_set(const degen::Grid& grid) {
    degen::ZeroSet z;
    z.mask.assign(grid.node_count(), 0);
    return z;
}

/// Lowest eigenvalue of the 2N+1 point Laplacian (scaled by h^{N-2}, divided by h^N)
/// on the unit square with n nodes per axis.
inline double discrete_square_lambda1(std::size_t n) {
    const double h = 1.0 / static_cast<double>(n - 1);
    const double s = std::sin(std::numbers::pi * h / 2);
    return 2.0 * 4.0 / (h * h) * s * s;
}

} // namespace testing_support

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "degen/grid.hpp"
#include "degen/linalg.hpp"
#include "degen/nonlinearity.hpp"
#include "degen/stencil.hpp"
#include "degen/weights.hpp"

namespace degen {

struct VerificationTolerances {
    double residual = 0; // 0: 1e-6 * gamma * s_star * h^N
    double relative_residual = 1e-6;
    double bounds = 1e-8;
    double trace = 0;
};

struct VerificationReport {
    double residual_norm = 0;
    double residual_tolerance = 0;
    double min_u = 0;
    double max_u = 0;
    double bounds_tolerance = 0;
    double zero_trace_max = 0;
    double w11_seminorm = 0;
    double holder_bound = 0; // Cauchy-Schwarz bound of the W^{1,1} seminorm by the weighted energy
    bool residual_ok = false;
    bool bounds_ok = false;
    bool trace_ok = false;

    bool holder_ok() const { return w11_seminorm <= holder_bound * (1 + 1e-12); }
    bool passed() const { return residual_ok && bounds_ok && trace_ok; }
};

/// sum over lattice edges of |u_i - u_j| h^{N-1}
inline double w11_seminorm(std::span<const double> u, const Grid& grid) {
    const std::size_t dim = grid.dimension();
    const double scale = std::pow(grid.spacing(), static_cast<double>(dim) - 1.0);
    double s = 0;
    for (std::size_t node = 0; node < grid.node_count(); ++node)
        for (std::size_t k = 0; k < dim; ++k)
            if (const std::size_t nb = grid.neighbor(node, k, 1); nb != no_node) s += std::fabs(u[node] - u[nb]);
    return s * scale;
}

/// Residual (A u)_i - f(u_i) h^N on interior nodes outside the zero set, plus the
/// qualitative checks: bounds, zero trace, and the W^{1,1} diagnostics.
class Verifier {
public:
    Verifier(const Grid& grid, const WeightField& field, const ZeroSet& zero, NonlinearitySpec f,
             VerificationTolerances tol = {})
        : grid_(&grid), field_(&field), zero_(&zero), f_(std::move(f)), tol_(tol) {
        std::vector<std::size_t> nodes;
        for (std::size_t node = 0; node < grid.node_count(); ++node)
            if (grid.is_interior(node) && !zero.contains(node)) nodes.push_back(node);
        system_ = assemble_weighted(grid, field, std::move(nodes));
        if (!(tol_.residual > 0))
            tol_.residual = tol_.relative_residual * f_.gamma * f_.s_star * grid.cell_volume();
        if (!(tol_.trace > 0)) tol_.trace = tol_.bounds;
    }

    const VerificationTolerances& tolerances() const noexcept { return tol_; }
    const NodeSystem& system() const noexcept { return system_; }

    /// Nodal residuals in ascending node order over the tested nodes.
    std::vector<double> residuals(std::span<const double> u) const {
        const std::size_t n = system_.size();
        std::vector<double> local(n), r(n);
        for (std::size_t i = 0; i < n; ++i) local[i] = u[system_.unknowns[i]];
        system_.stiffness.multiply(local, r);
        const double volume = grid_->cell_volume();
        for (std::size_t i = 0; i < n; ++i) r[i] -= f_(local[i]) * volume;
        return r;
    }

    double residual(std::span<const double> u) const { return max_abs(residuals(u)); }

    VerificationReport check(std::span<const double> u) const {
        VerificationReport rep;
        rep.residual_norm = residual(u);
        rep.residual_tolerance = tol_.residual;
        rep.bounds_tolerance = tol_.bounds;
        rep.min_u = std::numeric_limits<double>::infinity();
        rep.max_u = -std::numeric_limits<double>::infinity();
        for (std::size_t node = 0; node < grid_->node_count(); ++node) {
            const NodeClass c = grid_->node_class(node);
            if (c == NodeClass::interior) {
                rep.min_u = std::min(rep.min_u, u[node]);
                rep.max_u = std::max(rep.max_u, u[node]);
            }
            if (c == NodeClass::domain_boundary || zero_->contains(node))
                rep.zero_trace_max = std::max(rep.zero_trace_max, std::fabs(u[node]));
        }
        rep.w11_seminorm = w11_seminorm(u, *grid_);
        rep.holder_bound = holder_bound(u);
        rep.residual_ok = rep.residual_norm <= tol_.residual;
        rep.bounds_ok = rep.min_u >= -tol_.bounds && rep.max_u <= f_.s_star + tol_.bounds;
        rep.trace_ok = rep.zero_trace_max <= tol_.trace;
        return rep;
    }

private:
    // sqrt(sum h^N / (c g)) * sqrt(sum c g du^2 h^{N-2}) over edges with du != 0
    double holder_bound(std::span<const double> u) const {
        const Grid& grid = *grid_;
        const std::size_t dim = grid.dimension();
        const double h = grid.spacing();
        const double vol = grid.cell_volume();
        const double scale = std::pow(h, static_cast<double>(dim) - 2.0);
        double inverse = 0, energy = 0;
        for (std::size_t node = 0; node < grid.node_count(); ++node) {
            if (!grid.is_interior(node)) continue;
            for (std::size_t k = 0; k < dim; ++k)
                for (int dir : {-1, 1}) {
                    const std::size_t nb = grid.neighbor(node, k, dir);
                    if (grid.is_interior(nb) && nb < node) continue; // counted from the other end
                    const double du = u[node] - u[nb];
                    if (du == 0) continue;
                    const double cg = field_->edge_conductance(node, k, dir, grid) * edge_factor(grid, node, k, dir);
                    if (!(cg > 0)) return std::numeric_limits<double>::infinity();
                    inverse += vol / cg;
                    energy += cg * du * du * scale;
                }
        }
        return std::sqrt(inverse) * std::sqrt(energy);
    }

    const Grid* grid_;
    const WeightField* field_;
    const ZeroSet* zero_;
    NonlinearitySpec f_;
    VerificationTolerances tol_;
    NodeSystem system_;
};

inline double weak_residual(std::span<const double> u, const WeightField& field, const NonlinearitySpec& f,
                            const Grid& grid, const ZeroSet& zero) {
    return Verifier(grid, field, zero, f).residual(u);
}

} // namespace degen

#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "degen/grid.hpp"
#include "degen/linalg.hpp"
#include "degen/weights.hpp"

namespace degen {

/// Stiffness matrix of sum_e c_e g_e (u_i - u_j)^2 h^{N-2} over the edges touching
/// a set of unknown nodes; every other node is held at 0. g_e = 1/theta on edges cut
/// by the domain boundary and 1 otherwise.
struct NodeSystem {
    std::vector<std::size_t> unknowns; // global node ids, ascending
    std::vector<std::size_t> local;    // global -> local index, no_node when pinned
    CsrMatrix stiffness;

    std::size_t size() const noexcept { return unknowns.size(); }
};

/// Geometric edge factor g_e for the edge leaving `node` along (axis, dir).
inline double edge_factor(const Grid& grid, std::size_t node, std::size_t axis, int dir) {
    const std::size_t nb = grid.neighbor(node, axis, dir);
    if (grid.node_class(nb) == NodeClass::domain_boundary) return 1.0 / grid.cut_fraction(node, axis, dir);
    return 1.0;
}

template <class ConductanceFn>
NodeSystem assemble_stiffness(const Grid& grid, std::vector<std::size_t> unknowns, ConductanceFn&& conductance) {
    const std::size_t dim = grid.dimension();
    const double scale = std::pow(grid.spacing(), static_cast<double>(dim) - 2.0);
    NodeSystem sys;
    sys.unknowns = std::move(unknowns);
    sys.local.assign(grid.node_count(), no_node);
    for (std::size_t i = 0; i < sys.unknowns.size(); ++i) sys.local[sys.unknowns[i]] = i;

    CsrMatrix& a = sys.stiffness;
    a.rows = sys.unknowns.size();
    a.row_ptr.assign(1, 0);
    a.cols.reserve(a.rows * (2 * dim + 1));
    a.vals.reserve(a.rows * (2 * dim + 1));
    for (std::size_t i = 0; i < a.rows; ++i) {
        const std::size_t node = sys.unknowns[i];
        const std::size_t diag_pos = a.vals.size();
        a.cols.push_back(i);
        a.vals.push_back(0.0);
        double diag = 0;
        for (std::size_t k = 0; k < dim; ++k)
            for (int dir : {-1, 1}) {
                const std::size_t nb = grid.neighbor(node, k, dir);
                const double w = conductance(node, k, dir) * edge_factor(grid, node, k, dir) * scale;
                diag += w;
                if (const std::size_t j = sys.local[nb]; j != no_node) {
                    a.cols.push_back(j);
                    a.vals.push_back(-w);
                }
            }
        a.vals[diag_pos] = diag;
        a.row_ptr.push_back(a.vals.size());
    }
    return sys;
}

inline NodeSystem assemble_laplacian(const Grid& grid, std::vector<std::size_t> unknowns) {
    return assemble_stiffness(grid, std::move(unknowns), [](std::size_t, std::size_t, int) { return 1.0; });
}

inline NodeSystem assemble_weighted(const Grid& grid, const WeightField& field, std::vector<std::size_t> unknowns) {
    return assemble_stiffness(grid, std::move(unknowns), [&](std::size_t node, std::size_t axis, int dir) {
        return field.edge_conductance(node, axis, dir, grid);
    });
}

} // namespace degen

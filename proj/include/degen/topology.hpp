#pragma once

#include <algorithm>
#include <cstddef>
#include <deque>
#include <map>
#include <string>
#include <vector>

#include "degen/error.hpp"
#include "degen/grid.hpp"
#include "degen/weights.hpp"

namespace degen {

/// (i, l): the l-th component (1-based, scan order) among those bounded by i manifolds.
struct ComponentId {
    std::size_t manifolds = 0;
    std::size_t ordinal = 0;

    std::string str() const { return "A(" + std::to_string(manifolds) + "," + std::to_string(ordinal) + ")"; }
    bool operator==(const ComponentId&) const = default;
};

struct Component {
    std::size_t index = 0;          // position in the decomposition
    ComponentId id;
    std::vector<std::size_t> nodes; // ascending
    std::vector<std::size_t> shell; // adjacent zero-set and domain-boundary nodes, ascending
    std::size_t boundary_manifold_count = 0;
};

struct Decomposition {
    std::vector<Component> components;
    std::size_t chi = 0;
    std::map<std::size_t, std::size_t> j_counts;
};

namespace detail {

/// Number of connected pieces of `shell` after dilating it by one stencil step.
inline std::size_t count_manifolds(const Grid& grid, const std::vector<std::size_t>& shell,
                                   std::vector<int>& scratch) {
    const std::size_t dim = grid.dimension();
    std::vector<std::size_t> dilated;
    auto add = [&](std::size_t node) {
        if (scratch[node] == 0) {
            scratch[node] = -1;
            dilated.push_back(node);
        }
    };
    for (std::size_t node : shell) {
        add(node);
        for (std::size_t k = 0; k < dim; ++k)
            for (int dir : {-1, 1})
                if (const std::size_t nb = grid.neighbor(node, k, dir); nb != no_node) add(nb);
    }

    int labels = 0;
    std::deque<std::size_t> queue;
    for (std::size_t start : dilated) {
        if (scratch[start] != -1) continue;
        ++labels;
        scratch[start] = labels;
        queue.push_back(start);
        while (!queue.empty()) {
            const std::size_t cur = queue.front();
            queue.pop_front();
            for (std::size_t k = 0; k < dim; ++k)
                for (int dir : {-1, 1}) {
                    const std::size_t nb = grid.neighbor(cur, k, dir);
                    if (nb != no_node && scratch[nb] == -1) {
                        scratch[nb] = labels;
                        queue.push_back(nb);
                    }
                }
        }
    }
    for (std::size_t node : dilated) scratch[node] = 0;
    return static_cast<std::size_t>(labels);
}

} // namespace detail

/// Splits interior nodes outside the zero set into face-connected components.
inline Decomposition decompose_components(const Grid& grid, const ZeroSet& zero) {
    if (zero.touches_domain_boundary)
        throw hypothesis_error(Hypothesis::a1, "the zero set of the weight reaches the domain boundary");

    const std::size_t dim = grid.dimension();
    const std::size_t total = grid.node_count();
    constexpr std::size_t unlabeled = no_node;
    std::vector<std::size_t> label(total, unlabeled);
    std::vector<int> scratch(total, 0);
    Decomposition dec;

    auto free_node = [&](std::size_t node) { return grid.is_interior(node) && !zero.contains(node); };

    std::deque<std::size_t> queue;
    for (std::size_t start = 0; start < total; ++start) {
        if (!free_node(start) || label[start] != unlabeled) continue;
        Component comp;
        comp.index = dec.components.size();
        label[start] = comp.index;
        queue.push_back(start);
        std::vector<std::size_t> shell;
        while (!queue.empty()) {
            const std::size_t cur = queue.front();
            queue.pop_front();
            comp.nodes.push_back(cur);
            for (std::size_t k = 0; k < dim; ++k)
                for (int dir : {-1, 1}) {
                    const std::size_t nb = grid.neighbor(cur, k, dir);
                    if (free_node(nb)) {
                        if (label[nb] == unlabeled) {
                            label[nb] = comp.index;
                            queue.push_back(nb);
                        }
                    } else {
                        shell.push_back(nb);
                    }
                }
        }
        std::sort(comp.nodes.begin(), comp.nodes.end());
        std::sort(shell.begin(), shell.end());
        shell.erase(std::unique(shell.begin(), shell.end()), shell.end());
        comp.shell = std::move(shell);
        comp.boundary_manifold_count = detail::count_manifolds(grid, comp.shell, scratch);
        dec.components.push_back(std::move(comp));
    }

    if (dec.components.empty())
        throw Error(ErrorKind::empty_decomposition, "every interior node lies in the zero set");

    dec.chi = dec.components.size();
    for (auto& comp : dec.components) {
        const std::size_t i = comp.boundary_manifold_count;
        comp.id = ComponentId{i, ++dec.j_counts[i]};
    }
    return dec;
}

} // namespace degen

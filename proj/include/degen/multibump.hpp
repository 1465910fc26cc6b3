#pragma once

#include <algorithm>
#include <cstddef>
#include <memory>
#include <vector>

#include "degen/energy.hpp"
#include "degen/error.hpp"
#include "degen/grid.hpp"

namespace degen {

using BumpSet = std::shared_ptr<const std::vector<BumpSolution>>;

/// Zero extension of a bump to every lattice node.
inline std::vector<double> extend_bump(const BumpSolution& bump, const Grid& grid) {
    std::vector<double> out(grid.node_count(), 0.0);
    for (std::size_t p = 0; p < bump.nodes.size(); ++p) out[bump.nodes[p]] = bump.values[p];
    return out;
}

/// Sum of the extensions of the bumps on a nonempty set of components. Stored as
/// references into a shared bump set; dense values only on request.
class MultiBumpSolution {
public:
    MultiBumpSolution(BumpSet bumps, std::vector<std::size_t> positions)
        : bumps_(std::move(bumps)), positions_(std::move(positions)) {
        for (std::size_t p : positions_) energy_ += (*bumps_)[p].energy;
    }

    /// Component indices, ascending.
    std::vector<std::size_t> subset() const {
        std::vector<std::size_t> out;
        for (std::size_t p : positions_) out.push_back((*bumps_)[p].component);
        return out;
    }

    std::vector<ComponentId> ids() const {
        std::vector<ComponentId> out;
        for (std::size_t p : positions_) out.push_back((*bumps_)[p].id);
        return out;
    }

    std::size_t n_bumps() const noexcept { return positions_.size(); }
    double energy() const noexcept { return energy_; }

    double min_u() const {
        double m = 0;
        for (std::size_t p : positions_) m = std::min(m, (*bumps_)[p].min_u);
        return m;
    }

    double max_u() const {
        double m = 0;
        for (std::size_t p : positions_) m = std::max(m, (*bumps_)[p].max_u);
        return m;
    }

    std::vector<double> dense(const Grid& grid) const {
        std::vector<double> out(grid.node_count(), 0.0);
        for (std::size_t p : positions_) {
            const BumpSolution& b = (*bumps_)[p];
            for (std::size_t k = 0; k < b.nodes.size(); ++k) out[b.nodes[k]] += b.values[k];
        }
        return out;
    }

private:
    BumpSet bumps_;
    std::vector<std::size_t> positions_; // into *bumps_, ascending by component
    double energy_ = 0;
};

/// `subset` holds component indices.
inline MultiBumpSolution compose_bumps(const BumpSet& bumps, std::vector<std::size_t> subset) {
    if (subset.empty())
        throw Error(ErrorKind::precondition, "the empty subset gives the trivial solution and is excluded");
    std::sort(subset.begin(), subset.end());
    if (std::adjacent_find(subset.begin(), subset.end()) != subset.end())
        throw Error(ErrorKind::precondition, "subset lists a component twice");
    std::vector<std::size_t> positions;
    for (std::size_t c : subset) {
        const auto it = std::find_if(bumps->begin(), bumps->end(), [c](const BumpSolution& b) { return b.component == c; });
        if (it == bumps->end())
            throw Error(ErrorKind::missing_bump, "no converged bump for component " + std::to_string(c));
        positions.push_back(static_cast<std::size_t>(it - bumps->begin()));
    }
    return MultiBumpSolution(bumps, std::move(positions));
}

inline constexpr std::size_t default_max_chi = 20;

/// All nonempty subsets of the bump set, ordered by size and then lexicographically by
/// component index.
inline std::vector<MultiBumpSolution> enumerate_all(const BumpSet& bumps, std::size_t max_chi = default_max_chi) {
    std::vector<std::size_t> order(bumps->size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t x, std::size_t y) { return (*bumps)[x].component < (*bumps)[y].component; });
    const std::size_t chi = order.size();
    if (chi > max_chi || chi >= 63)
        throw Error(ErrorKind::enumeration_overflow,
                    "chi = " + std::to_string(chi) + " exceeds the enumeration limit " + std::to_string(max_chi));

    std::vector<MultiBumpSolution> out;
    out.reserve((std::size_t{1} << chi) - 1);
    for (std::size_t k = 1; k <= chi; ++k) {
        std::vector<std::size_t> pick(k);
        for (std::size_t i = 0; i < k; ++i) pick[i] = i;
        for (;;) {
            std::vector<std::size_t> positions(k);
            for (std::size_t i = 0; i < k; ++i) positions[i] = order[pick[i]];
            out.emplace_back(bumps, std::move(positions));
            std::size_t i = k;
            while (i > 0 && pick[i - 1] == chi - k + i - 1) --i;
            if (i == 0) break;
            ++pick[i - 1];
            for (std::size_t j = i; j < k; ++j) pick[j] = pick[j - 1] + 1;
        }
    }
    return out;
}

} // namespace degen

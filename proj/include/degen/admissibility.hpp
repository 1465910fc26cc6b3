#pragma once

// Refinement-based check of the weight hypotheses: A2 membership and
// integrability of 1/a. Estimates are compared between the run grid and a grid
// with half the resolution; a finite quantity settles, a divergent one grows.

#include <cmath>
#include <string_view>
#include <vector>

#include "degen/grid.hpp"
#include "degen/weights.hpp"

namespace degen {

struct AdmissibilityOptions {
    double zero_threshold = 1e-6;
    double stability_tolerance = 0.10; // |growth - 1| bound for a stable estimate
    double divergence_growth = 2.0;    // growth above this sets the divergence flag
    std::vector<double> t_factors{1.0, 1.25, 1.5, 2.0, 3.0, 4.0}; // scan t = factor * N/2
    BallFamily balls;
    std::size_t subdivisions = 0;
};

enum class AdmissibilityVerdict { admissible, violates_a2, violates_lt, zero_set_touches_boundary };

inline std::string_view to_string(AdmissibilityVerdict v) {
    switch (v) {
    case AdmissibilityVerdict::admissible: return "admissible";
    case AdmissibilityVerdict::violates_a2: return "violates-a2";
    case AdmissibilityVerdict::violates_lt: return "violates-lt";
    case AdmissibilityVerdict::zero_set_touches_boundary: return "zero-set-touches-boundary";
    }
    return "unknown";
}

struct LtEstimate {
    double t = 0;
    double coarse = 0;
    double fine = 0;
    double growth = 0;
    bool stable = false;
    bool divergent = false;
};

struct AdmissibilityReport {
    std::size_t coarse_resolution = 0;
    std::size_t fine_resolution = 0;
    double a2_coarse = 0;
    double a2_estimate = 0;
    double a2_growth = 0;
    bool a2_stable = false;
    bool a2_divergent = false;
    std::vector<LtEstimate> lt_norms;
    double best_t = 0; // 0 when no scanned t is stable
    double n_over_2 = 0;
    std::size_t zero_nodes = 0;
    bool zero_set_touches_boundary = false;
    AdmissibilityVerdict verdict = AdmissibilityVerdict::admissible;

    bool divergence_flag() const {
        if (a2_divergent) return true;
        for (const auto& row : lt_norms)
            if (row.divergent) return true;
        return false;
    }
};

inline std::size_t coarse_resolution_for(std::size_t n) { return (n - 1) / 2 + 1; }

inline AdmissibilityReport assess_admissibility(const WeightSpec& spec, const Grid& fine,
                                                const WeightField& fine_field, const ZeroSet& zero,
                                                const AdmissibilityOptions& opts = {}) {
    AdmissibilityReport rep;
    rep.fine_resolution = fine.nodes_per_axis();
    rep.coarse_resolution = coarse_resolution_for(fine.nodes_per_axis());
    rep.n_over_2 = 0.5 * static_cast<double>(fine.dimension());

    const Grid coarse = build_grid(fine.domain(), rep.coarse_resolution);
    const WeightField coarse_field = evaluate_weight(spec, coarse, opts.zero_threshold);
    const QuadratureLattice q_fine(fine_field, fine, opts.subdivisions);
    const QuadratureLattice q_coarse(coarse_field, coarse, opts.subdivisions);

    auto stable = [&](double g) { return std::fabs(g - 1.0) <= opts.stability_tolerance; };

    rep.a2_coarse = estimate_a2_constant(q_coarse, coarse, opts.balls);
    rep.a2_estimate = estimate_a2_constant(q_fine, fine, opts.balls);
    rep.a2_growth = rep.a2_estimate / rep.a2_coarse;
    rep.a2_stable = std::isfinite(rep.a2_estimate) && stable(rep.a2_growth);
    rep.a2_divergent = !(rep.a2_growth <= opts.divergence_growth);

    for (double factor : opts.t_factors) {
        const double t = std::max(1.0, factor * rep.n_over_2);
        LtEstimate row;
        row.t = t;
        row.coarse = estimate_lt_norm(q_coarse, t);
        row.fine = estimate_lt_norm(q_fine, t);
        row.growth = row.fine / row.coarse;
        row.stable = std::isfinite(row.fine) && stable(row.growth);
        row.divergent = !(row.growth <= opts.divergence_growth);
        if (row.stable && t > rep.best_t) rep.best_t = t;
        rep.lt_norms.push_back(row);
    }

    rep.zero_nodes = zero.size();
    rep.zero_set_touches_boundary = zero.touches_domain_boundary;

    bool some_t_above_half_dim = false;
    for (const auto& row : rep.lt_norms)
        if (row.stable && row.t > rep.n_over_2) some_t_above_half_dim = true;

    if (!rep.a2_stable)
        rep.verdict = AdmissibilityVerdict::violates_a2;
    else if (!some_t_above_half_dim)
        rep.verdict = AdmissibilityVerdict::violates_lt;
    else if (rep.zero_set_touches_boundary)
        rep.verdict = AdmissibilityVerdict::zero_set_touches_boundary;
    else
        rep.verdict = AdmissibilityVerdict::admissible;
    return rep;
}

} // namespace degen

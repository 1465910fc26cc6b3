#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "degen/error.hpp"
#include "degen/grid.hpp"
#include "degen/linalg.hpp"
#include "degen/nonlinearity.hpp"
#include "degen/spectral.hpp"
#include "degen/stencil.hpp"
#include "degen/topology.hpp"
#include "degen/weights.hpp"

namespace degen {

/// J(u) = 1/2 u^T A u - h^N sum_i F_*(u_i) on one component. Nodes whose edges all have
/// zero conductance are not unknowns and stay at 0.
class DiscreteEnergy {
public:
    DiscreteEnergy(const Grid& grid, const WeightField& field, const Component& component,
                   TruncatedNonlinearity nonlinearity)
        : component_(component.index), id_(component.id), nodes_(component.nodes),
          f_(std::move(nonlinearity)), volume_(grid.cell_volume()) {
        std::vector<std::size_t> unknowns;
        for (std::size_t p = 0; p < nodes_.size(); ++p) {
            const std::size_t node = nodes_[p];
            bool conducts = false;
            for (std::size_t k = 0; k < grid.dimension() && !conducts; ++k)
                for (int dir : {-1, 1})
                    if (field.edge_conductance(node, k, dir, grid) > 0) conducts = true;
            if (conducts) {
                unknowns.push_back(node);
                positions_.push_back(p);
            }
        }
        if (unknowns.empty())
            throw Error(ErrorKind::precondition, "component " + id_.str() + " has no conducting nodes");
        system_ = assemble_weighted(grid, field, std::move(unknowns));
    }

    std::size_t size() const noexcept { return system_.size(); }
    std::size_t component() const noexcept { return component_; }
    const ComponentId& id() const noexcept { return id_; }
    const NodeSystem& system() const noexcept { return system_; }
    const CsrMatrix& stiffness() const noexcept { return system_.stiffness; }
    const TruncatedNonlinearity& nonlinearity() const noexcept { return f_; }
    double volume() const noexcept { return volume_; }
    const std::vector<std::size_t>& component_nodes() const noexcept { return nodes_; }

    /// Position in the component node list of each unknown.
    const std::vector<std::size_t>& positions() const noexcept { return positions_; }

    /// Unknown vector from values aligned with the component nodes.
    std::vector<double> restrict_to_unknowns(std::span<const double> per_node) const {
        std::vector<double> u(size());
        for (std::size_t i = 0; i < size(); ++i) u[i] = per_node[positions_[i]];
        return u;
    }

    std::vector<double> expand_to_nodes(std::span<const double> u) const {
        std::vector<double> out(nodes_.size(), 0.0);
        for (std::size_t i = 0; i < size(); ++i) out[positions_[i]] = u[i];
        return out;
    }

    double value(std::span<const double> u) const {
        std::vector<double> au(size());
        double potential = 0;
        for (double v : u) potential += f_.primitive(v);
        return 0.5 * stiffness().quadratic_form(u, au) - volume_ * potential;
    }

    void gradient(std::span<const double> u, std::span<double> g) const {
        stiffness().multiply(u, g);
        for (std::size_t i = 0; i < size(); ++i) g[i] -= volume_ * f_.value(u[i]);
    }

    /// J(u + alpha d) - J(u) given A u and A d, without cancellation against J(u).
    double change(std::span<const double> u, std::span<const double> d, double alpha, std::span<const double> au,
                  std::span<const double> ad) const {
        double potential = 0;
        for (std::size_t i = 0; i < size(); ++i) potential += f_.increment(u[i], alpha * d[i]);
        return alpha * dot(d, au) + 0.5 * alpha * alpha * dot(d, ad) - volume_ * potential;
    }

private:
    std::size_t component_;
    ComponentId id_;
    std::vector<std::size_t> nodes_;
    std::vector<std::size_t> positions_;
    NodeSystem system_;
    TruncatedNonlinearity f_;
    double volume_;
};

inline DiscreteEnergy assemble_energy(const Component& component, const WeightField& field,
                                      const TruncatedNonlinearity& trunc, const Grid& grid) {
    return DiscreteEnergy(grid, field, component, trunc);
}

struct SolverOptions {
    double gradient_tolerance = 0;        // 0: 1e-8 * gamma * h^N
    double relative_gradient_tolerance = 1e-8;
    std::size_t max_iterations = 100000;
    double armijo = 1e-4;
    double cg_tolerance = 1e-10;
    double smallest_seed_ratio = 0x1p-30; // of s_star
};

struct BumpSolution {
    std::size_t component = 0;
    ComponentId id;
    std::vector<std::size_t> nodes; // the component's nodes, ascending
    std::vector<double> values;     // aligned with `nodes`
    double energy = 0;
    double gradient_norm = 0;
    double gradient_tolerance = 0;
    double seed_amplitude = 0;
    std::size_t iterations = 0;
    double min_u = 0;
    double max_u = 0;
};

/// Descent in the metric of the stiffness matrix: d = -A^{-1} grad J, then Armijo
/// backtracking by halving from the full step. Starts at s0 e_1 with s0 halved from
/// s_star until J(s0 e_1) < 0.
inline BumpSolution minimize_energy(const DiscreteEnergy& energy, const EigenPair& eigen, const F2Row& f2,
                                    const SolverOptions& opts = {}) {
    if (!f2.pass)
        throw hypothesis_error(Hypothesis::f2, "component " + energy.id().str() +
                                                   " has a_M >= gamma / lambda_1; no negative-energy seed exists");
    const auto& f = energy.nonlinearity().base();
    const std::size_t n = energy.size();
    const double tol = opts.gradient_tolerance > 0 ? opts.gradient_tolerance
                                                   : opts.relative_gradient_tolerance * f.gamma * energy.volume();

    const std::vector<double> e1 = energy.restrict_to_unknowns(eigen.e1);
    std::vector<double> u(n);
    double s0 = f.s_star;
    const double smallest = f.s_star * opts.smallest_seed_ratio;
    for (;;) {
        for (std::size_t i = 0; i < n; ++i) u[i] = s0 * e1[i];
        if (energy.value(u) < 0) break;
        s0 *= 0.5;
        if (s0 < smallest)
            throw Error(ErrorKind::seed_failure, "no seed s0 * e1 with negative energy on component " +
                                                     energy.id().str() + " down to s0 = s_star * 2^-30",
                        Hypothesis::f2);
    }

    const CsrMatrix& a = energy.stiffness();
    std::vector<double> au(n), g(n), rhs(n), d(n), ad(n);
    BumpSolution out;
    out.seed_amplitude = s0;
    out.gradient_tolerance = tol;
    bool converged = false;
    for (out.iterations = 0; out.iterations <= opts.max_iterations; ++out.iterations) {
        a.multiply(u, au);
        for (std::size_t i = 0; i < n; ++i) g[i] = au[i] - energy.volume() * energy.nonlinearity().value(u[i]);
        out.gradient_norm = max_abs(g);
        if (out.gradient_norm < tol) {
            converged = true;
            break;
        }
        if (out.iterations == opts.max_iterations) break;

        for (std::size_t i = 0; i < n; ++i) rhs[i] = -g[i];
        std::fill(d.begin(), d.end(), 0.0);
        conjugate_gradient(a, rhs, d, opts.cg_tolerance, 20 * n + 100);
        a.multiply(d, ad);
        const double slope = dot(g, d);
        if (!(slope < 0)) throw Error(ErrorKind::numerical_failure, "descent direction lost on " + energy.id().str());

        double alpha = 1.0;
        for (;;) {
            if (energy.change(u, d, alpha, au, ad) <= opts.armijo * alpha * slope) break;
            alpha *= 0.5;
            if (alpha < 1e-30)
                throw Error(ErrorKind::numerical_failure, "line search stalled on " + energy.id().str());
        }
        for (std::size_t i = 0; i < n; ++i) u[i] += alpha * d[i];
    }
    if (!converged)
        throw Error(ErrorKind::numerical_failure, "energy minimization did not converge on " + energy.id().str());

    out.component = energy.component();
    out.id = energy.id();
    out.nodes = energy.component_nodes();
    out.values = energy.expand_to_nodes(u);
    out.energy = energy.value(u);
    out.min_u = *std::min_element(out.values.begin(), out.values.end());
    out.max_u = *std::max_element(out.values.begin(), out.values.end());
    if (!(out.energy < 0))
        throw Error(ErrorKind::numerical_failure, "minimizer on " + energy.id().str() + " has nonnegative energy");
    return out;
}

} // namespace degen

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "degen/error.hpp"
#include "degen/grid.hpp"
#include "degen/linalg.hpp"
#include "degen/stencil.hpp"
#include "degen/topology.hpp"
#include "degen/weights.hpp"

namespace degen {

struct EigenOptions {
    double rel_tol = 1e-12; // on successive eigenvalue estimates
    std::size_t max_iterations = 500;
    double cg_tol = 1e-12;
};

/// Lowest Dirichlet eigenpair of the unweighted stencil Laplacian on one component.
struct EigenPair {
    double lambda1 = 0;
    std::vector<double> e1; // aligned with Component::nodes, max-norm 1
    std::size_t iterations = 0;
};

/// Inverse power iteration with a CG inner solve. The reported eigenvalue is the
/// Rayleigh quotient of the returned eigenvector.
inline EigenPair dirichlet_lambda1(const Component& component, const Grid& grid, const EigenOptions& opts = {}) {
    if (component.nodes.empty())
        throw Error(ErrorKind::precondition, "eigenproblem on an empty component");
    const NodeSystem sys = assemble_laplacian(grid, component.nodes);
    const std::size_t n = sys.size();
    const double volume = grid.cell_volume();

    std::vector<double> x(n, 1.0 / std::sqrt(static_cast<double>(n))), y(n, 0.0), ay(n);
    double lambda = 0, previous = 0;
    EigenPair out;
    bool converged = false;
    for (out.iterations = 1; out.iterations <= opts.max_iterations; ++out.iterations) {
        std::copy(x.begin(), x.end(), y.begin());
        conjugate_gradient(sys.stiffness, x, y, opts.cg_tol, 20 * n + 100);
        const double yy = dot(y, y);
        lambda = sys.stiffness.quadratic_form(y, ay) / (volume * yy);
        const double inv = 1.0 / std::sqrt(yy);
        for (std::size_t i = 0; i < n; ++i) x[i] = y[i] * inv;
        if (out.iterations > 1 && std::fabs(lambda - previous) < opts.rel_tol * std::fabs(lambda)) {
            converged = true;
            break;
        }
        previous = lambda;
    }
    if (!converged)
        throw Error(ErrorKind::numerical_failure, "inverse power iteration did not converge");

    double peak = 0;
    for (double v : x)
        if (std::fabs(v) > std::fabs(peak)) peak = v;
    out.e1.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.e1[i] = x[i] / peak;
    if (*std::min_element(out.e1.begin(), out.e1.end()) <= 0)
        throw Error(ErrorKind::numerical_failure, "first eigenfunction is not strictly positive");
    out.lambda1 = sys.stiffness.quadratic_form(out.e1, ay) / (volume * dot(out.e1, out.e1));
    return out;
}

inline double rayleigh_quotient(const Component& component, const Grid& grid, std::span<const double> v) {
    const NodeSystem sys = assemble_laplacian(grid, component.nodes);
    std::vector<double> av(v.size());
    return sys.stiffness.quadratic_form(v, av) / (grid.cell_volume() * dot(v, v));
}

struct F2Row {
    std::size_t component = 0;
    ComponentId id;
    double a_max = 0;   // over the component and its shell
    double lambda1 = 0;
    double gamma = 0;
    double margin = 0;  // gamma / lambda1 - a_max
    bool pass = false;
};

/// a_M < gamma / lambda_1 on the closure of the component.
inline F2Row check_hypothesis_f2(const Component& component, const WeightField& field, double gamma,
                                 const EigenPair& eigen) {
    if (!(gamma > 0))
        throw Error(ErrorKind::precondition, "gamma must be positive");
    F2Row row;
    row.component = component.index;
    row.id = component.id;
    for (std::size_t node : component.nodes) row.a_max = std::max(row.a_max, field.values[node]);
    for (std::size_t node : component.shell) row.a_max = std::max(row.a_max, field.values[node]);
    row.lambda1 = eigen.lambda1;
    row.gamma = gamma;
    row.margin = gamma / eigen.lambda1 - row.a_max;
    row.pass = row.margin > 0;
    return row;
}

} // namespace degen

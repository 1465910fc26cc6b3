#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "degen/error.hpp"
#include "degen/expression.hpp"

namespace degen {

using SpatialFunction = std::function<double(std::span<const double>)>;

inline double norm2(std::span<const double> x) {
    double s = 0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

/// Wraps a spatial expression (variables x1..xN, r) as a callable.
inline SpatialFunction spatial_function(const Expression& expr, std::size_t dimension) {
    return [expr, dimension](std::span<const double> x) {
        double vars[16];
        for (std::size_t k = 0; k < dimension; ++k) vars[k] = x[k];
        vars[dimension] = norm2(x.first(dimension));
        return expr(std::span<const double>(vars, dimension + 1));
    };
}

/// Bounded region given by a level function that is negative inside.
struct DomainSpec {
    enum class Kind { box, ball, annulus, custom_implicit };

    Kind kind = Kind::box;
    std::size_t dimension = 2;
    std::vector<double> lower;  // bounding box
    std::vector<double> upper;
    std::vector<double> center; // ball, annulus
    double radius = 0;
    double inner_radius = 0;    // annulus
    SpatialFunction custom_level;
    std::string expression;     // custom_implicit, informational

    static DomainSpec box(std::vector<double> lo, std::vector<double> hi) {
        DomainSpec d;
        d.kind = Kind::box;
        d.dimension = lo.size();
        d.lower = std::move(lo);
        d.upper = std::move(hi);
        d.validate();
        return d;
    }

    static DomainSpec ball(std::vector<double> c, double r) {
        DomainSpec d;
        d.kind = Kind::ball;
        d.dimension = c.size();
        d.center = std::move(c);
        d.radius = r;
        d.set_round_bounds();
        d.validate();
        return d;
    }

    static DomainSpec annulus(std::vector<double> c, double r_inner, double r_outer) {
        DomainSpec d;
        d.kind = Kind::annulus;
        d.dimension = c.size();
        d.center = std::move(c);
        d.radius = r_outer;
        d.inner_radius = r_inner;
        d.set_round_bounds();
        d.validate();
        return d;
    }

    static DomainSpec implicit(SpatialFunction level, std::vector<double> lo, std::vector<double> hi,
                               std::string description = {}) {
        DomainSpec d;
        d.kind = Kind::custom_implicit;
        d.dimension = lo.size();
        d.lower = std::move(lo);
        d.upper = std::move(hi);
        d.custom_level = std::move(level);
        d.expression = std::move(description);
        d.validate();
        return d;
    }

    static DomainSpec implicit(const std::string& expr, std::vector<double> lo, std::vector<double> hi) {
        const std::size_t n = lo.size();
        auto fn = spatial_function(Expression::compile(expr, spatial_variables(n)), n);
        return implicit(std::move(fn), std::move(lo), std::move(hi), expr);
    }

    /// Negative inside, zero on the boundary, positive outside.
    double level(std::span<const double> x) const {
        switch (kind) {
        case Kind::box: {
            double d = -std::numeric_limits<double>::infinity();
            for (std::size_t k = 0; k < dimension; ++k) {
                const double mid = 0.5 * (lower[k] + upper[k]);
                const double half = 0.5 * (upper[k] - lower[k]);
                d = std::max(d, std::fabs(x[k] - mid) - half);
            }
            return d;
        }
        case Kind::ball:
            return distance_to_center(x) - radius;
        case Kind::annulus: {
            const double r = distance_to_center(x);
            return std::max(r - radius, inner_radius - r);
        }
        case Kind::custom_implicit:
            return custom_level(x);
        }
        return 1.0;
    }

    void validate() const {
        if (dimension < 2 || dimension > 15)
            throw Error(ErrorKind::invalid_domain, "domain dimension must be in [2, 15]");
        if (lower.size() != dimension || upper.size() != dimension)
            throw Error(ErrorKind::invalid_domain, "bounding box does not match the dimension");
        for (std::size_t k = 0; k < dimension; ++k)
            if (!(upper[k] > lower[k]) || !std::isfinite(lower[k]) || !std::isfinite(upper[k]))
                throw Error(ErrorKind::invalid_domain, "bounding box must have positive finite extent");
        if ((kind == Kind::ball || kind == Kind::annulus) && !(radius > 0))
            throw Error(ErrorKind::invalid_domain, "radius must be positive");
        if (kind == Kind::annulus && !(inner_radius > 0 && inner_radius < radius))
            throw Error(ErrorKind::invalid_domain, "annulus needs 0 < inner radius < outer radius");
        if (kind == Kind::custom_implicit && !custom_level)
            throw Error(ErrorKind::invalid_domain, "custom domain needs a level function");
    }

private:
    double distance_to_center(std::span<const double> x) const {
        double s = 0;
        for (std::size_t k = 0; k < dimension; ++k) s += (x[k] - center[k]) * (x[k] - center[k]);
        return std::sqrt(s);
    }

    void set_round_bounds() {
        lower.resize(dimension);
        upper.resize(dimension);
        for (std::size_t k = 0; k < dimension; ++k) {
            lower[k] = center[k] - radius;
            upper[k] = center[k] + radius;
        }
    }
};

enum class NodeClass : std::uint8_t { exterior, interior, domain_boundary };

inline constexpr std::size_t no_node = std::numeric_limits<std::size_t>::max();

/// Uniform tensor lattice over the bounding box of a domain.
///
/// Nodes strictly inside the domain are interior. Lattice nodes on or outside
/// the boundary that are stencil neighbours of an interior node are
/// domain-boundary nodes and carry the Dirichlet value 0; every other node is
/// exterior. For an edge from an interior node to a domain-boundary node the
/// grid records the fraction theta in (0, 1] of the edge length at which the
/// boundary is crossed, used by the stencils as a 1/theta edge factor.
class Grid {
public:
    static constexpr double min_cut_fraction = 1e-2;

    Grid() = default;

    std::size_t dimension() const noexcept { return extents_.size(); }
    std::span<const std::size_t> extents() const noexcept { return extents_; }
    std::size_t nodes_per_axis() const noexcept { return nodes_per_axis_; }
    std::size_t node_count() const noexcept { return classes_.size(); }
    double spacing() const noexcept { return h_; }
    std::span<const double> origin() const noexcept { return origin_; }
    const DomainSpec& domain() const noexcept { return domain_; }

    /// Volume h^N of one nodal cell.
    double cell_volume() const noexcept { return std::pow(h_, static_cast<double>(dimension())); }

    NodeClass node_class(std::size_t node) const { return classes_[node]; }
    bool is_interior(std::size_t node) const { return classes_[node] == NodeClass::interior; }
    double level(std::size_t node) const { return level_[node]; }

    std::size_t stride(std::size_t axis) const { return strides_[axis]; }

    std::size_t axis_index(std::size_t node, std::size_t axis) const {
        return (node / strides_[axis]) % extents_[axis];
    }

    void coordinates(std::size_t node, std::span<double> x) const {
        for (std::size_t k = 0; k < dimension(); ++k)
            x[k] = origin_[k] + h_ * static_cast<double>(axis_index(node, k));
    }

    std::vector<double> coordinates(std::size_t node) const {
        std::vector<double> x(dimension());
        coordinates(node, x);
        return x;
    }

    /// Neighbour along `axis` in direction `dir` (+1 or -1), or no_node off the lattice.
    std::size_t neighbor(std::size_t node, std::size_t axis, int dir) const {
        const std::size_t i = axis_index(node, axis);
        if (dir < 0)
            return i == 0 ? no_node : node - strides_[axis];
        return i + 1 >= extents_[axis] ? no_node : node + strides_[axis];
    }

    /// Boundary crossing fraction for the edge leaving interior `node`; 1 for uncut edges.
    double cut_fraction(std::size_t node, std::size_t axis, int dir) const {
        return cut_[node * 2 * dimension() + 2 * axis + (dir > 0 ? 1 : 0)];
    }

    std::size_t count(NodeClass c) const {
        return static_cast<std::size_t>(std::count(classes_.begin(), classes_.end(), c));
    }

    std::span<const NodeClass> classes() const noexcept { return classes_; }

    /// Lattice node whose coordinates match `x` up to a tenth of the spacing.
    std::optional<std::size_t> locate(std::span<const double> x) const {
        std::size_t node = 0;
        for (std::size_t k = 0; k < dimension(); ++k) {
            const double t = (x[k] - origin_[k]) / h_;
            const double idx = std::round(t);
            if (std::fabs(t - idx) > 0.1 || idx < 0 || idx >= static_cast<double>(extents_[k]))
                return std::nullopt;
            node += static_cast<std::size_t>(idx) * strides_[k];
        }
        return node;
    }

    friend Grid build_grid(const DomainSpec& domain, std::size_t n);

private:
    DomainSpec domain_;
    std::size_t nodes_per_axis_ = 0;
    double h_ = 0;
    std::vector<double> origin_;
    std::vector<std::size_t> extents_;
    std::vector<std::size_t> strides_;
    std::vector<NodeClass> classes_;
    std::vector<double> level_;
    std::vector<double> cut_;
};

/// Builds the lattice with `n` nodes along the widest axis of the bounding box.
inline Grid build_grid(const DomainSpec& domain, std::size_t n) {
    domain.validate();
    if (n < 2)
        throw Error(ErrorKind::resolution_too_coarse, "need at least 2 nodes per axis");

    const std::size_t dim = domain.dimension;
    Grid g;
    g.domain_ = domain;
    g.nodes_per_axis_ = n;

    double width = 0;
    for (std::size_t k = 0; k < dim; ++k) width = std::max(width, domain.upper[k] - domain.lower[k]);
    g.h_ = width / static_cast<double>(n - 1);
    g.origin_ = domain.lower;
    g.extents_.resize(dim);
    for (std::size_t k = 0; k < dim; ++k) {
        const double cells = (domain.upper[k] - domain.lower[k]) / g.h_;
        g.extents_[k] = static_cast<std::size_t>(std::ceil(cells - 1e-9)) + 1;
    }
    g.strides_.assign(dim, 1);
    for (std::size_t k = dim - 1; k-- > 0;) g.strides_[k] = g.strides_[k + 1] * g.extents_[k + 1];
    const std::size_t total = g.strides_[0] * g.extents_[0];

    g.level_.resize(total);
    g.classes_.assign(total, NodeClass::exterior);
    std::vector<double> x(dim);
    for (std::size_t node = 0; node < total; ++node) {
        g.coordinates(node, x);
        const double phi = domain.level(x);
        if (!std::isfinite(phi))
            throw Error(ErrorKind::invalid_domain, "level function is not finite on the bounding box");
        g.level_[node] = phi;
    }

    for (std::size_t node = 0; node < total; ++node) {
        if (!(g.level_[node] < 0))
            continue;
        for (std::size_t k = 0; k < dim; ++k) {
            const std::size_t i = g.axis_index(node, k);
            if (i == 0 || i + 1 == g.extents_[k])
                throw Error(ErrorKind::invalid_domain,
                            "domain is not contained in its bounding box (inside node on the lattice edge)");
        }
        g.classes_[node] = NodeClass::interior;
    }

    std::size_t interior = 0;
    g.cut_.assign(total * 2 * dim, 1.0);
    std::vector<double> y(dim), p(dim);
    for (std::size_t node = 0; node < total; ++node) {
        if (g.classes_[node] != NodeClass::interior)
            continue;
        ++interior;
        for (std::size_t k = 0; k < dim; ++k) {
            for (int dir : {-1, 1}) {
                const std::size_t nb = g.neighbor(node, k, dir);
                if (g.classes_[nb] == NodeClass::interior)
                    continue;
                g.classes_[nb] = NodeClass::domain_boundary;
                // bisection for the boundary crossing along the edge
                g.coordinates(node, x);
                g.coordinates(nb, y);
                double lo = 0, hi = 1;
                for (int it = 0; it < 60; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    for (std::size_t c = 0; c < dim; ++c) p[c] = x[c] + mid * (y[c] - x[c]);
                    (domain.level(p) < 0 ? lo : hi) = mid;
                }
                g.cut_[node * 2 * dim + 2 * k + (dir > 0 ? 1 : 0)] =
                    std::max(0.5 * (lo + hi), Grid::min_cut_fraction);
            }
        }
    }
    if (interior == 0)
        throw Error(ErrorKind::resolution_too_coarse,
                    "no interior node at resolution n=" + std::to_string(n));
    return g;
}

} // namespace degen

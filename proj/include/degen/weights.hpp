#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "degen/error.hpp"
#include "degen/expression.hpp"
#include "degen/grid.hpp"

namespace degen {

/// One branch of a radial profile: |P(r)|^exponent on [r_min, r_max],
/// with P given by ascending polynomial coefficients.
struct RadialPiece {
    double r_min = 0;
    double r_max = 0;
    std::vector<double> coefficients;
    double exponent = 1;

    double operator()(double r) const {
        double p = 0;
        for (std::size_t k = coefficients.size(); k-- > 0;) p = p * r + coefficients[k];
        return std::pow(std::fabs(p), exponent);
    }
};

/// Factor |d(x)|^exponent with d the signed distance to a sphere or a hyperplane.
struct PowerFactor {
    enum class Shape { sphere, plane };
    Shape shape = Shape::sphere;
    std::vector<double> point; // sphere centre, or a point on the plane
    double radius = 0;
    std::vector<double> normal;
    double exponent = 1;

    double distance(std::span<const double> x) const {
        double s = 0;
        if (shape == Shape::sphere) {
            for (std::size_t k = 0; k < point.size(); ++k) s += (x[k] - point[k]) * (x[k] - point[k]);
            return std::sqrt(s) - radius;
        }
        for (std::size_t k = 0; k < point.size(); ++k) s += normal[k] * (x[k] - point[k]);
        return s;
    }
};

struct WeightSpec {
    enum class Kind { constant, radial_piecewise, product_of_powers, custom_expression };

    Kind kind = Kind::constant;
    double scale = 1;
    std::vector<double> center; // radial_piecewise
    std::vector<RadialPiece> pieces;
    std::vector<PowerFactor> factors;
    SpatialFunction custom;
    std::string expression;

    static WeightSpec constant(double c) {
        WeightSpec w;
        w.kind = Kind::constant;
        w.scale = c;
        return w;
    }

    static WeightSpec radial(std::vector<double> c, std::vector<RadialPiece> p, double s = 1) {
        WeightSpec w;
        w.kind = Kind::radial_piecewise;
        w.center = std::move(c);
        w.pieces = std::move(p);
        w.scale = s;
        return w;
    }

    static WeightSpec product(std::vector<PowerFactor> f, double s = 1) {
        WeightSpec w;
        w.kind = Kind::product_of_powers;
        w.factors = std::move(f);
        w.scale = s;
        return w;
    }

    static WeightSpec custom_function(SpatialFunction fn, std::string description = "custom") {
        WeightSpec w;
        w.kind = Kind::custom_expression;
        w.custom = std::move(fn);
        w.expression = std::move(description);
        return w;
    }

    static WeightSpec custom_expression_of(const std::string& expr, std::size_t dimension, double s = 1) {
        WeightSpec w;
        w.kind = Kind::custom_expression;
        w.custom = spatial_function(Expression::compile(expr, spatial_variables(dimension)), dimension);
        w.expression = expr;
        w.scale = s;
        return w;
    }

    /// Two-zone radial profile: cbrt(1 - r^2) on [0,1],
    /// sqrt((1 - r)(r - 2)) on (1,2], in any dimension.
    static WeightSpec two_zone_radial(std::size_t dimension, double s = 1) {
        return radial(std::vector<double>(dimension, 0.0),
                      {RadialPiece{0.0, 1.0, {1.0, 0.0, -1.0}, 1.0 / 3.0},
                       RadialPiece{1.0, 2.0, {-2.0, 3.0, -1.0}, 0.5}},
                      s);
    }

    /// Evaluates a at x. Radial profiles are extended by their end value past the last piece.
    double operator()(std::span<const double> x) const {
        switch (kind) {
        case Kind::constant:
            return scale;
        case Kind::radial_piecewise: {
            double s = 0;
            for (std::size_t k = 0; k < center.size(); ++k) s += (x[k] - center[k]) * (x[k] - center[k]);
            const double r = std::min(std::sqrt(s), pieces.back().r_max);
            for (const auto& piece : pieces)
                if (r <= piece.r_max) return scale * piece(r);
            return scale * pieces.back()(r);
        }
        case Kind::product_of_powers: {
            double v = scale;
            for (const auto& f : factors) v *= std::pow(std::fabs(f.distance(x)), f.exponent);
            return v;
        }
        case Kind::custom_expression:
            return scale * custom(x);
        }
        return 0;
    }

    void validate(std::size_t dimension) const {
        if (!(scale > 0) || !std::isfinite(scale))
            throw Error(ErrorKind::invalid_weight, "weight scale must be positive and finite");
        switch (kind) {
        case Kind::constant: break;
        case Kind::radial_piecewise: {
            if (center.size() != dimension)
                throw Error(ErrorKind::invalid_weight, "radial centre does not match the dimension");
            if (pieces.empty())
                throw Error(ErrorKind::invalid_weight, "radial profile needs at least one piece");
            double r = 0;
            for (const auto& p : pieces) {
                if (std::fabs(p.r_min - r) > 1e-12 || !(p.r_max > p.r_min))
                    throw Error(ErrorKind::invalid_weight, "radial pieces must tile [0, r_last] in order");
                if (p.coefficients.empty())
                    throw Error(ErrorKind::invalid_weight, "radial piece without coefficients");
                r = p.r_max;
            }
            break;
        }
        case Kind::product_of_powers:
            for (const auto& f : factors) {
                if (f.point.size() != dimension ||
                    (f.shape == PowerFactor::Shape::plane && f.normal.size() != dimension))
                    throw Error(ErrorKind::invalid_weight, "factor geometry does not match the dimension");
                if (!(f.exponent > 0))
                    throw Error(ErrorKind::invalid_weight, "factor exponents must be positive");
            }
            break;
        case Kind::custom_expression:
            if (!custom) throw Error(ErrorKind::invalid_weight, "custom weight without an evaluator");
            break;
        }
    }

    /// Closed-form description used in reports.
    std::string reference() const {
        std::ostringstream os;
        os.precision(17);
        switch (kind) {
        case Kind::constant: os << "a(x) = " << scale; break;
        case Kind::radial_piecewise:
            os << scale << " * radial profile with " << pieces.size() << " piece(s)";
            break;
        case Kind::product_of_powers:
            os << scale << " * product of " << factors.size() << " distance power(s)";
            break;
        case Kind::custom_expression: os << scale << " * (" << expression << ")"; break;
        }
        return os.str();
    }
};

/// Minimum of a along one lattice edge.
struct EdgeMinimum {
    double value = 0;
    double position = 0; // fraction along the edge from its lower-index node
    bool vanishes = false;
};

/// Nodal weight values plus the edge data derived from them.
///
/// Edge e = node * N + axis joins `node` and `node + stride(axis)`.
struct WeightField {
    std::vector<double> values;        // per node, 0 on exterior nodes
    double a_max = 0;                  // max over interior nodes
    double zero_threshold = 1e-6;      // relative to a_max
    std::vector<double> conductance;   // per edge, arithmetic mean of endpoint values
    std::vector<EdgeMinimum> edge_min; // per edge joining two interior nodes
    SpatialFunction evaluate;

    double edge_conductance(std::size_t node, std::size_t axis, int dir, const Grid& grid) const {
        const std::size_t n = grid.dimension();
        if (dir > 0) return conductance[node * n + axis];
        return conductance[(node - grid.stride(axis)) * n + axis];
    }
};

namespace detail {

// Power-law vanishing test: a zero of a continuous nonnegative function keeps
// decreasing as the probe scale shrinks, a positive minimum does not.
inline constexpr double vanishing_ratio = 0.1;
inline constexpr double vanishing_probe = 1e-6;

inline EdgeMinimum edge_minimum(const SpatialFunction& a, std::span<const double> x0,
                                std::span<const double> x1) {
    const std::size_t dim = x0.size();
    double buf[16];
    auto eval = [&](double t) {
        for (std::size_t k = 0; k < dim; ++k) buf[k] = x0[k] + t * (x1[k] - x0[k]);
        return a(std::span<const double>(buf, dim));
    };
    constexpr int samples = 16;
    int best = 0;
    double best_v = eval(0.0);
    for (int k = 1; k <= samples; ++k) {
        const double v = eval(static_cast<double>(k) / samples);
        if (v < best_v) {
            best_v = v;
            best = k;
        }
    }
    double lo = static_cast<double>(std::max(best - 1, 0)) / samples;
    double hi = static_cast<double>(std::min(best + 1, samples)) / samples;
    constexpr double inv_phi = 0.6180339887498949;
    double c = hi - inv_phi * (hi - lo), d = lo + inv_phi * (hi - lo);
    double fc = eval(c), fd = eval(d);
    for (int it = 0; it < 80 && hi - lo > 1e-17; ++it) {
        if (fc < fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = eval(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = eval(d);
        }
    }
    double t = fc < fd ? c : d;
    double v = std::min(fc, fd);
    if (best_v < v) {
        v = best_v;
        t = static_cast<double>(best) / samples;
    }

    double probe = std::numeric_limits<double>::infinity();
    if (t - vanishing_probe >= 0) probe = std::min(probe, eval(t - vanishing_probe));
    if (t + vanishing_probe <= 1) probe = std::min(probe, eval(t + vanishing_probe));

    EdgeMinimum out;
    out.value = v;
    out.position = t;
    out.vanishes = v == 0 || (std::isfinite(probe) && v < vanishing_ratio * probe);
    return out;
}

} // namespace detail

/// Samples a on the interior and domain-boundary nodes and derives edge conductances
/// and per-edge minima.
inline WeightField evaluate_weight(const WeightSpec& spec, const Grid& grid, double zero_threshold = 1e-6) {
    const std::size_t dim = grid.dimension();
    spec.validate(dim);
    if (!(zero_threshold > 0 && zero_threshold < 1))
        throw Error(ErrorKind::precondition, "zero threshold must lie in (0, 1)");

    WeightField field;
    field.zero_threshold = zero_threshold;
    field.evaluate = [spec](std::span<const double> x) { return spec(x); };
    field.values.assign(grid.node_count(), 0.0);

    std::vector<double> x(dim);
    for (std::size_t node = 0; node < grid.node_count(); ++node) {
        if (grid.node_class(node) == NodeClass::exterior) continue;
        grid.coordinates(node, x);
        const double v = spec(x);
        if (!std::isfinite(v) || v < 0) {
            std::ostringstream os;
            os << "weight evaluates to " << v << " at node " << node;
            throw Error(ErrorKind::invalid_weight, os.str());
        }
        field.values[node] = v;
        if (grid.is_interior(node)) field.a_max = std::max(field.a_max, v);
    }
    if (!(field.a_max > 0))
        throw Error(ErrorKind::invalid_weight, "weight vanishes on every interior node");

    const double floor = zero_threshold * field.a_max;
    field.conductance.assign(grid.node_count() * dim, 0.0);
    field.edge_min.assign(grid.node_count() * dim, EdgeMinimum{});
    std::vector<double> y(dim);
    for (std::size_t node = 0; node < grid.node_count(); ++node) {
        for (std::size_t k = 0; k < dim; ++k) {
            const std::size_t nb = grid.neighbor(node, k, +1);
            if (nb == no_node) continue;
            const bool a_in = grid.is_interior(node), b_in = grid.is_interior(nb);
            if (!a_in && !b_in) continue;
            const double va = field.values[node], vb = field.values[nb];
            const std::size_t e = node * dim + k;
            field.conductance[e] = (va < floor && vb < floor) ? 0.0 : 0.5 * (va + vb);
            if (a_in && b_in) {
                grid.coordinates(node, x);
                grid.coordinates(nb, y);
                field.edge_min[e] = detail::edge_minimum(field.evaluate, x, y);
            }
        }
    }
    return field;
}

/// Grid-resolved approximation of a^{-1}(0) inside the domain.
struct ZeroSet {
    std::vector<char> mask; // per node
    double threshold = 1e-6;
    bool touches_domain_boundary = false;

    bool contains(std::size_t node) const { return mask[node] != 0; }
    std::size_t size() const {
        return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), char{1}));
    }
};

/// Marks interior nodes where a is below threshold * a_max, and for every interior
/// edge on which a vanishes (below threshold, or a power-law zero) the endpoint
/// closer to the zero. Every discrete path crossing a zero hypersurface then meets
/// a marked node.
inline ZeroSet detect_zero_set(const WeightField& field, const Grid& grid, double threshold) {
    if (!(threshold > 0 && threshold < 1))
        throw Error(ErrorKind::precondition, "zero threshold must lie in (0, 1)");
    const std::size_t dim = grid.dimension();
    ZeroSet z;
    z.threshold = threshold;
    z.mask.assign(grid.node_count(), 0);
    const double floor = threshold * field.a_max;

    for (std::size_t node = 0; node < grid.node_count(); ++node) {
        if (!grid.is_interior(node)) continue;
        if (field.values[node] < floor) z.mask[node] = 1;
        for (std::size_t k = 0; k < dim; ++k) {
            const std::size_t nb = grid.neighbor(node, k, +1);
            if (nb == no_node || !grid.is_interior(nb)) continue;
            const EdgeMinimum& m = field.edge_min[node * dim + k];
            if (m.value < floor || m.vanishes) z.mask[m.position <= 0.5 ? node : nb] = 1;
        }
    }

    for (std::size_t node = 0; node < grid.node_count() && !z.touches_domain_boundary; ++node) {
        if (!z.mask[node]) continue;
        for (std::size_t k = 0; k < dim; ++k)
            for (int dir : {-1, 1})
                if (grid.node_class(grid.neighbor(node, k, dir)) == NodeClass::domain_boundary)
                    z.touches_domain_boundary = true;
    }
    return z;
}

inline ZeroSet detect_zero_set(const WeightField& field, const Grid& grid) {
    return detect_zero_set(field, grid, field.zero_threshold);
}

/// Cell-centred quadrature lattice with `subdivisions` points per cell and axis,
/// carrying a floored at threshold * a_max, adaptive per-cell means of a and 1/a,
/// and prefix sums of those means along the last axis.
class QuadratureLattice {
public:
    QuadratureLattice(const WeightField& field, const Grid& grid, std::size_t subdivisions = 0)
        : dim_(grid.dimension()) {
        m_ = subdivisions ? subdivisions : default_subdivisions(dim_);
        hq_ = grid.spacing() / static_cast<double>(m_);
        origin_.assign(grid.origin().begin(), grid.origin().end());
        extents_.resize(dim_);
        for (std::size_t k = 0; k < dim_; ++k) extents_[k] = (grid.extents()[k] - 1) * m_;
        strides_.assign(dim_, 1);
        for (std::size_t k = dim_ - 1; k-- > 0;) strides_[k] = strides_[k + 1] * extents_[k + 1];
        const std::size_t total = strides_[0] * extents_[0];

        const double floor = field.zero_threshold * field.a_max;
        a_.assign(total, 0.0);
        mean_a_.assign(total, 0.0);
        mean_inv_.assign(total, 0.0);
        mean_inside_.assign(total, 0.0);
        inside_.assign(total, 0);
        std::vector<double> x(dim_);
        const DomainSpec& domain = grid.domain();
        domain_ = &domain;
        for (std::size_t q = 0; q < total; ++q) {
            point(q, x);
            if (!(domain.level(x) < 0)) continue;
            const double v = checked(field, x, floor);
            a_[q] = v;
            const CellMeans means = cell_means(field, x, hq_, gauss_means(field, x, hq_, floor), floor, 0);
            mean_a_[q] = means.a;
            mean_inv_[q] = means.inv;
            mean_inside_[q] = means.inside;
            inside_[q] = 1;
            ++inside_count_;
        }

        domain_ = nullptr;
        prefix_a_.assign(total, 0.0);
        prefix_inv_.assign(total, 0.0);
        prefix_count_.assign(total, 0.0);
        const std::size_t len = extents_[dim_ - 1];
        for (std::size_t row = 0; row < total; row += len) {
            double sa = 0, si = 0, sc = 0;
            for (std::size_t j = 0; j < len; ++j) {
                const std::size_t q = row + j;
                if (inside_[q]) {
                    sa += mean_a_[q];
                    si += mean_inv_[q];
                    sc += mean_inside_[q];
                }
                prefix_a_[q] = sa;
                prefix_inv_[q] = si;
                prefix_count_[q] = sc;
            }
        }
    }

    /// Depth limit of the adaptive cell averages; each level halves the cell width.
    static constexpr int max_depth = 8;
    static constexpr double refine_tolerance = 0.02;

    static std::size_t default_subdivisions(std::size_t dim) { return dim == 2 ? 4 : (dim == 3 ? 2 : 1); }

    std::size_t subdivisions() const noexcept { return m_; }
    double spacing() const noexcept { return hq_; }
    std::size_t inside_count() const noexcept { return inside_count_; }

    void point(std::size_t q, std::span<double> x) const {
        for (std::size_t k = 0; k < dim_; ++k) {
            const std::size_t i = (q / strides_[k]) % extents_[k];
            x[k] = origin_[k] + hq_ * (static_cast<double>(i) + 0.5);
        }
    }

    /// h_q^N * sum over inside points of a^{-t}.
    double integral_of_inverse_power(double t) const {
        double s = 0;
        for (std::size_t q = 0; q < a_.size(); ++q)
            if (inside_[q]) s += std::pow(a_[q], -t);
        return s * std::pow(hq_, static_cast<double>(dim_));
    }

    struct BallSums {
        double a = 0, inv = 0, count = 0;
    };

    /// Sums of a, 1/a and point count over inside points with |x - c| <= radius.
    BallSums ball(std::span<const double> c, double radius) const {
        BallSums out;
        accumulate(c, radius * radius, 0, 0, out);
        return out;
    }

private:
    // integrals over the inside part of a cell, divided by the cell volume
    struct CellMeans {
        double a = 0, inv = 0, inside = 0;
    };

    static double checked(const WeightField& field, std::span<const double> x, double floor) {
        const double v = field.evaluate(x);
        if (!std::isfinite(v) || v < 0)
            throw Error(ErrorKind::invalid_weight, "weight is negative or not finite inside the domain");
        return std::max(v, floor);
    }

    // Means of a and 1/a over the cube of side `width` centred at c, from the 2^N-point
    // Gauss rule; the cube is split into 2^N children while the children disagree with
    // the parent rule. Gauss offsets keep samples off the dyadic points where zero sets
    // of closed-form weights tend to pass.
    CellMeans gauss_means(const WeightField& field, std::span<const double> c, double width, double floor) const {
        constexpr double g = 0.28867513459481287; // 1 / (2 sqrt 3)
        const std::size_t points = std::size_t{1} << dim_;
        std::vector<double> y(dim_);
        CellMeans out;
        for (std::size_t k = 0; k < points; ++k) {
            for (std::size_t d = 0; d < dim_; ++d) y[d] = c[d] + ((k >> d) & 1 ? g : -g) * width;
            if (!(domain_->level(y) < 0)) continue;
            const double v = checked(field, y, floor);
            out.a += v;
            out.inv += 1.0 / v;
            out.inside += 1.0;
        }
        out.a /= static_cast<double>(points);
        out.inv /= static_cast<double>(points);
        out.inside /= static_cast<double>(points);
        return out;
    }

    CellMeans cell_means(const WeightField& field, std::span<const double> c, double width, const CellMeans& parent,
                         double floor, int depth) const {
        const std::size_t children = std::size_t{1} << dim_;
        const double n = static_cast<double>(children);
        std::vector<std::vector<double>> centres(children, std::vector<double>(dim_));
        std::vector<CellMeans> parts(children);
        CellMeans out;
        for (std::size_t k = 0; k < children; ++k) {
            for (std::size_t d = 0; d < dim_; ++d) centres[k][d] = c[d] + ((k >> d) & 1 ? 0.25 : -0.25) * width;
            parts[k] = gauss_means(field, centres[k], 0.5 * width, floor);
            out.a += parts[k].a / n;
            out.inv += parts[k].inv / n;
            out.inside += parts[k].inside / n;
        }
        const bool settled = std::fabs(out.inv - parent.inv) <= refine_tolerance * out.inv &&
                             std::fabs(out.a - parent.a) <= refine_tolerance * out.a;
        if (settled || depth >= max_depth) return out;
        out = {};
        for (std::size_t k = 0; k < children; ++k) {
            const CellMeans child = cell_means(field, centres[k], 0.5 * width, parts[k], floor, depth + 1);
            out.a += child.a / n;
            out.inv += child.inv / n;
            out.inside += child.inside / n;
        }
        return out;
    }

    void accumulate(std::span<const double> c, double r2, std::size_t axis, std::size_t base,
                    BallSums& out) const {
        const double r = std::sqrt(std::max(r2, 0.0));
        const double lo_f = std::ceil((c[axis] - r - origin_[axis]) / hq_ - 0.5);
        const double hi_f = std::floor((c[axis] + r - origin_[axis]) / hq_ - 0.5);
        const double last = static_cast<double>(extents_[axis]) - 1;
        const double lo_c = std::max(lo_f, 0.0), hi_c = std::min(hi_f, last);
        if (hi_c < lo_c) return;
        const auto lo = static_cast<std::size_t>(lo_c), hi = static_cast<std::size_t>(hi_c);
        if (axis + 1 == dim_) {
            const std::size_t q1 = base + hi;
            out.a += prefix_a_[q1];
            out.inv += prefix_inv_[q1];
            out.count += prefix_count_[q1];
            if (lo > 0) {
                const std::size_t q0 = base + lo - 1;
                out.a -= prefix_a_[q0];
                out.inv -= prefix_inv_[q0];
                out.count -= prefix_count_[q0];
            }
            return;
        }
        for (std::size_t i = lo; i <= hi; ++i) {
            const double dx = origin_[axis] + hq_ * (static_cast<double>(i) + 0.5) - c[axis];
            const double rem = r2 - dx * dx;
            if (rem < 0) continue;
            accumulate(c, rem, axis + 1, base + i * strides_[axis], out);
        }
    }

    std::size_t dim_;
    std::size_t m_ = 1;
    double hq_ = 0;
    std::vector<double> origin_;
    std::vector<std::size_t> extents_;
    std::vector<std::size_t> strides_;
    std::vector<double> a_; // centre samples
    std::vector<double> mean_a_, mean_inv_, mean_inside_;
    const DomainSpec* domain_ = nullptr;
    std::vector<char> inside_;
    std::size_t inside_count_ = 0;
    std::vector<double> prefix_a_, prefix_inv_, prefix_count_;
};

/// Balls centred at every interior node with radii r0 * h * 2^k up to `largest_radius`.
struct BallFamily {
    double smallest_radius_in_spacings = 2;
    double largest_radius = 0; // 0: half the widest bounding-box side
};

/// Max over the ball family of (mean of a) * (mean of 1/a); p = 2.
inline double estimate_a2_constant(const QuadratureLattice& lattice, const Grid& grid,
                                   const BallFamily& family = {}) {
    double largest = family.largest_radius;
    if (!(largest > 0)) {
        for (std::size_t k = 0; k < grid.dimension(); ++k)
            largest = std::max(largest, 0.5 * (grid.domain().upper[k] - grid.domain().lower[k]));
    }
    std::vector<double> radii;
    for (double r = family.smallest_radius_in_spacings * grid.spacing(); r <= largest * (1 + 1e-12); r *= 2)
        radii.push_back(r);
    if (radii.empty()) radii.push_back(largest);

    double best = 1.0;
    std::vector<double> c(grid.dimension());
    for (std::size_t node = 0; node < grid.node_count(); ++node) {
        if (!grid.is_interior(node)) continue;
        grid.coordinates(node, c);
        for (double r : radii) {
            const auto s = lattice.ball(c, r);
            if (s.count <= 0) continue;
            best = std::max(best, (s.a / s.count) * (s.inv / s.count));
        }
    }
    return best;
}

inline double estimate_a2_constant(const WeightField& field, const Grid& grid, const BallFamily& family = {}) {
    return estimate_a2_constant(QuadratureLattice(field, grid), grid, family);
}

/// Quadrature estimate of |1/a|_{L^t(domain)}.
inline double estimate_lt_norm(const QuadratureLattice& lattice, double t) {
    if (!(t >= 1)) throw Error(ErrorKind::precondition, "L^t norms need t >= 1");
    return std::pow(lattice.integral_of_inverse_power(t), 1.0 / t);
}

inline double estimate_lt_norm(const WeightField& field, const Grid& grid, double t) {
    return estimate_lt_norm(QuadratureLattice(field, grid), t);
}

} // namespace degen

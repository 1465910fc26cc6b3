#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "degen/error.hpp"
#include "degen/expression.hpp"

namespace degen {

/// Nonlinearity f with its structural constants: slope gamma at 0+, positive zero
/// s_star, and truncation depth beta_star (f > 0 on [-beta_star, 0)).
struct NonlinearitySpec {
    enum class Kind { logistic_default, custom };

    Kind kind = Kind::logistic_default;
    double gamma = 1;
    double s_star = 1;
    double beta_star = 0.5;
    std::function<double(double)> custom;
    std::string expression;

    /// f(s) = gamma |s| (1 - s / s_star) for s <= s_star, and 0 beyond.
    static NonlinearitySpec logistic(double gamma, double s_star, double beta_star = 0) {
        NonlinearitySpec f;
        f.kind = Kind::logistic_default;
        f.gamma = gamma;
        f.s_star = s_star;
        f.beta_star = beta_star > 0 ? beta_star : 0.5 * s_star;
        return f;
    }

    static NonlinearitySpec custom_function(std::function<double(double)> fn, double gamma, double s_star,
                                            double beta_star, std::string description = "custom") {
        NonlinearitySpec f;
        f.kind = Kind::custom;
        f.custom = std::move(fn);
        f.gamma = gamma;
        f.s_star = s_star;
        f.beta_star = beta_star > 0 ? beta_star : 0.5 * s_star;
        f.expression = std::move(description);
        return f;
    }

    /// Expression in the variable `s`.
    static NonlinearitySpec custom_expression(const std::string& expr, double gamma, double s_star,
                                              double beta_star) {
        const Expression e = Expression::compile(expr, {"s"});
        return custom_function([e](double s) { return e(std::span<const double>(&s, 1)); }, gamma, s_star,
                               beta_star, expr);
    }

    double operator()(double s) const {
        if (kind == Kind::logistic_default) {
            if (s >= s_star) return 0.0;
            return gamma * std::fabs(s) * (1.0 - s / s_star);
        }
        return custom(s);
    }

    /// The nonlinearity lambda * f.
    NonlinearitySpec scaled(double lambda) const {
        NonlinearitySpec out = *this;
        out.gamma = lambda * gamma;
        if (kind == Kind::custom) {
            auto base = custom;
            out.custom = [base, lambda](double s) { return lambda * base(s); };
        }
        return out;
    }

    std::string reference() const {
        std::ostringstream os;
        os.precision(17);
        if (kind == Kind::logistic_default)
            os << "f(s) = " << gamma << " |s| (1 - s/" << s_star << ")";
        else
            os << "f(s) = " << expression;
        return os.str();
    }
};

/// Sampled check of the sign structure required of f, plus the slope at 0+.
inline void validate_nonlinearity(const NonlinearitySpec& f) {
    auto fail = [](Hypothesis h, const std::string& msg) {
        throw Error(ErrorKind::invalid_nonlinearity, "nonlinearity violates (" +
                                                         std::string(to_string(h)) + "): " + msg, h);
    };
    if (!(f.gamma > 0) || !(f.s_star > 0) || !(f.beta_star > 0))
        fail(Hypothesis::f1, "gamma, s_star and beta_star must be positive");
    const double scale = f.gamma * f.s_star;
    if (std::fabs(f(0.0)) > 1e-12 * scale) fail(Hypothesis::f1, "f(0) != 0");
    if (std::fabs(f(f.s_star)) > 1e-12 * scale) fail(Hypothesis::f1, "f(s_star) != 0");
    constexpr int samples = 1000;
    for (int k = 1; k < samples; ++k) {
        const double s = f.s_star * k / samples;
        const double v = f(s);
        if (!(v > 0) || !std::isfinite(v)) fail(Hypothesis::f1, "f is not positive on (0, s_star)");
    }
    for (int k = 0; k < samples; ++k) {
        const double s = -f.beta_star * (samples - k) / samples;
        const double v = f(s);
        if (!(v > 0) || !std::isfinite(v)) fail(Hypothesis::f1, "f is not positive on [-beta_star, 0)");
    }
    const double delta = 1e-6 * f.s_star;
    const double slope = f(delta) / delta;
    if (std::fabs(slope - f.gamma) > 1e-3 * f.gamma)
        fail(Hypothesis::f2, "slope of f at 0+ does not match gamma");
}

/// f_* (constant below -beta_star, f in between, 0 from s_star on) and its primitive
/// F_* with F_*(0) = 0.
class TruncatedNonlinearity {
public:
    TruncatedNonlinearity() = default;

    explicit TruncatedNonlinearity(NonlinearitySpec spec) : base_(std::move(spec)) {
        validate_nonlinearity(base_);
        floor_value_ = base_(-base_.beta_star);
        if (base_.kind == NonlinearitySpec::Kind::custom) build_tables();
        top_primitive_ = primitive_inside(base_.s_star);
        bottom_primitive_ = primitive_inside(-base_.beta_star);
    }

    const NonlinearitySpec& base() const noexcept { return base_; }

    double value(double s) const {
        if (s <= -base_.beta_star) return floor_value_;
        if (s >= base_.s_star) return 0.0;
        return base_(s);
    }

    double operator()(double s) const { return value(s); }

    double primitive(double s) const {
        if (s >= base_.s_star) return top_primitive_;
        if (s <= -base_.beta_star) return bottom_primitive_ + floor_value_ * (s + base_.beta_star);
        return primitive_inside(s);
    }

    /// F_*(s + ds) - F_*(s), integrated piecewise so that small steps keep full precision.
    double increment(double s, double ds) const {
        if (ds == 0) return 0.0;
        const double dir = ds > 0 ? 1.0 : -1.0;
        const std::array<double, 3> kinks{-base_.beta_star, 0.0, base_.s_star};
        double cur = s, left = std::fabs(ds), total = 0;
        for (std::size_t i = 0; i < kinks.size(); ++i) {
            const double k = dir > 0 ? kinks[i] : kinks[kinks.size() - 1 - i];
            const double w = dir * (k - cur);
            if (w > 0 && w < left) {
                total += simpson(std::min(cur, k), std::max(cur, k), w);
                left -= w;
                cur = k;
            }
        }
        // widths come from ds itself, never from (s + ds) - s
        const double end = cur + dir * left;
        total += simpson(std::min(cur, end), std::max(cur, end), left);
        return dir * total;
    }

private:
    double simpson(double a, double b, double width) const {
        const double m = 0.5 * (a + b);
        // evaluate each panel from its interior so the branch at a kink is the one of the panel
        const double fa = value_in_panel(a, m), fb = value_in_panel(b, m);
        return width / 6.0 * (fa + 4.0 * value(m) + fb);
    }

    // f_* at an endpoint, taken as the limit from the side of `inside`
    double value_in_panel(double s, double inside) const {
        if (s == base_.s_star && inside < s) return base_(s);
        if (s == -base_.beta_star && inside > s) return base_(s);
        return value(s);
    }

    double primitive_inside(double s) const {
        if (base_.kind == NonlinearitySpec::Kind::logistic_default) {
            const double g = base_.gamma, ss = base_.s_star;
            if (s >= 0) return g * (0.5 * s * s - s * s * s / (3.0 * ss));
            return g * (-0.5 * s * s + s * s * s / (3.0 * ss));
        }
        if (s >= 0) return tabulated(s, up_, up_width_);
        return -tabulated(-s, down_, down_width_, true);
    }

    void build_tables() {
        const std::size_t panels_up = 1000;
        up_width_ = base_.s_star / static_cast<double>(panels_up);
        up_.assign(panels_up + 1, 0.0);
        for (std::size_t k = 0; k < panels_up; ++k) {
            const double a = k * up_width_, b = (k + 1) * up_width_;
            up_[k + 1] = up_[k] + (b - a) / 6.0 * (base_(a) + 4.0 * base_(0.5 * (a + b)) + base_(b));
        }
        const auto panels_down = static_cast<std::size_t>(std::ceil(base_.beta_star / up_width_));
        down_width_ = base_.beta_star / static_cast<double>(panels_down);
        down_.assign(panels_down + 1, 0.0);
        for (std::size_t k = 0; k < panels_down; ++k) {
            const double a = -(k * down_width_), b = -((k + 1) * down_width_);
            // integral from b to a (positive orientation), accumulated as a magnitude
            down_[k + 1] = down_[k] + (a - b) / 6.0 * (base_(a) + 4.0 * base_(0.5 * (a + b)) + base_(b));
        }
    }

    // integral of f over [0, x] (or over [-x, 0] when `negative`), x >= 0
    double tabulated(double x, const std::vector<double>& table, double width, bool negative = false) const {
        const auto k = std::min(static_cast<std::size_t>(x / width), table.size() - 1);
        const double a = k * width;
        const double sign = negative ? -1.0 : 1.0;
        auto f = [&](double t) { return base_(sign * t); };
        return table[k] + (x - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + x)) + f(x));
    }

    NonlinearitySpec base_;
    double floor_value_ = 0;
    double top_primitive_ = 0;
    double bottom_primitive_ = 0;
    std::vector<double> up_, down_;
    double up_width_ = 0, down_width_ = 0;
};

inline TruncatedNonlinearity truncate_nonlinearity(const NonlinearitySpec& spec) {
    return TruncatedNonlinearity(spec);
}

inline double primitive_F(const TruncatedNonlinearity& trunc, double s) { return trunc.primitive(s); }

} // namespace degen

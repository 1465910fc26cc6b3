#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "support.hpp"

using namespace degen;
using testing_support::whole_interior;

namespace {

// composite Simpson with many panels, independent of the library's primitive
double integrate(const std::function<double(double)>& f, double a, double b, int panels = 20000) {
    const double w = (b - a) / panels;
    double s = 0;
    for (int k = 0; k < panels; ++k) {
        const double x0 = a + k * w, x1 = x0 + w;
        s += w / 6 * (f(x0) + 4 * f(0.5 * (x0 + x1)) + f(x1));
    }
    return s;
}

struct TwoZoneDisk {
    Grid grid = testing_support::disk2_grid(65);
    WeightField field = evaluate_weight(WeightSpec::two_zone_radial(2), grid);
    Decomposition dec = decompose_components(grid, detect_zero_set(field, grid));
    const Component& disk() const {
        for (const auto& c : dec.components)
            if (c.boundary_manifold_count == 1) return c;
        throw std::logic_error("no disk component");
    }
};

} // namespace

TEST(Nonlinearity, TruncationBranches) {
    const double gamma = 7, s_star = 2, beta = 0.75;
    const TruncatedNonlinearity f = truncate_nonlinearity(NonlinearitySpec::logistic(gamma, s_star, beta));
    EXPECT_EQ(f(s_star + 1), 0.0);
    EXPECT_EQ(f(0.0), 0.0);
    EXPECT_DOUBLE_EQ(f(-beta - 5), gamma * beta * (1 + beta / s_star));
    EXPECT_DOUBLE_EQ(f(-beta - 5), f(-beta));
    EXPECT_DOUBLE_EQ(f(0.5), gamma * 0.5 * (1 - 0.5 / s_star));
}

TEST(Nonlinearity, DefaultBetaIsHalfOfSStar) {
    EXPECT_DOUBLE_EQ(NonlinearitySpec::logistic(3, 4).beta_star, 2.0);
}

TEST(Nonlinearity, PrimitiveClosedForm) {
    const double gamma = 7, s_star = 2, beta = 0.75;
    const TruncatedNonlinearity f = truncate_nonlinearity(NonlinearitySpec::logistic(gamma, s_star, beta));
    EXPECT_EQ(primitive_F(f, 0.0), 0.0);
    EXPECT_NEAR(primitive_F(f, s_star), gamma * s_star * s_star / 6, 1e-14);
    EXPECT_EQ(primitive_F(f, s_star + 3), primitive_F(f, s_star));
    for (double s : {-3.0, -0.75, -0.3, 0.4, 1.1, 1.99}) {
        const double ref = s >= 0 ? integrate([&](double t) { return f(t); }, 0, s)
                                  : -integrate([&](double t) { return f(t); }, s, 0);
        EXPECT_NEAR(primitive_F(f, s), ref, 1e-11) << "s = " << s;
    }
    double prev = 0;
    for (int k = 1; k <= 200; ++k) {
        const double v = primitive_F(f, s_star * k / 200);
        EXPECT_GE(v, prev);
        prev = v;
    }
}

TEST(Nonlinearity, TabulatedPrimitiveOfCustomF) {
    const auto spec = NonlinearitySpec::custom_expression("5 * abs(s) * (1 - s) * (1 + s^2)", 5, 1, 0.5);
    const TruncatedNonlinearity f = truncate_nonlinearity(spec);
    for (double s : {-2.0, -0.5, -0.2, 0.0, 0.3, 0.77, 1.0, 4.0}) {
        const double lo = std::clamp(s, -0.5, 1.0);
        double ref = lo >= 0 ? integrate(spec, 0, lo) : -integrate(spec, lo, 0);
        if (s < -0.5) ref += spec(-0.5) * (s + 0.5);
        EXPECT_NEAR(f.primitive(s), ref, 1e-10) << "s = " << s;
    }
}

TEST(Nonlinearity, IncrementMatchesPrimitiveDifference) {
    const TruncatedNonlinearity f = truncate_nonlinearity(NonlinearitySpec::logistic(10, 1));
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> s(-1.5, 2.0), ds(-1.0, 1.0);
    for (int k = 0; k < 1000; ++k) {
        const double a = s(rng), d = ds(rng);
        EXPECT_NEAR(f.increment(a, d), f.primitive(a + d) - f.primitive(a), 1e-13);
    }
    EXPECT_NEAR(f.increment(0.5, 1e-9), f(0.5) * 1e-9, 1e-23);
    EXPECT_NEAR(f.increment(0.0, -1e-9), -f(-0.5e-9) * 1e-9, 1e-23);
}

TEST(Nonlinearity, RejectsViolations) {
    auto kind = [](const NonlinearitySpec& s) {
        try {
            truncate_nonlinearity(s);
        } catch (const Error& e) {
            return e.kind();
        }
        return ErrorKind::precondition;
    };
    EXPECT_EQ(kind(NonlinearitySpec::custom_expression("10 * s * (1 - s)", 10, 1, 0.5)), ErrorKind::invalid_nonlinearity);
    EXPECT_EQ(kind(NonlinearitySpec::custom_expression("10 * abs(s) * (2 - s)", 10, 1, 0.5)), ErrorKind::invalid_nonlinearity);
    EXPECT_EQ(kind(NonlinearitySpec::custom_expression("10 * abs(s) * (1 - s)", 3, 1, 0.5)), ErrorKind::invalid_nonlinearity);
    EXPECT_EQ(kind(NonlinearitySpec::custom_expression("10 * abs(s) * (1 - s) * (s - 0.5)^2", 10, 1, 0.5)),
              ErrorKind::invalid_nonlinearity);
    EXPECT_EQ(kind(NonlinearitySpec::logistic(-1, 1)), ErrorKind::invalid_nonlinearity);
}

TEST(Energy, ZeroFieldIsCritical) {
    TwoZoneDisk r;
    const DiscreteEnergy J(r.grid, r.field, r.disk(), truncate_nonlinearity(NonlinearitySpec::logistic(10, 1)));
    const std::vector<double> zero(J.size(), 0.0);
    EXPECT_EQ(J.value(zero), 0.0);
    std::vector<double> g(J.size());
    J.gradient(zero, g);
    for (double v : g) EXPECT_EQ(v, 0.0);
}

TEST(Energy, GradientMatchesCentralDifferences) {
    TwoZoneDisk r;
    const double s_star = 1, beta = 0.5;
    const DiscreteEnergy J(r.grid, r.field, r.disk(), truncate_nonlinearity(NonlinearitySpec::logistic(10, s_star, beta)));
    ASSERT_GE(J.size(), 500u);
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> dist(-beta, s_star + 1);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> u(J.size());
        for (double& v : u) v = dist(rng);
        std::vector<double> g(J.size());
        J.gradient(u, g);
        const auto fd = oracles::central_difference_gradient([&](const std::vector<double>& x) { return J.value(x); },
                                                             u, 1e-6 * s_star);
        EXPECT_LT(oracles::relative_l2(fd, g), 1e-5);
    }
}

TEST(Energy, ChangeMatchesValueDifference) {
    TwoZoneDisk r;
    const DiscreteEnergy J(r.grid, r.field, r.disk(), truncate_nonlinearity(NonlinearitySpec::logistic(10, 1)));
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> dist(-0.5, 1.5);
    std::vector<double> u(J.size()), d(J.size()), au(J.size()), ad(J.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        u[i] = dist(rng);
        d[i] = dist(rng);
    }
    J.stiffness().multiply(u, au);
    J.stiffness().multiply(d, ad);
    std::vector<double> v(u.size());
    for (double alpha : {1.0, 0.25, 1e-3}) {
        for (std::size_t i = 0; i < u.size(); ++i) v[i] = u[i] + alpha * d[i];
        EXPECT_NEAR(J.change(u, d, alpha, au, ad), J.value(v) - J.value(u), 1e-9 * std::fabs(J.value(u)));
    }
}

TEST(Energy, SeedDirectionAndCoercivity) {
    TwoZoneDisk r;
    const Component& c = r.disk();
    const EigenPair e = dirichlet_lambda1(c, r.grid);
    const DiscreteEnergy J(r.grid, r.field, c, truncate_nonlinearity(NonlinearitySpec::logistic(10, 1)));
    auto along = [&](double s) {
        std::vector<double> u = J.restrict_to_unknowns(e.e1);
        for (double& v : u) v *= s;
        return J.value(u);
    };
    EXPECT_LT(along(1e-3), 0.0);
    EXPECT_LT(along(0.5), 0.0);
    EXPECT_GT(along(1e3), 0.0);
}

TEST(Energy, MinimizerOnUnitSquare) {
    const Grid g = testing_support::unit_square(33);
    const WeightField f = evaluate_weight(WeightSpec::constant(1), g);
    const Component c = whole_interior(g);
    const EigenPair e = dirichlet_lambda1(c, g);
    const F2Row row = check_hypothesis_f2(c, f, 30, e);
    ASSERT_TRUE(row.pass);
    const DiscreteEnergy J(g, f, c, truncate_nonlinearity(NonlinearitySpec::logistic(30, 1)));
    const BumpSolution b = minimize_energy(J, e, row);
    EXPECT_GT(b.max_u, 0.0);
    EXPECT_LE(b.max_u, 1.0);
    EXPECT_GE(b.min_u, -1e-8);
    EXPECT_LT(b.energy, 0.0);
    EXPECT_LT(b.gradient_norm, 1e-8);
    EXPECT_LT(b.gradient_norm, b.gradient_tolerance);

    const auto ref = oracles::square_fixed_point(33, 30, 1);
    ASSERT_EQ(ref.size(), b.values.size());
    double diff = 0;
    for (std::size_t i = 0; i < ref.size(); ++i) diff = std::max(diff, std::fabs(ref[i] - b.values[i]));
    EXPECT_LT(diff, 1e-4);
}

TEST(Energy, RefusesWhenF2Fails) {
    const Grid g = testing_support::unit_square(33);
    const WeightField f = evaluate_weight(WeightSpec::constant(1), g);
    const Component c = whole_interior(g);
    const EigenPair e = dirichlet_lambda1(c, g);
    const F2Row row = check_hypothesis_f2(c, f, 10, e);
    ASSERT_FALSE(row.pass);
    const DiscreteEnergy J(g, f, c, truncate_nonlinearity(NonlinearitySpec::logistic(10, 1)));
    try {
        minimize_energy(J, e, row);
        ADD_FAILURE() << "minimizer ran without (f2)";
    } catch (const Error& err) {
        EXPECT_EQ(err.hypothesis(), Hypothesis::f2);
    }

    F2Row forced = row;
    forced.pass = true;
    try {
        minimize_energy(J, e, forced);
        ADD_FAILURE() << "expected a seed failure";
    } catch (const Error& err) {
        EXPECT_EQ(err.kind(), ErrorKind::seed_failure);
    }
}

TEST(Energy, JointScalingLeavesMinimizerUnchanged) {
    TwoZoneDisk r;
    const Component& c = r.disk();
    const EigenPair e = dirichlet_lambda1(c, r.grid);
    const auto base = NonlinearitySpec::logistic(10, 1);

    const F2Row row1 = check_hypothesis_f2(c, r.field, 10, e);
    const BumpSolution b1 = minimize_energy(DiscreteEnergy(r.grid, r.field, c, truncate_nonlinearity(base)), e, row1);

    const WeightField f2 = evaluate_weight(WeightSpec::two_zone_radial(2, 2.0), r.grid);
    const F2Row row2 = check_hypothesis_f2(c, f2, 20, e);
    const BumpSolution b2 =
        minimize_energy(DiscreteEnergy(r.grid, f2, c, truncate_nonlinearity(base.scaled(2))), e, row2);

    ASSERT_EQ(b1.values.size(), b2.values.size());
    for (std::size_t i = 0; i < b1.values.size(); ++i) EXPECT_NEAR(b1.values[i], b2.values[i], 1e-8);
    EXPECT_NEAR(b2.energy / b1.energy, 2.0, 1e-10);
}

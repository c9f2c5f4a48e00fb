#include <cmath>

#include "doctest.h"
#include "statmanifold/curvature.hpp"

namespace sm = statmanifold;

namespace {

sm::VectorXd vec1(double a) {
    sm::VectorXd v(1);
    v << a;
    return v;
}

sm::VectorXd vec2(double a, double b) {
    sm::VectorXd v(2);
    v << a, b;
    return v;
}

}  // namespace

TEST_CASE("gaussian sectional curvature is constant -1/2") {
    auto fam = sm::families::gaussian();
    sm::VectorXd x = vec2(1.0, 0.0), y = vec2(0.0, 1.0);
    for (double mu : {-0.5, 0.5})
        for (double sig : {0.7, 1.0, 1.8}) {
            sm::VectorXd xi = vec2(mu, sig);
            auto riem = sm::riemann_tensor(fam, xi, 0.0);
            auto g = sm::fisher_matrix(fam, xi);
            double k = sm::sectional_curvature(riem, g, x, y);
            CHECK(k == doctest::Approx(-0.5).epsilon(2e-3));
        }
}

TEST_CASE("sectional curvature is invariant under a change of plane basis") {
    auto fam = sm::families::gaussian();
    sm::VectorXd xi = vec2(0.0, 1.0);
    auto riem = sm::riemann_tensor(fam, xi, 0.0);
    auto g = sm::fisher_matrix(fam, xi);
    double k1 = sm::sectional_curvature(riem, g, vec2(1.0, 0.0), vec2(0.0, 1.0));
    double k2 = sm::sectional_curvature(riem, g, vec2(1.0, 1.0), vec2(1.0, -2.0));
    CHECK(k1 == doctest::Approx(k2).epsilon(1e-6));
}

TEST_CASE("degenerate planes are rejected") {
    auto fam = sm::families::gaussian();
    sm::VectorXd xi = vec2(0.0, 1.0);
    auto riem = sm::riemann_tensor(fam, xi, 0.0);
    auto g = sm::fisher_matrix(fam, xi);
    CHECK_THROWS_AS(sm::sectional_curvature(riem, g, vec2(1.0, 2.0), vec2(2.0, 4.0)),
                    sm::DegeneracyError);
    CHECK_THROWS_AS(sm::sectional_curvature(riem, g, vec1(1.0), vec2(0.0, 1.0)),
                    sm::DimensionError);
}

TEST_CASE("one-parameter families carry no curvature") {
    auto fam = sm::families::gaussian_fixed_sigma(1.0);
    auto riem = sm::riemann_tensor(fam, vec1(0.2), 0.0);
    CHECK(riem.up.max_abs() == 0.0);
}

TEST_CASE("poisson natural parameter is e-flat") {
    auto fam = sm::families::poisson_natural();
    auto grid = sm::parameter_grid({{-1.0, 1.0}}, 5);
    auto r = sm::flatness_report(fam, grid, 1.0);
    CHECK(r.max_abs_gamma < 1e-5);
    CHECK(r.max_abs_riemann < 1e-4);
    CHECK(r.flat());
}

TEST_CASE("uniform-beta mixture is m-flat") {
    auto fam = sm::families::mixture_uniform_beta();
    auto grid = sm::parameter_grid({{0.1, 0.9}}, 5);
    auto r = sm::flatness_report(fam, grid, -1.0);
    CHECK(r.max_abs_gamma < 1e-5);
    CHECK(r.flat());
}

TEST_CASE("gaussian at alpha zero is not flat") {
    auto fam = sm::families::gaussian();
    auto grid = sm::parameter_grid({{-0.5, 0.5}, {0.8, 1.5}}, 2);
    auto r = sm::flatness_report(fam, grid, 0.0);
    CHECK(!r.flat_in_coefficients);
    CHECK(!r.flat_in_curvature);
    // max |R^l_kij| for constant curvature -1/2: R_{lkij} entries scale
    // like g*g/2, so the raised entries sit near 1/(2 sigma^2)
    CHECK(r.max_abs_riemann > 0.1);
}

TEST_CASE("curvature stencil respects the parameter domain") {
    auto fam = sm::families::gaussian();
    CHECK_THROWS_AS(sm::riemann_tensor(fam, vec2(0.0, 1.0), 0.0, 10.0), sm::DomainError);
}

TEST_CASE("parameter grid covers the box") {
    auto grid = sm::parameter_grid({{0.0, 1.0}, {2.0, 3.0}}, 3);
    CHECK(grid.size() == 9);
    CHECK(grid.front()[0] == 0.0);
    CHECK(grid.back()[1] == 3.0);
}

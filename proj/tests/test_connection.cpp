#include <cmath>

#include "doctest.h"
#include "statmanifold/connection.hpp"
#include "statmanifold/rng.hpp"

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

double max_diff(const sm::Tensor3& a, const sm::Tensor3& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i)
        m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    return m;
}

}  // namespace

TEST_CASE("gaussian levi-civita coefficients match the closed form") {
    auto fam = sm::families::gaussian();
    for (double sig : {0.8, 1.0, 1.7}) {
        auto gamma = sm::alpha_connection(fam, vec2(0.2, sig), 0.0);
        double s3 = sig * sig * sig;
        CHECK(gamma.first_kind(0, 0, 1) == doctest::Approx(1.0 / s3).epsilon(1e-6));
        CHECK(gamma.first_kind(0, 1, 0) == doctest::Approx(-1.0 / s3).epsilon(1e-6));
        CHECK(gamma.first_kind(1, 1, 1) == doctest::Approx(-2.0 / s3).epsilon(1e-6));
        CHECK(std::abs(gamma.first_kind(0, 0, 0)) < 1e-7);
    }
}

TEST_CASE("levi-civita coefficients agree with the metric derivative formula") {
    // Gamma^(0)_{ij,k} = (d_i g_jk + d_j g_ik - d_k g_ij) / 2, metric
    // derivatives by central differences
    auto fam = sm::families::gaussian();
    sm::VectorXd xi = vec2(0.3, 1.1);
    const int n = 2;
    const double h = 1e-4;
    std::vector<sm::MatrixXd> dg;
    for (int i = 0; i < n; ++i) {
        sm::VectorXd p = xi, m = xi;
        p[i] += h;
        m[i] -= h;
        dg.push_back((sm::fisher_matrix(fam, p).entries - sm::fisher_matrix(fam, m).entries) /
                     (2.0 * h));
    }
    auto gamma = sm::alpha_connection(fam, xi, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                double lc = 0.5 * (dg[static_cast<std::size_t>(i)](j, k) +
                                   dg[static_cast<std::size_t>(j)](i, k) -
                                   dg[static_cast<std::size_t>(k)](i, j));
                CHECK(gamma.first_kind(i, j, k) == doctest::Approx(lc).epsilon(5e-6));
            }
}

TEST_CASE("metric compatibility of the levi-civita connection") {
    auto fam = sm::families::gaussian();
    sm::VectorXd xi = vec2(-0.5, 1.4);
    auto gamma = sm::alpha_connection(fam, xi, 0.0);
    const double h = 1e-4;
    for (int k = 0; k < 2; ++k) {
        sm::VectorXd p = xi, m = xi;
        p[k] += h;
        m[k] -= h;
        sm::MatrixXd dgk =
            (sm::fisher_matrix(fam, p).entries - sm::fisher_matrix(fam, m).entries) / (2.0 * h);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                double residual =
                    dgk(i, j) - gamma.first_kind(k, i, j) - gamma.first_kind(k, j, i);
                CHECK(std::abs(residual) < 1e-5);
            }
    }
}

TEST_CASE("skewness tensor closed forms") {
    auto gauss = sm::families::gaussian();
    for (double sig : {0.9, 1.5}) {
        auto t = sm::skewness_tensor(gauss, vec2(0.0, sig));
        double s3 = sig * sig * sig;
        CHECK(t.entries(0, 0, 1) == doctest::Approx(2.0 / s3).epsilon(1e-6));
        CHECK(t.entries(1, 1, 1) == doctest::Approx(8.0 / s3).epsilon(1e-6));
        CHECK(std::abs(t.entries(0, 0, 0)) < 1e-7);
        CHECK(t.raw_asymmetry < 1e-7);
    }

    auto bern = sm::families::bernoulli();
    CHECK(std::abs(sm::skewness_tensor(bern, vec1(0.5)).entries(0, 0, 0)) < 1e-12);
}

TEST_CASE("alpha conversion round trips through the skewness tensor") {
    auto fam = sm::families::gaussian();
    sm::VectorXd xi = vec2(0.1, 1.3);
    auto t = sm::skewness_tensor(fam, xi);
    auto g1 = sm::alpha_connection(fam, xi, 1.0);
    auto gm1_direct = sm::alpha_connection(fam, xi, -1.0);
    auto gm1_converted = sm::convert_connection(g1, t, -1.0);
    CHECK(max_diff(gm1_converted.first_kind, gm1_direct.first_kind) < 1e-6);
    CHECK(gm1_converted.alpha == -1.0);
}

TEST_CASE("alpha connections interpolate between the dual pair") {
    auto fam = sm::families::gaussian();
    sm::VectorXd xi = vec2(0.0, 1.0);
    auto g0 = sm::alpha_connection(fam, xi, 0.0);
    auto g1 = sm::alpha_connection(fam, xi, 1.0);
    auto gm1 = sm::alpha_connection(fam, xi, -1.0);
    sm::Rng rng(11);
    for (int trial = 0; trial < 3; ++trial) {
        double a = 2.0 * rng.uniform() - 1.0;
        auto ga = sm::alpha_connection(fam, xi, a);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                for (int k = 0; k < 2; ++k) {
                    double mix01 = (1.0 - a) * g0.first_kind(i, j, k) + a * g1.first_kind(i, j, k);
                    double mixpm = 0.5 * (1.0 + a) * g1.first_kind(i, j, k) +
                                   0.5 * (1.0 - a) * gm1.first_kind(i, j, k);
                    CHECK(ga.first_kind(i, j, k) == doctest::Approx(mix01).epsilon(1e-6));
                    CHECK(ga.first_kind(i, j, k) == doctest::Approx(mixpm).epsilon(1e-6));
                }
    }
}

TEST_CASE("second kind christoffel symbols") {
    auto fam = sm::families::gaussian();
    for (double sig : {1.0, 2.0}) {
        sm::VectorXd xi = vec2(0.0, sig);
        auto gamma = sm::alpha_connection(fam, xi, 0.0);
        auto g = sm::fisher_matrix(fam, xi);
        auto chr = sm::christoffel_second_kind(gamma, g);
        CHECK(chr(1, 0, 0) == doctest::Approx(0.5 / sig).epsilon(1e-6));
        CHECK(chr(0, 0, 1) == doctest::Approx(-1.0 / sig).epsilon(1e-6));
        CHECK(chr(1, 1, 1) == doctest::Approx(-1.0 / sig).epsilon(1e-6));
    }
}

TEST_CASE("conversion rejects mismatched base points") {
    auto fam = sm::families::gaussian();
    auto g1 = sm::alpha_connection(fam, vec2(0.0, 1.0), 1.0);
    auto t = sm::skewness_tensor(fam, vec2(0.5, 1.0));
    CHECK_THROWS_AS(sm::convert_connection(g1, t, 0.0), sm::DimensionError);
}

TEST_CASE("bundled geometry matches the separate computations") {
    auto fam = sm::families::gaussian();
    sm::VectorXd xi = vec2(0.4, 0.9);
    for (double a : {-1.0, 0.0, 1.0}) {
        auto b = sm::metric_connection_bundle(fam, xi, a);
        auto g = sm::fisher_matrix(fam, xi);
        auto gamma = sm::alpha_connection(fam, xi, a);
        CHECK((b.metric.entries - g.entries).cwiseAbs().maxCoeff() < 1e-8);
        CHECK(max_diff(b.connection.first_kind, gamma.first_kind) < 1e-7);
    }

    auto pois = sm::families::poisson_natural();
    auto b = sm::metric_connection_bundle(pois, vec1(0.5), 1.0);
    CHECK(b.metric.entries(0, 0) == doctest::Approx(std::exp(0.5)).epsilon(1e-9));
    CHECK(std::abs(b.connection.first_kind(0, 0, 0)) < 1e-8);
}

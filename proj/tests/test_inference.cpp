#include <cmath>

#include "doctest.h"
#include "statmanifold/inference.hpp"
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

sm::MatrixXd random_spd(sm::Rng& rng, int n) {
    sm::MatrixXd a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = 2.0 * rng.uniform() - 1.0;
    return a * a.transpose() + static_cast<double>(n) * sm::MatrixXd::Identity(n, n);
}

sm::Tensor3 random_tensor(sm::Rng& rng, int n1, int n2, int n3) {
    sm::Tensor3 t(n1, n2, n3);
    for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n2; ++j)
            for (int k = 0; k < n3; ++k) t(i, j, k) = 2.0 * rng.uniform() - 1.0;
    return t;
}

// brute-force contraction oracle for the three K terms, written as plain
// nested loops over every index
void naive_k_terms(const sm::Tensor3& gamma, const sm::Tensor3& he, const sm::Tensor3& hma,
                   const sm::MatrixXd& gm, const sm::MatrixXd& ga, sm::MatrixXd& gamma2,
                   sm::MatrixXd& he2, sm::MatrixXd& hma2) {
    const int m = static_cast<int>(gm.rows());
    const int n = static_cast<int>(ga.rows());
    sm::MatrixXd gmi = gm.inverse();
    sm::MatrixXd gai = ga.inverse();

    gamma2 = sm::MatrixXd::Zero(m, m);
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
            for (int c = 0; c < m; ++c)
                for (int d = 0; d < m; ++d)
                    for (int e = 0; e < m; ++e)
                        for (int f = 0; f < m; ++f)
                            gamma2(a, b) += gamma(a, c, d) * gamma(b, e, f) * gmi(c, e) * gmi(d, f);

    he2 = sm::MatrixXd::Zero(m, m);
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l)
                    for (int c = 0; c < m; ++c)
                        for (int d = 0; d < m; ++d)
                            for (int e = 0; e < m; ++e)
                                for (int f = 0; f < m; ++f)
                                    he2(a, b) += he(k, c, e) * he(l, d, f) * ga(k, l) *
                                                 gmi(c, d) * gmi(e, a) * gmi(f, b);

    hma2 = sm::MatrixXd::Zero(m, m);
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l)
                    for (int p = 0; p < n; ++p)
                        for (int q = 0; q < n; ++q)
                            hma2(a, b) += hma(a, k, l) * hma(b, p, q) * gai(k, p) * gai(l, q);
}

}  // namespace

TEST_CASE("sample mean covariance matches the analytic variance") {
    auto fam = sm::families::gaussian_fixed_sigma(1.0);
    auto report = sm::estimator_covariance(fam, vec1(0.0), sm::estimators::sample_mean(), 100,
                                           20000, 2024);
    CHECK(report.trials == 20000);
    CHECK(report.discarded == 0);
    CHECK(std::abs(report.covariance(0, 0) - 0.01) < 3.0 * report.standard_errors(0, 0));
    CHECK(std::abs(report.bias[0]) < 3.0 * report.bias_standard_error[0]);
}

TEST_CASE("estimator covariance is deterministic in the seed") {
    auto fam = sm::families::gaussian_fixed_sigma(1.0);
    auto a = sm::estimator_covariance(fam, vec1(0.0), sm::estimators::sample_mean(), 20, 500, 5);
    auto b = sm::estimator_covariance(fam, vec1(0.0), sm::estimators::sample_mean(), 20, 500, 5);
    CHECK(a.covariance(0, 0) == b.covariance(0, 0));
    CHECK(a.mean_estimate[0] == b.mean_estimate[0]);
}

TEST_CASE("cramer-rao verdicts for mean, median and a biased estimator") {
    auto fam = sm::families::gaussian_fixed_sigma(1.0);
    auto g = sm::fisher_matrix(fam, vec1(0.0));

    auto mean_report = sm::estimator_covariance(fam, vec1(0.0), sm::estimators::sample_mean(),
                                                100, 20000, 2024);
    auto mean_verdict = sm::cramer_rao_check(mean_report, g);
    CHECK(mean_verdict.applicable);
    CHECK(mean_verdict.pass);
    CHECK(mean_verdict.near_equality);

    auto med_report = sm::estimator_covariance(fam, vec1(0.0), sm::estimators::sample_median(),
                                               101, 20000, 2024);
    auto med_verdict = sm::cramer_rao_check(med_report, g);
    CHECK(med_verdict.applicable);
    CHECK(med_verdict.pass);
    CHECK(!med_verdict.near_equality);
    double ratio = med_report.covariance(0, 0) * 101.0;
    CHECK(std::abs(ratio - M_PI / 2.0) < 0.1 * M_PI / 2.0);

    auto biased = sm::estimator_covariance(fam, vec1(0.0), sm::estimators::shifted_mean(0.5),
                                           100, 5000, 2024);
    auto biased_verdict = sm::cramer_rao_check(biased, g);
    CHECK(!biased_verdict.applicable);
}

TEST_CASE("mle estimators for the builtins") {
    auto gauss = sm::families::gaussian();
    auto est = sm::estimators::mle(gauss);
    std::vector<double> xs = {1.0, 3.0};
    auto xi = est.map(xs);
    CHECK(xi[0] == doctest::Approx(2.0));
    CHECK(xi[1] == doctest::Approx(1.0));

    auto pois = sm::estimators::mle(sm::families::poisson_natural());
    std::vector<double> counts = {2.0, 4.0};
    CHECK(pois.map(counts)[0] == doctest::Approx(std::log(3.0)));
}

TEST_CASE("induced geometry of a slice embedding") {
    sm::CurvedModelSpec model;
    model.ambient = sm::families::gaussian();
    model.model_dim = 1;
    model.u_domain = {{-2.0, 2.0}};
    model.embedding = [](const sm::VectorXd& u) { return vec2(u[0], 1.0); };
    auto geo = sm::induced_geometry(model, vec1(0.3));
    CHECK(geo.g_model(0, 0) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(geo.basis(0, 0) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(std::abs(geo.basis(1, 0)) < 1e-6);
}

TEST_CASE("embedding curvature matches a direct stencil oracle") {
    sm::CurvedModelSpec model;
    model.ambient = sm::families::gaussian();
    model.model_dim = 1;
    model.u_domain = {{-1.5, 1.5}};
    model.embedding = [](const sm::VectorXd& u) { return vec2(u[0], 1.0 + 0.25 * u[0] * u[0]); };
    sm::VectorXd u = vec1(0.5);
    const double alpha = 0.0;
    auto h = sm::embedding_curvature(model, u, alpha);
    REQUIRE(h.extent1() == 2);
    CHECK(h.max_abs() > 1e-3);

    // oracle: same defining formula, separate code with its own stencil
    const double step = 1e-4;
    auto xi_of = model.embedding;
    sm::VectorXd up = vec1(u[0] + step), um = vec1(u[0] - step);
    sm::VectorXd b = (xi_of(up) - xi_of(um)) / (2.0 * step);
    sm::VectorXd dd = (xi_of(up) - 2.0 * xi_of(u) + xi_of(um)) / (step * step);
    auto bundle = sm::metric_connection_bundle(model.ambient, xi_of(u), alpha);
    auto chr = sm::christoffel_second_kind(bundle.connection, bundle.metric);
    sm::VectorXd w(2);
    for (int k = 0; k < 2; ++k) {
        double v = dd[k];
        for (int l = 0; l < 2; ++l)
            for (int m = 0; m < 2; ++m) v += chr(k, l, m) * b[l] * b[m];
        w[k] = v;
    }
    sm::MatrixXd ga = bundle.metric.entries;
    double gmod = b.dot(ga * b);
    sm::VectorXd tangential = b * (b.dot(ga * w) / gmod);
    sm::VectorXd normal = w - tangential;
    for (int k = 0; k < 2; ++k) CHECK(h(k, 0, 0) == doctest::Approx(normal[k]).epsilon(1e-4));
}

TEST_CASE("k tensor matches the brute-force oracle on random inputs") {
    sm::Rng rng(90210);
    for (int trial = 0; trial < 100; ++trial) {
        int m = 1 + static_cast<int>(rng.uniform() * 3.0);
        int n = m + 1 + static_cast<int>(rng.uniform() * (4.0 - m));
        n = std::min(n, 4);
        sm::MatrixXd gm = random_spd(rng, m);
        sm::MatrixXd ga = random_spd(rng, n);
        sm::Tensor3 gamma = random_tensor(rng, m, m, m);
        sm::Tensor3 he = random_tensor(rng, n, m, m);
        sm::Tensor3 hma = random_tensor(rng, m, n, n);

        auto terms = sm::k_tensor(gamma, he, hma, gm, ga);
        sm::MatrixXd gamma2, he2, hma2;
        naive_k_terms(gamma, he, hma, gm, ga, gamma2, he2, hma2);

        CHECK((terms.gamma_m_sq - gamma2).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((terms.h_e_sq - he2).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((terms.h_m_a_sq - hma2).cwiseAbs().maxCoeff() < 1e-12);
        sm::MatrixXd assembled = terms.gamma_m_sq + 2.0 * terms.h_e_sq + terms.h_m_a_sq;
        CHECK((terms.k - assembled).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("poisson natural model has the closed-form second-order term") {
    sm::CurvedModelSpec model;
    model.ambient = sm::families::poisson_natural();
    model.model_dim = 1;
    model.u_domain = {{-1.0, 2.0}};
    model.embedding = [](const sm::VectorXd& u) { return u; };

    double theta = 0.5;
    sm::VectorXd u = vec1(theta);
    auto geo = sm::induced_geometry(model, u);
    CHECK(geo.g_model(0, 0) == doctest::Approx(std::exp(theta)).epsilon(1e-8));

    auto mf = sm::model_as_family(model);
    auto bundle = sm::metric_connection_bundle(mf, u, -1.0);
    auto gamma_m = sm::christoffel_second_kind(bundle.connection, bundle.metric);
    CHECK(gamma_m(0, 0, 0) == doctest::Approx(1.0).epsilon(1e-6));

    auto he = sm::embedding_curvature(model, u, 1.0);
    CHECK(he.max_abs() < 1e-5);

    auto terms = sm::k_tensor(gamma_m, he, sm::Tensor3(1, 1, 1), geo.g_model, geo.g_ambient);
    CHECK(terms.k(0, 0) == doctest::Approx(std::exp(-2.0 * theta)).epsilon(1e-4));

    sm::MatrixXd mse = sm::asymptotic_mse(geo.g_model, terms.k, 100);
    double expected = std::exp(-theta) / 100.0 + std::exp(-2.0 * theta) / 20000.0;
    CHECK(mse(0, 0) == doctest::Approx(expected).epsilon(1e-4));
}

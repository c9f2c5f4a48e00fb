#include <cmath>

#include "doctest.h"
#include "statmanifold/family.hpp"

namespace sm = statmanifold;

namespace {

sm::VectorXd vec2(double a, double b) {
    sm::VectorXd v(2);
    v << a, b;
    return v;
}

sm::VectorXd vec1(double a) {
    sm::VectorXd v(1);
    v << a;
    return v;
}

}  // namespace

TEST_CASE("gaussian log density and score closed forms") {
    auto fam = sm::families::gaussian();
    sm::VectorXd xi = vec2(0.0, 1.0);
    CHECK(fam.log_density(0.0, xi) == doctest::Approx(-0.5 * std::log(2.0 * M_PI)).epsilon(1e-12));

    sm::VectorXd s = fam.score(1.0, xi);
    CHECK(s[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s[1] == doctest::Approx(0.0).epsilon(1e-12));

    sm::VectorXd xi2 = vec2(0.5, 2.0);
    sm::VectorXd s2 = fam.score(1.5, xi2);
    CHECK(s2[0] == doctest::Approx((1.5 - 0.5) / 4.0).epsilon(1e-12));
    CHECK(s2[1] == doctest::Approx(-0.5 + 1.0 / 8.0).epsilon(1e-12));
}

TEST_CASE("poisson natural log density and score") {
    auto fam = sm::families::poisson_natural();
    CHECK(fam.log_density(0.0, vec1(0.0)) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(fam.score(2.0, vec1(0.0))[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("finite differences agree with the analytic score") {
    auto fam = sm::families::gaussian();
    sm::VectorXd xi = vec2(0.3, 0.7);
    for (double x : {-1.0, 0.0, 0.4, 2.0}) {
        sm::VectorXd a = fam.score(x, xi);
        sm::VectorXd fd = fam.score_finite_difference(x, xi);
        CHECK((a - fd).cwiseAbs().maxCoeff() < 1e-7);
    }
}

TEST_CASE("log density hessian matches gaussian closed form") {
    auto fam = sm::families::gaussian();
    sm::VectorXd xi = vec2(0.0, 1.0);
    sm::MatrixXd h = fam.log_density_hessian(1.0, xi);
    CHECK(h(0, 0) == doctest::Approx(-1.0).epsilon(1e-5));
    CHECK(h(0, 1) == doctest::Approx(-2.0).epsilon(1e-5));
    CHECK(h(1, 0) == doctest::Approx(h(0, 1)).epsilon(1e-12));
    CHECK(h(1, 1) == doctest::Approx(-2.0).epsilon(1e-5));
}

TEST_CASE("domain and support violations throw the right errors") {
    auto fam = sm::families::gaussian();
    CHECK_THROWS_AS(fam.log_density(0.0, vec2(0.0, -1.0)), sm::DomainError);
    CHECK_THROWS_AS(fam.score(0.0, vec2(0.0, 0.0)), sm::DomainError);

    auto bern = sm::families::bernoulli();
    CHECK_THROWS_AS(bern.log_density(0.5, vec1(0.5)), sm::SupportError);
}

TEST_CASE("sampler is deterministic in the seed") {
    auto fam = sm::families::gaussian();
    sm::VectorXd xi = vec2(0.0, 1.0);
    auto a = fam.sample(xi, 42, 100);
    auto b = fam.sample(xi, 42, 100);
    auto c = fam.sample(xi, 43, 100);
    CHECK(a == b);
    CHECK(a != c);
}

TEST_CASE("exponential family constructor reproduces the poisson normalizer") {
    sm::ExponentialFamilySpec spec;
    spec.carrier = [](double x) { return -std::lgamma(x + 1.0); };
    spec.statistics = {[](double x) { return x; }};
    spec.support = sm::Support::naturals();
    auto fam = sm::make_exponential_family(spec, sm::ParameterDomain{{{-5.0, 3.0}}, {}, 1e-6});

    // psi(theta) = e^theta, so log p(0; theta) = -e^theta
    for (double th : {-1.0, 0.0, 0.3, 1.0})
        CHECK(fam.log_density(0.0, vec1(th)) == doctest::Approx(-std::exp(th)).epsilon(1e-8));

    auto builtin = sm::families::poisson_natural();
    for (double x : {0.0, 1.0, 3.0, 7.0})
        CHECK(fam.log_density(x, vec1(0.5)) ==
              doctest::Approx(builtin.log_density(x, vec1(0.5))).epsilon(1e-8));
}

TEST_CASE("exponential family constructor reproduces the gaussian normalizer") {
    sm::ExponentialFamilySpec spec;
    spec.carrier = [](double x) { return -0.5 * x * x - 0.5 * std::log(2.0 * M_PI); };
    spec.statistics = {[](double x) { return x; }};
    spec.support = sm::Support::real_line();
    auto fam = sm::make_exponential_family(spec, sm::ParameterDomain{{{-4.0, 4.0}}, {}, 1e-6});

    // psi(theta) = theta^2 / 2
    for (double th : {-1.5, 0.0, 0.8})
        CHECK(fam.log_density(0.0, vec1(th)) ==
              doctest::Approx(-0.5 * std::log(2.0 * M_PI) - 0.5 * th * th).epsilon(1e-8));
}

TEST_CASE("mixture constructor accepts the uniform-beta blend and rejects a negative one") {
    sm::MixtureFamilySpec spec;
    spec.carrier = [](double) { return 1.0; };
    spec.statistics = {[](double x) { return 2.0 * x - 1.0; }};
    spec.support = sm::Support::interval(0.0, 1.0);

    auto ok = sm::make_mixture_family(spec, sm::ParameterDomain{{{0.0, 1.0}}, {}, 1e-6});
    CHECK(ok.log_density(0.25, vec1(0.5)) == doctest::Approx(std::log(0.75)).epsilon(1e-12));

    CHECK_THROWS_AS(sm::make_mixture_family(spec, sm::ParameterDomain{{{-2.0, 2.0}}, {}, 1e-6}),
                    sm::ConstructionError);
}

TEST_CASE("validate_family reports clean diagnostics for the builtins") {
    struct Case {
        sm::ParametricFamily fam;
        sm::VectorXd xi;
    };
    std::vector<Case> cases;
    cases.push_back({sm::families::gaussian(), vec2(0.0, 1.0)});
    cases.push_back({sm::families::poisson_natural(), vec1(0.3)});
    cases.push_back({sm::families::bernoulli(), vec1(0.4)});
    cases.push_back({sm::families::mixture_uniform_beta(), vec1(0.5)});
    for (auto& c : cases) {
        auto d = sm::validate_family(c.fam, c.xi);
        INFO(c.fam.name());
        CHECK(d.normalization_residual < 1e-8);
        CHECK(d.score_mean_max_abs < 1e-7);
        CHECK(d.support_invariant);
        CHECK(d.score_fd_max_deviation < 1e-6);
    }
}

TEST_CASE("support probe grid stays inside the support") {
    auto interval = sm::Support::interval(0.0, 1.0);
    auto grid = interval.probe_grid();
    CHECK(grid.size() == 256);
    for (double x : grid) CHECK(interval.contains(x));

    auto line = sm::Support::real_line();
    for (double x : line.probe_grid()) CHECK(std::isfinite(x));
}

TEST_CASE("parameter domain slack shrinks near the boundary") {
    sm::ParameterDomain dom{{{0.0, 1.0}}, {}, 1e-6};
    CHECK(dom.slack(vec1(0.5), 0) > 0.4);
    CHECK(dom.slack(vec1(0.001), 0) < 0.001);
    CHECK(dom.contains(vec1(0.5)));
    CHECK(!dom.contains(vec1(1.0)));
}

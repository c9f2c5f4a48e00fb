#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "statmanifold/family.hpp"

namespace statmanifold {

enum class IntegrationMethod { Auto, ExactSum, Quadrature, MonteCarlo };

std::string to_string(IntegrationMethod m);

struct ExpectationResult {
    double value = 0.0;
    double error_estimate = 0.0;
    IntegrationMethod method = IntegrationMethod::Auto;
    long evaluations = 0;
    bool converged = true;  // false when the budget ran out first
};

struct IntegrationConfig {
    double rel_tol = 1e-10;
    double abs_tol = 1e-13;
    int max_quad_depth = 15;       // adaptive bisection depth per panel
    long max_terms = 200000;       // discrete summation cap
    long mc_samples = 1000000;
    std::uint64_t seed = 20240101;
    IntegrationMethod method = IntegrationMethod::Auto;
};

// E_xi[f(X)] against the family density. Method by support type:
// finite/countable -> exact summation (tail bound < 1e-12), continuous ->
// adaptive Gauss-Kronrod, MonteCarlo on request. The integrand is driven
// through exp(log_density) so small-sigma regions do not underflow.
ExpectationResult expect(const ParametricFamily& family, const VectorXd& xi,
                         const std::function<double(double)>& f,
                         const IntegrationConfig& cfg = {});

// Plain integral/sum of f over a support (no density weight); the
// exponential-family normalizer uses this before a density exists.
ExpectationResult integrate_raw(const Support& support,
                                const std::function<double(double)>& f,
                                const IntegrationConfig& cfg = {});

// Vector-valued expectation: all components share one adaptive pass,
// refined where the worst component error lives. Used by the geometry
// bundles so one sweep serves every tensor entry.
std::vector<double> expect_many(const ParametricFamily& family, const VectorXd& xi,
                                const std::function<void(double, std::vector<double>&)>& f,
                                int count, const IntegrationConfig& cfg = {});

}  // namespace statmanifold

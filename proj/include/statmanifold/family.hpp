#pragma once

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "statmanifold/errors.hpp"
#include "statmanifold/expr.hpp"

namespace statmanifold {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Sample space Omega. Univariate: an interval of the real line, a finite
// set of points, or the non-negative integers.
struct Support {
    enum class Kind { Interval, FiniteSet, Naturals };
    Kind kind = Kind::Interval;
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
    std::vector<double> points;  // FiniteSet only

    static Support interval(double lo, double hi) { return {Kind::Interval, lo, hi, {}}; }
    static Support real_line() { return interval(-std::numeric_limits<double>::infinity(),
                                                 std::numeric_limits<double>::infinity()); }
    static Support naturals() { return {Kind::Naturals, 0.0, 0.0, {}}; }
    static Support finite(std::vector<double> pts) { return {Kind::FiniteSet, 0.0, 0.0, std::move(pts)}; }

    bool is_discrete() const { return kind != Kind::Interval; }
    bool contains(double x) const;
    // Fixed 256-point quasi-random probe grid used by the support
    // invariance check.
    std::vector<double> probe_grid(int count = 256) const;
};

// Open parameter box with a safety margin; an optional predicate narrows
// it further (e.g. the categorical simplex constraint).
struct ParameterDomain {
    std::vector<std::array<double, 2>> box;
    std::function<bool(const VectorXd&)> predicate;  // may be empty
    double margin = 1e-6;

    int dim() const { return static_cast<int>(box.size()); }
    bool contains(const VectorXd& xi) const;
    // Largest step along +/- e_i that stays strictly inside, used to
    // shrink finite-difference stencils near the boundary.
    double slack(const VectorXd& xi, int axis) const;
    VectorXd center() const;  // a representative interior point
};

// A parametric statistical model: the manifold point set plus the
// callables every other module consumes.
class ParametricFamily {
public:
    using LogDensityFn = std::function<double(double, const VectorXd&)>;
    using ScoreFn = std::function<VectorXd(double, const VectorXd&)>;
    // fills `out` with `count` draws from p(.; xi), deterministic in seed
    using SamplerFn = std::function<void(const VectorXd&, std::uint64_t, int, std::vector<double>&)>;

    ParametricFamily() = default;
    ParametricFamily(std::string name, int dim, ParameterDomain domain, Support support,
                     LogDensityFn log_density, ScoreFn score, SamplerFn sampler);

    const std::string& name() const { return name_; }
    int dim() const { return dim_; }
    const ParameterDomain& domain() const { return domain_; }
    const Support& support() const { return support_; }
    bool has_analytic_score() const { return static_cast<bool>(score_); }

    // log p(x; xi); throws DomainError / SupportError. Returns -inf where
    // the density vanishes inside the declared support.
    double log_density(double x, const VectorXd& xi) const;

    // (d/dxi_i) log p; analytic when supplied, otherwise central finite
    // differences with step h_i = cbrt(eps) * max(1, |xi_i|).
    VectorXd score(double x, const VectorXd& xi) const;
    VectorXd score_finite_difference(double x, const VectorXd& xi) const;

    // Hessian of log p in xi at fixed x, by central differences of the
    // score; symmetrized.
    MatrixXd log_density_hessian(double x, const VectorXd& xi) const;

    std::vector<double> sample(const VectorXd& xi, std::uint64_t seed, int count) const;

    void require_in_domain(const VectorXd& xi) const;

private:
    std::string name_;
    int dim_ = 0;
    ParameterDomain domain_;
    Support support_;
    LogDensityFn log_density_;
    ScoreFn score_;
    SamplerFn sampler_;
};

double fd_step(double coordinate);  // cbrt(eps) * max(1, |c|)

// ---- built-in families -------------------------------------------------

namespace families {
ParametricFamily gaussian();                       // xi = (mu, sigma)
ParametricFamily gaussian_fixed_sigma(double sigma);  // xi = (mu)
ParametricFamily poisson_natural();                // xi = (theta), lambda = e^theta
ParametricFamily bernoulli();                      // xi = (p)
ParametricFamily categorical(int k);               // xi = (p_0..p_{k-2})
// p(x; xi) = 1 + xi * (2x - 1) on [0,1]: uniform/Beta(2,1) mixture
ParametricFamily mixture_uniform_beta();
}  // namespace families

// ---- exponential / mixture constructors --------------------------------

struct ExponentialFamilySpec {
    std::function<double(double)> carrier;                 // K(x)
    std::vector<std::function<double(double)>> statistics; // F_i(x)
    Support support;
    std::string name = "exponential_family";
};

struct MixtureFamilySpec {
    std::function<double(double)> carrier;                 // K(x), a density
    std::vector<std::function<double(double)>> statistics; // F_i(x), zero mass
    Support support;
    std::string name = "mixture_family";
};

// log p = K + sum xi^i F_i - psi(xi), psi computed from normalization and
// cached per xi together with its gradient.
ParametricFamily make_exponential_family(const ExponentialFamilySpec& spec,
                                         ParameterDomain domain);

// p = K + sum xi^i F_i; positivity grid-checked over the domain corners
// and the probe grid at construction.
ParametricFamily make_mixture_family(const MixtureFamilySpec& spec,
                                     ParameterDomain domain);

// ---- regularity diagnostics ---------------------------------------------

struct FamilyDiagnostics {
    double normalization_residual = 0.0;  // |integral p - 1|
    VectorXd score_mean;                  // E_xi[score], should vanish
    double score_mean_max_abs = 0.0;
    bool support_invariant = true;
    double support_mismatch_x = 0.0;      // witness when not invariant
    double score_fd_max_deviation = 0.0;  // analytic vs FD, 0 if no analytic score
};

FamilyDiagnostics validate_family(const ParametricFamily& family, const VectorXd& xi);
FamilyDiagnostics validate_family(const ParametricFamily& family, const VectorXd& xi,
                                  const VectorXd& reference_xi);

}  // namespace statmanifold

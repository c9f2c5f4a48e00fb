#include "statmanifold/connection.hpp"

#include <cmath>

namespace statmanifold {

namespace {

void require_same_point(const VectorXd& a, const VectorXd& b, const std::string& what) {
    if (a.size() != b.size() || (a - b).cwiseAbs().maxCoeff() > 1e-12)
        throw DimensionError(what + ": tensors are not at the same base point");
}

}  // namespace

ConnectionCoefficients alpha_connection(const ParametricFamily& family, const VectorXd& xi,
                                        double alpha, const IntegrationConfig& cfg) {
    family.require_in_domain(xi);
    const int n = family.dim();
    Tensor3 gamma(n, n, n);
    const double c = 0.5 * (1.0 - alpha);
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            for (int k = 0; k < n; ++k) {
                auto r = expect(family, xi,
                                [&](double x) {
                                    VectorXd s = family.score(x, xi);
                                    MatrixXd h = family.log_density_hessian(x, xi);
                                    return (h(i, j) + c * s[i] * s[j]) * s[k];
                                },
                                cfg);
                gamma(i, j, k) = r.value;
                gamma(j, i, k) = r.value;
            }
        }
    }
    return {xi, alpha, gamma};
}

SkewnessTensor skewness_tensor(const ParametricFamily& family, const VectorXd& xi,
                               const IntegrationConfig& cfg) {
    family.require_in_domain(xi);
    const int n = family.dim();
    Tensor3 raw(n, n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                auto r = expect(family, xi,
                                [&](double x) {
                                    VectorXd s = family.score(x, xi);
                                    return s[i] * s[j] * s[k];
                                },
                                cfg);
                raw(i, j, k) = r.value;
            }
    // symmetrize over all six permutations, keeping the worst raw
    // deviation as a diagnostic of integration noise
    Tensor3 sym(n, n, n);
    double asym = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                double avg = (raw(i, j, k) + raw(i, k, j) + raw(j, i, k) + raw(j, k, i) +
                              raw(k, i, j) + raw(k, j, i)) / 6.0;
                sym(i, j, k) = avg;
                asym = std::max(asym, std::abs(raw(i, j, k) - avg));
            }
    return {xi, sym, asym};
}

ConnectionCoefficients convert_connection(const ConnectionCoefficients& gamma,
                                          const SkewnessTensor& skewness, double beta) {
    require_same_point(gamma.at, skewness.at, "convert_connection");
    const int n = gamma.dim();
    Tensor3 out(n, n, n);
    const double c = 0.5 * (gamma.alpha - beta);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                out(i, j, k) = gamma.first_kind(i, j, k) + c * skewness.entries(i, j, k);
    return {gamma.at, beta, out};
}

GeometryBundle metric_connection_bundle(const ParametricFamily& family, const VectorXd& xi,
                                        double alpha, const IntegrationConfig& cfg) {
    family.require_in_domain(xi);
    const int n = family.dim();
    const int pairs = n * (n + 1) / 2;
    const int count = pairs + pairs * n;
    const double c = 0.5 * (1.0 - alpha);
    std::vector<double> vals = expect_many(
        family, xi,
        [&](double x, std::vector<double>& out) {
            VectorXd s = family.score(x, xi);
            MatrixXd h = family.log_density_hessian(x, xi);
            int idx = 0;
            for (int i = 0; i < n; ++i)
                for (int j = i; j < n; ++j) out[static_cast<std::size_t>(idx++)] = s[i] * s[j];
            for (int i = 0; i < n; ++i)
                for (int j = i; j < n; ++j) {
                    double core = h(i, j) + c * s[i] * s[j];
                    for (int k = 0; k < n; ++k)
                        out[static_cast<std::size_t>(idx++)] = core * s[k];
                }
        },
        count, cfg);
    MatrixXd g(n, n);
    std::size_t idx = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            g(i, j) = vals[idx];
            g(j, i) = vals[idx];
            ++idx;
        }
    ensure_positive_definite(g, family.name());
    Tensor3 gamma(n, n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                gamma(i, j, k) = vals[idx];
                gamma(j, i, k) = vals[idx];
                ++idx;
            }
    return {{xi, g, FisherForm::ScoreOuter}, {xi, alpha, gamma}};
}

Tensor3 christoffel_second_kind(const ConnectionCoefficients& gamma, const FisherMatrix& g) {
    require_same_point(gamma.at, g.at, "christoffel_second_kind");
    const int n = gamma.dim();
    MatrixXd ginv = inverse_metric(g);
    Tensor3 out(n, n, n);  // indexed (k, i, j) = Gamma^k_{ij}
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double v = 0.0;
                for (int m = 0; m < n; ++m) v += ginv(k, m) * gamma.first_kind(i, j, m);
                out(k, i, j) = v;
            }
    return out;
}

}  // namespace statmanifold

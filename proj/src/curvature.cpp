#include "statmanifold/curvature.hpp"

#include <cmath>

namespace statmanifold {

namespace {

Tensor3 christoffel_at(const ParametricFamily& family, const VectorXd& xi, double alpha,
                       const IntegrationConfig& cfg) {
    auto b = metric_connection_bundle(family, xi, alpha, cfg);
    return christoffel_second_kind(b.connection, b.metric);
}

}  // namespace

CurvatureTensor riemann_tensor(const ParametricFamily& family, const VectorXd& xi, double alpha,
                               double h, const IntegrationConfig& cfg) {
    family.require_in_domain(xi);
    const int n = family.dim();

    CurvatureTensor out;
    out.at = xi;
    out.alpha = alpha;
    out.up = Tensor4(n, n, n, n);
    out.lowered = Tensor4(n, n, n, n);

    Tensor3 gamma0 = christoffel_at(family, xi, alpha, cfg);
    if (n == 1) {
        out.step = h;
        return out;  // no curvature in dimension 1
    }

    // per-axis steps and the derivative dGamma^l_{jk} / dxi^i
    std::vector<Tensor3> dgamma;
    dgamma.reserve(n);
    for (int i = 0; i < n; ++i) {
        double hi = h > 0.0 ? h : 1e-3 * std::max(1.0, std::abs(xi[i]));
        VectorXd p = xi, m = xi;
        p[i] += hi;
        m[i] -= hi;
        if (!family.domain().contains(p) || !family.domain().contains(m))
            throw DomainError(family.name() +
                              ": curvature stencil leaves the domain; use a smaller step h");
        Tensor3 gp = christoffel_at(family, p, alpha, cfg);
        Tensor3 gm = christoffel_at(family, m, alpha, cfg);
        Tensor3 d(n, n, n);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                for (int c = 0; c < n; ++c)
                    d(a, b, c) = (gp(a, b, c) - gm(a, b, c)) / (2.0 * hi);
        dgamma.push_back(std::move(d));
        out.step = hi;
    }

    for (int l = 0; l < n; ++l)
        for (int k = 0; k < n; ++k)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    double v = dgamma[static_cast<std::size_t>(i)](l, j, k) -
                               dgamma[static_cast<std::size_t>(j)](l, i, k);
                    for (int m = 0; m < n; ++m)
                        v += gamma0(l, i, m) * gamma0(m, j, k) -
                             gamma0(l, j, m) * gamma0(m, i, k);
                    out.up(l, k, i, j) = v;
                }

    MatrixXd g = fisher_matrix(family, xi, cfg).entries;
    for (int l = 0; l < n; ++l)
        for (int k = 0; k < n; ++k)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    double v = 0.0;
                    for (int m = 0; m < n; ++m) v += g(l, m) * out.up(m, k, i, j);
                    out.lowered(l, k, i, j) = v;
                }
    return out;
}

double sectional_curvature(const CurvatureTensor& riemann, const FisherMatrix& g,
                           const VectorXd& x, const VectorXd& y) {
    const int n = riemann.dim();
    if (x.size() != n || y.size() != n)
        throw DimensionError("sectional_curvature: tangent vector dimension mismatch");
    double xx = inner_product(g, x, x);
    double yy = inner_product(g, y, y);
    double xy = inner_product(g, x, y);
    double denom = xx * yy - xy * xy;
    if (denom < 1e-12)
        throw DegeneracyError("sectional_curvature: X and Y span a degenerate plane");
    // <R(X,Y)Y, X> with R(d_i,d_j)d_k = R^l_{kij} d_l
    double num = 0.0;
    for (int l = 0; l < n; ++l)
        for (int k = 0; k < n; ++k)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    num += riemann.lowered(l, k, i, j) * x[l] * y[k] * x[i] * y[j];
    return num / denom;
}

std::vector<VectorXd> parameter_grid(const std::vector<std::array<double, 2>>& box,
                                     int points_per_axis) {
    const int n = static_cast<int>(box.size());
    std::vector<VectorXd> grid;
    long total = 1;
    for (int i = 0; i < n; ++i) total *= points_per_axis;
    for (long idx = 0; idx < total; ++idx) {
        VectorXd p(n);
        long rem = idx;
        for (int i = 0; i < n; ++i) {
            int step = static_cast<int>(rem % points_per_axis);
            rem /= points_per_axis;
            double lo = box[i][0], hi = box[i][1];
            p[i] = points_per_axis == 1
                       ? 0.5 * (lo + hi)
                       : lo + (hi - lo) * static_cast<double>(step) /
                                 static_cast<double>(points_per_axis - 1);
        }
        grid.push_back(std::move(p));
    }
    return grid;
}

FlatnessReport flatness_report(const ParametricFamily& family,
                               const std::vector<VectorXd>& grid, double alpha,
                               const IntegrationConfig& cfg) {
    FlatnessReport r;
    r.alpha = alpha;
    for (const VectorXd& xi : grid) {
        auto gamma = metric_connection_bundle(family, xi, alpha, cfg).connection;
        r.max_abs_gamma = std::max(r.max_abs_gamma, gamma.first_kind.max_abs());
        auto riem = riemann_tensor(family, xi, alpha, 0.0, cfg);
        r.max_abs_riemann = std::max(r.max_abs_riemann, riem.up.max_abs());
    }
    r.flat_in_coefficients = r.max_abs_gamma < r.gamma_threshold;
    r.flat_in_curvature = r.max_abs_riemann < r.riemann_threshold;
    return r;
}

}  // namespace statmanifold

#include "statmanifold/metric.hpp"

#include <cmath>

namespace statmanifold {

void ensure_positive_definite(const MatrixXd& g, const std::string& what) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(g);
    double lo = es.eigenvalues().minCoeff();
    double hi = es.eigenvalues().maxCoeff();
    if (!(hi > 0.0) || lo <= 1e-10 * hi) {
        int idx = 0;
        es.eigenvalues().minCoeff(&idx);
        std::string dir;
        for (int i = 0; i < g.rows(); ++i)
            dir += (i ? "," : "") + std::to_string(es.eigenvectors().col(idx)[i]);
        throw DegeneracyError(what + ": metric is not positive definite; near-null direction (" +
                              dir + "), eigenvalue " + std::to_string(lo));
    }
}

FisherMatrix fisher_matrix(const ParametricFamily& family, const VectorXd& xi,
                           const IntegrationConfig& cfg) {
    family.require_in_domain(xi);
    const int n = family.dim();
    MatrixXd g(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            auto r = expect(family, xi,
                            [&](double x) {
                                VectorXd s = family.score(x, xi);
                                return s[i] * s[j];
                            },
                            cfg);
            g(i, j) = r.value;
            g(j, i) = r.value;
        }
    }
    g = 0.5 * (g + g.transpose()).eval();
    ensure_positive_definite(g, family.name());
    return {xi, g, FisherForm::ScoreOuter};
}

FisherMatrix fisher_matrix_hessian(const ParametricFamily& family, const VectorXd& xi,
                                   const IntegrationConfig& cfg) {
    family.require_in_domain(xi);
    const int n = family.dim();
    MatrixXd g(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            auto r = expect(family, xi,
                            [&](double x) { return -family.log_density_hessian(x, xi)(i, j); },
                            cfg);
            g(i, j) = r.value;
            g(j, i) = r.value;
        }
    }
    g = 0.5 * (g + g.transpose()).eval();
    ensure_positive_definite(g, family.name());
    return {xi, g, FisherForm::NegHessian};
}

double inner_product(const FisherMatrix& g, const VectorXd& x, const VectorXd& y) {
    if (x.size() != g.entries.rows() || y.size() != g.entries.rows())
        throw DimensionError("inner_product: tangent vector dimension mismatch");
    return x.dot(g.entries * y);
}

MatrixXd inverse_metric(const MatrixXd& g) {
    Eigen::LLT<MatrixXd> llt(g);
    if (llt.info() != Eigen::Success)
        throw DegeneracyError("inverse_metric: Cholesky factorization failed");
    MatrixXd inv = llt.solve(MatrixXd::Identity(g.rows(), g.cols()));
    double residual = (g * inv - MatrixXd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
    if (residual > 1e-10)
        throw DegeneracyError("inverse_metric: matrix is singular within tolerance (residual " +
                              std::to_string(residual) + ")");
    return inv;
}

MatrixXd inverse_metric(const FisherMatrix& g) { return inverse_metric(g.entries); }

double condition_number(const FisherMatrix& g) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(g.entries);
    return es.eigenvalues().maxCoeff() / es.eigenvalues().minCoeff();
}

}  // namespace statmanifold

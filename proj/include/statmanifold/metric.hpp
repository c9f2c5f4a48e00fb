#pragma once

#include "statmanifold/integrate.hpp"

namespace statmanifold {

enum class FisherForm { ScoreOuter, NegHessian };

struct FisherMatrix {
    VectorXd at;
    MatrixXd entries;
    FisherForm form = FisherForm::ScoreOuter;
    int dim() const { return static_cast<int>(entries.rows()); }
};

// g_ij = E[score_i score_j]; symmetrized, positive-definiteness enforced
// (smallest eigenvalue > 1e-10 * largest, else DegeneracyError).
FisherMatrix fisher_matrix(const ParametricFamily& family, const VectorXd& xi,
                           const IntegrationConfig& cfg = {});

// g_ij = -E[hessian_ij of log p]; second derivatives by central
// differences of the score.
FisherMatrix fisher_matrix_hessian(const ParametricFamily& family, const VectorXd& xi,
                                   const IntegrationConfig& cfg = {});

double inner_product(const FisherMatrix& g, const VectorXd& x, const VectorXd& y);

// g^{ij}; residual ||g g^{-1} - I||_inf checked against 1e-10.
MatrixXd inverse_metric(const FisherMatrix& g);
MatrixXd inverse_metric(const MatrixXd& g);

double condition_number(const FisherMatrix& g);

// Throws DegeneracyError (naming the near-null direction) unless the
// smallest eigenvalue exceeds 1e-10 times the largest.
void ensure_positive_definite(const MatrixXd& g, const std::string& what);

}  // namespace statmanifold

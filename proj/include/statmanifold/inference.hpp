#pragma once

#include <span>

#include "statmanifold/connection.hpp"
#include "statmanifold/metric.hpp"

namespace statmanifold {

struct EstimatorSpec {
    std::string name;
    // sample list -> estimate (parameter vector, or u-vector for curved
    // models); must be total on non-empty lists
    std::function<VectorXd(std::span<const double>)> map;
    bool claims_unbiased = true;
};

namespace estimators {
EstimatorSpec sample_mean();
EstimatorSpec sample_median();
EstimatorSpec constant(const VectorXd& value);
EstimatorSpec shifted_mean(double shift);
// closed-form maximum likelihood for the built-in families
EstimatorSpec mle(const ParametricFamily& family);
}  // namespace estimators

struct CovarianceReport {
    bool claims_unbiased = true;
    VectorXd xi_true;
    long samples_per_trial = 0;
    long trials = 0;
    long discarded = 0;
    VectorXd mean_estimate;
    VectorXd bias;
    MatrixXd covariance;       // of the estimates around xi_true's mean
    MatrixXd standard_errors;  // jackknife SE of each covariance entry
    VectorXd bias_standard_error;
};

// trials x N draws through independent substreams; deterministic in seed.
// Trials with a non-finite estimate are discarded and counted; more than
// 1% discards is an ExperimentError.
CovarianceReport estimator_covariance(const ParametricFamily& family, const VectorXd& xi_true,
                                      const EstimatorSpec& estimator, long samples_per_trial,
                                      long trials, std::uint64_t seed);

struct CramerRaoVerdict {
    bool applicable = true;   // false when the estimator is measurably biased
    bool pass = false;
    bool near_equality = false;
    VectorXd gap_eigenvalues;  // of D = covariance - g^{-1}/N
    MatrixXd gap;
    double tolerance = 0.0;    // -3 * propagated MC standard error
};

// Loewner-order check of covariance >= g^{-1}/N. The 1/N factor accounts
// for the N i.i.d. observations behind each trial.
CramerRaoVerdict cramer_rao_check(const CovarianceReport& report, const FisherMatrix& g);

// ---- curved models and second-order MSE machinery -------------------------

struct CurvedModelSpec {
    ParametricFamily ambient;
    int model_dim = 0;
    std::vector<std::array<double, 2>> u_domain;
    std::function<VectorXd(const VectorXd&)> embedding;      // u -> xi
    std::function<MatrixXd(const VectorXd&)> jacobian;       // optional, n x m
    std::string name = "curved_model";
};

struct InducedGeometry {
    MatrixXd g_model;  // m x m pullback metric B^T g B
    MatrixXd basis;    // B = dxi/du, n x m
    MatrixXd g_ambient;
};

InducedGeometry induced_geometry(const CurvedModelSpec& model, const VectorXd& u,
                                 const IntegrationConfig& cfg = {});

// Second fundamental form H^kappa_{ab}: ambient-coordinate curvature of
// the embedding under the ambient alpha-connection, projected onto the
// g-orthogonal complement of the tangent space. Tensor axes: (kappa, a, b).
Tensor3 embedding_curvature(const CurvedModelSpec& model, const VectorXd& u, double alpha,
                            const IntegrationConfig& cfg = {});

struct MseExpansionTerms {
    VectorXd at;
    MatrixXd g_model;
    MatrixXd gamma_m_sq;  // (Gamma^(m)_M)^{2ab}
    MatrixXd h_e_sq;      // (H^(e)_M)^{2ab}
    MatrixXd h_m_a_sq;    // (H^(m)_A)^{2ab}
    MatrixXd k;           // gamma_m_sq + 2 h_e_sq + h_m_a_sq
    bool ancillary_assumed_m_flat = true;
};

// Contractions with model indices raised/lowered by g_model and ambient
// indices by g_ambient:
//   (Gamma^(m))^{2ab} = Gamma^a_{cd} Gamma^b_{ef} g^{ce} g^{df}
//   (H^(e))^{2ab}     = H^k_{ce} H^l_{df} g_{kl} g^{cd} g^{ea} g^{fb}
//   (H^(m)_A)^{2ab}   = H^a_{kl} H^b_{mn} g^{km} g^{ln}
// gamma_m_model: second kind, axes (a, c, d). h_e: axes (kappa, a, b).
// h_m_a: axes (a, kappa, lambda), the ancillary curvature supplied as
// input (zero = "ancillary assumed m-flat").
MseExpansionTerms k_tensor(const Tensor3& gamma_m_model, const Tensor3& h_e,
                           const Tensor3& h_m_a, const MatrixXd& g_model,
                           const MatrixXd& g_ambient);

// (1/N) g^{ab} + (1/(2N^2)) K^{ab}
MatrixXd asymptotic_mse(const MatrixXd& g_model, const MatrixXd& k, long samples);

struct MseExperimentRow {
    long samples = 0;
    MatrixXd empirical_mse;     // bias-corrected
    MatrixXd predicted_first;   // g^{ab}/N
    MatrixXd predicted_second;  // g^{ab}/N + K^{ab}/(2N^2)
    long trials = 0;
    double mse_standard_error = 0.0;
};

struct MseExperiment {
    MseExpansionTerms terms;
    std::vector<MseExperimentRow> rows;
};

// trials == 0 enables the adaptive schedule: start at 1e5 and double
// until the MSE standard error is below a tenth of the second-order term
// or the budget cap is reached.
MseExperiment mse_experiment(const CurvedModelSpec& model, const VectorXd& u_true,
                             const EstimatorSpec& estimator, const std::vector<long>& sample_sizes,
                             long trials, std::uint64_t seed,
                             const IntegrationConfig& cfg = {});

// The model as a family in its own u-coordinates (log density composed
// with the embedding); used for the model's own connection coefficients.
ParametricFamily model_as_family(const CurvedModelSpec& model);

}  // namespace statmanifold

#pragma once

#include "statmanifold/metric.hpp"
#include "statmanifold/tensor.hpp"

namespace statmanifold {

// Gamma^(alpha)_{ij,k}, first kind, all indices down; symmetric in (i,j).
struct ConnectionCoefficients {
    VectorXd at;
    double alpha = 0.0;
    Tensor3 first_kind;
    int dim() const { return first_kind.extent1(); }
};

struct SkewnessTensor {
    VectorXd at;
    Tensor3 entries;  // fully symmetrized
    double raw_asymmetry = 0.0;  // worst pre-symmetrization deviation
    int dim() const { return entries.extent1(); }
};

// Gamma^(alpha)_{ij,k} = E[(d_i d_j l + (1-alpha)/2 d_i l d_j l) d_k l],
// each entry a single joint expectation.
ConnectionCoefficients alpha_connection(const ParametricFamily& family, const VectorXd& xi,
                                        double alpha, const IntegrationConfig& cfg = {});

// T_ijk = E[d_i l d_j l d_k l]
SkewnessTensor skewness_tensor(const ParametricFamily& family, const VectorXd& xi,
                               const IntegrationConfig& cfg = {});

// Gamma^(beta) = Gamma^(alpha) + (alpha - beta)/2 T, exact arithmetic.
ConnectionCoefficients convert_connection(const ConnectionCoefficients& gamma,
                                          const SkewnessTensor& skewness, double beta);

// Gamma^k_{ij} = g^{km} Gamma_{ij,m}
Tensor3 christoffel_second_kind(const ConnectionCoefficients& gamma, const FisherMatrix& g);

struct GeometryBundle {
    FisherMatrix metric;
    ConnectionCoefficients connection;
};

// Metric and connection from one shared adaptive sweep, so every tensor
// entry reuses the same score and hessian evaluations. The geodesic and
// curvature code call this instead of fisher_matrix + alpha_connection.
GeometryBundle metric_connection_bundle(const ParametricFamily& family, const VectorXd& xi,
                                        double alpha, const IntegrationConfig& cfg = {});

}  // namespace statmanifold

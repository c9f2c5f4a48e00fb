#pragma once

#include "statmanifold/connection.hpp"

namespace statmanifold {

// R^l_{kij} = d_i Gamma^l_{jk} - d_j Gamma^l_{ik}
//           + Gamma^l_{im} Gamma^m_{jk} - Gamma^l_{jm} Gamma^m_{ik}
// Sign fixed so the hyperbolic plane comes out at K = -1.
struct CurvatureTensor {
    VectorXd at;
    double alpha = 0.0;
    double step = 0.0;
    Tensor4 up;       // (l, k, i, j)
    Tensor4 lowered;  // R_{lkij} = g_{lm} R^m_{kij}
    int dim() const { return up.extent(0); }
};

// Central differences of the second-kind Christoffel symbols over the
// 2n-point stencil xi +- h e_i. h <= 0 picks the default
// 1e-3 * max(1, |xi_i|) per axis.
CurvatureTensor riemann_tensor(const ParametricFamily& family, const VectorXd& xi, double alpha,
                               double h = 0.0, const IntegrationConfig& cfg = {});

// K(X,Y) = R(X,Y,Y,X) / (|X|^2 |Y|^2 - <X,Y>^2)
double sectional_curvature(const CurvatureTensor& riemann, const FisherMatrix& g,
                           const VectorXd& x, const VectorXd& y);

struct FlatnessReport {
    double alpha = 0.0;
    double max_abs_gamma = 0.0;
    double max_abs_riemann = 0.0;
    double gamma_threshold = 1e-5;
    double riemann_threshold = 1e-4;
    bool flat_in_coefficients = false;
    bool flat_in_curvature = false;
    bool flat() const { return flat_in_coefficients && flat_in_curvature; }
};

FlatnessReport flatness_report(const ParametricFamily& family,
                               const std::vector<VectorXd>& grid, double alpha,
                               const IntegrationConfig& cfg = {});

// Uniform 5^n grid over a box, shrunk inside the domain; helper for
// flatness verdicts, which are region properties.
std::vector<VectorXd> parameter_grid(const std::vector<std::array<double, 2>>& box,
                                     int points_per_axis = 5);

}  // namespace statmanifold

#pragma once

#include "statmanifold/connection.hpp"

namespace statmanifold {

enum class GeodesicStatus { Completed, HitBoundary, StepFailure };

std::string to_string(GeodesicStatus s);

struct GeodesicSample {
    double t;
    VectorXd xi;
    VectorXd velocity;
};

struct GeodesicPath {
    double alpha = 0.0;
    GeodesicStatus status = GeodesicStatus::Completed;
    std::vector<GeodesicSample> samples;
    const GeodesicSample& endpoint() const { return samples.back(); }
};

enum class ChristoffelMode { Exact, Lattice };

struct GeodesicConfig {
    double dt = 0.0;  // <= 0 picks t_end / 1000
    // Exact re-evaluates the connection at every RK stage; Lattice caches
    // it on a grid and interpolates (for higher-dimensional families
    // where the expectation cost dominates).
    ChristoffelMode mode = ChristoffelMode::Exact;
    double lattice_spacing = 0.05;
    IntegrationConfig integration;
};

// Fixed-step RK4 on xi' = v, v^k' = -Gamma^k_{ij} v^i v^j. Stops with
// HitBoundary as soon as a step would leave the open domain.
GeodesicPath integrate_geodesic(const ParametricFamily& family, const VectorXd& xi0,
                                const VectorXd& v0, double alpha, double t_end,
                                const GeodesicConfig& cfg = {});

// Endpoint of the unit-time geodesic; throws BoundaryError when the path
// exits the domain first.
VectorXd exponential_map(const ParametricFamily& family, const VectorXd& xi0,
                         const VectorXd& v0, double alpha, const GeodesicConfig& cfg = {});

}  // namespace statmanifold

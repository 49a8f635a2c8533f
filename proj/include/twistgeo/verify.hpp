#pragma once

// Sampled comparisons of closed-form operations against numerical oracles,
// shared by the scenario runner and the acceptance suite.

#include <random>
#include <string>

#include "twistgeo/productgeo.hpp"
#include "twistgeo/transport.hpp"

namespace twistgeo {

struct Tolerances {
    double connection = 1e-5;
    double curvature = 1e-5;
    double curvature_value = 1e-6;
    double transport = 1e-6;
    double holonomy = 1e-6;
    double seam = 1e-8;
    double oneill = 1e-5;
    double lightlike_flat = 1e-7;
    double warp = 1e-7;
    double leaf_length = 1e-6;

    // Every assertion budget replaced by `tol`.
    static Tolerances uniform(double tol);
};

// Uniform sample of the middle 90% of the box, away from its faces.
Vec interior_sample(const Box& box, std::mt19937_64& rng);
// Gaussian vector supported on factor i's slots.
Vec random_factor_vector(const DoublyTwistedProduct& dtp, int i, std::mt19937_64& rng);
// C¹ spline from x through three random factor-1 displacements; factor-2 coordinates fixed.
PiecewiseCurve horizontal_curve(const DoublyTwistedProduct& dtp, const Vec& x, std::mt19937_64& rng, double scale = 0.3);

struct OracleStats {
    double max_residual = 0.0;
    int samples = 0;
};

// ∇_a b (all three slot cases) vs the finite-difference Christoffel contraction.
OracleStats connection_vs_oracle(const DoublyTwistedProduct& dtp, int points, std::mt19937_64& rng);

struct CurvatureStats {
    double max_residual = 0.0;
    int planes = 0;
    double min_k = 0.0;
    double max_k = 0.0;
};

// Closed-form K on factor and mixed nondegenerate planes vs the Riemann oracle.
CurvatureStats curvature_vs_oracle(const DoublyTwistedProduct& dtp, int points, std::mt19937_64& rng);

// g(R(v,u)u, v) from second directional differences of g and the Christoffel
// quadratic term, independent of the tensor built by riemann_numeric.
double curvature_biquadratic_direct(const MetricField& g, const Vec& x, const Vec& v, const Vec& u);

struct LightlikeStats {
    double max_residual = 0.0;  // vs curvature_biquadratic_direct(v, u) / g(v,v)
    double max_abs_k = 0.0;
    int planes = 0;
};

// Requires index ≥ 1 and at least two spacelike directions; planes = 0 otherwise.
LightlikeStats lightlike_vs_oracle(const MetricField& g, const Box& domain, int points, std::mt19937_64& rng);

// Closed-form O'Neill T vs the connection-based definition.
OracleStats oneill_vs_definitional(const DoublyTwistedProduct& dtp, int points, std::mt19937_64& rng);

struct AdaptedStats {
    double max_component_drift = 0.0;  // factor-2 components of A along horizontal curves
    double max_norm_law = 0.0;         // | |A| − |v| exp(−∫ω₂) |
    double max_parallel_drift = 0.0;   // metric-norm drift of plain parallel transport over 1 + |g(v,v)|
    double parallel_budget = 0.0;      // 10 × integrator tolerance
    int curves = 0;
};

AdaptedStats adapted_translation_stats(const DoublyTwistedProduct& dtp, int curves, std::mt19937_64& rng);

}  // namespace twistgeo

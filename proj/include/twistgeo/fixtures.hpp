#pragma once

// Reference geometries shared by the tests, the acceptance suite and the
// built-in CLI scenarios.

#include <cstdint>

#include "twistgeo/productgeo.hpp"
#include "twistgeo/quotient.hpp"

namespace twistgeo::fixtures {

// Standalone 2D metrics with analytic first and second derivatives.
MetricField polar_metric();       // dr² + r²dθ²
MetricField sphere_metric();      // dr² + sin²r dθ²
MetricField hyperbolic_metric();  // dr² + sinh²r dθ²
MetricField euclidean(int n);
MetricField minkowski(int n);  // −dt² + dx₁² + …

// Euclidean ℝ^{n1} × ℝ^{n2}, unit warps.
DoublyTwistedProduct flat_direct(int n1 = 2, int n2 = 1);
// ℝ⁺ ×_r S¹: λ₂ = r on r ∈ [0.5, 3].
DoublyTwistedProduct polar_warped();
// λ₂ = sin r on r ∈ [0.3, 2.8].
DoublyTwistedProduct sphere_warped();
// λ₂ = sinh r on r ∈ [0.3, 2.5].
DoublyTwistedProduct hyperbolic_warped();
// ℝ^{1,1} × ℝ.
DoublyTwistedProduct minkowski_direct();
// (ℝ, −dt²) × unit sphere.
DoublyTwistedProduct lorentz_sphere();
// ℝ ×_{λ₂} ℝ^{1,1} with λ₂ = 1 + 0.3x²: Riemannian base, Lorentzian fibres.
DoublyTwistedProduct lorentz_warped();
// ℝ ×_{1+x²} ℝ.
DoublyTwistedProduct parabola_warped();
// Seeded doubly twisted product with factor dimensions in {1, 2}, smooth
// non-diagonal factor metrics and warps depending on every coordinate.
DoublyTwistedProduct random_dtp(std::uint64_t seed, bool allow_lorentzian = true);

// Flat ℝ × ℝ quotients with fundamental box [0,1) × ….
QuotientModel mobius();          // (x+1, −y)
QuotientModel flat_torus();      // (x+1, y), (x, y+1)
QuotientModel skewed_torus();    // (x+1, y), (x+½, y+1)
// ℝ × ℝ² with (x+1, R_θ y): F₁ holonomy is the rotation by θ.
QuotientModel rotation_quotient(double theta);
// ℝ ×_{2^{−x}} ℝ with (x+1, 2y), c₂ = 2: F₁ holonomy ½.
QuotientModel homothety_quotient();
// Flat torus generators with λ₂ = exp(0.1x), which they do not preserve.
QuotientModel broken_torus();

}  // namespace twistgeo::fixtures

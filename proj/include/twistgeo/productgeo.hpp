#pragma once

// Doubly twisted products M₁ ×_(λ₁,λ₂) M₂ with metric λ₁²g₁ + λ₂²g₂:
// closed-form connection and curvature, mean curvature vectors and forms,
// structure classification, lightlike sectional curvature and O'Neill T.
//
// Coordinates on the product are (a, b) with a ∈ ℝ^{n₁} first. Gradients,
// hessians and unit vectors in the closed forms are taken in the product
// metric g.

#include <random>
#include <string>
#include <vector>

#include "twistgeo/chartkit.hpp"

namespace twistgeo {

struct Box {
    Vec lo;
    Vec hi;

    int dim() const { return static_cast<int>(lo.size()); }
    bool contains(const Vec& x) const;
    Vec center() const { return 0.5 * (lo + hi); }
    Box concat(const Box& other) const;
    // Tensor grid with `per_dim` points per axis, endpoints included.
    std::vector<Vec> grid(int per_dim) const;
    Vec sample(std::mt19937_64& rng) const;
};

struct FactorManifold {
    std::string name;
    int dim = 0;
    MetricField metric;
    Box domain;
};

enum class WarpDependency { OnProduct, OnFactor1Only, OnFactor2Only, Constant };

struct WarpFn {
    ScalarField field;  // evaluated on product coordinates
    WarpDependency dependency = WarpDependency::OnProduct;
};

class DoublyTwistedProduct {
public:
    const FactorManifold& factor1() const { return f1_; }
    const FactorManifold& factor2() const { return f2_; }
    const WarpFn& lam1() const { return lam1_; }
    const WarpFn& lam2() const { return lam2_; }
    const WarpFn& lam(int i) const { return i == 1 ? lam1_ : lam2_; }
    const MetricField& metric() const { return metric_; }
    const Box& domain() const { return domain_; }

    int n1() const { return f1_.dim; }
    int n2() const { return f2_.dim; }
    int dim() const { return f1_.dim + f2_.dim; }

    Vec coords1(const Vec& x) const { return x.head(n1()); }
    Vec coords2(const Vec& x) const { return x.tail(n2()); }
    // Canonical projections P₁, P₂ on full component vectors (zero the other slots).
    Vec project1(const Vec& v) const;
    Vec project2(const Vec& v) const;
    Vec project(int i, const Vec& v) const { return i == 1 ? project1(v) : project2(v); }
    // True when v has no components outside factor i's slots (tolerance absolute).
    bool in_factor(int i, const Vec& v, double tol = 1e-12) const;
    // Slot range of factor i: [offset, offset + dim).
    int offset(int i) const { return i == 1 ? 0 : n1(); }
    int factor_dim(int i) const { return i == 1 ? n1() : n2(); }

    friend DoublyTwistedProduct assemble(FactorManifold f1, FactorManifold f2, WarpFn lam1, WarpFn lam2,
                                         int positivity_grid);

private:
    FactorManifold f1_;
    FactorManifold f2_;
    WarpFn lam1_;
    WarpFn lam2_;
    MetricField metric_;
    Box domain_;
};

// Throws InvalidWarp when a warp sample on the product domain grid is ≤ 0.
DoublyTwistedProduct assemble(FactorManifold f1, FactorManifold f2, WarpFn lam1, WarpFn lam2,
                              int positivity_grid = 5);

// Exchanges the factor order (coordinates (b, a)).
DoublyTwistedProduct swap_factors(const DoublyTwistedProduct& dtp);

// g-gradient of ln λ_i at x.
Vec grad_log_warp(const DoublyTwistedProduct& dtp, const Vec& x, int i);

enum class ConnectionCase { HH, VV, HV };

// ∇_a b from the doubly twisted connection formulas; a, b are extended as
// constant-coefficient coordinate fields. Throws CaseMismatch when a slot is
// populated that the case forbids.
TangentVector connection_closed_form(const DoublyTwistedProduct& dtp, const Vec& x, const TangentVector& a,
                                     const TangentVector& b, ConnectionCase c);

// N₁ = P₂(−∇ln λ₁), N₂ = P₁(−∇ln λ₂).
TangentVector mean_curvature_vector(const DoublyTwistedProduct& dtp, const Vec& x, int i);
// ω_i = g(N_i, ·)
OneForm mean_curvature_form(const DoublyTwistedProduct& dtp, const Vec& x, int i);

enum class StructureTag { DoublyTwisted, Twisted, DoublyWarped, Warped, DirectProduct };
std::string to_string(StructureTag tag);

inline constexpr double kVanishThreshold = 1e-7;
inline constexpr double kClosedThreshold = 1e-6;

struct StructureClass {
    StructureTag tag = StructureTag::DoublyTwisted;
    double max_domega1 = 0.0;
    double max_domega2 = 0.0;
    double max_n1 = 0.0;
    double max_n2 = 0.0;
};

StructureClass classify(const DoublyTwistedProduct& dtp, const std::vector<Vec>& grid);

// Two vectors tangent to one factor (factor = 1 or 2).
struct FactorPlane {
    int factor = 1;
    TangentVector u;
    TangentVector v;
};

// horiz tangent to factor 1, vert tangent to factor 2.
struct MixedPlane {
    TangentVector horiz;
    TangentVector vert;
};

inline constexpr double kNormalizationTol = 1e-9;

// Inputs must be unitary and orthogonal in g; throws NormalizationError otherwise.
double sectional_curvature_closed_form(const DoublyTwistedProduct& dtp, const FactorPlane& plane);
double sectional_curvature_closed_form(const DoublyTwistedProduct& dtp, const MixedPlane& plane);

// g(h_λ(v), v) for λ = λ_i and v tangent to a single factor, via the closed-form connection.
double warp_hessian_quadratic(const DoublyTwistedProduct& dtp, const Vec& x, int i, const Vec& v);

// Semi-Riemannian Gram–Schmidt; throws DegeneratePlane on a null intermediate vector.
std::vector<Vec> gram_schmidt(const Mat& g, const std::vector<Vec>& vs);

// K_ξ(Π) = g(R(v,u)u, v) / g(v,v) for a degenerate plane span(u, v) with
// g(ξ,ξ) = −1, g(u,u) = 0, g(u,ξ) = 1. Throws InvalidFrame otherwise.
double lightlike_sectional_curvature(const MetricField& g, const TangentVector& xi, const TangentVector& u,
                                     const TangentVector& v);

// Fibers are the factor-2 slices; horizontal = factor-1 slots. N is the fiber mean curvature N₂.
// T(E,F) = g(E^v,F^v) N − g(N,F) E^v
TangentVector oneill_T(const DoublyTwistedProduct& dtp, const Vec& x, const Vec& e, const Vec& f);
// h∇_{E^v}F^v + v∇_{E^v}F^h through the Christoffel oracle.
TangentVector oneill_T_definitional(const DoublyTwistedProduct& dtp, const Vec& x, const Vec& e, const Vec& f);

// (∇_X T)(E,F) for horizontal X: numeric (FD of the definitional T plus
// connection terms) and closed form g(E^v,F^v)∇_X N − g(∇_X N,F)E^v.
// Only valid when the O'Neill A tensor vanishes (λ₁ independent of factor 2);
// throws InvalidArgument otherwise.
Vec oneill_dT_numeric(const DoublyTwistedProduct& dtp, const Vec& x, const Vec& X, const Vec& e, const Vec& f);
Vec oneill_dT_closed_form(const DoublyTwistedProduct& dtp, const Vec& x, const Vec& X, const Vec& e, const Vec& f);

// Samplable hypothesis g(h_λ(X),X) ≤ 0 for spacelike X (λ = λ_i, X over the
// factor-`on_factor` slots). Returns the largest sampled value of g(h_λ(X),X)/g(X,X).
struct HessianSignReport {
    bool nonpositive = true;
    double max_value = 0.0;
    int samples = 0;
};
HessianSignReport warp_hessian_nonpositive(const DoublyTwistedProduct& dtp, int i, int on_factor, int samples,
                                           std::mt19937_64& rng);

}  // namespace twistgeo

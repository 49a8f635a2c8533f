#pragma once

// Quotients (M₁ × M₂)/Γ of doubly twisted products by groups generated by
// split deck maps φ × ψ: validation, fundamental-domain reduction, leaf
// tracing, leaf intersection counts, holonomy-based decomposition verdicts,
// the twisted counterexample quotient and the negative-curvature diagnostic.

#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "twistgeo/productgeo.hpp"
#include "twistgeo/transport.hpp"

namespace twistgeo {

struct FactorMap {
    std::function<Vec(const Vec&)> fwd;
    std::function<Vec(const Vec&)> inv;
};

// φ × ψ. When c1/c2 are set the factors are homotheties with φ*g₁ = c₁²g₁,
// ψ*g₂ = c₂²g₂, λ₁∘(φ×ψ) = λ₁/c₁ and λ₂∘(φ×ψ) = λ₂/c₂. When unset only the
// isometry of the product metric is required (twisted quotients).
struct DeckGenerator {
    std::string name;
    FactorMap phi;
    FactorMap psi;
    std::optional<double> c1;
    std::optional<double> c2;
};

// Letters are ±(generator index + 1); negative means the inverse. A word is
// applied left to right: {1, -2} maps x to g₂⁻¹(g₁(x)).
using Word = std::vector<int>;

std::string to_string(const Word& w);
Word inverse(const Word& w);
// All freely reduced words of length ≤ max_len over `generators` letters, shortest first.
std::vector<Word> reduced_words(int generators, int max_len);

struct QuotientModel {
    DoublyTwistedProduct dtp;
    std::vector<DeckGenerator> generators;
    Box fundamental_box;  // half-open [lo, hi); infinite bounds allowed
    double ident_tol = 1e-7;
    int word_bound = 8;

    Vec apply(int letter, const Vec& x) const;
    Vec apply(const Word& w, const Vec& x) const;
    // Jacobian of x ↦ w(x) by central differences.
    Mat jacobian(const Word& w, const Vec& x) const;
    bool in_box(const Vec& x) const;
};

struct ValidationReport {
    int samples = 0;
    int words_checked = 0;
    double max_inverse_residual = 0.0;
    double max_isometry_residual = 0.0;
    double max_homothety_residual = 0.0;
    double max_warp_residual = 0.0;
    // Smallest |w(p) − p| over sampled p and non-identity words; a sampled
    // necessary condition for a properly discontinuous action, never a proof.
    double min_orbit_separation = 0.0;
};

inline constexpr double kDeckTol = 1e-7;

// Throws InvalidAction naming the failing generator and sample.
ValidationReport validate(const QuotientModel& model, int per_dim = 5);

struct CanonicalRep {
    Vec point;
    Word word;  // point = word(x)
};

// Throws WordBoundExceeded when no word of length ≤ word_bound lands in the box.
CanonicalRep canonical_rep(const QuotientModel& model, const Vec& x);

enum class LeafStatus { Closed, OpenWithinBudget };
std::string to_string(LeafStatus s);

struct LeafTrace {
    LeafStatus status = LeafStatus::OpenWithinBudget;
    double length = 0.0;  // closing length when Closed, arc travelled otherwise
    int reductions = 0;
    std::vector<Vec> points;  // reduced points, one per step
    Box extent;               // coordinate bounding box of the visited reduced points
};

struct LeafTraceOptions {
    double arc_budget = 20.0;
    double step = 1e-2;
    std::optional<Vec> direction;  // factor-slot direction; default first coordinate of the factor
};

LeafTrace leaf_trace(const QuotientModel& model, const Vec& x0, int leaf, const LeafTraceOptions& opts = {});

struct IntersectionReport {
    int count = 0;
    std::vector<std::pair<Vec, Vec>> witnesses;  // (upstairs candidate, reduced representative)
    int word_bound_used = 0;
    bool lower_bound_only = false;
};

IntersectionReport leaf_intersection_count(const QuotientModel& model, const Vec& x0, int word_bound,
                                           const LeafTraceOptions& trace = {});

// Words w with w(x0) in the leaf of F_leaf through x0 upstairs (other-factor
// coordinates fixed) and w(x0) ≠ x0, shortest first, one per endpoint.
std::vector<Word> find_leaf_loops(const QuotientModel& model, const Vec& x0, int leaf, int max_len);

// Holonomy of the leaf loop from x0 to w(x0), in a Gram–Schmidt frame of the
// coordinate normal directions at x0. Throws NotALoop if w does not close the leaf.
HolonomyMap quotient_holonomy(const QuotientModel& model, const Vec& x0, int leaf, const Word& w);

enum class VerdictTag { GlobalDoublyWarpedProduct, Obstructed };
enum class ObstructionKind { None, NontrivialHolonomy, MultipleIntersections };

struct DecompositionVerdict {
    VerdictTag tag = VerdictTag::Obstructed;
    ObstructionKind reason = ObstructionKind::None;
    int leaf = 0;          // NontrivialHolonomy: foliation index
    Word loop;             // NontrivialHolonomy: offending loop
    Mat holonomy;          // NontrivialHolonomy: its matrix
    int count = 0;         // intersection count
    bool lower_bound_only = false;
};

std::string to_string(const DecompositionVerdict& v);

inline constexpr double kHolonomyIdentityTol = 1e-6;

struct LeafLoops {
    std::vector<Word> f1;
    std::vector<Word> f2;
};

DecompositionVerdict decomposition_check(const QuotientModel& model, const Vec& x0, const LeafLoops& loops,
                                         const LeafTraceOptions& trace = {});

struct ProductChartReport {
    bool tiles = false;
    double residual = 0.0;  // worst gap between leaf extents and the fundamental box
};

// The closed leaves through x0 span the fundamental box factor by factor.
ProductChartReport product_chart_check(const QuotientModel& model, const Vec& x0, const LeafTraceOptions& trace = {});

// max |λ₂(w(a, b0)) − λ₂(a, b0)| over samples of the F₁ leaf through x0.
double leaf_warp_residual(const QuotientModel& model, const Vec& x0, const Word& w, int samples = 21);

struct Example1 {
    QuotientModel model;
    double epsilon = 0.1;
    std::function<double(double)> h;
    std::function<double(double)> h_prime;
    std::function<double(double)> f;  // h⁻¹
    std::function<double(double, double)> lambda;
};

struct Example1Params {
    double amplitude = 0.3;
    double center = 1.0;
};

// Throws InvalidArgument for ε ∉ (0, ½) and InvalidH when h′ ≤ 0 somewhere.
Example1 build_example1(double epsilon = 0.1, const Example1Params& params = {});

// max |λ(x,y) − λ(x−1,h(y))h′(y)| over a grid straddling the seams x = 0, 1.
double seam_residual(const Example1& ex, int samples = 41);

struct TeoDGReport {
    int negative = 0;
    int zero = 0;
    int positive = 0;
    double min_k = 0.0;
    double max_k = 0.0;
    Vec worst_point;  // sample with the largest K
    std::optional<Vec> critical_point;
    double critical_grad_norm = 0.0;
    bool curvature_negative = false;
    bool hypotheses_hold = false;
    std::string verdict;
};

TeoDGReport teodg_diagnostic(const DoublyTwistedProduct& dtp, int samples, std::mt19937_64& rng, int grid = 21);

}  // namespace twistgeo

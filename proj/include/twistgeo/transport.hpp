#pragma once

// Parallel transport, normal parallel transport, adapted translation,
// holonomy maps and broken geodesics. Curves are parametrized on [0, 1].

#include <functional>
#include <vector>

#include "twistgeo/ode.hpp"
#include "twistgeo/productgeo.hpp"

namespace twistgeo {

struct CurveSegment {
    double t0 = 0.0;
    double t1 = 1.0;
    std::function<Vec(double)> point;
    std::function<Vec(double)> velocity;
};

class PiecewiseCurve {
public:
    PiecewiseCurve() = default;

    // Validates coverage of [0,1], continuity at breaks and (by central
    // differences) that each velocity is the derivative of its point function.
    static PiecewiseCurve from_segments(std::vector<CurveSegment> segments, double velocity_check_tol = 1e-4);
    static PiecewiseCurve line(const Vec& a, const Vec& b);
    static PiecewiseCurve polyline(const std::vector<Vec>& points);
    // C¹ spline through the control points, one segment per span, uniform knots.
    static PiecewiseCurve catmull_rom(const std::vector<Vec>& points);
    static PiecewiseCurve parametric(std::function<Vec(double)> point, std::function<Vec(double)> velocity);
    // a on [0, ½], then b on [½, 1]; requires a(1) == b(0).
    static PiecewiseCurve concat(const PiecewiseCurve& a, const PiecewiseCurve& b);

    int dim() const { return static_cast<int>(point(0.0).size()); }
    Vec point(double t) const;
    Vec velocity(double t) const;
    const std::vector<CurveSegment>& segments() const { return segments_; }
    std::vector<double> breaks() const;  // interior breakpoints t₁ < … < t_m

    // Pushes the curve through a map; velocities via the map's Jacobian.
    PiecewiseCurve mapped(std::function<Vec(const Vec&)> map) const;

private:
    const CurveSegment& segment_at(double t) const;
    std::vector<CurveSegment> segments_;
};

struct TransportSample {
    double t = 0.0;
    TangentVector v;
};

struct TransportResult {
    std::vector<TransportSample> samples;
    double integral_omega = 0.0;  // ∫ω along the curve (0 for plain parallel transport)
    double tol_achieved = 0.0;    // sup |g(v,v)(t) − g(v,v)(0)| (or of the norm law, for adapted translation)

    const TangentVector& final() const { return samples.back().v; }
};

// v′ + Γ(γ′, v) = 0; tol_achieved reports the metric-norm drift.
TransportResult parallel_transport(const MetricField& g, const PiecewiseCurve& curve, const TangentVector& v0,
                                   const OdeOptions& opts = {});

// Curve tangent to the leaves of F_leaf (factor `leaf` slots), v0 normal to them.
// Normal component of DW/dt vanishes; integral_omega = ∫ω_{other} along the curve.
// Throws NotInLeaf when the velocity acquires normal components above 1e−8.
TransportResult normal_parallel_transport(const DoublyTwistedProduct& dtp, const PiecewiseCurve& curve,
                                          const TangentVector& v0, int leaf = 1, const OdeOptions& opts = {});

// A(t) = exp(−∫_{α_t} ω) · W(t); tol_achieved measures the norm law
// |A(t)| = |v0| exp(−∫ω).
TransportResult adapted_translation(const DoublyTwistedProduct& dtp, const PiecewiseCurve& curve,
                                    const TangentVector& v0, int leaf = 1, const OdeOptions& opts = {});

struct HolonomyMap {
    CoordPoint basepoint;
    std::vector<Vec> frame;  // orthonormal frame of the normal space at basepoint
    Mat matrix;              // column j: image of frame[j] in frame coordinates
};

inline constexpr double kLoopClosureTol = 1e-7;

// Maps (loop end point, tangent vector there) to a tangent vector at the basepoint;
// identity for loops closed in the chart, a deck-map differential for quotients.
using EndpointIdentification = std::function<Vec(const Vec& end_point, const Vec& v)>;

// Coefficients of w in an orthonormal frame: c_i = ε_i g(w, e_i).
Vec frame_coefficients(const Mat& g, const std::vector<Vec>& frame, const Vec& w);

// Loop closed in chart coordinates (NotALoop otherwise).
HolonomyMap holonomy_map(const DoublyTwistedProduct& dtp, const PiecewiseCurve& loop, const std::vector<Vec>& frame,
                         int leaf = 1);
// Loop whose endpoint is identified with its start through `ident`.
HolonomyMap holonomy_map(const DoublyTwistedProduct& dtp, const PiecewiseCurve& loop, const std::vector<Vec>& frame,
                         const EndpointIdentification& ident, int leaf = 1);

struct BrokenGeodesicSpec {
    CoordPoint basepoint;
    std::vector<double> breaks;   // 0 < t₁ < … < t_m < 1
    std::vector<Vec> velocities;  // v₀ … v_m in T_basepoint
};

PiecewiseCurve broken_geodesic(const MetricField& g, const BrokenGeodesicSpec& spec, const OdeOptions& opts = {});

// v_γ(t) = P⁻¹_{γ,γ(0),γ(t)}(γ′(t)) at the requested times.
std::vector<TangentVector> velocity_profile(const MetricField& g, const PiecewiseCurve& curve,
                                            const std::vector<double>& times, const OdeOptions& opts = {});

// |γ| = Σ|v_j| for the positive definite norm in which `basis` is orthonormal.
double broken_length(const std::vector<Vec>& basis, const BrokenGeodesicSpec& spec);

// ∫ sqrt|g(γ′,γ′)| dt by adaptive quadrature on each segment.
double curve_length(const MetricField& g, const PiecewiseCurve& curve);

}  // namespace twistgeo

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "twistgeo/fixtures.hpp"
#include "twistgeo/quotient.hpp"
#include "twistgeo/transport.hpp"

using namespace twistgeo;
namespace fx = twistgeo::fixtures;
using std::numbers::pi;

namespace {

Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }
Vec v3(double a, double b, double c) { return (Vec(3) << a, b, c).finished(); }

template <class F>
void expect_error(ErrorKind kind, F&& f) {
    try {
        f();
        FAIL() << "expected " << to_string(kind);
    } catch (const GeoError& e) {
        EXPECT_EQ(e.kind(), kind) << e.what();
    }
}

double norm_sq(const MetricField& g, const TangentVector& v) { return v.comp.dot(g(v.base) * v.comp); }

PiecewiseCurve latitude(double r0) {
    return PiecewiseCurve::parametric([r0](double t) { return v2(r0, 2 * pi * t); }, [](double) { return v2(0, 2 * pi); });
}

// Horizontal curve through a point of a product: factor-1 coordinates move, factor-2 coordinates stay.
PiecewiseCurve horizontal_curve(const DoublyTwistedProduct& dtp, const Vec& x, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    const Box& d = dtp.domain();
    std::vector<Vec> pts{x};
    for (int k = 0; k < 3; ++k) {
        Vec p = pts.back();
        for (int i = 0; i < dtp.n1(); ++i) p[i] = std::clamp(p[i] + 0.3 * nd(rng), d.lo[i], d.hi[i]);
        pts.push_back(p);
    }
    return PiecewiseCurve::catmull_rom(pts);
}

}  // namespace

TEST(Curve, PolylineAndSplineAreContinuous) {
    const std::vector<Vec> pts{v2(0, 0), v2(1, 0), v2(1, 2), v2(-1, 3)};
    const PiecewiseCurve pl = PiecewiseCurve::polyline(pts);
    const PiecewiseCurve cr = PiecewiseCurve::catmull_rom(pts);
    EXPECT_EQ(pl.breaks().size(), 2u);
    for (size_t k = 0; k < pts.size(); ++k) {
        const double t = static_cast<double>(k) / 3.0;
        EXPECT_LT((pl.point(t) - pts[k]).norm(), 1e-12);
        EXPECT_LT((cr.point(t) - pts[k]).norm(), 1e-12);
    }
    // C¹ across spline breaks
    for (double t : cr.breaks()) EXPECT_LT((cr.velocity(t - 1e-12) - cr.velocity(t + 1e-12)).norm(), 1e-8);
}

TEST(Curve, RejectsWrongVelocity) {
    expect_error(ErrorKind::InvalidArgument, [] {
        PiecewiseCurve::parametric([](double t) { return v2(t, t * t); }, [](double) { return v2(1, 0); });
    });
}

TEST(Curve, RejectsDiscontinuity) {
    expect_error(ErrorKind::InvalidArgument, [] {
        PiecewiseCurve::from_segments({{0.0, 0.5, [](double t) { return v2(t, 0); }, [](double) { return v2(1, 0); }},
                                       {0.5, 1.0, [](double t) { return v2(t, 1); }, [](double) { return v2(1, 0); }}});
    });
}

TEST(Curve, ConcatAndMapped) {
    const PiecewiseCurve a = PiecewiseCurve::line(v2(0, 0), v2(1, 0));
    const PiecewiseCurve b = PiecewiseCurve::line(v2(1, 0), v2(1, 1));
    const PiecewiseCurve c = PiecewiseCurve::concat(a, b);
    EXPECT_LT((c.point(0.25) - v2(0.5, 0)).norm(), 1e-15);
    EXPECT_LT((c.velocity(0.75) - v2(0, 2)).norm(), 1e-15);
    const PiecewiseCurve m = a.mapped([](const Vec& p) { return v2(p[0] + 1, -p[1] + 2 * p[0]); });
    EXPECT_LT((m.velocity(0.5) - v2(1, 2)).norm(), 1e-8);
}

TEST(ParallelTransport, FlatKeepsComponents) {
    const PiecewiseCurve c = PiecewiseCurve::catmull_rom({v2(0, 0), v2(1, 2), v2(3, -1)});
    const TransportResult r = parallel_transport(fx::euclidean(2), c, {v2(0, 0), v2(0.3, -0.4)});
    for (const TransportSample& s : r.samples) EXPECT_LT((s.v.comp - v2(0.3, -0.4)).norm(), 1e-12);
}

TEST(ParallelTransport, SphereEquatorReturnsRadialVector) {
    const TransportResult r = parallel_transport(fx::sphere_metric(), latitude(pi / 2), {v2(pi / 2, 0), v2(1, 0)});
    EXPECT_LT((r.final().comp - v2(1, 0)).norm(), 1e-7);
    EXPECT_LT(r.tol_achieved, 1e-8);
}

TEST(ParallelTransport, SphereLatitudeRotatesByEnclosedArea) {
    // rotation 2π(1 − cos r₀) = π for r₀ = π/3
    const TransportResult r = parallel_transport(fx::sphere_metric(), latitude(pi / 3), {v2(pi / 3, 0), v2(1, 0)});
    EXPECT_LT((r.final().comp - v2(-1, 0)).norm(), 1e-7);
    // general r₀: the angle read from the transported unit vector
    const double r0 = 1.0;
    const TransportResult q = parallel_transport(fx::sphere_metric(), latitude(r0), {v2(r0, 0), v2(1, 0)});
    const double angle = std::atan2(q.final().comp[1] * std::sin(r0), q.final().comp[0]);
    const double want = std::remainder(2 * pi * (1 - std::cos(r0)), 2 * pi);
    EXPECT_NEAR(std::remainder(angle - want, 2 * pi), 0.0, 1e-7);
}

TEST(ParallelTransport, NormConservationOnFixtures) {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> nd;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const DoublyTwistedProduct dtp = fx::random_dtp(seed);
        const Box& d = dtp.domain();
        const PiecewiseCurve c = PiecewiseCurve::catmull_rom({d.sample(rng), d.sample(rng), d.sample(rng)});
        Vec v(dtp.dim());
        for (int k = 0; k < v.size(); ++k) v[k] = nd(rng);
        const TransportResult r = parallel_transport(dtp.metric(), c, {c.point(0), v});
        EXPECT_LT(r.tol_achieved, 10 * OdeOptions{}.rel_tol * (1 + std::abs(norm_sq(dtp.metric(), {c.point(0), v}))));
        for (const TransportSample& s : r.samples) EXPECT_LT((s.v.base - c.point(s.t)).norm(), 1e-12);
    }
}

TEST(ParallelTransport, BaseMismatch) {
    expect_error(ErrorKind::BaseMismatch, [] {
        parallel_transport(fx::euclidean(2), PiecewiseCurve::line(v2(0, 0), v2(1, 0)), {v2(0.5, 0), v2(1, 0)});
    });
}

TEST(NormalTransport, DirectProductKeepsComponents) {
    const DoublyTwistedProduct dtp = fx::flat_direct(2, 1);
    const PiecewiseCurve c = PiecewiseCurve::catmull_rom({v3(0, 0, 0.5), v3(1, 1, 0.5), v3(-1, 1, 0.5)});
    const TransportResult r = normal_parallel_transport(dtp, c, {c.point(0), v3(0, 0, 2)});
    for (const TransportSample& s : r.samples) EXPECT_LT((s.v.comp - v3(0, 0, 2)).norm(), 1e-12);
    EXPECT_EQ(r.integral_omega, 0.0);
}

TEST(NormalTransport, PolarAngularVectorKeepsNorm) {
    const DoublyTwistedProduct dtp = fx::polar_warped();
    const PiecewiseCurve c = PiecewiseCurve::line(v2(1, 0.3), v2(2.5, 0.3));
    const TransportResult r = normal_parallel_transport(dtp, c, {c.point(0), v2(0, 1)});
    for (const TransportSample& s : r.samples) {
        EXPECT_EQ(s.v.comp[0], 0.0);
        EXPECT_NEAR(norm_sq(dtp.metric(), s.v), 1.0, 1e-9);
        EXPECT_NEAR(s.v.comp[1], 1.0 / s.v.base[0], 1e-9);
    }
    EXPECT_LT(r.tol_achieved, 1e-9);
}

TEST(NormalTransport, NormalPartOfCovariantDerivativeVanishes) {
    const Example1 ex = build_example1();
    const DoublyTwistedProduct& dtp = ex.model.dtp;
    const PiecewiseCurve c = PiecewiseCurve::line(v2(-0.3, 1.2), v2(1.2, 1.2));
    const TransportResult r = normal_parallel_transport(dtp, c, {c.point(0), v2(0, 0.7)});
    const double h = 1e-4;
    for (double t : {0.2, 0.5, 0.8}) {
        // DW/dt = dW/dt + Γ(γ′, W), W from the ODE's interpolated samples
        const TransportResult wp = normal_parallel_transport(dtp, PiecewiseCurve::line(c.point(0), c.point(t + h)), {c.point(0), v2(0, 0.7)});
        const TransportResult wm = normal_parallel_transport(dtp, PiecewiseCurve::line(c.point(0), c.point(t - h)), {c.point(0), v2(0, 0.7)});
        const TransportResult w0 = normal_parallel_transport(dtp, PiecewiseCurve::line(c.point(0), c.point(t)), {c.point(0), v2(0, 0.7)});
        const Vec dw = (wp.final().comp - wm.final().comp) / (2 * h);
        const Vec cov = dw + christoffel_numeric(dtp.metric(), c.point(t)).contract(c.velocity(t), w0.final().comp);
        EXPECT_LT(std::abs(cov[1]), 1e-6);
    }
    EXPECT_GT(r.samples.size(), 2u);
}

TEST(NormalTransport, NotInLeafAndCaseMismatch) {
    const DoublyTwistedProduct dtp = fx::polar_warped();
    expect_error(ErrorKind::NotInLeaf, [&] {
        normal_parallel_transport(dtp, PiecewiseCurve::line(v2(1, 0), v2(2, 0.5)), {v2(1, 0), v2(0, 1)});
    });
    expect_error(ErrorKind::CaseMismatch, [&] {
        normal_parallel_transport(dtp, PiecewiseCurve::line(v2(1, 0), v2(2, 0)), {v2(1, 0), v2(1, 1)});
    });
}

TEST(AdaptedTranslation, DirectProductConstant) {
    const DoublyTwistedProduct dtp = fx::minkowski_direct();
    const PiecewiseCurve c = PiecewiseCurve::line(v3(0, 0, 0.1), v3(1, 0.5, 0.1));
    const TransportResult r = adapted_translation(dtp, c, {c.point(0), v3(0, 0, 1)});
    EXPECT_LT((r.final().comp - v3(0, 0, 1)).norm(), 1e-12);
}

TEST(AdaptedTranslation, PolarRadialSegment) {
    const DoublyTwistedProduct dtp = fx::polar_warped();
    const PiecewiseCurve c = PiecewiseCurve::line(v2(1, 0.2), v2(2, 0.2));
    const TransportResult r = adapted_translation(dtp, c, {c.point(0), v2(0, 1)});
    EXPECT_NEAR(r.integral_omega, -std::log(2.0), 1e-9);
    EXPECT_NEAR(r.final().comp[0], 0.0, 1e-12);
    EXPECT_NEAR(r.final().comp[1], 1.0, 1e-8);
    EXPECT_NEAR(std::sqrt(norm_sq(dtp.metric(), r.final())), 2.0, 1e-8);
    EXPECT_NEAR(1.0 * std::exp(-r.integral_omega), 2.0, 1e-8);
}

TEST(AdaptedTranslation, ConstantFactorTwoComponentsAndNormLaw) {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> nd;
    std::vector<DoublyTwistedProduct> dtps{fx::polar_warped(), build_example1().model.dtp};
    for (std::uint64_t seed = 0; seed < 20; ++seed) dtps.push_back(fx::random_dtp(seed));
    for (const DoublyTwistedProduct& dtp : dtps) {
        const Vec x = dtp.domain().center();
        const PiecewiseCurve c = horizontal_curve(dtp, x, rng);
        Vec v = Vec::Zero(dtp.dim());
        for (int k = 0; k < dtp.n2(); ++k) v[dtp.n1() + k] = nd(rng);
        const TransportResult r = adapted_translation(dtp, c, {x, v});
        const double n0 = std::sqrt(std::abs(norm_sq(dtp.metric(), {x, v})));
        for (const TransportSample& s : r.samples) EXPECT_LT((s.v.comp - v).cwiseAbs().maxCoeff(), 1e-6);
        const double na = std::sqrt(std::abs(norm_sq(dtp.metric(), r.final())));
        EXPECT_NEAR(na, n0 * std::exp(-r.integral_omega), 1e-6);
        EXPECT_LT(r.tol_achieved, 1e-6);
    }
}

TEST(Holonomy, ContractibleLoopInDirectProduct) {
    const DoublyTwistedProduct dtp = fx::flat_direct(2, 1);
    const PiecewiseCurve loop = PiecewiseCurve::polyline({v3(0, 0, 0), v3(1, 0, 0), v3(1, 1, 0), v3(0, 0, 0)});
    const HolonomyMap h = holonomy_map(dtp, loop, {v3(0, 0, 1)});
    EXPECT_NEAR(h.matrix(0, 0), 1.0, 1e-12);
}

TEST(Holonomy, OpenCurveAndBadFrame) {
    const DoublyTwistedProduct dtp = fx::flat_direct(2, 1);
    expect_error(ErrorKind::NotALoop, [&] { holonomy_map(dtp, PiecewiseCurve::line(v3(0, 0, 0), v3(1, 0, 0)), {v3(0, 0, 1)}); });
    const PiecewiseCurve loop = PiecewiseCurve::polyline({v3(0, 0, 0), v3(1, 0, 0), v3(0, 0, 0)});
    expect_error(ErrorKind::InvalidFrame, [&] { holonomy_map(dtp, loop, {v3(0, 0, 2)}); });
    expect_error(ErrorKind::InvalidFrame, [&] { holonomy_map(dtp, loop, {v3(1, 0, 0)}); });
}

TEST(Holonomy, CompositionLawOnRotationQuotient) {
    // the loop closed by g1² has the square of the g1 holonomy
    const QuotientModel m = fx::rotation_quotient(0.7);
    const Vec x0 = v3(0.2, 0, 0);  // the F₁ leaf closes only through the rotation axis
    const HolonomyMap h1 = quotient_holonomy(m, x0, 1, {1});
    const HolonomyMap h2 = quotient_holonomy(m, x0, 1, {1, 1});
    EXPECT_NEAR(h1.matrix(0, 0), std::cos(0.7), 1e-6);
    EXPECT_NEAR(std::abs(h1.matrix(1, 0)), std::sin(0.7), 1e-6);
    EXPECT_LT((h2.matrix - h1.matrix * h1.matrix).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Holonomy, CompositionLawOnConcatenatedChartLoops) {
    // loops closed in the chart of a doubly twisted product: holonomy(l1·l2) = holonomy(l2)∘holonomy(l1)
    const DoublyTwistedProduct dtp = fx::random_dtp(7, false);
    const Vec x0 = dtp.domain().center();
    auto loop = [&](double a, double b) {
        Vec p = x0, q = x0;
        p[0] += a;
        q[0] += b;
        return PiecewiseCurve::catmull_rom({x0, p, q, x0});
    };
    std::vector<Vec> coords;
    for (int k = 0; k < dtp.n2(); ++k) {
        Vec e = Vec::Zero(dtp.dim());
        e[dtp.n1() + k] = 1.0;
        coords.push_back(e);
    }
    const std::vector<Vec> frame = gram_schmidt(dtp.metric()(x0), coords);
    const PiecewiseCurve l1 = loop(0.3, -0.2), l2 = loop(-0.4, 0.25);
    const Mat h1 = holonomy_map(dtp, l1, frame).matrix, h2 = holonomy_map(dtp, l2, frame).matrix;
    const Mat h12 = holonomy_map(dtp, PiecewiseCurve::concat(l1, l2), frame).matrix;
    EXPECT_LT((h12 - h2 * h1).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(BrokenGeodesic, FlatPolygon) {
    BrokenGeodesicSpec spec{v2(0, 0), {0.4}, {v2(1, 0), v2(0, 2)}};
    const PiecewiseCurve c = broken_geodesic(fx::euclidean(2), spec);
    EXPECT_LT((c.point(0.4) - v2(0.4, 0)).norm(), 1e-10);
    EXPECT_LT((c.point(1.0) - v2(0.4, 1.2)).norm(), 1e-10);
    EXPECT_EQ(c.breaks(), std::vector<double>{0.4});
}

TEST(BrokenGeodesic, SphereUnitSpeedArc) {
    BrokenGeodesicSpec spec{v2(pi / 2, 0), {}, {v2(0, 1)}};
    const PiecewiseCurve c = broken_geodesic(fx::sphere_metric(), spec);
    EXPECT_NEAR(curve_length(fx::sphere_metric(), c), 1.0, 1e-8);
    // equator traversed at unit speed
    EXPECT_LT((c.point(1.0) - v2(pi / 2, 1.0)).norm(), 1e-8);
}

TEST(BrokenGeodesic, VelocityProfileRoundTrip) {
    std::mt19937_64 rng(23);
    std::normal_distribution<double> nd;
    for (const MetricField& g : {fx::euclidean(2), fx::sphere_metric()}) {
        for (int s = 0; s < 3; ++s) {
            BrokenGeodesicSpec spec{v2(1.2, 0.3), {0.3, 0.7}, {}};
            for (int k = 0; k < 3; ++k) spec.velocities.push_back(0.4 * v2(nd(rng), nd(rng)));
            const PiecewiseCurve c = broken_geodesic(g, spec);
            const std::vector<TangentVector> prof = velocity_profile(g, c, {0.15, 0.5, 0.85});
            for (size_t k = 0; k < 3; ++k) EXPECT_LT((prof[k].comp - spec.velocities[k]).norm(), 1e-5);
        }
    }
}

TEST(BrokenGeodesic, BlowUp) {
    // the metric (1 − x)^(−1/2) reaches its singularity at finite distance
    const MetricField g(1, Signature::riemannian(1), [](const Vec& x) { return Mat::Constant(1, 1, 1.0 / std::sqrt(1.0 - x[0])); });
    expect_error(ErrorKind::IntegrationError, [&] { broken_geodesic(g, {Vec::Zero(1), {}, {Vec::Constant(1, 3.0)}}); });
}

TEST(VelocityProfile, StraightLineIsConstant) {
    const PiecewiseCurve c = PiecewiseCurve::line(v2(0, 0), v2(2, 1));
    for (const TangentVector& v : velocity_profile(fx::euclidean(2), c, {0.0, 0.3, 1.0})) EXPECT_LT((v.comp - v2(2, 1)).norm(), 1e-12);
}

TEST(VelocityProfile, FlatCircleRotates) {
    const PiecewiseCurve c = PiecewiseCurve::parametric([](double t) { return v2(std::cos(2 * pi * t), std::sin(2 * pi * t)); },
                                                        [](double t) { return v2(-2 * pi * std::sin(2 * pi * t), 2 * pi * std::cos(2 * pi * t)); });
    for (double t : {0.1, 0.4, 0.9}) {
        const Vec v = velocity_profile(fx::euclidean(2), c, {t}).front().comp;
        EXPECT_LT((v - c.velocity(t)).norm(), 1e-9);
    }
}

TEST(VelocityProfile, GreatCircleIsConstant) {
    const PiecewiseCurve c = latitude(pi / 2);
    for (const TangentVector& v : velocity_profile(fx::sphere_metric(), c, {0.0, 0.25, 0.6, 1.0}))
        EXPECT_LT((v.comp - v2(0, 2 * pi)).norm(), 1e-6);
    // a non-geodesic latitude is not constant
    const std::vector<TangentVector> p = velocity_profile(fx::sphere_metric(), latitude(1.0), {0.0, 0.5});
    EXPECT_GT((p[0].comp - p[1].comp).norm(), 1e-2);
}

TEST(BrokenLength, HandSums) {
    const std::vector<Vec> e{v2(1, 0), v2(0, 1)};
    EXPECT_EQ(broken_length(e, {v2(0, 0), {}, {v2(1, 0)}}), 1.0);
    EXPECT_EQ(broken_length(e, {v2(0, 0), {0.5}, {v2(1, 0), v2(0, 1)}}), 2.0);
    EXPECT_EQ(broken_length(e, {v2(0, 0), {0.5}, {v2(3, 0), v2(0, 4)}}), 7.0);
    // a skewed orthonormal basis
    const std::vector<Vec> f{v2(2, 0), v2(1, 1)};
    EXPECT_NEAR(broken_length(f, {v2(0, 0), {}, {v2(3, 1)}}), std::sqrt(2.0), 1e-15);
}

TEST(AdaptedTranslation, EquivariantUnderDeckMaps) {
    // translating upstairs then applying a deck map agrees with translating the image data
    for (const QuotientModel& m : {fx::mobius(), fx::skewed_torus()}) {
        const PiecewiseCurve c = PiecewiseCurve::catmull_rom({v2(0.1, 0.3), v2(0.6, 0.3), v2(1.4, 0.3)});
        const TangentVector v0{c.point(0), v2(0, 0.8)};
        for (const Word& w : {Word{1}, Word{-1, -1}}) {
            const PiecewiseCurve wc = c.mapped([&](const Vec& p) { return m.apply(w, p); });
            const TransportResult up = adapted_translation(m.dtp, c, v0);
            const TransportResult down =
                adapted_translation(m.dtp, wc, {wc.point(0), m.jacobian(w, v0.base) * v0.comp});
            const Vec pushed = m.jacobian(w, up.final().base) * up.final().comp;
            EXPECT_LT((pushed - down.final().comp).norm(), 1e-6);
            EXPECT_NEAR(up.integral_omega, down.integral_omega, 1e-6);
        }
    }
}

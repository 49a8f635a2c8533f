#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "twistgeo/chartkit.hpp"
#include "twistgeo/fixtures.hpp"

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

// Plane metrics stripped of their analytic derivatives.
MetricField without_derivatives(const MetricField& g) {
    return MetricField(g.dim(), g.signature(), [g](const Vec& x) { return g(x); });
}

}  // namespace

TEST(Signature, IndexCountsNegativeEntries) {
    EXPECT_EQ(Signature::riemannian(3).index(), 0);
    EXPECT_EQ(Signature::lorentzian(3).index(), 1);
    EXPECT_EQ(Signature::lorentzian(2).concat(Signature::riemannian(1)).signs(), (std::vector<int>{-1, 1, 1}));
    expect_error(ErrorKind::InvalidArgument, [] { Signature({1, 0}); });
}

TEST(InnerProduct, EuclideanOrthonormalFrame) {
    const MetricField g = fx::euclidean(2);
    const Vec x = v2(0.3, -0.2);
    EXPECT_EQ(inner_product(g, {x, v2(1, 0)}, {x, v2(0, 1)}), 0.0);
}

TEST(InnerProduct, MinkowskiTimelike) {
    const MetricField g = fx::minkowski(2);
    const Vec x = v2(0, 0);
    EXPECT_EQ(inner_product(g, {x, v2(1, 0)}, {x, v2(1, 0)}), -1.0);
    EXPECT_EQ(causal_sign(g, {x, v2(1, 0)}), -1);
    EXPECT_EQ(causal_sign(g, {x, v2(1, 1)}), 0);
    EXPECT_EQ(causal_sign(g, {x, v2(0, 1)}), 1);
}

TEST(InnerProduct, PolarAngularVectorAtRadiusTwo) {
    const Vec x = v2(2, 0.4);
    EXPECT_DOUBLE_EQ(inner_product(fx::polar_metric(), {x, v2(0, 1)}, {x, v2(0, 1)}), 4.0);
}

TEST(InnerProduct, SymmetricInArguments) {
    const MetricField g = fx::sphere_metric();
    const Vec x = v2(1.1, 0.2);
    const TangentVector u{x, v2(0.3, -1.2)}, v{x, v2(2.0, 0.7)};
    EXPECT_NEAR(inner_product(g, u, v), inner_product(g, v, u), 1e-15);
}

TEST(InnerProduct, BaseMismatch) {
    const MetricField g = fx::euclidean(2);
    expect_error(ErrorKind::BaseMismatch, [&] { inner_product(g, {v2(0, 0), v2(1, 0)}, {v2(0, 1), v2(1, 0)}); });
}

TEST(MetricField, NonFiniteEntries) {
    const MetricField g(1, Signature::riemannian(1), [](const Vec& x) { return Mat::Constant(1, 1, std::log(x[0])); });
    expect_error(ErrorKind::NumericsError, [&] { g(Vec::Constant(1, -1.0)); });
}

TEST(MetricField, AsymmetricOutput) {
    const MetricField g(2, Signature::riemannian(2), [](const Vec&) { return (Mat(2, 2) << 1, 0.1, 0, 1).finished(); });
    expect_error(ErrorKind::NumericsError, [&] { g(v2(0, 0)); });
}

TEST(MetricField, SignatureHolds) {
    EXPECT_TRUE(fx::minkowski(3).signature_holds(v3(0, 0, 0)));
    const MetricField wrong(2, Signature::riemannian(2), [](const Vec&) { return (Mat(2, 2) << -1, 0, 0, 1).finished(); });
    EXPECT_FALSE(wrong.signature_holds(v2(0, 0)));
}

TEST(MetricField, AnalyticDerivativesAgreeWithFiniteDifferences) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> r(0.4, 2.6), th(0.0, 2 * pi);
    for (const MetricField& g : {fx::polar_metric(), fx::sphere_metric(), fx::hyperbolic_metric()}) {
        for (int s = 0; s < 20; ++s) {
            const Vec x = v2(r(rng), th(rng));
            const auto a = g.partials(x), f = g.partials_fd(x);
            for (int k = 0; k < 2; ++k) EXPECT_LT((a[static_cast<size_t>(k)] - f[static_cast<size_t>(k)]).cwiseAbs().maxCoeff(), 1e-7);
            const auto d2 = g.second_partials(x);
            ASSERT_TRUE(d2.has_value());
            // ∂_r∂_r g by nested differences of the analytic first partials
            const double h = kSecondDerivStep;
            const Mat fd = (g.partials(x + v2(h, 0))[0] - g.partials(x - v2(h, 0))[0]) / (2 * h);
            EXPECT_LT(((*d2)[0] - fd).cwiseAbs().maxCoeff(), 1e-7 * (1.0 + (*d2)[0].cwiseAbs().maxCoeff()));
        }
    }
}

TEST(Christoffel, EuclideanVanishes) {
    const Christoffel gam = christoffel_numeric(fx::euclidean(2), v2(0.7, -1.3));
    for (int k = 0; k < 2; ++k)
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) EXPECT_EQ(gam(k, i, j), 0.0);
}

TEST(Christoffel, PolarAtRadiusTwo) {
    const Christoffel gam = christoffel_numeric(fx::polar_metric(), v2(2, 0.3));
    EXPECT_NEAR(gam(0, 1, 1), -2.0, 1e-12);
    EXPECT_NEAR(gam(1, 0, 1), 0.5, 1e-12);
    EXPECT_NEAR(gam(1, 1, 0), 0.5, 1e-12);
    // same values through central differences alone
    const Christoffel fd = christoffel_numeric(without_derivatives(fx::polar_metric()), v2(2, 0.3));
    EXPECT_NEAR(fd(0, 1, 1), -2.0, 1e-8);
    EXPECT_NEAR(fd(1, 0, 1), 0.5, 1e-8);
}

TEST(Christoffel, SphereEquator) {
    const Christoffel gam = christoffel_numeric(fx::sphere_metric(), v2(pi / 2, 1.0));
    EXPECT_NEAR(gam(0, 1, 1), 0.0, 1e-12);
}

TEST(Christoffel, DegenerateMetric) {
    const MetricField g(2, Signature::riemannian(2), [](const Vec& x) { return (Mat(2, 2) << 1, 0, 0, x[0] * x[0]).finished(); });
    expect_error(ErrorKind::DegenerateMetric, [&] { christoffel_numeric(g, v2(0, 0)); });
}

TEST(Christoffel, SymmetricAndMetricCompatibleOnRandomProducts) {
    std::mt19937_64 rng(11);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const DoublyTwistedProduct dtp = fx::random_dtp(seed);
        const MetricField& g = dtp.metric();
        const int n = g.dim();
        for (int s = 0; s < 10; ++s) {
            const Vec x = dtp.domain().sample(rng);
            const Christoffel gam = christoffel_numeric(g, x);
            const Mat gx = g(x);
            const auto dg = g.partials(x);
            for (int k = 0; k < n; ++k)
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j) {
                        EXPECT_NEAR(gam(k, i, j), gam(k, j, i), 1e-9);
                        double r = dg[static_cast<size_t>(k)](i, j);
                        for (int l = 0; l < n; ++l) r -= gam(l, k, i) * gx(l, j) + gam(l, k, j) * gx(i, l);
                        EXPECT_NEAR(r, 0.0, 1e-5);
                    }
        }
    }
}

TEST(Riemann, EuclideanVanishes) {
    EXPECT_LT(riemann_numeric(fx::euclidean(3), v3(0.2, 0.1, -0.4)).max_abs(), 1e-8);
    const MetricField g = without_derivatives(fx::euclidean(3));
    EXPECT_LT(riemann_numeric(g, v3(0.2, 0.1, -0.4)).max_abs(), 1e-8);
}

TEST(Riemann, SphereLoweredComponent) {
    const Vec x = v2(1.0, 0.5);
    const MetricField g = fx::sphere_metric();
    const Riemann r = riemann_numeric(g, x);
    EXPECT_NEAR(r.lowered(g(x), 0, 1, 0, 1), std::sin(1.0) * std::sin(1.0), 1e-9);
    // finite-difference path
    const MetricField gfd = without_derivatives(g);
    EXPECT_NEAR(riemann_numeric(gfd, x).lowered(g(x), 0, 1, 0, 1), std::sin(1.0) * std::sin(1.0), 1e-5);
}

TEST(Riemann, FirstSlotAntisymmetry) {
    const Vec x = v2(1.3, 0.2);
    const MetricField g = without_derivatives(fx::hyperbolic_metric());
    const Riemann r = riemann_numeric(g, x);
    const Mat gx = g(x);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int c = 0; c < 2; ++c)
                for (int d = 0; d < 2; ++d) {
                    EXPECT_NEAR(r.lowered(gx, a, b, c, d), -r.lowered(gx, a, b, d, c), 1e-6);
                    EXPECT_NEAR(r.lowered(gx, a, b, c, d), -r.lowered(gx, b, a, c, d), 1e-6);
                }
}

TEST(SectionalCurvature, SphereHyperbolicEuclidean) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> r(0.4, 2.6), th(0.0, 2 * pi);
    for (int s = 0; s < 10; ++s) {
        const Vec x = v2(r(rng), th(rng));
        EXPECT_NEAR(sectional_curvature_numeric(fx::sphere_metric(), x, v2(1, 0), v2(0, 1)), 1.0, 1e-6);
        EXPECT_NEAR(sectional_curvature_numeric(fx::hyperbolic_metric(), x, v2(1, 0), v2(0, 1)), -1.0, 1e-6);
        EXPECT_NEAR(sectional_curvature_numeric(fx::euclidean(2), x, v2(1, 0), v2(0, 1)), 0.0, 1e-12);
    }
}

TEST(SectionalCurvature, FiniteDifferenceSphere) {
    const MetricField g = without_derivatives(fx::sphere_metric());
    EXPECT_NEAR(sectional_curvature_numeric(g, v2(1.2, 0.0), v2(1, 0), v2(0, 1)), 1.0, 1e-5);
}

TEST(SectionalCurvature, InvariantUnderChangeOfBasis) {
    const DoublyTwistedProduct dtp = fx::random_dtp(5, false);
    const MetricField& g = dtp.metric();
    std::mt19937_64 rng(5);
    std::normal_distribution<double> nd;
    const int n = g.dim();
    for (int s = 0; s < 5; ++s) {
        const Vec x = dtp.domain().sample(rng);
        Vec u(n), v(n);
        for (int k = 0; k < n; ++k) {
            u[k] = nd(rng);
            v[k] = nd(rng);
        }
        const double k0 = sectional_curvature_numeric(g, x, u, v);
        const double k1 = sectional_curvature_numeric(g, x, 2.0 * u - 0.5 * v, 0.3 * u + 1.7 * v);
        EXPECT_NEAR(k0, k1, 1e-6);
    }
}

TEST(SectionalCurvature, DegeneratePlane) {
    const MetricField g = fx::euclidean(2);
    expect_error(ErrorKind::DegeneratePlane, [&] { sectional_curvature_numeric(g, v2(0, 0), v2(1, 1), v2(2, 2)); });
    const MetricField m = fx::minkowski(3);
    expect_error(ErrorKind::DegeneratePlane, [&] { sectional_curvature_numeric(m, v3(0, 0, 0), v3(1, 1, 0), v3(0, 0, 1)); });
}

TEST(Gradient, CoordinateFunction) {
    const ScalarField f([](const Vec& x) { return x[0]; });
    const Vec g = gradient(f, fx::euclidean(2), v2(0.4, 0.9)).comp;
    EXPECT_NEAR(g[0], 1.0, 1e-10);
    EXPECT_NEAR(g[1], 0.0, 1e-10);
}

TEST(Gradient, LogRadiusOnPolar) {
    const ScalarField f([](const Vec& x) { return std::log(x[0]); });
    const Vec g = gradient(f, fx::polar_metric(), v2(2, 0.1)).comp;
    EXPECT_NEAR(g[0], 0.5, 1e-9);
    EXPECT_NEAR(g[1], 0.0, 1e-12);
}

TEST(Gradient, Constant) {
    const Vec g = gradient(ScalarField::constant(3.0), fx::polar_metric(), v2(2, 0.1)).comp;
    EXPECT_EQ(g.norm(), 0.0);
}

TEST(Hessian, HalfSquaredNormIsIdentity) {
    const ScalarField f([](const Vec& x) { return 0.5 * x.squaredNorm(); });
    const Vec x = v2(0.3, -0.8);
    const Vec h = hessian_endomorphism(f, fx::euclidean(2), x, {x, v2(0.6, 1.4)}).comp;
    EXPECT_NEAR(h[0], 0.6, 1e-6);
    EXPECT_NEAR(h[1], 1.4, 1e-6);
}

TEST(Hessian, LinearIsZero) {
    const ScalarField f([](const Vec& x) { return 2.0 * x[0] - 3.0 * x[1]; });
    const Vec x = v2(0.3, -0.8);
    EXPECT_LT(hessian_endomorphism(f, fx::euclidean(2), x, {x, v2(1, 1)}).comp.norm(), 1e-6);
}

TEST(Hessian, CosineOnSphere) {
    const ScalarField f([](const Vec& x) { return std::cos(x[0]); });
    const Vec x = v2(1.0, 0.3);
    const Vec h = hessian_endomorphism(f, fx::sphere_metric(), x, {x, v2(1, 0)}).comp;
    EXPECT_NEAR(h[0], -std::cos(1.0), 1e-6);
    EXPECT_NEAR(h[1], 0.0, 1e-6);
    const Vec h2 = hessian_endomorphism(f, fx::sphere_metric(), x, {x, v2(0, 1)}).comp;
    EXPECT_NEAR(h2[1], -std::cos(1.0), 1e-6);
}

TEST(Hessian, BilinearFormSymmetric) {
    const DoublyTwistedProduct dtp = fx::random_dtp(2);
    const MetricField& g = dtp.metric();
    const ScalarField f([](const Vec& x) { return std::sin(x.sum()) + x.squaredNorm(); });
    std::mt19937_64 rng(2);
    std::normal_distribution<double> nd;
    const int n = g.dim();
    for (int s = 0; s < 5; ++s) {
        const Vec x = dtp.domain().sample(rng);
        Vec u(n), v(n);
        for (int k = 0; k < n; ++k) {
            u[k] = nd(rng);
            v[k] = nd(rng);
        }
        const Mat gx = g(x);
        const double a = v.dot(gx * hessian_endomorphism(f, g, x, {x, u}).comp);
        const double b = u.dot(gx * hessian_endomorphism(f, g, x, {x, v}).comp);
        EXPECT_NEAR(a, b, 1e-7);
    }
}

TEST(ExteriorDerivative, ExactFormIsClosed) {
    const ScalarField f([](const Vec& x) { return std::exp(0.3 * x[0]) * std::sin(x[1]) + x[0] * x[1] * x[1]; });
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int s = 0; s < 10; ++s) {
        const Vec x = v2(u(rng), u(rng));
        const Mat d = exterior_derivative_numeric([&f](const Vec& y) { return f.partials(y); }, x);
        EXPECT_LT(d.cwiseAbs().maxCoeff(), 1e-6);
    }
}

TEST(ExteriorDerivative, HandComputed) {
    // ω = x² dx¹ (components (x[1], 0)); (dω)_{21} = ∂₂ω₁ − ∂₁ω₂ = 1
    const Mat d = exterior_derivative_numeric([](const Vec& y) { return v2(y[1], 0.0); }, v2(0.5, 0.2));
    EXPECT_NEAR(d(1, 0), 1.0, 1e-9);
    EXPECT_NEAR(d(0, 1), -1.0, 1e-9);
}

TEST(ExteriorDerivative, NonFiniteSample) {
    expect_error(ErrorKind::NumericsError, [] {
        exterior_derivative_numeric([](const Vec& y) { return v2(std::log(y[0]), 0.0); }, v2(0.0, 0.0));
    });
}

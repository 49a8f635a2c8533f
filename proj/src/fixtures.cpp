#include "twistgeo/fixtures.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace twistgeo::fixtures {

namespace {

using std::numbers::pi;

Mat diag2(double a, double b) { return (Mat(2, 2) << a, 0.0, 0.0, b).finished(); }

Box box1(double lo, double hi) { return {Vec::Constant(1, lo), Vec::Constant(1, hi)}; }
Box boxn(int n, double lo, double hi) { return {Vec::Constant(n, lo), Vec::Constant(n, hi)}; }

MetricField flat1() { return euclidean(1); }

WarpFn unit_warp() { return {ScalarField::constant(1.0), WarpDependency::Constant}; }

// λ(x) = s(x[k]) for one product coordinate k.
WarpFn coordinate_warp(int k, std::function<double(double)> s, std::function<double(double)> ds,
                       std::function<double(double)> dds, WarpDependency dep) {
    ScalarField f(
        [k, s](const Vec& x) { return s(x[k]); },
        [k, ds](const Vec& x) {
            Vec g = Vec::Zero(x.size());
            g[k] = ds(x[k]);
            return g;
        },
        [k, dds](const Vec& x) {
            Mat h = Mat::Zero(x.size(), x.size());
            h(k, k) = dds(x[k]);
            return h;
        });
    return {std::move(f), dep};
}

MetricField plane_metric(std::function<double(double)> f2, std::function<double(double)> df2,
                         std::function<double(double)> ddf2) {
    // dr² + f(r)²dθ² with f2 = f², df2 = (f²)′, ddf2 = (f²)″
    return MetricField(
        2, Signature::riemannian(2), [f2](const Vec& x) { return diag2(1.0, f2(x[0])); },
        [df2](const Vec& x) { return std::vector<Mat>{diag2(0.0, df2(x[0])), Mat::Zero(2, 2)}; },
        [ddf2](const Vec& x) {
            return std::vector<Mat>{diag2(0.0, ddf2(x[0])), Mat::Zero(2, 2), Mat::Zero(2, 2), Mat::Zero(2, 2)};
        });
}

DoublyTwistedProduct radial_warped(double r0, double r1, std::function<double(double)> s,
                                   std::function<double(double)> ds, std::function<double(double)> dds) {
    FactorManifold f1{"r", 1, flat1(), box1(r0, r1)};
    FactorManifold f2{"theta", 1, flat1(), box1(0.0, 2.0 * pi)};
    return assemble(std::move(f1), std::move(f2), unit_warp(),
                    coordinate_warp(0, std::move(s), std::move(ds), std::move(dds), WarpDependency::OnFactor1Only));
}

Vec shift(const Vec& a, double d) { return (a.array() + d).matrix(); }

QuotientModel flat_line_quotient(std::vector<DeckGenerator> gens, double ylo, double yhi) {
    FactorManifold f1{"x", 1, flat1(), box1(-1.0, 2.0)};
    FactorManifold f2{"y", 1, flat1(), box1(ylo, yhi)};
    QuotientModel m;
    m.dtp = assemble(std::move(f1), std::move(f2), unit_warp(), unit_warp());
    m.generators = std::move(gens);
    return m;
}

FactorMap translation(double d) {
    return {[d](const Vec& a) { return shift(a, d); }, [d](const Vec& a) { return shift(a, -d); }};
}

FactorMap identity_map() {
    return {[](const Vec& a) { return a; }, [](const Vec& a) { return a; }};
}

}  // namespace

MetricField euclidean(int n) {
    return MetricField(
        n, Signature::riemannian(n), [n](const Vec&) { return Mat::Identity(n, n).eval(); },
        [n](const Vec&) { return std::vector<Mat>(static_cast<size_t>(n), Mat::Zero(n, n)); },
        [n](const Vec&) { return std::vector<Mat>(static_cast<size_t>(n * n), Mat::Zero(n, n)); });
}

MetricField minkowski(int n) {
    Mat eta = Mat::Identity(n, n);
    eta(0, 0) = -1.0;
    return MetricField(
        n, Signature::lorentzian(n), [eta](const Vec&) { return eta; },
        [n](const Vec&) { return std::vector<Mat>(static_cast<size_t>(n), Mat::Zero(n, n)); },
        [n](const Vec&) { return std::vector<Mat>(static_cast<size_t>(n * n), Mat::Zero(n, n)); });
}

MetricField polar_metric() {
    return plane_metric([](double r) { return r * r; }, [](double r) { return 2.0 * r; }, [](double) { return 2.0; });
}

MetricField sphere_metric() {
    return plane_metric([](double r) { return std::sin(r) * std::sin(r); }, [](double r) { return std::sin(2.0 * r); },
                        [](double r) { return 2.0 * std::cos(2.0 * r); });
}

MetricField hyperbolic_metric() {
    return plane_metric([](double r) { return std::sinh(r) * std::sinh(r); },
                        [](double r) { return std::sinh(2.0 * r); }, [](double r) { return 2.0 * std::cosh(2.0 * r); });
}

DoublyTwistedProduct flat_direct(int n1, int n2) {
    FactorManifold f1{"E1", n1, euclidean(n1), boxn(n1, -2.0, 2.0)};
    FactorManifold f2{"E2", n2, euclidean(n2), boxn(n2, -2.0, 2.0)};
    return assemble(std::move(f1), std::move(f2), unit_warp(), unit_warp());
}

DoublyTwistedProduct polar_warped() {
    return radial_warped(0.5, 3.0, [](double r) { return r; }, [](double) { return 1.0; }, [](double) { return 0.0; });
}

DoublyTwistedProduct sphere_warped() {
    return radial_warped(0.3, 2.8, [](double r) { return std::sin(r); }, [](double r) { return std::cos(r); },
                         [](double r) { return -std::sin(r); });
}

DoublyTwistedProduct hyperbolic_warped() {
    return radial_warped(0.3, 2.5, [](double r) { return std::sinh(r); }, [](double r) { return std::cosh(r); },
                         [](double r) { return std::sinh(r); });
}

DoublyTwistedProduct minkowski_direct() {
    FactorManifold f1{"R11", 2, minkowski(2), boxn(2, -2.0, 2.0)};
    FactorManifold f2{"R", 1, flat1(), box1(-2.0, 2.0)};
    return assemble(std::move(f1), std::move(f2), unit_warp(), unit_warp());
}

DoublyTwistedProduct lorentz_sphere() {
    FactorManifold f1{"time", 1, minkowski(1), box1(-2.0, 2.0)};
    FactorManifold f2{"S2", 2, sphere_metric(), {(Vec(2) << 0.3, 0.0).finished(), (Vec(2) << 2.8, 2.0 * pi).finished()}};
    return assemble(std::move(f1), std::move(f2), unit_warp(), unit_warp());
}

DoublyTwistedProduct lorentz_warped() {
    FactorManifold f1{"x", 1, flat1(), box1(-2.0, 2.0)};
    FactorManifold f2{"R11", 2, minkowski(2), boxn(2, -2.0, 2.0)};
    return assemble(std::move(f1), std::move(f2), unit_warp(),
                    coordinate_warp(0, [](double x) { return 1.0 + 0.3 * x * x; }, [](double x) { return 0.6 * x; },
                                    [](double) { return 0.6; }, WarpDependency::OnFactor1Only));
}

DoublyTwistedProduct parabola_warped() {
    FactorManifold f1{"x", 1, flat1(), box1(-2.0, 2.0)};
    FactorManifold f2{"y", 1, flat1(), box1(-2.0, 2.0)};
    return assemble(std::move(f1), std::move(f2), unit_warp(),
                    coordinate_warp(0, [](double x) { return 1.0 + x * x; }, [](double x) { return 2.0 * x; },
                                    [](double) { return 2.0; }, WarpDependency::OnFactor1Only));
}

DoublyTwistedProduct random_dtp(std::uint64_t seed, bool allow_lorentzian) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_int_distribution<int> dim(1, 2);
    const int n1 = dim(rng), n2 = dim(rng);
    const bool lorentz = allow_lorentzian && std::bernoulli_distribution(0.3)(rng);

    auto factor = [&](int d, bool timelike, const char* name) {
        const double a0 = 0.3 * u(rng), b0 = 1.0 + 0.5 * u(rng), p0 = u(rng);
        const double a1 = 0.3 * u(rng), b1 = 1.0 + 0.5 * u(rng), p1 = u(rng);
        const double c = 0.1 * u(rng);
        const double s = timelike ? -1.0 : 1.0;
        MetricField::Eval eval;
        if (d == 1) {
            eval = [=](const Vec& x) { return Mat::Constant(1, 1, s * std::exp(a0 * std::sin(b0 * x[0] + p0))); };
        } else {
            eval = [=](const Vec& x) {
                Mat g(2, 2);
                g(0, 0) = s * std::exp(a0 * std::sin(b0 * x[1] + p0));
                g(1, 1) = std::exp(a1 * std::cos(b1 * x[0] + p1));
                g(0, 1) = g(1, 0) = c * std::sin(x[0] + x[1]);
                return g;
            };
        }
        Signature sig = timelike ? Signature::lorentzian(d) : Signature::riemannian(d);
        return FactorManifold{name, d, MetricField(d, sig, eval), boxn(d, -1.0, 1.0)};
    };

    auto warp = [&](int n) {
        Vec k1(n), k2(n);
        for (int i = 0; i < n; ++i) {
            k1[i] = u(rng);
            k2[i] = u(rng);
        }
        const double a = 0.2 * u(rng), b = 0.1 * u(rng), p = u(rng);
        return WarpFn{ScalarField([=](const Vec& x) { return std::exp(a * std::sin(k1.dot(x) + p) + b * std::cos(k2.dot(x))); }),
                      WarpDependency::OnProduct};
    };

    FactorManifold f1 = factor(n1, lorentz, "M1");
    FactorManifold f2 = factor(n2, false, "M2");
    WarpFn l1 = warp(n1 + n2), l2 = warp(n1 + n2);
    return assemble(std::move(f1), std::move(f2), std::move(l1), std::move(l2));
}

QuotientModel mobius() {
    DeckGenerator g{"a", translation(1.0), {[](const Vec& b) { return (-b).eval(); }, [](const Vec& b) { return (-b).eval(); }},
                    1.0, 1.0};
    QuotientModel m = flat_line_quotient({g}, -2.0, 2.0);
    const double inf = std::numeric_limits<double>::infinity();
    m.fundamental_box = {(Vec(2) << 0.0, -inf).finished(), (Vec(2) << 1.0, inf).finished()};
    return m;
}

QuotientModel flat_torus() {
    QuotientModel m = flat_line_quotient({{"a", translation(1.0), identity_map(), 1.0, 1.0},
                                          {"b", identity_map(), translation(1.0), 1.0, 1.0}},
                                         -1.0, 2.0);
    m.fundamental_box = {Vec::Zero(2), Vec::Ones(2)};
    return m;
}

QuotientModel skewed_torus() {
    QuotientModel m = flat_line_quotient({{"a", translation(1.0), identity_map(), 1.0, 1.0},
                                          {"b", translation(0.5), translation(1.0), 1.0, 1.0}},
                                         -1.0, 2.0);
    m.fundamental_box = {Vec::Zero(2), Vec::Ones(2)};
    return m;
}

QuotientModel rotation_quotient(double theta) {
    const double c = std::cos(theta), s = std::sin(theta);
    Mat r(2, 2);
    r << c, -s, s, c;
    FactorManifold f1{"x", 1, flat1(), box1(-1.0, 2.0)};
    FactorManifold f2{"E2", 2, euclidean(2), boxn(2, -2.0, 2.0)};
    QuotientModel m;
    m.dtp = assemble(std::move(f1), std::move(f2), unit_warp(), unit_warp());
    m.generators = {{"rot", translation(1.0),
                     {[r](const Vec& b) { return (r * b).eval(); }, [r](const Vec& b) { return (r.transpose() * b).eval(); }},
                     1.0, 1.0}};
    const double inf = std::numeric_limits<double>::infinity();
    m.fundamental_box = {(Vec(3) << 0.0, -inf, -inf).finished(), (Vec(3) << 1.0, inf, inf).finished()};
    return m;
}

QuotientModel homothety_quotient() {
    FactorManifold f1{"x", 1, flat1(), box1(-1.0, 2.0)};
    FactorManifold f2{"y", 1, flat1(), box1(-2.0, 2.0)};
    QuotientModel m;
    m.dtp = assemble(std::move(f1), std::move(f2), unit_warp(),
                     coordinate_warp(
                         0, [](double x) { return std::exp2(-x); }, [](double x) { return -std::log(2.0) * std::exp2(-x); },
                         [](double x) { return std::log(2.0) * std::log(2.0) * std::exp2(-x); }, WarpDependency::OnFactor1Only));
    m.generators = {{"h", translation(1.0),
                     {[](const Vec& b) { return (2.0 * b).eval(); }, [](const Vec& b) { return (0.5 * b).eval(); }}, 1.0, 2.0}};
    const double inf = std::numeric_limits<double>::infinity();
    m.fundamental_box = {(Vec(2) << 0.0, -inf).finished(), (Vec(2) << 1.0, inf).finished()};
    return m;
}

QuotientModel broken_torus() {
    QuotientModel m = flat_torus();
    FactorManifold f1 = m.dtp.factor1(), f2 = m.dtp.factor2();
    m.dtp = assemble(std::move(f1), std::move(f2), unit_warp(),
                     coordinate_warp(0, [](double x) { return std::exp(0.1 * x); }, [](double x) { return 0.1 * std::exp(0.1 * x); },
                                     [](double x) { return 0.01 * std::exp(0.1 * x); }, WarpDependency::OnFactor1Only));
    return m;
}

}  // namespace twistgeo::fixtures

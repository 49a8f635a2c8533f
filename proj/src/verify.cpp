#include "twistgeo/verify.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>

namespace twistgeo {

Tolerances Tolerances::uniform(double tol) {
    Tolerances t;
    t.connection = t.curvature = t.curvature_value = t.transport = t.holonomy = t.seam = t.oneill = t.lightlike_flat = t.warp = t.leaf_length = tol;
    return t;
}

Vec interior_sample(const Box& box, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.05, 0.95);
    Vec x(box.dim());
    for (int i = 0; i < box.dim(); ++i) x[i] = box.lo[i] + u(rng) * (box.hi[i] - box.lo[i]);
    return x;
}

Vec random_factor_vector(const DoublyTwistedProduct& dtp, int i, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    Vec v = Vec::Zero(dtp.dim());
    for (int k = 0; k < dtp.factor_dim(i); ++k) v[dtp.offset(i) + k] = nd(rng);
    return v;
}

PiecewiseCurve horizontal_curve(const DoublyTwistedProduct& dtp, const Vec& x, std::mt19937_64& rng, double scale) {
    std::normal_distribution<double> nd;
    const Box& d = dtp.domain();
    std::vector<Vec> pts{x};
    for (int k = 0; k < 3; ++k) {
        Vec p = pts.back();
        for (int i = 0; i < dtp.n1(); ++i) {
            const double margin = 0.02 * (d.hi[i] - d.lo[i]);
            p[i] = std::clamp(p[i] + scale * nd(rng), d.lo[i] + margin, d.hi[i] - margin);
        }
        pts.push_back(p);
    }
    return PiecewiseCurve::catmull_rom(pts);
}

OracleStats connection_vs_oracle(const DoublyTwistedProduct& dtp, int points, std::mt19937_64& rng) {
    OracleStats s;
    const std::pair<int, int> slots[] = {{1, 1}, {2, 2}, {1, 2}};
    const ConnectionCase cases[] = {ConnectionCase::HH, ConnectionCase::VV, ConnectionCase::HV};
    for (int p = 0; p < points; ++p) {
        const Vec x = interior_sample(dtp.domain(), rng);
        const Christoffel gam = christoffel_numeric(dtp.metric(), x);
        for (int c = 0; c < 3; ++c) {
            const Vec a = random_factor_vector(dtp, slots[c].first, rng);
            const Vec b = random_factor_vector(dtp, slots[c].second, rng);
            const Vec closed = connection_closed_form(dtp, x, {x, a}, {x, b}, cases[c]).comp;
            s.max_residual = std::max(s.max_residual, (closed - gam.contract(a, b)).cwiseAbs().maxCoeff());
            ++s.samples;
        }
    }
    return s;
}

namespace {

// Unit vector along v, or nothing when v is too close to null.
std::optional<Vec> unit(const Mat& g, const Vec& v) {
    const double q = v.dot(g * v);
    if (std::abs(q) < 1e-3 * v.squaredNorm()) return std::nullopt;
    return Vec(v / std::sqrt(std::abs(q)));
}

void record(CurvatureStats& s, double closed, double oracle) {
    s.max_residual = std::max(s.max_residual, std::abs(closed - oracle));
    s.min_k = s.planes == 0 ? closed : std::min(s.min_k, closed);
    s.max_k = s.planes == 0 ? closed : std::max(s.max_k, closed);
    ++s.planes;
}

}  // namespace

CurvatureStats curvature_vs_oracle(const DoublyTwistedProduct& dtp, int points, std::mt19937_64& rng) {
    CurvatureStats s;
    for (int p = 0; p < points; ++p) {
        const Vec x = interior_sample(dtp.domain(), rng);
        const Mat g = dtp.metric()(x);
        for (int i : {1, 2}) {
            if (dtp.factor_dim(i) < 2) continue;
            try {
                const std::vector<Vec> e =
                    gram_schmidt(g, {random_factor_vector(dtp, i, rng), random_factor_vector(dtp, i, rng)});
                const FactorPlane plane{i, {x, e[0]}, {x, e[1]}};
                record(s, sectional_curvature_closed_form(dtp, plane), sectional_curvature_numeric(dtp.metric(), plane.u, plane.v));
            } catch (const GeoError& err) {
                if (err.kind() != ErrorKind::DegeneratePlane) throw;
            }
        }
        const auto h = unit(g, random_factor_vector(dtp, 1, rng));
        const auto v = unit(g, random_factor_vector(dtp, 2, rng));
        if (h && v) {
            const MixedPlane plane{{x, *h}, {x, *v}};
            record(s, sectional_curvature_closed_form(dtp, plane), sectional_curvature_numeric(dtp.metric(), plane.horiz, plane.vert));
        }
    }
    return s;
}

double curvature_biquadratic_direct(const MetricField& g, const Vec& x, const Vec& v, const Vec& u) {
    const double h = kSecondDerivStep;
    auto at = [&](const Vec& d) { return g(x + h * d); };
    const Mat g0 = g(x);
    const Mat duu = (at(u) - 2.0 * g0 + at(-u)) / (h * h);
    const Mat dvv = (at(v) - 2.0 * g0 + at(-v)) / (h * h);
    const Mat dvu = (at(v + u) - at(v - u) - at(u - v) + at(-v - u)) / (4.0 * h * h);
    const Christoffel gam = christoffel_numeric(g, x);
    const Vec guu = gam.contract(u, u), gvv = gam.contract(v, v), gvu = gam.contract(v, u);
    const double second = 0.5 * (v.dot(duu * v) + u.dot(dvv * u) - 2.0 * v.dot(dvu * u));
    const double quadratic = guu.dot(g0 * gvv) - gvu.dot(g0 * gvu);
    return -(second + quadratic);
}

LightlikeStats lightlike_vs_oracle(const MetricField& g, const Box& domain, int points, std::mt19937_64& rng) {
    LightlikeStats s;
    const int n = g.dim(), index = g.signature().index();
    if (index < 1 || n - index < 2) return s;
    std::normal_distribution<double> nd;
    for (int p = 0; p < points; ++p) {
        const Vec x = interior_sample(domain, rng);
        const Mat gx = g(x);
        const Eigen::SelfAdjointEigenSolver<Mat> eig(gx);
        std::vector<Vec> timelike, spacelike;
        for (int k = 0; k < n; ++k) {
            const Vec e = eig.eigenvectors().col(k) / std::sqrt(std::abs(eig.eigenvalues()[k]));
            (eig.eigenvalues()[k] < 0 ? timelike : spacelike).push_back(e);
        }
        // two orthonormal spacelike directions mixed at random
        Vec c1(static_cast<int>(spacelike.size())), c2(c1.size());
        for (int k = 0; k < c1.size(); ++k) c1[k] = nd(rng), c2[k] = nd(rng);
        c1.normalize();
        c2 = (c2 - c2.dot(c1) * c1).normalized();
        Vec s1 = Vec::Zero(n), s2 = Vec::Zero(n);
        for (int k = 0; k < c1.size(); ++k) {
            s1 += c1[k] * spacelike[static_cast<size_t>(k)];
            s2 += c2[k] * spacelike[static_cast<size_t>(k)];
        }
        const Vec xi = timelike.front();
        const Vec u = -xi + s1;  // null, g(u, ξ) = 1
        const Vec v = s2 + nd(rng) * u;
        const double k = lightlike_sectional_curvature(g, {x, xi}, {x, u}, {x, v});
        const double oracle = curvature_biquadratic_direct(g, x, v, u) / v.dot(gx * v);
        s.max_residual = std::max(s.max_residual, std::abs(k - oracle));
        s.max_abs_k = std::max(s.max_abs_k, std::abs(k));
        ++s.planes;
    }
    return s;
}

OracleStats oneill_vs_definitional(const DoublyTwistedProduct& dtp, int points, std::mt19937_64& rng) {
    OracleStats s;
    for (int p = 0; p < points; ++p) {
        const Vec x = interior_sample(dtp.domain(), rng);
        const Vec e = random_factor_vector(dtp, 1, rng) + random_factor_vector(dtp, 2, rng);
        const Vec f = random_factor_vector(dtp, 1, rng) + random_factor_vector(dtp, 2, rng);
        const Vec d = oneill_T(dtp, x, e, f).comp - oneill_T_definitional(dtp, x, e, f).comp;
        s.max_residual = std::max(s.max_residual, d.cwiseAbs().maxCoeff());
        ++s.samples;
    }
    return s;
}

AdaptedStats adapted_translation_stats(const DoublyTwistedProduct& dtp, int curves, std::mt19937_64& rng) {
    AdaptedStats s;
    const OdeOptions opts;
    for (int c = 0; c < curves; ++c) {
        const Vec x = interior_sample(dtp.domain(), rng);
        const PiecewiseCurve curve = horizontal_curve(dtp, x, rng);
        const Vec v = random_factor_vector(dtp, 2, rng);
        const TransportResult a = adapted_translation(dtp, curve, {x, v});
        for (const TransportSample& smp : a.samples)
            s.max_component_drift = std::max(s.max_component_drift, (smp.v.comp - v).cwiseAbs().maxCoeff());
        s.max_norm_law = std::max(s.max_norm_law, a.tol_achieved);

        const Vec w = v + random_factor_vector(dtp, 1, rng);
        const double q0 = std::abs(w.dot(dtp.metric()(x) * w));
        const TransportResult p = parallel_transport(dtp.metric(), curve, {x, w});
        s.max_parallel_drift = std::max(s.max_parallel_drift, p.tol_achieved / (1.0 + q0));
        s.parallel_budget = 10.0 * opts.rel_tol;
        ++s.curves;
    }
    return s;
}

}  // namespace twistgeo

#include "twistgeo/productgeo.hpp"

#include <cmath>
#include <sstream>

namespace twistgeo {

bool Box::contains(const Vec& x) const {
    for (int i = 0; i < dim(); ++i)
        if (x[i] < lo[i] || x[i] > hi[i]) return false;
    return true;
}

Box Box::concat(const Box& other) const {
    Box b;
    b.lo.resize(dim() + other.dim());
    b.hi.resize(dim() + other.dim());
    b.lo << lo, other.lo;
    b.hi << hi, other.hi;
    return b;
}

std::vector<Vec> Box::grid(int per_dim) const {
    const int n = dim();
    std::vector<Vec> out;
    if (per_dim < 1) return out;
    std::vector<int> idx(static_cast<size_t>(n), 0);
    while (true) {
        Vec p(n);
        for (int i = 0; i < n; ++i) {
            const double t = per_dim == 1 ? 0.5 : static_cast<double>(idx[static_cast<size_t>(i)]) / (per_dim - 1);
            p[i] = lo[i] + t * (hi[i] - lo[i]);
        }
        out.push_back(std::move(p));
        int k = 0;
        while (k < n && ++idx[static_cast<size_t>(k)] == per_dim) idx[static_cast<size_t>(k++)] = 0;
        if (k == n) break;
    }
    return out;
}

Vec Box::sample(std::mt19937_64& rng) const {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Vec p(dim());
    for (int i = 0; i < dim(); ++i) p[i] = lo[i] + u(rng) * (hi[i] - lo[i]);
    return p;
}

Vec DoublyTwistedProduct::project1(const Vec& v) const {
    Vec out = v;
    out.tail(n2()).setZero();
    return out;
}

Vec DoublyTwistedProduct::project2(const Vec& v) const {
    Vec out = v;
    out.head(n1()).setZero();
    return out;
}

bool DoublyTwistedProduct::in_factor(int i, const Vec& v, double tol) const {
    const Vec other = i == 1 ? v.tail(n2()) : v.head(n1());
    return other.size() == 0 || other.cwiseAbs().maxCoeff() <= tol;
}

DoublyTwistedProduct assemble(FactorManifold f1, FactorManifold f2, WarpFn lam1, WarpFn lam2, int positivity_grid) {
    if (f1.metric.dim() != f1.dim || f2.metric.dim() != f2.dim)
        fail(ErrorKind::InvalidArgument, "factor metric dimension differs from declared factor dimension");
    if (f1.domain.dim() != f1.dim || f2.domain.dim() != f2.dim)
        fail(ErrorKind::InvalidArgument, "factor domain box dimension differs from factor dimension");

    DoublyTwistedProduct p;
    p.domain_ = f1.domain.concat(f2.domain);
    for (const Vec& x : p.domain_.grid(positivity_grid)) {
        for (int i : {1, 2}) {
            const double v = (i == 1 ? lam1 : lam2).field(x);
            if (!(v > 0.0)) {
                std::ostringstream os;
                os << "lambda" << i << " = " << v << " at sample point (";
                for (int k = 0; k < x.size(); ++k) os << (k ? ", " : "") << x[k];
                os << ")";
                fail(ErrorKind::InvalidWarp, os.str());
            }
        }
    }

    const int n1 = f1.dim, n2 = f2.dim;
    auto eval = [g1 = f1.metric, g2 = f2.metric, l1 = lam1.field, l2 = lam2.field, n1, n2](const Vec& x) {
        Mat g = Mat::Zero(n1 + n2, n1 + n2);
        const double a = l1(x), b = l2(x);
        g.topLeftCorner(n1, n1) = a * a * g1(x.head(n1));
        g.bottomRightCorner(n2, n2) = b * b * g2(x.tail(n2));
        return g;
    };
    p.metric_ = MetricField(n1 + n2, f1.metric.signature().concat(f2.metric.signature()), eval);
    p.f1_ = std::move(f1);
    p.f2_ = std::move(f2);
    p.lam1_ = std::move(lam1);
    p.lam2_ = std::move(lam2);
    return p;
}

namespace {

WarpDependency swapped(WarpDependency d) {
    switch (d) {
        case WarpDependency::OnFactor1Only: return WarpDependency::OnFactor2Only;
        case WarpDependency::OnFactor2Only: return WarpDependency::OnFactor1Only;
        default: return d;
    }
}

}  // namespace

DoublyTwistedProduct swap_factors(const DoublyTwistedProduct& dtp) {
    const int n1 = dtp.n1(), n2 = dtp.n2();
    // x' = (b, a)  ->  x = (a, b)
    auto unswap = [n1, n2](const Vec& xs) {
        Vec x(n1 + n2);
        x << xs.tail(n1), xs.head(n2);
        return x;
    };
    auto wrap = [&](const WarpFn& w) {
        return WarpFn{ScalarField([f = w.field, unswap](const Vec& xs) { return f(unswap(xs)); }),
                      swapped(w.dependency)};
    };
    return assemble(dtp.factor2(), dtp.factor1(), wrap(dtp.lam2()), wrap(dtp.lam1()));
}

Vec grad_log_warp(const DoublyTwistedProduct& dtp, const Vec& x, int i) {
    const ScalarField& lam = dtp.lam(i).field;
    return checked_inverse(dtp.metric()(x)) * lam.partials(x) / lam(x);
}

TangentVector connection_closed_form(const DoublyTwistedProduct& dtp, const Vec& x, const TangentVector& a,
                                     const TangentVector& b, ConnectionCase c) {
    if ((a.base - x).cwiseAbs().maxCoeff() > 0.0 || (b.base - x).cwiseAbs().maxCoeff() > 0.0)
        fail(ErrorKind::BaseMismatch, "connection arguments not based at x");
    const Mat g = dtp.metric()(x);
    auto ip = [&g](const Vec& u, const Vec& v) { return u.dot(g * v); };

    if (c == ConnectionCase::HV) {
        if (!dtp.in_factor(1, a.comp) || !dtp.in_factor(2, b.comp))
            fail(ErrorKind::CaseMismatch, "HV expects a tangent to factor 1 and b tangent to factor 2");
        const Vec gl1 = grad_log_warp(dtp, x, 1), gl2 = grad_log_warp(dtp, x, 2);
        return {x, ip(gl1, b.comp) * a.comp + ip(gl2, a.comp) * b.comp};
    }

    const int i = c == ConnectionCase::HH ? 1 : 2;
    if (!dtp.in_factor(i, a.comp) || !dtp.in_factor(i, b.comp))
        fail(ErrorKind::CaseMismatch, "both arguments must be tangent to factor " + std::to_string(i));
    const FactorManifold& fac = i == 1 ? dtp.factor1() : dtp.factor2();
    const int off = dtp.offset(i), m = fac.dim;

    const Christoffel gf = christoffel_numeric(fac.metric, x.segment(off, m));
    Vec out = Vec::Zero(dtp.dim());
    out.segment(off, m) = gf.contract(a.comp.segment(off, m), b.comp.segment(off, m));

    const Vec gl = grad_log_warp(dtp, x, i);
    out += -ip(a.comp, b.comp) * gl + ip(a.comp, gl) * b.comp + ip(b.comp, gl) * a.comp;
    return {x, out};
}

TangentVector mean_curvature_vector(const DoublyTwistedProduct& dtp, const Vec& x, int i) {
    if (i != 1 && i != 2) fail(ErrorKind::InvalidArgument, "foliation index must be 1 or 2");
    const Vec gl = grad_log_warp(dtp, x, i);
    return {x, -dtp.project(3 - i, gl)};
}

OneForm mean_curvature_form(const DoublyTwistedProduct& dtp, const Vec& x, int i) {
    const TangentVector n = mean_curvature_vector(dtp, x, i);
    return {x, dtp.metric()(x) * n.comp};
}

std::string to_string(StructureTag tag) {
    switch (tag) {
        case StructureTag::DoublyTwisted: return "DoublyTwisted";
        case StructureTag::Twisted: return "Twisted";
        case StructureTag::DoublyWarped: return "DoublyWarped";
        case StructureTag::Warped: return "Warped";
        case StructureTag::DirectProduct: return "DirectProduct";
    }
    return "Unknown";
}

StructureClass classify(const DoublyTwistedProduct& dtp, const std::vector<Vec>& grid) {
    StructureClass sc;
    for (const Vec& x : grid) {
        sc.max_n1 = std::max(sc.max_n1, mean_curvature_vector(dtp, x, 1).comp.norm());
        sc.max_n2 = std::max(sc.max_n2, mean_curvature_vector(dtp, x, 2).comp.norm());
        for (int i : {1, 2}) {
            const Mat dw = exterior_derivative_numeric(
                [&dtp, i](const Vec& y) { return mean_curvature_form(dtp, y, i).comp; }, x);
            const double m = dw.cwiseAbs().maxCoeff();
            (i == 1 ? sc.max_domega1 : sc.max_domega2) = std::max(i == 1 ? sc.max_domega1 : sc.max_domega2, m);
        }
    }
    const bool v1 = sc.max_n1 < kVanishThreshold, v2 = sc.max_n2 < kVanishThreshold;
    const bool c1 = sc.max_domega1 < kClosedThreshold, c2 = sc.max_domega2 < kClosedThreshold;
    if (v1 && v2)
        sc.tag = StructureTag::DirectProduct;
    else if (v1 || v2)
        sc.tag = (v1 ? c2 : c1) ? StructureTag::Warped : StructureTag::Twisted;
    else
        sc.tag = (c1 && c2) ? StructureTag::DoublyWarped : StructureTag::DoublyTwisted;
    return sc;
}

namespace {

void require_orthonormal(const Mat& g, const Vec& u, const Vec& v) {
    const double uu = u.dot(g * u), vv = v.dot(g * v), uv = u.dot(g * v);
    if (std::abs(std::abs(uu) - 1.0) > kNormalizationTol || std::abs(std::abs(vv) - 1.0) > kNormalizationTol ||
        std::abs(uv) > kNormalizationTol) {
        std::ostringstream os;
        os << "plane vectors must be unitary and orthogonal: g(u,u)=" << uu << " g(v,v)=" << vv << " g(u,v)=" << uv;
        fail(ErrorKind::NormalizationError, os.str());
    }
}

double sign_of(double q) { return q > 0 ? 1.0 : -1.0; }

}  // namespace

double warp_hessian_quadratic(const DoublyTwistedProduct& dtp, const Vec& x, int i, const Vec& v) {
    ConnectionCase c;
    if (dtp.in_factor(1, v))
        c = ConnectionCase::HH;
    else if (dtp.in_factor(2, v))
        c = ConnectionCase::VV;
    else
        fail(ErrorKind::CaseMismatch, "vector must be tangent to a single factor");
    const ScalarField& lam = dtp.lam(i).field;
    const Vec nabla_vv = connection_closed_form(dtp, x, {x, v}, {x, v}, c).comp;
    return v.dot(lam.second_partials(x) * v) - lam.partials(x).dot(nabla_vv);
}

double sectional_curvature_closed_form(const DoublyTwistedProduct& dtp, const FactorPlane& plane) {
    const int i = plane.factor;
    if (i != 1 && i != 2) fail(ErrorKind::InvalidArgument, "factor must be 1 or 2");
    const Vec& x = plane.u.base;
    if ((plane.v.base - x).cwiseAbs().maxCoeff() > 0.0) fail(ErrorKind::BaseMismatch, "plane vectors at different points");
    if (!dtp.in_factor(i, plane.u.comp) || !dtp.in_factor(i, plane.v.comp))
        fail(ErrorKind::CaseMismatch, "factor plane vectors must be tangent to factor " + std::to_string(i));
    const Mat g = dtp.metric()(x);
    require_orthonormal(g, plane.u.comp, plane.v.comp);

    const FactorManifold& fac = i == 1 ? dtp.factor1() : dtp.factor2();
    const int off = dtp.offset(i), m = fac.dim;
    const double k_factor = sectional_curvature_numeric(fac.metric, x.segment(off, m), plane.u.comp.segment(off, m),
                                                        plane.v.comp.segment(off, m));
    const ScalarField& lam = dtp.lam(i).field;
    const double l = lam(x);
    const Vec dl = lam.partials(x);
    const double grad_sq = dl.dot(checked_inverse(g) * dl);
    const double eu = sign_of(plane.u.comp.dot(g * plane.u.comp));
    const double ev = sign_of(plane.v.comp.dot(g * plane.v.comp));
    return (k_factor + grad_sq) / (l * l) -
           (eu * warp_hessian_quadratic(dtp, x, i, plane.u.comp) + ev * warp_hessian_quadratic(dtp, x, i, plane.v.comp)) / l;
}

double sectional_curvature_closed_form(const DoublyTwistedProduct& dtp, const MixedPlane& plane) {
    const Vec& x = plane.horiz.base;
    if ((plane.vert.base - x).cwiseAbs().maxCoeff() > 0.0) fail(ErrorKind::BaseMismatch, "plane vectors at different points");
    const Vec& X = plane.horiz.comp;
    const Vec& V = plane.vert.comp;
    if (!dtp.in_factor(1, X) || !dtp.in_factor(2, V))
        fail(ErrorKind::CaseMismatch, "mixed plane needs a factor-1 and a factor-2 vector");
    const Mat g = dtp.metric()(x);
    require_orthonormal(g, X, V);

    const ScalarField& l1 = dtp.lam1().field;
    const ScalarField& l2 = dtp.lam2().field;
    const double a = l1(x), b = l2(x);
    const double ex = sign_of(X.dot(g * X)), ev = sign_of(V.dot(g * V));
    const double cross = l1.partials(x).dot(checked_inverse(g) * l2.partials(x));
    return -ev / a * warp_hessian_quadratic(dtp, x, 1, V) - ex / b * warp_hessian_quadratic(dtp, x, 2, X) +
           cross / (a * b);
}

std::vector<Vec> gram_schmidt(const Mat& g, const std::vector<Vec>& vs) {
    std::vector<Vec> out;
    std::vector<double> eps;
    for (const Vec& v : vs) {
        Vec w = v;
        for (size_t k = 0; k < out.size(); ++k) w -= eps[k] * v.dot(g * out[k]) * out[k];
        const double q = w.dot(g * w);
        if (std::abs(q) < kDegenerateGram) fail(ErrorKind::DegeneratePlane, "null vector during Gram-Schmidt");
        out.push_back(w / std::sqrt(std::abs(q)));
        eps.push_back(sign_of(q));
    }
    return out;
}

double lightlike_sectional_curvature(const MetricField& g, const TangentVector& xi, const TangentVector& u,
                                     const TangentVector& v) {
    const Vec& x = xi.base;
    if ((u.base - x).cwiseAbs().maxCoeff() > 0.0 || (v.base - x).cwiseAbs().maxCoeff() > 0.0)
        fail(ErrorKind::BaseMismatch, "frame vectors at different points");
    if (g.signature().index() != 1) fail(ErrorKind::InvalidFrame, "lightlike sectional curvature needs a Lorentzian metric");
    const Mat gx = g(x);
    const double xx = xi.comp.dot(gx * xi.comp);
    const double uu = u.comp.dot(gx * u.comp);
    const double ux = u.comp.dot(gx * xi.comp);
    const double vv = v.comp.dot(gx * v.comp);
    if (std::abs(xx + 1.0) > 1e-9) fail(ErrorKind::InvalidFrame, "xi must be unit timelike");
    if (std::abs(uu) > 1e-9) fail(ErrorKind::InvalidFrame, "u must be lightlike");
    if (std::abs(ux - 1.0) > 1e-9) fail(ErrorKind::InvalidFrame, "g(u, xi) must equal 1");
    if (std::abs(vv) < 1e-12) fail(ErrorKind::InvalidFrame, "g(v, v) must be nonzero");
    const Riemann r = riemann_numeric(g, x);
    return v.comp.dot(gx * r.apply(v.comp, u.comp, u.comp)) / vv;
}

TangentVector oneill_T(const DoublyTwistedProduct& dtp, const Vec& x, const Vec& e, const Vec& f) {
    const Mat g = dtp.metric()(x);
    const Vec n = mean_curvature_vector(dtp, x, 2).comp;
    const Vec ev = dtp.project2(e), fv = dtp.project2(f);
    return {x, ev.dot(g * fv) * n - n.dot(g * f) * ev};
}

TangentVector oneill_T_definitional(const DoublyTwistedProduct& dtp, const Vec& x, const Vec& e, const Vec& f) {
    const Christoffel gam = christoffel_numeric(dtp.metric(), x);
    const Vec ev = dtp.project2(e), fv = dtp.project2(f), fh = dtp.project1(f);
    return {x, dtp.project1(gam.contract(ev, fv)) + dtp.project2(gam.contract(ev, fh))};
}

namespace {

void require_vanishing_A(const DoublyTwistedProduct& dtp, const Vec& X) {
    const auto d = dtp.lam1().dependency;
    if (d != WarpDependency::Constant && d != WarpDependency::OnFactor1Only)
        fail(ErrorKind::InvalidArgument, "O'Neill A vanishes only when lambda1 is independent of factor 2");
    if (!dtp.in_factor(1, X)) fail(ErrorKind::CaseMismatch, "X must be horizontal");
}

}  // namespace

Vec oneill_dT_numeric(const DoublyTwistedProduct& dtp, const Vec& x, const Vec& X, const Vec& e, const Vec& f) {
    require_vanishing_A(dtp, X);
    const double s = kSecondDerivStep;
    const Vec tp = oneill_T_definitional(dtp, x + s * X, e, f).comp;
    const Vec tm = oneill_T_definitional(dtp, x - s * X, e, f).comp;
    const Christoffel gam = christoffel_numeric(dtp.metric(), x);
    const Vec t0 = oneill_T_definitional(dtp, x, e, f).comp;
    const Vec de = gam.contract(X, e), df = gam.contract(X, f);
    return (tp - tm) / (2.0 * s) + gam.contract(X, t0) - oneill_T_definitional(dtp, x, de, f).comp -
           oneill_T_definitional(dtp, x, e, df).comp;
}

Vec oneill_dT_closed_form(const DoublyTwistedProduct& dtp, const Vec& x, const Vec& X, const Vec& e, const Vec& f) {
    require_vanishing_A(dtp, X);
    const double s = kSecondDerivStep;
    const Vec np = mean_curvature_vector(dtp, x + s * X, 2).comp;
    const Vec nm = mean_curvature_vector(dtp, x - s * X, 2).comp;
    const Vec n = mean_curvature_vector(dtp, x, 2).comp;
    const Christoffel gam = christoffel_numeric(dtp.metric(), x);
    const Vec dn = (np - nm) / (2.0 * s) + gam.contract(X, n);
    const Mat g = dtp.metric()(x);
    const Vec ev = dtp.project2(e), fv = dtp.project2(f);
    return ev.dot(g * fv) * dn - dn.dot(g * f) * ev;
}

HessianSignReport warp_hessian_nonpositive(const DoublyTwistedProduct& dtp, int i, int on_factor, int samples,
                                           std::mt19937_64& rng) {
    HessianSignReport rep;
    rep.max_value = -std::numeric_limits<double>::infinity();
    std::normal_distribution<double> nd;
    const int off = dtp.offset(on_factor), m = dtp.factor_dim(on_factor);
    for (int s = 0; s < samples; ++s) {
        const Vec x = dtp.domain().sample(rng);
        Vec v = Vec::Zero(dtp.dim());
        for (int k = 0; k < m; ++k) v[off + k] = nd(rng);
        const double q = v.dot(dtp.metric()(x) * v);
        if (q <= 1e-9) continue;
        const double val = warp_hessian_quadratic(dtp, x, i, v) / q;
        rep.max_value = std::max(rep.max_value, val);
        ++rep.samples;
        if (val > 1e-9) rep.nonpositive = false;
    }
    return rep;
}

}  // namespace twistgeo

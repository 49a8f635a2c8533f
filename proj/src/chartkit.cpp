#include "twistgeo/chartkit.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace twistgeo {

namespace {

bool all_finite(const Mat& m) { return m.allFinite(); }

std::string describe(const Vec& x) {
    std::ostringstream os;
    os << "(";
    for (int i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
    os << ")";
    return os.str();
}

}  // namespace

Signature::Signature(std::vector<int> signs) : signs_(std::move(signs)) {
    for (int s : signs_)
        if (s != 1 && s != -1) fail(ErrorKind::InvalidArgument, "signature entries must be +1 or -1");
}

Signature Signature::lorentzian(int n) {
    std::vector<int> s(static_cast<size_t>(n), 1);
    if (n > 0) s[0] = -1;
    return Signature(std::move(s));
}

int Signature::index() const { return static_cast<int>(std::count(signs_.begin(), signs_.end(), -1)); }

Signature Signature::concat(const Signature& other) const {
    std::vector<int> s = signs_;
    s.insert(s.end(), other.signs_.begin(), other.signs_.end());
    return Signature(std::move(s));
}

MetricField::MetricField(int dim, Signature signature, Eval eval, D1 d1, D2 d2)
    : dim_(dim), signature_(std::move(signature)), eval_(std::move(eval)), d1_(std::move(d1)), d2_(std::move(d2)) {
    if (dim_ <= 0) fail(ErrorKind::InvalidArgument, "metric dimension must be positive");
    if (signature_.dim() != dim_) fail(ErrorKind::InvalidArgument, "signature length differs from metric dimension");
}

Mat MetricField::operator()(const Vec& x) const {
    if (x.size() != dim_) fail(ErrorKind::InvalidArgument, "point dimension differs from metric dimension");
    Mat m = eval_(x);
    if (m.rows() != dim_ || m.cols() != dim_) fail(ErrorKind::NumericsError, "metric callback returned wrong shape");
    if (!all_finite(m)) fail(ErrorKind::NumericsError, "non-finite metric entries at " + describe(x));
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12)
        fail(ErrorKind::NumericsError, "metric not symmetric at " + describe(x));
    return m;
}

std::vector<Mat> MetricField::partials_fd(const Vec& x, double step) const {
    std::vector<Mat> out;
    out.reserve(static_cast<size_t>(dim_));
    for (int k = 0; k < dim_; ++k) {
        const double h = fd_step(step, x[k]);
        Vec xp = x, xm = x;
        xp[k] += h;
        xm[k] -= h;
        out.push_back(((*this)(xp) - (*this)(xm)) / (2.0 * h));
    }
    return out;
}

std::vector<Mat> MetricField::partials(const Vec& x, double step) const {
    if (d1_) {
        auto d = d1_(x);
        if (static_cast<int>(d.size()) != dim_) fail(ErrorKind::NumericsError, "analytic d1 returned wrong count");
        return d;
    }
    return partials_fd(x, step);
}

std::optional<std::vector<Mat>> MetricField::second_partials(const Vec& x) const {
    if (!d2_) return std::nullopt;
    auto d = d2_(x);
    if (static_cast<int>(d.size()) != dim_ * dim_) fail(ErrorKind::NumericsError, "analytic d2 returned wrong count");
    return d;
}

bool MetricField::signature_holds(const Vec& x) const {
    Eigen::SelfAdjointEigenSolver<Mat> es((*this)(x));
    int neg = 0, pos = 0;
    for (int i = 0; i < dim_; ++i) {
        const double ev = es.eigenvalues()[i];
        if (std::abs(ev) < 1e-14) return false;
        (ev < 0 ? neg : pos)++;
    }
    return neg == signature_.index() && pos == dim_ - signature_.index();
}

ScalarField ScalarField::constant(double c) {
    return ScalarField([c](const Vec&) { return c; }, [](const Vec& x) { return Vec::Zero(x.size()).eval(); },
                       [](const Vec& x) { return Mat::Zero(x.size(), x.size()).eval(); });
}

double ScalarField::operator()(const Vec& x) const {
    const double v = eval_(x);
    if (!std::isfinite(v)) fail(ErrorKind::NumericsError, "non-finite scalar field value at " + describe(x));
    return v;
}

Vec ScalarField::partials(const Vec& x, double step) const {
    if (grad_) return grad_(x);
    const int n = static_cast<int>(x.size());
    Vec out(n);
    for (int k = 0; k < n; ++k) {
        const double h = fd_step(step, x[k]);
        Vec xp = x, xm = x;
        xp[k] += h;
        xm[k] -= h;
        out[k] = ((*this)(xp) - (*this)(xm)) / (2.0 * h);
    }
    return out;
}

Mat ScalarField::second_partials(const Vec& x, double step) const {
    if (hess_) return hess_(x);
    const int n = static_cast<int>(x.size());
    Mat out(n, n);
    const double f0 = (*this)(x);
    for (int i = 0; i < n; ++i) {
        const double hi = fd_step(step, x[i]);
        Vec xp = x, xm = x;
        xp[i] += hi;
        xm[i] -= hi;
        out(i, i) = ((*this)(xp) - 2.0 * f0 + (*this)(xm)) / (hi * hi);
        for (int j = i + 1; j < n; ++j) {
            const double hj = fd_step(step, x[j]);
            Vec pp = x, pm = x, mp = x, mm = x;
            pp[i] += hi; pp[j] += hj;
            pm[i] += hi; pm[j] -= hj;
            mp[i] -= hi; mp[j] += hj;
            mm[i] -= hi; mm[j] -= hj;
            out(i, j) = out(j, i) = ((*this)(pp) - (*this)(pm) - (*this)(mp) + (*this)(mm)) / (4.0 * hi * hj);
        }
    }
    return out;
}

Vec Christoffel::contract(const Vec& a, const Vec& b) const {
    Vec out = Vec::Zero(n_);
    for (int k = 0; k < n_; ++k)
        for (int i = 0; i < n_; ++i) {
            if (a[i] == 0.0) continue;
            for (int j = 0; j < n_; ++j) out[k] += (*this)(k, i, j) * a[i] * b[j];
        }
    return out;
}

Vec Riemann::apply(const Vec& u, const Vec& v, const Vec& w) const {
    Vec out = Vec::Zero(n_);
    for (int l = 0; l < n_; ++l)
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j)
                for (int k = 0; k < n_; ++k) out[l] += (*this)(l, i, j, k) * u[i] * v[j] * w[k];
    return out;
}

double Riemann::lowered(const Mat& g, int a, int b, int c, int d) const {
    double s = 0.0;
    for (int m = 0; m < n_; ++m) s += g(a, m) * (*this)(m, c, d, b);
    return s;
}

double Riemann::max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
}

Mat checked_inverse(const Mat& g) {
    const double det = g.determinant();
    if (!std::isfinite(det) || std::abs(det) < kDegenerateDet)
        fail(ErrorKind::DegenerateMetric, "|det g| below threshold");
    return g.inverse();
}

double inner_product(const MetricField& g, const TangentVector& u, const TangentVector& v) {
    if (u.base.size() != v.base.size() || (u.base - v.base).cwiseAbs().maxCoeff() > 0.0)
        fail(ErrorKind::BaseMismatch, "tangent vectors based at different points");
    if (!u.comp.allFinite() || !v.comp.allFinite()) fail(ErrorKind::NumericsError, "non-finite tangent components");
    return u.comp.dot(g(u.base) * v.comp);
}

int causal_sign(const MetricField& g, const TangentVector& z, double tol) {
    const double q = inner_product(g, z, z);
    if (std::abs(q) <= tol) return 0;
    return q > 0 ? 1 : -1;
}

Christoffel christoffel_from(const Mat& ginv, const std::vector<Mat>& dg) {
    const int n = static_cast<int>(ginv.rows());
    Christoffel gam(n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            Vec s(n);
            for (int l = 0; l < n; ++l)
                s[l] = 0.5 * (dg[static_cast<size_t>(i)](j, l) + dg[static_cast<size_t>(j)](i, l) -
                              dg[static_cast<size_t>(l)](i, j));
            const Vec up = ginv * s;
            for (int k = 0; k < n; ++k) gam(k, i, j) = gam(k, j, i) = up[k];
        }
    return gam;
}

Christoffel christoffel_numeric(const MetricField& g, const Vec& x, double step) {
    if (step <= 0.0) fail(ErrorKind::InvalidArgument, "finite-difference step must be positive");
    return christoffel_from(checked_inverse(g(x)), g.partials(x, step));
}

Riemann riemann_numeric(const MetricField& g, const Vec& x) {
    const int n = g.dim();
    const Mat gx = g(x);
    const Mat ginv = checked_inverse(gx);
    const Christoffel gam = christoffel_from(ginv, g.partials(x));

    // dgam[m] = ∂_m Γ
    std::vector<Christoffel> dgam;
    dgam.reserve(static_cast<size_t>(n));
    if (auto d2 = g.second_partials(x)) {
        const auto dg = g.partials(x);
        for (int m = 0; m < n; ++m) {
            Christoffel dm(n);
            const Mat dginv = -ginv * dg[static_cast<size_t>(m)] * ginv;
            for (int i = 0; i < n; ++i)
                for (int j = i; j < n; ++j) {
                    Vec s(n), ds(n);
                    for (int l = 0; l < n; ++l) {
                        s[l] = 0.5 * (dg[static_cast<size_t>(i)](j, l) + dg[static_cast<size_t>(j)](i, l) -
                                      dg[static_cast<size_t>(l)](i, j));
                        ds[l] = 0.5 * ((*d2)[static_cast<size_t>(m * n + i)](j, l) +
                                       (*d2)[static_cast<size_t>(m * n + j)](i, l) -
                                       (*d2)[static_cast<size_t>(m * n + l)](i, j));
                    }
                    const Vec v = dginv * s + ginv * ds;
                    for (int k = 0; k < n; ++k) dm(k, i, j) = dm(k, j, i) = v[k];
                }
            dgam.push_back(std::move(dm));
        }
    } else {
        for (int m = 0; m < n; ++m) {
            const double h = fd_step(kSecondDerivStep, x[m]);
            Vec xp = x, xm = x;
            xp[m] += h;
            xm[m] -= h;
            const Christoffel gp = christoffel_numeric(g, xp);
            const Christoffel gm = christoffel_numeric(g, xm);
            Christoffel dm(n);
            for (int k = 0; k < n; ++k)
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j) dm(k, i, j) = (gp(k, i, j) - gm(k, i, j)) / (2.0 * h);
            dgam.push_back(std::move(dm));
        }
    }

    Riemann r(n);
    for (int l = 0; l < n; ++l)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                if (i == j) continue;
                for (int k = 0; k < n; ++k) {
                    double v = dgam[static_cast<size_t>(i)](l, j, k) - dgam[static_cast<size_t>(j)](l, i, k);
                    for (int m = 0; m < n; ++m) v += gam(l, i, m) * gam(m, j, k) - gam(l, j, m) * gam(m, i, k);
                    r(l, i, j, k) = v;
                }
            }
    return r;
}

double sectional_curvature_numeric(const MetricField& g, const Vec& x, const Vec& u, const Vec& v) {
    const Mat gx = g(x);
    const double q = u.dot(gx * u) * v.dot(gx * v) - std::pow(u.dot(gx * v), 2);
    if (std::abs(q) < kDegenerateGram) fail(ErrorKind::DegeneratePlane, "Gram determinant below threshold");
    const Riemann r = riemann_numeric(g, x);
    const double k = u.dot(gx * r.apply(u, v, v)) / q;
    if (!std::isfinite(k)) fail(ErrorKind::NumericsError, "non-finite sectional curvature");
    return k;
}

double sectional_curvature_numeric(const MetricField& g, const TangentVector& u, const TangentVector& v) {
    if ((u.base - v.base).cwiseAbs().maxCoeff() > 0.0) fail(ErrorKind::BaseMismatch, "plane vectors at different points");
    return sectional_curvature_numeric(g, u.base, u.comp, v.comp);
}

TangentVector gradient(const ScalarField& f, const MetricField& g, const Vec& x) {
    return {x, checked_inverse(g(x)) * f.partials(x)};
}

Mat hessian_form(const ScalarField& f, const MetricField& g, const Vec& x) {
    const Christoffel gam = christoffel_numeric(g, x);
    const Vec df = f.partials(x);
    Mat h = f.second_partials(x);
    const int n = g.dim();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) h(i, j) -= gam(k, i, j) * df[k];
    return 0.5 * (h + h.transpose());
}

TangentVector hessian_endomorphism(const ScalarField& f, const MetricField& g, const Vec& x, const TangentVector& v) {
    if ((v.base - x).cwiseAbs().maxCoeff() > 0.0) fail(ErrorKind::BaseMismatch, "vector not based at x");
    return {x, checked_inverse(g(x)) * hessian_form(f, g, x) * v.comp};
}

Mat exterior_derivative_numeric(const OneFormField& omega, const Vec& x, double step) {
    const int n = static_cast<int>(x.size());
    // jac(i, j) = ∂_i ω_j
    Mat jac(n, n);
    for (int i = 0; i < n; ++i) {
        const double h = fd_step(step, x[i]);
        Vec xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        const Vec wp = omega(xp), wm = omega(xm);
        if (!wp.allFinite() || !wm.allFinite()) fail(ErrorKind::NumericsError, "non-finite one-form sample");
        jac.row(i) = ((wp - wm) / (2.0 * h)).transpose();
    }
    return jac - jac.transpose();
}

}  // namespace twistgeo

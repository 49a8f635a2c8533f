#include "twistgeo/transport.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

namespace twistgeo {

namespace {

double scale_of(const Vec& v) { return 1.0 + (v.size() ? v.cwiseAbs().maxCoeff() : 0.0); }

void require_based_at(const Vec& base, const Vec& p, const char* what) {
    if (base.size() != p.size() || (base - p).cwiseAbs().maxCoeff() > 1e-12 * scale_of(p))
        fail(ErrorKind::BaseMismatch, std::string(what) + " is not based at the curve start");
}

}  // namespace

PiecewiseCurve PiecewiseCurve::from_segments(std::vector<CurveSegment> segments, double velocity_check_tol) {
    if (segments.empty()) fail(ErrorKind::InvalidArgument, "curve needs at least one segment");
    if (segments.front().t0 != 0.0 || segments.back().t1 != 1.0)
        fail(ErrorKind::InvalidArgument, "curve segments must cover [0, 1]");
    for (size_t k = 0; k < segments.size(); ++k) {
        const CurveSegment& s = segments[k];
        if (!(s.t1 > s.t0)) fail(ErrorKind::InvalidArgument, "curve segment with empty interval");
        if (k + 1 < segments.size()) {
            const CurveSegment& n = segments[k + 1];
            if (n.t0 != s.t1) fail(ErrorKind::InvalidArgument, "curve segments are not contiguous");
            const Vec a = s.point(s.t1), b = n.point(n.t0);
            if ((a - b).cwiseAbs().maxCoeff() > 1e-9 * scale_of(a))
                fail(ErrorKind::InvalidArgument, "curve is discontinuous at a break");
        }
        for (double frac : {0.25, 0.5, 0.75}) {
            const double t = s.t0 + frac * (s.t1 - s.t0);
            const double h = 1e-6 * (s.t1 - s.t0);
            const Vec fd = (s.point(t + h) - s.point(t - h)) / (2.0 * h);
            const Vec v = s.velocity(t);
            if ((fd - v).cwiseAbs().maxCoeff() > velocity_check_tol * scale_of(v)) {
                std::ostringstream os;
                os << "segment velocity is not the derivative of its point function at t=" << t;
                fail(ErrorKind::InvalidArgument, os.str());
            }
        }
    }
    PiecewiseCurve c;
    c.segments_ = std::move(segments);
    return c;
}

PiecewiseCurve PiecewiseCurve::line(const Vec& a, const Vec& b) {
    const Vec d = b - a;
    return from_segments({{0.0, 1.0, [a, d](double t) { return (a + t * d).eval(); }, [d](double) { return d; }}});
}

PiecewiseCurve PiecewiseCurve::polyline(const std::vector<Vec>& points) {
    if (points.size() < 2) fail(ErrorKind::InvalidArgument, "polyline needs at least two points");
    const double m = static_cast<double>(points.size() - 1);
    std::vector<CurveSegment> segs;
    for (size_t k = 0; k + 1 < points.size(); ++k) {
        const double t0 = static_cast<double>(k) / m;
        const double t1 = k + 2 == points.size() ? 1.0 : static_cast<double>(k + 1) / m;
        const Vec a = points[k], d = (points[k + 1] - points[k]) * m;
        segs.push_back({t0, t1, [a, d, t0](double t) { return (a + (t - t0) * d).eval(); }, [d](double) { return d; }});
    }
    return from_segments(std::move(segs));
}

PiecewiseCurve PiecewiseCurve::catmull_rom(const std::vector<Vec>& points) {
    const size_t np = points.size();
    if (np < 2) fail(ErrorKind::InvalidArgument, "spline needs at least two points");
    const double m = static_cast<double>(np - 1);
    std::vector<Vec> tangents(np);
    for (size_t k = 0; k < np; ++k) {
        if (k == 0)
            tangents[k] = points[1] - points[0];
        else if (k + 1 == np)
            tangents[k] = points[k] - points[k - 1];
        else
            tangents[k] = 0.5 * (points[k + 1] - points[k - 1]);
    }
    std::vector<CurveSegment> segs;
    for (size_t k = 0; k + 1 < np; ++k) {
        const double t0 = static_cast<double>(k) / m;
        const double t1 = k + 2 == np ? 1.0 : static_cast<double>(k + 1) / m;
        const Vec p0 = points[k], p1 = points[k + 1], m0 = tangents[k], m1 = tangents[k + 1];
        auto pt = [=](double t) {
            const double s = (t - t0) * m, s2 = s * s, s3 = s2 * s;
            return ((2 * s3 - 3 * s2 + 1) * p0 + (s3 - 2 * s2 + s) * m0 + (-2 * s3 + 3 * s2) * p1 + (s3 - s2) * m1).eval();
        };
        auto vel = [=](double t) {
            const double s = (t - t0) * m, s2 = s * s;
            return (m * ((6 * s2 - 6 * s) * p0 + (3 * s2 - 4 * s + 1) * m0 + (-6 * s2 + 6 * s) * p1 + (3 * s2 - 2 * s) * m1))
                .eval();
        };
        segs.push_back({t0, t1, pt, vel});
    }
    return from_segments(std::move(segs));
}

PiecewiseCurve PiecewiseCurve::parametric(std::function<Vec(double)> point, std::function<Vec(double)> velocity) {
    return from_segments({{0.0, 1.0, std::move(point), std::move(velocity)}});
}

PiecewiseCurve PiecewiseCurve::concat(const PiecewiseCurve& a, const PiecewiseCurve& b) {
    const Vec ea = a.point(1.0), sb = b.point(0.0);
    if ((ea - sb).cwiseAbs().maxCoeff() > 1e-9 * scale_of(ea))
        fail(ErrorKind::InvalidArgument, "concatenated curves do not meet");
    std::vector<CurveSegment> segs;
    for (const CurveSegment& s : a.segments_)
        segs.push_back({0.5 * s.t0, 0.5 * s.t1, [p = s.point](double t) { return p(2.0 * t); },
                        [v = s.velocity](double t) { return (2.0 * v(2.0 * t)).eval(); }});
    for (const CurveSegment& s : b.segments_)
        segs.push_back({0.5 + 0.5 * s.t0, s.t1 == 1.0 ? 1.0 : 0.5 + 0.5 * s.t1,
                        [p = s.point](double t) { return p(2.0 * t - 1.0); },
                        [v = s.velocity](double t) { return (2.0 * v(2.0 * t - 1.0)).eval(); }});
    return from_segments(std::move(segs));
}

const CurveSegment& PiecewiseCurve::segment_at(double t) const {
    for (size_t k = segments_.size(); k-- > 0;)
        if (t >= segments_[k].t0) return segments_[k];
    return segments_.front();
}

Vec PiecewiseCurve::point(double t) const { return segment_at(t).point(t); }
Vec PiecewiseCurve::velocity(double t) const { return segment_at(t).velocity(t); }

std::vector<double> PiecewiseCurve::breaks() const {
    std::vector<double> out;
    for (size_t k = 1; k < segments_.size(); ++k) out.push_back(segments_[k].t0);
    return out;
}

PiecewiseCurve PiecewiseCurve::mapped(std::function<Vec(const Vec&)> map) const {
    std::vector<CurveSegment> segs;
    for (const CurveSegment& s : segments_) {
        auto pt = [map, p = s.point](double t) { return map(p(t)); };
        auto vel = [map, p = s.point, v = s.velocity](double t) {
            const Vec x = p(t), d = v(t);
            const double n = d.norm();
            if (n == 0.0) return Vec::Zero(map(x).size()).eval();
            const double h = 1e-6 / n * std::max(1.0, x.cwiseAbs().maxCoeff());
            return ((map(x + h * d) - map(x - h * d)) / (2.0 * h)).eval();
        };
        segs.push_back({s.t0, s.t1, pt, vel});
    }
    return from_segments(std::move(segs));
}

TransportResult parallel_transport(const MetricField& g, const PiecewiseCurve& curve, const TangentVector& v0,
                                   const OdeOptions& opts) {
    require_based_at(v0.base, curve.point(0.0), "initial vector");
    TransportResult res;
    const double q0 = v0.comp.dot(g(v0.base) * v0.comp);
    Vec v = v0.comp;
    res.samples.push_back({0.0, v0});
    for (const CurveSegment& seg : curve.segments()) {
        auto rhs = [&g, &seg](double t, const Vec& y) {
            const Vec p = seg.point(t);
            return (-christoffel_numeric(g, p).contract(seg.velocity(t), y)).eval();
        };
        const Trajectory tr = integrate(rhs, seg.t0, seg.t1, v, opts);
        for (size_t k = 1; k < tr.size(); ++k) {
            const double t = tr.times()[k];
            const Vec p = seg.point(t);
            const Vec& y = tr.state(k);
            res.samples.push_back({t, {p, y}});
            res.tol_achieved = std::max(res.tol_achieved, std::abs(y.dot(g(p) * y) - q0));
        }
        v = tr.back();
    }
    return res;
}

namespace {

struct NormalTransport {
    std::vector<TransportSample> w;
    std::vector<double> integral;
};

NormalTransport run_normal_transport(const DoublyTwistedProduct& dtp, const PiecewiseCurve& curve,
                                     const TangentVector& v0, int leaf, const OdeOptions& opts) {
    if (leaf != 1 && leaf != 2) fail(ErrorKind::InvalidArgument, "leaf index must be 1 or 2");
    const int other = 3 - leaf;
    require_based_at(v0.base, curve.point(0.0), "initial vector");
    if (!dtp.in_factor(other, v0.comp, 1e-12 * scale_of(v0.comp)))
        fail(ErrorKind::CaseMismatch, "initial vector must be normal to the leaf");

    const int n = dtp.dim();
    NormalTransport out;
    Vec y(n + 1);
    y << v0.comp, 0.0;
    out.w.push_back({0.0, v0});
    out.integral.push_back(0.0);
    for (const CurveSegment& seg : curve.segments()) {
        auto rhs = [&dtp, &seg, n, leaf, other](double t, const Vec& s) {
            const Vec p = seg.point(t);
            const Vec d = seg.velocity(t);
            if (!dtp.in_factor(leaf, d, 1e-8)) {
                std::ostringstream os;
                os << "curve velocity leaves the leaf at t=" << t;
                fail(ErrorKind::NotInLeaf, os.str());
            }
            Vec ds(n + 1);
            const Christoffel gam = christoffel_numeric(dtp.metric(), p);
            ds.head(n) = -dtp.project(other, gam.contract(d, s.head(n)));
            ds[n] = mean_curvature_form(dtp, p, other).comp.dot(d);
            return ds;
        };
        const Trajectory tr = integrate(rhs, seg.t0, seg.t1, y, opts);
        for (size_t k = 1; k < tr.size(); ++k) {
            const double t = tr.times()[k];
            out.w.push_back({t, {seg.point(t), tr.state(k).head(n)}});
            out.integral.push_back(tr.state(k)[n]);
        }
        y = tr.back();
    }
    return out;
}

}  // namespace

TransportResult normal_parallel_transport(const DoublyTwistedProduct& dtp, const PiecewiseCurve& curve,
                                          const TangentVector& v0, int leaf, const OdeOptions& opts) {
    NormalTransport nt = run_normal_transport(dtp, curve, v0, leaf, opts);
    TransportResult res;
    const double q0 = v0.comp.dot(dtp.metric()(v0.base) * v0.comp);
    for (const TransportSample& s : nt.w) {
        const Vec& w = s.v.comp;
        res.tol_achieved = std::max(res.tol_achieved, std::abs(w.dot(dtp.metric()(s.v.base) * w) - q0));
    }
    res.samples = std::move(nt.w);
    res.integral_omega = nt.integral.back();
    return res;
}

TransportResult adapted_translation(const DoublyTwistedProduct& dtp, const PiecewiseCurve& curve,
                                    const TangentVector& v0, int leaf, const OdeOptions& opts) {
    NormalTransport nt = run_normal_transport(dtp, curve, v0, leaf, opts);
    TransportResult res;
    const double norm0 = std::sqrt(std::abs(v0.comp.dot(dtp.metric()(v0.base) * v0.comp)));
    for (size_t k = 0; k < nt.w.size(); ++k) {
        const double scale = std::exp(-nt.integral[k]);
        const TangentVector a{nt.w[k].v.base, scale * nt.w[k].v.comp};
        const double norm = std::sqrt(std::abs(a.comp.dot(dtp.metric()(a.base) * a.comp)));
        res.tol_achieved = std::max(res.tol_achieved, std::abs(norm - norm0 * scale));
        res.samples.push_back({nt.w[k].t, a});
    }
    res.integral_omega = nt.integral.back();
    return res;
}

Vec frame_coefficients(const Mat& g, const std::vector<Vec>& frame, const Vec& w) {
    Vec c(static_cast<Eigen::Index>(frame.size()));
    for (size_t i = 0; i < frame.size(); ++i) {
        const double eps = frame[i].dot(g * frame[i]) > 0 ? 1.0 : -1.0;
        c[static_cast<Eigen::Index>(i)] = eps * w.dot(g * frame[i]);
    }
    return c;
}

HolonomyMap holonomy_map(const DoublyTwistedProduct& dtp, const PiecewiseCurve& loop, const std::vector<Vec>& frame,
                         int leaf) {
    const Vec a = loop.point(0.0), b = loop.point(1.0);
    if ((a - b).cwiseAbs().maxCoeff() > kLoopClosureTol) fail(ErrorKind::NotALoop, "curve endpoints differ");
    return holonomy_map(dtp, loop, frame, [](const Vec&, const Vec& v) { return v; }, leaf);
}

HolonomyMap holonomy_map(const DoublyTwistedProduct& dtp, const PiecewiseCurve& loop, const std::vector<Vec>& frame,
                         const EndpointIdentification& ident, int leaf) {
    const Vec x0 = loop.point(0.0);
    const Mat g = dtp.metric()(x0);
    const int other = 3 - leaf;
    if (static_cast<int>(frame.size()) != dtp.factor_dim(other))
        fail(ErrorKind::InvalidFrame, "frame must span the normal space of the leaf");
    for (size_t i = 0; i < frame.size(); ++i) {
        if (!dtp.in_factor(other, frame[i])) fail(ErrorKind::InvalidFrame, "frame vector not normal to the leaf");
        for (size_t j = 0; j < frame.size(); ++j) {
            const double q = frame[i].dot(g * frame[j]);
            const double want = i == j ? (q > 0 ? 1.0 : -1.0) : 0.0;
            if (std::abs(q - want) > 1e-9) fail(ErrorKind::InvalidFrame, "frame is not orthonormal");
        }
    }
    HolonomyMap h;
    h.basepoint = x0;
    h.frame = frame;
    h.matrix.resize(static_cast<Eigen::Index>(frame.size()), static_cast<Eigen::Index>(frame.size()));
    const Vec end = loop.point(1.0);
    for (size_t j = 0; j < frame.size(); ++j) {
        const TransportResult a = adapted_translation(dtp, loop, {x0, frame[j]}, leaf);
        h.matrix.col(static_cast<Eigen::Index>(j)) = frame_coefficients(g, frame, ident(end, a.final().comp));
    }
    return h;
}

PiecewiseCurve broken_geodesic(const MetricField& g, const BrokenGeodesicSpec& spec, const OdeOptions& opts) {
    const int n = g.dim();
    const size_t m = spec.breaks.size();
    if (spec.velocities.size() != m + 1) fail(ErrorKind::InvalidArgument, "need one velocity per geodesic piece");
    for (size_t k = 0; k < m; ++k) {
        const double lo = k == 0 ? 0.0 : spec.breaks[k - 1];
        if (!(spec.breaks[k] > lo && spec.breaks[k] < 1.0)) fail(ErrorKind::InvalidArgument, "breaks must satisfy 0 < t1 < ... < tm < 1");
    }
    for (const Vec& v : spec.velocities)
        if (v.size() != n || !v.allFinite()) fail(ErrorKind::InvalidArgument, "velocity list entries must be finite n-vectors");

    // state: position (n), velocity (n), transported basis E (n×n, column-major)
    const int sz = 2 * n + n * n;
    Vec y(sz);
    Mat e = Mat::Identity(n, n);
    y.head(n) = spec.basepoint;
    y.segment(2 * n, n * n) = Eigen::Map<const Vec>(e.data(), n * n);

    auto rhs = [&g, n, sz](double, const Vec& s) {
        const Vec x = s.head(n), xd = s.segment(n, n);
        const Christoffel gam = christoffel_numeric(g, x);
        Vec ds(sz);
        ds.head(n) = xd;
        ds.segment(n, n) = -gam.contract(xd, xd);
        for (int c = 0; c < n; ++c) ds.segment(2 * n + c * n, n) = -gam.contract(xd, s.segment(2 * n + c * n, n));
        return ds;
    };

    std::vector<CurveSegment> segs;
    for (size_t j = 0; j <= m; ++j) {
        const double t0 = j == 0 ? 0.0 : spec.breaks[j - 1];
        const double t1 = j == m ? 1.0 : spec.breaks[j];
        e = Eigen::Map<const Mat>(y.data() + 2 * n, n, n);
        y.segment(n, n) = e * spec.velocities[j];
        auto tr = std::make_shared<Trajectory>(integrate(rhs, t0, t1, y, opts));
        segs.push_back({t0, t1, [tr, n](double t) { return tr->at(t).head(n).eval(); },
                        [tr, n](double t) { return tr->at(t).segment(n, n).eval(); }});
        y = tr->back();
    }
    return PiecewiseCurve::from_segments(std::move(segs));
}

std::vector<TangentVector> velocity_profile(const MetricField& g, const PiecewiseCurve& curve,
                                            const std::vector<double>& times, const OdeOptions& opts) {
    const int n = g.dim();
    const Vec x0 = curve.point(0.0);
    std::vector<std::pair<const CurveSegment*, Trajectory>> frames;
    Vec y = Eigen::Map<const Vec>(Mat::Identity(n, n).eval().data(), n * n);
    for (const CurveSegment& seg : curve.segments()) {
        auto rhs = [&g, &seg, n](double t, const Vec& s) {
            const Christoffel gam = christoffel_numeric(g, seg.point(t));
            const Vec d = seg.velocity(t);
            Vec ds(n * n);
            for (int c = 0; c < n; ++c) ds.segment(c * n, n) = -gam.contract(d, s.segment(c * n, n));
            return ds;
        };
        frames.emplace_back(&seg, integrate(rhs, seg.t0, seg.t1, y, opts));
        y = frames.back().second.back();
    }
    std::vector<TangentVector> out;
    for (double t : times) {
        size_t k = frames.size() - 1;
        while (k > 0 && t < frames[k].first->t0) --k;
        const Vec s = frames[k].second.at(t);
        const Mat e = Eigen::Map<const Mat>(s.data(), n, n);
        out.push_back({x0, e.partialPivLu().solve(frames[k].first->velocity(t))});
    }
    return out;
}

double broken_length(const std::vector<Vec>& basis, const BrokenGeodesicSpec& spec) {
    if (basis.empty()) fail(ErrorKind::InvalidArgument, "auxiliary basis is empty");
    const int n = static_cast<int>(basis.size());
    Mat b(n, n);
    for (int c = 0; c < n; ++c) b.col(c) = basis[static_cast<size_t>(c)];
    const auto lu = b.partialPivLu();
    double total = 0.0;
    for (const Vec& v : spec.velocities) total += lu.solve(v).norm();
    return total;
}

double curve_length(const MetricField& g, const PiecewiseCurve& curve) {
    double total = 0.0;
    for (const CurveSegment& seg : curve.segments()) {
        auto rhs = [&g, &seg](double t, const Vec&) {
            const Vec d = seg.velocity(t);
            Vec out(1);
            out[0] = std::sqrt(std::abs(d.dot(g(seg.point(t)) * d)));
            return out;
        };
        total += integrate(rhs, seg.t0, seg.t1, Vec::Zero(1)).back()[0];
    }
    return total;
}

}  // namespace twistgeo

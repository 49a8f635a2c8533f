#include "twistgeo/quotient.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>

namespace twistgeo {

namespace {

std::string point_str(const Vec& x) {
    std::ostringstream os;
    os << "(";
    for (int k = 0; k < x.size(); ++k) os << (k ? ", " : "") << x[k];
    os << ")";
    return os.str();
}

double dist(const Vec& a, const Vec& b) { return (a - b).cwiseAbs().maxCoeff(); }

// Distance from p to the segment [a, b] and the segment parameter of the closest point.
std::pair<double, double> segment_distance(const Vec& p, const Vec& a, const Vec& b) {
    const Vec d = b - a;
    const double dd = d.squaredNorm();
    double s = dd > 0 ? (p - a).dot(d) / dd : 0.0;
    s = std::clamp(s, 0.0, 1.0);
    return {(a + s * d - p).norm(), s};
}

// Outside-distance of x from the half-open box, 0 inside.
double box_violation(const Box& box, const Vec& x) {
    double v = 0.0;
    for (int i = 0; i < box.dim(); ++i) {
        if (x[i] < box.lo[i]) v += box.lo[i] - x[i];
        if (x[i] >= box.hi[i]) v += x[i] - box.hi[i] + 1e-12;
    }
    return v;
}

// Finite sampling region: fundamental box clipped to the product domain.
Box sampling_box(const QuotientModel& m) {
    Box b = m.fundamental_box;
    const Box& d = m.dtp.domain();
    for (int i = 0; i < b.dim(); ++i) {
        if (!std::isfinite(b.lo[i])) b.lo[i] = d.lo[i];
        if (!std::isfinite(b.hi[i])) b.hi[i] = d.hi[i];
        // stay off the excluded upper face
        b.hi[i] = b.lo[i] + (b.hi[i] - b.lo[i]) * (1.0 - 1e-6);
    }
    return b;
}

Mat factor_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& a) {
    const Vec f0 = f(a);
    Mat j(f0.size(), a.size());
    for (int k = 0; k < a.size(); ++k) {
        const double h = fd_step(kFirstDerivStep, a[k]);
        Vec p = a, m = a;
        p[k] += h;
        m[k] -= h;
        j.col(k) = (f(p) - f(m)) / (2.0 * h);
    }
    return j;
}

[[noreturn]] void invalid_action(const DeckGenerator& g, const Vec& x, const std::string& what, double residual) {
    std::ostringstream os;
    os << "generator " << g.name << " " << what << " at " << point_str(x) << " (residual " << residual << ")";
    fail(ErrorKind::InvalidAction, os.str());
}

}  // namespace

std::string to_string(const Word& w) {
    if (w.empty()) return "e";
    std::ostringstream os;
    for (size_t k = 0; k < w.size(); ++k) {
        if (k) os << " ";
        os << "g" << std::abs(w[k]);
        if (w[k] < 0) os << "^-1";
    }
    return os.str();
}

Word inverse(const Word& w) {
    Word out(w.rbegin(), w.rend());
    for (int& l : out) l = -l;
    return out;
}

std::vector<Word> reduced_words(int generators, int max_len) {
    std::vector<Word> out{{}};
    size_t begin = 0;
    for (int len = 1; len <= max_len; ++len) {
        const size_t end = out.size();
        for (size_t i = begin; i < end; ++i) {
            for (int g = 1; g <= generators; ++g) {
                for (int l : {g, -g}) {
                    if (!out[i].empty() && out[i].back() == -l) continue;
                    Word w = out[i];
                    w.push_back(l);
                    out.push_back(std::move(w));
                }
            }
        }
        begin = end;
    }
    return out;
}

Vec QuotientModel::apply(int letter, const Vec& x) const {
    const int idx = std::abs(letter) - 1;
    if (letter == 0 || idx >= static_cast<int>(generators.size()))
        fail(ErrorKind::InvalidArgument, "word letter out of range");
    const DeckGenerator& g = generators[static_cast<size_t>(idx)];
    const int n1 = dtp.n1();
    Vec out(x.size());
    out.head(n1) = letter > 0 ? g.phi.fwd(x.head(n1)) : g.phi.inv(x.head(n1));
    out.tail(dtp.n2()) = letter > 0 ? g.psi.fwd(x.tail(dtp.n2())) : g.psi.inv(x.tail(dtp.n2()));
    return out;
}

Vec QuotientModel::apply(const Word& w, const Vec& x) const {
    Vec y = x;
    for (int l : w) y = apply(l, y);
    return y;
}

Mat QuotientModel::jacobian(const Word& w, const Vec& x) const {
    return factor_jacobian([this, &w](const Vec& p) { return apply(w, p); }, x);
}

bool QuotientModel::in_box(const Vec& x) const { return box_violation(fundamental_box, x) == 0.0; }

ValidationReport validate(const QuotientModel& model, int per_dim) {
    ValidationReport rep;
    const DoublyTwistedProduct& dtp = model.dtp;
    const int n1 = dtp.n1(), n2 = dtp.n2();
    const std::vector<Vec> pts = sampling_box(model).grid(per_dim);
    rep.samples = static_cast<int>(pts.size());

    for (size_t gi = 0; gi < model.generators.size(); ++gi) {
        const DeckGenerator& g = model.generators[gi];
        const int letter = static_cast<int>(gi) + 1;
        for (const Vec& x : pts) {
            const Vec a = x.head(n1), b = x.tail(n2);
            const double r_inv = std::max({dist(g.phi.inv(g.phi.fwd(a)), a), dist(g.phi.fwd(g.phi.inv(a)), a),
                                           dist(g.psi.inv(g.psi.fwd(b)), b), dist(g.psi.fwd(g.psi.inv(b)), b)});
            rep.max_inverse_residual = std::max(rep.max_inverse_residual, r_inv);
            if (r_inv > kDeckTol) invalid_action(g, x, "has an inconsistent inverse", r_inv);

            for (int sgn : {1, -1}) {
                const Word w{sgn * letter};
                const Mat j = model.jacobian(w, x);
                const Mat gx = dtp.metric()(x);
                const double r_iso = (j.transpose() * dtp.metric()(model.apply(w, x)) * j - gx).cwiseAbs().maxCoeff() /
                                     (1.0 + gx.cwiseAbs().maxCoeff());
                rep.max_isometry_residual = std::max(rep.max_isometry_residual, r_iso);
                if (r_iso > kDeckTol) invalid_action(g, x, "is not an isometry of the product metric", r_iso);
            }

            const Vec y = model.apply(letter, x);
            for (int i : {1, 2}) {
                const std::optional<double>& c = i == 1 ? g.c1 : g.c2;
                if (!c) continue;
                if (!(*c > 0)) invalid_action(g, x, "has a nonpositive homothety factor", *c);
                const FactorManifold& fm = i == 1 ? dtp.factor1() : dtp.factor2();
                const auto& map = i == 1 ? g.phi.fwd : g.psi.fwd;
                const Vec p = i == 1 ? a : b;
                const Mat jf = factor_jacobian(map, p);
                const Mat gp = fm.metric(p);
                const double r_h = (jf.transpose() * fm.metric(map(p)) * jf - (*c) * (*c) * gp).cwiseAbs().maxCoeff() /
                                   (1.0 + gp.cwiseAbs().maxCoeff());
                rep.max_homothety_residual = std::max(rep.max_homothety_residual, r_h);
                if (r_h > kDeckTol) invalid_action(g, x, "is not a homothety with the declared factor", r_h);
                const double lx = dtp.lam(i).field(x);
                const double r_w = std::abs(dtp.lam(i).field(y) - lx / *c) / (1.0 + std::abs(lx));
                rep.max_warp_residual = std::max(rep.max_warp_residual, r_w);
                if (r_w > kDeckTol) {
                    std::ostringstream what;
                    what << "violates lambda" << i << " compatibility";
                    invalid_action(g, x, what.str(), r_w);
                }
            }
        }
    }

    rep.min_orbit_separation = std::numeric_limits<double>::infinity();
    const std::vector<Word> words = reduced_words(static_cast<int>(model.generators.size()), model.word_bound);
    for (const Word& w : words) {
        if (w.empty()) continue;
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        Vec at;
        for (const Vec& x : pts) {
            const double d = dist(model.apply(w, x), x);
            if (d < lo) {
                lo = d;
                at = x;
            }
            hi = std::max(hi, d);
        }
        if (hi <= model.ident_tol) continue;  // word represents the identity
        ++rep.words_checked;
        rep.min_orbit_separation = std::min(rep.min_orbit_separation, lo);
        if (lo <= model.ident_tol) {
            std::ostringstream os;
            os << "word " << to_string(w) << " has a fixed point near " << point_str(at);
            fail(ErrorKind::InvalidAction, os.str());
        }
    }
    return rep;
}

CanonicalRep canonical_rep(const QuotientModel& model, const Vec& x) {
    if (model.in_box(x)) return {x, {}};
    const int ng = static_cast<int>(model.generators.size());

    // greedy descent on the box violation
    CanonicalRep cur{x, {}};
    double v = box_violation(model.fundamental_box, x);
    while (static_cast<int>(cur.word.size()) < model.word_bound) {
        int best = 0;
        double best_v = v;
        Vec best_p;
        for (int g = 1; g <= ng; ++g) {
            for (int l : {g, -g}) {
                if (!cur.word.empty() && cur.word.back() == -l) continue;
                const Vec p = model.apply(l, cur.point);
                const double pv = box_violation(model.fundamental_box, p);
                if (pv < best_v) {
                    best_v = pv;
                    best = l;
                    best_p = p;
                }
            }
        }
        if (best == 0) break;
        cur.point = best_p;
        cur.word.push_back(best);
        v = best_v;
        if (v == 0.0) return cur;
    }

    // breadth-first search over reduced words
    std::deque<CanonicalRep> queue{{x, {}}};
    while (!queue.empty()) {
        CanonicalRep c = std::move(queue.front());
        queue.pop_front();
        if (static_cast<int>(c.word.size()) >= model.word_bound) continue;
        for (int g = 1; g <= ng; ++g) {
            for (int l : {g, -g}) {
                if (!c.word.empty() && c.word.back() == -l) continue;
                CanonicalRep n{model.apply(l, c.point), c.word};
                n.word.push_back(l);
                if (model.in_box(n.point)) return n;
                queue.push_back(std::move(n));
            }
        }
    }
    std::ostringstream os;
    os << "no word of length <= " << model.word_bound << " brings " << point_str(x) << " into the fundamental box";
    fail(ErrorKind::WordBoundExceeded, os.str());
}

std::string to_string(LeafStatus s) { return s == LeafStatus::Closed ? "Closed" : "OpenWithinBudget"; }

LeafTrace leaf_trace(const QuotientModel& model, const Vec& x0, int leaf, const LeafTraceOptions& opts) {
    if (leaf != 1 && leaf != 2) fail(ErrorKind::InvalidArgument, "leaf index must be 1 or 2");
    if (!model.in_box(x0)) fail(ErrorKind::InvalidArgument, "leaf trace must start in the fundamental box");
    if (!(opts.step > 0) || !(opts.arc_budget > 0)) fail(ErrorKind::InvalidArgument, "step and arc budget must be positive");
    const DoublyTwistedProduct& dtp = model.dtp;
    const int n = dtp.dim(), off = dtp.offset(leaf);

    Vec dir = Vec::Zero(n);
    if (opts.direction) {
        if (opts.direction->size() != n || !dtp.in_factor(leaf, *opts.direction))
            fail(ErrorKind::InvalidArgument, "trace direction must lie in the leaf's factor slots");
        dir = *opts.direction;
    } else {
        dir[off] = 1.0;
    }

    // images of x0 under short words, for closure detection outside the box
    std::vector<Vec> targets;
    for (const Word& w : reduced_words(static_cast<int>(model.generators.size()), 2)) targets.push_back(model.apply(w, x0));

    auto unit = [&dtp](const Vec& p, const Vec& d) {
        const double q = std::abs(d.dot(dtp.metric()(p) * d));
        if (q < kDegenerateGram) fail(ErrorKind::DegeneratePlane, "trace direction is null");
        return (d / std::sqrt(q)).eval();
    };

    LeafTrace tr;
    tr.extent = {x0, x0};
    tr.points.push_back(x0);
    Vec p = x0;
    dir = unit(p, dir);
    double arc = 0.0;
    while (arc < opts.arc_budget) {
        const Vec q = p + opts.step * dir;
        const Vec mid = 0.5 * (p + q);
        const double seg_len = opts.step * std::sqrt(std::abs(dir.dot(dtp.metric()(mid) * dir)));
        for (const Vec& t : targets) {
            const auto [d, s] = segment_distance(t, p, q);
            const double at = arc + s * seg_len;
            if (d < model.ident_tol && at > 0.5 * opts.step) {
                tr.status = LeafStatus::Closed;
                tr.length = at;
                return tr;
            }
        }
        arc += seg_len;
        const CanonicalRep r = canonical_rep(model, q);
        if (!r.word.empty()) {
            ++tr.reductions;
            dir = model.jacobian(r.word, q) * dir;
        }
        p = r.point;
        dir = unit(p, dir);
        tr.points.push_back(p);
        tr.extent.lo = tr.extent.lo.cwiseMin(p);
        tr.extent.hi = tr.extent.hi.cwiseMax(p);
    }
    tr.length = arc;
    return tr;
}

IntersectionReport leaf_intersection_count(const QuotientModel& model, const Vec& x0, int word_bound,
                                           const LeafTraceOptions& trace) {
    IntersectionReport rep;
    rep.word_bound_used = word_bound;
    for (int leaf : {1, 2})
        if (leaf_trace(model, x0, leaf, trace).status != LeafStatus::Closed) rep.lower_bound_only = true;

    const int n1 = model.dtp.n1();
    QuotientModel bounded = model;
    bounded.word_bound = std::max(model.word_bound, word_bound);
    for (const Word& w : reduced_words(static_cast<int>(model.generators.size()), word_bound)) {
        // every intersection point of the two leaves is equivalent to (φ_w(a0), b0)
        Vec cand = x0;
        cand.head(n1) = model.apply(w, x0).head(n1);
        Vec red;
        try {
            red = canonical_rep(bounded, cand).point;
        } catch (const GeoError& e) {
            if (e.kind() != ErrorKind::WordBoundExceeded) throw;
            rep.lower_bound_only = true;
            continue;
        }
        const bool seen = std::any_of(rep.witnesses.begin(), rep.witnesses.end(),
                                      [&](const auto& wp) { return dist(wp.second, red) < model.ident_tol; });
        if (!seen) rep.witnesses.emplace_back(cand, red);
    }
    rep.count = static_cast<int>(rep.witnesses.size());
    return rep;
}

std::vector<Word> find_leaf_loops(const QuotientModel& model, const Vec& x0, int leaf, int max_len) {
    const DoublyTwistedProduct& dtp = model.dtp;
    const int other = 3 - leaf, off = dtp.offset(other), m = dtp.factor_dim(other);
    std::vector<Word> out;
    std::vector<Vec> ends;
    for (const Word& w : reduced_words(static_cast<int>(model.generators.size()), max_len)) {
        if (w.empty()) continue;
        const Vec y = model.apply(w, x0);
        if (dist(y.segment(off, m), x0.segment(off, m)) > model.ident_tol) continue;
        if (dist(y, x0) <= model.ident_tol) continue;
        if (std::any_of(ends.begin(), ends.end(), [&](const Vec& e) { return dist(e, y) <= model.ident_tol; })) continue;
        ends.push_back(y);
        out.push_back(w);
    }
    return out;
}

HolonomyMap quotient_holonomy(const QuotientModel& model, const Vec& x0, int leaf, const Word& w) {
    if (leaf != 1 && leaf != 2) fail(ErrorKind::InvalidArgument, "leaf index must be 1 or 2");
    const DoublyTwistedProduct& dtp = model.dtp;
    const int other = 3 - leaf, off = dtp.offset(other), m = dtp.factor_dim(other);
    Vec end = model.apply(w, x0);
    if (dist(end.segment(off, m), x0.segment(off, m)) > model.ident_tol) {
        std::ostringstream os;
        os << "word " << to_string(w) << " does not close the leaf through " << point_str(x0);
        fail(ErrorKind::NotALoop, os.str());
    }
    end.segment(off, m) = x0.segment(off, m);
    const PiecewiseCurve loop = PiecewiseCurve::line(x0, end);

    std::vector<Vec> coords;
    for (int k = 0; k < m; ++k) {
        Vec e = Vec::Zero(dtp.dim());
        e[off + k] = 1.0;
        coords.push_back(e);
    }
    const std::vector<Vec> frame = gram_schmidt(dtp.metric()(x0), coords);
    const Word winv = inverse(w);
    auto ident = [&model, &winv](const Vec& p, const Vec& v) { return (model.jacobian(winv, p) * v).eval(); };
    return holonomy_map(dtp, loop, frame, ident, leaf);
}

std::string to_string(const DecompositionVerdict& v) {
    if (v.tag == VerdictTag::GlobalDoublyWarpedProduct) return "GlobalDoublyWarpedProduct";
    std::ostringstream os;
    os << "Obstructed(";
    if (v.reason == ObstructionKind::NontrivialHolonomy)
        os << "NontrivialHolonomy";
    else if (v.reason == ObstructionKind::MultipleIntersections)
        os << "MultipleIntersections(" << v.count << ")";
    os << ")";
    return os.str();
}

DecompositionVerdict decomposition_check(const QuotientModel& model, const Vec& x0, const LeafLoops& loops,
                                         const LeafTraceOptions& trace) {
    DecompositionVerdict v;
    const IntersectionReport ir = leaf_intersection_count(model, x0, model.word_bound, trace);
    v.count = ir.count;
    v.lower_bound_only = ir.lower_bound_only;
    for (int leaf : {1, 2}) {
        for (const Word& w : leaf == 1 ? loops.f1 : loops.f2) {
            const HolonomyMap h = quotient_holonomy(model, x0, leaf, w);
            const Mat id = Mat::Identity(h.matrix.rows(), h.matrix.cols());
            if ((h.matrix - id).cwiseAbs().maxCoeff() > kHolonomyIdentityTol) {
                v.reason = ObstructionKind::NontrivialHolonomy;
                v.leaf = leaf;
                v.loop = w;
                v.holonomy = h.matrix;
                return v;
            }
        }
    }
    if (ir.count != 1) {
        v.reason = ObstructionKind::MultipleIntersections;
        return v;
    }
    v.tag = VerdictTag::GlobalDoublyWarpedProduct;
    return v;
}

ProductChartReport product_chart_check(const QuotientModel& model, const Vec& x0, const LeafTraceOptions& trace) {
    ProductChartReport rep;
    bool closed = true;
    double gap = 0.0;
    for (int leaf : {1, 2}) {
        const LeafTrace t = leaf_trace(model, x0, leaf, trace);
        if (t.status != LeafStatus::Closed) closed = false;
        const int off = model.dtp.offset(leaf), m = model.dtp.factor_dim(leaf);
        for (int k = off; k < off + m; ++k) {
            const double lo = model.fundamental_box.lo[k], hi = model.fundamental_box.hi[k];
            if (!std::isfinite(lo) || !std::isfinite(hi)) {
                closed = false;
                gap = std::numeric_limits<double>::infinity();
                continue;
            }
            // one trace step may separate the last visited point from the upper face
            gap = std::max({gap, std::abs(t.extent.lo[k] - lo), std::max(0.0, hi - t.extent.hi[k] - trace.step)});
        }
    }
    rep.residual = gap;
    rep.tiles = closed && gap <= model.ident_tol;
    return rep;
}

double leaf_warp_residual(const QuotientModel& model, const Vec& x0, const Word& w, int samples) {
    const DoublyTwistedProduct& dtp = model.dtp;
    const Box sb = sampling_box(model);
    const int n1 = dtp.n1();
    Box f1box{sb.lo.head(n1), sb.hi.head(n1)};
    double r = 0.0;
    for (const Vec& a : f1box.grid(samples)) {
        Vec x = x0;
        x.head(n1) = a;
        r = std::max(r, std::abs(dtp.lam2().field(model.apply(w, x)) - dtp.lam2().field(x)));
    }
    return r;
}

namespace {

// Second-order Taylor jet of a univariate function: value, first and second derivative.
struct Jet {
    double v = 0.0, d = 0.0, dd = 0.0;
};

Jet operator+(Jet a, Jet b) { return {a.v + b.v, a.d + b.d, a.dd + b.dd}; }
Jet operator-(Jet a, Jet b) { return {a.v - b.v, a.d - b.d, a.dd - b.dd}; }
Jet operator*(Jet a, Jet b) { return {a.v * b.v, a.d * b.v + a.v * b.d, a.dd * b.v + 2.0 * a.d * b.d + a.v * b.dd}; }
Jet operator*(double c, Jet a) { return {c * a.v, c * a.d, c * a.dd}; }
Jet operator+(double c, Jet a) { return {c + a.v, a.d, a.dd}; }
Jet operator-(double c, Jet a) { return {c - a.v, -a.d, -a.dd}; }
Jet operator-(Jet a, double c) { return {a.v - c, a.d, a.dd}; }
// f(a) for f with derivatives (f0, f1, f2) at a.v
Jet chain(Jet a, double f0, double f1, double f2) { return {f0, f1 * a.d, f2 * a.d * a.d + f1 * a.dd}; }
Jet recip(Jet a) {
    const double r = 1.0 / a.v;
    return chain(a, r, -r * r, 2.0 * r * r * r);
}
Jet operator/(Jet a, Jet b) { return a * recip(b); }
Jet exp(Jet a) {
    const double e = std::exp(a.v);
    return chain(a, e, e, e);
}
Jet log(Jet a) { return chain(a, std::log(a.v), 1.0 / a.v, -1.0 / (a.v * a.v)); }

double value(double x) { return x; }
double value(const Jet& x) { return x.v; }
double recip(double a) { return 1.0 / a; }
using std::exp;
using std::log;

template <class T>
T bump(T u) {
    if (std::abs(value(u)) >= 1.0) return T{};
    return exp(-1.0 * recip(1.0 - u * u));
}
template <class T>
T bump_prime(T u) {
    if (std::abs(value(u)) >= 1.0) return T{};
    const T d = 1.0 - u * u;
    return bump(u) * (-2.0 * u / (d * d));
}

// C^∞ step: 0 on (−∞, 0], 1 on [1, ∞).
template <class T>
T smooth_unit_step(T t) {
    auto psi = [](T s) { return value(s) > 0 ? exp(-1.0 * recip(s)) : T{}; };
    const T a = psi(t), b = psi(1.0 - t);
    return a / (a + b);
}

}  // namespace

Example1 build_example1(double epsilon, const Example1Params& params) {
    if (!(epsilon > 0.0 && epsilon < 0.5)) fail(ErrorKind::InvalidArgument, "epsilon must lie in (0, 1/2)");
    const double amp = params.amplitude, c = params.center;
    if (!std::isfinite(amp) || !std::isfinite(c)) fail(ErrorKind::InvalidArgument, "h parameters must be finite");

    auto h = [amp, c](auto y) { return y + amp * bump(y - c); };
    auto hp = [amp, c](auto y) { return 1.0 + amp * bump_prime(y - c); };
    for (int k = 0; k <= 4000; ++k) {
        const double y = c - 1.0 + 2.0 * k / 4000.0;
        if (!(hp(y) > 0.0)) {
            std::ostringstream os;
            os << "h'(" << y << ") = " << hp(y) << " is not positive";
            fail(ErrorKind::InvalidH, os.str());
        }
    }
    if (h(0.0) != 0.0 || hp(0.0) != 1.0) fail(ErrorKind::InvalidH, "h must fix 0 with h'(0) = 1");

    // h⁻¹ by safeguarded Newton on the bracket [y − |A|, y + |A|]
    auto f = [h, hp, amp](double y) {
        double lo = y - std::abs(amp) - 1e-12, hi = y + std::abs(amp) + 1e-12;
        double z = y;
        for (int it = 0; it < 200; ++it) {
            const double r = h(z) - y;
            if (r == 0.0) return z;
            (r > 0 ? hi : lo) = z;
            double zn = z - r / hp(z);
            if (!(zn > lo && zn < hi)) zn = 0.5 * (lo + hi);
            if (std::abs(zn - z) <= 1e-16 * std::max(1.0, std::abs(z))) return zn;
            z = zn;
        }
        return z;
    };

    const double eps = epsilon;
    auto sigma = [eps](double x) { return smooth_unit_step((x - eps) / (1.0 - 2.0 * eps)); };
    auto lambda = [h, hp, f, sigma](double x, double y) {
        const double k = std::floor(x);
        double s = x - k, yy = y, factor = 1.0;
        for (int j = 0; j < static_cast<int>(k); ++j) {
            factor *= hp(yy);
            yy = h(yy);
        }
        for (int j = 0; j < static_cast<int>(-k); ++j) {
            yy = f(yy);
            factor /= hp(yy);
        }
        return std::exp(sigma(s) * std::log(hp(yy))) * factor;
    };

    // ln λ = σ(x − k)·L(y) + G(y) with L, G carried as jets in y for the exact gradient and hessian
    auto f_jet = [f, hp](Jet y) {
        const double z = f(y.v);
        const Jet hz = hp(Jet{z, 1.0, 0.0});
        const double f1 = 1.0 / hz.v;
        return chain(y, z, f1, -hz.d * f1 * f1 * f1);
    };
    auto log_parts = [h, hp, f_jet, eps](double x, double y) {
        const double k = std::floor(x);
        const Jet sig = smooth_unit_step((1.0 / (1.0 - 2.0 * eps)) * (Jet{x - k, 1.0, 0.0} - eps));
        Jet yy{y, 1.0, 0.0}, g;
        for (int j = 0; j < static_cast<int>(k); ++j) {
            g = g + log(hp(yy));
            yy = h(yy);
        }
        for (int j = 0; j < static_cast<int>(-k); ++j) {
            yy = f_jet(yy);
            g = g - log(hp(yy));
        }
        return std::array<Jet, 3>{sig, log(hp(yy)), g};
    };
    auto lambda_grad = [log_parts](const Vec& x) {
        const auto [sig, l, g] = log_parts(x[0], x[1]);
        const double lam = std::exp(sig.v * l.v + g.v);
        return Vec((Vec(2) << lam * sig.d * l.v, lam * (sig.v * l.d + g.d)).finished());
    };
    auto lambda_hess = [log_parts](const Vec& x) {
        const auto [sig, l, g] = log_parts(x[0], x[1]);
        const double lam = std::exp(sig.v * l.v + g.v);
        const double a = sig.d * l.v, b = sig.v * l.d + g.d;
        const double xy = lam * (a * b + sig.d * l.d);
        return Mat((Mat(2, 2) << lam * (a * a + sig.dd * l.v), xy, xy, lam * (b * b + sig.v * l.dd + g.dd)).finished());
    };

    auto flat1 = [](const Vec&) { return Mat::Identity(1, 1).eval(); };
    FactorManifold f1{"R_x", 1, MetricField(1, Signature::riemannian(1), flat1), {Vec::Constant(1, -0.5), Vec::Constant(1, 1.5)}};
    FactorManifold f2{"R_y", 1, MetricField(1, Signature::riemannian(1), flat1), {Vec::Constant(1, -1.0), Vec::Constant(1, 3.0)}};
    WarpFn l1{ScalarField::constant(1.0), WarpDependency::Constant};
    WarpFn l2{ScalarField([lambda](const Vec& x) { return lambda(x[0], x[1]); }, lambda_grad, lambda_hess),
              WarpDependency::OnProduct};

    Example1 ex;
    ex.epsilon = epsilon;
    ex.h = h;
    ex.h_prime = hp;
    ex.f = f;
    ex.lambda = lambda;
    ex.model.dtp = assemble(std::move(f1), std::move(f2), std::move(l1), std::move(l2));
    DeckGenerator g;
    g.name = "phi";
    g.phi = {[](const Vec& a) { return (a.array() + 1.0).matrix().eval(); },
             [](const Vec& a) { return (a.array() - 1.0).matrix().eval(); }};
    g.psi = {[f](const Vec& b) { return Vec::Constant(1, f(b[0])); }, [h](const Vec& b) { return Vec::Constant(1, h(b[0])); }};
    ex.model.generators = {g};
    const double inf = std::numeric_limits<double>::infinity();
    ex.model.fundamental_box = {(Vec(2) << 0.0, -inf).finished(), (Vec(2) << 1.0, inf).finished()};
    return ex;
}

double seam_residual(const Example1& ex, int samples) {
    double r = 0.0;
    for (double seam : {0.0, 1.0}) {
        for (int i = 0; i < samples; ++i) {
            const double x = seam - 0.05 + 0.1 * i / (samples - 1);
            for (int j = 0; j < samples; ++j) {
                const double y = -0.5 + 3.0 * j / (samples - 1);
                r = std::max(r, std::abs(ex.lambda(x, y) - ex.lambda(x - 1.0, ex.h(y)) * ex.h_prime(y)));
            }
        }
    }
    return r;
}

TeoDGReport teodg_diagnostic(const DoublyTwistedProduct& dtp, int samples, std::mt19937_64& rng, int grid) {
    TeoDGReport rep;
    rep.min_k = std::numeric_limits<double>::infinity();
    rep.max_k = -std::numeric_limits<double>::infinity();
    std::normal_distribution<double> nd;
    const int n = dtp.dim();
    auto random_in = [&](int factor, const Mat& g) {
        Vec v = Vec::Zero(n);
        for (int k = 0; k < dtp.factor_dim(factor); ++k) v[dtp.offset(factor) + k] = nd(rng);
        return gram_schmidt(g, {v}).front();
    };
    for (int s = 0; s < samples; ++s) {
        const Vec x = dtp.domain().sample(rng);
        const Mat g = dtp.metric()(x);
        Vec X, V;
        try {
            X = random_in(1, g);
            V = random_in(2, g);
        } catch (const GeoError&) {
            continue;  // null sample direction: not a nondegenerate plane
        }
        const double k = sectional_curvature_closed_form(dtp, MixedPlane{{x, X}, {x, V}});
        if (k < -1e-9)
            ++rep.negative;
        else if (k > 1e-9)
            ++rep.positive;
        else
            ++rep.zero;
        rep.min_k = std::min(rep.min_k, k);
        if (k > rep.max_k) {
            rep.max_k = k;
            rep.worst_point = x;
        }
    }
    rep.curvature_negative = rep.positive == 0 && rep.zero == 0 && rep.negative > 0;

    // critical points of λ₂ restricted to factor 1, at the factor-2 center
    const int n1 = dtp.n1();
    const Box& dom = dtp.domain();
    const Box f1box{dom.lo.head(n1), dom.hi.head(n1)};
    const Vec b0 = dom.center().tail(dtp.n2());
    const ScalarField& lam = dtp.lam2().field;
    auto full = [&](const Vec& a) {
        Vec x(n);
        x << a, b0;
        return x;
    };
    auto grad1 = [&](const Vec& a) { return lam.partials(full(a)).head(n1).eval(); };
    std::vector<std::pair<double, Vec>> starts;
    for (const Vec& a : f1box.grid(grid)) starts.emplace_back(grad1(a).norm(), a);
    std::sort(starts.begin(), starts.end(), [](const auto& l, const auto& r) { return l.first < r.first; });
    rep.critical_grad_norm = std::numeric_limits<double>::infinity();
    for (size_t s = 0; s < std::min<size_t>(5, starts.size()); ++s) {
        Vec a = starts[s].second;
        for (int it = 0; it < 50; ++it) {
            const Vec gr = grad1(a);
            if (gr.norm() < 1e-10) break;
            const Mat hs = lam.second_partials(full(a)).topLeftCorner(n1, n1);
            const Vec step = hs.completeOrthogonalDecomposition().solve(gr);
            if (!step.allFinite()) break;
            a -= step;
            if (!f1box.contains(a)) break;
        }
        const double gn = grad1(a).norm();
        if (f1box.contains(a) && gn < rep.critical_grad_norm) {
            rep.critical_grad_norm = gn;
            if (gn < 1e-8) rep.critical_point = a;
        }
    }
    rep.hypotheses_hold = rep.curvature_negative && rep.critical_point.has_value();
    if (rep.hypotheses_hold) {
        rep.verdict = "hypotheses hold on samples";
    } else {
        std::ostringstream os;
        os << "violated at witness: ";
        if (!rep.curvature_negative)
            os << "K = " << rep.max_k << " at " << point_str(rep.worst_point);
        else
            os << "no critical point of lambda2 on factor 1";
        rep.verdict = os.str();
    }
    return rep;
}

}  // namespace twistgeo

// One PASS/FAIL line per acceptance criterion; exit status 1 when any fails.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "twistgeo/fixtures.hpp"
#include "twistgeo/runner.hpp"
#include "twistgeo/verify.hpp"

using namespace twistgeo;
namespace fx = twistgeo::fixtures;

namespace {

struct Outcome {
    bool passed = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            passed = false;
            detail << "[failed: " << what << "] ";
        }
    }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }

struct Named {
    std::string name;
    DoublyTwistedProduct dtp;
};

// The reference fixtures plus 20 seeded random doubly twisted products.
std::vector<Named> sample_set() {
    std::vector<Named> s{
        {"flat-direct", fx::flat_direct(2, 1)},
        {"polar", fx::polar_warped()},
        {"sphere", fx::sphere_warped()},
        {"hyperbolic", fx::hyperbolic_warped()},
        {"mobius", fx::mobius().dtp},
        {"skewed-torus", fx::skewed_torus().dtp},
        {"example1", build_example1().model.dtp},
        {"minkowski-direct", fx::minkowski_direct()},
    };
    for (std::uint64_t k = 0; k < 20; ++k) s.push_back({"random-" + std::to_string(k), fx::random_dtp(1000 + k)});
    return s;
}

bool is_doubly_twisted_family(StructureTag t) { return t != StructureTag::DirectProduct; }

std::vector<Vec> classification_grid(const DoublyTwistedProduct& dtp) { return dtp.domain().grid(dtp.dim() <= 2 ? 15 : 7); }

Outcome connection_equivalence() {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(1);
    double worst = 0.0;
    int samples = 0, max_dim = 0;
    for (const Named& f : sample_set()) {
        const OracleStats s = connection_vs_oracle(f.dtp, 50, rng);
        worst = std::max(worst, s.max_residual);
        samples += s.samples;
        max_dim = std::max(max_dim, f.dtp.dim());
        o.require(s.max_residual <= 1e-5, f.name);
    }
    const double secs = seconds_since(t0);
    o.require(secs < 10.0, "runtime");
    o.require(max_dim == 4, "a 2+2 random product is included");
    o.detail << samples << " contractions, max residual " << worst << ", " << secs << " s";
    return o;
}

Outcome curvature_equivalence() {
    Outcome o;
    std::mt19937_64 rng(2);
    double worst = 0.0;
    int planes = 0;
    for (const Named& f : sample_set()) {
        const CurvatureStats s = curvature_vs_oracle(f.dtp, 50, rng);
        worst = std::max(worst, s.max_residual);
        planes += s.planes;
        o.require(s.max_residual <= 1e-5, f.name);
    }
    const CurvatureStats sphere = curvature_vs_oracle(fx::sphere_warped(), 50, rng);
    const CurvatureStats hyper = curvature_vs_oracle(fx::hyperbolic_warped(), 50, rng);
    o.require(std::abs(sphere.min_k - 1.0) <= 1e-6 && std::abs(sphere.max_k - 1.0) <= 1e-6, "sphere-polar K = 1");
    o.require(std::abs(hyper.min_k + 1.0) <= 1e-6 && std::abs(hyper.max_k + 1.0) <= 1e-6, "hyperbolic-polar K = -1");
    o.detail << planes << " planes, max residual " << worst << ", sphere K in [" << sphere.min_k << ", " << sphere.max_k
             << "], hyperbolic K in [" << hyper.min_k << ", " << hyper.max_k << "]";
    return o;
}

Outcome classification() {
    Outcome o;
    const std::vector<std::pair<Named, StructureTag>> cases{
        {{"polar", fx::polar_warped()}, StructureTag::Warped},
        {{"sphere", fx::sphere_warped()}, StructureTag::Warped},
        {{"hyperbolic", fx::hyperbolic_warped()}, StructureTag::Warped},
        {{"parabola", fx::parabola_warped()}, StructureTag::Warped},
        {{"lorentz-warped", fx::lorentz_warped()}, StructureTag::Warped},
        {{"example1", build_example1().model.dtp}, StructureTag::Twisted},
        {{"flat-direct", fx::flat_direct(2, 1)}, StructureTag::DirectProduct},
        {{"minkowski-direct", fx::minkowski_direct()}, StructureTag::DirectProduct},
        {{"lorentz-sphere", fx::lorentz_sphere()}, StructureTag::DirectProduct},
        {{"mobius", fx::mobius().dtp}, StructureTag::DirectProduct},
    };
    int wrong = 0;
    for (const auto& [f, expected] : cases) {
        const StructureClass c = classify(f.dtp, classification_grid(f.dtp));
        if (c.tag != expected) {
            ++wrong;
            o.require(false, f.name + " classified " + to_string(c.tag));
        }
        if (expected == StructureTag::Twisted) {
            const double d = std::max(c.max_domega1, c.max_domega2);
            o.require(d > 10.0 * kClosedThreshold, "twisted margin");
            o.detail << "example1 max|d omega| = " << d << "; ";
        }
    }
    o.detail << cases.size() << " fixtures, " << wrong << " misclassified";
    return o;
}

Outcome adapted_translation_law() {
    Outcome o;
    std::mt19937_64 rng(4);
    double drift = 0.0, norm = 0.0;
    int curves = 0;
    std::vector<Named> set = sample_set();
    set.push_back({"lorentz-warped", fx::lorentz_warped()});
    for (const Named& f : set) {
        if (!is_doubly_twisted_family(classify(f.dtp, classification_grid(f.dtp)).tag)) continue;
        const AdaptedStats s = adapted_translation_stats(f.dtp, 5, rng);
        drift = std::max(drift, s.max_component_drift);
        norm = std::max(norm, s.max_norm_law);
        curves += s.curves;
        o.require(s.max_component_drift <= 1e-6 && s.max_norm_law <= 1e-6, f.name);
    }
    o.detail << curves << " horizontal curves, max component drift " << drift << ", max norm-law residual " << norm;
    return o;
}

double identity_error(const Mat& m) { return (m - Mat::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff(); }

Outcome holonomy() {
    Outcome o;
    const Vec origin = v2(0, 0);
    const Mat hm = quotient_holonomy(fx::mobius(), origin, 1, {1}).matrix;
    o.require(hm.rows() == 1 && std::abs(hm(0, 0) + 1.0) <= 1e-6, "mobius generator gives -1");
    double torus = 0.0;
    torus = std::max(torus, identity_error(quotient_holonomy(fx::flat_torus(), origin, 1, {1}).matrix));
    torus = std::max(torus, identity_error(quotient_holonomy(fx::flat_torus(), origin, 2, {2}).matrix));
    torus = std::max(torus, identity_error(quotient_holonomy(fx::skewed_torus(), origin, 1, {1}).matrix));
    torus = std::max(torus, identity_error(quotient_holonomy(fx::skewed_torus(), origin, 2, {2, 2, -1}).matrix));
    o.require(torus <= 1e-6, "torus loops give identity");

    // h(w w') = h(w') h(w) on concatenated loops
    double comp = 0.0;
    struct Case {
        QuotientModel m;
        Vec x0;
        Word w;
    };
    Vec axis_off(3);
    axis_off << 0.2, 0.0, 0.0;
    for (const Case& c : {Case{fx::mobius(), origin, {1}}, Case{fx::homothety_quotient(), origin, {1}},
                          Case{fx::rotation_quotient(0.7), axis_off, {1}}}) {
        const Mat h1 = quotient_holonomy(c.m, c.x0, 1, c.w).matrix;
        Word ww = c.w;
        ww.insert(ww.end(), c.w.begin(), c.w.end());
        const Mat h2 = quotient_holonomy(c.m, c.x0, 1, ww).matrix;
        comp = std::max(comp, (h2 - h1 * h1).cwiseAbs().maxCoeff());
    }
    o.require(comp <= 1e-6, "composition law");
    o.detail << "mobius h = " << hm(0, 0) << ", torus identity error " << torus << ", composition residual " << comp;
    return o;
}

Outcome intersections() {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    const Vec origin = v2(0, 0);
    const IntersectionReport sk = leaf_intersection_count(fx::skewed_torus(), origin, 4);
    const IntersectionReport to = leaf_intersection_count(fx::flat_torus(), origin, 4);
    const IntersectionReport mo = leaf_intersection_count(fx::mobius(), origin, 4);
    const double secs = seconds_since(t0);
    o.require(sk.count == 2, "skewed torus count 2");
    std::set<std::pair<double, double>> distinct;
    for (const auto& [up, rep] : sk.witnesses) distinct.insert({std::round(rep[0] * 1e6), std::round(rep[1] * 1e6)});
    o.require(distinct.size() == 2, "two distinct witnesses");
    o.require(to.count == 1, "flat torus count 1");
    o.require(mo.count == 1, "mobius count 1");
    o.require(secs < 5.0, "runtime");
    o.detail << "skewed " << sk.count << " (" << distinct.size() << " witnesses), torus " << to.count << ", mobius " << mo.count
             << ", word bound 4, " << secs << " s";
    return o;
}

Outcome verdicts() {
    Outcome o;
    const std::vector<std::pair<std::string, std::string>> cases{
        {"flat-torus", "GlobalDoublyWarpedProduct"},
        {"mobius", "Obstructed(NontrivialHolonomy)"},
        {"skewed-torus", "Obstructed(MultipleIntersections(2))"},
    };
    for (const auto& [name, expected] : cases) {
        const Scenario sc = builtin_scenario(name);
        const DecompositionVerdict v = decomposition_check(*sc.quotient, sc.basepoint, sc.loops);
        o.require(to_string(v) == expected, name);
        o.detail << name << ": " << to_string(v) << " (count " << v.count << "); ";
    }
    return o;
}

Outcome example1() {
    Outcome o;
    const Example1 ex = build_example1();
    const double seam = seam_residual(ex);
    const LeafTrace closed = leaf_trace(ex.model, v2(0, 0), 1);
    const LeafTrace open = leaf_trace(ex.model, v2(0, 1), 1);
    const StructureTag tag = classify(ex.model.dtp, classification_grid(ex.model.dtp)).tag;
    o.require(seam < 1e-8, "seam residual");
    o.require(closed.status == LeafStatus::Closed, "leaf through y=0 closed");
    o.require(open.status == LeafStatus::OpenWithinBudget, "leaf through y=1 open");
    o.require(tag == StructureTag::Twisted, "classified twisted");
    o.detail << "seam residual " << seam << ", y=0 " << to_string(closed.status) << " (length " << closed.length << "), y=1 "
             << to_string(open.status) << ", structure " << to_string(tag);
    return o;
}

Outcome broken_geodesics() {
    Outcome o;
    std::mt19937_64 rng(9);
    std::normal_distribution<double> nd;
    double worst = 0.0;
    for (const MetricField& g : {fx::euclidean(2), fx::sphere_metric()}) {
        for (int s = 0; s < 5; ++s) {
            BrokenGeodesicSpec spec{v2(1.2, 0.3), {0.25, 0.5, 0.8}, {}};
            for (int k = 0; k < 4; ++k) spec.velocities.push_back(0.4 * v2(nd(rng), nd(rng)));
            const PiecewiseCurve c = broken_geodesic(g, spec);
            const std::vector<TangentVector> prof = velocity_profile(g, c, {0.1, 0.4, 0.6, 0.9});
            for (size_t k = 0; k < prof.size(); ++k) worst = std::max(worst, (prof[k].comp - spec.velocities[k]).norm());
        }
    }
    o.require(worst <= 1e-5, "round trip");
    const std::vector<Vec> e{v2(1, 0), v2(0, 1)};
    const bool sums = broken_length(e, {v2(0, 0), {}, {v2(1, 0)}}) == 1.0 &&
                      broken_length(e, {v2(0, 0), {0.5}, {v2(1, 0), v2(0, 1)}}) == 2.0 &&
                      broken_length(e, {v2(0, 0), {0.5}, {v2(3, 0), v2(0, 4)}}) == 7.0 &&
                      broken_length(e, {v2(0, 0), {0.2, 0.6}, {v2(0.5, 0), v2(0, -1.5), v2(-2, 0)}}) == 4.0;
    o.require(sums, "hand sums");
    o.detail << "round-trip residual " << worst << ", hand sums " << (sums ? "exact" : "differ");
    return o;
}

Outcome second_fundamental_and_lightlike() {
    Outcome o;
    std::mt19937_64 rng(10);
    double tworst = 0.0;
    std::vector<Named> set = sample_set();
    set.push_back({"lorentz-warped", fx::lorentz_warped()});
    set.push_back({"lorentz-sphere", fx::lorentz_sphere()});
    for (const Named& f : set) {
        const OracleStats s = oneill_vs_definitional(f.dtp, 20, rng);
        tworst = std::max(tworst, s.max_residual);
        o.require(s.max_residual <= 1e-5, "T on " + f.name);
    }
    double flat = 0.0;
    int flat_planes = 0;
    for (const Named& f : {Named{"minkowski-direct", fx::minkowski_direct()}}) {
        const LightlikeStats s = lightlike_vs_oracle(f.dtp.metric(), f.dtp.domain(), 30, rng);
        flat = std::max(flat, s.max_abs_k);
        flat_planes += s.planes;
    }
    for (int n : {3, 4}) {
        Box box{Vec::Constant(n, -1.0), Vec::Constant(n, 1.0)};
        const LightlikeStats s = lightlike_vs_oracle(fx::minkowski(n), box, 30, rng);
        flat = std::max(flat, s.max_abs_k);
        flat_planes += s.planes;
    }
    o.require(flat_planes > 0 && flat <= 1e-7, "flat lightlike curvature vanishes");
    double curved = 0.0, curved_k = 0.0;
    int curved_planes = 0;
    for (const Named& f : {Named{"lorentz-sphere", fx::lorentz_sphere()}, Named{"lorentz-warped", fx::lorentz_warped()}}) {
        const LightlikeStats s = lightlike_vs_oracle(f.dtp.metric(), f.dtp.domain(), 30, rng);
        curved = std::max(curved, s.max_residual);
        curved_k = std::max(curved_k, s.max_abs_k);
        curved_planes += s.planes;
        o.require(s.planes > 0 && s.max_residual <= 1e-5, "lightlike oracle on " + f.name);
    }
    o.detail << "T residual " << tworst << ", flat lightlike max|K| " << flat << " (" << flat_planes << " planes), curved residual "
             << curved << " (" << curved_planes << " planes, max|K| " << curved_k << ")";
    return o;
}

Outcome full_suite() {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    const std::string cmd = std::string("\"") + TWISTGEO_CLI + "\" run all verify-all > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    const double secs = seconds_since(t0);
    const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    o.require(code == 0, "exit status " + std::to_string(code));
    o.require(secs < 300.0, "runtime");
    o.detail << list_scenarios().size() << " built-in scenarios, exit " << code << ", " << secs << " s";
    return o;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"connection closed form matches the Christoffel oracle", connection_equivalence},
        {"sectional curvature closed form matches the Riemann oracle", curvature_equivalence},
        {"structure classification", classification},
        {"adapted translation keeps components and obeys the norm law", adapted_translation_law},
        {"leaf holonomy of the quotient fixtures", holonomy},
        {"leaf intersection counts", intersections},
        {"global decomposition verdicts", verdicts},
        {"twisted counterexample reproduction", example1},
        {"broken geodesics and velocity profiles", broken_geodesics},
        {"O'Neill tensor and lightlike sectional curvature", second_fundamental_and_lightlike},
        {"verify-all across built-in scenarios", full_suite},
    };
    bool all = true;
    for (size_t k = 0; k < criteria.size(); ++k) {
        Outcome o;
        try {
            o = criteria[k].second();
        } catch (const std::exception& e) {
            o.passed = false;
            o.detail << "exception: " << e.what();
        }
        all = all && o.passed;
        std::printf("%s %zu %s: %s\n", o.passed ? "PASS" : "FAIL", k + 1, criteria[k].first.c_str(), o.detail.str().c_str());
        std::fflush(stdout);
    }
    return all ? 0 : 1;
}

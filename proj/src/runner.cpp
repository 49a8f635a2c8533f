#include "twistgeo/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "json.hpp"

namespace twistgeo {

using ojson = nlohmann::ordered_json;

bool Report::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckRecord& c) { return c.passed; });
}

int Report::failures() const {
    return static_cast<int>(std::count_if(checks.begin(), checks.end(), [](const CheckRecord& c) { return !c.passed; }));
}

const std::vector<std::string>& commands() {
    static const std::vector<std::string> names{"classify", "christoffel",   "curvature", "transport", "holonomy",
                                                "intersections", "decompose", "teodg",     "verify-all"};
    return names;
}

namespace {

std::string fmt17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// nlohmann's own number output is shortest round-trip; reports use a fixed 17 digits.
void render(const ojson& j, std::string& out, int indent) {
    const std::string pad(static_cast<size_t>(indent + 2), ' '), close(static_cast<size_t>(indent), ' ');
    switch (j.type()) {
        case ojson::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            size_t k = 0;
            for (const auto& [key, val] : j.items()) {
                out += pad + ojson(key).dump() + ": ";
                render(val, out, indent + 2);
                out += ++k < j.size() ? ",\n" : "\n";
            }
            out += close + "}";
            return;
        }
        case ojson::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            const bool scalars = std::none_of(j.begin(), j.end(), [](const ojson& e) { return e.is_structured(); });
            if (scalars) {
                out += "[";
                for (size_t k = 0; k < j.size(); ++k) {
                    if (k) out += ", ";
                    render(j[k], out, indent);
                }
                out += "]";
                return;
            }
            out += "[\n";
            for (size_t k = 0; k < j.size(); ++k) {
                out += pad;
                render(j[k], out, indent + 2);
                out += k + 1 < j.size() ? ",\n" : "\n";
            }
            out += close + "]";
            return;
        }
        case ojson::value_t::number_float: {
            const double v = j.get<double>();
            out += std::isfinite(v) ? fmt17(v) : "null";
            return;
        }
        default: out += j.dump();
    }
}

ojson to_json(const Vec& v) {
    ojson a = ojson::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

ojson to_json(const Mat& m) {
    ojson a = ojson::array();
    for (int r = 0; r < m.rows(); ++r) a.push_back(to_json(Vec(m.row(r).transpose())));
    return a;
}

std::string detail(const GeoError& e) {
    const std::string w = e.what();
    const size_t colon = w.find(": ");
    return colon == std::string::npos ? w : w.substr(colon + 2);
}

bool warped_like(StructureTag t) {
    return t == StructureTag::Warped || t == StructureTag::DoublyWarped || t == StructureTag::DirectProduct;
}

class Runner {
public:
    Runner(const Scenario& sc, const RunOptions& opts)
        : sc_(sc),
          tol_(opts.tol ? Tolerances::uniform(*opts.tol) : Tolerances{}),
          samples_(opts.samples.value_or(sc.samples)),
          seed_(opts.seed.value_or(sc.seed)),
          word_bound_(opts.word_bound) {
        if (samples_ < 1) fail(ErrorKind::InvalidArgument, "samples must be positive");
        if (word_bound_ && *word_bound_ < 1) fail(ErrorKind::InvalidArgument, "word bound must be positive");
        if (opts.tol && !(*opts.tol > 0)) fail(ErrorKind::InvalidArgument, "tolerance must be positive");
        if (sc_.quotient) {
            model_ = *sc_.quotient;
            if (word_bound_) model_->word_bound = *word_bound_;
        }
    }

    Report run(const std::string& command) {
        if (command == "verify-all") verify_all();
        else if (command == "classify") guarded("classify", [&] { classify(); });
        else if (command == "christoffel") guarded("christoffel", [&] { christoffel(); });
        else if (command == "curvature") guarded("curvature", [&] { curvature(); });
        else if (command == "transport") guarded("transport", [&] { transport(); });
        else if (command == "holonomy") guarded("holonomy", [&] { holonomy(); });
        else if (command == "intersections") guarded("intersections", [&] { intersections(); });
        else if (command == "decompose") guarded("decompose", [&] { decompose(); });
        else if (command == "teodg") guarded("teodg", [&] { teodg(); });
        else fail(ErrorKind::InvalidArgument, "unknown command '" + command + "'");
        return finish(command);
    }

private:
    template <class F>
    void guarded(const std::string& name, F&& f) {
        try {
            f();
        } catch (const GeoError& e) {
            throw GeoError(e.kind(), name + " on scenario '" + sc_.name + "': " + detail(e));
        }
    }

    std::mt19937_64 rng() const { return std::mt19937_64(seed_); }

    const QuotientModel& model(const char* command) const {
        if (!model_) fail(ErrorKind::InvalidArgument, std::string("command '") + command + "' needs a quotient scenario");
        return *model_;
    }

    ojson& section(const std::string& name) {
        ojson s;
        s["computation"] = name;
        results_.push_back(std::move(s));
        current_ = name;
        return results_.back();
    }

    void check(ojson& sec, const std::string& name, bool passed, std::optional<double> value = std::nullopt,
               std::optional<double> tol = std::nullopt, const std::string& det = {}) {
        ojson c;
        c["name"] = name;
        c["passed"] = passed;
        c["value"] = value ? ojson(*value) : ojson(nullptr);
        c["tol"] = tol ? ojson(*tol) : ojson(nullptr);
        if (!det.empty()) c["detail"] = det;
        sec["checks"].push_back(std::move(c));
        checks_.push_back({current_, name, passed, value, tol, det});
    }
    void check_le(ojson& sec, const std::string& name, double value, double tol) {
        check(sec, name, std::isfinite(value) && value <= tol, value, tol);
    }

    int grid_per_dim() const {
        const int n = sc_.dtp.dim();
        return std::max(3, static_cast<int>(std::lround(std::pow(10.0 * samples_, 1.0 / n))));
    }

    StructureClass structure() {
        if (!structure_) structure_ = twistgeo::classify(sc_.dtp, sc_.dtp.domain().grid(grid_per_dim()));
        return *structure_;
    }

    void classify() {
        ojson& s = section("classify");
        const StructureClass c = structure();
        s["structure"] = to_string(c.tag);
        s["max_domega1"] = c.max_domega1;
        s["max_domega2"] = c.max_domega2;
        s["max_n1"] = c.max_n1;
        s["max_n2"] = c.max_n2;
        s["grid_points"] = static_cast<int>(sc_.dtp.domain().grid(grid_per_dim()).size());
        s["thresholds"] = {{"vanish", kVanishThreshold}, {"closed", kClosedThreshold}};
        if (sc_.expect.structure) {
            check(s, "structure", c.tag == *sc_.expect.structure, std::nullopt, std::nullopt,
                  "expected " + to_string(*sc_.expect.structure) + ", got " + to_string(c.tag));
            if (*sc_.expect.structure == StructureTag::Twisted) {
                const double d = std::max(c.max_domega1, c.max_domega2);
                check(s, "non_closed_margin", d > 10.0 * kClosedThreshold, d, 10.0 * kClosedThreshold,
                      "max |d omega| must exceed ten times the closedness threshold");
            }
        }
    }

    void christoffel() {
        ojson& s = section("christoffel");
        const Christoffel gam = christoffel_numeric(sc_.dtp.metric(), sc_.basepoint);
        const int n = sc_.dtp.dim();
        ojson table = ojson::array();
        for (int k = 0; k < n; ++k) {
            Mat m(n, n);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) m(i, j) = gam(k, i, j);
            table.push_back(to_json(m));
        }
        s["basepoint"] = to_json(sc_.basepoint);
        s["gamma"] = std::move(table);
        auto r = rng();
        const OracleStats st = connection_vs_oracle(sc_.dtp, samples_, r);
        s["connection_samples"] = st.samples;
        check_le(s, "closed_form_vs_oracle", st.max_residual, tol_.connection);
    }

    void curvature() {
        ojson& s = section("curvature");
        auto r = rng();
        const CurvatureStats cs = curvature_vs_oracle(sc_.dtp, samples_, r);
        s["planes"] = cs.planes;
        s["min_k"] = cs.min_k;
        s["max_k"] = cs.max_k;
        check(s, "planes_sampled", cs.planes > 0, cs.planes);
        check_le(s, "closed_form_vs_oracle", cs.max_residual, tol_.curvature);
        if (sc_.expect.curvature) {
            const double k = *sc_.expect.curvature;
            s["expected_k"] = k;
            check_le(s, "constant_curvature", std::max(std::abs(cs.min_k - k), std::abs(cs.max_k - k)), tol_.curvature_value);
        }
        const LightlikeStats ls = lightlike_vs_oracle(sc_.dtp.metric(), sc_.dtp.domain(), samples_, r);
        if (ls.planes > 0) {
            s["lightlike_planes"] = ls.planes;
            s["lightlike_max_abs_k"] = ls.max_abs_k;
            check_le(s, "lightlike_vs_oracle", ls.max_residual, tol_.curvature);
            if (sc_.expect.curvature && *sc_.expect.curvature == 0.0) check_le(s, "lightlike_flat", ls.max_abs_k, tol_.lightlike_flat);
        }
        const OracleStats os = oneill_vs_definitional(sc_.dtp, samples_, r);
        check_le(s, "oneill_T_vs_definitional", os.max_residual, tol_.oneill);
    }

    void transport() {
        ojson& s = section("transport");
        auto r = rng();
        const AdaptedStats a = adapted_translation_stats(sc_.dtp, std::max(3, samples_ / 4), r);
        s["horizontal_curves"] = a.curves;
        check_le(s, "adapted_components_constant", a.max_component_drift, tol_.transport);
        check_le(s, "adapted_norm_law", a.max_norm_law, tol_.transport);
        check_le(s, "parallel_norm_conservation", a.max_parallel_drift, a.parallel_budget);
        ojson curves = ojson::array();
        for (const NamedCurve& nc : sc_.curves) {
            const Vec x = nc.curve.point(0.0);
            Vec v = Vec::Zero(sc_.dtp.dim());
            v[sc_.dtp.n1()] = 1.0;
            if (nc.vector) v = *nc.vector;
            const TransportResult p = parallel_transport(sc_.dtp.metric(), nc.curve, {x, v});
            ojson c;
            c["name"] = nc.name;
            c["start"] = to_json(x);
            c["end"] = to_json(p.final().base);
            c["vector"] = to_json(v);
            c["parallel"] = to_json(p.final().comp);
            const double q0 = std::abs(v.dot(sc_.dtp.metric()(x) * v));
            check_le(s, nc.name + ".parallel_norm_conservation", p.tol_achieved / (1.0 + q0), 10.0 * OdeOptions{}.rel_tol);
            if (sc_.dtp.in_factor(2, v)) {
                try {
                    const TransportResult at = adapted_translation(sc_.dtp, nc.curve, {x, v});
                    c["adapted"] = to_json(at.final().comp);
                    c["integral_omega"] = at.integral_omega;
                    double drift = 0.0;
                    for (const TransportSample& smp : at.samples) drift = std::max(drift, (smp.v.comp - v).cwiseAbs().maxCoeff());
                    check_le(s, nc.name + ".adapted_components_constant", drift, tol_.transport);
                    check_le(s, nc.name + ".adapted_norm_law", at.tol_achieved, tol_.transport);
                } catch (const GeoError& e) {
                    if (e.kind() != ErrorKind::NotInLeaf) throw;
                    c["adapted"] = nullptr;  // the curve leaves the factor-1 leaf
                }
            }
            curves.push_back(std::move(c));
        }
        if (!curves.empty()) s["curves"] = std::move(curves);
    }

    void holonomy() {
        const QuotientModel& m = model("holonomy");
        ojson& s = section("holonomy");
        s["basepoint"] = to_json(sc_.basepoint);
        ojson maps = ojson::array();
        std::set<std::pair<int, Word>> seen;
        auto emit = [&](int leaf, const Word& w) {
            const HolonomyMap h = quotient_holonomy(m, sc_.basepoint, leaf, w);
            if (!seen.insert({leaf, w}).second) return h.matrix;
            ojson e;
            e["leaf"] = leaf;
            e["word"] = to_string(w);
            e["matrix"] = to_json(h.matrix);
            maps.push_back(std::move(e));
            return h.matrix;
        };
        for (int leaf : {1, 2}) {
            for (const Word& w : leaf == 1 ? sc_.loops.f1 : sc_.loops.f2) {
                const Mat h = emit(leaf, w);
                Word ww = w;
                ww.insert(ww.end(), w.begin(), w.end());
                const Mat h2 = quotient_holonomy(m, sc_.basepoint, leaf, ww).matrix;
                check_le(s, "composition[" + to_string(w) + "]", (h2 - h * h).cwiseAbs().maxCoeff(), tol_.holonomy);
                if (leaf == 1 && (h - Mat::Identity(h.rows(), h.cols())).cwiseAbs().maxCoeff() <= tol_.holonomy)
                    check_le(s, "warp_compatible[" + to_string(w) + "]", leaf_warp_residual(m, sc_.basepoint, w), tol_.warp);
            }
        }
        for (const HolonomyExpectation& e : sc_.expect.holonomy) {
            const Mat h = emit(e.leaf, e.word);
            check_le(s, "expected[F" + std::to_string(e.leaf) + ":" + to_string(e.word) + "]", (h - e.matrix).cwiseAbs().maxCoeff(),
                     tol_.holonomy);
        }
        s["maps"] = std::move(maps);
    }

    void intersections() {
        const QuotientModel& m = model("intersections");
        ojson& s = section("intersections");
        const IntersectionReport ir = leaf_intersection_count(m, sc_.basepoint, m.word_bound);
        s["basepoint"] = to_json(sc_.basepoint);
        s["count"] = ir.count;
        s["word_bound"] = ir.word_bound_used;
        s["lower_bound_only"] = ir.lower_bound_only;
        ojson w = ojson::array();
        for (const auto& [cand, red] : ir.witnesses) w.push_back({{"upstairs", to_json(cand)}, {"reduced", to_json(red)}});
        s["witnesses"] = std::move(w);
        if (sc_.expect.intersections)
            check(s, "count", ir.count == *sc_.expect.intersections, ir.count, std::nullopt,
                  "expected " + std::to_string(*sc_.expect.intersections));
    }

    void decompose() {
        const QuotientModel& m = model("decompose");
        ojson& s = section("decompose");
        const DecompositionVerdict v = decomposition_check(m, sc_.basepoint, sc_.loops);
        const StructureClass c = structure();
        s["verdict"] = to_string(v);
        s["count"] = v.count;
        s["lower_bound_only"] = v.lower_bound_only;
        if (v.reason == ObstructionKind::NontrivialHolonomy) {
            s["leaf"] = v.leaf;
            s["loop"] = to_string(v.loop);
            s["holonomy"] = to_json(v.holonomy);
        }
        s["structure"] = to_string(c.tag);
        // the global criterion presumes a (doubly) warped structure
        s["structure_hypothesis_holds"] = warped_like(c.tag);
        if (sc_.expect.verdict)
            check(s, "verdict", to_string(v) == *sc_.expect.verdict, std::nullopt, std::nullopt, "expected " + *sc_.expect.verdict);
        if (v.tag == VerdictTag::GlobalDoublyWarpedProduct) {
            const ProductChartReport pc = product_chart_check(m, sc_.basepoint);
            s["product_chart_tiles"] = pc.tiles;
            s["product_chart_residual"] = pc.residual;
            // a twisted structure can pass the leaf tests without being a global product
            if (warped_like(c.tag)) check(s, "product_chart_tiles", pc.tiles, pc.residual);
        }
    }

    void teodg() {
        ojson& s = section("teodg");
        auto r = rng();
        const TeoDGReport t = teodg_diagnostic(sc_.dtp, 10 * samples_, r);
        s["negative"] = t.negative;
        s["zero"] = t.zero;
        s["positive"] = t.positive;
        s["min_k"] = t.min_k;
        s["max_k"] = t.max_k;
        s["worst_point"] = to_json(t.worst_point);
        s["critical_point"] = t.critical_point ? to_json(*t.critical_point) : ojson(nullptr);
        s["critical_grad_norm"] = t.critical_grad_norm;
        s["curvature_negative"] = t.curvature_negative;
        s["hypotheses_hold"] = t.hypotheses_hold;
        s["verdict"] = t.verdict;
        if (sc_.expect.critical_point)
            check(s, "critical_point", t.critical_point.has_value() == *sc_.expect.critical_point, std::nullopt, std::nullopt,
                  *sc_.expect.critical_point ? "expected a critical point of lambda2" : "expected no critical point of lambda2");
        if (sc_.expect.curvature_negative)
            check(s, "curvature_negative", t.curvature_negative == *sc_.expect.curvature_negative, t.max_k);
    }

    void validation() {
        const QuotientModel& m = *model_;
        ojson& s = section("validate");
        try {
            const ValidationReport v = validate(m);
            s["samples"] = v.samples;
            s["words_checked"] = v.words_checked;
            s["max_inverse_residual"] = v.max_inverse_residual;
            s["max_isometry_residual"] = v.max_isometry_residual;
            s["max_homothety_residual"] = v.max_homothety_residual;
            s["max_warp_residual"] = v.max_warp_residual;
            s["min_orbit_separation"] = v.min_orbit_separation;
            s["note"] = "orbit separation is a sampled necessary condition for proper discontinuity, not a proof";
            check(s, "generators_valid", true);
        } catch (const GeoError& e) {
            if (e.kind() != ErrorKind::InvalidAction) throw;
            check(s, "generators_valid", false, std::nullopt, std::nullopt, detail(e));
        }
    }

    void canonical() {
        const QuotientModel& m = *model_;
        ojson& s = section("canonical_rep");
        auto r = rng();
        int n = 0, bad = 0;
        for (int k = 0; k < samples_; ++k) {
            const Vec x = interior_sample(sc_.dtp.domain(), r);
            try {
                const CanonicalRep a = canonical_rep(m, x);
                const CanonicalRep b = canonical_rep(m, a.point);
                if (!(a.point == b.point) || !b.word.empty() || !m.in_box(a.point)) ++bad;
                if ((m.apply(a.word, x) - a.point).norm() != 0.0) ++bad;
                ++n;
            } catch (const GeoError& e) {
                if (e.kind() != ErrorKind::WordBoundExceeded) throw;
            }
        }
        s["points"] = n;
        check(s, "idempotent", bad == 0 && n > 0, bad);
    }

    void leaves() {
        const QuotientModel& m = *model_;
        ojson& s = section("leaves");
        ojson out = ojson::array();
        for (const LeafExpectation& e : sc_.expect.leaves) {
            const LeafTrace t = leaf_trace(m, e.point, e.leaf);
            out.push_back({{"point", to_json(e.point)},
                           {"leaf", e.leaf},
                           {"status", to_string(t.status)},
                           {"length", t.length},
                           {"reductions", t.reductions}});
            const std::string tag = "F" + std::to_string(e.leaf) + "(" + std::to_string(out.size() - 1) + ")";
            check(s, tag + ".status", t.status == e.status, std::nullopt, std::nullopt, "expected " + to_string(e.status));
            if (e.length) check_le(s, tag + ".length", std::abs(t.length - *e.length), tol_.leaf_length);
        }
        s["traces"] = std::move(out);
    }

    void example1() {
        ojson& s = section("example1");
        const Example1& ex = *sc_.example1;
        s["epsilon"] = ex.epsilon;
        check_le(s, "seam_residual", seam_residual(ex), tol_.seam);
    }

    void verify_all() {
        if (model_) {
            guarded("validate", [&] { validation(); });
            guarded("canonical_rep", [&] { canonical(); });
            if (!sc_.expect.leaves.empty()) guarded("leaves", [&] { leaves(); });
        }
        if (sc_.example1) guarded("example1", [&] { example1(); });
        guarded("classify", [&] { classify(); });
        guarded("christoffel", [&] { christoffel(); });
        guarded("curvature", [&] { curvature(); });
        guarded("transport", [&] { transport(); });
        if (model_) {
            guarded("holonomy", [&] { holonomy(); });
            guarded("intersections", [&] { intersections(); });
            guarded("decompose", [&] { decompose(); });
        }
        if (sc_.expect.critical_point || sc_.expect.curvature_negative) guarded("teodg", [&] { teodg(); });
    }

    Report finish(const std::string& command) {
        ojson doc;
        doc["schema_version"] = kReportSchemaVersion;
        doc["tool"] = {{"name", "twistgeo"}, {"version", kToolVersion}};
        ojson scen;
        scen["name"] = sc_.name;
        scen["description"] = sc_.description;
        scen["dims"] = {sc_.dtp.n1(), sc_.dtp.n2()};
        scen["signature"] = sc_.dtp.metric().signature().signs();
        scen["quotient"] = sc_.quotient.has_value();
        doc["scenario"] = std::move(scen);
        doc["command"] = command;
        doc["seed"] = seed_;
        doc["samples"] = samples_;
        doc["word_bound"] = model_ ? ojson(model_->word_bound) : ojson(nullptr);
        doc["tolerances"] = {{"connection", tol_.connection},     {"curvature", tol_.curvature},
                             {"curvature_value", tol_.curvature_value}, {"transport", tol_.transport},
                             {"holonomy", tol_.holonomy},         {"seam", tol_.seam},
                             {"oneill", tol_.oneill},             {"lightlike_flat", tol_.lightlike_flat},
                             {"warp", tol_.warp},                 {"leaf_length", tol_.leaf_length},
                             {"ident_tol", model_ ? model_->ident_tol : 1e-7}};
        for (ojson& sec : results_)
            if (!sec.contains("checks")) sec["checks"] = ojson::array();
        doc["results"] = results_;
        Report rep;
        rep.scenario = sc_.name;
        rep.command = command;
        rep.checks = checks_;
        doc["summary"] = {{"checks", static_cast<int>(checks_.size())}, {"failed", rep.failures()}, {"passed", rep.passed()}};
        render(doc, rep.json, 0);
        rep.json += "\n";
        return rep;
    }

    const Scenario& sc_;
    Tolerances tol_;
    int samples_;
    std::uint64_t seed_;
    std::optional<int> word_bound_;
    std::optional<QuotientModel> model_;
    std::optional<StructureClass> structure_;
    ojson results_ = ojson::array();
    std::vector<CheckRecord> checks_;
    std::string current_;
};

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
    return out + "\"";
}

}  // namespace

Report run(const Scenario& scenario, const std::string& command, const RunOptions& opts) {
    return Runner(scenario, opts).run(command);
}

std::string report_csv(const Report& report) {
    std::ostringstream os;
    os << "scenario,command,computation,check,passed,value,tol,detail\n";
    for (const CheckRecord& c : report.checks) {
        os << csv_field(report.scenario) << ',' << csv_field(report.command) << ',' << csv_field(c.computation) << ','
           << csv_field(c.name) << ',' << (c.passed ? "true" : "false") << ',' << (c.value ? fmt17(*c.value) : "") << ','
           << (c.tol ? fmt17(*c.tol) : "") << ',' << csv_field(c.detail) << '\n';
    }
    return os.str();
}

}  // namespace twistgeo

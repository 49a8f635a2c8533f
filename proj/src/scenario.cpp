#include "twistgeo/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "json.hpp"
#include "twistgeo/expr.hpp"
#include "twistgeo/fixtures.hpp"

namespace twistgeo {

namespace fx = fixtures;
using json = nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Message without the leading error-kind tag.
std::string detail(const GeoError& e) {
    const std::string w = e.what();
    const size_t colon = w.find(": ");
    return colon == std::string::npos ? w : w.substr(colon + 2);
}

// Offsets of every value and object key in a syntactically valid JSON text,
// addressed by slash-separated paths ("/factors/0/coords").
class Locator {
public:
    explicit Locator(const std::string& text) : s_(text) {
        skip_ws();
        value("");
    }

    size_t value_offset(const std::string& path) const { return lookup(values_, path); }
    size_t key_offset(const std::string& path) const { return lookup(keys_, path); }

private:
    size_t lookup(const std::map<std::string, size_t>& m, std::string path) const {
        for (;;) {
            if (const auto it = m.find(path); it != m.end()) return it->second;
            if (const auto it = values_.find(path); it != values_.end()) return it->second;
            if (path.empty()) return 0;
            path.erase(path.rfind('/'));
        }
    }

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    std::string string_token() {
        std::string out;
        ++pos_;
        while (pos_ < s_.size() && s_[pos_] != '"') {
            if (s_[pos_] == '\\') ++pos_;
            out += s_[pos_++];
        }
        ++pos_;
        return out;
    }

    void value(const std::string& path) {
        values_[path] = pos_;
        const char c = s_[pos_];
        if (c == '{') {
            ++pos_;
            skip_ws();
            while (s_[pos_] != '}') {
                const size_t at = pos_;
                const std::string key = string_token();
                keys_[path + "/" + key] = at;
                skip_ws();
                ++pos_;  // ':'
                skip_ws();
                value(path + "/" + key);
                skip_ws();
                if (s_[pos_] == ',') ++pos_, skip_ws();
            }
            ++pos_;
        } else if (c == '[') {
            ++pos_;
            skip_ws();
            for (int i = 0; s_[pos_] != ']'; ++i) {
                value(path + "/" + std::to_string(i));
                skip_ws();
                if (s_[pos_] == ',') ++pos_, skip_ws();
            }
            ++pos_;
        } else if (c == '"') {
            string_token();
        } else {
            while (pos_ < s_.size() && !std::strchr(",]} \t\r\n", s_[pos_])) ++pos_;
        }
    }

    const std::string& s_;
    size_t pos_ = 0;
    std::map<std::string, size_t> values_;
    std::map<std::string, size_t> keys_;
};

class Loader {
public:
    Loader(const std::string& text, std::string source) : text_(text), source_(std::move(source)) {
        try {
            root_ = json::parse(text);
        } catch (const json::parse_error& e) {
            fail_at(e.byte > 0 ? e.byte - 1 : 0, "invalid JSON: " + std::string(e.what()).substr(std::string(e.what()).find(": ") + 2));
        }
        loc_.emplace(text_);
    }

    Scenario load();

private:
    [[noreturn]] void fail_at(size_t offset, const std::string& msg) const {
        int line = 1, col = 1;
        for (size_t i = 0; i < offset && i < text_.size(); ++i) {
            if (text_[i] == '\n') ++line, col = 1;
            else ++col;
        }
        fail(ErrorKind::ParseError, source_ + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + msg);
    }
    [[noreturn]] void fail_value(const std::string& path, const std::string& msg) const {
        fail_at(loc_->value_offset(path), msg);
    }

    const json& at(const json& j, const std::string& path, const std::string& key) const {
        if (!j.contains(key)) fail_value(path, "missing required key '" + key + "'");
        return j.at(key);
    }

    void check_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) const {
        if (!j.is_object()) fail_value(path, "expected an object");
        for (const auto& [key, _] : j.items()) {
            if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
                fail_at(loc_->key_offset(path + "/" + key), "unknown key '" + key + "'");
        }
    }

    double number(const json& j, const std::string& path) const {
        if (!j.is_number()) fail_value(path, "expected a number");
        return j.get<double>();
    }
    int integer(const json& j, const std::string& path) const {
        if (!j.is_number_integer()) fail_value(path, "expected an integer");
        return j.get<int>();
    }
    std::string string(const json& j, const std::string& path) const {
        if (!j.is_string()) fail_value(path, "expected a string");
        return j.get<std::string>();
    }
    const json& array(const json& j, const std::string& path, std::optional<size_t> size = std::nullopt) const {
        if (!j.is_array()) fail_value(path, "expected an array");
        if (size && j.size() != *size) fail_value(path, "expected " + std::to_string(*size) + " entries");
        return j;
    }
    Vec vector(const json& j, const std::string& path, int size) const {
        array(j, path, static_cast<size_t>(size));
        Vec v(size);
        for (int i = 0; i < size; ++i) v[i] = number(j[static_cast<size_t>(i)], path + "/" + std::to_string(i));
        return v;
    }
    std::vector<std::string> strings(const json& j, const std::string& path) const {
        array(j, path);
        std::vector<std::string> out;
        for (size_t i = 0; i < j.size(); ++i) out.push_back(string(j[i], path + "/" + std::to_string(i)));
        return out;
    }

    Expr expr(const json& j, const std::string& path, const std::vector<std::string>& vars) const {
        const std::string text = j.is_number() ? j.dump() : string(j, path);
        try {
            return Expr::parse(text, vars);
        } catch (const ExprError& e) {
            const size_t quote = j.is_string() ? 1 : 0;
            fail_at(loc_->value_offset(path) + quote + e.offset(), e.what());
        }
    }
    std::vector<Expr> exprs(const json& j, const std::string& path, const std::vector<std::string>& vars, size_t size) const {
        array(j, path, size);
        std::vector<Expr> out;
        for (size_t i = 0; i < size; ++i) out.push_back(expr(j[i], path + "/" + std::to_string(i), vars));
        return out;
    }

    struct FactorSpec {
        FactorManifold manifold;
        std::vector<std::string> coords;
    };
    FactorSpec factor(const json& j, const std::string& path, int index) const;
    std::vector<DeckGenerator> generators(const json& j, const std::string& path, const FactorSpec& f1,
                                          const FactorSpec& f2) const;
    Word word(const json& j, const std::string& path, const std::vector<DeckGenerator>& gens) const {
        const std::string text = string(j, path);
        try {
            return parse_word(text, gens);
        } catch (const GeoError& e) {
            fail_value(path, detail(e));
        }
    }
    NamedCurve curve(const json& j, const std::string& path, int dim) const;
    ScenarioExpect expectations(const json& j, const std::string& path, const Scenario& sc) const;

    const std::string& text_;
    std::string source_;
    json root_;
    std::optional<Locator> loc_;
};

MetricField expr_metric(const std::vector<std::vector<Expr>>& m, Signature sig) {
    const int n = static_cast<int>(m.size());
    return MetricField(n, std::move(sig), [m, n](const Vec& x) {
        Mat g(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) g(i, j) = m[static_cast<size_t>(i)][static_cast<size_t>(j)](std::span<const double>(x.data(), static_cast<size_t>(n)));
        return g;
    });
}

Loader::FactorSpec Loader::factor(const json& j, const std::string& path, int index) const {
    check_keys(j, path, {"name", "coords", "metric", "preset", "signature", "domain"});
    FactorSpec f;
    f.coords = strings(at(j, path, "coords"), path + "/coords");
    const int n = static_cast<int>(f.coords.size());
    if (n == 0) fail_value(path + "/coords", "a factor needs at least one coordinate");
    f.manifold.name = j.contains("name") ? string(j["name"], path + "/name") : "M" + std::to_string(index);
    f.manifold.dim = n;

    const json& dom = array(at(j, path, "domain"), path + "/domain", static_cast<size_t>(n));
    f.manifold.domain = {Vec(n), Vec(n)};
    for (int i = 0; i < n; ++i) {
        const std::string p = path + "/domain/" + std::to_string(i);
        const Vec lh = vector(dom[static_cast<size_t>(i)], p, 2);
        if (!(lh[0] < lh[1])) fail_value(p, "domain bounds must satisfy lo < hi");
        f.manifold.domain.lo[i] = lh[0];
        f.manifold.domain.hi[i] = lh[1];
    }

    if (j.contains("preset") == j.contains("metric")) fail_value(path, "give exactly one of 'metric' and 'preset'");
    if (j.contains("preset")) {
        if (j.contains("signature")) fail_at(loc_->key_offset(path + "/signature"), "a preset fixes its signature");
        const std::string p = string(j["preset"], path + "/preset");
        if (p == "euclidean") f.manifold.metric = fx::euclidean(n);
        else if (p == "minkowski") f.manifold.metric = fx::minkowski(n);
        else if (p == "sphere" || p == "hyperbolic" || p == "polar") {
            if (n != 2) fail_value(path + "/preset", "preset '" + p + "' needs two coordinates");
            f.manifold.metric = p == "sphere" ? fx::sphere_metric() : p == "hyperbolic" ? fx::hyperbolic_metric() : fx::polar_metric();
        } else {
            fail_value(path + "/preset", "unknown preset '" + p + "' (euclidean, minkowski, sphere, hyperbolic, polar)");
        }
    } else {
        const json& m = array(j["metric"], path + "/metric", static_cast<size_t>(n));
        std::vector<std::vector<Expr>> rows;
        for (int i = 0; i < n; ++i)
            rows.push_back(exprs(m[static_cast<size_t>(i)], path + "/metric/" + std::to_string(i), f.coords, static_cast<size_t>(n)));
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < i; ++k)
                if (rows[static_cast<size_t>(i)][static_cast<size_t>(k)].text() != rows[static_cast<size_t>(k)][static_cast<size_t>(i)].text())
                    fail_value(path + "/metric/" + std::to_string(i) + "/" + std::to_string(k), "metric matrix must be symmetric");
        Signature sig = Signature::riemannian(n);
        if (j.contains("signature")) {
            const Vec s = vector(j["signature"], path + "/signature", n);
            std::vector<int> signs;
            for (int i = 0; i < n; ++i) {
                if (s[i] != 1.0 && s[i] != -1.0) fail_value(path + "/signature/" + std::to_string(i), "signature entries are 1 or -1");
                signs.push_back(static_cast<int>(s[i]));
            }
            sig = Signature(signs);
        }
        f.manifold.metric = expr_metric(rows, sig);
    }
    return f;
}

FactorMap expr_map(std::vector<Expr> fwd, std::vector<Expr> inv) {
    auto eval = [](const std::vector<Expr>& e) {
        return [e](const Vec& a) {
            Vec out(static_cast<int>(e.size()));
            for (size_t i = 0; i < e.size(); ++i) out[static_cast<int>(i)] = e[i](std::span<const double>(a.data(), static_cast<size_t>(a.size())));
            return out;
        };
    };
    return {eval(fwd), eval(inv)};
}

std::vector<DeckGenerator> Loader::generators(const json& j, const std::string& path, const FactorSpec& f1,
                                              const FactorSpec& f2) const {
    array(j, path);
    if (j.empty()) fail_value(path, "a quotient needs at least one generator");
    std::vector<DeckGenerator> gens;
    std::set<std::string> names;
    for (size_t k = 0; k < j.size(); ++k) {
        const std::string p = path + "/" + std::to_string(k);
        const json& g = j[k];
        check_keys(g, p, {"name", "phi", "phi_inv", "psi", "psi_inv", "c1", "c2"});
        DeckGenerator d;
        d.name = string(at(g, p, "name"), p + "/name");
        if (!names.insert(d.name).second) fail_value(p + "/name", "duplicate generator name '" + d.name + "'");
        if (d.name == "e" || d.name.find_first_of(" ^") != std::string::npos) fail_value(p + "/name", "invalid generator name");
        const size_t n1 = f1.coords.size(), n2 = f2.coords.size();
        d.phi = expr_map(exprs(at(g, p, "phi"), p + "/phi", f1.coords, n1), exprs(at(g, p, "phi_inv"), p + "/phi_inv", f1.coords, n1));
        d.psi = expr_map(exprs(at(g, p, "psi"), p + "/psi", f2.coords, n2), exprs(at(g, p, "psi_inv"), p + "/psi_inv", f2.coords, n2));
        for (const char* c : {"c1", "c2"}) {
            if (!g.contains(c)) continue;
            const double v = number(g[c], p + "/" + c);
            if (!(v > 0)) fail_value(p + "/" + c, "homothety factors are positive");
            (std::string(c) == "c1" ? d.c1 : d.c2) = v;
        }
        gens.push_back(std::move(d));
    }
    return gens;
}

NamedCurve Loader::curve(const json& j, const std::string& path, int dim) const {
    check_keys(j, path, {"name", "polyline", "spline", "point", "velocity", "vector"});
    NamedCurve c;
    c.name = string(at(j, path, "name"), path + "/name");
    const int kinds = static_cast<int>(j.contains("polyline")) + static_cast<int>(j.contains("spline")) +
                      static_cast<int>(j.contains("point"));
    if (kinds != 1) fail_value(path, "give exactly one of 'polyline', 'spline' and 'point'/'velocity'");
    try {
        if (j.contains("point")) {
            const std::vector<std::string> t{"t"};
            const auto pt = exprs(j["point"], path + "/point", t, static_cast<size_t>(dim));
            const auto vel = exprs(at(j, path, "velocity"), path + "/velocity", t, static_cast<size_t>(dim));
            auto eval = [dim](std::vector<Expr> e) {
                return [e, dim](double s) {
                    Vec out(dim);
                    for (int i = 0; i < dim; ++i) out[i] = e[static_cast<size_t>(i)](std::span<const double>(&s, 1));
                    return out;
                };
            };
            c.curve = PiecewiseCurve::parametric(eval(pt), eval(vel));
        } else {
            const char* key = j.contains("polyline") ? "polyline" : "spline";
            const json& pts = array(j[key], path + "/" + key);
            if (pts.size() < 2) fail_value(path + "/" + key, "a curve needs at least two points");
            std::vector<Vec> ps;
            for (size_t i = 0; i < pts.size(); ++i) ps.push_back(vector(pts[i], path + "/" + key + "/" + std::to_string(i), dim));
            c.curve = std::string(key) == "polyline" ? PiecewiseCurve::polyline(ps) : PiecewiseCurve::catmull_rom(ps);
        }
    } catch (const GeoError& e) {
        if (e.kind() == ErrorKind::ParseError) throw;
        fail_value(path, detail(e));
    }
    if (j.contains("vector")) c.vector = vector(j["vector"], path + "/vector", dim);
    return c;
}

ScenarioExpect Loader::expectations(const json& j, const std::string& path, const Scenario& sc) const {
    check_keys(j, path, {"structure", "curvature", "verdict", "intersections", "holonomy", "leaves", "critical_point",
                         "curvature_negative"});
    ScenarioExpect e;
    const std::vector<DeckGenerator> no_gens;
    const std::vector<DeckGenerator>& gens = sc.quotient ? sc.quotient->generators : no_gens;
    auto need_quotient = [&](const char* key) {
        if (!sc.quotient) fail_at(loc_->key_offset(path + "/" + key), std::string("'") + key + "' needs a quotient");
    };
    if (j.contains("structure")) {
        const std::string text = string(j["structure"], path + "/structure");
        try {
            e.structure = parse_structure(text);
        } catch (const GeoError& err) {
            fail_value(path + "/structure", detail(err));
        }
    }
    if (j.contains("curvature")) e.curvature = number(j["curvature"], path + "/curvature");
    if (j.contains("verdict")) {
        need_quotient("verdict");
        e.verdict = string(j["verdict"], path + "/verdict");
    }
    if (j.contains("intersections")) {
        need_quotient("intersections");
        e.intersections = integer(j["intersections"], path + "/intersections");
    }
    if (j.contains("holonomy")) {
        need_quotient("holonomy");
        const json& hs = array(j["holonomy"], path + "/holonomy");
        for (size_t k = 0; k < hs.size(); ++k) {
            const std::string p = path + "/holonomy/" + std::to_string(k);
            check_keys(hs[k], p, {"leaf", "word", "matrix"});
            HolonomyExpectation h;
            h.leaf = integer(at(hs[k], p, "leaf"), p + "/leaf");
            if (h.leaf != 1 && h.leaf != 2) fail_value(p + "/leaf", "leaf is 1 or 2");
            h.word = word(at(hs[k], p, "word"), p + "/word", gens);
            const int m = h.leaf == 1 ? sc.dtp.n2() : sc.dtp.n1();
            const json& rows = array(at(hs[k], p, "matrix"), p + "/matrix", static_cast<size_t>(m));
            h.matrix = Mat(m, m);
            for (int r = 0; r < m; ++r) h.matrix.row(r) = vector(rows[static_cast<size_t>(r)], p + "/matrix/" + std::to_string(r), m).transpose();
            e.holonomy.push_back(std::move(h));
        }
    }
    if (j.contains("leaves")) {
        need_quotient("leaves");
        const json& ls = array(j["leaves"], path + "/leaves");
        for (size_t k = 0; k < ls.size(); ++k) {
            const std::string p = path + "/leaves/" + std::to_string(k);
            check_keys(ls[k], p, {"point", "leaf", "status", "length"});
            LeafExpectation l;
            l.point = vector(at(ls[k], p, "point"), p + "/point", sc.dtp.dim());
            l.leaf = integer(at(ls[k], p, "leaf"), p + "/leaf");
            if (l.leaf != 1 && l.leaf != 2) fail_value(p + "/leaf", "leaf is 1 or 2");
            const std::string status = string(at(ls[k], p, "status"), p + "/status");
            try {
                l.status = parse_leaf_status(status);
            } catch (const GeoError& err) {
                fail_value(p + "/status", detail(err));
            }
            if (ls[k].contains("length")) l.length = number(ls[k]["length"], p + "/length");
            e.leaves.push_back(std::move(l));
        }
    }
    if (j.contains("critical_point")) {
        if (!j["critical_point"].is_boolean()) fail_value(path + "/critical_point", "expected true or false");
        e.critical_point = j["critical_point"].get<bool>();
    }
    if (j.contains("curvature_negative")) {
        if (!j["curvature_negative"].is_boolean()) fail_value(path + "/curvature_negative", "expected true or false");
        e.curvature_negative = j["curvature_negative"].get<bool>();
    }
    return e;
}

WarpFn expr_warp(const Expr& e, int n1) {
    WarpDependency dep = WarpDependency::Constant;
    const auto& u = e.uses();
    const bool on1 = std::any_of(u.begin(), u.end(), [n1](int i) { return i < n1; });
    const bool on2 = std::any_of(u.begin(), u.end(), [n1](int i) { return i >= n1; });
    if (on1 && on2) dep = WarpDependency::OnProduct;
    else if (on1) dep = WarpDependency::OnFactor1Only;
    else if (on2) dep = WarpDependency::OnFactor2Only;
    return {ScalarField([e](const Vec& x) { return e(std::span<const double>(x.data(), static_cast<size_t>(x.size()))); }), dep};
}

Scenario Loader::load() {
    const std::string p;
    check_keys(root_, p, {"name", "description", "seed", "samples", "factors", "warps", "quotient", "basepoint", "curves", "expect"});
    Scenario sc;
    sc.name = string(at(root_, p, "name"), "/name");
    if (root_.contains("description")) sc.description = string(root_["description"], "/description");
    if (root_.contains("seed")) {
        const json& s = root_["seed"];
        if (!s.is_number_unsigned()) fail_value("/seed", "seed is a nonnegative integer");
        sc.seed = s.get<std::uint64_t>();
    }
    if (root_.contains("samples")) {
        sc.samples = integer(root_["samples"], "/samples");
        if (sc.samples < 1) fail_value("/samples", "samples must be positive");
    }

    const json& fs = array(at(root_, p, "factors"), "/factors", 2);
    const FactorSpec f1 = factor(fs[0], "/factors/0", 1), f2 = factor(fs[1], "/factors/1", 2);
    std::vector<std::string> all = f1.coords;
    all.insert(all.end(), f2.coords.begin(), f2.coords.end());
    {
        std::set<std::string> seen;
        for (const std::string& c : all)
            if (!seen.insert(c).second) fail_value("/factors", "duplicate coordinate name '" + c + "'");
    }

    std::optional<Expr> l1, l2;
    if (root_.contains("warps")) {
        const json& w = root_["warps"];
        check_keys(w, "/warps", {"lambda1", "lambda2"});
        if (w.contains("lambda1")) l1 = expr(w["lambda1"], "/warps/lambda1", all);
        if (w.contains("lambda2")) l2 = expr(w["lambda2"], "/warps/lambda2", all);
    }
    if (!l1) l1 = Expr::parse("1", all);
    if (!l2) l2 = Expr::parse("1", all);
    try {
        sc.dtp = assemble(f1.manifold, f2.manifold, expr_warp(*l1, static_cast<int>(f1.coords.size())),
                          expr_warp(*l2, static_cast<int>(f1.coords.size())));
    } catch (const GeoError& e) {
        fail_value(root_.contains("warps") ? "/warps" : "/factors", detail(e));
    }
    const int n = sc.dtp.dim();

    if (root_.contains("quotient")) {
        const json& q = root_["quotient"];
        const std::string qp = "/quotient";
        check_keys(q, qp, {"generators", "box", "ident_tol", "word_bound", "loops"});
        QuotientModel m;
        m.dtp = sc.dtp;
        m.generators = generators(at(q, qp, "generators"), qp + "/generators", f1, f2);
        const json& box = array(at(q, qp, "box"), qp + "/box", static_cast<size_t>(n));
        m.fundamental_box = {Vec(n), Vec(n)};
        for (int i = 0; i < n; ++i) {
            const std::string bp = qp + "/box/" + std::to_string(i);
            const json& b = array(box[static_cast<size_t>(i)], bp, 2);
            m.fundamental_box.lo[i] = b[0].is_null() ? -kInf : number(b[0], bp + "/0");
            m.fundamental_box.hi[i] = b[1].is_null() ? kInf : number(b[1], bp + "/1");
            if (!(m.fundamental_box.lo[i] < m.fundamental_box.hi[i])) fail_value(bp, "box bounds must satisfy lo < hi");
        }
        if (q.contains("ident_tol")) m.ident_tol = number(q["ident_tol"], qp + "/ident_tol");
        if (q.contains("word_bound")) m.word_bound = integer(q["word_bound"], qp + "/word_bound");
        if (q.contains("loops")) {
            const json& l = q["loops"];
            check_keys(l, qp + "/loops", {"f1", "f2"});
            for (const char* key : {"f1", "f2"}) {
                if (!l.contains(key)) continue;
                const std::string lp = qp + "/loops/" + key;
                array(l[key], lp);
                for (size_t k = 0; k < l[key].size(); ++k)
                    (std::string(key) == "f1" ? sc.loops.f1 : sc.loops.f2).push_back(word(l[key][k], lp + "/" + std::to_string(k), m.generators));
            }
        }
        sc.quotient = std::move(m);
    }

    sc.basepoint = root_.contains("basepoint") ? vector(root_["basepoint"], "/basepoint", n) : sc.dtp.domain().center();
    if (!sc.dtp.domain().contains(sc.basepoint)) fail_value("/basepoint", "basepoint lies outside the product domain");
    if (sc.quotient && !sc.quotient->in_box(sc.basepoint)) fail_value("/basepoint", "basepoint lies outside the fundamental box");

    if (root_.contains("curves")) {
        const json& cs = array(root_["curves"], "/curves");
        for (size_t k = 0; k < cs.size(); ++k) sc.curves.push_back(curve(cs[k], "/curves/" + std::to_string(k), n));
    }
    if (root_.contains("expect")) sc.expect = expectations(root_["expect"], "/expect", sc);
    return sc;
}

// Built-in roster.

Scenario quotient_scenario(std::string name, std::string description, QuotientModel m, Vec basepoint) {
    Scenario sc;
    sc.name = std::move(name);
    sc.description = std::move(description);
    sc.dtp = m.dtp;
    sc.quotient = std::move(m);
    sc.basepoint = std::move(basepoint);
    return sc;
}

Scenario product_scenario(std::string name, std::string description, DoublyTwistedProduct dtp) {
    Scenario sc;
    sc.name = std::move(name);
    sc.description = std::move(description);
    sc.dtp = std::move(dtp);
    sc.basepoint = sc.dtp.domain().center();
    return sc;
}

Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }
Mat m1(double a) { return Mat::Constant(1, 1, a); }

Scenario build(const std::string& name, std::uint64_t seed) {
    if (name == "mobius") {
        Scenario sc = quotient_scenario("mobius", "Flat strip modulo (x, y) -> (x+1, -y): the central circle has holonomy -1",
                                        fx::mobius(), v2(0, 0));
        sc.loops = {{Word{1}}, {}};
        sc.expect.structure = StructureTag::DirectProduct;
        sc.expect.curvature = 0.0;
        sc.expect.intersections = 1;
        sc.expect.verdict = "Obstructed(NontrivialHolonomy)";
        sc.expect.holonomy = {{1, {1}, m1(-1.0)}, {1, {1, 1}, m1(1.0)}};
        sc.expect.leaves = {{v2(0, 0), 1, LeafStatus::Closed, 1.0}, {v2(0, 0.3), 1, LeafStatus::Closed, 2.0}};
        return sc;
    }
    if (name == "flat-torus") {
        Scenario sc = quotient_scenario("flat-torus", "Axis-aligned flat torus R^2 / Z^2", fx::flat_torus(), v2(0, 0));
        sc.loops = {{Word{1}}, {Word{2}}};
        sc.expect.structure = StructureTag::DirectProduct;
        sc.expect.curvature = 0.0;
        sc.expect.intersections = 1;
        sc.expect.verdict = "GlobalDoublyWarpedProduct";
        sc.expect.holonomy = {{1, {1}, m1(1.0)}, {2, {2}, m1(1.0)}};
        sc.expect.leaves = {{v2(0, 0), 1, LeafStatus::Closed, 1.0}, {v2(0, 0), 2, LeafStatus::Closed, 1.0}};
        return sc;
    }
    if (name == "skewed-torus") {
        Scenario sc = quotient_scenario("skewed-torus", "Flat torus with lattice generated by (1, 0) and (1/2, 1)",
                                        fx::skewed_torus(), v2(0, 0));
        sc.loops = {{Word{1}}, {Word{2, 2, -1}}};
        sc.expect.structure = StructureTag::DirectProduct;
        sc.expect.curvature = 0.0;
        sc.expect.intersections = 2;
        sc.expect.verdict = "Obstructed(MultipleIntersections(2))";
        sc.expect.holonomy = {{1, {1}, m1(1.0)}, {2, {2, 2, -1}, m1(1.0)}};
        sc.expect.leaves = {{v2(0, 0), 1, LeafStatus::Closed, 1.0}, {v2(0, 0), 2, LeafStatus::Closed, 2.0}};
        return sc;
    }
    if (name == "example1-twisted") {
        Example1 ex = build_example1();
        Scenario sc = quotient_scenario("example1-twisted",
                                        "Twisted metric dx^2 + lambda(x,y)^2 dy^2 modulo (x+1, h^-1(y)): closed and open leaves",
                                        ex.model, v2(0, 0));
        sc.loops = {{Word{1}}, {}};
        sc.expect.structure = StructureTag::Twisted;
        sc.expect.holonomy = {{1, {1}, m1(1.0)}};
        sc.expect.leaves = {{v2(0, 0), 1, LeafStatus::Closed, 1.0}, {v2(0, 1.0), 1, LeafStatus::OpenWithinBudget, std::nullopt}};
        sc.example1 = std::move(ex);
        return sc;
    }
    if (name == "sphere-polar") {
        Scenario sc = product_scenario("sphere-polar", "Round unit sphere as the warped product dr^2 + sin^2 r dtheta^2",
                                       fx::sphere_warped());
        sc.expect.structure = StructureTag::Warped;
        sc.expect.curvature = 1.0;
        return sc;
    }
    if (name == "hyperbolic-polar") {
        Scenario sc = product_scenario("hyperbolic-polar", "Hyperbolic plane as dr^2 + sinh^2 r dtheta^2",
                                       fx::hyperbolic_warped());
        sc.expect.structure = StructureTag::Warped;
        sc.expect.curvature = -1.0;
        sc.expect.curvature_negative = true;
        sc.expect.critical_point = false;
        return sc;
    }
    if (name == "lorentz-direct") {
        Scenario sc = product_scenario("lorentz-direct", "Lorentzian direct product (R, -dt^2) x unit sphere",
                                       fx::lorentz_sphere());
        sc.expect.structure = StructureTag::DirectProduct;
        return sc;
    }
    if (name == "minkowski-direct") {
        Scenario sc = product_scenario("minkowski-direct", "Flat Lorentzian direct product R^{1,1} x R", fx::minkowski_direct());
        sc.expect.structure = StructureTag::DirectProduct;
        sc.expect.curvature = 0.0;
        return sc;
    }
    if (name == "random-dtp") {
        Scenario sc = product_scenario("random-dtp", "Seeded doubly twisted product with warps on both factors",
                                       fx::random_dtp(seed));
        sc.expect.structure = StructureTag::DoublyTwisted;
        sc.seed = seed;
        return sc;
    }
    if (name == "polar-plane") {
        Scenario sc = product_scenario("polar-plane", "Punctured Euclidean plane dr^2 + r^2 dtheta^2", fx::polar_warped());
        sc.expect.structure = StructureTag::Warped;
        sc.expect.curvature = 0.0;
        sc.expect.critical_point = false;
        return sc;
    }
    if (name == "parabola-warped") {
        Scenario sc = product_scenario("parabola-warped", "Warped product dx^2 + (1 + x^2)^2 dy^2 with a critical warp",
                                       fx::parabola_warped());
        sc.expect.structure = StructureTag::Warped;
        sc.expect.critical_point = true;
        return sc;
    }
    fail(ErrorKind::InvalidArgument, "unknown scenario '" + name + "'");
}

}  // namespace

Scenario parse_scenario(const std::string& text, const std::string& source) { return Loader(text, source).load(); }

Scenario load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::ParseError, path + ": cannot open file");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str(), path);
}

std::vector<std::string> list_scenarios() {
    return {"mobius",         "flat-torus",     "skewed-torus", "example1-twisted", "sphere-polar",   "hyperbolic-polar",
            "lorentz-direct", "minkowski-direct", "random-dtp",   "polar-plane",      "parabola-warped"};
}

Scenario builtin_scenario(const std::string& name, std::optional<std::uint64_t> seed) {
    Scenario sc = build(name, seed.value_or(1));
    if (seed) sc.seed = *seed;
    return sc;
}

Word parse_word(const std::string& text, const std::vector<DeckGenerator>& generators) {
    std::istringstream in(text);
    std::string tok;
    Word w;
    while (in >> tok) {
        if (tok == "e") continue;
        bool inv = false;
        if (tok.size() > 3 && tok.ends_with("^-1")) {
            inv = true;
            tok.resize(tok.size() - 3);
        }
        const auto it = std::find_if(generators.begin(), generators.end(), [&](const DeckGenerator& g) { return g.name == tok; });
        if (it == generators.end()) fail(ErrorKind::ParseError, "unknown generator '" + tok + "' in word '" + text + "'");
        const int letter = static_cast<int>(it - generators.begin()) + 1;
        w.push_back(inv ? -letter : letter);
    }
    return w;
}

StructureTag parse_structure(const std::string& text) {
    for (StructureTag t : {StructureTag::DoublyTwisted, StructureTag::Twisted, StructureTag::DoublyWarped, StructureTag::Warped,
                           StructureTag::DirectProduct})
        if (to_string(t) == text) return t;
    fail(ErrorKind::ParseError, "unknown structure '" + text + "'");
}

LeafStatus parse_leaf_status(const std::string& text) {
    if (text == "Closed") return LeafStatus::Closed;
    if (text == "OpenWithinBudget") return LeafStatus::OpenWithinBudget;
    fail(ErrorKind::ParseError, "unknown leaf status '" + text + "' (Closed, OpenWithinBudget)");
}

}  // namespace twistgeo

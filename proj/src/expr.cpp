#include "twistgeo/expr.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>

namespace twistgeo {

struct Expr::Node {
    enum class Kind { Number, Variable, Negate, Binary, Call } kind = Kind::Number;
    double value = 0.0;
    int variable = -1;
    char op = 0;
    std::function<double(std::span<const double>)> fn;
    std::vector<std::shared_ptr<const Node>> args;

    double eval(std::span<const double> vars) const {
        switch (kind) {
            case Kind::Number: return value;
            case Kind::Variable: return vars[static_cast<size_t>(variable)];
            case Kind::Negate: return -args[0]->eval(vars);
            case Kind::Binary: {
                const double a = args[0]->eval(vars), b = args[1]->eval(vars);
                switch (op) {
                    case '+': return a + b;
                    case '-': return a - b;
                    case '*': return a * b;
                    case '/': return a / b;
                    default: return std::pow(a, b);
                }
            }
            case Kind::Call: {
                double buf[3];
                for (size_t i = 0; i < args.size(); ++i) buf[i] = args[i]->eval(vars);
                return fn(std::span<const double>(buf, args.size()));
            }
        }
        return 0.0;
    }
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;

struct Builtin {
    size_t arity;
    std::function<double(std::span<const double>)> fn;
};

double smoothstep(double e0, double e1, double x) {
    const double t = std::clamp((x - e0) / (e1 - e0), 0.0, 1.0);
    return t * t * (3.0 - 2.0 * t);
}

const std::map<std::string, Builtin, std::less<>>& builtins() {
    using S = std::span<const double>;
    static const std::map<std::string, Builtin, std::less<>> table = {
        {"exp", {1, [](S a) { return std::exp(a[0]); }}},
        {"log", {1, [](S a) { return std::log(a[0]); }}},
        {"sqrt", {1, [](S a) { return std::sqrt(a[0]); }}},
        {"abs", {1, [](S a) { return std::abs(a[0]); }}},
        {"sin", {1, [](S a) { return std::sin(a[0]); }}},
        {"cos", {1, [](S a) { return std::cos(a[0]); }}},
        {"tan", {1, [](S a) { return std::tan(a[0]); }}},
        {"asin", {1, [](S a) { return std::asin(a[0]); }}},
        {"acos", {1, [](S a) { return std::acos(a[0]); }}},
        {"atan", {1, [](S a) { return std::atan(a[0]); }}},
        {"sinh", {1, [](S a) { return std::sinh(a[0]); }}},
        {"cosh", {1, [](S a) { return std::cosh(a[0]); }}},
        {"tanh", {1, [](S a) { return std::tanh(a[0]); }}},
        {"min", {2, [](S a) { return std::min(a[0], a[1]); }}},
        {"max", {2, [](S a) { return std::max(a[0], a[1]); }}},
        {"pow", {2, [](S a) { return std::pow(a[0], a[1]); }}},
        {"atan2", {2, [](S a) { return std::atan2(a[0], a[1]); }}},
        {"smoothstep", {3, [](S a) { return smoothstep(a[0], a[1], a[2]); }}},
    };
    return table;
}

class Parser {
public:
    Parser(const std::string& text, const std::vector<std::string>& vars) : s_(text), vars_(vars) {}

    NodePtr parse_all() {
        NodePtr n = expr();
        skip_ws();
        if (pos_ != s_.size()) throw ExprError(pos_, "unexpected '" + std::string(1, s_[pos_]) + "'");
        return n;
    }

    std::vector<int> uses() const {
        std::vector<int> u(used_.begin(), used_.end());
        std::sort(u.begin(), u.end());
        u.erase(std::unique(u.begin(), u.end()), u.end());
        return u;
    }

private:
    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool accept(char c) {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    void expect(char c) {
        if (!accept(c)) throw ExprError(pos_, std::string("expected '") + c + "'");
    }

    static NodePtr binary(char op, NodePtr a, NodePtr b) {
        auto n = std::make_shared<Expr::Node>();
        n->kind = Expr::Node::Kind::Binary;
        n->op = op;
        n->args = {std::move(a), std::move(b)};
        return n;
    }

    NodePtr expr() {
        NodePtr n = term();
        for (;;) {
            if (accept('+')) n = binary('+', n, term());
            else if (accept('-')) n = binary('-', n, term());
            else return n;
        }
    }

    NodePtr term() {
        NodePtr n = unary();
        for (;;) {
            if (accept('*')) n = binary('*', n, unary());
            else if (accept('/')) n = binary('/', n, unary());
            else return n;
        }
    }

    NodePtr unary() {
        if (accept('-')) {
            auto n = std::make_shared<Expr::Node>();
            n->kind = Expr::Node::Kind::Negate;
            n->args = {unary()};
            return n;
        }
        if (accept('+')) return unary();
        return power();
    }

    // right associative; the exponent may carry its own sign
    NodePtr power() {
        NodePtr base = primary();
        if (accept('^')) return binary('^', base, unary());
        return base;
    }

    NodePtr primary() {
        skip_ws();
        if (pos_ >= s_.size()) throw ExprError(pos_, "unexpected end of expression");
        const char c = s_[pos_];
        if (accept('(')) {
            NodePtr n = expr();
            expect(')');
            return n;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
        throw ExprError(pos_, "unexpected '" + std::string(1, c) + "'");
    }

    NodePtr number() {
        const size_t start = pos_;
        double v = 0.0;
        const auto [end, ec] = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), v);
        if (ec != std::errc()) throw ExprError(start, "malformed number");
        pos_ = static_cast<size_t>(end - s_.data());
        auto n = std::make_shared<Expr::Node>();
        n->value = v;
        return n;
    }

    NodePtr identifier() {
        const size_t start = pos_;
        while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
        const std::string name = s_.substr(start, pos_ - start);
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == '(') {
            const auto it = builtins().find(name);
            if (it == builtins().end()) throw ExprError(start, "unknown function '" + name + "'");
            ++pos_;
            auto n = std::make_shared<Expr::Node>();
            n->kind = Expr::Node::Kind::Call;
            n->fn = it->second.fn;
            if (!accept(')')) {
                do n->args.push_back(expr());
                while (accept(','));
                expect(')');
            }
            if (n->args.size() != it->second.arity)
                throw ExprError(start, "'" + name + "' takes " + std::to_string(it->second.arity) + " argument(s)");
            return n;
        }
        const auto var = std::find(vars_.begin(), vars_.end(), name);
        auto n = std::make_shared<Expr::Node>();
        if (var != vars_.end()) {
            n->kind = Expr::Node::Kind::Variable;
            n->variable = static_cast<int>(var - vars_.begin());
            used_.push_back(n->variable);
        } else if (name == "pi") {
            n->value = std::numbers::pi;
        } else if (name == "e") {
            n->value = std::numbers::e;
        } else {
            throw ExprError(start, "unknown identifier '" + name + "'");
        }
        return n;
    }

    const std::string& s_;
    const std::vector<std::string>& vars_;
    size_t pos_ = 0;
    std::vector<int> used_;
};

}  // namespace

Expr Expr::parse(const std::string& text, const std::vector<std::string>& variables) {
    Parser p(text, variables);
    Expr e;
    e.root_ = p.parse_all();
    e.text_ = text;
    e.uses_ = p.uses();
    return e;
}

double Expr::operator()(std::span<const double> values) const { return root_->eval(values); }

}  // namespace twistgeo

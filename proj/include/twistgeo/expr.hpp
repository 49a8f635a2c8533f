#pragma once

// Restricted arithmetic expressions over named real variables:
// numbers, + − * / ^, parentheses, constants pi and e, and the functions
// exp log sqrt abs sin cos tan asin acos atan sinh cosh tanh (one argument),
// min max pow atan2 (two) and smoothstep(e0, e1, x) (three).

#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace twistgeo {

// Syntax error at a 0-based character offset within the source text.
class ExprError : public std::runtime_error {
public:
    ExprError(size_t offset, const std::string& what) : std::runtime_error(what), offset_(offset) {}
    size_t offset() const noexcept { return offset_; }

private:
    size_t offset_;
};

class Expr {
public:
    // Variables are bound by position in `variables`; throws ExprError.
    static Expr parse(const std::string& text, const std::vector<std::string>& variables);

    double operator()(std::span<const double> values) const;
    const std::string& text() const { return text_; }
    // Indices of variables the expression references.
    const std::vector<int>& uses() const { return uses_; }
    bool is_constant() const { return uses_.empty(); }

    struct Node;

private:
    std::shared_ptr<const Node> root_;
    std::string text_;
    std::vector<int> uses_;
};

}  // namespace twistgeo

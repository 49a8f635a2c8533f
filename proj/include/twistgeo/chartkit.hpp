#pragma once

// Coordinate-chart tensor kernel: metric evaluation, finite-difference
// Christoffel/Riemann oracles, gradients and hessian endomorphisms.
//
// Curvature convention: R(X,Y)Z = ∇_X∇_Y Z − ∇_Y∇_X Z − ∇_[X,Y] Z and
// K(u,v) = g(R(u,v)v,u) / (g(u,u)g(v,v) − g(u,v)²), so the unit round sphere
// has K = +1.

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <vector>

#include "twistgeo/errors.hpp"

namespace twistgeo {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CoordPoint = Vec;

inline constexpr double kFirstDerivStep = 1e-5;
inline constexpr double kSecondDerivStep = 1e-4;
inline constexpr double kDegenerateDet = 1e-12;
inline constexpr double kDegenerateGram = 1e-12;

// Per-coordinate central difference step: max(h, h·|x_i|).
inline double fd_step(double base, double xi) { return std::max(base, base * std::abs(xi)); }

class Signature {
public:
    Signature() = default;
    explicit Signature(std::vector<int> signs);

    static Signature riemannian(int n) { return Signature(std::vector<int>(static_cast<size_t>(n), 1)); }
    static Signature lorentzian(int n);  // (−, +, …, +)

    int dim() const { return static_cast<int>(signs_.size()); }
    int index() const;  // number of −1 entries
    int operator[](int i) const { return signs_[static_cast<size_t>(i)]; }
    const std::vector<int>& signs() const { return signs_; }

    Signature concat(const Signature& other) const;
    bool operator==(const Signature&) const = default;

private:
    std::vector<int> signs_;
};

struct TangentVector {
    CoordPoint base;
    Vec comp;
};

struct OneForm {
    CoordPoint base;
    Vec comp;
};

class MetricField {
public:
    using Eval = std::function<Mat(const Vec&)>;
    // d1(x)[k] = ∂_k g(x)
    using D1 = std::function<std::vector<Mat>(const Vec&)>;
    // d2(x)[k*n + l] = ∂_k ∂_l g(x)
    using D2 = std::function<std::vector<Mat>(const Vec&)>;

    MetricField() = default;
    MetricField(int dim, Signature signature, Eval eval, D1 d1 = {}, D2 d2 = {});

    int dim() const { return dim_; }
    const Signature& signature() const { return signature_; }
    bool has_d1() const { return static_cast<bool>(d1_); }
    bool has_d2() const { return static_cast<bool>(d2_); }

    // Throws NumericsError on non-finite or asymmetric (> 1e−12) output.
    Mat operator()(const Vec& x) const;

    // Coordinate partials ∂_k g: analytic when supplied, else central differences.
    std::vector<Mat> partials(const Vec& x, double step = kFirstDerivStep) const;
    // FD partials regardless of analytic callbacks (fixture honesty checks).
    std::vector<Mat> partials_fd(const Vec& x, double step = kFirstDerivStep) const;
    std::optional<std::vector<Mat>> second_partials(const Vec& x) const;

    // Eigenvalue signs of g(x) match the declared signature (as a multiset).
    bool signature_holds(const Vec& x) const;

private:
    int dim_ = 0;
    Signature signature_;
    Eval eval_;
    D1 d1_;
    D2 d2_;
};

class ScalarField {
public:
    using Eval = std::function<double(const Vec&)>;
    using Grad = std::function<Vec(const Vec&)>;
    using Hess = std::function<Mat(const Vec&)>;

    ScalarField() = default;
    explicit ScalarField(Eval eval, Grad grad = {}, Hess hess = {})
        : eval_(std::move(eval)), grad_(std::move(grad)), hess_(std::move(hess)) {}

    static ScalarField constant(double c);

    double operator()(const Vec& x) const;
    Vec partials(const Vec& x, double step = kFirstDerivStep) const;
    Mat second_partials(const Vec& x, double step = kSecondDerivStep) const;
    bool has_grad() const { return static_cast<bool>(grad_); }
    bool has_hess() const { return static_cast<bool>(hess_); }

private:
    Eval eval_;
    Grad grad_;
    Hess hess_;
};

// Γ^k_{ij}, upper index first; symmetric in (i, j).
class Christoffel {
public:
    explicit Christoffel(int n) : n_(n), data_(static_cast<size_t>(n * n * n), 0.0) {}
    int dim() const { return n_; }
    double& operator()(int k, int i, int j) { return data_[idx(k, i, j)]; }
    double operator()(int k, int i, int j) const { return data_[idx(k, i, j)]; }
    // (Γ(a, b))^k = Γ^k_{ij} a^i b^j
    Vec contract(const Vec& a, const Vec& b) const;

private:
    size_t idx(int k, int i, int j) const { return static_cast<size_t>((k * n_ + i) * n_ + j); }
    int n_;
    std::vector<double> data_;
};

// R^l_{ijk} with R(e_i, e_j) e_k = R^l_{ijk} e_l.
class Riemann {
public:
    explicit Riemann(int n) : n_(n), data_(static_cast<size_t>(n * n * n * n), 0.0) {}
    int dim() const { return n_; }
    double& operator()(int l, int i, int j, int k) { return data_[idx(l, i, j, k)]; }
    double operator()(int l, int i, int j, int k) const { return data_[idx(l, i, j, k)]; }

    // R(u, v) w
    Vec apply(const Vec& u, const Vec& v, const Vec& w) const;
    // R_{abcd} = g(e_a, R(e_c, e_d) e_b); R_{abab} = K·(g_aa g_bb − g_ab²).
    double lowered(const Mat& g, int a, int b, int c, int d) const;
    double max_abs() const;

private:
    size_t idx(int l, int i, int j, int k) const { return static_cast<size_t>(((l * n_ + i) * n_ + j) * n_ + k); }
    int n_;
    std::vector<double> data_;
};

Mat checked_inverse(const Mat& g);

double inner_product(const MetricField& g, const TangentVector& u, const TangentVector& v);
// ε_Z ∈ {−1, 0, +1}; zero when |g(Z,Z)| ≤ tol.
int causal_sign(const MetricField& g, const TangentVector& z, double tol = 1e-12);

Christoffel christoffel_numeric(const MetricField& g, const Vec& x, double step = kFirstDerivStep);
// Same formula evaluated from an explicit inverse metric and partials.
Christoffel christoffel_from(const Mat& ginv, const std::vector<Mat>& dg);
Riemann riemann_numeric(const MetricField& g, const Vec& x);
double sectional_curvature_numeric(const MetricField& g, const Vec& x, const Vec& u, const Vec& v);
double sectional_curvature_numeric(const MetricField& g, const TangentVector& u, const TangentVector& v);

TangentVector gradient(const ScalarField& f, const MetricField& g, const Vec& x);
// Covariant hessian H_{ij} = ∂_i∂_j f − Γ^k_{ij} ∂_k f.
Mat hessian_form(const ScalarField& f, const MetricField& g, const Vec& x);
// h_f(v) = ∇_v grad f
TangentVector hessian_endomorphism(const ScalarField& f, const MetricField& g, const Vec& x, const TangentVector& v);

using OneFormField = std::function<Vec(const Vec&)>;
// (dω)_{ij} = ∂_i ω_j − ∂_j ω_i by central differences.
Mat exterior_derivative_numeric(const OneFormField& omega, const Vec& x, double step = kSecondDerivStep);

}  // namespace twistgeo

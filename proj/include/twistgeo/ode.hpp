#pragma once

#include <functional>
#include <vector>

#include "twistgeo/chartkit.hpp"

namespace twistgeo {

struct OdeOptions {
    double rel_tol = 1e-9;
    double abs_tol = 1e-11;
    double initial_step = 1e-3;
    long max_steps = 200000;
};

// Accepted steps of an adaptive solve with cubic Hermite dense output.
class Trajectory {
public:
    void push(double t, Vec y, Vec dy);

    double t_begin() const { return t_.front(); }
    double t_end() const { return t_.back(); }
    size_t size() const { return t_.size(); }
    const std::vector<double>& times() const { return t_; }
    const Vec& state(size_t k) const { return y_[k]; }
    const Vec& back() const { return y_.back(); }

    // Clamped to [t_begin, t_end].
    Vec at(double t) const;

private:
    std::vector<double> t_;
    std::vector<Vec> y_;
    std::vector<Vec> dy_;
};

using OdeRhs = std::function<Vec(double, const Vec&)>;

// Dormand–Prince 5(4) with PI step control. Throws IntegrationError on step
// underflow, step-count exhaustion, or numeric failure inside the rhs.
Trajectory integrate(const OdeRhs& rhs, double t0, double t1, const Vec& y0, const OdeOptions& opts = {});

}  // namespace twistgeo

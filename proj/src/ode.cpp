#include "twistgeo/ode.hpp"

#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace twistgeo {

namespace odeint = boost::numeric::odeint;

void Trajectory::push(double t, Vec y, Vec dy) {
    t_.push_back(t);
    y_.push_back(std::move(y));
    dy_.push_back(std::move(dy));
}

Vec Trajectory::at(double t) const {
    if (t_.size() == 1 || t <= t_.front()) return y_.front();
    if (t >= t_.back()) return y_.back();
    const auto it = std::upper_bound(t_.begin(), t_.end(), t);
    const size_t k = static_cast<size_t>(it - t_.begin()) - 1;
    const double h = t_[k + 1] - t_[k];
    const double s = (t - t_[k]) / h;
    const double s2 = s * s, s3 = s2 * s;
    const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
    const double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
    return h00 * y_[k] + h10 * h * dy_[k] + h01 * y_[k + 1] + h11 * h * dy_[k + 1];
}

namespace {

using State = std::vector<double>;

Vec to_vec(const State& s) { return Eigen::Map<const Vec>(s.data(), static_cast<Eigen::Index>(s.size())); }

Vec eval_rhs(const OdeRhs& rhs, double t, const Vec& y) {
    Vec d;
    try {
        d = rhs(t, y);
    } catch (const GeoError& e) {
        if (e.kind() == ErrorKind::NumericsError || e.kind() == ErrorKind::DegenerateMetric) {
            std::ostringstream os;
            os << "rhs failed at t=" << t << ": " << e.what();
            fail(ErrorKind::IntegrationError, os.str());
        }
        throw;
    }
    if (!d.allFinite()) {
        std::ostringstream os;
        os << "non-finite derivative at t=" << t;
        fail(ErrorKind::IntegrationError, os.str());
    }
    return d;
}

}  // namespace

Trajectory integrate(const OdeRhs& rhs, double t0, double t1, const Vec& y0, const OdeOptions& opts) {
    Trajectory traj;
    traj.push(t0, y0, eval_rhs(rhs, t0, y0));
    if (t1 == t0) return traj;
    if (t1 < t0) fail(ErrorKind::InvalidArgument, "integration interval must be increasing");

    auto system = [&rhs](const State& x, State& dxdt, double t) {
        const Vec d = eval_rhs(rhs, t, to_vec(x));
        dxdt.assign(d.data(), d.data() + d.size());
    };
    auto stepper = odeint::make_controlled(opts.abs_tol, opts.rel_tol, odeint::runge_kutta_dopri5<State>());

    State x(y0.data(), y0.data() + y0.size());
    double t = t0;
    double dt = std::min(opts.initial_step, t1 - t0);
    const double min_dt = 1e-14 * std::max(1.0, std::abs(t1 - t0));
    long steps = 0;
    while (t < t1) {
        if (++steps > opts.max_steps) fail(ErrorKind::IntegrationError, "maximum step count exceeded");
        const bool last = t + dt >= t1;
        if (last) dt = t1 - t;
        const double t_before = t;
        const auto res = stepper.try_step(system, x, t, dt);
        if (res == odeint::success) {
            if (last) t = t1;  // land exactly on the endpoint
            const Vec y = to_vec(x);
            traj.push(t, y, eval_rhs(rhs, t, y));
        } else if (dt < min_dt) {
            std::ostringstream os;
            os << "step size underflow at t=" << t_before;
            fail(ErrorKind::IntegrationError, os.str());
        }
    }
    return traj;
}

}  // namespace twistgeo

// integrate.hpp — adaptive Dormand-Prince 5(4) integrator with the classic
// quartic dense-output interpolant, over complex Eigen vectors.

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <iterator>
#include <string>

#include "crossqed/errors.hpp"

namespace crossqed::ode {

using State = Eigen::VectorXcd;
using Rhs = std::function<void(double t, const State& y, State& dydt)>;
// Called once per requested sample time with the interpolated state.
using Sampler = std::function<void(int index, double t, const State& y)>;

struct IntegratorOptions {
    double rtol = 1e-9;
    double atol = 1e-12;
    double initial_step = 1e-3;
    double max_step = 0.0;  // 0 = unrestricted
    long max_steps = 20'000'000;
};

namespace detail {
// Butcher tableau of DOPRI5 plus the dense-output weights.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
}  // namespace detail

// Integrates dy/dt = rhs(t, y) from t0 to t1 (t1 > t0), emitting dense-output
// samples at sample_times (must be ascending and inside [t0, t1]). Returns the
// state at t1. Throws NumericalError when step control collapses.
template <class TimeRange>
State integrate_dopri5(const Rhs& rhs, double t0, double t1, State y, const TimeRange& sample_times,
                       const Sampler& sampler, const IntegratorOptions& opt = {}) {
    using namespace detail;
    const int n = static_cast<int>(y.size());
    State k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n);
    State rc1(n), rc2(n), rc3(n), rc4(n), rc5(n);

    auto sample_it = std::begin(sample_times);
    const auto sample_end = std::end(sample_times);
    int sample_index = 0;
    // Emit any samples that coincide with t0.
    while (sample_it != sample_end && *sample_it <= t0 + 1e-14 * std::max(1.0, std::abs(t0))) {
        sampler(sample_index++, *sample_it, y);
        ++sample_it;
    }

    double t = t0;
    double h = std::min(opt.initial_step, t1 - t0);
    if (opt.max_step > 0.0) h = std::min(h, opt.max_step);
    rhs(t, y, k1);  // FSAL
    long nsteps = 0;

    while (t < t1) {
        if (++nsteps > opt.max_steps) {
            throw NumericalError("integrate_dopri5: exceeded max step count at t = " + std::to_string(t));
        }
        h = std::min(h, t1 - t);

        ytmp = y + h * (a21 * k1);
        rhs(t + c2 * h, ytmp, k2);
        ytmp = y + h * (a31 * k1 + a32 * k2);
        rhs(t + c3 * h, ytmp, k3);
        ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
        rhs(t + c4 * h, ytmp, k4);
        ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        rhs(t + c5 * h, ytmp, k5);
        ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        rhs(t + h, ytmp, k6);
        ynew = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
        rhs(t + h, ynew, k7);

        // Scaled RMS error estimate.
        double err2 = 0.0;
        for (int i = 0; i < n; ++i) {
            const cplx e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                                e7 * k7[i]);
            const double sc = opt.atol + opt.rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
            err2 += std::norm(e / sc);
        }
        const double err = std::sqrt(err2 / n);

        if (err <= 1.0) {
            // Dense output over [t, t+h] for any pending samples.
            if (sample_it != sample_end && *sample_it <= t + h + 1e-14 * std::max(1.0, std::abs(t + h))) {
                rc1 = y;
                rc2 = ynew - y;
                rc3 = h * k1 - rc2;
                rc4 = rc2 - h * k7 - rc3;
                rc5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
                while (sample_it != sample_end &&
                       *sample_it <= t + h + 1e-14 * std::max(1.0, std::abs(t + h))) {
                    const double theta = std::clamp((*sample_it - t) / h, 0.0, 1.0);
                    ytmp = rc1 + theta * (rc2 + (1.0 - theta) * (rc3 + theta * (rc4 + (1.0 - theta) * rc5)));
                    sampler(sample_index++, *sample_it, ytmp);
                    ++sample_it;
                }
            }
            t += h;
            y.swap(ynew);
            k1.swap(k7);  // FSAL
            double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
            h *= std::clamp(fac, 0.2, 5.0);
        } else {
            h *= std::clamp(0.9 * std::pow(err, -0.2), 0.2, 1.0);
        }
        if (opt.max_step > 0.0) h = std::min(h, opt.max_step);
        if (h < 1e-14 * std::max(1.0, std::abs(t))) {
            throw NumericalError("integrate_dopri5: step size collapsed at t = " + std::to_string(t));
        }
    }

    // Samples exactly at t1 that were missed by rounding.
    while (sample_it != sample_end) {
        sampler(sample_index++, *sample_it, y);
        ++sample_it;
    }
    return y;
}

inline State integrate_dopri5(const Rhs& rhs, double t0, double t1, State y,
                              const IntegratorOptions& opt = {}) {
    static const std::array<double, 0> no_samples{};
    return integrate_dopri5(rhs, t0, t1, std::move(y), no_samples, Sampler{}, opt);
}

// Composite Simpson rule on a uniform grid (falls back to a trapezoid for
// the final interval when the sample count is even).
template <class F>
double simpson(int n_samples, double dt, F&& value) {
    if (n_samples < 2) return 0.0;
    double sum = 0.0;
    int i = 0;
    for (; i + 2 < n_samples; i += 2) {
        sum += dt / 3.0 * (value(i) + 4.0 * value(i + 1) + value(i + 2));
    }
    if (i + 1 < n_samples) sum += 0.5 * dt * (value(i) + value(i + 1));
    return sum;
}

template <class F>
cplx simpson_cplx(int n_samples, double dt, F&& value) {
    if (n_samples < 2) return 0.0;
    cplx sum = 0.0;
    int i = 0;
    for (; i + 2 < n_samples; i += 2) {
        sum += dt / 3.0 * (value(i) + 4.0 * value(i + 1) + value(i + 2));
    }
    if (i + 1 < n_samples) sum += 0.5 * dt * (value(i) + value(i + 1));
    return sum;
}

}  // namespace crossqed::ode

#include "crossqed/params.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "crossqed/errors.hpp"

namespace crossqed {

namespace {
constexpr double kSymTol = 1e-12;
}

bool SystemParams::is_symmetric() const {
    const double ga = std::abs(g_a);
    const double gb = std::abs(g_b);
    const double gscale = std::max({ga, gb, 1.0});
    const double kscale = std::max({kappa_a, kappa_b, 1.0});
    return std::abs(ga - gb) <= kSymTol * gscale && std::abs(kappa_a - kappa_b) <= kSymTol * kscale;
}

double SystemParams::cooperativity() const {
    validate();
    if (!is_symmetric()) {
        throw ConfigError(
            "cooperativity: asymmetric configuration (|g_a| != |g_b| or kappa_a != kappa_b); "
            "use per-branch rates with the time-domain solvers instead");
    }
    const double g = std::abs(g_a);
    if (g == 0.0) return 0.0;
    const double gamma = gamma_total();
    if (gamma <= 0.0) {
        throw ConfigError("cooperativity: Gamma = 0 gives a divide-by-zero; C is undefined");
    }
    return g * g / (2.0 * kappa_a * gamma);
}

SystemParams SystemParams::symmetric(double g, double gamma_total, double kappa) {
    SystemParams p;
    p.g_a = g;
    p.g_b = -g;
    p.kappa_a = p.kappa_b = kappa;
    p.gamma_1 = p.gamma_2 = 0.5 * gamma_total;
    p.validate();
    return p;
}

SystemParams SystemParams::from_cooperativity(double C, double gamma_total, double kappa) {
    if (C < 0.0) throw ConfigError("from_cooperativity: C must be >= 0");
    return symmetric(std::sqrt(2.0 * kappa * gamma_total * C), gamma_total, kappa);
}

void SystemParams::validate() const {
    if (kappa_a < 0.0 || kappa_b < 0.0) throw ConfigError("SystemParams: negative cavity decay rate");
    if (gamma_1 < 0.0 || gamma_2 < 0.0) throw ConfigError("SystemParams: negative spontaneous-emission rate");
}

double cooperativity(const SystemParams& params) { return params.cooperativity(); }

double PulseShape::tau_p() const { return 2.0 * eta * std::sqrt(2.0 * std::numbers::ln2); }

PulseShape PulseShape::from_duration(double t0, double tau_p) {
    if (tau_p <= 0.0) throw ConfigError("PulseShape: tau_p must be positive");
    return PulseShape{t0, tau_p / (2.0 * std::sqrt(2.0 * std::numbers::ln2))};
}

PulseShape PulseShape::standard(double kappa_tau_p, double kappa) {
    if (kappa_tau_p <= 0.0 || kappa <= 0.0) throw ConfigError("PulseShape: kappa*tau_p must be positive");
    PulseShape p = from_duration(0.0, kappa_tau_p / kappa);
    p.t0 = 5.0 * p.eta;
    return p;
}

double gaussian_envelope(const PulseShape& pulse, double t) {
    if (pulse.eta <= 0.0) throw ConfigError("gaussian_envelope: eta must be positive");
    const double x = (t - pulse.t0) / pulse.eta;
    return std::pow(pulse.eta * std::sqrt(std::numbers::pi), -0.5) * std::exp(-0.5 * x * x);
}

Envelope::Envelope(const PulseShape& pulse) : pulse_(pulse) {
    if (pulse.eta <= 0.0) throw ConfigError("Envelope: eta must be positive");
}

Envelope Envelope::gaussian(const PulseShape& pulse, cplx amplitude) {
    Envelope e(pulse);
    e.amp_ = amplitude;
    return e;
}

Envelope Envelope::sampled(std::vector<double> times, std::vector<cplx> amplitudes) {
    if (times.size() != amplitudes.size() || times.size() < 2) {
        throw ConfigError("Envelope::sampled: need matching time/amplitude tables with >= 2 points");
    }
    for (std::size_t i = 1; i < times.size(); ++i) {
        if (times[i] <= times[i - 1]) throw ConfigError("Envelope::sampled: times must increase");
    }
    Envelope e;
    e.sampled_ = true;
    e.times_ = std::move(times);
    e.amps_ = std::move(amplitudes);
    return e;
}

cplx Envelope::operator()(double t) const {
    if (!sampled_) return amp_ * gaussian_envelope(pulse_, t);
    if (t <= times_.front() || t >= times_.back()) return 0.0;
    const auto it = std::upper_bound(times_.begin(), times_.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - times_.begin());
    const double w = (t - times_[i - 1]) / (times_[i] - times_[i - 1]);
    return (1.0 - w) * amps_[i - 1] + w * amps_[i];
}

InitialState InitialState::with_reservoir(cplx lambda_1, cplx lambda_2, cplx mu_a, cplx mu_b, cplx mu_c) {
    const double an = std::norm(lambda_1) + std::norm(lambda_2);
    const double rn = std::norm(mu_a) + std::norm(mu_b) + std::norm(mu_c);
    if (std::abs(an - 1.0) > 1e-10) throw ConfigError("InitialState: |lambda_1|^2 + |lambda_2|^2 must be 1");
    if (std::abs(rn - 1.0) > 1e-10) {
        throw ConfigError("InitialState: |mu_a|^2 + |mu_b|^2 + |mu_c|^2 must be 1 (or use vacuum_reservoir)");
    }
    return InitialState{lambda_1, lambda_2, mu_a, mu_b, mu_c};
}

InitialState InitialState::vacuum_reservoir(cplx lambda_1, cplx lambda_2) {
    const double an = std::norm(lambda_1) + std::norm(lambda_2);
    if (std::abs(an - 1.0) > 1e-10) throw ConfigError("InitialState: |lambda_1|^2 + |lambda_2|^2 must be 1");
    return InitialState{lambda_1, lambda_2, 0.0, 0.0, 0.0};
}

void TimeGrid::validate() const {
    if (!(t_end > t_start)) throw ConfigError("TimeGrid: t_end must exceed t_start");
    if (n_steps < 2) throw ConfigError("TimeGrid: need at least 2 steps");
}

bool TimeGrid::covers(const PulseShape& pulse) const {
    return t_start <= pulse.t0 - 5.0 * pulse.eta + 1e-12 && t_end >= pulse.t0 + 5.0 * pulse.eta - 1e-12;
}

TimeGrid TimeGrid::for_pulse(const PulseShape& pulse, int n_steps) {
    TimeGrid g{pulse.t0 - 5.0 * pulse.eta, pulse.t0 + 5.0 * pulse.eta, n_steps};
    g.validate();
    return g;
}

DarkBright to_dark_bright(cplx amp_alpha, cplx amp_beta) {
    const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
    return DarkBright{(amp_alpha + amp_beta) * inv_sqrt2, (amp_alpha - amp_beta) * inv_sqrt2};
}

std::pair<cplx, cplx> from_dark_bright(cplx amp_dark, cplx amp_bright) {
    const DarkBright db = to_dark_bright(amp_dark, amp_bright);
    return {db.dark, db.bright};
}

std::string CollectiveBasis::label(bool bright, int n_photons) {
    return std::string(bright ? "B" : "D") + std::to_string(n_photons);
}

}  // namespace crossqed

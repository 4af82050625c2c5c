#include "crossqed/single_excitation.hpp"

#include <cmath>

#include "crossqed/errors.hpp"
#include "crossqed/integrate.hpp"

namespace crossqed::single_excitation {

namespace {

// y = [c_e, c_a1, c_b1, c_a2, c_b2, E_a1, E_b1, E_a2, E_b2]
constexpr int kE = 0, kA1 = 1, kB1 = 2, kA2 = 3, kB2 = 4, kEA1 = 5, kEB1 = 6, kEA2 = 7, kEB2 = 8,
              kDim = 9;

struct RhsContext {
    SystemParams p;
    InitialState init;
    const Envelope* pulse_a;
    const Envelope* pulse_b;
};

inline cplx in_amp(const RhsContext& ctx, bool port_a, int level, double t) {
    const cplx lambda = (level == 1) ? ctx.init.lambda_1 : ctx.init.lambda_2;
    if (port_a) return ctx.pulse_a ? lambda * ctx.init.mu_a * (*ctx.pulse_a)(t) : cplx(0.0);
    return ctx.pulse_b ? lambda * ctx.init.mu_b * (*ctx.pulse_b)(t) : cplx(0.0);
}

void rhs(const RhsContext& ctx, double t, const ode::State& y, ode::State& dy) {
    const double ka = ctx.p.kappa_a, kb = ctx.p.kappa_b;
    const double ska = std::sqrt(2.0 * ka), skb = std::sqrt(2.0 * kb);
    const double gamma = ctx.p.gamma_total();
    const cplx i(0.0, 1.0);

    const cplx a_in1 = in_amp(ctx, true, 1, t), b_in1 = in_amp(ctx, false, 1, t);
    const cplx a_in2 = in_amp(ctx, true, 2, t), b_in2 = in_amp(ctx, false, 2, t);

    dy[kE] = -gamma * y[kE] - i * ctx.p.g_a * y[kA1] - i * ctx.p.g_b * y[kB1];
    dy[kA1] = -i * std::conj(ctx.p.g_a) * y[kE] - ka * y[kA1] + ska * a_in1;
    dy[kB1] = -i * std::conj(ctx.p.g_b) * y[kE] - kb * y[kB1] + skb * b_in1;
    dy[kA2] = -ka * y[kA2] + ska * a_in2;
    dy[kB2] = -kb * y[kB2] + skb * b_in2;

    dy[kEA1] = std::norm(ska * y[kA1] - a_in1);
    dy[kEB1] = std::norm(skb * y[kB1] - b_in1);
    dy[kEA2] = std::norm(ska * y[kA2] - a_in2);
    dy[kEB2] = std::norm(skb * y[kB2] - b_in2);
}

}  // namespace

Result integrate_single_excitation(const SystemParams& params, const InitialState& initial,
                                   const std::optional<Envelope>& pulse_a,
                                   const std::optional<Envelope>& pulse_b, const TimeGrid& grid,
                                   const Options& options) {
    params.validate();
    grid.validate();
    if (std::abs(initial.mu_c) > 0.0) {
        throw ConfigError(
            "integrate_single_excitation: mu_c != 0 is a two-excitation input; use the hierarchy "
            "solver or the time-bin oracle");
    }
    if (std::abs(initial.mu_a) > 0.0 && !pulse_a) {
        throw ConfigError("integrate_single_excitation: mu_a != 0 requires pulse_a");
    }
    if (std::abs(initial.mu_b) > 0.0 && !pulse_b) {
        throw ConfigError("integrate_single_excitation: mu_b != 0 requires pulse_b");
    }

    RhsContext ctx{params, initial, pulse_a ? &*pulse_a : nullptr, pulse_b ? &*pulse_b : nullptr};

    Result res;
    const int n = grid.n_samples();
    res.times.reserve(n);
    res.states.reserve(n);

    std::vector<double> samples(n);
    for (int i = 0; i < n; ++i) samples[i] = grid.time(i);

    auto sampler = [&](int, double t, const ode::State& y) {
        res.times.push_back(t);
        res.states.push_back(AmplitudeState{y[kE], y[kA1], y[kB1], y[kA2], y[kB2]});
        const double ska = std::sqrt(2.0 * params.kappa_a), skb = std::sqrt(2.0 * params.kappa_b);
        const cplx a_in1 = in_amp(ctx, true, 1, t), b_in1 = in_amp(ctx, false, 1, t);
        const cplx a_in2 = in_amp(ctx, true, 2, t), b_in2 = in_amp(ctx, false, 2, t);
        res.alpha_in_1.push_back(a_in1);
        res.beta_in_1.push_back(b_in1);
        res.alpha_in_2.push_back(a_in2);
        res.beta_in_2.push_back(b_in2);
        res.alpha_out_1.push_back(ska * y[kA1] - a_in1);
        res.beta_out_1.push_back(skb * y[kB1] - b_in1);
        res.alpha_out_2.push_back(ska * y[kA2] - a_in2);
        res.beta_out_2.push_back(skb * y[kB2] - b_in2);
        res.env_a.push_back(pulse_a ? (*pulse_a)(t) : cplx(0.0));
        res.env_b.push_back(pulse_b ? (*pulse_b)(t) : cplx(0.0));
    };

    ode::IntegratorOptions iopt;
    iopt.rtol = options.rtol;
    iopt.atol = options.atol;
    ode::State yT = ode::integrate_dopri5([&ctx](double t, const ode::State& y, ode::State& dy) { rhs(ctx, t, y, dy); },
                                          grid.t_start, grid.t_end, ode::State::Zero(kDim), samples,
                                          sampler, iopt);

    res.energy_alpha_1 = yT[kEA1].real();
    res.energy_beta_1 = yT[kEB1].real();
    res.energy_alpha_2 = yT[kEA2].real();
    res.energy_beta_2 = yT[kEB2].real();
    res.residual_norm = std::norm(yT[kE]) + std::norm(yT[kA1]) + std::norm(yT[kB1]) +
                        std::norm(yT[kA2]) + std::norm(yT[kB2]);
    return res;
}

double loss_probability(const Result& result) {
    if (result.residual_norm > 1e-4) {
        throw ConvergenceError(
            "loss_probability: grid too short, " + std::to_string(result.residual_norm) +
            " of the norm has not left the system yet");
    }
    return 1.0 - result.total_output_energy();
}

PhaseProfile phase_profile(const Result& result) {
    const int n = static_cast<int>(result.times.size());
    const double dt = n > 1 ? result.times[1] - result.times[0] : 0.0;
    auto overlap = [&](const std::vector<cplx>& env, const std::vector<cplx>& out) {
        return ode::simpson_cplx(n, dt, [&](int i) { return std::conj(env[i]) * out[i]; });
    };
    PhaseProfile ph;
    ph.overlap_alpha_1 = overlap(result.env_a, result.alpha_out_1);
    ph.overlap_beta_1 = overlap(result.env_b, result.beta_out_1);
    ph.overlap_alpha_2 = overlap(result.env_a, result.alpha_out_2);
    ph.overlap_beta_2 = overlap(result.env_b, result.beta_out_2);
    return ph;
}

}  // namespace crossqed::single_excitation

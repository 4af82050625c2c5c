#include "crossqed/semiclassical.hpp"

#include <cmath>
#include <string>

#include "crossqed/errors.hpp"
#include "crossqed/integrate.hpp"

namespace crossqed::semiclassical {

namespace {

// State packing: y = [<a>, <b>, <s->, <sz>, <see>, E_a, E_b]; the last two
// accumulate the output energies so they share the integrator's accuracy.
constexpr int kA = 0, kB = 1, kSm = 2, kSz = 3, kSee = 4, kEa = 5, kEb = 6, kDim = 7;

struct RhsContext {
    SystemParams p;
    const Envelope* drive_a;
    const Envelope* drive_b;
    double drive_scale;
    bool coupled;
    bool damping_as_printed;
};

void rhs(const RhsContext& ctx, double t, const ode::State& y, ode::State& dy) {
    const cplx g_a = ctx.coupled ? ctx.p.g_a : cplx(0.0);
    const cplx g_b = ctx.coupled ? ctx.p.g_b : cplx(0.0);
    const double ka = ctx.p.kappa_a, kb = ctx.p.kappa_b;
    const double gamma = ctx.p.gamma_total();
    const double sz_damp =
        ctx.damping_as_printed ? 2.0 * (ctx.p.gamma_1 + gamma) : 2.0 * (ctx.p.gamma_1 + ctx.p.gamma_2);

    const cplx a = y[kA], b = y[kB], sm = y[kSm];
    const double sz = y[kSz].real(), see = y[kSee].real();
    const cplx a_in = ctx.drive_a ? ctx.drive_scale * (*ctx.drive_a)(t) : cplx(0.0);
    const cplx b_in = ctx.drive_b ? ctx.drive_scale * (*ctx.drive_b)(t) : cplx(0.0);
    const cplx i(0.0, 1.0);

    const cplx gab = g_a * a + g_b * b;  // drives the coherence
    dy[kA] = -i * std::conj(g_a) * sm - ka * a + std::sqrt(2.0 * ka) * a_in;
    dy[kB] = -i * std::conj(g_b) * sm - kb * b + std::sqrt(2.0 * kb) * b_in;
    dy[kSm] = i * gab * sz - gamma * sm;
    dy[kSz] = -2.0 * i * gab * std::conj(sm) + 2.0 * i * std::conj(gab) * sm - sz_damp * see;
    dy[kSee] = -i * gab * std::conj(sm) + i * std::conj(gab) * sm - 2.0 * gamma * see;

    const cplx a_out = std::sqrt(2.0 * ka) * a - a_in;
    const cplx b_out = std::sqrt(2.0 * kb) * b - b_in;
    dy[kEa] = std::norm(a_out);
    dy[kEb] = std::norm(b_out);
}

Branch run_branch(const RhsContext& ctx, const TimeGrid& grid, double weight,
                  const Options& options, std::vector<double>* times_out) {
    Branch br;
    br.weight = weight;
    br.coupled = ctx.coupled;
    br.states.reserve(grid.n_samples());
    br.a_out.reserve(grid.n_samples());
    br.b_out.reserve(grid.n_samples());

    ode::State y0 = ode::State::Zero(kDim);
    y0[kSz] = -1.0;  // atom starts in the ground manifold

    std::vector<double> samples(grid.n_samples());
    for (int i = 0; i < grid.n_samples(); ++i) samples[i] = grid.time(i);

    ode::IntegratorOptions iopt;
    iopt.rtol = options.rtol;
    iopt.atol = options.atol;

    auto sampler = [&](int, double t, const ode::State& y) {
        SemiclassicalState s{y[kA], y[kB], y[kSm], y[kSz].real(), y[kSee].real()};
        if (s.mean_sigma_z < -1.0 - 1e-6 || s.mean_sigma_z > 1.0 + 1e-6 ||
            s.mean_sigma_ee < -1e-6 || s.mean_sigma_ee > 1.0 + 1e-6) {
            throw NumericalError("integrate_semiclassical: atomic means left physical bounds at t = " +
                                 std::to_string(t));
        }
        const cplx a_in = ctx.drive_a ? ctx.drive_scale * (*ctx.drive_a)(t) : cplx(0.0);
        const cplx b_in = ctx.drive_b ? ctx.drive_scale * (*ctx.drive_b)(t) : cplx(0.0);
        br.states.push_back(s);
        br.a_out.push_back(std::sqrt(2.0 * ctx.p.kappa_a) * s.mean_a - a_in);
        br.b_out.push_back(std::sqrt(2.0 * ctx.p.kappa_b) * s.mean_b - b_in);
        if (times_out) times_out->push_back(t);
    };

    ode::State yT = ode::integrate_dopri5([&ctx](double t, const ode::State& y, ode::State& dy) { rhs(ctx, t, y, dy); },
                                          grid.t_start, grid.t_end, std::move(y0), samples, sampler, iopt);
    br.energy_a_out = yT[kEa].real();
    br.energy_b_out = yT[kEb].real();
    return br;
}

}  // namespace

AtomInit AtomInit::superposition(cplx lambda_1, cplx lambda_2) {
    const double n = std::norm(lambda_1) + std::norm(lambda_2);
    if (std::abs(n - 1.0) > 1e-10) throw ConfigError("AtomInit: |lambda_1|^2 + |lambda_2|^2 must be 1");
    return AtomInit{std::norm(lambda_1)};
}

double Result::energy_a_out() const {
    double e = 0.0;
    for (const Branch& br : branches) e += br.weight * br.energy_a_out;
    return e;
}

double Result::energy_b_out() const {
    double e = 0.0;
    for (const Branch& br : branches) e += br.weight * br.energy_b_out;
    return e;
}

double Result::energy_in() const {
    const double dt = times.size() > 1 ? times[1] - times[0] : 0.0;
    return ode::simpson(static_cast<int>(times.size()), dt,
                        [&](int i) { return std::norm(a_in[i]) + std::norm(b_in[i]); });
}

Result integrate_semiclassical(const SystemParams& params, const std::optional<Envelope>& drive_a,
                               const std::optional<Envelope>& drive_b, const AtomInit& atom_init,
                               const TimeGrid& grid, const Options& options) {
    params.validate();
    grid.validate();
    if (atom_init.p_g1 < -1e-12 || atom_init.p_g1 > 1.0 + 1e-12) {
        throw ConfigError("integrate_semiclassical: g1 population must lie in [0, 1]");
    }

    Result res;
    res.times.reserve(grid.n_samples());
    for (int i = 0; i < grid.n_samples(); ++i) {
        const double t = grid.time(i);
        res.a_in.push_back(drive_a ? options.drive_scale * (*drive_a)(t) : cplx(0.0));
        res.b_in.push_back(drive_b ? options.drive_scale * (*drive_b)(t) : cplx(0.0));
    }

    RhsContext ctx{params, drive_a ? &*drive_a : nullptr, drive_b ? &*drive_b : nullptr,
                   options.drive_scale, true, options.sigma_z_damping_as_printed};

    const double p1 = atom_init.p_g1;
    bool first = true;
    if (p1 > 1e-15) {
        ctx.coupled = true;
        res.branches.push_back(run_branch(ctx, grid, p1, options, first ? &res.times : nullptr));
        first = false;
    }
    if (1.0 - p1 > 1e-15) {
        ctx.coupled = false;
        res.branches.push_back(run_branch(ctx, grid, 1.0 - p1, options, first ? &res.times : nullptr));
        first = false;
    }
    if (first) throw ConfigError("integrate_semiclassical: empty atomic population");
    return res;
}

LinearResponse linear_swap_response(const SystemParams& params, const PulseShape& pulse,
                                    const TimeGrid& grid, double epsilon) {
    if (epsilon <= 0.0 || epsilon > 0.1) {
        throw ConfigError("linear_swap_response: epsilon must lie in (0, 0.1]");
    }
    Options opt;
    opt.drive_scale = epsilon;
    const Result r =
        integrate_semiclassical(params, std::nullopt, Envelope(pulse), AtomInit::g1(), grid, opt);
    const double e2 = epsilon * epsilon;
    return LinearResponse{r.energy_a_out() / e2, r.energy_b_out() / e2};
}

}  // namespace crossqed::semiclassical

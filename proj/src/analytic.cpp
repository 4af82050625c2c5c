#include "crossqed/analytic.hpp"

#include <cmath>

#include "crossqed/errors.hpp"

namespace crossqed::analytic {

ScatteringCoefficients scattering_coefficients(const SystemParams& params, double omega,
                                               AtomLevel atom) {
    params.validate();
    if (!params.is_symmetric()) {
        throw ConfigError(
            "scattering_coefficients: closed forms require |g_a| = |g_b| and kappa_a = kappa_b; "
            "use the semiclassical or single-excitation solvers for asymmetric rates");
    }
    const double kappa = params.kappa_a;
    if (kappa <= 0.0) throw ConfigError("scattering_coefficients: kappa must be positive");
    const double gamma = params.gamma_total();
    const double g_eff = (atom == AtomLevel::g1) ? std::abs(params.g_a) : 0.0;

    const cplx i(0.0, 1.0);
    const cplx x_plus = (kappa + i * omega) / (kappa - i * omega);
    const cplx num = (kappa + i * omega) * (gamma - i * omega) - 2.0 * g_eff * g_eff;
    const cplx den = (kappa - i * omega) * (gamma - i * omega) + 2.0 * g_eff * g_eff;
    const cplx x_minus = num / den;

    ScatteringCoefficients sc;
    sc.x_plus = x_plus;
    sc.x_minus = x_minus;
    sc.r = 0.5 * (x_plus + x_minus);
    sc.t = 0.5 * (x_plus - x_minus);
    sc.omega = omega;
    sc.atom = atom;
    return sc;
}

double swap_probability(double C) {
    if (C < 0.0) throw ConfigError("swap_probability: C must be >= 0");
    const double t = 4.0 * C / (1.0 + 4.0 * C);
    return t * t;
}

double biphoton_survival_probability(double C) {
    if (C < 0.0) throw ConfigError("biphoton_survival_probability: C must be >= 0");
    const double num = 1.0 + 16.0 * C * C;
    const double den = 1.0 + 4.0 * C;
    return (num * num) / (den * den * den * den);
}

FailureProbability dk_failure_probability(double C) {
    if (C < 0.0) throw ConfigError("dk_failure_probability: C must be >= 0");
    const double den = 1.0 + 2.0 * C;
    return {8.0 * C / (den * den), C > 0.5};
}

FailureProbability cross_failure_probability(double C) {
    if (C < 0.0) throw ConfigError("cross_failure_probability: C must be >= 0");
    const double den = 1.0 + 4.0 * C;
    return {16.0 * C / (den * den), C > 0.25};
}

double post_selected_fidelity(double C) {
    if (C < 0.0) throw ConfigError("post_selected_fidelity: C must be >= 0");
    const double s = 16.0 * C * C;
    return s / (1.0 + s);
}

}  // namespace crossqed::analytic

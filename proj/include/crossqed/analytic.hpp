// analytic.hpp — closed-form frequency-domain response of the crossed
// cavities in the weak-excitation (Holstein-Primakoff) limit, plus the
// closed-form gate probabilities that follow from it.
//
// Valid only for the symmetric convention g_a = -g_b = g (real), kappa_a =
// kappa_b = kappa. The collective responses are
//   x_minus = [(k + iw)(G - iw) - 2 g~^2] / [(k - iw)(G - iw) + 2 g~^2]
//   x_plus  = (k + iw) / (k - iw)
// with g~ = g when the atom occupies |g1> and g~ = 0 for |g2>, and the
// port coefficients are r = (x_plus + x_minus)/2, t = (x_plus - x_minus)/2.

#pragma once

#include "crossqed/params.hpp"

namespace crossqed::analytic {

struct ScatteringCoefficients {
    cplx r;        // reflection back out of the driven port
    cplx t;        // transmission to the opposite port
    cplx x_minus;  // bright (antisymmetric) collective response
    cplx x_plus;   // dark (symmetric) collective response, a pure phase
    double omega;  // detuning from cavity resonance
    AtomLevel atom;
};

// omega is measured from the cavity resonance (rotating frame).
ScatteringCoefficients scattering_coefficients(const SystemParams& params, double omega,
                                               AtomLevel atom);

// Resonant photon-swap probability [4C/(1+4C)]^2.
double swap_probability(double C);

// Probability that a photon pair entering on opposite ports leaves on
// opposite ports, [1+(4C)^2]^2/(1+4C)^4, in the linearized treatment.
double biphoton_survival_probability(double C);

// Failure probabilities of the pi-phase operation. `pi_phase_regime` is
// false below the threshold cooperativity (1/2 single cavity, 1/4 crossed);
// the formula value is still returned there.
struct FailureProbability {
    double value;
    bool pi_phase_regime;
};

// Single-cavity (Duan-Kimble) benchmark: 8C/(1+2C)^2, threshold C > 1/2.
FailureProbability dk_failure_probability(double C);

// Crossed-cavity bright-mode failure: 16C/(1+4C)^2, threshold C > 1/4.
FailureProbability cross_failure_probability(double C);

// Fidelity conditioned on detecting an output photon: (4C)^2/(1+(4C)^2).
double post_selected_fidelity(double C);

}  // namespace crossqed::analytic

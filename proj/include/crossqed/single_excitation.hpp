// single_excitation.hpp — exact dynamics in the one-excitation sector.
//
// The joint state is parameterized by the excited-atom amplitude c_e, the
// intracavity amplitudes c_a^l, c_b^l conditioned on the atomic ground level
// |g_l>, and the outgoing field. Atomic spontaneous emission enters as the
// non-Hermitian decay -Gamma c_e; the lost norm is exactly the photon-loss
// probability. Conditional output pulses follow from
//   alpha_out^l = sqrt(2 kappa_a) c_a^l - alpha_in^l  (and b alike),
// with alpha_in^l(t) = lambda_l mu_a alpha_in(t).

#pragma once

#include <optional>
#include <vector>

#include "crossqed/params.hpp"

namespace crossqed::single_excitation {

struct AmplitudeState {
    cplx c_e;
    cplx c_a1, c_b1;  // cavity amplitudes with the atom in g1
    cplx c_a2, c_b2;  // cavity amplitudes with the atom in g2
};

struct Options {
    double rtol = 1e-9;
    double atol = 1e-12;
};

struct Result {
    std::vector<double> times;
    std::vector<AmplitudeState> states;

    // Conditional output envelopes on the grid, l = 1, 2.
    std::vector<cplx> alpha_out_1, beta_out_1, alpha_out_2, beta_out_2;
    // Input envelopes (per port, including lambda_l mu_p prefactors).
    std::vector<cplx> alpha_in_1, beta_in_1, alpha_in_2, beta_in_2;
    // Bare normalized envelope samples of each port's pulse (no prefactors),
    // used as the phase reference.
    std::vector<cplx> env_a, env_b;

    // Output energies, accumulated inside the integrator.
    double energy_alpha_1{0.0}, energy_beta_1{0.0}, energy_alpha_2{0.0}, energy_beta_2{0.0};

    // Norm still inside the system at t_end (output tail not yet emitted).
    double residual_norm{0.0};

    double total_output_energy() const {
        return energy_alpha_1 + energy_beta_1 + energy_alpha_2 + energy_beta_2;
    }
};

// initial must have mu_c = 0 (single-excitation sector). pulse_a / pulse_b
// give the envelopes entering each port; a port with nonzero mu requires its
// pulse to be present.
Result integrate_single_excitation(const SystemParams& params, const InitialState& initial,
                                   const std::optional<Envelope>& pulse_a,
                                   const std::optional<Envelope>& pulse_b, const TimeGrid& grid,
                                   const Options& options = {});

// 1 - (total output energy); throws ConvergenceError when the grid truncates
// more than 1e-4 of the output.
double loss_probability(const Result& result);

// Complex overlaps of the conditional outputs against each port's bare input
// envelope, integral conj(env) * out dt. For the bright two-port input with
// the atom in g1 the dark/bright combinations of these approach
// (r -+ t) at high cooperativity.
struct PhaseProfile {
    cplx overlap_alpha_1, overlap_beta_1;
    cplx overlap_alpha_2, overlap_beta_2;
};

PhaseProfile phase_profile(const Result& result);

}  // namespace crossqed::single_excitation

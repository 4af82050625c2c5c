// params.hpp — rates, pulse shapes, initial states, time grids and the
// dark/bright collective-mode transform shared by all solvers.
//
// Units: kappa_a = kappa_b = kappa = 1 fixes the time unit; every rate is
// quoted in units of kappa. The default coupling convention is g_b = -g_a,
// which makes the symmetric port combination (a + b)/sqrt(2) the dark mode
// and the antisymmetric one the bright mode. Flipping the sign of g_b swaps
// the two labels.

#pragma once

#include <complex>
#include <optional>
#include <vector>

namespace crossqed {

using cplx = std::complex<double>;

enum class AtomLevel { g1, g2 };

// Physical rates of the crossed-cavity / three-level-atom system.
// gamma_1 and gamma_2 are the amplitude decay rates of the excited state
// into |g1> and |g2>; cavity kappas are field-amplitude decay rates.
struct SystemParams {
    cplx g_a{0.0};
    cplx g_b{0.0};
    double kappa_a{1.0};
    double kappa_b{1.0};
    double gamma_1{0.0};
    double gamma_2{0.0};

    double gamma_total() const { return gamma_1 + gamma_2; }

    // |g_a| == |g_b| and kappa_a == kappa_b (up to rounding).
    bool is_symmetric() const;

    // C = g^2 / (2 kappa Gamma), defined only for the symmetric
    // configuration; throws otherwise (use per-branch rates instead).
    double cooperativity() const;

    // g_a = g, g_b = -g, kappa_a = kappa_b = kappa, gamma_1 = gamma_2.
    static SystemParams symmetric(double g, double gamma_total, double kappa = 1.0);

    // Symmetric configuration with g chosen so that the cooperativity is C.
    static SystemParams from_cooperativity(double C, double gamma_total, double kappa = 1.0);

    // Throws ConfigError on negative rates.
    void validate() const;
};

double cooperativity(const SystemParams& params);

// Square-normalized Gaussian temporal envelope
//   alpha_in(t) = (eta sqrt(pi))^(-1/2) exp(-(t - t0)^2 / (2 eta^2)),
// t0 the arrival time of the maximum, tau_p = 2 eta sqrt(2 ln 2).
struct PulseShape {
    double t0{0.0};
    double eta{1.0};

    double tau_p() const;

    static PulseShape from_duration(double t0, double tau_p);

    // eta from kappa*tau_p with the peak placed at t0 = 5 eta.
    static PulseShape standard(double kappa_tau_p, double kappa = 1.0);
};

double gaussian_envelope(const PulseShape& pulse, double t);

// Input envelope fed to the solvers. Gaussian by default, optionally with a
// complex prefactor (drive phases are physical: two coherent drives with a
// quadrature relative phase split their energy evenly between the dark and
// bright modes). A user-supplied sampled envelope (linearly interpolated,
// zero outside its support) is accepted as an extension hook.
class Envelope {
  public:
    Envelope(const PulseShape& pulse);  // implicit on purpose
    static Envelope gaussian(const PulseShape& pulse, cplx amplitude = 1.0);
    static Envelope sampled(std::vector<double> times, std::vector<cplx> amplitudes);

    cplx operator()(double t) const;

    bool is_gaussian() const { return !sampled_; }
    const PulseShape& pulse() const { return pulse_; }

  private:
    Envelope() = default;
    PulseShape pulse_{};
    cplx amp_{1.0};
    bool sampled_{false};
    std::vector<double> times_;
    std::vector<cplx> amps_;
};

// Atomic amplitudes (lambda_1, lambda_2) and reservoir amplitudes
// (mu_a, mu_b, mu_c) for |1>_alpha|0>_beta, |0>_alpha|1>_beta, |1>_alpha|1>_beta.
struct InitialState {
    cplx lambda_1{1.0};
    cplx lambda_2{0.0};
    cplx mu_a{0.0};
    cplx mu_b{0.0};
    cplx mu_c{0.0};

    // |lambda|^2 summing to 1 and |mu|^2 summing to 1 are enforced here.
    static InitialState with_reservoir(cplx lambda_1, cplx lambda_2, cplx mu_a, cplx mu_b, cplx mu_c);

    // All-vacuum reservoir (mu_a = mu_b = mu_c = 0).
    static InitialState vacuum_reservoir(cplx lambda_1, cplx lambda_2);
};

// Uniform output sampling; integrators may adapt internally.
struct TimeGrid {
    double t_start{0.0};
    double t_end{1.0};
    int n_steps{4000};

    double dt() const { return (t_end - t_start) / n_steps; }
    double time(int i) const { return t_start + i * dt(); }
    int n_samples() const { return n_steps + 1; }

    void validate() const;

    // true if [t0 - 5 eta, t0 + 5 eta] of the pulse lies inside the grid
    bool covers(const PulseShape& pulse) const;

    // [t0 - 5 eta, t0 + 5 eta] with n uniform steps; with the standard
    // pulse placement (t0 = 5 eta) this is [0, 10 eta].
    static TimeGrid for_pulse(const PulseShape& pulse, int n_steps = 4000);
};

// Dark/bright collective amplitudes: dark = (alpha + beta)/sqrt(2),
// bright = (alpha - beta)/sqrt(2). The transform is its own inverse.
struct DarkBright {
    cplx dark;
    cplx bright;
};

DarkBright to_dark_bright(cplx amp_alpha, cplx amp_beta);
std::pair<cplx, cplx> from_dark_bright(cplx amp_dark, cplx amp_bright);

// Port <-> collective-mode amplitude maps plus N-photon state labels.
struct CollectiveBasis {
    static DarkBright to_dark_bright(cplx a, cplx b) { return crossqed::to_dark_bright(a, b); }
    static std::pair<cplx, cplx> to_ports(cplx dark, cplx bright) {
        return from_dark_bright(dark, bright);
    }
    // "D1", "B2", ... labels for the N-photon dark/bright states.
    static std::string label(bool bright, int n_photons);
};

}  // namespace crossqed

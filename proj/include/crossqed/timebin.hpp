// timebin.hpp — brute-force collision-model reference solver.
//
// Each waveguide is discretized into bins of width dt. Per step, a fresh bin
// picks up the arriving slice of its input photon (an exact beam-splitter
// telescoping of the wave packet, so the source introduces no discretization
// error), mixes with its cavity through the beam-splitter unitary of angle
// sqrt(2 kappa dt), and departs as an output bin. The joint pure state is
// tracked in the sector of at most two excitations; atomic spontaneous
// emission is split off jump-by-jump into a small density-matrix loss sector
// so that norm + loss bookkeeping stays exact. Output-bin amplitudes are
// finalized into outcome classes as they are produced, which keeps memory
// at O(bins) even for two-photon inputs.

#pragma once

#include <optional>
#include <vector>

#include "crossqed/params.hpp"

namespace crossqed::timebin {

struct Options {
    // Midpoint envelope sampling plus Strang-split system evolution
    // (second-order stepping); false = plain first-order stepping.
    bool midpoint = true;
};

// Outcome probabilities. For one-photon inputs only exit_a/exit_b/lost are
// populated; for biphoton inputs the five two-photon classes are.
struct OutputDistribution {
    int n_photons{0};

    double exit_a{0.0};
    double exit_b{0.0};
    double lost{0.0};

    double both_a{0.0};
    double one_each{0.0};
    double both_b{0.0};
    double one_lost{0.0};   // exactly one photon lost, the other exited
    double both_lost{0.0};

    double one_lost_exit_a{0.0};  // port split of one_lost
    double one_lost_exit_b{0.0};

    // Probability still inside the system / loss sector at the horizon.
    double residual{0.0};

    double sum() const;
};

struct Result {
    OutputDistribution dist;
    double dt{0.0};
    int bins{0};
    std::vector<double> times;    // bin midpoints
    std::vector<double> flux_a;   // expected photons per unit time, per bin
    std::vector<double> flux_b;
    // Coherent output envelopes (continuum normalization, one-photon runs
    // only; the no-loss branch amplitude).
    std::vector<cplx> amp_a;
    std::vector<cplx> amp_b;
    // Worst per-step deviation of norm + loss from 1.
    double norm_drift{0.0};
};

// Propagates over [0, horizon] with `bins` collision steps (dt = horizon/bins).
// Throws ConvergenceError when dt is too coarse for the given rates.
Result simulate_timebin(const SystemParams& params, const std::optional<Envelope>& in_a,
                        const std::optional<Envelope>& in_b, AtomLevel atom_init, int bins,
                        double horizon, const Options& options = {});

// Observed convergence order and Richardson extrapolation from runs at
// successively doubled resolutions (coarse to fine, >= 3 entries).
struct ConvergenceReport {
    double observed_order{0.0};
    double extrapolated{0.0};
    bool monotone{true};
    std::vector<double> values;
};

ConvergenceReport convergence_report(const std::vector<double>& values_coarse_to_fine);

}  // namespace crossqed::timebin

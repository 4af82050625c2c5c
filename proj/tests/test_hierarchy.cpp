#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "crossqed/analytic.hpp"
#include "crossqed/errors.hpp"
#include "crossqed/hierarchy.hpp"
#include "crossqed/single_excitation.hpp"

using namespace crossqed;
using namespace crossqed::hierarchy;

namespace {
const PulseShape kPulse = PulseShape::standard(40.0);
const TimeGrid kGrid = TimeGrid::for_pulse(kPulse);

Eigen::Matrix3cd atom_rho(AtomLevel level) {
    Eigen::Matrix3cd m = Eigen::Matrix3cd::Zero();
    m(level == AtomLevel::g1 ? 0 : 1, level == AtomLevel::g1 ? 0 : 1) = 1.0;
    return m;
}
}  // namespace

TEST_CASE("dissipator annihilates the trace of random operators") {
    const SystemParams p = SystemParams::from_cooperativity(2.0, 0.3);
    const LindbladChannels ch = LindbladChannels::build(p, 2);
    std::mt19937 rng(7);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int trial = 0; trial < 5; ++trial) {
        Matrix rho(ch.dim, ch.dim);
        for (int i = 0; i < ch.dim; ++i)
            for (int j = 0; j < ch.dim; ++j) rho(i, j) = cplx(g(rng), g(rng));
        for (const SpMat* L : {&ch.L_a, &ch.L_b, &ch.L_1, &ch.L_2}) {
            CHECK(std::abs(LindbladChannels::dissipator(*L, rho).trace()) < 1e-12 * ch.dim);
        }
    }
}

TEST_CASE("initial conditions populate only the diagonal index pairs") {
    const SystemParams p = SystemParams::from_cooperativity(1.0, 0.2);
    const LindbladChannels ch = LindbladChannels::build(p, 2);
    const HierarchyTensor t = HierarchyTensor::initial(ch.ground_state(AtomLevel::g1), 1, 1);
    for (int m = 0; m <= 1; ++m)
        for (int n = 0; n <= 1; ++n)
            for (int pp = 0; pp <= 1; ++pp)
                for (int q = 0; q <= 1; ++q) {
                    const double norm = t.at(m, n, pp, q).cwiseAbs().maxCoeff();
                    if (m == n && pp == q) {
                        CHECK(norm == doctest::Approx(1.0));
                    } else {
                        CHECK(norm == 0.0);
                    }
                }
    CHECK(t.trace_top() == doctest::Approx(1.0));
    CHECK(t.hermiticity_deviation() < 1e-15);
}

TEST_CASE("vacuum input with a ground atom is stationary") {
    const SystemParams p = SystemParams::from_cooperativity(10.0, 0.2);
    TimeGrid grid{0.0, 20.0, 400};
    const Result r = integrate_hierarchy(p, std::nullopt, std::nullopt, atom_rho(AtomLevel::g2), grid);
    CHECK(r.photons_out_a() == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(r.photons_out_b() == doctest::Approx(0.0).epsilon(1e-10));
    for (const double s : r.sigma_ee) CHECK(std::abs(s) < 1e-12);
    // undriven Lindblad dynamics, trace stays one
    for (const double d : r.trace_dev) CHECK(d < 1e-10);
}

TEST_CASE("an initially excited atom emits its quantum into the ports or the side channels") {
    const SystemParams p = SystemParams::from_cooperativity(2.0, 0.2);
    Eigen::Matrix3cd excited = Eigen::Matrix3cd::Zero();
    excited(2, 2) = 1.0;
    TimeGrid grid{0.0, 60.0, 1200};
    const Result r = integrate_hierarchy(p, std::nullopt, std::nullopt, excited, grid);
    const double total = r.photons_out_a() + r.photons_out_b() + r.emission_loss(p);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(r.sigma_ee.front() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(r.sigma_ee.back() < 1e-6);
}

TEST_CASE("single photon on port a with a g2 atom exits port a") {
    const SystemParams p = SystemParams::from_cooperativity(10.0, 0.2);
    const Result r =
        integrate_hierarchy(p, Envelope(kPulse), std::nullopt, atom_rho(AtomLevel::g2), kGrid);
    CHECK(r.photons_out_a() == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(std::abs(r.photons_out_b()) < 1e-3);
}

TEST_CASE("single-photon fluxes agree with the single-excitation solver") {
    const SystemParams p = SystemParams::from_cooperativity(10.0, 0.2);
    const Result r =
        integrate_hierarchy(p, std::nullopt, Envelope(kPulse), atom_rho(AtomLevel::g1), kGrid);

    const InitialState init = InitialState::with_reservoir(1.0, 0.0, 0.0, 1.0, 0.0);
    const auto se = single_excitation::integrate_single_excitation(p, init, std::nullopt,
                                                                   Envelope(kPulse), kGrid);
    CHECK(std::abs(r.photons_out_a() - se.energy_alpha_1) < 1e-3);
    CHECK(std::abs(r.photons_out_b() - se.energy_beta_1) < 1e-3);
    CHECK(std::abs(r.photons_out_a() - analytic::swap_probability(10.0)) < 1e-2);

    // pointwise flux comparison against |alpha_out|^2
    double max_dev = 0.0;
    for (std::size_t i = 0; i < r.times.size(); ++i) {
        max_dev = std::max(max_dev, std::abs(r.flux_a[i] - std::norm(se.alpha_out_1[i])));
    }
    CHECK(max_dev < 1e-4);
}

TEST_CASE("excitation bookkeeping: outputs plus spontaneous emission count two photons") {
    const SystemParams p = SystemParams::from_cooperativity(5.0, 0.2);
    const Result r =
        integrate_hierarchy(p, Envelope(kPulse), Envelope(kPulse), atom_rho(AtomLevel::g1), kGrid);
    const double total = r.photons_out_a() + r.photons_out_b() + r.emission_loss(p);
    CHECK(total == doctest::Approx(2.0).epsilon(1e-3));

    // flux accessor returns the sampled curves
    CHECK(output_flux(r, 'a') == r.flux_a);
    CHECK(output_flux(r, 'b') == r.flux_b);
    CHECK_THROWS_AS(output_flux(r, 'x'), ConfigError);

    // uneven branching ratio: the books still balance
    SystemParams uneven = p;
    uneven.gamma_1 = 0.15;
    uneven.gamma_2 = 0.05;
    const Result ru = integrate_hierarchy(uneven, Envelope(kPulse), Envelope(kPulse),
                                          atom_rho(AtomLevel::g1), kGrid);
    CHECK(ru.photons_out_a() + ru.photons_out_b() + ru.emission_loss(uneven) ==
          doctest::Approx(2.0).epsilon(1e-3));
}

TEST_CASE("lossless biphoton run conserves the photon number exactly") {
    const SystemParams p = SystemParams::symmetric(std::sqrt(2.0 * 0.2 * 10.0), 0.0);
    const Result r =
        integrate_hierarchy(p, Envelope(kPulse), Envelope(kPulse), atom_rho(AtomLevel::g1), kGrid);
    CHECK(r.photons_out_a() + r.photons_out_b() == doctest::Approx(2.0).epsilon(1e-3));
}

TEST_CASE("trace and hermiticity invariants hold along the biphoton trajectory") {
    const SystemParams p = SystemParams::from_cooperativity(5.0, 0.2);
    const Result r =
        integrate_hierarchy(p, Envelope(kPulse), Envelope(kPulse), atom_rho(AtomLevel::g1), kGrid);
    for (const double d : r.trace_dev) CHECK(d < 1e-8);
    for (const double d : r.herm_dev) CHECK(d < 1e-10);
    CHECK(r.final_state.hermiticity_deviation() < 1e-10);
}

TEST_CASE("fluxes are non-negative up to the numerical floor") {
    const SystemParams p = SystemParams::from_cooperativity(1.0, 0.2);
    const Result r =
        integrate_hierarchy(p, Envelope(kPulse), Envelope(kPulse), atom_rho(AtomLevel::g1), kGrid);
    for (std::size_t i = 0; i < r.flux_a.size(); ++i) {
        CHECK(r.flux_a[i] > -1e-10);
        CHECK(r.flux_b[i] > -1e-10);
    }
}

TEST_CASE("Fock cutoff 2 is exact: n_max = 3 gives identical observables") {
    const SystemParams p = SystemParams::from_cooperativity(2.0, 0.2);
    // the cutoff itself is exact; tight tolerances keep the two adaptive
    // integrations from drifting apart numerically
    Options o2;
    o2.n_max = 2;
    o2.rtol = 1e-11;
    o2.atol = 1e-13;
    Options o3;
    o3.n_max = 3;
    o3.rtol = 1e-11;
    o3.atol = 1e-13;
    const Result r2 =
        integrate_hierarchy(p, Envelope(kPulse), Envelope(kPulse), atom_rho(AtomLevel::g1), kGrid, o2);
    const Result r3 =
        integrate_hierarchy(p, Envelope(kPulse), Envelope(kPulse), atom_rho(AtomLevel::g1), kGrid, o3);
    double max_dev = 0.0;
    for (std::size_t i = 0; i < r2.times.size(); ++i) {
        max_dev = std::max(max_dev, std::abs(r2.flux_a[i] - r3.flux_a[i]));
        max_dev = std::max(max_dev, std::abs(r2.flux_b[i] - r3.flux_b[i]));
    }
    CHECK(max_dev < 1e-10);
}

TEST_CASE("biphoton coincidence for a g2 atom is unity") {
    const SystemParams p = SystemParams::from_cooperativity(5.0, 0.2);
    Options opt;
    opt.coincidence_nodes = 256;
    const double c =
        biphoton_coincidence(p, Envelope(kPulse), Envelope(kPulse), atom_rho(AtomLevel::g2), kGrid, opt);
    CHECK(c == doctest::Approx(1.0).epsilon(2e-3));
}

TEST_CASE("atom density matrices are validated") {
    const SystemParams p = SystemParams::from_cooperativity(1.0, 0.2);
    Eigen::Matrix3cd bad = Eigen::Matrix3cd::Zero();
    bad(0, 0) = 2.0;
    CHECK_THROWS_AS(integrate_hierarchy(p, std::nullopt, std::nullopt, bad, kGrid), ConfigError);
    Eigen::Matrix3cd nonherm = Eigen::Matrix3cd::Zero();
    nonherm(0, 0) = 1.0;
    nonherm(0, 1) = 0.5;
    CHECK_THROWS_AS(integrate_hierarchy(p, std::nullopt, std::nullopt, nonherm, kGrid), ConfigError);
}

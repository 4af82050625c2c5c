#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "crossqed/analytic.hpp"
#include "crossqed/errors.hpp"
#include "crossqed/semiclassical.hpp"

using namespace crossqed;
using namespace crossqed::semiclassical;

namespace {
const PulseShape kPulse = PulseShape::standard(40.0);
const TimeGrid kGrid = TimeGrid::for_pulse(kPulse);
}  // namespace

TEST_CASE("decoupled atom returns the whole pulse from the driven port") {
    const SystemParams p = SystemParams::from_cooperativity(10.0, 0.2);
    const Result r = integrate_semiclassical(p, Envelope(kPulse), std::nullopt, AtomInit::g2(), kGrid);
    CHECK(r.energy_a_out() == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(r.energy_b_out() == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("weak-drive swap response follows the closed form across the sweep") {
    for (const double C : {0.05, 0.3, 1.0, 3.0, 10.0, 60.0}) {
        const SystemParams p = SystemParams::from_cooperativity(C, 0.2);
        const LinearResponse lr = linear_swap_response(p, kPulse, kGrid);
        CHECK(std::abs(lr.transmission - analytic::swap_probability(C)) < 1e-2);
    }
}

TEST_CASE("unit-energy coherent drive saturates the atom at intermediate C") {
    // the mean-field trajectory of a full single-photon-energy pulse sits a
    // few percent below the linear response where the atom is excited most
    const SystemParams p = SystemParams::from_cooperativity(0.3, 0.2);
    const Result r = integrate_semiclassical(p, std::nullopt, Envelope(kPulse), AtomInit::g1(), kGrid);
    const double dev = analytic::swap_probability(0.3) - r.energy_a_out();
    CHECK(dev > 1e-2);   // saturation is visible at unit drive
    CHECK(dev < 8e-2);   // but stays a perturbation
    double see_max = 0.0;
    for (const auto& s : r.branches.front().states) see_max = std::max(see_max, s.mean_sigma_ee);
    CHECK(see_max > 0.01);
}

TEST_CASE("biphoton product lands near the linearized value at C = 10") {
    const SystemParams p = SystemParams::from_cooperativity(10.0, 0.2);
    // quadrature relative phase: independent photons have no phase relation,
    // and the i factor splits the drive evenly between dark and bright modes
    const Result r = integrate_semiclassical(p, Envelope(kPulse),
                                             Envelope::gaussian(kPulse, cplx(0.0, 1.0)),
                                             AtomInit::g1(), kGrid);
    const double product = r.energy_a_out() * r.energy_b_out();
    CHECK(product > 0.89);
    CHECK(product < 0.92);
    CHECK(std::abs(product - analytic::biphoton_survival_probability(10.0)) < 1.5e-2);
}

TEST_CASE("weak drives recover the linear response independently of the scale") {
    const SystemParams p = SystemParams::from_cooperativity(2.0, 0.2);
    Options opt;
    opt.drive_scale = 1e-3;
    const Result r1 =
        integrate_semiclassical(p, std::nullopt, Envelope(kPulse), AtomInit::g1(), kGrid, opt);
    opt.drive_scale = 1e-4;
    const Result r2 =
        integrate_semiclassical(p, std::nullopt, Envelope(kPulse), AtomInit::g1(), kGrid, opt);

    const double ratio1 = r1.energy_a_out() / 1e-6;
    const double ratio2 = r2.energy_a_out() / 1e-8;
    CHECK(std::abs(ratio1 - ratio2) < 1e-6);
    CHECK(std::abs(ratio1 - analytic::swap_probability(2.0)) < 1e-2);

    const double refl1 = r1.energy_b_out() / 1e-6;
    const auto sc = analytic::scattering_coefficients(p, 0.0, AtomLevel::g1);
    CHECK(std::abs(refl1 - std::norm(sc.r)) < 1e-2);
}

TEST_CASE("input-output relation holds as an identity on the samples") {
    const SystemParams p = SystemParams::from_cooperativity(1.0, 0.2);
    const Result r = integrate_semiclassical(p, Envelope(kPulse), std::nullopt, AtomInit::g1(), kGrid);
    const auto& br = r.branches.front();
    for (std::size_t i = 0; i < r.times.size(); i += 97) {
        const cplx expected = std::sqrt(2.0 * p.kappa_a) * br.states[i].mean_a - r.a_in[i];
        CHECK(std::abs(br.a_out[i] - expected) < 1e-14);
    }
}

TEST_CASE("output energy never exceeds input energy") {
    for (const double C : {0.2, 1.0, 10.0}) {
        const SystemParams p = SystemParams::from_cooperativity(C, 0.4);
        const Result r =
            integrate_semiclassical(p, Envelope(kPulse), Envelope(kPulse), AtomInit::g1(), kGrid);
        CHECK(r.energy_a_out() + r.energy_b_out() <= r.energy_in() + 1e-6);
    }
}

TEST_CASE("atomic means stay inside physical bounds") {
    const SystemParams p = SystemParams::from_cooperativity(0.5, 1.0);
    const Result r = integrate_semiclassical(p, Envelope(kPulse), std::nullopt, AtomInit::g1(), kGrid);
    for (const auto& s : r.branches.front().states) {
        CHECK(s.mean_sigma_z >= -1.0 - 1e-6);
        CHECK(s.mean_sigma_z <= 1.0 + 1e-6);
        CHECK(s.mean_sigma_ee >= -1e-6);
        CHECK(s.mean_sigma_ee <= 1.0 + 1e-6);
    }
}

TEST_CASE("superposition initial state runs a weighted branch pair") {
    const SystemParams p = SystemParams::from_cooperativity(10.0, 0.2);
    const AtomInit init = AtomInit::superposition(std::sqrt(0.5), std::sqrt(0.5));
    const Result r = integrate_semiclassical(p, std::nullopt, Envelope(kPulse), init, kGrid);
    REQUIRE(r.branches.size() == 2);
    CHECK(r.branches[0].weight == doctest::Approx(0.5));
    CHECK(r.branches[1].weight == doctest::Approx(0.5));
    // coupled branch swaps, decoupled one reflects
    const Result g1 = integrate_semiclassical(p, std::nullopt, Envelope(kPulse), AtomInit::g1(), kGrid);
    const Result g2 = integrate_semiclassical(p, std::nullopt, Envelope(kPulse), AtomInit::g2(), kGrid);
    CHECK(r.energy_a_out() ==
          doctest::Approx(0.5 * g1.energy_a_out() + 0.5 * g2.energy_a_out()).epsilon(1e-10));
}

TEST_CASE("sigma_z damping toggle changes the saturation behaviour only") {
    const SystemParams p = SystemParams::from_cooperativity(1.0, 0.4);
    Options printed;
    Options alt;
    alt.sigma_z_damping_as_printed = false;
    const Result r1 =
        integrate_semiclassical(p, Envelope(kPulse), std::nullopt, AtomInit::g1(), kGrid, printed);
    const Result r2 =
        integrate_semiclassical(p, Envelope(kPulse), std::nullopt, AtomInit::g1(), kGrid, alt);
    // gamma_1 = gamma_2 makes 2(Gamma_1 + Gamma) != 2(Gamma_1 + Gamma_2); the
    // toggle must have an observable effect at finite drive
    CHECK(std::abs(r1.energy_a_out() - r2.energy_a_out()) > 1e-8);
}

TEST_CASE("invalid atomic population is rejected") {
    const SystemParams p = SystemParams::from_cooperativity(1.0, 0.2);
    AtomInit bad{1.5};
    CHECK_THROWS_AS(integrate_semiclassical(p, Envelope(kPulse), std::nullopt, bad, kGrid),
                    ConfigError);
    CHECK_THROWS_AS(AtomInit::superposition(1.0, 1.0), ConfigError);
}

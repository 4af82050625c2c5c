#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "crossqed/analytic.hpp"
#include "crossqed/gates.hpp"

using namespace crossqed;
using namespace crossqed::gates;

namespace {
const PulseShape kPulse = PulseShape::standard(40.0);
const TimeGrid kGrid = TimeGrid::for_pulse(kPulse);
}  // namespace

TEST_CASE("atom-controlled CNOT clears 95% at C = 10 in both coupling regimes") {
    for (const double gamma : {0.02, 20.0}) {
        const SystemParams p = SystemParams::from_cooperativity(10.0, gamma);
        const TruthTableResult t = evaluate_cnot_atom_control(p, kPulse, kGrid);
        REQUIRE(t.rows.size() == 4);
        CHECK(t.min_success() > 0.95);
        // g2 rows are lossless pass-through
        CHECK(t.rows[0].success > 1.0 - 1e-4);
        CHECK(t.rows[1].success > 1.0 - 1e-4);
    }
}

TEST_CASE("decoupled control: swap rows collapse at tiny cooperativity") {
    const SystemParams p = SystemParams::from_cooperativity(1e-6, 0.2);
    const TruthTableResult t = evaluate_cnot_atom_control(p, kPulse, kGrid);
    CHECK(t.rows[2].success < 1e-3);
    CHECK(t.rows[3].success < 1e-3);
    CHECK(t.rows[2].wrong_port > 0.99);
}

TEST_CASE("swap rows decompose into success + wrong port + loss") {
    for (const double C : {0.5, 2.0, 10.0}) {
        const SystemParams p = SystemParams::from_cooperativity(C, 0.2);
        const TruthTableResult t = evaluate_cnot_atom_control(p, kPulse, kGrid);
        for (const auto& row : t.rows) {
            CHECK(row.success + row.wrong_port + row.loss <= 1.0 + 1e-6);
            CHECK(std::abs(row.success + row.wrong_port + row.loss - 1.0) < 1e-4);
        }
        // long-pulse limit: wrong port -> r^2, loss -> 8C/(1+4C)^2
        const double r2 = std::norm(analytic::scattering_coefficients(p, 0.0, AtomLevel::g1).r);
        const double loss = 8.0 * C / ((1.0 + 4.0 * C) * (1.0 + 4.0 * C));
        CHECK(std::abs(t.rows[2].wrong_port - r2) < 1e-2);
        CHECK(std::abs(t.rows[2].loss - loss) < 1e-2);
    }
}

TEST_CASE("light-controlled CNOT: dark rows are transparent, bright rows swap the target") {
    const SystemParams p = SystemParams::from_cooperativity(10.0, 0.02);
    const TruthTableResult t = evaluate_cnot_light_control(p, kPulse, kGrid);
    REQUIRE(t.rows.size() == 4);
    CHECK(t.rows[0].success > 1.0 - 1e-4);
    CHECK(t.rows[1].success > 1.0 - 1e-4);
    CHECK(t.rows[2].success > 0.95);
    CHECK(t.rows[3].success > 0.95);
    // bright rows approach the same closed form as the atom-controlled swap
    CHECK(std::abs(t.rows[2].success - analytic::swap_probability(10.0)) < 1e-2);
}

TEST_CASE("minimum success is monotone in the cooperativity for both conventions") {
    double prev_atom = 0.0, prev_light = 0.0;
    for (const double C : {1.0, 3.16, 10.0, 31.6, 100.0}) {
        const SystemParams p = SystemParams::from_cooperativity(C, 0.2);
        const double atom = evaluate_cnot_atom_control(p, kPulse, kGrid).min_success();
        const double light = evaluate_cnot_light_control(p, kPulse, kGrid).min_success();
        CHECK(atom >= prev_atom - 1e-9);
        CHECK(light >= prev_light - 1e-9);
        prev_atom = atom;
        prev_light = light;
    }
}

TEST_CASE("ideal outcome is the most likely one above the pi-phase threshold") {
    for (const double C : {0.3, 1.0, 10.0}) {
        const SystemParams p = SystemParams::from_cooperativity(C, 0.2);
        const TruthTableResult t = evaluate_cnot_atom_control(p, kPulse, kGrid);
        for (const auto& row : t.rows) CHECK(row.success > row.wrong_port);
    }
}

TEST_CASE("Fredkin truth table at C = 5 (coarse oracle)") {
    const SystemParams p = SystemParams::from_cooperativity(5.0, 0.2);
    GateOptions opt;
    opt.timebin_dt = 0.05;
    const TruthTableResult t = evaluate_fredkin(p, kPulse, kGrid, opt);
    REQUIRE(t.rows.size() == 8);
    // g2 rows (first four) succeed except for grid truncation
    for (int i = 0; i < 4; ++i) CHECK(t.rows[i].success > 0.999);
    // two-photon row at C = 5: survival near 0.83, coincidence capped by the
    // closed form [1+(4C)^2]^2/(1+4C)^4 = 0.8268
    CHECK(t.rows[7].success > 0.82);
    CHECK(t.rows[7].success < 0.87);
    CHECK(t.rows[7].coincidence > 0.80);
    CHECK(t.rows[7].coincidence < analytic::biphoton_survival_probability(5.0));
    CHECK(t.rows[7].coincidence < t.rows[7].success);
    for (const auto& row : t.rows) {
        CHECK(row.success + row.loss + row.wrong_port <= 1.0 + 1e-6);
    }
}

TEST_CASE("Fredkin minimum success is monotone in the cooperativity") {
    GateOptions opt;
    opt.timebin_dt = 0.03;
    double prev = 0.0;
    for (const double C : {1.0, 4.64, 21.5, 100.0}) {
        const SystemParams p = SystemParams::from_cooperativity(C, 0.2);
        const double m = evaluate_fredkin(p, kPulse, kGrid, opt).min_success();
        CHECK(m >= prev - 1e-9);
        prev = m;
    }
}

TEST_CASE("Fredkin biphoton row: hierarchy backend agrees with the oracle") {
    const SystemParams p = SystemParams::from_cooperativity(5.0, 0.2);
    GateOptions tb;
    tb.timebin_dt = 0.04;
    GateOptions hier;
    hier.backend = BiphotonBackend::hierarchy;
    hier.hierarchy_options.coincidence_nodes = 256;
    const auto row_tb = evaluate_fredkin(p, kPulse, kGrid, tb).rows[7];
    const auto row_h = evaluate_fredkin(p, kPulse, kGrid, hier).rows[7];
    CHECK(std::abs(row_tb.success - row_h.success) < 5e-3);
    CHECK(std::abs(row_tb.coincidence - row_h.coincidence) < 5e-3);
}

TEST_CASE("asymmetry sweep peaks at the symmetric point and mirrors r <-> 1/r") {
    const SystemParams p = SystemParams::from_cooperativity(10.0, 0.2);
    const std::vector<double> ratios{1.0 / 1.3, 1.0 / 1.1, 1.0, 1.1, 1.3};
    const auto sweep = asymmetry_sweep(p, ratios, kPulse, kGrid);
    REQUIRE(sweep.size() == 5);
    const double at_1 = sweep[2].success;
    for (const auto& pt : sweep) {
        if (pt.ratio != 1.0) CHECK(pt.success < at_1);
    }
    CHECK(std::abs(sweep[1].success - sweep[3].success) < 1e-8);
    CHECK(std::abs(sweep[0].success - sweep[4].success) < 1e-8);

    // ratio 1 equals the symmetric bright-control row
    const TruthTableResult t = evaluate_cnot_light_control(p, kPulse, kGrid);
    CHECK(std::abs(at_1 - t.rows[2].success) < 1e-9);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "crossqed/errors.hpp"
#include "crossqed/params.hpp"

using namespace crossqed;

TEST_CASE("gaussian envelope peak and half-width") {
    PulseShape p{3.0, 0.7};
    const double peak = std::pow(p.eta * std::sqrt(std::numbers::pi), -0.5);
    CHECK(gaussian_envelope(p, p.t0) == doctest::Approx(peak).epsilon(1e-14));

    // tau_p is the full width at half of the peak amplitude:
    // env(t0 +- eta sqrt(2 ln 2)) = exp(-ln 2) * peak.
    const double half_pt = p.eta * std::sqrt(2.0 * std::numbers::ln2);
    CHECK(p.tau_p() == doctest::Approx(2.0 * half_pt).epsilon(1e-14));
    CHECK(gaussian_envelope(p, p.t0 + half_pt) == doctest::Approx(0.5 * peak).epsilon(1e-13));
    CHECK(gaussian_envelope(p, p.t0 - half_pt) == doctest::Approx(0.5 * peak).epsilon(1e-13));
    CHECK(gaussian_envelope(p, p.t0 + 2.0) > 0.0);
}

TEST_CASE("gaussian envelope normalization on a +-6 eta window") {
    PulseShape p{0.0, 1.3};
    // midpoint-rule quadrature oracle
    const int n = 200000;
    const double lo = p.t0 - 6.0 * p.eta, hi = p.t0 + 6.0 * p.eta;
    const double h = (hi - lo) / n;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        const double t = lo + (i + 0.5) * h;
        const double e = gaussian_envelope(p, t);
        sum += e * e * h;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("gaussian envelope rejects non-positive eta") {
    CHECK_THROWS_AS(gaussian_envelope(PulseShape{0.0, 0.0}, 0.0), ConfigError);
    CHECK_THROWS_AS(gaussian_envelope(PulseShape{0.0, -1.0}, 0.0), ConfigError);
}

TEST_CASE("pulse duration relation is exact") {
    PulseShape p = PulseShape::from_duration(1.0, 40.0);
    CHECK(p.tau_p() == doctest::Approx(40.0).epsilon(1e-14));
    CHECK(p.tau_p() / p.eta == doctest::Approx(2.0 * std::sqrt(2.0 * std::numbers::ln2)).epsilon(1e-14));

    PulseShape s = PulseShape::standard(40.0);
    CHECK(s.t0 == doctest::Approx(5.0 * s.eta));
}

TEST_CASE("dark/bright transform matches the single-photon dark state") {
    const DarkBright db = to_dark_bright(1.0, 0.0);
    CHECK(db.dark.real() == doctest::Approx(1.0 / std::numbers::sqrt2).epsilon(1e-15));
    CHECK(db.bright.real() == doctest::Approx(1.0 / std::numbers::sqrt2).epsilon(1e-15));

    const DarkBright back = to_dark_bright(1.0 / std::numbers::sqrt2, 1.0 / std::numbers::sqrt2);
    CHECK(back.dark.real() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(std::abs(back.bright) == doctest::Approx(0.0).epsilon(1e-15));

    const DarkBright bright = to_dark_bright(1.0 / std::numbers::sqrt2, -1.0 / std::numbers::sqrt2);
    CHECK(std::abs(bright.dark) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(bright.bright.real() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("dark/bright transform is a norm-preserving involution") {
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int trial = 0; trial < 500; ++trial) {
        const cplx a(u(rng), u(rng)), b(u(rng), u(rng));
        const DarkBright db = to_dark_bright(a, b);
        CHECK(std::norm(db.dark) + std::norm(db.bright) ==
              doctest::Approx(std::norm(a) + std::norm(b)).epsilon(1e-12));
        const DarkBright twice = to_dark_bright(db.dark, db.bright);
        CHECK(std::abs(twice.dark - a) < 1e-12);
        CHECK(std::abs(twice.bright - b) < 1e-12);
    }
}

TEST_CASE("cooperativity values") {
    // g = 0.6325, Gamma = 0.02: C = 0.6325^2 / 0.04 = 10.001...
    SystemParams p = SystemParams::symmetric(0.6325, 0.02);
    CHECK(cooperativity(p) == doctest::Approx(10.0).epsilon(2e-4));

    // strong coupling: g = 20, Gamma = 20 -> C = 400 / (2*20) = 10 exactly
    SystemParams strong = SystemParams::symmetric(20.0, 20.0);
    CHECK(cooperativity(strong) == doctest::Approx(10.0).epsilon(1e-14));

    SystemParams decoupled = SystemParams::symmetric(0.0, 0.5);
    CHECK(cooperativity(decoupled) == 0.0);

    SystemParams from_c = SystemParams::from_cooperativity(10.0, 0.2);
    CHECK(cooperativity(from_c) == doctest::Approx(10.0).epsilon(1e-14));
    CHECK(std::abs(from_c.g_a) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("cooperativity error paths") {
    SystemParams asym = SystemParams::symmetric(1.0, 0.2);
    asym.g_b = -2.0;
    CHECK_THROWS_AS(cooperativity(asym), ConfigError);

    SystemParams nogamma = SystemParams::symmetric(1.0, 0.0);
    CHECK_THROWS_AS(cooperativity(nogamma), ConfigError);

    SystemParams bad;
    bad.gamma_1 = -0.1;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    SystemParams badk;
    badk.kappa_a = -1.0;
    CHECK_THROWS_AS(badk.validate(), ConfigError);
}

TEST_CASE("gamma_total is the exact sum") {
    SystemParams p;
    p.gamma_1 = 0.125;
    p.gamma_2 = 0.075;
    CHECK(p.gamma_total() == 0.2);
}

TEST_CASE("initial state constructors enforce norms") {
    CHECK_NOTHROW(InitialState::with_reservoir(1.0, 0.0, 0.0, 0.0, 1.0));
    CHECK_NOTHROW(InitialState::vacuum_reservoir(std::sqrt(0.5), std::sqrt(0.5)));
    CHECK_THROWS_AS(InitialState::with_reservoir(1.0, 0.0, 0.5, 0.0, 0.0), ConfigError);
    CHECK_THROWS_AS(InitialState::with_reservoir(0.5, 0.0, 1.0, 0.0, 0.0), ConfigError);
    const InitialState vac = InitialState::vacuum_reservoir(1.0, 0.0);
    CHECK(std::abs(vac.mu_a) == 0.0);
    CHECK(std::abs(vac.mu_c) == 0.0);
}

TEST_CASE("time grid validation and coverage") {
    PulseShape p = PulseShape::standard(40.0);
    TimeGrid g = TimeGrid::for_pulse(p);
    CHECK(g.covers(p));
    CHECK(g.t_start == doctest::Approx(0.0));
    CHECK(g.t_end == doctest::Approx(10.0 * p.eta));

    TimeGrid bad{1.0, 0.0, 100};
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    TimeGrid narrow{0.0, 2.0, 100};
    CHECK_FALSE(narrow.covers(p));
}

TEST_CASE("collective-basis labels") {
    CHECK(CollectiveBasis::label(false, 1) == "D1");
    CHECK(CollectiveBasis::label(true, 2) == "B2");
}

TEST_CASE("sampled envelope hook interpolates and clamps") {
    std::vector<double> ts{0.0, 1.0, 2.0};
    std::vector<cplx> amps{0.0, {1.0, 1.0}, 0.0};
    Envelope e = Envelope::sampled(ts, amps);
    CHECK(std::abs(e(0.5) - cplx(0.5, 0.5)) < 1e-15);
    CHECK(std::abs(e(-1.0)) == 0.0);
    CHECK(std::abs(e(3.0)) == 0.0);
    CHECK_THROWS_AS(Envelope::sampled({0.0}, {cplx(1.0)}), ConfigError);
}

#include <doctest.h>

#include <cmath>
#include <random>

#include "cmp/bloch.hpp"
#include "cmp/errors.hpp"
#include "cmp/modulation.hpp"
#include "cmp/sensitivity.hpp"

using namespace cmp;

TEST_CASE("noise density") {
    CHECK(noise_density(1.0) == doctest::Approx(1.38e-23).epsilon(1e-3));
    CHECK(noise_density(300.0) == doctest::Approx(4.14e-21).epsilon(1e-3));
    CHECK_THROWS_AS(noise_density(0.0), ConfigError);
}

TEST_CASE("quantum limit temperature") {
    const double t = quantum_limit_temperature(two_pi * 10.4e9);
    CHECK(t == doctest::Approx(0.499).epsilon(2e-3));
    CHECK(quantum_limit_temperature(two_pi * 20.8e9) == doctest::Approx(2.0 * t).epsilon(1e-12));
}

TEST_CASE("cascade noise temperature") {
    ReadoutChain chain;
    chain.stages = {{10.0, 3.0}};
    CHECK(cascade_noise_temperature(chain) == 3.0);
    chain.stages = {{100.0, 0.5}, {1.0, 5.0}};
    CHECK(cascade_noise_temperature(chain) == doctest::Approx(0.55).epsilon(1e-12));
    chain.stages = {{1e30, 0.5}, {1.0, 5.0}};
    CHECK(cascade_noise_temperature(chain) == doctest::Approx(0.5).epsilon(1e-12));
    chain.stages.clear();
    CHECK_THROWS_AS(cascade_noise_temperature(chain), ConfigError);
}

TEST_CASE("tsm sensitivity") {
    const double s = tsm_sensitivity(noise_density(1.0), 1e21, two_pi * 10.4e9, 168e-9);
    CHECK(s == doctest::Approx(0.88e-18).epsilon(3e-2));
    SUBCASE("sqrt scaling in spin count") {
        CHECK(tsm_sensitivity(noise_density(1.0), 4e21, two_pi * 10.4e9, 168e-9) ==
              doctest::Approx(s / 2.0).epsilon(1e-12));
    }
    SUBCASE("sqrt scaling in noise") {
        CHECK(tsm_sensitivity(100.0 * noise_density(1.0), 1e21, two_pi * 10.4e9, 168e-9) ==
              doctest::Approx(10.0 * s).epsilon(1e-12));
    }
}

TEST_CASE("lsm sensitivity") {
    CHECK(lsm_sensitivity(0.4, 0.5, 1e4, noise_density(300.0), 0.1) ==
          doctest::Approx(1.04e-14).epsilon(5e-3));
    const double proto = lsm_sensitivity(0.4, 0.5, 2750.0, 4e-21, 0.2e-3);
    CHECK(2.1 * proto == doctest::Approx(1.9e-12).epsilon(0.15));
    CHECK(lsm_sensitivity(0.4, 0.5, 1e4, noise_density(300.0), 0.4) ==
          doctest::Approx(0.5 * lsm_sensitivity(0.4, 0.5, 1e4, noise_density(300.0), 0.1))
              .epsilon(1e-12));
    CHECK_THROWS_AS(lsm_sensitivity(0.4, 1.5, 1e4, 1e-21, 0.1), ConfigError);
}

TEST_CASE("integrated field limit") {
    const double sb = 0.88e-18;
    CHECK(integrated_field_limit(sb, 5e3, 3.6e4) == doctest::Approx(5.4e-19).epsilon(1e-2));
    CHECK(integrated_field_limit(sb, 1.0, 1.0) == doctest::Approx(sb).epsilon(1e-12));
    CHECK(integrated_field_limit(sb, 5e3, 16.0 * 3.6e4) ==
          doctest::Approx(integrated_field_limit(sb, 5e3, 3.6e4) / 2.0).epsilon(1e-12));
    CHECK_THROWS_AS(integrated_field_limit(sb, 1e-3, 1.0), ConfigError);
}

TEST_CASE("eq3/eq4 exact inversion property") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(0.1, 10.0);
    for (int k = 0; k < 150; ++k) {
        const double ns = u(rng) * 1e20;
        const double w1 = two_pi * u(rng) * 1e9;
        const double b = u(rng) * 1e-15;
        const double ts = u(rng) * 1e-7;
        const double p = absorbed_power(ns, w1, b, ts);
        const double back = tsm_sensitivity(p, ns, w1, ts);
        CHECK(std::abs(back - b) <= 1e-12 * b);
    }
}

TEST_CASE("eq6/eq7 inversion at r = 1") {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> u(0.1, 10.0);
    for (int k = 0; k < 120; ++k) {
        const double b0 = u(rng);
        const double q = u(rng) * 1e3;
        const double sp = u(rng) * 1e-21;
        const double ap2 = u(rng) * 1e-3;
        const double b2 = lsm_sensitivity(b0, 1.0, q, sp, ap2);
        // the b2 at which the eq6 first-sideband amplitude reaches the
        // noise amplitude sqrt(sigma_P * Ap^2)
        const double zeta = sideband_amplitude_eq6(ap2, q, b2, b0);
        CHECK(std::abs(zeta - std::sqrt(sp * ap2)) <= 1e-12 * zeta);
    }
}

TEST_CASE("monotonicity of the sensitivity formulas") {
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> u(0.5, 2.0);
    for (int k = 0; k < 150; ++k) {
        const double sp = u(rng) * 1e-22, ns = u(rng) * 1e20, w1 = two_pi * u(rng) * 1e9,
                     ts = u(rng) * 1e-7;
        const double base = tsm_sensitivity(sp, ns, w1, ts);
        CHECK(tsm_sensitivity(sp * 1.5, ns, w1, ts) > base);
        CHECK(tsm_sensitivity(sp, ns * 1.5, w1, ts) < base);
        CHECK(tsm_sensitivity(sp, ns, w1, ts * 1.5) < base);

        const double b0 = u(rng), r = 0.25 * u(rng), q = u(rng) * 1e3, ap2 = u(rng) * 1e-3;
        const double lbase = lsm_sensitivity(b0, r, q, sp, ap2);
        CHECK(lsm_sensitivity(b0 * 1.5, r, q, sp, ap2) > lbase);
        CHECK(lsm_sensitivity(b0, r, q * 1.5, sp, ap2) < lbase);
        CHECK(lsm_sensitivity(b0, r, q, sp * 1.5, ap2) > lbase);
        CHECK(lsm_sensitivity(b0, r, q, sp, ap2 * 1.5) < lbase);
    }
}

TEST_CASE("tsm report round trip") {
    const auto rep = make_tsm_report(1.0, 1e21, two_pi * 10.4e9, 168e-9);
    CHECK(rep.sensitivity == doctest::Approx(0.88e-18).epsilon(3e-2));
    bool coherence_time = false, coherence_length = false;
    for (const auto& n : rep.notes) {
        if (n.find("coherence time") != std::string::npos) coherence_time = true;
        if (n.find("coherence length") != std::string::npos) coherence_length = true;
    }
    CHECK(coherence_time);
    CHECK(coherence_length);

    const auto parsed = parse_report(rep.serialize());
    CHECK(parsed.sensitivity == rep.sensitivity);
    CHECK(recompute(parsed) == rep.sensitivity);  // bit-identical
}

TEST_CASE("lsm report round trip with residual pump noise") {
    const auto rep = make_lsm_report(0.4, 0.5, 2750.0, 300.0, 0.2e-3, 2.1, 4e-23);
    CHECK(rep.sigma_p == noise_density(300.0) + 4e-23);
    const auto parsed = parse_report(rep.serialize());
    CHECK(recompute(parsed) == rep.sensitivity);
    // residual noise strictly worsens the sensitivity
    const auto clean = make_lsm_report(0.4, 0.5, 2750.0, 300.0, 0.2e-3, 2.1);
    CHECK(rep.sensitivity > clean.sensitivity);
}

TEST_CASE("csv row matches the header arity") {
    const auto rep = make_tsm_report(1.0, 1e21, two_pi * 10.4e9, 168e-9);
    const auto count = [](const std::string& s) {
        return std::count(s.begin(), s.end(), ',');
    };
    CHECK(count(SensitivityReport::csv_header()) == count(rep.csv_row()));
}

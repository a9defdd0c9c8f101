#include <benchmark/benchmark.h>

#include "cmp/bloch.hpp"
#include "cmp/hybrid.hpp"
#include "cmp/modulation.hpp"

namespace {

cmp::HybridSystemModel demo_model() {
    cmp::HybridSystemModel model;
    cmp::OscillatorMode cavity;
    cavity.kind = cmp::ModeKind::cavity;
    cavity.omega = cmp::two_pi * 14e9;
    cavity.gamma = cmp::two_pi * 1e6;
    cmp::OscillatorMode magnon;
    magnon.kind = cmp::ModeKind::magnon;
    magnon.gamma = cmp::two_pi * 2e6;
    model.modes = {cavity, magnon};
    model.couplings = Eigen::MatrixXd::Zero(2, 2);
    model.couplings(0, 1) = model.couplings(1, 0) = cmp::two_pi * 30e6;
    model.port_couplings = {cmp::two_pi * 0.5e6, 0.0};
    model.set_bias_field(0.5);
    return model;
}

void bm_eigenmodes(benchmark::State& state) {
    const auto model = demo_model();
    for (auto _ : state)
        benchmark::DoNotOptimize(cmp::hybrid_eigenmodes(model));
}
BENCHMARK(bm_eigenmodes);

void bm_anticrossing_map(benchmark::State& state) {
    const auto model = demo_model();
    const auto fields = cmp::linspace(0.49, 0.51, 64);
    const auto freqs = cmp::linspace(cmp::two_pi * 13.9e9, cmp::two_pi * 14.1e9, 64);
    for (auto _ : state)
        benchmark::DoNotOptimize(cmp::anticrossing_map(model, fields, freqs));
}
BENCHMARK(bm_anticrossing_map);

void bm_harmonic_balance(benchmark::State& state) {
    auto model = demo_model();
    cmp::ModulationDrive drive;
    drive.b2 = 1e-6;
    drive.omega2 = cmp::two_pi * 10e3;
    drive.pump_omega = model.modes[1].omega;
    drive.pump_power = 1e-6;
    for (auto _ : state)
        benchmark::DoNotOptimize(cmp::harmonic_balance_sidebands(model, drive, 12));
}
BENCHMARK(bm_harmonic_balance);

void bm_bloch_integration(benchmark::State& state) {
    cmp::BlochParameters p;
    p.bias_field = 1e-4;
    p.drive_amplitude = 1e-9;
    p.drive_omega = p.constants.gyromagnetic_ratio * p.bias_field;
    p.relaxation_time = 1e-4;
    p.equilibrium_m = 100.0;
    const double period = cmp::two_pi / p.drive_omega;
    for (auto _ : state)
        benchmark::DoNotOptimize(
            cmp::integrate_bloch(p, 50.0 * period, period / 32.0));
}
BENCHMARK(bm_bloch_integration);

}  // namespace

BENCHMARK_MAIN();

#include "cmp/modulation.hpp"

#include <boost/numeric/odeint.hpp>
#include <algorithm>
#include <cmath>

#include "cmp/errors.hpp"

namespace cmp {

void ModulationDrive::validate(double bias_field) const {
    if (b2 < 0.0) throw ConfigError("modulation: negative b2");
    if (omega2 <= 0.0) throw ConfigError("modulation: omega2 must be positive");
    if (pump_omega <= 0.0) throw ConfigError("modulation: pump_omega must be positive");
    if (pump_power < 0.0) throw ConfigError("modulation: negative pump power");
    if (omega2 >= pump_omega / 10.0)
        throw ConfigError("modulation: omega2 must stay below pump_omega/10");
    (void)bias_field;  // b2 << B0 is a warning, queried via b2_small()
}

double SidebandSpectrum::power(int n) const {
    const std::complex<double> a = amplitude(n);
    return std::norm(a);
}

std::complex<double> SidebandSpectrum::amplitude(int n) const {
    for (const auto& c : components)
        if (c.n == n) return c.amplitude;
    return {0.0, 0.0};
}

double SidebandSpectrum::total_power() const {
    double p = 0.0;
    for (const auto& c : components) p += std::norm(c.amplitude);
    return p;
}

namespace {

using State = std::vector<std::complex<double>>;

// Loaded dynamical matrix: intrinsic gammas plus port couplings on the
// diagonal, matching the s21 convention.
Eigen::MatrixXcd loaded_matrix(const HybridSystemModel& model) {
    Eigen::MatrixXcd m = dynamical_matrix(model);
    for (Eigen::Index j = 0; j < m.rows(); ++j)
        m(j, j) -= std::complex<double>(0.0, model.port_couplings[static_cast<std::size_t>(j)] / 2.0);
    return m;
}

double min_damping(const HybridSystemModel& model) {
    double g = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < model.size(); ++j)
        g = std::min(g, model.modes[j].gamma + model.port_couplings[j]);
    return g;
}

}  // namespace

ModulationRun simulate_modulated_pmhs(const HybridSystemModel& model,
                                      const ModulationDrive& drive, int n_periods,
                                      const SimulationOptions& opts) {
    model.validate();
    drive.validate(model.bias_field);
    if (n_periods < 1) throw ConfigError("simulate_modulated_pmhs: need at least one period");
    double kin = model.port_couplings[static_cast<std::size_t>(model.input_port)];
    double kout = model.port_couplings[static_cast<std::size_t>(model.output_port)];
    if (model.input_port == model.output_port) {
        // same-mode input/output: the mode's external rate splits evenly
        // between the two couplers, matching s21
        kin /= 2.0;
        kout /= 2.0;
    }
    if (kin <= 0.0 || kout <= 0.0)
        throw ConfigError("simulate_modulated_pmhs: ports need positive couplings");
    const double gamma_min = min_damping(model);
    if (!(gamma_min > 0.0))
        throw ConfigError("simulate_modulated_pmhs: every mode needs damping");

    const auto nm = static_cast<Eigen::Index>(model.size());
    const Eigen::MatrixXcd m0 = loaded_matrix(model);
    const double gyro = model.constants.gyromagnetic_ratio;
    const double delta = gyro * drive.b2;  // magnon frequency excursion, rad/s
    const std::complex<double> im(0.0, 1.0);

    Eigen::VectorXcd pump = Eigen::VectorXcd::Zero(nm);
    pump[model.input_port] = std::sqrt(kin * drive.pump_power);
    Eigen::VectorXcd magnon_mask = Eigen::VectorXcd::Zero(nm);
    for (Eigen::Index j = 0; j < nm; ++j)
        if (model.modes[static_cast<std::size_t>(j)].kind == ModeKind::magnon)
            magnon_mask[j] = 1.0;

    // base matrix shifted to the pump frame, pre-multiplied by -i
    const Eigen::MatrixXcd base =
        -im * (m0 - drive.pump_omega * Eigen::MatrixXcd::Identity(nm, nm));

    auto rhs = [&](const State& a, State& dadt, double t) {
        const std::complex<double> wobble = -im * delta * std::sin(drive.omega2 * t);
        for (Eigen::Index j = 0; j < nm; ++j) {
            std::complex<double> acc = pump[j];
            for (Eigen::Index k = 0; k < nm; ++k)
                acc += base(j, k) * a[static_cast<std::size_t>(k)];
            acc += wobble * magnon_mask[j] * a[static_cast<std::size_t>(j)];
            dadt[static_cast<std::size_t>(j)] = acc;
        }
    };

    const double period = two_pi / drive.omega2;
    // transient rounded up to whole modulation periods to keep the
    // demodulation phase-aligned with b2*sin(w2 t)
    const double raw_transient = opts.transient_damping_times / gamma_min;
    const auto transient_periods =
        static_cast<std::size_t>(std::ceil(raw_transient / period));
    const double t_start = static_cast<double>(transient_periods) * period;
    const double dt = period / opts.samples_per_period;

    namespace ode = boost::numeric::odeint;
    auto stepper = ode::make_controlled(1e-14, opts.rel_tol,
                                        ode::runge_kutta_dopri5<State>());
    State a(static_cast<std::size_t>(nm), {0.0, 0.0});
    try {
        ode::integrate_adaptive(stepper, rhs, a, 0.0, t_start, dt);
    } catch (const std::exception& e) {
        throw NumericError(std::string("simulate_modulated_pmhs transient: ") + e.what());
    }

    // window: one extra leading period for the convergence check
    const int window_periods = n_periods + 1;
    const std::size_t n_samples =
        static_cast<std::size_t>(window_periods) * static_cast<std::size_t>(opts.samples_per_period);
    std::vector<double> times(n_samples);
    std::vector<std::complex<double>> output(n_samples);
    const double sqrt_kout = std::sqrt(kout);
    for (std::size_t s = 0; s < n_samples; ++s) {
        const double t0 = t_start + static_cast<double>(s) * dt;
        const double t1 = t0 + dt;
        try {
            ode::integrate_adaptive(stepper, rhs, a, t0, t1, dt);
        } catch (const std::exception& e) {
            throw NumericError(std::string("simulate_modulated_pmhs: ") + e.what());
        }
        times[s] = t1;
        output[s] = sqrt_kout * a[static_cast<std::size_t>(model.output_port)];
    }

    auto demod = [&](std::size_t first, std::size_t count, int n) {
        std::complex<double> acc(0.0, 0.0);
        for (std::size_t s = first; s < first + count; ++s)
            acc += output[s] * std::exp(im * (static_cast<double>(n) * drive.omega2 * times[s]));
        return acc / static_cast<double>(count);
    };

    const auto spp = static_cast<std::size_t>(opts.samples_per_period);
    // successive-period convergence check on the leading harmonics
    double worst = 0.0;
    double carrier_ref = std::abs(demod(spp, n_samples - spp, 0));
    for (int n = -3; n <= 3; ++n) {
        const std::complex<double> c_prev = demod(0, spp, n);
        const std::complex<double> c_last = demod(n_samples - spp, spp, n);
        worst = std::max(worst, std::abs(c_last - c_prev) /
                                    std::max(carrier_ref, 1e-300));
    }
    if (worst > opts.convergence_tol)
        throw NumericError("simulate_modulated_pmhs: transient not converged (residual " +
                           std::to_string(worst) + ")");

    ModulationRun run;
    run.drive = drive;
    run.n_periods = n_periods;
    run.times.assign(times.begin() + static_cast<std::ptrdiff_t>(spp), times.end());
    run.output.assign(output.begin() + static_cast<std::ptrdiff_t>(spp), output.end());
    run.spectrum.pump_omega = drive.pump_omega;
    run.spectrum.omega2 = drive.omega2;
    for (int n = -opts.max_harmonic; n <= opts.max_harmonic; ++n)
        run.spectrum.components.push_back({n, demod(spp, n_samples - spp, n)});
    double psum = 0.0;
    for (std::size_t s = spp; s < n_samples; ++s) psum += std::norm(output[s]);
    run.mean_output_power = psum / static_cast<double>(n_samples - spp);
    return run;
}

SidebandSpectrum harmonic_balance_sidebands(const HybridSystemModel& model,
                                            const ModulationDrive& drive,
                                            int n_harmonics) {
    model.validate();
    drive.validate(model.bias_field);
    if (n_harmonics < 3) throw ConfigError("harmonic_balance_sidebands: n_harmonics >= 3");
    double kin = model.port_couplings[static_cast<std::size_t>(model.input_port)];
    double kout = model.port_couplings[static_cast<std::size_t>(model.output_port)];
    if (model.input_port == model.output_port) {
        // same-mode input/output: the mode's external rate splits evenly
        // between the two couplers, matching s21
        kin /= 2.0;
        kout /= 2.0;
    }
    if (kin <= 0.0 || kout <= 0.0)
        throw ConfigError("harmonic_balance_sidebands: ports need positive couplings");

    const auto nm = static_cast<Eigen::Index>(model.size());
    const int nh = n_harmonics;
    const auto blocks = static_cast<Eigen::Index>(2 * nh + 1);
    const Eigen::Index dim = blocks * nm;
    const std::complex<double> im(0.0, 1.0);
    const Eigen::MatrixXcd m0 = loaded_matrix(model);
    const double delta = model.constants.gyromagnetic_ratio * drive.b2;

    Eigen::MatrixXcd sys = Eigen::MatrixXcd::Zero(dim, dim);
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(dim);
    const Eigen::MatrixXcd ident = Eigen::MatrixXcd::Identity(nm, nm);
    Eigen::MatrixXcd magnon_sel = Eigen::MatrixXcd::Zero(nm, nm);
    for (Eigen::Index j = 0; j < nm; ++j)
        if (model.modes[static_cast<std::size_t>(j)].kind == ModeKind::magnon)
            magnon_sel(j, j) = 1.0;

    for (int n = -nh; n <= nh; ++n) {
        const Eigen::Index row = static_cast<Eigen::Index>(n + nh) * nm;
        sys.block(row, row, nm, nm) =
            im * (m0 - drive.pump_omega * ident) - im * (static_cast<double>(n) * drive.omega2) * ident;
        if (n + 1 <= nh)
            sys.block(row, row + nm, nm, nm) = (delta / 2.0) * magnon_sel;
        if (n - 1 >= -nh)
            sys.block(row, row - nm, nm, nm) = -(delta / 2.0) * magnon_sel;
    }
    rhs[static_cast<Eigen::Index>(nh) * nm + model.input_port] = std::sqrt(kin * drive.pump_power);

    const Eigen::VectorXcd sol = sys.partialPivLu().solve(rhs);

    SidebandSpectrum spec;
    spec.pump_omega = drive.pump_omega;
    spec.omega2 = drive.omega2;
    const double sqrt_kout = std::sqrt(kout);
    for (int n = -nh; n <= nh; ++n) {
        const Eigen::Index row = static_cast<Eigen::Index>(n + nh) * nm;
        spec.components.push_back({n, sqrt_kout * sol[row + model.output_port]});
    }
    const double carrier = std::abs(spec.amplitude(0));
    const double edge = std::max(std::abs(spec.amplitude(nh)), std::abs(spec.amplitude(-nh)));
    if (drive.b2 > 0.0 && carrier > 0.0 && edge > 1e-3 * carrier)
        throw NumericError("harmonic_balance_sidebands: truncation not converged, raise n_harmonics");
    return spec;
}

double sideband_amplitude_eq6(double pump_power, double quality_factor,
                              double b2, double bias_field) {
    if (pump_power <= 0.0 || quality_factor <= 0.0 || bias_field <= 0.0)
        throw ConfigError("sideband_amplitude_eq6: arguments must be positive");
    if (b2 < 0.0) throw ConfigError("sideband_amplitude_eq6: negative b2");
    return pi * pump_power * quality_factor * b2 / (2.0 * bias_field);
}

double adiabatic_sideband_ratio(double quality_factor, double b2, double bias_field) {
    if (quality_factor <= 0.0 || bias_field <= 0.0)
        throw ConfigError("adiabatic_sideband_ratio: arguments must be positive");
    return quality_factor * b2 / bias_field;
}

SidebandSpectrum waveguide_filter(const SidebandSpectrum& spectrum,
                                  double cutoff_omega, double attenuation) {
    if (attenuation < 1.0)
        throw ConfigError("waveguide_filter: attenuation must be >= 1");
    SidebandSpectrum out = spectrum;
    const double amp_factor = 1.0 / std::sqrt(attenuation);
    for (auto& c : out.components)
        if (std::abs(out.absolute_frequency(c.n)) < cutoff_omega)
            c.amplitude *= amp_factor;
    return out;
}

}  // namespace cmp

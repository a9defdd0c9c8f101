#include "cmp/bloch.hpp"

#include <boost/numeric/odeint.hpp>
#include <array>
#include <cmath>

#include "cmp/errors.hpp"

namespace cmp {

void BlochParameters::validate() const {
    constants.validate();
    if (relaxation_time <= 0.0) throw ConfigError("bloch: T_s must be positive");
    if (drive_amplitude < 0.0) throw ConfigError("bloch: b1 must be non-negative");
    if (bias_field < 0.0) throw ConfigError("bloch: negative bias field");
    if (equilibrium_m < 0.0) throw ConfigError("bloch: negative M0");
    if (spin_density < 0.0 || sample_volume < 0.0)
        throw ConfigError("bloch: negative spin density or volume");
}

namespace {

using State = std::array<double, 3>;

struct BlochRhs {
    const BlochParameters& p;

    void operator()(const State& m, State& dmdt, double t) const {
        const double gyro = p.constants.gyromagnetic_ratio;
        double bx, by;
        if (p.polarization == DrivePolarization::linear) {
            bx = p.drive_amplitude * std::cos(p.drive_omega * t);
            by = 0.0;
        } else {
            // co-rotating with the electron precession sense
            bx = p.drive_amplitude * std::cos(p.drive_omega * t);
            by = -p.drive_amplitude * std::sin(p.drive_omega * t);
        }
        const double bz = p.bias_field;
        dmdt[0] = gyro * (m[1] * bz - m[2] * by) - m[0] / p.relaxation_time;
        dmdt[1] = gyro * (m[2] * bx - m[0] * bz) - m[1] / p.relaxation_time;
        dmdt[2] = gyro * (m[0] * by - m[1] * bx) - (m[2] - p.equilibrium_m) / p.relaxation_time;
    }
};

}  // namespace

BlochTrajectory integrate_bloch(const BlochParameters& params, double duration,
                                double max_step, std::optional<Eigen::Vector3d> initial,
                                const IntegratorOptions& opts) {
    params.validate();
    if (duration <= 0.0) throw ConfigError("integrate_bloch: duration must be positive");
    const double fastest = std::max(params.constants.gyromagnetic_ratio * params.bias_field,
                                    params.drive_omega);
    if (fastest > 0.0 && max_step >= two_pi / (10.0 * fastest))
        throw ConfigError("integrate_bloch: max_step too large for the precession rate");
    if (max_step <= 0.0) throw ConfigError("integrate_bloch: max_step must be positive");

    State m{0.0, 0.0, params.equilibrium_m};
    if (initial) m = {initial->x(), initial->y(), initial->z()};

    BlochTrajectory traj;
    const auto n_steps = static_cast<std::size_t>(std::ceil(duration / max_step));
    traj.times.reserve(n_steps + 1);
    traj.magnetization.reserve(n_steps + 1);
    auto observe = [&](const State& s, double t) {
        traj.times.push_back(t);
        traj.magnetization.emplace_back(s[0], s[1], s[2]);
    };

    namespace ode = boost::numeric::odeint;
    const double dt = duration / static_cast<double>(n_steps);
    BlochRhs rhs{params};
    try {
        if (opts.fixed_step) {
            ode::runge_kutta4<State> stepper;
            ode::integrate_const(stepper, rhs, m, 0.0, duration + dt / 2.0, dt, observe);
        } else {
            const double scale = std::max(params.equilibrium_m, 1.0);
            const double abs_tol = opts.abs_tol > 0.0 ? opts.abs_tol : opts.rel_tol * scale;
            auto stepper = ode::make_controlled(abs_tol, opts.rel_tol,
                                                ode::runge_kutta_dopri5<State>());
            ode::integrate_const(stepper, rhs, m, 0.0, duration + dt / 2.0, dt, observe);
        }
    } catch (const std::exception& e) {
        throw NumericError(std::string("integrate_bloch: ") + e.what());
    }
    if (traj.times.size() < 2)
        throw NumericError("integrate_bloch: step-size underflow");
    return traj;
}

TransverseSteadyState steady_state_transverse(const BlochParameters& params) {
    params.validate();
    if (!params.linear_response_ok())
        throw NumericError("steady_state_transverse: outside the linear-response regime");
    const double gyro = params.constants.gyromagnetic_ratio;
    const double co_rotating =
        params.polarization == DrivePolarization::linear ? 0.5 : 1.0;
    const double detuning = params.drive_omega - gyro * params.bias_field;
    const double ts = params.relaxation_time;
    const double lorentz = 1.0 / std::sqrt(1.0 + detuning * detuning * ts * ts);
    const double amplitude = co_rotating * gyro * params.drive_amplitude * ts *
                             params.equilibrium_m * lorentz;
    // phase of the transverse response relative to the drive; -pi/2 on resonance
    const double phase = -pi / 2.0 - std::atan(detuning * ts);
    return {amplitude, phase};
}

double absorbed_power(double spin_count, double omega1, double b1,
                      double relaxation_time, const PhysicalConstants& consts) {
    if (spin_count <= 0.0 || omega1 <= 0.0 || relaxation_time <= 0.0)
        throw ConfigError("absorbed_power: arguments must be positive");
    if (b1 < 0.0) throw ConfigError("absorbed_power: negative b1");
    return consts.gyromagnetic_ratio * consts.bohr_magneton * spin_count * omega1 *
           b1 * b1 * relaxation_time;
}

}  // namespace cmp

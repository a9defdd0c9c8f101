#ifndef CMP_BLOCH_HPP
#define CMP_BLOCH_HPP

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "cmp/constants.hpp"

namespace cmp {

/// Transverse drive shape.  The linear drive b1*cos(w1 t) x carries both
/// rotating halves; the circular drive is the co-rotating component alone
/// with full amplitude b1.  Steady-state formulas pick up the factor 1/2
/// for the linear case.
enum class DrivePolarization { linear, circular };

struct BlochParameters {
    double bias_field = 0.0;       // Tesla, static along z
    double drive_amplitude = 0.0;  // Tesla, transverse b1
    double drive_omega = 0.0;      // rad/s
    double relaxation_time = 0.0;  // seconds, single T_s for both axes
    double equilibrium_m = 0.0;    // A/m, M0
    double spin_density = 0.0;     // spins/m^3
    double sample_volume = 0.0;    // m^3
    DrivePolarization polarization = DrivePolarization::linear;
    PhysicalConstants constants{};

    double spin_count() const { return spin_density * sample_volume; }
    /// gyro*b1*Ts < 0.1; reported, not enforced.
    bool linear_response_ok() const {
        return constants.gyromagnetic_ratio * drive_amplitude * relaxation_time < 0.1;
    }
    void validate() const;
};

struct BlochTrajectory {
    std::vector<double> times;                  // seconds, uniform spacing
    std::vector<Eigen::Vector3d> magnetization; // A/m
};

struct IntegratorOptions {
    double rel_tol = 1e-9;
    double abs_tol = 0.0;  // 0: derived as rel_tol * M0
    bool fixed_step = false;  // plain RK4 at max_step, for order studies
};

/// dM/dt = gyro * M x (B0 z + drive(t)) - (M - M0 z)/Ts, integrated with an
/// adaptive embedded Runge-Kutta pair.  Samples land on a uniform grid of
/// spacing max_step; max_step must resolve the fastest precession,
/// max_step < 2*pi/(10*max(gyro*B0, w1)).
BlochTrajectory integrate_bloch(const BlochParameters& params, double duration,
                                double max_step,
                                std::optional<Eigen::Vector3d> initial = std::nullopt,
                                const IntegratorOptions& opts = {});

struct TransverseSteadyState {
    double amplitude;  // A/m
    double phase;      // rad, relative to the drive
};

/// Rotating-wave linear steady state: on resonance the transverse
/// amplitude is (gyro*b1*Ts/2)*M0 for a linear drive (co-rotating half)
/// and gyro*b1*Ts*M0 for a circular drive; off resonance a Lorentzian of
/// half-width 1/Ts applies.  Throws outside the linear-response regime.
TransverseSteadyState steady_state_transverse(const BlochParameters& params);

/// P1 = gyro * mu_B * N_s * w1 * b1^2 * Ts: steady-state power a critically
/// coupled antenna can extract under a resonant co-rotating drive.
double absorbed_power(double spin_count, double omega1, double b1,
                      double relaxation_time, const PhysicalConstants& consts = {});

}  // namespace cmp

#endif

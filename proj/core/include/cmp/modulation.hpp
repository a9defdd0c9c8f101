#ifndef CMP_MODULATION_HPP
#define CMP_MODULATION_HPP

#include <complex>
#include <vector>

#include "cmp/hybrid.hpp"

namespace cmp {

/// Longitudinal modulation b2*sin(w2 t) on top of the bias field, plus the
/// monochromatic pump feeding the input port.
struct ModulationDrive {
    double b2 = 0.0;          // Tesla
    double omega2 = 0.0;      // rad/s
    double pump_omega = 0.0;  // rad/s
    double pump_power = 0.0;  // Watts, A_p^2

    /// w2 must stay well below the carrier; b2 >= B0/100 only warns so the
    /// stress tests can push past it.
    void validate(double bias_field) const;
    bool b2_small(double bias_field) const { return b2 < bias_field / 100.0; }
};

/// One line of the demodulated comb: offset n*w2 from the pump, complex
/// amplitude in sqrt(W) at the detection plane.
struct HarmonicComponent {
    int n = 0;
    std::complex<double> amplitude;
};

struct SidebandSpectrum {
    double pump_omega = 0.0;
    double omega2 = 0.0;
    std::vector<HarmonicComponent> components;  // ordered by n

    double power(int n) const;                // W
    std::complex<double> amplitude(int n) const;
    double total_power() const;
    double absolute_frequency(int n) const { return pump_omega + n * omega2; }
};

/// Periodic steady state of the pumped, frequency-modulated hybrid system.
struct ModulationRun {
    std::vector<double> times;                          // s, final window, uniform
    std::vector<std::complex<double>> output;           // sqrt(W), rotating frame
    SidebandSpectrum spectrum;
    double mean_output_power = 0.0;                     // W, time average over window
    ModulationDrive drive;                              // settings provenance
    int n_periods = 0;
};

struct SimulationOptions {
    int samples_per_period = 256;
    int max_harmonic = 40;
    // transient discard in units of 1/min(gamma); amplitudes decay at
    // gamma/2, so 30 leaves an e^-15 residual, far under convergence_tol
    double transient_damping_times = 30.0;
    double rel_tol = 1e-10;
    double convergence_tol = 1e-5;  // harmonic change between successive periods
};

/// Time-domain integration of the coupled-mode equations in the frame
/// rotating at the pump, with w_m(t) = gyro*(B0 + b2 sin w2 t) + offset.
/// After the transient discard the periodic steady state is demodulated
/// synchronously over an integer number of modulation periods.
ModulationRun simulate_modulated_pmhs(const HybridSystemModel& model,
                                      const ModulationDrive& drive, int n_periods,
                                      const SimulationOptions& opts = {});

/// Frequency-domain oracle: the same linear system solved harmonic-by-
/// harmonic with the modulation expanded over the +-1 neighbour blocks
/// (Jacobi-Anger structure), truncated at n_harmonics.  Fails when the
/// truncation has not converged.
SidebandSpectrum harmonic_balance_sidebands(const HybridSystemModel& model,
                                            const ModulationDrive& drive,
                                            int n_harmonics);

/// zeta_1 = pi * A_p^2 * Q * b2 / (2 B0).  A_p^2 is the carrier power at the
/// detection plane, so zeta_1 carries Watts; valid only for w2 within the
/// ESR linewidth.
double sideband_amplitude_eq6(double pump_power, double quality_factor,
                              double b2, double bias_field);

/// Exact Lorentzian first-sideband-to-carrier amplitude ratio in the
/// adiabatic limit, gyro*b2/gamma_m = Q*b2/B0.  This is the eq6 ratio times
/// the 2/pi phase-slope normalization (the flat-phase approximation behind
/// eq6 uses slope pi/gamma where the Lorentzian gives 2/gamma).
double adiabatic_sideband_ratio(double quality_factor, double b2, double bias_field);

/// Ideal brick-wall high-pass: components with absolute frequency below
/// cutoff lose `attenuation` in power, the rest pass untouched.
SidebandSpectrum waveguide_filter(const SidebandSpectrum& spectrum,
                                  double cutoff_omega, double attenuation);

}  // namespace cmp

#endif

#ifndef CMP_HYBRID_HPP
#define CMP_HYBRID_HPP

#include <Eigen/Dense>
#include <complex>
#include <optional>
#include <utility>
#include <vector>

#include "cmp/constants.hpp"
#include "cmp/spectrum.hpp"

namespace cmp {

enum class ModeKind { cavity, magnon };

/// One damped oscillator of the coupled-mode model.
///
/// gamma is the full-width energy damping rate; eigenvalues of the
/// dynamical matrix carry -gamma/2 as their imaginary part.  For magnon
/// modes omega is derived from the bias field as gyro*B0 + field_offset
/// and is refreshed whenever the bias field changes.
struct OscillatorMode {
    ModeKind kind = ModeKind::cavity;
    double omega = 0.0;         // rad/s
    double gamma = 0.0;         // rad/s, FWHM energy rate
    double field_offset = 0.0;  // rad/s, anisotropy offset (magnon only)
};

/// Kittel mode frequency gyro*B0 + field_offset.  Rejects negative fields.
double kittel_frequency(double bias_field, double field_offset,
                        const PhysicalConstants& consts = {});

/// Coupled damped oscillators: modes, symmetric coupling matrix (rad/s),
/// bias field, and per-mode external port couplings (rad/s).
struct HybridSystemModel {
    std::vector<OscillatorMode> modes;
    Eigen::MatrixXd couplings;           // rad/s, symmetric, zero diagonal
    double bias_field = 0.0;             // Tesla
    std::vector<double> port_couplings;  // rad/s, kappa_ext per mode
    int input_port = 0;                  // mode index fed by the input line
    int output_port = 0;                 // mode index read by the output line
    PhysicalConstants constants{};

    std::size_t size() const { return modes.size(); }

    /// Re-derives every magnon omega from the bias field.
    void set_bias_field(double b0);

    /// Throws ConfigError on any violated structural invariant.
    void validate() const;

    /// g_cm > max(gamma_c, gamma_m)/2 for the given mode pair.
    bool strong_coupling(int i, int j) const;
};

/// M[j][j] = omega_j - i*gamma_j/2, M[j][k] = g_jk.  Complex-symmetric.
Eigen::MatrixXcd dynamical_matrix(const HybridSystemModel& model);

/// Eigenvalues and eigenvectors of the dynamical matrix, sorted by
/// ascending real part.  Real part: hybrid frequency; -2x imaginary part:
/// hybrid linewidth.
struct Eigenmodes {
    Eigen::VectorXcd values;
    Eigen::MatrixXcd vectors;  // columns match values
};

Eigenmodes solve_eigenmodes(const HybridSystemModel& model);
std::vector<std::complex<double>> hybrid_eigenmodes(const HybridSystemModel& model);

/// Minimum eigenmode separation over a bias-field scan around the
/// cavity-magnon crossing; at degeneracy this is 2*g_cm.  The pair of
/// branches defaults to the two modes of a 1+1 system.  Fails if the
/// minimum sits on the scan boundary.
double rabi_splitting(const HybridSystemModel& model,
                      std::optional<std::pair<int, int>> branch_pair = std::nullopt,
                      std::optional<std::pair<double, double>> field_window = std::nullopt);

/// Dimensionless mode-pull coefficient r = (d Re omega_p / d B0) / gyro
/// for the tracked branch, by central finite difference.  r in [0,1];
/// overshoot beyond `clip_tolerance` is an error, smaller overshoot is
/// clipped.  Branch identity across the +-h evaluations is kept by
/// maximum eigenvector overlap; a weak overlap is reported as a
/// tracking failure.
double mode_pull_coefficient(const HybridSystemModel& model, int branch,
                             double bias_field, double clip_tolerance = 1e-6);

/// Input-output transmission through the coupled-mode model.
///
/// The mode gammas are intrinsic losses; the external port couplings load
/// the diagonal, so for a single mode with kappa_in = kappa_out = gamma/2
/// (critical coupling) the on-resonance |S21| is 1/2.
std::complex<double> s21(const HybridSystemModel& model, double probe_omega,
                         int input_port, int output_port);
std::complex<double> s21(const HybridSystemModel& model, double probe_omega);

/// |S21| map over (field, frequency) grids; magnon frequencies are
/// recomputed per field point.  Grid columns are evaluated in parallel.
SpectrumMap anticrossing_map(const HybridSystemModel& model,
                             const std::vector<double>& field_grid,
                             const std::vector<double>& frequency_grid);

/// Default grid span used by the CLI: n points across +-5g around the
/// crossing, matching the scale of the measured maps.
std::vector<double> linspace(double lo, double hi, std::size_t n);

/// Worker count for grid evaluation: CMPW_THREADS or hardware concurrency.
unsigned grid_thread_count();

}  // namespace cmp

#endif

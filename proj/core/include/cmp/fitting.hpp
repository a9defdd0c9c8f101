#ifndef CMP_FITTING_HPP
#define CMP_FITTING_HPP

#include <string>
#include <vector>

#include "cmp/hybrid.hpp"
#include "cmp/spectrum.hpp"

namespace cmp {

enum class FitLoss { magnitude, log_magnitude };

enum class FitParamKind {
    cavity_omega,   // modes[i].omega (cavity only)
    mode_gamma,     // modes[i].gamma
    field_offset,   // modes[i].field_offset (magnon only)
    coupling        // couplings(i,j)
};

struct FitParameter {
    FitParamKind kind = FitParamKind::coupling;
    int i = 0;
    int j = 0;  // second index, couplings only
    bool free = true;
    double lower = 0.0;
    double upper = 0.0;

    std::string name() const;
    double get(const HybridSystemModel& model) const;
    void set(HybridSystemModel& model, double value) const;
};

struct FitOptions {
    int max_iterations = 200;
    double gradient_tol = 1e-12;
    double step_tol = 1e-12;
    double initial_lambda = 1e-3;
};

struct FitProblem {
    SpectrumMap data;            // linear magnitude map
    HybridSystemModel model;     // template carrying the initial guess
    std::vector<FitParameter> parameters;
    FitLoss loss = FitLoss::magnitude;
    FitOptions options{};

    void validate() const;
};

struct FitResult {
    HybridSystemModel model;                 // best-fit model
    std::vector<double> values;              // per free parameter
    std::vector<std::string> names;
    std::vector<double> standard_errors;     // local quadratic approximation
    double residual_norm = 0.0;              // sqrt(sum of squared residuals)
    double initial_residual_norm = 0.0;
    int iterations = 0;
    std::string termination;

    std::string serialize() const;  // key = value text
};

/// Damped Gauss-Newton (Levenberg-Marquardt) on the |S21| map; the
/// accepted-step residual is monotone non-increasing.  A singular normal
/// matrix is reported together with the least identifiable parameter.
FitResult fit_anticrossing(const FitProblem& problem);

/// Residual map of a model against data on the data's grids.
SpectrumMap residual_map(const FitProblem& problem, const HybridSystemModel& model);

/// Seeds omega_c and the magnon field offset from per-column ridge
/// extraction: peak picking with continuity tie-breaking, then line fits
/// to the far-detuned branches.
HybridSystemModel seed_from_ridges(const SpectrumMap& data, HybridSystemModel model);

/// Inverts g_cm = (gyro/2) * sqrt(mu0 * hbar * omega_c * N_s * fill / V_mode)
/// for the spin number.  The prefactor is the standard magnetic-dipole
/// vacuum coupling with the sqrt(N_s) collective enhancement.
double spins_from_coupling(double g_cm, double omega_c, double mode_volume,
                           double fill_factor, const PhysicalConstants& consts = {});

/// Forward direction of the same relation.
double coupling_from_spins(double spin_count, double omega_c, double mode_volume,
                           double fill_factor, const PhysicalConstants& consts = {});

/// T_s from the fitted linewidths: 1/(w*gamma_c + (1-w)*gamma_m), i.e.
/// 2/(gamma_c+gamma_m) at full hybridization (w = 1/2).
double relaxation_time_from_fit(double gamma_c, double gamma_m,
                                double cavity_weight = 0.5);

}  // namespace cmp

#endif

#ifndef CMP_SENSITIVITY_HPP
#define CMP_SENSITIVITY_HPP

#include <map>
#include <string>
#include <vector>

#include "cmp/constants.hpp"

namespace cmp {

struct ReadoutStage {
    double gain = 1.0;               // power ratio
    double noise_temperature = 0.0;  // K
};

struct ReadoutChain {
    std::vector<ReadoutStage> stages;
    double physical_temperature = 0.0;  // K
    bool quantum_limit_included = false;

    void validate() const;
};

/// sigma_P = k_B * T_n, the noise power per unit bandwidth.
double noise_density(double noise_temperature, const PhysicalConstants& consts = {});

/// hbar*omega/k_B: the quantum-limit contribution to the noise temperature.
double quantum_limit_temperature(double omega, const PhysicalConstants& consts = {});

/// Friis cascade: T1 + T2/G1 + T3/(G1 G2) + ...
double cascade_noise_temperature(const ReadoutChain& chain);

/// sigma_b1 = sqrt(sigma_P / (gyro * mu_B * N_s * omega1 * T_s)).
double tsm_sensitivity(double sigma_p, double spin_count, double omega1,
                       double relaxation_time, const PhysicalConstants& consts = {});

/// sigma_b2 = (2 B0 / (pi r Q)) * sqrt(sigma_P / A_p^2).
double lsm_sensitivity(double bias_field, double mode_pull, double quality_factor,
                       double sigma_p, double pump_power);

/// Radiometer-integrated field limit sigma_b * (bandwidth/time)^(1/4):
/// power sensitivity improves as sqrt(bandwidth*time) and the field goes as
/// the square root of power.
double integrated_field_limit(double sigma_b, double bandwidth, double time);

enum class SensitivityFormula { tsm, lsm };

/// Noise density, sensitivity value and full input echo; recomputing from
/// the echo reproduces the value bit-exactly.
struct SensitivityReport {
    SensitivityFormula formula = SensitivityFormula::tsm;
    double sigma_p = 0.0;      // W/Hz
    double sensitivity = 0.0;  // T/sqrt(Hz)
    std::map<std::string, double> inputs;  // SI
    std::vector<std::string> notes;

    std::string serialize() const;  // flat key = value text
    std::string csv_row() const;
    static std::string csv_header();
};

SensitivityReport make_tsm_report(double noise_temperature, double spin_count,
                                  double omega1, double relaxation_time,
                                  double residual_pump_noise = 0.0,
                                  const PhysicalConstants& consts = {});

SensitivityReport make_lsm_report(double bias_field, double mode_pull,
                                  double quality_factor, double noise_temperature,
                                  double pump_power, double loss_factor = 1.0,
                                  double residual_pump_noise = 0.0,
                                  const PhysicalConstants& consts = {});

SensitivityReport parse_report(const std::string& text);

/// Re-evaluates the report formula from its echoed inputs.
double recompute(const SensitivityReport& report);

}  // namespace cmp

#endif

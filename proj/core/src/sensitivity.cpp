#include "cmp/sensitivity.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "cmp/errors.hpp"

namespace cmp {

void ReadoutChain::validate() const {
    if (stages.empty()) throw ConfigError("readout chain: at least one stage");
    for (const auto& s : stages) {
        if (s.gain <= 0.0) throw ConfigError("readout chain: gains must be positive");
        if (s.noise_temperature < 0.0)
            throw ConfigError("readout chain: negative noise temperature");
    }
}

double noise_density(double noise_temperature, const PhysicalConstants& consts) {
    if (noise_temperature <= 0.0)
        throw ConfigError("noise_density: T_n must be positive");
    return consts.boltzmann * noise_temperature;
}

double quantum_limit_temperature(double omega, const PhysicalConstants& consts) {
    if (omega <= 0.0) throw ConfigError("quantum_limit_temperature: omega must be positive");
    return consts.reduced_planck * omega / consts.boltzmann;
}

double cascade_noise_temperature(const ReadoutChain& chain) {
    chain.validate();
    double t = 0.0, gain = 1.0;
    for (const auto& s : chain.stages) {
        t += s.noise_temperature / gain;
        gain *= s.gain;
    }
    return t;
}

double tsm_sensitivity(double sigma_p, double spin_count, double omega1,
                       double relaxation_time, const PhysicalConstants& consts) {
    if (sigma_p <= 0.0 || spin_count <= 0.0 || omega1 <= 0.0 || relaxation_time <= 0.0)
        throw ConfigError("tsm_sensitivity: arguments must be positive");
    return std::sqrt(sigma_p / (consts.gyromagnetic_ratio * consts.bohr_magneton *
                                spin_count * omega1 * relaxation_time));
}

double lsm_sensitivity(double bias_field, double mode_pull, double quality_factor,
                       double sigma_p, double pump_power) {
    if (mode_pull <= 0.0 || mode_pull > 1.0)
        throw ConfigError("lsm_sensitivity: r must be in (0,1]");
    if (bias_field <= 0.0 || quality_factor <= 0.0 || sigma_p <= 0.0 || pump_power <= 0.0)
        throw ConfigError("lsm_sensitivity: arguments must be positive");
    return 2.0 * bias_field / (pi * mode_pull * quality_factor) *
           std::sqrt(sigma_p / pump_power);
}

double integrated_field_limit(double sigma_b, double bandwidth, double time) {
    if (sigma_b <= 0.0 || bandwidth <= 0.0 || time <= 0.0)
        throw ConfigError("integrated_field_limit: arguments must be positive");
    if (time * bandwidth < 1.0)
        throw ConfigError("integrated_field_limit: need time*bandwidth >= 1");
    return sigma_b * std::pow(bandwidth / time, 0.25);
}

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

const char* kTsmCoherenceNote =
    "valid only for fields with coherence time longer than T_s";
const char* kTsmLengthNote =
    "valid only for fields with coherence length spanning all N_s spins";

}  // namespace

std::string SensitivityReport::serialize() const {
    std::ostringstream os;
    os << "formula = " << (formula == SensitivityFormula::tsm ? "tsm" : "lsm") << "\n";
    os << "sigma_p_w_per_hz = " << fmt(sigma_p) << "\n";
    os << "sensitivity_t_per_sqrt_hz = " << fmt(sensitivity) << "\n";
    for (const auto& [k, v] : inputs) os << k << " = " << fmt(v) << "\n";
    for (const auto& n : notes) os << "note = " << n << "\n";
    return os.str();
}

std::string SensitivityReport::csv_header() {
    return "formula,sigma_p_w_per_hz,sensitivity_t_per_sqrt_hz";
}

std::string SensitivityReport::csv_row() const {
    std::ostringstream os;
    os << (formula == SensitivityFormula::tsm ? "tsm" : "lsm") << ','
       << fmt(sigma_p) << ',' << fmt(sensitivity);
    return os.str();
}

SensitivityReport parse_report(const std::string& text) {
    SensitivityReport rep;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        const auto eq = line.find(" = ");
        if (eq == std::string::npos) continue;
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 3);
        if (key == "formula") {
            rep.formula = value == "lsm" ? SensitivityFormula::lsm : SensitivityFormula::tsm;
        } else if (key == "note") {
            rep.notes.push_back(value);
        } else if (key == "sigma_p_w_per_hz") {
            rep.sigma_p = std::stod(value);
        } else if (key == "sensitivity_t_per_sqrt_hz") {
            rep.sensitivity = std::stod(value);
        } else {
            rep.inputs[key] = std::stod(value);
        }
    }
    return rep;
}

SensitivityReport make_tsm_report(double noise_temperature, double spin_count,
                                  double omega1, double relaxation_time,
                                  double residual_pump_noise,
                                  const PhysicalConstants& consts) {
    SensitivityReport rep;
    rep.formula = SensitivityFormula::tsm;
    rep.sigma_p = noise_density(noise_temperature, consts) + residual_pump_noise;
    rep.sensitivity = tsm_sensitivity(rep.sigma_p, spin_count, omega1,
                                      relaxation_time, consts);
    rep.inputs = {{"noise_temperature_k", noise_temperature},
                  {"residual_pump_noise_w_per_hz", residual_pump_noise},
                  {"spin_count", spin_count},
                  {"omega1_rad_per_s", omega1},
                  {"relaxation_time_s", relaxation_time}};
    rep.notes = {kTsmCoherenceNote, kTsmLengthNote};
    return rep;
}

SensitivityReport make_lsm_report(double bias_field, double mode_pull,
                                  double quality_factor, double noise_temperature,
                                  double pump_power, double loss_factor,
                                  double residual_pump_noise,
                                  const PhysicalConstants& consts) {
    if (loss_factor < 1.0) throw ConfigError("lsm report: loss factor k must be >= 1");
    SensitivityReport rep;
    rep.formula = SensitivityFormula::lsm;
    rep.sigma_p = noise_density(noise_temperature, consts) + residual_pump_noise;
    rep.sensitivity = loss_factor * lsm_sensitivity(bias_field, mode_pull, quality_factor,
                                                    rep.sigma_p, pump_power);
    rep.inputs = {{"bias_field_t", bias_field},
                  {"mode_pull_r", mode_pull},
                  {"quality_factor", quality_factor},
                  {"noise_temperature_k", noise_temperature},
                  {"residual_pump_noise_w_per_hz", residual_pump_noise},
                  {"pump_power_w", pump_power},
                  {"loss_factor_k", loss_factor}};
    return rep;
}

double recompute(const SensitivityReport& report) {
    const auto in = [&](const char* key) {
        const auto it = report.inputs.find(key);
        if (it == report.inputs.end())
            throw ConfigError(std::string("report echo missing key ") + key);
        return it->second;
    };
    PhysicalConstants consts;
    if (report.formula == SensitivityFormula::tsm) {
        const double sp = noise_density(in("noise_temperature_k"), consts) +
                          in("residual_pump_noise_w_per_hz");
        return tsm_sensitivity(sp, in("spin_count"), in("omega1_rad_per_s"),
                               in("relaxation_time_s"), consts);
    }
    const double sp = noise_density(in("noise_temperature_k"), consts) +
                      in("residual_pump_noise_w_per_hz");
    return in("loss_factor_k") * lsm_sensitivity(in("bias_field_t"), in("mode_pull_r"),
                                                 in("quality_factor"), sp,
                                                 in("pump_power_w"));
}

}  // namespace cmp

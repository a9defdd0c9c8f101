#ifndef CMP_CONFIG_HPP
#define CMP_CONFIG_HPP

#include <nlohmann/json_fwd.hpp>
#include <filesystem>
#include <string>

#include "cmp/bloch.hpp"
#include "cmp/hybrid.hpp"
#include "cmp/modulation.hpp"

namespace cmp {

/// Model block: frequencies in the file are ordinary frequencies in Hz and
/// are converted to rad/s here.  Keys: modes[].kind / omega_hz / gamma_hz /
/// field_offset_hz, couplings_hz, bias_field_t, ports{input,output,kappa_hz}.
HybridSystemModel model_from_json(const nlohmann::json& j);
nlohmann::json model_to_json(const HybridSystemModel& model);

HybridSystemModel load_model(const std::filesystem::path& path);
void save_model(const HybridSystemModel& model, const std::filesystem::path& path);

/// Bloch parameter block, Hz / Tesla / seconds external units.
BlochParameters bloch_from_json(const nlohmann::json& j);

/// Modulation drive block; pump power accepted in W ("pump_power_w") or
/// dBm ("pump_power_dbm").
ModulationDrive drive_from_json(const nlohmann::json& j);

double dbm_to_watts(double dbm);

}  // namespace cmp

#endif

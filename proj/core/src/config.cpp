#include "cmp/config.hpp"

#include <nlohmann/json.hpp>
#include <cmath>
#include <fstream>

#include "cmp/csv.hpp"
#include "cmp/errors.hpp"

namespace cmp {

using nlohmann::json;

namespace {

double require_number(const json& j, const std::string& key) {
    if (!j.contains(key) || !j.at(key).is_number())
        throw ConfigError("config: missing or non-numeric key '" + key + "'");
    return j.at(key).get<double>();
}

double number_or(const json& j, const std::string& key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number())
        throw ConfigError("config: non-numeric key '" + key + "'");
    return j.at(key).get<double>();
}

}  // namespace

double dbm_to_watts(double dbm) { return 1e-3 * std::pow(10.0, dbm / 10.0); }

HybridSystemModel model_from_json(const json& j) {
    HybridSystemModel model;
    if (!j.contains("modes") || !j.at("modes").is_array() || j.at("modes").empty())
        throw ConfigError("config: model needs a non-empty modes[] array");
    model.bias_field = require_number(j, "bias_field_t");

    for (const auto& jm : j.at("modes")) {
        OscillatorMode m;
        const std::string kind = jm.value("kind", "");
        if (kind == "cavity") m.kind = ModeKind::cavity;
        else if (kind == "magnon") m.kind = ModeKind::magnon;
        else throw ConfigError("config: mode kind must be 'cavity' or 'magnon'");
        m.gamma = two_pi * require_number(jm, "gamma_hz");
        if (m.kind == ModeKind::cavity) {
            m.omega = two_pi * require_number(jm, "omega_hz");
        } else {
            if (jm.contains("omega_hz"))
                throw ConfigError("config: magnon omega_hz is derived from bias_field_t; "
                                  "set field_offset_hz instead");
            m.field_offset = two_pi * number_or(jm, "field_offset_hz", 0.0);
        }
        model.modes.push_back(m);
    }

    const auto n = static_cast<Eigen::Index>(model.modes.size());
    model.couplings = Eigen::MatrixXd::Zero(n, n);
    if (j.contains("couplings_hz")) {
        const auto& rows = j.at("couplings_hz");
        if (!rows.is_array() || static_cast<Eigen::Index>(rows.size()) != n)
            throw ConfigError("config: couplings_hz must be an NxN matrix");
        for (Eigen::Index a = 0; a < n; ++a) {
            const auto& row = rows.at(static_cast<std::size_t>(a));
            if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n)
                throw ConfigError("config: couplings_hz must be an NxN matrix");
            for (Eigen::Index b = 0; b < n; ++b)
                model.couplings(a, b) =
                    two_pi * row.at(static_cast<std::size_t>(b)).get<double>();
        }
    }

    model.port_couplings.assign(model.modes.size(), 0.0);
    if (j.contains("ports")) {
        const auto& p = j.at("ports");
        if (p.contains("kappa_hz")) {
            const auto& ks = p.at("kappa_hz");
            if (!ks.is_array() || static_cast<Eigen::Index>(ks.size()) != n)
                throw ConfigError("config: ports.kappa_hz must list one rate per mode");
            for (Eigen::Index a = 0; a < n; ++a)
                model.port_couplings[static_cast<std::size_t>(a)] =
                    two_pi * ks.at(static_cast<std::size_t>(a)).get<double>();
        }
        model.input_port = p.value("input", 0);
        model.output_port = p.value("output", 0);
    }

    model.set_bias_field(model.bias_field);
    model.validate();
    return model;
}

json model_to_json(const HybridSystemModel& model) {
    json j;
    j["bias_field_t"] = model.bias_field;
    j["modes"] = json::array();
    for (const auto& m : model.modes) {
        json jm;
        jm["kind"] = m.kind == ModeKind::cavity ? "cavity" : "magnon";
        jm["gamma_hz"] = m.gamma / two_pi;
        if (m.kind == ModeKind::cavity) jm["omega_hz"] = m.omega / two_pi;
        else jm["field_offset_hz"] = m.field_offset / two_pi;
        j["modes"].push_back(jm);
    }
    const auto n = static_cast<Eigen::Index>(model.size());
    json rows = json::array();
    for (Eigen::Index a = 0; a < n; ++a) {
        json row = json::array();
        for (Eigen::Index b = 0; b < n; ++b) row.push_back(model.couplings(a, b) / two_pi);
        rows.push_back(row);
    }
    j["couplings_hz"] = rows;
    json ports;
    json ks = json::array();
    for (double k : model.port_couplings) ks.push_back(k / two_pi);
    ports["kappa_hz"] = ks;
    ports["input"] = model.input_port;
    ports["output"] = model.output_port;
    j["ports"] = ports;
    return j;
}

HybridSystemModel load_model(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(read_text(path));
    } catch (const json::parse_error& e) {
        throw ConfigError("config: cannot parse " + path.string() + ": " + e.what());
    }
    return model_from_json(j.contains("model") ? j.at("model") : j);
}

void save_model(const HybridSystemModel& model, const std::filesystem::path& path) {
    write_text(model_to_json(model).dump(2) + "\n", path);
}

BlochParameters bloch_from_json(const json& j) {
    BlochParameters p;
    p.bias_field = require_number(j, "bias_field_t");
    p.drive_amplitude = require_number(j, "b1_t");
    p.drive_omega = two_pi * require_number(j, "omega1_hz");
    p.relaxation_time = require_number(j, "t_s_s");
    p.equilibrium_m = require_number(j, "m0_a_per_m");
    p.spin_density = number_or(j, "spin_density_per_m3", 0.0);
    p.sample_volume = number_or(j, "sample_volume_m3", 0.0);
    const std::string pol = j.value("polarization", "linear");
    if (pol == "linear") p.polarization = DrivePolarization::linear;
    else if (pol == "circular") p.polarization = DrivePolarization::circular;
    else throw ConfigError("config: polarization must be 'linear' or 'circular'");
    p.validate();
    return p;
}

ModulationDrive drive_from_json(const json& j) {
    ModulationDrive d;
    d.b2 = require_number(j, "b2_t");
    d.omega2 = two_pi * require_number(j, "omega2_hz");
    d.pump_omega = two_pi * require_number(j, "pump_hz");
    if (j.contains("pump_power_w") && j.contains("pump_power_dbm"))
        throw ConfigError("config: give pump power in W or dBm, not both");
    if (j.contains("pump_power_dbm"))
        d.pump_power = dbm_to_watts(require_number(j, "pump_power_dbm"));
    else
        d.pump_power = require_number(j, "pump_power_w");
    return d;
}

}  // namespace cmp

#include "cmp/workbench.hpp"

#include <nlohmann/json.hpp>
#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "cmp/bloch.hpp"
#include "cmp/config.hpp"
#include "cmp/csv.hpp"
#include "cmp/errors.hpp"
#include "cmp/fitting.hpp"
#include "cmp/hybrid.hpp"
#include "cmp/modulation.hpp"
#include "cmp/sensitivity.hpp"

namespace cmp {

using nlohmann::json;
namespace fs = std::filesystem;

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

namespace {

std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

const json& block(const json& j, const std::string& key) {
    if (!j.contains(key) || !j.at(key).is_object())
        throw ConfigError("config: missing '" + key + "' block");
    return j.at(key);
}

double num(const json& j, const std::string& key) {
    if (!j.contains(key) || !j.at(key).is_number())
        throw ConfigError("config: missing or non-numeric key '" + key + "'");
    return j.at(key).get<double>();
}

double num_or(const json& j, const std::string& key, double fallback) {
    return j.contains(key) ? num(j, key) : fallback;
}

// Plans artifacts before any computation, writes them afterwards.
class ArtifactSink {
public:
    ArtifactSink(fs::path dir, bool force) : dir_(std::move(dir)), force_(force) {}

    void plan(const std::string& name) {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec) throw IoError("cannot create output directory " + dir_.string());
        if (!force_ && fs::exists(dir_ / name))
            throw ConfigError("output exists, pass --force-overwrite: " +
                              (dir_ / name).string());
        planned_.push_back(name);
    }

    void write(const std::string& name, const std::string& content) {
        if (std::find(planned_.begin(), planned_.end(), name) == planned_.end())
            throw IoError("internal: unplanned artifact " + name);
        write_text(content, dir_ / name);
        manifest_.entries.push_back({name, hex64(fnv1a64(content))});
    }

    ArtifactManifest finish() {
        plan("manifest.json");
        ArtifactManifest full = manifest_;
        write_text(full.serialize(), dir_ / "manifest.json");
        return full;
    }

private:
    fs::path dir_;
    bool force_;
    std::vector<std::string> planned_;
    ArtifactManifest manifest_;
};

// ---- gnuplot emitters ----------------------------------------------------

std::string plot_matrix(const SpectrumMap& map) {
    std::ostringstream os;
    os << "# bias_field_T probe_frequency_Hz s21_magnitude\n";
    for (std::size_t i = 0; i < map.field_axis.size(); ++i) {
        for (std::size_t j = 0; j < map.frequency_axis.size(); ++j)
            os << format_number(map.field_axis[i]) << ' '
               << format_number(map.frequency_axis[j] / two_pi) << ' '
               << format_number(std::abs(map.values(static_cast<Eigen::Index>(i),
                                                    static_cast<Eigen::Index>(j))))
               << '\n';
        os << '\n';
    }
    return os.str();
}

std::string plot_bare_modes(const HybridSystemModel& model,
                            const std::vector<double>& fields) {
    std::ostringstream os;
    os << "# bias_field_T bare_mode_frequency_Hz (one block per mode)\n";
    for (const auto& m : model.modes) {
        for (double b : fields) {
            const double w = m.kind == ModeKind::cavity
                                 ? m.omega
                                 : kittel_frequency(b, m.field_offset, model.constants);
            os << format_number(b) << ' ' << format_number(w / two_pi) << '\n';
        }
        os << '\n';
    }
    return os.str();
}

std::string plot_sidebands(const SidebandSpectrum& spec) {
    std::ostringstream os;
    os << "# offset_from_pump_Hz power_dBc\n";
    const double carrier = spec.power(0);
    for (const auto& c : spec.components) {
        const double p = std::norm(c.amplitude);
        if (p <= 0.0 || carrier <= 0.0) continue;
        os << format_number(c.n * spec.omega2 / two_pi) << ' '
           << format_number(10.0 * std::log10(p / carrier)) << '\n';
    }
    return os.str();
}

std::string plot_trajectory(const BlochTrajectory& traj) {
    std::ostringstream os;
    os << "# time_s Mx_A_per_m My_A_per_m Mz_A_per_m\n";
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        const auto& m = traj.magnetization[i];
        os << format_number(traj.times[i]) << ' ' << format_number(m.x()) << ' '
           << format_number(m.y()) << ' ' << format_number(m.z()) << '\n';
    }
    return os.str();
}

std::string plot_sweep(const std::string& parameter,
                       const std::vector<std::pair<double, double>>& points) {
    std::ostringstream os;
    os << "# " << parameter << " sensitivity_T_per_sqrt_Hz\n";
    for (const auto& [x, y] : points)
        os << format_number(x) << ' ' << format_number(y) << '\n';
    return os.str();
}

// ---- task helpers --------------------------------------------------------

std::vector<double> grid_from_json(const json& g, const std::string& prefix,
                                   double unit) {
    const double lo = num(g, prefix + "_min") * unit;
    const double hi = num(g, prefix + "_max") * unit;
    const auto n = static_cast<std::size_t>(num_or(g, prefix + "_points", 201));
    if (!(hi > lo)) throw ConfigError("config: empty grid for " + prefix);
    return linspace(lo, hi, n);
}

double sigma_p_from_json(const json& j) {
    if (j.contains("sigma_p_w_per_hz")) return num(j, "sigma_p_w_per_hz");
    if (j.contains("chain")) {
        ReadoutChain chain;
        for (const auto& s : j.at("chain").at("stages"))
            chain.stages.push_back({num(s, "gain"), num(s, "noise_temperature_k")});
        return noise_density(cascade_noise_temperature(chain)) +
               num_or(j, "residual_pump_noise_w_per_hz", 0.0);
    }
    return noise_density(num(j, "noise_temperature_k")) +
           num_or(j, "residual_pump_noise_w_per_hz", 0.0);
}

void run_tsm(const json& root, ArtifactSink& sink) {
    const json& j = block(root, "tsm");
    sink.plan("report.txt");
    sink.plan("report.csv");
    const bool sweep = root.contains("sweep");
    if (sweep) { sink.plan("sweep.csv"); sink.plan("sweep.dat"); }

    const double tn = num_or(j, "noise_temperature_k", 0.0);
    SensitivityReport rep;
    if (j.contains("chain") || !j.contains("noise_temperature_k")) {
        const double sp = sigma_p_from_json(j);
        rep = make_tsm_report(sp / PhysicalConstants{}.boltzmann, num(j, "spin_count"),
                              two_pi * num(j, "omega1_hz"), num(j, "t_s_s"));
    } else {
        rep = make_tsm_report(tn, num(j, "spin_count"), two_pi * num(j, "omega1_hz"),
                              num(j, "t_s_s"),
                              num_or(j, "residual_pump_noise_w_per_hz", 0.0));
    }
    sink.write("report.txt", rep.serialize());
    sink.write("report.csv", SensitivityReport::csv_header() + "\n" + rep.csv_row() + "\n");

    if (sweep) {
        const json& s = root.at("sweep");
        const std::string parameter = s.at("parameter").get<std::string>();
        const auto n = static_cast<std::size_t>(num_or(s, "points", 51));
        const double lo = num(s, "from"), hi = num(s, "to");
        const bool log_axis = s.value("log", false);
        std::ostringstream csv;
        csv << parameter << ",sensitivity_t_per_sqrt_hz\n";
        std::vector<std::pair<double, double>> pts;
        for (std::size_t k = 0; k < n; ++k) {
            const double f = static_cast<double>(k) / static_cast<double>(n - 1);
            const double x = log_axis ? lo * std::pow(hi / lo, f) : lo + (hi - lo) * f;
            json jj = j;
            jj[parameter] = x;
            const double sens = tsm_sensitivity(sigma_p_from_json(jj), num(jj, "spin_count"),
                                                two_pi * num(jj, "omega1_hz"),
                                                num(jj, "t_s_s"));
            csv << format_number(x) << ',' << format_number(sens) << '\n';
            pts.emplace_back(x, sens);
        }
        sink.write("sweep.csv", csv.str());
        sink.write("sweep.dat", plot_sweep(parameter, pts));
    }
}

void run_lsm(const json& root, ArtifactSink& sink) {
    const json& j = block(root, "lsm");
    sink.plan("report.txt");
    sink.plan("report.csv");
    double pump = j.contains("pump_power_dbm") ? dbm_to_watts(num(j, "pump_power_dbm"))
                                               : num(j, "pump_power_w");
    double tn;
    if (j.contains("noise_temperature_k")) {
        tn = num(j, "noise_temperature_k");
    } else {
        tn = num(j, "sigma_p_w_per_hz") / PhysicalConstants{}.boltzmann;
    }
    const SensitivityReport rep = make_lsm_report(
        num(j, "bias_field_t"), num_or(j, "mode_pull_r", 0.5), num(j, "quality_factor"),
        tn, pump, num_or(j, "loss_factor_k", 1.0),
        num_or(j, "residual_pump_noise_w_per_hz", 0.0));
    sink.write("report.txt", rep.serialize());
    sink.write("report.csv", SensitivityReport::csv_header() + "\n" + rep.csv_row() + "\n");
}

void run_scan_limit(const json& root, ArtifactSink& sink) {
    const json& j = block(root, "scan");
    sink.plan("limit.txt");
    double sigma_b;
    if (j.contains("sensitivity_t_per_sqrt_hz")) {
        sigma_b = num(j, "sensitivity_t_per_sqrt_hz");
    } else {
        const json& t = block(j, "tsm");
        sigma_b = tsm_sensitivity(sigma_p_from_json(t), num(t, "spin_count"),
                                  two_pi * num(t, "omega1_hz"), num(t, "t_s_s"));
    }
    const double bandwidth = num(j, "bandwidth_hz");
    const double time = num(j, "integration_time_s");
    const double limit = integrated_field_limit(sigma_b, bandwidth, time);
    std::ostringstream os;
    os << "method = radiometer estimate\n";
    os << "sensitivity_t_per_sqrt_hz = " << format_number(sigma_b) << "\n";
    os << "bandwidth_hz = " << format_number(bandwidth) << "\n";
    os << "integration_time_s = " << format_number(time) << "\n";
    os << "field_limit_t = " << format_number(limit) << "\n";
    sink.write("limit.txt", os.str());
}

void run_anticrossing(const json& root, ArtifactSink& sink) {
    HybridSystemModel model = model_from_json(block(root, "model"));
    sink.plan("map.csv");
    sink.plan("map_phase.csv");
    sink.plan("map.dat");
    sink.plan("bare_modes.dat");

    std::vector<double> fields, freqs;
    if (root.contains("grid")) {
        const json& g = root.at("grid");
        fields = grid_from_json(g, "field_t", 1.0);
        freqs = grid_from_json(g, "freq_hz", two_pi);
    } else {
        // default: 201x201 spanning +-5g around the crossing
        const double g_max = model.couplings.size() ? model.couplings.maxCoeff() : 0.0;
        double omega_c = 0.0, offset = 0.0;
        for (const auto& m : model.modes) {
            if (m.kind == ModeKind::cavity && omega_c == 0.0) omega_c = m.omega;
            if (m.kind == ModeKind::magnon) offset = m.field_offset;
        }
        const double gyro = model.constants.gyromagnetic_ratio;
        const double crossing = (omega_c - offset) / gyro;
        const double span = std::max(5.0 * g_max, 1e-4 * omega_c);
        fields = linspace(crossing - span / gyro, crossing + span / gyro, 201);
        freqs = linspace(omega_c - span, omega_c + span, 201);
    }

    const SpectrumMap map = anticrossing_map(model, fields, freqs);
    sink.write("map.csv", spectrum_map_csv(map, false));
    sink.write("map_phase.csv", spectrum_map_csv(map, true));
    sink.write("map.dat", plot_matrix(map));
    sink.write("bare_modes.dat", plot_bare_modes(model, fields));
}

void run_bloch(const json& root, ArtifactSink& sink) {
    const json& j = block(root, "bloch");
    sink.plan("trajectory.csv");
    sink.plan("trajectory.dat");
    const BlochParameters params = bloch_from_json(j);
    const double duration = num(j, "duration_s");
    const double max_step = num(j, "max_step_s");
    std::optional<Eigen::Vector3d> initial;
    if (j.contains("initial_m_a_per_m")) {
        const auto& v = j.at("initial_m_a_per_m");
        if (!v.is_array() || v.size() != 3)
            throw ConfigError("config: initial_m_a_per_m must be a 3-vector");
        initial = Eigen::Vector3d(v.at(0).get<double>(), v.at(1).get<double>(),
                                  v.at(2).get<double>());
    }
    const BlochTrajectory traj = integrate_bloch(params, duration, max_step, initial);
    sink.write("trajectory.csv", trajectory_csv(traj));
    sink.write("trajectory.dat", plot_trajectory(traj));
}

void run_sidebands(const json& root, ArtifactSink& sink) {
    HybridSystemModel model = model_from_json(block(root, "model"));
    const ModulationDrive drive = drive_from_json(block(root, "drive"));
    const json& j = block(root, "sidebands");
    sink.plan("spectrum.csv");
    sink.plan("spectrum.dat");

    const std::string method = j.value("method", "time");
    SidebandSpectrum spec;
    if (method == "time") {
        const auto n_periods = static_cast<int>(num_or(j, "n_periods", 8));
        spec = simulate_modulated_pmhs(model, drive, n_periods).spectrum;
    } else if (method == "harmonic-balance") {
        const auto nh = static_cast<int>(num_or(j, "n_harmonics", 20));
        spec = harmonic_balance_sidebands(model, drive, nh);
    } else {
        throw ConfigError("config: sidebands.method must be 'time' or 'harmonic-balance'");
    }
    if (j.contains("waveguide")) {
        const json& w = j.at("waveguide");
        const double att = std::pow(10.0, num(w, "attenuation_db") / 10.0);
        spec = waveguide_filter(spec, two_pi * num(w, "cutoff_hz"), att);
    }
    sink.write("spectrum.csv", sidebands_csv(spec));
    sink.write("spectrum.dat", plot_sidebands(spec));
}

FitParameter fit_parameter_from_json(const json& p) {
    FitParameter fp;
    const std::string kind = p.at("param").get<std::string>();
    if (kind == "cavity_omega") fp.kind = FitParamKind::cavity_omega;
    else if (kind == "gamma") fp.kind = FitParamKind::mode_gamma;
    else if (kind == "field_offset") fp.kind = FitParamKind::field_offset;
    else if (kind == "coupling") fp.kind = FitParamKind::coupling;
    else throw ConfigError("config: unknown fit parameter kind '" + kind + "'");
    fp.i = static_cast<int>(num(p, "i"));
    fp.j = static_cast<int>(num_or(p, "j", 0.0));
    fp.lower = two_pi * num(p, "lower_hz");
    fp.upper = two_pi * num(p, "upper_hz");
    fp.free = true;
    return fp;
}

void run_fit(const json& root, const RunConfig& cfg, ArtifactSink& sink) {
    const json& j = block(root, "fit");
    sink.plan("fit_result.txt");
    sink.plan("residual_map.csv");

    FitProblem problem;
    problem.model = model_from_json(block(root, "model"));
    if (j.contains("data_csv")) {
        fs::path p = j.at("data_csv").get<std::string>();
        if (p.is_relative()) p = cfg.config_dir / p;
        if (!fs::exists(p)) throw ConfigError("config: fit data file not found: " + p.string());
        problem.data = read_spectrum_map(p);
    } else if (j.contains("synthetic")) {
        const json& s = j.at("synthetic");
        HybridSystemModel truth = model_from_json(block(s, "model"));
        const json& g = block(s, "grid");
        problem.data = anticrossing_map(truth, grid_from_json(g, "field_t", 1.0),
                                        grid_from_json(g, "freq_hz", two_pi));
        const double noise = num_or(s, "noise_fraction", 0.0);
        if (noise > 0.0) {
            std::mt19937_64 rng(cfg.seed);
            std::normal_distribution<double> gauss(0.0, noise);
            for (Eigen::Index a = 0; a < problem.data.values.rows(); ++a)
                for (Eigen::Index b = 0; b < problem.data.values.cols(); ++b)
                    problem.data.values(a, b) *= (1.0 + gauss(rng));
        }
    } else {
        throw ConfigError("config: fit needs data_csv or synthetic block");
    }
    if (!j.contains("free") || !j.at("free").is_array())
        throw ConfigError("config: fit.free[] parameter list required");
    for (const auto& p : j.at("free"))
        problem.parameters.push_back(fit_parameter_from_json(p));
    problem.loss = j.value("loss", "magnitude") == "log" ? FitLoss::log_magnitude
                                                         : FitLoss::magnitude;
    if (j.value("seed_from_ridges", false))
        problem.model = seed_from_ridges(problem.data, problem.model);

    const FitResult result = fit_anticrossing(problem);
    sink.write("fit_result.txt", result.serialize());
    sink.write("residual_map.csv",
               spectrum_map_csv(residual_map(problem, result.model), false));
}

}  // namespace

std::string ArtifactManifest::serialize() const {
    json j = json::array();
    for (const auto& e : entries) j.push_back({{"file", e.filename}, {"digest", e.digest}});
    return j.dump(2) + "\n";
}

RunConfig RunConfig::load(const fs::path& config_path, const fs::path& output_dir,
                          std::uint64_t seed, bool force_overwrite) {
    if (!fs::exists(config_path))
        throw ConfigError("config file not found: " + config_path.string());
    RunConfig cfg;
    cfg.raw_json = read_text(config_path);
    json j;
    try {
        j = json::parse(cfg.raw_json);
    } catch (const json::parse_error& e) {
        throw ConfigError("cannot parse " + config_path.string() + ": " + e.what());
    }
    if (!j.contains("task") || !j.at("task").is_string())
        throw ConfigError("config: top-level 'task' string required");
    cfg.task = j.at("task").get<std::string>();
    cfg.config_dir = fs::absolute(config_path).parent_path();
    cfg.output_dir = output_dir;
    cfg.seed = seed;
    cfg.force_overwrite = force_overwrite;
    return cfg;
}

ArtifactManifest run(const RunConfig& config) {
    const json root = json::parse(config.raw_json);
    ArtifactSink sink(config.output_dir, config.force_overwrite);
    if (config.task == "tsm-sensitivity") run_tsm(root, sink);
    else if (config.task == "lsm-sensitivity") run_lsm(root, sink);
    else if (config.task == "scan-limit") run_scan_limit(root, sink);
    else if (config.task == "anticrossing") run_anticrossing(root, sink);
    else if (config.task == "bloch") run_bloch(root, sink);
    else if (config.task == "sidebands") run_sidebands(root, sink);
    else if (config.task == "fit") run_fit(root, config, sink);
    else throw ConfigError("config: unknown task '" + config.task + "'");
    return sink.finish();
}

bool verify_manifest(const ArtifactManifest& manifest, const fs::path& output_dir) {
    for (const auto& e : manifest.entries) {
        const fs::path p = output_dir / e.filename;
        if (!fs::exists(p)) return false;
        if (hex64(fnv1a64(read_text(p))) != e.digest) return false;
    }
    return true;
}

}  // namespace cmp

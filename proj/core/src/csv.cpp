#include "cmp/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <vector>

#include "cmp/constants.hpp"
#include "cmp/errors.hpp"

namespace cmp {

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

void write_text(const std::string& text, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path.string());
    os << text;
    if (!os) throw IoError("write failed: " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open for reading: " + path.string());
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

std::string spectrum_map_csv(const SpectrumMap& map, bool phase) {
    std::ostringstream os;
    os << "field_t";
    for (double f : map.frequency_axis) os << ',' << format_number(f / two_pi);
    os << '\n';
    for (std::size_t i = 0; i < map.field_axis.size(); ++i) {
        os << format_number(map.field_axis[i]);
        for (std::size_t j = 0; j < map.frequency_axis.size(); ++j) {
            const auto v = map.values(static_cast<Eigen::Index>(i),
                                      static_cast<Eigen::Index>(j));
            os << ',' << format_number(phase ? std::arg(v) : std::abs(v));
        }
        os << '\n';
    }
    return os.str();
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, sep)) out.push_back(tok);
    return out;
}

}  // namespace

void write_spectrum_map(const SpectrumMap& map, const std::filesystem::path& magnitude_path,
                        const std::filesystem::path& phase_path) {
    map.validate();
    write_text(spectrum_map_csv(map, false), magnitude_path);
    if (!phase_path.empty()) write_text(spectrum_map_csv(map, true), phase_path);
}

SpectrumMap read_spectrum_map(const std::filesystem::path& magnitude_path) {
    std::ifstream is(magnitude_path);
    if (!is) throw IoError("cannot open for reading: " + magnitude_path.string());
    std::string line;
    if (!std::getline(is, line))
        throw IoError("empty spectrum map file: " + magnitude_path.string());
    SpectrumMap map;
    const auto header = split(line, ',');
    for (std::size_t j = 1; j < header.size(); ++j)
        map.frequency_axis.push_back(std::stod(header[j]) * two_pi);
    std::vector<std::vector<double>> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto cells = split(line, ',');
        if (cells.size() != header.size())
            throw IoError("ragged spectrum map row in " + magnitude_path.string());
        map.field_axis.push_back(std::stod(cells[0]));
        std::vector<double> row;
        for (std::size_t j = 1; j < cells.size(); ++j) row.push_back(std::stod(cells[j]));
        rows.push_back(std::move(row));
    }
    map.values.resize(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(map.frequency_axis.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            map.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    map.validate();
    return map;
}

std::string trajectory_csv(const BlochTrajectory& traj) {
    std::ostringstream os;
    os << "t_s,mx_a_per_m,my_a_per_m,mz_a_per_m\n";
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        const auto& m = traj.magnetization[i];
        os << format_number(traj.times[i]) << ',' << format_number(m.x()) << ','
           << format_number(m.y()) << ',' << format_number(m.z()) << '\n';
    }
    return os.str();
}

void write_trajectory(const BlochTrajectory& traj, const std::filesystem::path& path) {
    write_text(trajectory_csv(traj), path);
}

std::string sidebands_csv(const SidebandSpectrum& spectrum) {
    std::ostringstream os;
    os << "harmonic,offset_hz,power_w,power_dbc\n";
    const double carrier = spectrum.power(0);
    for (const auto& c : spectrum.components) {
        const double p = std::norm(c.amplitude);
        const double dbc = carrier > 0.0 && p > 0.0
                               ? 10.0 * std::log10(p / carrier)
                               : -std::numeric_limits<double>::infinity();
        os << c.n << ',' << format_number(c.n * spectrum.omega2 / two_pi) << ','
           << format_number(p) << ',' << format_number(dbc) << '\n';
    }
    return os.str();
}

void write_sidebands(const SidebandSpectrum& spectrum, const std::filesystem::path& path) {
    write_text(sidebands_csv(spectrum), path);
}

}  // namespace cmp

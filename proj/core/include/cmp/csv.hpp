#ifndef CMP_CSV_HPP
#define CMP_CSV_HPP

#include <filesystem>
#include <string>

#include "cmp/bloch.hpp"
#include "cmp/modulation.hpp"
#include "cmp/spectrum.hpp"

namespace cmp {

/// Magnitude CSV: header row of frequencies in Hz, first column the field
/// axis in Tesla, cells |S21| (linear).  The optional companion carries the
/// phase in radians with the same layout.
void write_spectrum_map(const SpectrumMap& map, const std::filesystem::path& magnitude_path,
                        const std::filesystem::path& phase_path = {});

std::string spectrum_map_csv(const SpectrumMap& map, bool phase);
std::string trajectory_csv(const BlochTrajectory& traj);
std::string sidebands_csv(const SidebandSpectrum& spectrum);

/// Reads the magnitude CSV layout written above (phase lost, stored as
/// real magnitudes); external VNA exports converted to that layout load
/// the same way.
SpectrumMap read_spectrum_map(const std::filesystem::path& magnitude_path);

/// t, Mx, My, Mz columns.
void write_trajectory(const BlochTrajectory& traj, const std::filesystem::path& path);

/// harmonic index, offset Hz, power W, power dBc.
void write_sidebands(const SidebandSpectrum& spectrum, const std::filesystem::path& path);

void write_text(const std::string& text, const std::filesystem::path& path);
std::string read_text(const std::filesystem::path& path);

/// Deterministic shortest-roundtrip number formatting used by every
/// artifact writer.
std::string format_number(double v);

}  // namespace cmp

#endif

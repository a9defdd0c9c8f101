#ifndef CMP_CONSTANTS_HPP
#define CMP_CONSTANTS_HPP

#include <numbers>
#include <stdexcept>

namespace cmp {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Electromagnetic and thermodynamic constants used throughout the
/// workbench.  All values are SI.  The electron gyromagnetic ratio is the
/// angular-frequency-per-field value 2*pi*28 GHz/T.
struct PhysicalConstants {
    double gyromagnetic_ratio = two_pi * 28.0e9;  // rad/s/T
    double bohr_magneton = 9.274e-24;             // J/T
    double boltzmann = 1.3807e-23;                // J/K
    double reduced_planck = 1.0546e-34;           // J*s

    void validate() const {
        if (gyromagnetic_ratio <= 0.0 || bohr_magneton <= 0.0 ||
            boltzmann <= 0.0 || reduced_planck <= 0.0)
            throw std::invalid_argument("PhysicalConstants: all constants must be positive");
    }
};

// Vacuum permeability, used by the coupling <-> spin-number conversion.
inline constexpr double vacuum_permeability = 4.0e-7 * pi;  // T*m/A

}  // namespace cmp

#endif

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>

namespace spdckit {

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kSpeedOfLight = 299792458.0; // m/s

/// sin(x)/x with the removable singularity filled in.
inline double sinc(double x) {
    if (std::abs(x) < 1e-8) return 1.0 - x * x / 6.0;
    return std::sin(x) / x;
}

/// Angular frequency (rad/s) of a vacuum wavelength in um.
inline double omega_from_wavelength_um(double wavelength_um) {
    return 2.0 * kPi * kSpeedOfLight / (wavelength_um * 1e-6);
}

/// Vacuum wavelength (um) of an angular frequency in rad/s.
inline double wavelength_um_from_omega(double omega_rad_s) {
    return 2.0 * kPi * kSpeedOfLight / omega_rad_s * 1e6;
}

/// Brent's method on [a, b]; requires f(a) and f(b) of opposite sign.
/// Converges the bracket to |b - a| <= 2*xtol. Throws NoRootError if the
/// bracket does not straddle a sign change.
double find_root(const std::function<double(double)>& f, double a, double b,
                 double xtol = 1e-12, int max_iterations = 200);

/// Deterministic 64-bit mix; used to derive independent RNG stream seeds
/// (stream index -> seed) from a master seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Shortest round-trip decimal rendering, locale-independent.
std::string format_double(double value);

} // namespace spdckit

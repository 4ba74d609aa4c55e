#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace spdckit {

enum class Axis { X, Y, Z };

Axis axis_from_string(std::string_view s);
const char* to_string(Axis axis);

/// One principal-axis dispersion model: a room-temperature Sellmeier form
/// plus an additive temperature correction dn(lambda, T - T_ref).
///
/// Forms:
///   sellmeier_quotient   n^2 = c0 + c1*L + sum_j p_j/(L - q_j), L = lambda^2,
///                        coefficients laid out [c0, c1, p1, q1, p2, q2, ...]
/// Temperature forms:
///   none                 index is temperature independent
///   inverse_lambda_poly  dn = n1(lambda)*dT + n2(lambda)*dT^2 with
///                        nk = a0 + a1/lambda + a2/lambda^2 + a3/lambda^3;
///                        temp_coefficients = [a0..a3 of n1, a0..a3 of n2]
struct SellmeierAxisModel {
    std::string form = "sellmeier_quotient";
    std::vector<double> coefficients;
    std::string temp_form = "none";
    std::vector<double> temp_coefficients;
    double range_min_um = 0.0;
    double range_max_um = 0.0;
    double reference_temp_c = 25.0;
    double temp_min_c = 0.0;
    double temp_max_c = 200.0;

    /// n(lambda, T). Throws RangeError outside the valid wavelength or
    /// temperature range; never extrapolates silently.
    double index(double wavelength_um, double temperature_c) const;

    /// Structural sanity check (form known, coefficient counts, range order).
    void validate(const std::string& context) const;

    bool operator==(const SellmeierAxisModel&) const = default;
};

struct NonlinearCoefficient {
    std::string label;      // e.g. "d24"
    double value_pm_per_v = 0.0;
    std::string citation;   // provenance, required

    bool operator==(const NonlinearCoefficient&) const = default;
};

/// A named crystal: one axis model per principal axis (uniaxial crystals
/// alias two axes to the ordinary model), nonlinear tensor entries, and
/// coefficient provenance.
struct CrystalModel {
    std::string name;
    SellmeierAxisModel x, y, z;
    std::vector<NonlinearCoefficient> d_coefficients;
    double transparency_min_um = 0.0;
    double transparency_max_um = 0.0;
    std::string citation;

    const SellmeierAxisModel& axis(Axis a) const;

    /// Look up a d_ij entry by label; DomainError if absent.
    const NonlinearCoefficient& d(std::string_view label) const;

    bool operator==(const CrystalModel&) const = default;
};

/// n(lambda, T) along a principal axis.
double refractive_index(const CrystalModel& crystal, Axis axis,
                        double wavelength_um, double temperature_c);

/// dn/dlambda (per um) by central differences with step
/// h = max(1e-4 um, 1e-6*lambda); requires [lambda-h, lambda+h] in range.
double index_derivative(const CrystalModel& crystal, Axis axis,
                        double wavelength_um, double temperature_c);

/// Parse the key-value crystal format. Rejects unknown or duplicate keys
/// with the offending line number. `origin` labels error messages.
CrystalModel parse_crystal(std::string_view text,
                           std::string_view origin = "<string>");

CrystalModel load_crystal(const std::filesystem::path& path);

/// Canonical serialization; parse(serialize(m)) == m.
std::string serialize_crystal(const CrystalModel& crystal);

} // namespace spdckit

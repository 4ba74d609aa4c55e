#pragma once

#include <optional>
#include <string>
#include <vector>

#include "spdckit/crystal.hpp"

namespace spdckit {

/// Pump/signal/idler wavelengths (um). Always satisfies energy conservation
/// 1/lp = 1/ls + 1/li to 1e-9 relative; use the factories to derive the
/// third wavelength exactly.
class WavelengthTriple {
public:
    WavelengthTriple(double pump_um, double signal_um, double idler_um);

    static WavelengthTriple from_pump_signal(double pump_um, double signal_um);
    static WavelengthTriple from_signal_idler(double signal_um, double idler_um);
    /// ls = li = wavelength, lp = wavelength/2.
    static WavelengthTriple degenerate(double wavelength_um);

    double pump_um() const { return pump_um_; }
    double signal_um() const { return signal_um_; }
    double idler_um() const { return idler_um_; }

private:
    double pump_um_, signal_um_, idler_um_;
};

enum class PmKind { Bpm, Qpm, Ncpm };

PmKind pm_kind_from_string(std::string_view s);
const char* to_string(PmKind kind);

/// Propagation direction for critical (angle-tuned) phase matching.
/// The walk-off angle is an input, never computed here.
struct BpmGeometry {
    double theta_rad = 0.0;    // polar, [0, pi]
    double phi_rad = 0.0;      // azimuthal, [0, 2pi)
    double walkoff_rad = 0.0;  // rho

    void validate() const;
};

/// Phase-matching configuration: technique, polarization triple
/// (pump, signal, idler) mapped to principal axes, and the geometry or
/// poling parameters the technique needs.
struct InteractionSpec {
    PmKind kind = PmKind::Ncpm;
    Axis pump_axis = Axis::Y;
    Axis signal_axis = Axis::Y;
    Axis idler_axis = Axis::Z;
    std::optional<Axis> propagation_axis;      // QPM / NCPM
    std::optional<BpmGeometry> geometry;       // BPM
    std::optional<double> poling_period_um;    // QPM
    std::optional<int> qpm_order;              // QPM

    static InteractionSpec ncpm(Axis pump, Axis signal, Axis idler, Axis propagation);
    static InteractionSpec qpm(Axis pump, Axis signal, Axis idler, Axis propagation,
                               double poling_period_um, int order);
    static InteractionSpec bpm(Axis pump, Axis signal, Axis idler, BpmGeometry geometry);

    /// "yyz" -> pump y, signal y, idler z.
    static InteractionSpec ncpm_from_triple(std::string_view triple, Axis propagation);

    /// Throws ConfigError on inconsistent fields (poling on NCPM/BPM,
    /// missing geometry, polarization parallel to the propagation axis, ...).
    void validate() const;
};

struct Mismatch {
    double delta_k_rad_mm = 0.0;   // signed: k_p - k_s - k_i [- K]
    double cycles_per_mm = 0.0;    // delta_k / 2pi
    double magnitude_rad_mm() const;
};

/// Collinear wavevector mismatch at the given triple and temperature.
/// Each k is 2*pi*n(lambda, T)/lambda; QPM subtracts the grating vector
/// |K| = 2*pi*m/Lambda oriented along the bulk mismatch it compensates.
/// BPM uses the angle-tuned extraordinary index for waves polarized along
/// z (optic axis), the ordinary index otherwise.
Mismatch wavevector_mismatch(const CrystalModel& crystal, const InteractionSpec& spec,
                             const WavelengthTriple& wavelengths, double temperature_c);

/// Root of the degenerate mismatch dk(lambda) = 0, lambda in the bracket
/// (um). Converges well below 1e-6 um. Throws NoRootError when dk does not
/// change sign over the bracket. If several roots exist the first (lowest
/// wavelength) one is returned and *multiple_roots is set when provided.
double find_degenerate_ncpm(const CrystalModel& crystal, const InteractionSpec& spec,
                            double temperature_c, double bracket_min_um,
                            double bracket_max_um, double tol_um = 1e-12,
                            bool* multiple_roots = nullptr);

struct TuningPoint {
    double temperature_c = 0.0;
    double wavelength_um = 0.0;
    bool ok = false;
    std::string error;   // set when !ok
};

struct TuningCurve {
    std::vector<TuningPoint> points;
    /// d(lambda_c)/dT in um/C from finite differences over the ok points;
    /// unset with fewer than two ok points.
    std::optional<double> slope_um_per_c;
};

/// lambda_c(T) sampled over the given temperatures; per-point no-root
/// failures are recorded on the point, not thrown.
TuningCurve ncpm_tuning_curve(const CrystalModel& crystal, const InteractionSpec& spec,
                              const std::vector<double>& temperatures_c,
                              double bracket_min_um, double bracket_max_um);

/// First-order-compatible poling period: Lambda = m * 2*pi/|dk_bulk| for the
/// bulk (grating-free) mismatch of the polarization triple along the given
/// propagation axis. Throws DomainError when the bulk mismatch is already
/// zero (NCPM satisfied).
double qpm_period(const CrystalModel& crystal, Axis pump_axis, Axis signal_axis,
                  Axis idler_axis, Axis propagation_axis,
                  const WavelengthTriple& wavelengths, double temperature_c, int order);

/// Fourier coefficient of the m-th grating order of a 50% duty-cycle poled
/// structure: G_m = 2/(m*pi) * sin(m*pi/2). Exactly zero for even m.
double grating_coefficient(int order);

/// Everything effective_nonlinearity may need; which fields are required
/// depends on the technique.
struct DeffParams {
    std::optional<double> d22_pm_per_v;        // BPM (BBO formula)
    std::optional<BpmGeometry> geometry;       // BPM
    std::optional<double> d_p_pm_per_v;        // QPM / NCPM
    std::optional<int> qpm_order;              // QPM
};

/// BPM: d22*cos^2(theta+rho)*cos(3*phi); QPM: d_p*G_m; NCPM: d_p.
double effective_nonlinearity(PmKind kind, const DeffParams& params);

/// (d_eff_a / d_eff_b)^2 — the generation-rate ratio of two techniques.
double brightness_ratio(double d_eff_a, double d_eff_b);

} // namespace spdckit

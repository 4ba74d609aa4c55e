#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "spdckit/phasematch.hpp"

namespace spdckit {

struct CurveMetadata {
    std::string kind;            // "spdc_spectrum" | "shg_tuning" | "hom"
    std::string crystal;
    double length_mm = 0.0;
    double temperature_c = 0.0;
    double pump_um = 0.0;        // 0 when not applicable
    std::string abscissa_unit;   // "nm" | "ps"
    std::optional<double> peak_abscissa;  // root-found peak, same unit

    bool operator==(const CurveMetadata&) const = default;
};

/// A sampled 1-D curve with strictly increasing abscissa and ordinates in
/// [0, 1]. normalized() rescales to peak 1; probability() keeps the values
/// as given (coincidence probabilities must not be rescaled).
class SpectrumCurve {
public:
    static SpectrumCurve normalized(std::vector<double> abscissa, std::vector<double> raw,
                                    CurveMetadata metadata);
    static SpectrumCurve probability(std::vector<double> abscissa, std::vector<double> values,
                                     CurveMetadata metadata);

    const std::vector<double>& abscissa() const { return abscissa_; }
    const std::vector<double>& ordinate() const { return ordinate_; }
    const CurveMetadata& metadata() const { return meta_; }
    std::size_t size() const { return abscissa_.size(); }

private:
    SpectrumCurve() = default;
    std::vector<double> abscissa_, ordinate_;
    CurveMetadata meta_;
};

/// Full width at half maximum of the global peak, by linear interpolation
/// between the half-maximum crossings. RangeError when either crossing lies
/// outside the sampled range.
double fwhm(const SpectrumCurve& curve);

/// Normalized SPDC generation-rate spectrum sinc^2(dk L / 2) versus signal
/// wavelength at a fixed pump; the idler follows energy conservation per
/// point. Metadata carries the root-found peak when dk crosses zero inside
/// the scanned range.
SpectrumCurve generation_rate_spectrum(const CrystalModel& crystal, const InteractionSpec& spec,
                                       double pump_um, double signal_min_um,
                                       double signal_max_um, double length_mm,
                                       double temperature_c, int points);

/// Degenerate tuning curve sinc^2(dk L / 2) versus fundamental wavelength,
/// with the second harmonic at lambda/2 — the reverse-process scan of the
/// degenerate SPDC rate. Peak metadata is root-found (same root as
/// find_degenerate_ncpm).
SpectrumCurve shg_tuning_curve(const CrystalModel& crystal, const InteractionSpec& spec,
                               double fund_min_um, double fund_max_um, double length_mm,
                               double temperature_c, int points);

struct JsaGridSpec {
    int points = 256;
    /// Full span of each frequency axis (rad/s). Unset: auto-sized to
    /// 8 phase-matching bandwidths (or wider for broadband pumps).
    std::optional<double> span_rad_s;
};

/// Two-photon spectral amplitude f(w_s, w_i) = pump envelope x sinc phase
/// matching, on uniform frequency grids, Frobenius-normalized.
class JointSpectralAmplitude {
public:
    JointSpectralAmplitude(Eigen::VectorXd signal_freqs_rad_s, Eigen::VectorXd idler_freqs_rad_s,
                           Eigen::MatrixXcd amplitude, double pump_center_rad_s,
                           double pump_fwhm_rad_s, double length_mm);

    const Eigen::VectorXd& signal_freqs() const { return signal_freqs_; }
    const Eigen::VectorXd& idler_freqs() const { return idler_freqs_; }
    const Eigen::MatrixXcd& amplitude() const { return amplitude_; }
    double pump_center_rad_s() const { return pump_center_; }
    double pump_fwhm_rad_s() const { return pump_fwhm_; }
    double length_mm() const { return length_mm_; }

    /// Signal and idler grids are the same (required for the HOM swap).
    bool common_grid() const;

private:
    Eigen::VectorXd signal_freqs_, idler_freqs_;
    Eigen::MatrixXcd amplitude_;   // rows: signal, cols: idler
    double pump_center_ = 0.0, pump_fwhm_ = 0.0, length_mm_ = 0.0;
};

JointSpectralAmplitude joint_spectral_amplitude(const CrystalModel& crystal,
                                                const InteractionSpec& spec,
                                                double pump_center_um, double pump_fwhm_nm,
                                                const JsaGridSpec& grid, double length_mm,
                                                double temperature_c);

/// Schmidt-mode purity sum(s^4)/sum(s^2)^2 from the singular values of the
/// amplitude matrix. 1 for a separable (rank-1) amplitude.
double schmidt_purity(const JointSpectralAmplitude& jsa);

struct HomResult {
    SpectrumCurve curve;     // coincidence probability vs delay (ps)
    double visibility = 0.0; // (P_max - P_min) / P_max on the returned grid
};

/// Hong-Ou-Mandel coincidence probability
///   P(tau) = 1/2 [1 - Re sum f(w_s, w_i) conj(f(w_i, w_s)) e^{i(w_s-w_i) tau}]
/// over the (required) common grid.
HomResult hom_curve(const JointSpectralAmplitude& jsa, std::vector<double> delays_ps);

} // namespace spdckit

#include "spdckit/spectra.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <complex>

#include "spdckit/errors.hpp"
#include "spdckit/numeric.hpp"

namespace spdckit {

namespace {

void validate_axis(const std::vector<double>& abscissa, std::size_t n_ord) {
    if (abscissa.size() < 2) throw ConfigError("a curve needs at least two points");
    if (abscissa.size() != n_ord)
        throw ConfigError("abscissa and ordinate lengths differ");
    for (std::size_t i = 1; i < abscissa.size(); ++i)
        if (!(abscissa[i] > abscissa[i - 1]))
            throw ConfigError("abscissa must be strictly increasing");
}

} // namespace

SpectrumCurve SpectrumCurve::normalized(std::vector<double> abscissa, std::vector<double> raw,
                                        CurveMetadata metadata) {
    validate_axis(abscissa, raw.size());
    double peak = 0.0;
    for (double v : raw) {
        if (!(v >= 0.0)) throw ConfigError("spectrum values must be non-negative");
        peak = std::max(peak, v);
    }
    if (!(peak > 0.0)) throw ConfigError("cannot normalize an all-zero spectrum");
    for (double& v : raw) v /= peak;
    SpectrumCurve c;
    c.abscissa_ = std::move(abscissa);
    c.ordinate_ = std::move(raw);
    c.meta_ = std::move(metadata);
    return c;
}

SpectrumCurve SpectrumCurve::probability(std::vector<double> abscissa, std::vector<double> values,
                                         CurveMetadata metadata) {
    validate_axis(abscissa, values.size());
    for (double v : values)
        if (!(v >= 0.0 && v <= 1.0))
            throw ConfigError("probabilities must lie in [0, 1], got " + format_double(v));
    SpectrumCurve c;
    c.abscissa_ = std::move(abscissa);
    c.ordinate_ = std::move(values);
    c.meta_ = std::move(metadata);
    return c;
}

double fwhm(const SpectrumCurve& curve) {
    const auto& x = curve.abscissa();
    const auto& y = curve.ordinate();
    const std::size_t peak =
        static_cast<std::size_t>(std::max_element(y.begin(), y.end()) - y.begin());
    const double half = 0.5 * y[peak];
    auto cross = [&](std::size_t inside, std::size_t outside) {
        // linear interpolation of the half-maximum crossing between samples
        const double t = (half - y[outside]) / (y[inside] - y[outside]);
        return x[outside] + t * (x[inside] - x[outside]);
    };
    std::size_t i = peak;
    while (i > 0 && y[i] >= half) --i;
    if (y[i] >= half)
        throw RangeError("left half-maximum crossing lies outside the sampled range");
    const double left = cross(i + 1, i);
    std::size_t j = peak;
    while (j + 1 < y.size() && y[j] >= half) ++j;
    if (y[j] >= half)
        throw RangeError("right half-maximum crossing lies outside the sampled range");
    const double right = cross(j - 1, j);
    return right - left;
}

namespace {

double dk_or_context(const CrystalModel& crystal, const InteractionSpec& spec,
                     const WavelengthTriple& triple, double temperature_c, double scan_um) {
    try {
        return wavevector_mismatch(crystal, spec, triple, temperature_c).delta_k_rad_mm;
    } catch (const RangeError& e) {
        throw RangeError("at scan wavelength " + format_double(scan_um) + " um: " + e.what());
    }
}

std::optional<double> root_in_range(const std::function<double(double)>& f, double lo,
                                    double hi) {
    constexpr int kScan = 128;
    double px = lo, pf = f(px);
    for (int i = 1; i <= kScan; ++i) {
        const double x = lo + (hi - lo) * static_cast<double>(i) / kScan;
        const double fx = f(x);
        if (pf == 0.0) return px;
        if ((fx > 0.0) != (pf > 0.0)) return find_root(f, px, x, 1e-12);
        px = x;
        pf = fx;
    }
    return std::nullopt;
}

} // namespace

SpectrumCurve generation_rate_spectrum(const CrystalModel& crystal, const InteractionSpec& spec,
                                       double pump_um, double signal_min_um,
                                       double signal_max_um, double length_mm,
                                       double temperature_c, int points) {
    if (!(length_mm > 0.0)) throw RangeError("crystal length must be > 0 mm");
    if (points < 2) throw ConfigError("need at least two spectrum points");
    if (!(signal_max_um > signal_min_um) || !(signal_min_um > pump_um))
        throw RangeError("signal range must be increasing and above the pump wavelength");
    auto dk = [&](double ls) {
        return dk_or_context(crystal, spec, WavelengthTriple::from_pump_signal(pump_um, ls),
                             temperature_c, ls);
    };
    std::vector<double> abscissa(points), raw(points);
    for (int i = 0; i < points; ++i) {
        const double ls = signal_min_um + (signal_max_um - signal_min_um) *
                                              static_cast<double>(i) / (points - 1);
        const double s = sinc(dk(ls) * length_mm / 2.0);
        abscissa[i] = ls * 1e3; // nm
        raw[i] = s * s;
    }
    CurveMetadata meta{"spdc_spectrum", crystal.name, length_mm, temperature_c,
                       pump_um, "nm", std::nullopt};
    if (auto root = root_in_range(dk, signal_min_um, signal_max_um))
        meta.peak_abscissa = *root * 1e3;
    return SpectrumCurve::normalized(std::move(abscissa), std::move(raw), std::move(meta));
}

SpectrumCurve shg_tuning_curve(const CrystalModel& crystal, const InteractionSpec& spec,
                               double fund_min_um, double fund_max_um, double length_mm,
                               double temperature_c, int points) {
    if (!(length_mm > 0.0)) throw RangeError("crystal length must be > 0 mm");
    if (points < 2) throw ConfigError("need at least two curve points");
    if (!(fund_max_um > fund_min_um) || !(fund_min_um > 0.0))
        throw RangeError("fundamental range must be positive and increasing");
    auto dk = [&](double lf) {
        return dk_or_context(crystal, spec, WavelengthTriple::degenerate(lf), temperature_c, lf);
    };
    std::vector<double> abscissa(points), raw(points);
    for (int i = 0; i < points; ++i) {
        const double lf =
            fund_min_um + (fund_max_um - fund_min_um) * static_cast<double>(i) / (points - 1);
        const double s = sinc(dk(lf) * length_mm / 2.0);
        abscissa[i] = lf * 1e3;
        raw[i] = s * s;
    }
    CurveMetadata meta{"shg_tuning", crystal.name, length_mm, temperature_c, 0.0,
                       "nm", std::nullopt};
    if (auto root = root_in_range(dk, fund_min_um, fund_max_um)) meta.peak_abscissa = *root * 1e3;
    return SpectrumCurve::normalized(std::move(abscissa), std::move(raw), std::move(meta));
}

JointSpectralAmplitude::JointSpectralAmplitude(Eigen::VectorXd signal_freqs_rad_s,
                                               Eigen::VectorXd idler_freqs_rad_s,
                                               Eigen::MatrixXcd amplitude,
                                               double pump_center_rad_s, double pump_fwhm_rad_s,
                                               double length_mm)
    : signal_freqs_(std::move(signal_freqs_rad_s)),
      idler_freqs_(std::move(idler_freqs_rad_s)),
      amplitude_(std::move(amplitude)),
      pump_center_(pump_center_rad_s),
      pump_fwhm_(pump_fwhm_rad_s),
      length_mm_(length_mm) {
    if (amplitude_.rows() != signal_freqs_.size() || amplitude_.cols() != idler_freqs_.size())
        throw ConfigError("amplitude matrix shape does not match the frequency grids");
    for (const auto* grid : {&signal_freqs_, &idler_freqs_}) {
        if (grid->size() < 2) throw ConfigError("frequency grids need at least two points");
        for (Eigen::Index i = 1; i < grid->size(); ++i)
            if (!((*grid)[i] > (*grid)[i - 1]))
                throw ConfigError("frequency grids must be strictly increasing");
    }
    const double norm = amplitude_.norm();
    if (!(norm > 0.0)) throw DomainError("joint spectral amplitude is identically zero");
    amplitude_ /= norm;
}

bool JointSpectralAmplitude::common_grid() const {
    return signal_freqs_.size() == idler_freqs_.size() && signal_freqs_ == idler_freqs_;
}

JointSpectralAmplitude joint_spectral_amplitude(const CrystalModel& crystal,
                                                const InteractionSpec& spec,
                                                double pump_center_um, double pump_fwhm_nm,
                                                const JsaGridSpec& grid, double length_mm,
                                                double temperature_c) {
    if (!(length_mm > 0.0)) throw RangeError("crystal length must be > 0 mm");
    if (!(pump_center_um > 0.0)) throw RangeError("pump wavelength must be > 0");
    if (!(pump_fwhm_nm > 0.0)) throw RangeError("pump bandwidth must be > 0");
    if (grid.points < 64)
        throw ConfigError("JSA grid too coarse: need at least 64 points per axis, got " +
                          std::to_string(grid.points));

    const double omega_p = omega_from_wavelength_um(pump_center_um);
    const double omega_0 = 0.5 * omega_p; // degeneracy
    const double degen_um = 2.0 * pump_center_um;

    // Phase-matching bandwidth (FWHM, rad/s) of sinc^2 along the
    // fixed-pump ridge, from the group-delay difference of signal and idler.
    auto dk_signal = [&](double ls) {
        return wavevector_mismatch(crystal, spec,
                                   WavelengthTriple::from_pump_signal(pump_center_um, ls),
                                   temperature_c)
            .delta_k_rad_mm;
    };
    const double dl = 1e-4 * degen_um;
    const double dk_slope_per_um = (dk_signal(degen_um + dl) - dk_signal(degen_um - dl)) / (2 * dl);
    const double domega_per_um = -omega_0 / degen_um; // d omega / d lambda at degeneracy
    const double slope_per_rad_s = dk_slope_per_um / domega_per_um; // rad/mm per rad/s
    // sinc^2(x) = 1/2 at |x| = 1.391557377:  dk L/2 = x
    const double pm_fwhm_rad_s =
        2.0 * 1.3915573773 * 2.0 / (length_mm * std::max(std::abs(slope_per_rad_s), 1e-300));

    const double pump_fwhm_rad_s =
        (pump_fwhm_nm * 1e-3) * omega_p / pump_center_um; // |dw| = w/lambda * dlambda

    double span = grid.span_rad_s.value_or(
        std::max(8.0 * pm_fwhm_rad_s, 12.0 * pump_fwhm_rad_s));
    if (span < 8.0 * pm_fwhm_rad_s)
        throw ConfigError("JSA grid span " + format_double(span) +
                          " rad/s is below the required 8 phase-matching bandwidths (" +
                          format_double(8.0 * pm_fwhm_rad_s) + " rad/s)");

    const int n = grid.points;
    Eigen::VectorXd freqs(n);
    for (int i = 0; i < n; ++i)
        freqs[i] = omega_0 - span / 2.0 + span * static_cast<double>(i) / (n - 1);

    const double sigma = pump_fwhm_rad_s / (2.0 * std::sqrt(2.0 * std::log(2.0)));
    Eigen::MatrixXcd f(n, n);
    for (int r = 0; r < n; ++r) {
        const double ws = freqs[r];
        const double ls = wavelength_um_from_omega(ws);
        for (int c = 0; c < n; ++c) {
            const double wi = freqs[c];
            const double detune = ws + wi - omega_p;
            const double envelope = std::exp(-detune * detune / (4.0 * sigma * sigma));
            const double li = wavelength_um_from_omega(wi);
            const double lp = wavelength_um_from_omega(ws + wi);
            double dk;
            try {
                dk = wavevector_mismatch(crystal, spec, WavelengthTriple(lp, ls, li),
                                         temperature_c)
                         .delta_k_rad_mm;
            } catch (const RangeError& e) {
                throw RangeError("JSA grid cell (signal " + format_double(ls) + " um, idler " +
                                 format_double(li) + " um): " + e.what());
            }
            f(r, c) = envelope * sinc(dk * length_mm / 2.0);
        }
    }
    return JointSpectralAmplitude(freqs, freqs, std::move(f), omega_p, pump_fwhm_rad_s,
                                  length_mm);
}

double schmidt_purity(const JointSpectralAmplitude& jsa) {
    const auto svd = Eigen::JacobiSVD<Eigen::MatrixXcd>(jsa.amplitude());
    const auto& s = svd.singularValues();
    double s2 = 0.0, s4 = 0.0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        const double v = s[i] * s[i];
        s2 += v;
        s4 += v * v;
    }
    if (!(s2 > 0.0)) throw DomainError("zero amplitude matrix has no Schmidt decomposition");
    return s4 / (s2 * s2);
}

HomResult hom_curve(const JointSpectralAmplitude& jsa, std::vector<double> delays_ps) {
    if (!jsa.common_grid())
        throw ConfigError("HOM needs a common signal/idler grid (the sum swaps their roles)");
    if (delays_ps.size() < 2) throw ConfigError("need at least two delay points");
    std::sort(delays_ps.begin(), delays_ps.end());
    delays_ps.erase(std::unique(delays_ps.begin(), delays_ps.end()), delays_ps.end());

    const auto& f = jsa.amplitude();
    const Eigen::MatrixXcd overlap = f.array() * f.transpose().array().conjugate();
    const auto& w = jsa.signal_freqs();
    const Eigen::Index n = w.size();

    std::vector<double> prob(delays_ps.size());
    Eigen::VectorXcd col_phase(n), row_phase(n);
    for (std::size_t t = 0; t < delays_ps.size(); ++t) {
        const double tau_s = delays_ps[t] * 1e-12;
        for (Eigen::Index k = 0; k < n; ++k) {
            row_phase[k] = std::exp(std::complex<double>(0.0, w[k] * tau_s));
            col_phase[k] = std::conj(row_phase[k]);
        }
        // sum_{s,i} overlap(s,i) e^{i w_s tau} e^{-i w_i tau}
        const std::complex<double> sum =
            (row_phase.array() * (overlap * col_phase).array()).sum();
        prob[t] = std::clamp(0.5 * (1.0 - sum.real()), 0.0, 1.0);
    }

    const double pmax = *std::max_element(prob.begin(), prob.end());
    const double pmin = *std::min_element(prob.begin(), prob.end());
    if (!(pmax > 0.0))
        throw DomainError("coincidence probability vanishes on the whole delay grid");
    HomResult result{
        SpectrumCurve::probability(std::move(delays_ps), std::move(prob),
                                   CurveMetadata{"hom", "", jsa.length_mm(), 0.0, 0.0, "ps",
                                                 std::nullopt}),
        (pmax - pmin) / pmax};
    return result;
}

} // namespace spdckit

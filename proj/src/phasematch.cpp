#include "spdckit/phasematch.hpp"

#include <algorithm>
#include <cmath>

#include "spdckit/errors.hpp"
#include "spdckit/numeric.hpp"

namespace spdckit {

namespace {

constexpr double kEnergyConservationRelTol = 1e-9;

void check_triple(double lp, double ls, double li) {
    if (!(lp > 0.0) || !(ls > 0.0) || !(li > 0.0))
        throw RangeError("wavelengths must be strictly positive");
    if (!(lp < std::min(ls, li)))
        throw RangeError("pump wavelength must be below both signal and idler");
    const double lhs = 1.0 / lp;
    const double rhs = 1.0 / ls + 1.0 / li;
    if (std::abs(lhs - rhs) > kEnergyConservationRelTol * lhs)
        throw RangeError("energy conservation 1/lp = 1/ls + 1/li violated: 1/" +
                         format_double(lp) + " vs 1/" + format_double(ls) + " + 1/" +
                         format_double(li));
}

} // namespace

WavelengthTriple::WavelengthTriple(double pump_um, double signal_um, double idler_um)
    : pump_um_(pump_um), signal_um_(signal_um), idler_um_(idler_um) {
    check_triple(pump_um_, signal_um_, idler_um_);
}

WavelengthTriple WavelengthTriple::from_pump_signal(double pump_um, double signal_um) {
    if (!(pump_um > 0.0) || !(signal_um > pump_um))
        throw RangeError("need 0 < pump < signal to derive the idler");
    return WavelengthTriple(pump_um, signal_um, 1.0 / (1.0 / pump_um - 1.0 / signal_um));
}

WavelengthTriple WavelengthTriple::from_signal_idler(double signal_um, double idler_um) {
    if (!(signal_um > 0.0) || !(idler_um > 0.0))
        throw RangeError("signal and idler must be strictly positive");
    return WavelengthTriple(1.0 / (1.0 / signal_um + 1.0 / idler_um), signal_um, idler_um);
}

WavelengthTriple WavelengthTriple::degenerate(double wavelength_um) {
    if (!(wavelength_um > 0.0)) throw RangeError("wavelength must be strictly positive");
    return WavelengthTriple(0.5 * wavelength_um, wavelength_um, wavelength_um);
}

PmKind pm_kind_from_string(std::string_view s) {
    if (s == "bpm" || s == "BPM") return PmKind::Bpm;
    if (s == "qpm" || s == "QPM") return PmKind::Qpm;
    if (s == "ncpm" || s == "NCPM") return PmKind::Ncpm;
    throw ConfigError("unknown phase-matching kind '" + std::string(s) + "'");
}

const char* to_string(PmKind kind) {
    switch (kind) {
        case PmKind::Bpm: return "BPM";
        case PmKind::Qpm: return "QPM";
        default: return "NCPM";
    }
}

void BpmGeometry::validate() const {
    if (!(theta_rad >= 0.0 && theta_rad <= kPi))
        throw ConfigError("polar angle theta must lie in [0, pi]");
    if (!(phi_rad >= 0.0 && phi_rad < 2.0 * kPi))
        throw ConfigError("azimuthal angle phi must lie in [0, 2pi)");
}

InteractionSpec InteractionSpec::ncpm(Axis pump, Axis signal, Axis idler, Axis propagation) {
    InteractionSpec s;
    s.kind = PmKind::Ncpm;
    s.pump_axis = pump;
    s.signal_axis = signal;
    s.idler_axis = idler;
    s.propagation_axis = propagation;
    s.validate();
    return s;
}

InteractionSpec InteractionSpec::qpm(Axis pump, Axis signal, Axis idler, Axis propagation,
                                     double poling_period_um, int order) {
    InteractionSpec s;
    s.kind = PmKind::Qpm;
    s.pump_axis = pump;
    s.signal_axis = signal;
    s.idler_axis = idler;
    s.propagation_axis = propagation;
    s.poling_period_um = poling_period_um;
    s.qpm_order = order;
    s.validate();
    return s;
}

InteractionSpec InteractionSpec::bpm(Axis pump, Axis signal, Axis idler, BpmGeometry geometry) {
    InteractionSpec s;
    s.kind = PmKind::Bpm;
    s.pump_axis = pump;
    s.signal_axis = signal;
    s.idler_axis = idler;
    s.geometry = geometry;
    s.validate();
    return s;
}

InteractionSpec InteractionSpec::ncpm_from_triple(std::string_view triple, Axis propagation) {
    if (triple.size() != 3)
        throw ConfigError("polarization triple must be three axis letters, e.g. 'yyz'");
    return ncpm(axis_from_string(triple.substr(0, 1)), axis_from_string(triple.substr(1, 1)),
                axis_from_string(triple.substr(2, 1)), propagation);
}

void InteractionSpec::validate() const {
    switch (kind) {
        case PmKind::Qpm:
            if (!propagation_axis) throw ConfigError("QPM needs a propagation axis");
            if (!poling_period_um || !(*poling_period_um > 0.0))
                throw ConfigError("QPM needs a poling period > 0");
            if (!qpm_order || *qpm_order < 1)
                throw ConfigError("QPM needs a grating order m >= 1");
            if (geometry) throw ConfigError("QPM does not take BPM geometry");
            break;
        case PmKind::Ncpm:
            if (!propagation_axis) throw ConfigError("NCPM needs a propagation axis");
            if (poling_period_um || qpm_order)
                throw ConfigError("NCPM rejects poling fields (bulk crystal)");
            if (geometry) throw ConfigError("NCPM does not take BPM geometry");
            break;
        case PmKind::Bpm:
            if (!geometry) throw ConfigError("BPM needs a geometry (theta, phi, rho)");
            if (poling_period_um || qpm_order)
                throw ConfigError("BPM rejects poling fields");
            if (propagation_axis)
                throw ConfigError("BPM direction is set by angles, not a principal axis");
            geometry->validate();
            break;
    }
    if (propagation_axis) {
        for (Axis a : {pump_axis, signal_axis, idler_axis}) {
            if (a == *propagation_axis)
                throw ConfigError(std::string("polarization along the propagation axis ") +
                                  to_string(*propagation_axis) + " is not transverse");
        }
    }
}

double Mismatch::magnitude_rad_mm() const { return std::abs(delta_k_rad_mm); }

namespace {

// BPM assumes the uniaxial mapping (x = y: ordinary, z: optic axis). A wave
// polarized along z propagating at polar angle theta sees the angle-tuned
// extraordinary index; x/y-polarized waves see their own (ordinary) model.
double bpm_index(const CrystalModel& crystal, Axis pol, double theta_rad,
                 double wavelength_um, double temperature_c) {
    if (pol != Axis::Z) return refractive_index(crystal, pol, wavelength_um, temperature_c);
    const double no = refractive_index(crystal, Axis::X, wavelength_um, temperature_c);
    const double ne = refractive_index(crystal, Axis::Z, wavelength_um, temperature_c);
    const double c = std::cos(theta_rad), s = std::sin(theta_rad);
    return 1.0 / std::sqrt(c * c / (no * no) + s * s / (ne * ne));
}

} // namespace

Mismatch wavevector_mismatch(const CrystalModel& crystal, const InteractionSpec& spec,
                             const WavelengthTriple& w, double temperature_c) {
    spec.validate();
    double np, ns, ni;
    if (spec.kind == PmKind::Bpm) {
        const double theta = spec.geometry->theta_rad;
        np = bpm_index(crystal, spec.pump_axis, theta, w.pump_um(), temperature_c);
        ns = bpm_index(crystal, spec.signal_axis, theta, w.signal_um(), temperature_c);
        ni = bpm_index(crystal, spec.idler_axis, theta, w.idler_um(), temperature_c);
    } else {
        np = refractive_index(crystal, spec.pump_axis, w.pump_um(), temperature_c);
        ns = refractive_index(crystal, spec.signal_axis, w.signal_um(), temperature_c);
        ni = refractive_index(crystal, spec.idler_axis, w.idler_um(), temperature_c);
    }
    // k = 2*pi*n/lambda in rad/um; report in rad/mm.
    double dk_um = 2.0 * kPi * (np / w.pump_um() - ns / w.signal_um() - ni / w.idler_um());
    if (spec.kind == PmKind::Qpm) {
        // the grating vector is oriented along the bulk mismatch it compensates
        const double grating =
            2.0 * kPi * static_cast<double>(*spec.qpm_order) / *spec.poling_period_um;
        dk_um -= std::copysign(grating, dk_um);
    }
    Mismatch m;
    m.delta_k_rad_mm = dk_um * 1e3;
    m.cycles_per_mm = m.delta_k_rad_mm / (2.0 * kPi);
    return m;
}

double find_degenerate_ncpm(const CrystalModel& crystal, const InteractionSpec& spec,
                            double temperature_c, double bracket_min_um,
                            double bracket_max_um, double tol_um, bool* multiple_roots) {
    if (spec.kind != PmKind::Ncpm)
        throw ConfigError("degenerate search is defined for NCPM interactions");
    if (!(bracket_max_um > bracket_min_um))
        throw RangeError("empty search bracket");
    auto dk = [&](double lambda_um) {
        return wavevector_mismatch(crystal, spec, WavelengthTriple::degenerate(lambda_um),
                                   temperature_c)
            .delta_k_rad_mm;
    };
    // Coarse scan: locate the first sign change and count the rest.
    constexpr int kScan = 64;
    double prev_x = bracket_min_um;
    double prev_f = dk(prev_x);
    double lo = 0.0, hi = 0.0;
    int changes = 0;
    for (int i = 1; i <= kScan; ++i) {
        const double x = bracket_min_um +
                         (bracket_max_um - bracket_min_um) * static_cast<double>(i) / kScan;
        const double fx = dk(x);
        if (prev_f == 0.0 || (fx > 0.0) != (prev_f > 0.0)) {
            if (changes == 0) { lo = prev_x; hi = x; }
            ++changes;
        }
        prev_x = x;
        prev_f = fx;
    }
    if (multiple_roots) *multiple_roots = changes > 1;
    if (changes == 0)
        throw NoRootError("degenerate mismatch does not change sign over [" +
                          format_double(bracket_min_um) + ", " + format_double(bracket_max_um) +
                          "] um at " + format_double(temperature_c) + " C");
    return find_root(dk, lo, hi, tol_um);
}

TuningCurve ncpm_tuning_curve(const CrystalModel& crystal, const InteractionSpec& spec,
                              const std::vector<double>& temperatures_c,
                              double bracket_min_um, double bracket_max_um) {
    TuningCurve curve;
    curve.points.reserve(temperatures_c.size());
    for (double t : temperatures_c) {
        TuningPoint p;
        p.temperature_c = t;
        try {
            p.wavelength_um =
                find_degenerate_ncpm(crystal, spec, t, bracket_min_um, bracket_max_um);
            p.ok = true;
        } catch (const Error& e) {
            p.error = e.what();
        }
        curve.points.push_back(std::move(p));
    }
    std::stable_sort(curve.points.begin(), curve.points.end(),
                     [](const TuningPoint& a, const TuningPoint& b) {
                         return a.temperature_c < b.temperature_c;
                     });
    const TuningPoint* first = nullptr;
    const TuningPoint* last = nullptr;
    for (const auto& p : curve.points) {
        if (!p.ok) continue;
        if (!first) first = &p;
        last = &p;
    }
    if (first && last && last->temperature_c > first->temperature_c) {
        curve.slope_um_per_c = (last->wavelength_um - first->wavelength_um) /
                               (last->temperature_c - first->temperature_c);
    }
    return curve;
}

double qpm_period(const CrystalModel& crystal, Axis pump_axis, Axis signal_axis,
                  Axis idler_axis, Axis propagation_axis, const WavelengthTriple& wavelengths,
                  double temperature_c, int order) {
    if (order < 1) throw DomainError("QPM order must be >= 1");
    const auto bulk = InteractionSpec::ncpm(pump_axis, signal_axis, idler_axis, propagation_axis);
    const double dk_um =
        wavevector_mismatch(crystal, bulk, wavelengths, temperature_c).delta_k_rad_mm * 1e-3;
    if (std::abs(dk_um) * 1e3 < 1e-9)
        throw DomainError("bulk mismatch is already zero: the interaction is "
                          "non-critically phase matched, no grating needed");
    const double base = 2.0 * kPi / std::abs(dk_um);
    return static_cast<double>(order) * base;
}

double grating_coefficient(int order) {
    if (order < 1) throw DomainError("grating order must be a positive integer");
    if (order % 2 == 0) return 0.0;
    const double sign = (order % 4 == 1) ? 1.0 : -1.0;
    return sign * 2.0 / (static_cast<double>(order) * kPi);
}

double effective_nonlinearity(PmKind kind, const DeffParams& params) {
    switch (kind) {
        case PmKind::Bpm: {
            if (!params.d22_pm_per_v || !params.geometry)
                throw ConfigError("BPM d_eff needs d22 and the (theta, phi, rho) geometry");
            params.geometry->validate();
            const double c = std::cos(params.geometry->theta_rad + params.geometry->walkoff_rad);
            return *params.d22_pm_per_v * c * c * std::cos(3.0 * params.geometry->phi_rad);
        }
        case PmKind::Qpm:
            if (!params.d_p_pm_per_v || !params.qpm_order)
                throw ConfigError("QPM d_eff needs d_p and the grating order m");
            return *params.d_p_pm_per_v * grating_coefficient(*params.qpm_order);
        default:
            if (!params.d_p_pm_per_v) throw ConfigError("NCPM d_eff needs d_p");
            return *params.d_p_pm_per_v;
    }
}

double brightness_ratio(double d_eff_a, double d_eff_b) {
    if (d_eff_b == 0.0) throw DomainError("brightness ratio undefined for zero reference d_eff");
    const double r = d_eff_a / d_eff_b;
    return r * r;
}

} // namespace spdckit

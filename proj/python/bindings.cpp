#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <nlohmann/json.hpp>

#include "spdckit/crystal.hpp"
#include "spdckit/errors.hpp"
#include "spdckit/io.hpp"
#include "spdckit/numeric.hpp"
#include "spdckit/phasematch.hpp"
#include "spdckit/qstate.hpp"
#include "spdckit/spectra.hpp"
#include "spdckit/tomography.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
namespace sk = spdckit;

namespace {

sk::InteractionSpec make_spec(const std::string& kind, const std::string& pol,
                              const std::string& prop_axis, double period_um, int order) {
    if (pol.size() != 3) throw sk::ConfigError("pol needs three axis letters, e.g. 'yyz'");
    const sk::Axis p = sk::axis_from_string(pol.substr(0, 1));
    const sk::Axis s = sk::axis_from_string(pol.substr(1, 1));
    const sk::Axis i = sk::axis_from_string(pol.substr(2, 1));
    const sk::Axis prop = sk::axis_from_string(prop_axis);
    if (kind == "qpm") return sk::InteractionSpec::qpm(p, s, i, prop, period_um, order);
    if (kind == "ncpm") return sk::InteractionSpec::ncpm(p, s, i, prop);
    throw sk::ConfigError("kind must be 'ncpm' or 'qpm'");
}

std::vector<sk::MeasurementSetting> settings_from_strings(
    const std::vector<std::pair<std::string, std::string>>& labels) {
    std::vector<sk::MeasurementSetting> out;
    out.reserve(labels.size());
    for (const auto& [a, b] : labels)
        out.push_back({sk::pol_from_string(a), sk::pol_from_string(b)});
    return out;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "SPDC photon-pair source design toolkit (C++ core)";

    // translators run newest-first, so the base class goes in first
    py::register_exception<sk::Error>(m, "SpdckitError", PyExc_RuntimeError);
    py::register_exception<sk::RangeError>(m, "RangeError", PyExc_ValueError);
    py::register_exception<sk::DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<sk::ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<sk::ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<sk::NoRootError>(m, "NoRootError", PyExc_RuntimeError);

    // ---- dispersion ----
    py::class_<sk::CrystalModel>(m, "CrystalModel")
        .def_readonly("name", &sk::CrystalModel::name)
        .def_readonly("citation", &sk::CrystalModel::citation)
        .def("d_coefficient",
             [](const sk::CrystalModel& c, const std::string& label) {
                 return c.d(label).value_pm_per_v;
             },
             "label"_a)
        .def("__repr__",
             [](const sk::CrystalModel& c) { return "<CrystalModel " + c.name + ">"; });

    m.def("load_crystal", &sk::load_crystal, "path"_a);
    m.def("parse_crystal", &sk::parse_crystal, "text"_a, "origin"_a = "<string>");
    m.def("serialize_crystal", &sk::serialize_crystal, "crystal"_a);
    m.def(
        "refractive_index",
        [](const sk::CrystalModel& c, const std::string& axis, double wl, double t) {
            return sk::refractive_index(c, sk::axis_from_string(axis), wl, t);
        },
        "crystal"_a, "axis"_a, "wavelength_um"_a, "temperature_c"_a);
    m.def(
        "index_derivative",
        [](const sk::CrystalModel& c, const std::string& axis, double wl, double t) {
            return sk::index_derivative(c, sk::axis_from_string(axis), wl, t);
        },
        "crystal"_a, "axis"_a, "wavelength_um"_a, "temperature_c"_a);

    // ---- phase matching ----
    py::class_<sk::WavelengthTriple>(m, "WavelengthTriple")
        .def(py::init<double, double, double>(), "pump_um"_a, "signal_um"_a, "idler_um"_a)
        .def_static("from_pump_signal", &sk::WavelengthTriple::from_pump_signal, "pump_um"_a,
                    "signal_um"_a)
        .def_static("from_signal_idler", &sk::WavelengthTriple::from_signal_idler,
                    "signal_um"_a, "idler_um"_a)
        .def_static("degenerate", &sk::WavelengthTriple::degenerate, "wavelength_um"_a)
        .def_property_readonly("pump_um", &sk::WavelengthTriple::pump_um)
        .def_property_readonly("signal_um", &sk::WavelengthTriple::signal_um)
        .def_property_readonly("idler_um", &sk::WavelengthTriple::idler_um);

    py::class_<sk::InteractionSpec>(m, "InteractionSpec")
        .def(py::init(&make_spec), "kind"_a, "pol"_a, "prop_axis"_a = "x",
             "period_um"_a = 0.0, "order"_a = 1);

    m.def(
        "wavevector_mismatch",
        [](const sk::CrystalModel& c, const sk::InteractionSpec& s,
           const sk::WavelengthTriple& w, double t) {
            const auto mm = sk::wavevector_mismatch(c, s, w, t);
            return py::make_tuple(mm.delta_k_rad_mm, mm.cycles_per_mm);
        },
        "crystal"_a, "spec"_a, "wavelengths"_a, "temperature_c"_a,
        "Signed collinear mismatch: (rad/mm, cycles/mm)");
    m.def(
        "find_degenerate_ncpm",
        [](const sk::CrystalModel& c, const sk::InteractionSpec& s, double t, double lo,
           double hi, double tol) { return sk::find_degenerate_ncpm(c, s, t, lo, hi, tol); },
        "crystal"_a, "spec"_a, "temperature_c"_a, "bracket_min_um"_a, "bracket_max_um"_a,
        "tol_um"_a = 1e-12);
    m.def(
        "ncpm_tuning_curve",
        [](const sk::CrystalModel& c, const sk::InteractionSpec& s,
           const std::vector<double>& temps, double lo, double hi) {
            const auto curve = sk::ncpm_tuning_curve(c, s, temps, lo, hi);
            std::vector<std::pair<double, double>> pts;
            for (const auto& p : curve.points)
                if (p.ok) pts.emplace_back(p.temperature_c, p.wavelength_um);
            return pts;
        },
        "crystal"_a, "spec"_a, "temperatures_c"_a, "bracket_min_um"_a, "bracket_max_um"_a,
        "Solved (temperature_c, lambda_c_um) points; unsolvable points are dropped");
    m.def(
        "qpm_period",
        [](const sk::CrystalModel& c, const std::string& pol, const std::string& prop,
           const sk::WavelengthTriple& w, double t, int order) {
            if (pol.size() != 3) throw sk::ConfigError("pol needs three axis letters");
            return sk::qpm_period(c, sk::axis_from_string(pol.substr(0, 1)),
                                  sk::axis_from_string(pol.substr(1, 1)),
                                  sk::axis_from_string(pol.substr(2, 1)),
                                  sk::axis_from_string(prop), w, t, order);
        },
        "crystal"_a, "pol"_a, "prop_axis"_a, "wavelengths"_a, "temperature_c"_a,
        "order"_a = 1);
    m.def("grating_coefficient", &sk::grating_coefficient, "order"_a);
    m.def(
        "effective_nonlinearity",
        [](const std::string& kind, py::kwargs kw) {
            sk::DeffParams p;
            if (kw.contains("d22")) p.d22_pm_per_v = kw["d22"].cast<double>();
            if (kw.contains("d_p")) p.d_p_pm_per_v = kw["d_p"].cast<double>();
            if (kw.contains("order")) p.qpm_order = kw["order"].cast<int>();
            if (kw.contains("theta_rad") || kw.contains("phi_rad") || kw.contains("rho_rad")) {
                sk::BpmGeometry g;
                if (kw.contains("theta_rad")) g.theta_rad = kw["theta_rad"].cast<double>();
                if (kw.contains("phi_rad")) g.phi_rad = kw["phi_rad"].cast<double>();
                if (kw.contains("rho_rad")) g.walkoff_rad = kw["rho_rad"].cast<double>();
                p.geometry = g;
            }
            return sk::effective_nonlinearity(sk::pm_kind_from_string(kind), p);
        },
        "kind"_a,
        "d_eff for 'bpm' (d22, theta_rad, phi_rad, rho_rad), 'qpm' (d_p, order) or "
        "'ncpm' (d_p)");
    m.def("brightness_ratio", &sk::brightness_ratio, "d_eff_a"_a, "d_eff_b"_a);

    // ---- spectra ----
    py::class_<sk::SpectrumCurve>(m, "SpectrumCurve")
        .def_property_readonly("abscissa", &sk::SpectrumCurve::abscissa)
        .def_property_readonly("ordinate", &sk::SpectrumCurve::ordinate)
        .def_property_readonly("peak_abscissa",
                               [](const sk::SpectrumCurve& c) {
                                   return c.metadata().peak_abscissa;
                               })
        .def("fwhm", [](const sk::SpectrumCurve& c) { return sk::fwhm(c); })
        .def("to_csv", &sk::curve_to_csv)
        .def("__len__", &sk::SpectrumCurve::size);

    m.def("generation_rate_spectrum", &sk::generation_rate_spectrum, "crystal"_a, "spec"_a,
          "pump_um"_a, "signal_min_um"_a, "signal_max_um"_a, "length_mm"_a,
          "temperature_c"_a, "points"_a = 2048);
    m.def("shg_tuning_curve", &sk::shg_tuning_curve, "crystal"_a, "spec"_a, "fund_min_um"_a,
          "fund_max_um"_a, "length_mm"_a, "temperature_c"_a, "points"_a = 2048);

    py::class_<sk::JointSpectralAmplitude>(m, "JointSpectralAmplitude")
        .def(py::init<Eigen::VectorXd, Eigen::VectorXd, Eigen::MatrixXcd, double, double,
                      double>(),
             "signal_freqs_rad_s"_a, "idler_freqs_rad_s"_a, "amplitude"_a,
             "pump_center_rad_s"_a = 0.0, "pump_fwhm_rad_s"_a = 0.0, "length_mm"_a = 0.0)
        .def_property_readonly("signal_freqs", &sk::JointSpectralAmplitude::signal_freqs)
        .def_property_readonly("idler_freqs", &sk::JointSpectralAmplitude::idler_freqs)
        .def_property_readonly("amplitude", &sk::JointSpectralAmplitude::amplitude);

    m.def(
        "joint_spectral_amplitude",
        [](const sk::CrystalModel& c, const sk::InteractionSpec& s, double pump_um,
           double fwhm_nm, double length_mm, double temp_c, int points,
           std::optional<double> span) {
            sk::JsaGridSpec grid;
            grid.points = points;
            grid.span_rad_s = span;
            return sk::joint_spectral_amplitude(c, s, pump_um, fwhm_nm, grid, length_mm,
                                                temp_c);
        },
        "crystal"_a, "spec"_a, "pump_center_um"_a, "pump_fwhm_nm"_a, "length_mm"_a,
        "temperature_c"_a, "points"_a = 256, "span_rad_s"_a = std::nullopt);
    m.def("schmidt_purity", &sk::schmidt_purity, "jsa"_a);
    m.def(
        "hom_curve",
        [](const sk::JointSpectralAmplitude& jsa, const std::vector<double>& delays_ps) {
            const auto r = sk::hom_curve(jsa, delays_ps);
            return py::make_tuple(r.curve, r.visibility);
        },
        "jsa"_a, "delays_ps"_a, "Returns (curve, visibility)");

    // ---- entangled source ----
    py::class_<sk::TwoQubitState>(m, "TwoQubitState")
        .def(py::init<const Eigen::Matrix4cd&>(), "rho"_a)
        .def_property_readonly("matrix", &sk::TwoQubitState::matrix)
        .def("to_json",
             [](const sk::TwoQubitState& s) { return sk::state_to_json(s).dump(2); });
    m.def("state_from_json", [](const std::string& text) {
        return sk::state_from_json(nlohmann::json::parse(text));
    });

    m.def(
        "bell_state",
        [](const std::string& label) {
            return sk::bell_state(sk::bell_label_from_string(label));
        },
        "label"_a, "phi+, phi-, psi+ or psi-");
    m.def(
        "sagnac_state",
        [](double phase_rad, double hv_share, double white_noise) {
            return sk::sagnac_state({phase_rad, hv_share, white_noise});
        },
        "phase_rad"_a = 0.0, "hv_share"_a = 0.5, "white_noise"_a = 0.0);
    m.def(
        "waveplate_transform",
        [](const sk::TwoQubitState& s, int arm, const std::string& plate, double angle) {
            return sk::waveplate_transform(s, arm, sk::plate_from_string(plate), angle);
        },
        "state"_a, "arm"_a, "plate"_a, "angle_rad"_a);
    m.def(
        "waveplate_jones",
        [](const std::string& plate, double angle) {
            return sk::waveplate_jones(sk::plate_from_string(plate), angle);
        },
        "plate"_a, "angle_rad"_a);
    m.def("apply_white_noise", &sk::apply_white_noise, "state"_a, "w"_a);

    // ---- tomography ----
    m.def("default_settings", [] {
        std::vector<std::pair<std::string, std::string>> out;
        for (const auto& s : sk::default_settings())
            out.emplace_back(sk::to_string(s.arm1), sk::to_string(s.arm2));
        return out;
    });
    m.def(
        "projector",
        [](const std::string& a, const std::string& b) {
            return sk::projector({sk::pol_from_string(a), sk::pol_from_string(b)});
        },
        "arm1"_a, "arm2"_a);
    m.def(
        "simulate_counts",
        [](const sk::TwoQubitState& state,
           const std::vector<std::pair<std::string, std::string>>& settings, double pairs,
           std::uint64_t seed, double accidental) {
            const auto records = sk::simulate_counts(state, settings_from_strings(settings),
                                                     pairs, seed, accidental);
            std::vector<std::tuple<std::string, std::string, std::uint64_t, double>> out;
            for (const auto& r : records)
                out.emplace_back(sk::to_string(r.setting.arm1), sk::to_string(r.setting.arm2),
                                 r.count, r.pairs_per_setting);
            return out;
        },
        "state"_a, "settings"_a, "pairs_per_setting"_a, "seed"_a, "accidental_rate"_a = 0.0,
        "Records as (arm1, arm2, count, N) tuples");

    auto records_from_tuples =
        [](const std::vector<std::tuple<std::string, std::string, std::uint64_t, double>>&
               tuples) {
            std::vector<sk::TomographyRecord> records;
            records.reserve(tuples.size());
            for (const auto& [a, b, count, pairs] : tuples)
                records.push_back(
                    {{sk::pol_from_string(a), sk::pol_from_string(b)}, count, pairs});
            return records;
        };
    m.def(
        "linear_inversion",
        [records_from_tuples](
            const std::vector<std::tuple<std::string, std::string, std::uint64_t, double>>&
                tuples) { return sk::linear_inversion(records_from_tuples(tuples)); },
        "records"_a, "Hermitian trace-1 least-squares estimate (possibly non-physical)");
    m.def(
        "mle_reconstruct",
        [records_from_tuples](
            const std::vector<std::tuple<std::string, std::string, std::uint64_t, double>>&
                tuples,
            int max_iterations, double tolerance) {
            sk::MleOptions opt{max_iterations, tolerance};
            const auto r = sk::mle_reconstruct(records_from_tuples(tuples), opt);
            return py::make_tuple(r.state, r.log_likelihood, r.iterations, r.converged);
        },
        "records"_a, "max_iterations"_a = 10000, "tolerance"_a = 1e-10,
        "Returns (state, log_likelihood, iterations, converged)");
    m.def("purity", &sk::purity, "state"_a);
    m.def("concurrence", &sk::concurrence, "state"_a);
    m.def("fidelity", &sk::fidelity, "state"_a, "pure_target"_a);
    m.def(
        "coincidence_to_single_ratio",
        [](double sc, double ss, double si) {
            return sk::coincidence_to_single_ratio({sc, ss, si});
        },
        "coincidences_hz"_a, "signal_hz"_a, "idler_hz"_a);
    m.def("normalized_source_metric", &sk::normalized_source_metric,
          "brightness_khz_per_mw"_a, "crystal_length_mm"_a, "detection_efficiency"_a);
    m.def(
        "bootstrap_metric_errors",
        [settings_ctor = settings_from_strings](
            const sk::TwoQubitState& reconstructed,
            const std::vector<std::pair<std::string, std::string>>& settings, double pairs,
            std::optional<sk::TwoQubitState> target, int resamples, std::uint64_t seed) {
            sk::BootstrapOptions opt;
            opt.resamples = resamples;
            opt.seed = seed;
            const auto err =
                sk::bootstrap_metric_errors(reconstructed, settings_ctor(settings), pairs,
                                            target ? &*target : nullptr, opt);
            py::dict out;
            out["purity_sd"] = err.purity_sd;
            out["concurrence_sd"] = err.concurrence_sd;
            if (err.fidelity_sd) out["fidelity_sd"] = *err.fidelity_sd;
            return out;
        },
        "reconstructed"_a, "settings"_a, "pairs_per_setting"_a,
        "fidelity_target"_a = std::nullopt, "resamples"_a = 100, "seed"_a = 1);

    m.attr("__version__") = "0.1.0";
}

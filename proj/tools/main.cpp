#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "spdckit/crystal.hpp"
#include "spdckit/errors.hpp"
#include "spdckit/io.hpp"
#include "spdckit/numeric.hpp"
#include "spdckit/phasematch.hpp"
#include "spdckit/qstate.hpp"
#include "spdckit/spectra.hpp"
#include "spdckit/tomography.hpp"

namespace sk = spdckit;
using nlohmann::json;

namespace {

constexpr double kDegToRad = sk::kPi / 180.0;

double nm_to_um(double nm) { return nm * 1e-3; }

std::string fmt(double v) { return sk::format_double(v); }

/// "20:40:5" -> {20,25,30,35,40}; "20,25,30" -> as listed.
std::vector<double> parse_sweep(const std::string& text) {
    std::vector<double> out;
    if (text.find(':') != std::string::npos) {
        double start, stop, step;
        char c1, c2;
        std::istringstream iss(text);
        if (!(iss >> start >> c1 >> stop >> c2 >> step) || c1 != ':' || c2 != ':' ||
            !(step > 0.0))
            throw sk::ConfigError("bad sweep '" + text + "', expected start:stop:step");
        for (double v = start; v <= stop + 1e-9 * step; v += step) out.push_back(v);
        return out;
    }
    std::istringstream iss(text);
    std::string tok;
    while (std::getline(iss, tok, ',')) {
        try {
            out.push_back(std::stod(tok));
        } catch (const std::exception&) {
            throw sk::ConfigError("bad sweep value '" + tok + "'");
        }
    }
    if (out.empty()) throw sk::ConfigError("empty sweep '" + text + "'");
    return out;
}

struct InteractionOptions {
    std::string crystal_path;
    std::string pol = "yyz";
    std::string prop_axis = "x";
    std::string kind = "ncpm";
    double period_um = 0.0;
    int order = 1;

    void attach(CLI::App* cmd, bool with_kind = true) {
        cmd->add_option("--crystal", crystal_path, "Crystal definition file")
            ->required()
            ->check(CLI::ExistingFile);
        cmd->add_option("--pol", pol, "Polarization triple pump/signal/idler, e.g. yyz");
        cmd->add_option("--axis", prop_axis, "Propagation axis (x, y or z)");
        if (with_kind) {
            cmd->add_option("--kind", kind, "Phase matching: ncpm or qpm")
                ->check(CLI::IsMember({"ncpm", "qpm"}));
            cmd->add_option("--period-um", period_um, "QPM poling period (um)");
            cmd->add_option("--order", order, "QPM grating order m");
        }
    }

    sk::CrystalModel load() const { return sk::load_crystal(crystal_path); }

    sk::InteractionSpec spec() const {
        if (pol.size() != 3) throw sk::ConfigError("--pol needs three axis letters");
        const sk::Axis p = sk::axis_from_string(pol.substr(0, 1));
        const sk::Axis s = sk::axis_from_string(pol.substr(1, 1));
        const sk::Axis i = sk::axis_from_string(pol.substr(2, 1));
        const sk::Axis prop = sk::axis_from_string(prop_axis);
        if (kind == "qpm") return sk::InteractionSpec::qpm(p, s, i, prop, period_um, order);
        return sk::InteractionSpec::ncpm(p, s, i, prop);
    }
};

struct OutputOptions {
    std::string path;
    std::string format = "csv";

    void attach(CLI::App* cmd, const std::string& default_format = "csv") {
        format = default_format;
        cmd->add_option("-o,--output", path, "Output file");
        cmd->add_option("--format", format, "Output format")
            ->check(CLI::IsMember({"csv", "json"}));
    }
};

void emit_curve(const sk::SpectrumCurve& curve, const OutputOptions& out) {
    if (out.path.empty()) return;
    if (out.format == "json")
        sk::write_text_atomic(out.path, sk::curve_to_json(curve).dump(2) + "\n");
    else
        sk::write_text_atomic(out.path, sk::curve_to_csv(curve));
    std::cout << "wrote " << out.path << "\n";
}

void print_curve_stats(const sk::SpectrumCurve& curve) {
    if (curve.metadata().peak_abscissa)
        std::cout << "peak_nm = " << fmt(*curve.metadata().peak_abscissa) << "\n";
    try {
        std::cout << "fwhm_nm = " << fmt(sk::fwhm(curve)) << "\n";
    } catch (const sk::RangeError& e) {
        std::cerr << "warning: FWHM not measurable: " << e.what() << "\n";
    }
}

std::optional<double> tuning_slope(const sk::CrystalModel& crystal,
                                   const sk::InteractionSpec& spec, double temp_c,
                                   double lo_um, double hi_um) {
    const auto curve =
        sk::ncpm_tuning_curve(crystal, spec, {temp_c - 1.0, temp_c + 1.0}, lo_um, hi_um);
    return curve.slope_um_per_c;
}

// --- source-sim helpers -----------------------------------------------------

struct WaveplateOp {
    int arm;
    sk::Plate plate;
    double angle_rad;
};

WaveplateOp parse_waveplate(const std::string& text) {
    // "1:hwp:45" -> arm 1, half-wave plate at 45 degrees
    const auto c1 = text.find(':');
    const auto c2 = text.find(':', c1 == std::string::npos ? c1 : c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
        throw sk::ConfigError("bad --waveplate '" + text + "', expected ARM:PLATE:ANGLE_DEG");
    WaveplateOp op{};
    try {
        op.arm = std::stoi(text.substr(0, c1));
        op.angle_rad = std::stod(text.substr(c2 + 1)) * kDegToRad;
    } catch (const std::exception&) {
        throw sk::ConfigError("bad --waveplate '" + text + "'");
    }
    op.plate = sk::plate_from_string(text.substr(c1 + 1, c2 - c1 - 1));
    return op;
}

json metrics_to_json(const sk::TwoQubitState& state,
                     const std::optional<double>& fidelity_value,
                     const std::optional<sk::MetricErrors>& errors) {
    json m{{"purity", sk::purity(state)}, {"concurrence", sk::concurrence(state)}};
    if (fidelity_value) m["fidelity"] = *fidelity_value;
    if (errors) {
        json e{{"purity_sd", errors->purity_sd}, {"concurrence_sd", errors->concurrence_sd}};
        if (errors->fidelity_sd) e["fidelity_sd"] = *errors->fidelity_sd;
        m["errors"] = e;
    }
    return m;
}

void print_metrics(const json& m) {
    const json e = m.value("errors", json::object());
    auto line = [&](const char* key, const char* sd_key) {
        if (!m.contains(key)) return;
        std::cout << key << " = " << fmt(m[key].get<double>());
        if (e.contains(sd_key)) std::cout << " +- " << fmt(e[sd_key].get<double>());
        std::cout << "\n";
    };
    line("purity", "purity_sd");
    line("concurrence", "concurrence_sd");
    line("fidelity", "fidelity_sd");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"SPDC photon-pair source design toolkit: phase matching, spectra, "
                 "entangled-state simulation and tomography"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Read options from a config file (CLI flags override)");
    bool show_config = false;
    app.add_flag("--show-config", show_config, "Print the effective configuration");

    // ---------------- find-ncpm ----------------
    auto* find_cmd = app.add_subcommand(
        "find-ncpm", "Solve the degenerate NCPM wavelength for a bulk crystal");
    InteractionOptions find_opts;
    find_opts.attach(find_cmd, false);
    double find_temp = 30.0;
    std::vector<double> find_bracket{900.0, 1300.0};
    std::string find_temps;
    OutputOptions find_out;
    find_cmd->add_option("--temp-c", find_temp, "Crystal temperature (C)");
    find_cmd->add_option("--bracket-nm", find_bracket, "Search bracket (nm)")
        ->expected(2);
    find_cmd->add_option("--temps", find_temps,
                         "Also sweep temperatures (start:stop:step or comma list) to CSV");
    find_out.attach(find_cmd, "json");
    find_cmd->callback([&] {
        const auto crystal = find_opts.load();
        const auto spec = find_opts.spec();
        const double lo = nm_to_um(find_bracket[0]);
        const double hi = nm_to_um(find_bracket[1]);
        bool multiple = false;
        const double lc =
            sk::find_degenerate_ncpm(crystal, spec, find_temp, lo, hi, 1e-12, &multiple);
        if (multiple)
            std::cerr << "warning: multiple roots in the bracket; reporting the first\n";
        const auto residual = sk::wavevector_mismatch(
            crystal, spec, sk::WavelengthTriple::degenerate(lc), find_temp);
        const auto slope = tuning_slope(crystal, spec, find_temp, lo, hi);
        std::cout << "lambda_c_nm = " << fmt(lc * 1e3) << "\n";
        std::cout << "residual_dk_rad_mm = " << fmt(residual.delta_k_rad_mm) << "\n";
        if (slope) std::cout << "slope_nm_per_c = " << fmt(*slope * 1e3) << "\n";

        if (!find_temps.empty()) {
            const auto curve =
                sk::ncpm_tuning_curve(crystal, spec, parse_sweep(find_temps), lo, hi);
            std::ostringstream csv;
            csv << "temperature_c,lambda_c_nm\n";
            for (const auto& p : curve.points) {
                if (!p.ok) {
                    std::cerr << "warning: T=" << fmt(p.temperature_c) << " C: " << p.error
                              << "\n";
                    continue;
                }
                csv << fmt(p.temperature_c) << "," << fmt(p.wavelength_um * 1e3) << "\n";
            }
            const std::string path = find_out.path.empty() ? "tuning.csv" : find_out.path;
            sk::write_text_atomic(path, csv.str());
            std::cout << "wrote " << path << "\n";
        } else if (!find_out.path.empty()) {
            json report{{"lambda_c_nm", lc * 1e3},
                        {"residual_dk_rad_mm", residual.delta_k_rad_mm},
                        {"residual_cycles_per_mm", residual.cycles_per_mm},
                        {"temperature_c", find_temp}};
            if (slope) report["slope_nm_per_c"] = *slope * 1e3;
            sk::write_text_atomic(find_out.path, report.dump(2) + "\n");
            std::cout << "wrote " << find_out.path << "\n";
        }
    });

    // ---------------- tuning-curve ----------------
    auto* tune_cmd =
        app.add_subcommand("tuning-curve", "Sweep the NCPM wavelength over temperature");
    InteractionOptions tune_opts;
    tune_opts.attach(tune_cmd, false);
    std::string tune_temps;
    std::vector<double> tune_bracket{900.0, 1300.0};
    OutputOptions tune_out;
    tune_cmd->add_option("--temps", tune_temps, "start:stop:step or comma list (C)")
        ->required();
    tune_cmd->add_option("--bracket-nm", tune_bracket, "Search bracket (nm)")->expected(2);
    tune_out.attach(tune_cmd);
    tune_cmd->callback([&] {
        const auto crystal = tune_opts.load();
        const auto spec = tune_opts.spec();
        const auto curve = sk::ncpm_tuning_curve(crystal, spec, parse_sweep(tune_temps),
                                                 nm_to_um(tune_bracket[0]),
                                                 nm_to_um(tune_bracket[1]));
        std::ostringstream csv;
        csv << "temperature_c,lambda_c_nm\n";
        for (const auto& p : curve.points) {
            if (!p.ok) {
                std::cerr << "warning: T=" << fmt(p.temperature_c) << " C: " << p.error << "\n";
                continue;
            }
            csv << fmt(p.temperature_c) << "," << fmt(p.wavelength_um * 1e3) << "\n";
        }
        if (curve.slope_um_per_c)
            std::cout << "slope_nm_per_c = " << fmt(*curve.slope_um_per_c * 1e3) << "\n";
        if (tune_out.path.empty())
            std::cout << csv.str();
        else {
            sk::write_text_atomic(tune_out.path, csv.str());
            std::cout << "wrote " << tune_out.path << "\n";
        }
    });

    // ---------------- spectrum ----------------
    auto* spec_cmd = app.add_subcommand(
        "spectrum", "SPDC generation-rate spectrum vs signal wavelength at fixed pump");
    InteractionOptions spec_opts;
    spec_opts.attach(spec_cmd);
    double sp_pump_nm = 0.0, sp_center_nm = 0.0, sp_span_nm = 6.0;
    double sp_length = 20.0, sp_temp = 30.0;
    int sp_points = 2048;
    OutputOptions spec_out;
    spec_cmd->add_option("--pump-nm", sp_pump_nm, "Pump wavelength (nm)")->required();
    spec_cmd->add_option("--center-nm", sp_center_nm,
                         "Scan center (nm); default: degenerate 2x pump");
    spec_cmd->add_option("--span-nm", sp_span_nm, "Full scan width (nm)");
    spec_cmd->add_option("--points", sp_points, "Sample count");
    spec_cmd->add_option("--length-mm", sp_length, "Crystal length (mm)");
    spec_cmd->add_option("--temp-c", sp_temp, "Crystal temperature (C)");
    spec_out.attach(spec_cmd);
    spec_cmd->callback([&] {
        const auto crystal = spec_opts.load();
        const double center = (sp_center_nm > 0.0) ? sp_center_nm : 2.0 * sp_pump_nm;
        const auto curve = sk::generation_rate_spectrum(
            crystal, spec_opts.spec(), nm_to_um(sp_pump_nm),
            nm_to_um(center - sp_span_nm / 2.0), nm_to_um(center + sp_span_nm / 2.0),
            sp_length, sp_temp, sp_points);
        print_curve_stats(curve);
        emit_curve(curve, spec_out);
    });

    // ---------------- shg ----------------
    auto* shg_cmd = app.add_subcommand(
        "shg", "Degenerate (second-harmonic) tuning curve vs fundamental wavelength");
    InteractionOptions shg_opts;
    shg_opts.attach(shg_cmd);
    double shg_center_nm = 0.0, shg_span_nm = 6.0, shg_length = 20.0, shg_temp = 30.0;
    std::vector<double> shg_bracket{900.0, 1300.0};
    int shg_points = 2048;
    OutputOptions shg_out;
    shg_cmd->add_option("--center-nm", shg_center_nm,
                        "Scan center (nm); default: solved degenerate wavelength");
    shg_cmd->add_option("--span-nm", shg_span_nm, "Full scan width (nm)");
    shg_cmd->add_option("--bracket-nm", shg_bracket, "Root bracket for the default center")
        ->expected(2);
    shg_cmd->add_option("--points", shg_points, "Sample count");
    shg_cmd->add_option("--length-mm", shg_length, "Crystal length (mm)");
    shg_cmd->add_option("--temp-c", shg_temp, "Crystal temperature (C)");
    shg_out.attach(shg_cmd);
    shg_cmd->callback([&] {
        const auto crystal = shg_opts.load();
        const auto spec = shg_opts.spec();
        double center = shg_center_nm;
        if (!(center > 0.0)) {
            if (spec.kind != sk::PmKind::Ncpm)
                throw sk::ConfigError("--center-nm is required for QPM tuning curves");
            center = sk::find_degenerate_ncpm(crystal, spec, shg_temp,
                                              nm_to_um(shg_bracket[0]),
                                              nm_to_um(shg_bracket[1])) * 1e3;
        }
        const auto curve = sk::shg_tuning_curve(
            crystal, spec, nm_to_um(center - shg_span_nm / 2.0),
            nm_to_um(center + shg_span_nm / 2.0), shg_length, shg_temp, shg_points);
        print_curve_stats(curve);
        emit_curve(curve, shg_out);
    });

    // ---------------- jsa ----------------
    auto* jsa_cmd =
        app.add_subcommand("jsa", "Joint spectral amplitude on a frequency grid");
    InteractionOptions jsa_opts;
    jsa_opts.attach(jsa_cmd);
    double jsa_pump_nm = 0.0, jsa_fwhm_nm = 0.01, jsa_length = 20.0, jsa_temp = 30.0;
    double jsa_span = 0.0;
    int jsa_points = 256;
    OutputOptions jsa_out;
    jsa_cmd->add_option("--pump-center-nm", jsa_pump_nm, "Pump center wavelength (nm)")
        ->required();
    jsa_cmd->add_option("--pump-fwhm-nm", jsa_fwhm_nm, "Gaussian pump FWHM (nm)");
    jsa_cmd->add_option("--points", jsa_points, "Grid points per axis (>= 64)");
    jsa_cmd->add_option("--span-rad-s", jsa_span,
                        "Full frequency span (rad/s); default: auto-sized");
    jsa_cmd->add_option("--length-mm", jsa_length, "Crystal length (mm)");
    jsa_cmd->add_option("--temp-c", jsa_temp, "Crystal temperature (C)");
    jsa_out.attach(jsa_cmd, "json");
    jsa_cmd->callback([&] {
        const auto crystal = jsa_opts.load();
        sk::JsaGridSpec grid;
        grid.points = jsa_points;
        if (jsa_span > 0.0) grid.span_rad_s = jsa_span;
        const auto jsa = sk::joint_spectral_amplitude(crystal, jsa_opts.spec(),
                                                      nm_to_um(jsa_pump_nm), jsa_fwhm_nm,
                                                      grid, jsa_length, jsa_temp);
        std::cout << "schmidt_purity = " << fmt(sk::schmidt_purity(jsa)) << "\n";
        const std::string path = jsa_out.path.empty() ? "jsa.json" : jsa_out.path;
        if (jsa_out.format == "csv")
            sk::write_text_atomic(path, sk::jsa_to_csv(jsa));
        else
            sk::write_text_atomic(path, sk::jsa_to_json(jsa).dump() + "\n");
        std::cout << "wrote " << path << "\n";
    });

    // ---------------- hom ----------------
    auto* hom_cmd = app.add_subcommand(
        "hom", "Hong-Ou-Mandel coincidence dip from a stored joint spectral amplitude");
    std::string hom_jsa_path;
    double hom_tau_max = 8.0;
    int hom_points = 201;
    OutputOptions hom_out;
    hom_cmd->add_option("--jsa", hom_jsa_path, "JSA JSON file")
        ->required()
        ->check(CLI::ExistingFile);
    hom_cmd->add_option("--tau-max-ps", hom_tau_max, "Delay grid half-width (ps)");
    hom_cmd->add_option("--points", hom_points, "Delay samples");
    hom_out.attach(hom_cmd);
    hom_cmd->callback([&] {
        const auto jsa = sk::jsa_from_json(json::parse(sk::read_text(hom_jsa_path)));
        if (hom_points < 2) throw sk::ConfigError("need at least two delay points");
        std::vector<double> delays(hom_points);
        for (int i = 0; i < hom_points; ++i)
            delays[i] = -hom_tau_max + 2.0 * hom_tau_max * i / (hom_points - 1);
        const auto hom = sk::hom_curve(jsa, delays);
        std::cout << "visibility = " << fmt(hom.visibility) << "\n";
        std::size_t zero_idx = 0;
        for (std::size_t i = 1; i < hom.curve.size(); ++i)
            if (std::abs(hom.curve.abscissa()[i]) < std::abs(hom.curve.abscissa()[zero_idx]))
                zero_idx = i;
        std::cout << "p_zero_delay = " << fmt(hom.curve.ordinate()[zero_idx]) << "\n";
        emit_curve(hom.curve, hom_out);
    });

    // ---------------- qpm-period ----------------
    auto* qpm_cmd = app.add_subcommand(
        "qpm-period", "Poling period that phase-matches a triple at a given order");
    InteractionOptions qpm_opts;
    qpm_opts.attach(qpm_cmd, false);
    double qp_pump_nm = 0.0, qp_signal_nm = 0.0, qp_idler_nm = 0.0, qp_temp = 30.0;
    int qp_order = 1;
    OutputOptions qpm_out;
    qpm_cmd->add_option("--pump-nm", qp_pump_nm, "Pump wavelength (nm)");
    qpm_cmd->add_option("--signal-nm", qp_signal_nm, "Signal wavelength (nm)");
    qpm_cmd->add_option("--idler-nm", qp_idler_nm, "Idler wavelength (nm)");
    qpm_cmd->add_option("--order", qp_order, "Grating order m");
    qpm_cmd->add_option("--temp-c", qp_temp, "Crystal temperature (C)");
    qpm_out.attach(qpm_cmd, "json");
    qpm_cmd->callback([&] {
        const auto crystal = qpm_opts.load();
        std::optional<sk::WavelengthTriple> triple;
        if (qp_pump_nm > 0.0 && qp_signal_nm > 0.0 && qp_idler_nm > 0.0)
            triple = sk::WavelengthTriple(nm_to_um(qp_pump_nm), nm_to_um(qp_signal_nm),
                                          nm_to_um(qp_idler_nm));
        else if (qp_pump_nm > 0.0 && qp_signal_nm > 0.0)
            triple = sk::WavelengthTriple::from_pump_signal(nm_to_um(qp_pump_nm),
                                                            nm_to_um(qp_signal_nm));
        else if (qp_signal_nm > 0.0 && qp_idler_nm > 0.0)
            triple = sk::WavelengthTriple::from_signal_idler(nm_to_um(qp_signal_nm),
                                                             nm_to_um(qp_idler_nm));
        else
            throw sk::ConfigError("give at least two of --pump-nm/--signal-nm/--idler-nm");
        const auto& pol = qpm_opts.pol;
        if (pol.size() != 3) throw sk::ConfigError("--pol needs three axis letters");
        const sk::Axis prop = sk::axis_from_string(qpm_opts.prop_axis);
        const sk::Axis pa = sk::axis_from_string(pol.substr(0, 1));
        const sk::Axis sa = sk::axis_from_string(pol.substr(1, 1));
        const sk::Axis ia = sk::axis_from_string(pol.substr(2, 1));
        const double period =
            sk::qpm_period(crystal, pa, sa, ia, prop, *triple, qp_temp, qp_order);
        const auto check = sk::wavevector_mismatch(
            crystal, sk::InteractionSpec::qpm(pa, sa, ia, prop, period, qp_order), *triple,
            qp_temp);
        std::cout << "period_um = " << fmt(period) << "\n";
        std::cout << "residual_dk_rad_mm = " << fmt(check.delta_k_rad_mm) << "\n";
        if (!qpm_out.path.empty()) {
            sk::write_text_atomic(qpm_out.path,
                                  json{{"period_um", period},
                                       {"order", qp_order},
                                       {"residual_dk_rad_mm", check.delta_k_rad_mm}}
                                          .dump(2) +
                                      "\n");
            std::cout << "wrote " << qpm_out.path << "\n";
        }
    });

    // ---------------- compare-pm ----------------
    auto* cmp_cmd = app.add_subcommand(
        "compare-pm", "Effective nonlinearity and relative brightness per technique");
    std::string cmp_crystal, cmp_dlabel = "d24";
    std::vector<int> cmp_orders{1, 3};
    double cmp_d22 = 0.0, cmp_theta = 0.0, cmp_phi = 0.0, cmp_rho = 0.0;
    OutputOptions cmp_out;
    cmp_cmd->add_option("--crystal", cmp_crystal, "Crystal definition file")
        ->required()
        ->check(CLI::ExistingFile);
    cmp_cmd->add_option("--d-label", cmp_dlabel, "Nonlinear coefficient used as d_p");
    cmp_cmd->add_option("--orders", cmp_orders, "QPM grating orders to tabulate");
    cmp_cmd->add_option("--bpm-d22", cmp_d22, "Add a BPM row with this d22 (pm/V)");
    cmp_cmd->add_option("--theta-deg", cmp_theta, "BPM polar angle (deg)");
    cmp_cmd->add_option("--phi-deg", cmp_phi, "BPM azimuthal angle (deg)");
    cmp_cmd->add_option("--rho-deg", cmp_rho, "BPM walk-off angle (deg)");
    cmp_out.attach(cmp_cmd);
    cmp_cmd->callback([&] {
        const auto crystal = sk::load_crystal(cmp_crystal);
        const double d_p = crystal.d(cmp_dlabel).value_pm_per_v;
        sk::DeffParams qpm1;
        qpm1.d_p_pm_per_v = d_p;
        qpm1.qpm_order = 1;
        const double d_qpm1 = sk::effective_nonlinearity(sk::PmKind::Qpm, qpm1);

        struct Row {
            std::string technique;
            double d_eff;
            double ratio;
        };
        std::vector<Row> rows;
        sk::DeffParams ncpm;
        ncpm.d_p_pm_per_v = d_p;
        const double d_ncpm = sk::effective_nonlinearity(sk::PmKind::Ncpm, ncpm);
        rows.push_back({"NCPM", d_ncpm, sk::brightness_ratio(d_ncpm, d_qpm1)});
        for (int m : cmp_orders) {
            sk::DeffParams qp;
            qp.d_p_pm_per_v = d_p;
            qp.qpm_order = m;
            const double d = sk::effective_nonlinearity(sk::PmKind::Qpm, qp);
            rows.push_back({"QPM m=" + std::to_string(m), d,
                            d == 0.0 ? 0.0 : sk::brightness_ratio(d, d_qpm1)});
        }
        if (cmp_d22 > 0.0) {
            sk::DeffParams bp;
            bp.d22_pm_per_v = cmp_d22;
            bp.geometry = sk::BpmGeometry{cmp_theta * kDegToRad, cmp_phi * kDegToRad,
                                          cmp_rho * kDegToRad};
            const double d = sk::effective_nonlinearity(sk::PmKind::Bpm, bp);
            rows.push_back({"BPM", d, sk::brightness_ratio(d, d_qpm1)});
        }
        std::cout << "technique,d_eff_pm_per_v,brightness_vs_qpm1\n";
        std::ostringstream csv;
        csv << "technique,d_eff_pm_per_v,brightness_vs_qpm1\n";
        for (const auto& r : rows) {
            const std::string line =
                r.technique + "," + fmt(r.d_eff) + "," + fmt(r.ratio) + "\n";
            std::cout << line;
            csv << line;
        }
        if (!cmp_out.path.empty()) {
            if (cmp_out.format == "json") {
                json arr = json::array();
                for (const auto& r : rows)
                    arr.push_back({{"technique", r.technique},
                                   {"d_eff_pm_per_v", r.d_eff},
                                   {"brightness_vs_qpm1", r.ratio}});
                sk::write_text_atomic(cmp_out.path, arr.dump(2) + "\n");
            } else {
                sk::write_text_atomic(cmp_out.path, csv.str());
            }
            std::cout << "wrote " << cmp_out.path << "\n";
        }
    });

    // ---------------- source-sim ----------------
    auto* sim_cmd = app.add_subcommand(
        "source-sim", "Sagnac source to tomography pipeline: state, counts, "
                      "reconstruction, metrics");
    double sim_phase_deg = 0.0, sim_share = 0.5, sim_noise = 0.0, sim_pairs = 1e5;
    double sim_accidental = 0.0;
    std::uint64_t sim_seed = 12345;
    int sim_bootstrap = 100;
    std::vector<std::string> sim_plates;
    std::string sim_target, sim_counts_out;
    OutputOptions sim_out;
    sim_cmd->add_option("--phase-deg", sim_phase_deg, "Relative phase phi (deg)");
    sim_cmd->add_option("--hv-share", sim_share, "Amplitude share p of the HV component");
    sim_cmd->add_option("--noise-w", sim_noise, "White-noise weight w");
    sim_cmd->add_option("--waveplate", sim_plates,
                        "Waveplate ARM:PLATE:ANGLE_DEG (repeatable, applied in order)");
    sim_cmd->add_option("--pairs", sim_pairs, "Expected pairs per setting N");
    sim_cmd->add_option("--accidental", sim_accidental, "Accidental rate a in [0,1)");
    sim_cmd->add_option("--seed", sim_seed, "Master RNG seed");
    sim_cmd->add_option("--bootstrap", sim_bootstrap, "Bootstrap resamples (0 to skip)");
    sim_cmd->add_option("--target", sim_target,
                        "Fidelity target Bell label (default: the intended pure state)");
    sim_cmd->add_option("--counts-out", sim_counts_out, "Also write the simulated counts CSV");
    sim_out.attach(sim_cmd, "json");
    sim_cmd->callback([&] {
        sk::SourceImperfections imp;
        imp.phase_rad = sim_phase_deg * kDegToRad;
        imp.hv_share = sim_share;
        imp.white_noise = sim_noise;
        sk::TwoQubitState state = sk::sagnac_state(imp);
        sk::SourceImperfections pure = imp;
        pure.white_noise = 0.0;
        sk::TwoQubitState intended = sk::sagnac_state(pure);
        for (const auto& text : sim_plates) {
            const auto op = parse_waveplate(text);
            state = sk::waveplate_transform(state, op.arm, op.plate, op.angle_rad);
            intended = sk::waveplate_transform(intended, op.arm, op.plate, op.angle_rad);
        }
        const sk::TwoQubitState target =
            sim_target.empty() ? intended
                               : sk::bell_state(sk::bell_label_from_string(sim_target));

        const auto settings = sk::default_settings();
        const auto records =
            sk::simulate_counts(state, settings, sim_pairs, sim_seed, sim_accidental);
        if (!sim_counts_out.empty()) {
            sk::write_text_atomic(sim_counts_out, sk::records_to_csv(records));
            std::cout << "wrote " << sim_counts_out << "\n";
        }
        const auto fit = sk::mle_reconstruct(records);
        if (!fit.converged)
            std::cerr << "warning: MLE hit the iteration cap before the tolerance\n";
        std::optional<sk::MetricErrors> errors;
        if (sim_bootstrap > 0) {
            sk::BootstrapOptions bopt;
            bopt.resamples = sim_bootstrap;
            bopt.seed = sim_seed;
            errors = sk::bootstrap_metric_errors(fit.state, settings, sim_pairs, &target,
                                                 bopt);
        }
        const json metrics =
            metrics_to_json(fit.state, sk::fidelity(fit.state, target), errors);
        print_metrics(metrics);
        json out = sk::state_to_json(fit.state);
        out["metrics"] = metrics;
        out["reconstruction"] = {{"iterations", fit.iterations},
                                 {"converged", fit.converged},
                                 {"log_likelihood", fit.log_likelihood},
                                 {"settings", settings.size()},
                                 {"pairs_per_setting", sim_pairs},
                                 {"accidental", sim_accidental},
                                 {"seed", sim_seed}};
        const std::string path = sim_out.path.empty() ? "state.json" : sim_out.path;
        sk::write_text_atomic(path, out.dump(2) + "\n");
        std::cout << "wrote " << path << "\n";
    });

    // ---------------- tomo ----------------
    auto* tomo_cmd = app.add_subcommand(
        "tomo", "Reconstruct a density matrix from a tomography counts CSV");
    std::string tomo_counts, tomo_target;
    std::uint64_t tomo_seed = 12345;
    int tomo_bootstrap = 100;
    OutputOptions tomo_out;
    tomo_cmd->add_option("--counts", tomo_counts, "Counts CSV")
        ->required()
        ->check(CLI::ExistingFile);
    tomo_cmd->add_option("--seed", tomo_seed, "Bootstrap RNG seed");
    tomo_cmd->add_option("--bootstrap", tomo_bootstrap, "Bootstrap resamples (0 to skip)");
    tomo_cmd->add_option("--target", tomo_target, "Fidelity target Bell label");
    tomo_out.attach(tomo_cmd, "json");
    tomo_cmd->callback([&] {
        const auto records = sk::records_from_csv(sk::read_text(tomo_counts));
        const auto fit = sk::mle_reconstruct(records);
        if (!fit.converged)
            std::cerr << "warning: MLE hit the iteration cap before the tolerance\n";
        std::optional<sk::TwoQubitState> target;
        if (!tomo_target.empty())
            target = sk::bell_state(sk::bell_label_from_string(tomo_target));
        std::optional<sk::MetricErrors> errors;
        if (tomo_bootstrap > 0) {
            std::vector<sk::MeasurementSetting> settings;
            settings.reserve(records.size());
            for (const auto& r : records) settings.push_back(r.setting);
            const double pairs = records.front().pairs_per_setting;
            sk::BootstrapOptions bopt;
            bopt.resamples = tomo_bootstrap;
            bopt.seed = tomo_seed;
            errors = sk::bootstrap_metric_errors(fit.state, settings, pairs,
                                                 target ? &*target : nullptr, bopt);
        }
        std::optional<double> fid;
        if (target) fid = sk::fidelity(fit.state, *target);
        const json metrics = metrics_to_json(fit.state, fid, errors);
        print_metrics(metrics);
        json out = sk::state_to_json(fit.state);
        out["metrics"] = metrics;
        out["reconstruction"] = {{"iterations", fit.iterations},
                                 {"converged", fit.converged},
                                 {"log_likelihood", fit.log_likelihood},
                                 {"settings", records.size()},
                                 {"seed", tomo_seed}};
        const std::string path = tomo_out.path.empty() ? "state.json" : tomo_out.path;
        sk::write_text_atomic(path, out.dump(2) + "\n");
        std::cout << "wrote " << path << "\n";
    });

    // ---------------- metrics ----------------
    auto* met_cmd = app.add_subcommand(
        "metrics", "Metrics from a stored density matrix, count rates or brightness");
    std::string met_state, met_target;
    std::vector<double> met_rates;
    double met_brightness = 0.0, met_length = 0.0, met_eff = 0.0;
    auto* met_state_opt =
        met_cmd->add_option("--state", met_state, "Density-matrix JSON file")
            ->check(CLI::ExistingFile);
    met_cmd->add_option("--target", met_target, "Fidelity target Bell label")
        ->needs(met_state_opt);
    met_cmd->add_option("--rates", met_rates,
                        "Coincidence, signal and idler rates (Hz) for eta_c")
        ->expected(3);
    auto* met_b = met_cmd->add_option("--brightness", met_brightness,
                                      "Source brightness (kHz/mW) for the U metric");
    auto* met_l = met_cmd->add_option("--length-mm", met_length, "Crystal length (mm)");
    auto* met_e =
        met_cmd->add_option("--efficiency", met_eff, "Per-arm detection efficiency (0,1]");
    met_b->needs(met_l)->needs(met_e);
    met_cmd->require_option(1, 0);
    met_cmd->callback([&] {
        if (!met_state.empty()) {
            const auto state = sk::state_from_json(json::parse(sk::read_text(met_state)));
            std::optional<double> fid;
            if (!met_target.empty())
                fid = sk::fidelity(state,
                                   sk::bell_state(sk::bell_label_from_string(met_target)));
            print_metrics(metrics_to_json(state, fid, std::nullopt));
        }
        if (!met_rates.empty()) {
            const double eta = sk::coincidence_to_single_ratio(
                {met_rates[0], met_rates[1], met_rates[2]});
            std::cout << "eta_c = " << fmt(eta) << "\n";
        }
        if (met_brightness > 0.0) {
            std::cout << "u_metric_khz_mw_mm = "
                      << fmt(sk::normalized_source_metric(met_brightness, met_length, met_eff))
                      << "\n";
        }
    });

    // lets --config / --show-config follow the subcommand on the command line
    for (auto* sub : app.get_subcommands({})) sub->fallthrough();

    try {
        app.parse(argc, argv);
        if (show_config) std::cout << app.config_to_str(true, true);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const sk::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

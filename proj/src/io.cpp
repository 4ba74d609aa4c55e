#include "spdckit/io.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "spdckit/errors.hpp"
#include "spdckit/numeric.hpp"

namespace spdckit {

using nlohmann::json;

void write_text_atomic(const std::filesystem::path& path, std::string_view content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open '" + tmp.string() + "' for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw Error("write failed for '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, path);
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

namespace {

std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream iss(line);
    while (std::getline(iss, cell, ',')) cells.push_back(cell);
    return cells;
}

double parse_number(const std::string& tok, int line) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw ParseError("line " + std::to_string(line) + ": not a number: '" + tok + "'");
    }
}

} // namespace

std::string curve_to_csv(const SpectrumCurve& curve) {
    const auto& m = curve.metadata();
    std::ostringstream os;
    os << "# kind = " << m.kind << "\n";
    if (!m.crystal.empty()) os << "# crystal = " << m.crystal << "\n";
    os << "# length_mm = " << format_double(m.length_mm) << "\n";
    os << "# temperature_c = " << format_double(m.temperature_c) << "\n";
    os << "# pump_um = " << format_double(m.pump_um) << "\n";
    if (m.peak_abscissa)
        os << "# peak_abscissa = " << format_double(*m.peak_abscissa) << "\n";
    const bool delay = m.abscissa_unit == "ps";
    os << (delay ? "delay_ps,coincidence_probability" : "wavelength_nm,intensity") << "\n";
    for (std::size_t i = 0; i < curve.size(); ++i)
        os << format_double(curve.abscissa()[i]) << "," << format_double(curve.ordinate()[i])
           << "\n";
    return os.str();
}

SpectrumCurve curve_from_csv(std::string_view text) {
    CurveMetadata meta;
    std::vector<double> abscissa, ordinate;
    std::istringstream iss{std::string(text)};
    std::string line;
    int number = 0;
    bool header_seen = false;
    while (std::getline(iss, line)) {
        ++number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            std::string key = line.substr(1, eq - 1);
            std::string value = line.substr(eq + 1);
            auto trim = [](std::string& s) {
                s.erase(0, s.find_first_not_of(" \t"));
                s.erase(s.find_last_not_of(" \t") + 1);
            };
            trim(key);
            trim(value);
            if (key == "kind") meta.kind = value;
            else if (key == "crystal") meta.crystal = value;
            else if (key == "length_mm") meta.length_mm = parse_number(value, number);
            else if (key == "temperature_c") meta.temperature_c = parse_number(value, number);
            else if (key == "pump_um") meta.pump_um = parse_number(value, number);
            else if (key == "peak_abscissa") meta.peak_abscissa = parse_number(value, number);
            continue;
        }
        if (!header_seen) {
            header_seen = true;
            meta.abscissa_unit = line.rfind("delay_ps", 0) == 0 ? "ps" : "nm";
            continue;
        }
        const auto cells = split_csv_row(line);
        if (cells.size() != 2)
            throw ParseError("line " + std::to_string(number) + ": expected two columns");
        abscissa.push_back(parse_number(cells[0], number));
        ordinate.push_back(parse_number(cells[1], number));
    }
    return SpectrumCurve::probability(std::move(abscissa), std::move(ordinate),
                                      std::move(meta));
}

namespace {

json metadata_to_json(const CurveMetadata& m) {
    json j{{"kind", m.kind},
           {"crystal", m.crystal},
           {"length_mm", m.length_mm},
           {"temperature_c", m.temperature_c},
           {"pump_um", m.pump_um},
           {"abscissa_unit", m.abscissa_unit}};
    if (m.peak_abscissa) j["peak_abscissa"] = *m.peak_abscissa;
    return j;
}

CurveMetadata metadata_from_json(const json& j) {
    CurveMetadata m;
    m.kind = j.value("kind", "");
    m.crystal = j.value("crystal", "");
    m.length_mm = j.value("length_mm", 0.0);
    m.temperature_c = j.value("temperature_c", 0.0);
    m.pump_um = j.value("pump_um", 0.0);
    m.abscissa_unit = j.value("abscissa_unit", "nm");
    if (j.contains("peak_abscissa")) m.peak_abscissa = j["peak_abscissa"].get<double>();
    return m;
}

} // namespace

json curve_to_json(const SpectrumCurve& curve) {
    return json{{"metadata", metadata_to_json(curve.metadata())},
                {"abscissa", curve.abscissa()},
                {"ordinate", curve.ordinate()}};
}

SpectrumCurve curve_from_json(const json& j) {
    try {
        return SpectrumCurve::probability(j.at("abscissa").get<std::vector<double>>(),
                                          j.at("ordinate").get<std::vector<double>>(),
                                          metadata_from_json(j.at("metadata")));
    } catch (const json::exception& e) {
        throw ParseError(std::string("bad curve JSON: ") + e.what());
    }
}

std::string jsa_to_csv(const JointSpectralAmplitude& jsa) {
    std::ostringstream os;
    os << "signal_rad_s,idler_rad_s,real,imag\n";
    for (Eigen::Index r = 0; r < jsa.signal_freqs().size(); ++r)
        for (Eigen::Index c = 0; c < jsa.idler_freqs().size(); ++c) {
            const auto v = jsa.amplitude()(r, c);
            os << format_double(jsa.signal_freqs()[r]) << ","
               << format_double(jsa.idler_freqs()[c]) << "," << format_double(v.real()) << ","
               << format_double(v.imag()) << "\n";
        }
    return os.str();
}

json jsa_to_json(const JointSpectralAmplitude& jsa) {
    const Eigen::Index rows = jsa.signal_freqs().size();
    const Eigen::Index cols = jsa.idler_freqs().size();
    std::vector<double> sig(jsa.signal_freqs().data(), jsa.signal_freqs().data() + rows);
    std::vector<double> idl(jsa.idler_freqs().data(), jsa.idler_freqs().data() + cols);
    std::vector<std::vector<double>> re(rows), im(rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
        re[r].resize(cols);
        im[r].resize(cols);
        for (Eigen::Index c = 0; c < cols; ++c) {
            re[r][c] = jsa.amplitude()(r, c).real();
            im[r][c] = jsa.amplitude()(r, c).imag();
        }
    }
    return json{{"kind", "jsa"},
                {"signal_freqs_rad_s", sig},
                {"idler_freqs_rad_s", idl},
                {"amplitude_real", re},
                {"amplitude_imag", im},
                {"pump_center_rad_s", jsa.pump_center_rad_s()},
                {"pump_fwhm_rad_s", jsa.pump_fwhm_rad_s()},
                {"length_mm", jsa.length_mm()}};
}

JointSpectralAmplitude jsa_from_json(const json& j) {
    try {
        const auto sig = j.at("signal_freqs_rad_s").get<std::vector<double>>();
        const auto idl = j.at("idler_freqs_rad_s").get<std::vector<double>>();
        const auto re = j.at("amplitude_real").get<std::vector<std::vector<double>>>();
        const auto im = j.at("amplitude_imag").get<std::vector<std::vector<double>>>();
        const Eigen::Index rows = static_cast<Eigen::Index>(sig.size());
        const Eigen::Index cols = static_cast<Eigen::Index>(idl.size());
        if (static_cast<Eigen::Index>(re.size()) != rows ||
            static_cast<Eigen::Index>(im.size()) != rows)
            throw ParseError("JSA JSON: amplitude row count does not match the signal grid");
        Eigen::MatrixXcd amp(rows, cols);
        for (Eigen::Index r = 0; r < rows; ++r) {
            if (static_cast<Eigen::Index>(re[r].size()) != cols ||
                static_cast<Eigen::Index>(im[r].size()) != cols)
                throw ParseError("JSA JSON: amplitude column count does not match the grid");
            for (Eigen::Index c = 0; c < cols; ++c)
                amp(r, c) = std::complex<double>(re[r][c], im[r][c]);
        }
        Eigen::VectorXd sigv = Eigen::Map<const Eigen::VectorXd>(sig.data(), rows);
        Eigen::VectorXd idlv = Eigen::Map<const Eigen::VectorXd>(idl.data(), cols);
        return JointSpectralAmplitude(std::move(sigv), std::move(idlv), std::move(amp),
                                      j.value("pump_center_rad_s", 0.0),
                                      j.value("pump_fwhm_rad_s", 0.0),
                                      j.value("length_mm", 0.0));
    } catch (const json::exception& e) {
        throw ParseError(std::string("bad JSA JSON: ") + e.what());
    }
}

json state_to_json(const TwoQubitState& state) {
    std::vector<std::vector<double>> re(4), im(4);
    for (int r = 0; r < 4; ++r) {
        re[r].resize(4);
        im[r].resize(4);
        for (int c = 0; c < 4; ++c) {
            re[r][c] = state.matrix()(r, c).real();
            im[r][c] = state.matrix()(r, c).imag();
        }
    }
    return json{{"basis", TwoQubitState::basis_labels()}, {"real", re}, {"imag", im}};
}

TwoQubitState state_from_json(const json& j) {
    try {
        const auto basis = j.at("basis").get<std::vector<std::string>>();
        const auto& expected = TwoQubitState::basis_labels();
        if (basis.size() != 4 || !std::equal(basis.begin(), basis.end(), expected.begin()))
            throw ParseError("density-matrix JSON: basis tag is not {HH, HV, VH, VV}");
        const auto re = j.at("real").get<std::vector<std::vector<double>>>();
        const auto im = j.at("imag").get<std::vector<std::vector<double>>>();
        if (re.size() != 4 || im.size() != 4)
            throw ParseError("density-matrix JSON: need 4x4 real and imag arrays");
        Eigen::Matrix4cd rho;
        for (int r = 0; r < 4; ++r) {
            if (re[r].size() != 4 || im[r].size() != 4)
                throw ParseError("density-matrix JSON: need 4x4 real and imag arrays");
            for (int c = 0; c < 4; ++c) rho(r, c) = std::complex<double>(re[r][c], im[r][c]);
        }
        return TwoQubitState(rho);
    } catch (const json::exception& e) {
        throw ParseError(std::string("bad density-matrix JSON: ") + e.what());
    }
}

std::string records_to_csv(const std::vector<TomographyRecord>& records) {
    std::ostringstream os;
    os << "setting_arm1,setting_arm2,count,N\n";
    for (const auto& r : records)
        os << to_string(r.setting.arm1) << "," << to_string(r.setting.arm2) << "," << r.count
           << "," << format_double(r.pairs_per_setting) << "\n";
    return os.str();
}

std::vector<TomographyRecord> records_from_csv(std::string_view text) {
    std::vector<TomographyRecord> records;
    std::istringstream iss{std::string(text)};
    std::string line;
    int number = 0;
    bool header_seen = false;
    while (std::getline(iss, line)) {
        ++number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            header_seen = true;
            if (line != "setting_arm1,setting_arm2,count,N")
                throw ParseError("line " + std::to_string(number) +
                                 ": expected header setting_arm1,setting_arm2,count,N");
            continue;
        }
        const auto cells = split_csv_row(line);
        if (cells.size() != 4)
            throw ParseError("line " + std::to_string(number) + ": expected four columns");
        TomographyRecord rec;
        rec.setting.arm1 = pol_from_string(cells[0]);
        rec.setting.arm2 = pol_from_string(cells[1]);
        const double count = parse_number(cells[2], number);
        if (count < 0.0 || count != std::floor(count))
            throw ParseError("line " + std::to_string(number) +
                             ": count must be a non-negative integer");
        rec.count = static_cast<std::uint64_t>(count);
        rec.pairs_per_setting = parse_number(cells[3], number);
        if (!(rec.pairs_per_setting > 0.0))
            throw ParseError("line " + std::to_string(number) + ": N must be > 0");
        records.push_back(rec);
    }
    if (records.empty()) throw ParseError("no tomography records in the CSV");
    return records;
}

} // namespace spdckit

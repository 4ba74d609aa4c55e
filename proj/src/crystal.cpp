#include "spdckit/crystal.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "spdckit/errors.hpp"
#include "spdckit/numeric.hpp"

namespace spdckit {

Axis axis_from_string(std::string_view s) {
    if (s == "x" || s == "X") return Axis::X;
    if (s == "y" || s == "Y") return Axis::Y;
    if (s == "z" || s == "Z") return Axis::Z;
    throw ConfigError("unknown principal axis '" + std::string(s) + "' (expected x, y or z)");
}

const char* to_string(Axis axis) {
    switch (axis) {
        case Axis::X: return "x";
        case Axis::Y: return "y";
        default: return "z";
    }
}

void SellmeierAxisModel::validate(const std::string& context) const {
    if (form != "sellmeier_quotient")
        throw ConfigError(context + ": unknown Sellmeier form '" + form + "'");
    if (coefficients.size() < 2 || coefficients.size() % 2 != 0)
        throw ConfigError(context + ": sellmeier_quotient needs [c0, c1, (p, q)...], got " +
                          std::to_string(coefficients.size()) + " coefficients");
    if (temp_form == "none") {
        if (!temp_coefficients.empty())
            throw ConfigError(context + ": temp_coefficients given but temp_form is none");
    } else if (temp_form == "inverse_lambda_poly") {
        if (temp_coefficients.size() != 8)
            throw ConfigError(context + ": inverse_lambda_poly needs 8 temp coefficients, got " +
                              std::to_string(temp_coefficients.size()));
    } else {
        throw ConfigError(context + ": unknown temperature-correction form '" + temp_form + "'");
    }
    if (!(range_min_um > 0.0) || !(range_max_um > range_min_um))
        throw ConfigError(context + ": invalid wavelength range [" + format_double(range_min_um) +
                          ", " + format_double(range_max_um) + "] um");
    if (!(temp_max_c > temp_min_c))
        throw ConfigError(context + ": invalid temperature range");
}

double SellmeierAxisModel::index(double wavelength_um, double temperature_c) const {
    if (!(wavelength_um >= range_min_um && wavelength_um <= range_max_um)) {
        throw RangeError("wavelength " + format_double(wavelength_um) +
                         " um outside valid range [" + format_double(range_min_um) + ", " +
                         format_double(range_max_um) + "] um");
    }
    if (!(temperature_c >= temp_min_c && temperature_c <= temp_max_c)) {
        throw RangeError("temperature " + format_double(temperature_c) +
                         " C outside valid range [" + format_double(temp_min_c) + ", " +
                         format_double(temp_max_c) + "] C");
    }
    const double L = wavelength_um * wavelength_um;
    double n2 = coefficients[0] + coefficients[1] * L;
    for (std::size_t j = 2; j + 1 < coefficients.size(); j += 2)
        n2 += coefficients[j] / (L - coefficients[j + 1]);
    if (!(n2 > 0.0))
        throw RangeError("Sellmeier form is non-physical (n^2 <= 0) at " +
                         format_double(wavelength_um) + " um");
    double n = std::sqrt(n2);
    if (temp_form == "inverse_lambda_poly") {
        const double dT = temperature_c - reference_temp_c;
        if (dT != 0.0) {
            const double inv = 1.0 / wavelength_um;
            const auto& a = temp_coefficients;
            const double n1 = a[0] + inv * (a[1] + inv * (a[2] + inv * a[3]));
            const double nn2 = a[4] + inv * (a[5] + inv * (a[6] + inv * a[7]));
            n += n1 * dT + nn2 * dT * dT;
        }
    }
    return n;
}

const SellmeierAxisModel& CrystalModel::axis(Axis a) const {
    switch (a) {
        case Axis::X: return x;
        case Axis::Y: return y;
        default: return z;
    }
}

const NonlinearCoefficient& CrystalModel::d(std::string_view label) const {
    for (const auto& entry : d_coefficients)
        if (entry.label == label) return entry;
    throw DomainError("crystal " + name + " has no nonlinear coefficient '" +
                      std::string(label) + "'");
}

double refractive_index(const CrystalModel& crystal, Axis axis,
                        double wavelength_um, double temperature_c) {
    return crystal.axis(axis).index(wavelength_um, temperature_c);
}

double index_derivative(const CrystalModel& crystal, Axis axis,
                        double wavelength_um, double temperature_c) {
    const double h = std::max(1e-4, 1e-6 * wavelength_um);
    const auto& model = crystal.axis(axis);
    if (wavelength_um - h < model.range_min_um || wavelength_um + h > model.range_max_um)
        throw RangeError("wavelength " + format_double(wavelength_um) +
                         " um too close to the range edge for the differencing step " +
                         format_double(h) + " um");
    const double np = model.index(wavelength_um + h, temperature_c);
    const double nm = model.index(wavelength_um - h, temperature_c);
    return (np - nm) / (2.0 * h);
}

namespace {

struct Line {
    int number;
    std::string key;
    std::string value;
};

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<double> parse_numbers(const std::string& value, int line, std::string_view origin) {
    std::vector<double> out;
    std::istringstream iss(value);
    std::string tok;
    while (iss >> tok) {
        try {
            std::size_t pos = 0;
            out.push_back(std::stod(tok, &pos));
            if (pos != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw ParseError(std::string(origin) + ":" + std::to_string(line) +
                             ": not a number: '" + tok + "'");
        }
    }
    return out;
}

} // namespace

CrystalModel parse_crystal(std::string_view text, std::string_view origin) {
    auto fail = [&](int line, const std::string& msg) -> ParseError {
        return ParseError(std::string(origin) + ":" + std::to_string(line) + ": " + msg);
    };

    std::vector<Line> lines;
    {
        std::istringstream iss{std::string(text)};
        std::string raw;
        int number = 0;
        while (std::getline(iss, raw)) {
            ++number;
            const auto hash = raw.find('#');
            if (hash != std::string::npos) raw.erase(hash);
            const std::string stripped = trim(raw);
            if (stripped.empty()) continue;
            const auto eq = stripped.find('=');
            if (eq == std::string::npos)
                throw fail(number, "expected 'key = value'");
            Line l{number, trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1))};
            if (l.key.empty()) throw fail(number, "empty key");
            lines.push_back(std::move(l));
        }
    }

    CrystalModel crystal;
    std::map<std::string, SellmeierAxisModel> axes;   // "x","y","z"
    std::map<std::string, std::string> aliases;
    std::map<std::string, int> seen;

    for (const auto& l : lines) {
        if (seen.count(l.key))
            throw fail(l.number, "duplicate key '" + l.key + "' (first at line " +
                       std::to_string(seen[l.key]) + ")");
        seen[l.key] = l.number;

        if (l.key == "name") { crystal.name = l.value; continue; }
        if (l.key == "citation") { crystal.citation = l.value; continue; }
        if (l.key == "transparency_um") {
            auto v = parse_numbers(l.value, l.number, origin);
            if (v.size() != 2) throw fail(l.number, "transparency_um needs two numbers");
            crystal.transparency_min_um = v[0];
            crystal.transparency_max_um = v[1];
            continue;
        }
        if (l.key.rfind("axes.", 0) == 0) {
            const auto rest = l.key.substr(5);
            const auto dot = rest.find('.');
            if (dot == std::string::npos) throw fail(l.number, "expected axes.<axis>.<field>");
            const std::string ax = rest.substr(0, dot);
            const std::string field = rest.substr(dot + 1);
            if (ax != "x" && ax != "y" && ax != "z")
                throw fail(l.number, "unknown axis '" + ax + "'");
            if (field == "alias") {
                if (l.value != "x" && l.value != "y" && l.value != "z")
                    throw fail(l.number, "alias target must be x, y or z");
                aliases[ax] = l.value;
                continue;
            }
            auto& model = axes[ax];
            if (field == "form") model.form = l.value;
            else if (field == "coefficients") model.coefficients = parse_numbers(l.value, l.number, origin);
            else if (field == "temp_form") model.temp_form = l.value;
            else if (field == "temp_coefficients") model.temp_coefficients = parse_numbers(l.value, l.number, origin);
            else if (field == "range_um") {
                auto v = parse_numbers(l.value, l.number, origin);
                if (v.size() != 2) throw fail(l.number, "range_um needs two numbers");
                model.range_min_um = v[0];
                model.range_max_um = v[1];
            } else if (field == "reference_temp_c") {
                auto v = parse_numbers(l.value, l.number, origin);
                if (v.size() != 1) throw fail(l.number, "reference_temp_c needs one number");
                model.reference_temp_c = v[0];
            } else if (field == "temp_range_c") {
                auto v = parse_numbers(l.value, l.number, origin);
                if (v.size() != 2) throw fail(l.number, "temp_range_c needs two numbers");
                model.temp_min_c = v[0];
                model.temp_max_c = v[1];
            } else {
                throw fail(l.number, "unknown key 'axes." + ax + "." + field + "'");
            }
            continue;
        }
        if (l.key.rfind("d.", 0) == 0) {
            NonlinearCoefficient entry;
            entry.label = l.key.substr(2);
            if (entry.label.empty()) throw fail(l.number, "empty d-coefficient label");
            std::istringstream iss(l.value);
            std::string num;
            if (!(iss >> num)) throw fail(l.number, "d-coefficient needs '<value> <citation>'");
            try {
                std::size_t pos = 0;
                entry.value_pm_per_v = std::stod(num, &pos);
                if (pos != num.size()) throw std::invalid_argument(num);
            } catch (const std::exception&) {
                throw fail(l.number, "not a number: '" + num + "'");
            }
            std::string rest;
            std::getline(iss, rest);
            entry.citation = trim(rest);
            if (entry.citation.empty())
                throw fail(l.number, "d-coefficient '" + entry.label +
                           "' is missing its provenance citation");
            crystal.d_coefficients.push_back(std::move(entry));
            continue;
        }
        throw fail(l.number, "unknown key '" + l.key + "'");
    }

    if (crystal.name.empty()) throw ParseError(std::string(origin) + ": missing 'name'");

    for (const auto& [ax, target] : aliases) {
        if (axes.count(ax))
            throw ParseError(std::string(origin) + ": axis '" + ax +
                             "' has both an alias and its own fields");
        if (!axes.count(target))
            throw ParseError(std::string(origin) + ": alias target '" + target +
                             "' is not defined");
        axes[ax] = axes[target];
    }
    for (const char* ax : {"x", "y", "z"}) {
        if (!axes.count(ax))
            throw ParseError(std::string(origin) + ": crystal '" + crystal.name +
                             "' is missing axis '" + std::string(ax) + "'");
    }
    crystal.x = axes["x"];
    crystal.y = axes["y"];
    crystal.z = axes["z"];
    crystal.x.validate(crystal.name + ".x");
    crystal.y.validate(crystal.name + ".y");
    crystal.z.validate(crystal.name + ".z");
    return crystal;
}

CrystalModel load_crystal(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open crystal file '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_crystal(buf.str(), path.string());
}

namespace {

void serialize_axis(std::ostream& os, const char* name, const SellmeierAxisModel& m) {
    os << "axes." << name << ".form = " << m.form << "\n";
    os << "axes." << name << ".coefficients =";
    for (double c : m.coefficients) os << " " << format_double(c);
    os << "\n";
    os << "axes." << name << ".range_um = " << format_double(m.range_min_um) << " "
       << format_double(m.range_max_um) << "\n";
    os << "axes." << name << ".reference_temp_c = " << format_double(m.reference_temp_c) << "\n";
    os << "axes." << name << ".temp_form = " << m.temp_form << "\n";
    if (!m.temp_coefficients.empty()) {
        os << "axes." << name << ".temp_coefficients =";
        for (double c : m.temp_coefficients) os << " " << format_double(c);
        os << "\n";
    }
    os << "axes." << name << ".temp_range_c = " << format_double(m.temp_min_c) << " "
       << format_double(m.temp_max_c) << "\n";
}

} // namespace

std::string serialize_crystal(const CrystalModel& crystal) {
    std::ostringstream os;
    os << "name = " << crystal.name << "\n";
    if (!crystal.citation.empty()) os << "citation = " << crystal.citation << "\n";
    os << "transparency_um = " << format_double(crystal.transparency_min_um) << " "
       << format_double(crystal.transparency_max_um) << "\n";
    serialize_axis(os, "x", crystal.x);
    serialize_axis(os, "y", crystal.y);
    serialize_axis(os, "z", crystal.z);
    for (const auto& entry : crystal.d_coefficients)
        os << "d." << entry.label << " = " << format_double(entry.value_pm_per_v) << " "
           << entry.citation << "\n";
    return os.str();
}

} // namespace spdckit

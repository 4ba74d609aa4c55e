#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "spdckit/qstate.hpp"
#include "spdckit/spectra.hpp"
#include "spdckit/tomography.hpp"

namespace spdckit {

/// Write via a temp file in the same directory plus rename, so readers never
/// observe a partial file.
void write_text_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_text(const std::filesystem::path& path);

/// Curve CSV: "# key = value" metadata comments, a header row, then
/// abscissa,ordinate rows (shortest round-trip decimals).
std::string curve_to_csv(const SpectrumCurve& curve);
SpectrumCurve curve_from_csv(std::string_view text);

nlohmann::json curve_to_json(const SpectrumCurve& curve);
SpectrumCurve curve_from_json(const nlohmann::json& j);

/// JSA CSV: signal_rad_s,idler_rad_s,real,imag rows (row-major).
std::string jsa_to_csv(const JointSpectralAmplitude& jsa);
nlohmann::json jsa_to_json(const JointSpectralAmplitude& jsa);
JointSpectralAmplitude jsa_from_json(const nlohmann::json& j);

/// Density matrix JSON: basis tag + row-major real/imag 4x4 arrays.
/// Loading validates the physicality invariants.
nlohmann::json state_to_json(const TwoQubitState& state);
TwoQubitState state_from_json(const nlohmann::json& j);

/// Tomography records CSV with header setting_arm1,setting_arm2,count,N.
std::string records_to_csv(const std::vector<TomographyRecord>& records);
std::vector<TomographyRecord> records_from_csv(std::string_view text);

} // namespace spdckit

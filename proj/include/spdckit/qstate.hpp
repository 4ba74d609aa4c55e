#pragma once

#include <Eigen/Core>
#include <array>
#include <string_view>

namespace spdckit {

/// A physical two-qubit density matrix in the ordered basis {HH, HV, VH, VV}.
/// Construction validates Hermiticity (1e-12), unit trace (1e-12) and
/// positivity (eigenvalues >= -1e-10), then canonicalizes: the stored matrix
/// is exactly Hermitian with real trace 1.
class TwoQubitState {
public:
    explicit TwoQubitState(const Eigen::Matrix4cd& rho);

    const Eigen::Matrix4cd& matrix() const { return rho_; }

    static const std::array<const char*, 4>& basis_labels();

private:
    Eigen::Matrix4cd rho_;
};

enum class BellLabel { PhiPlus, PhiMinus, PsiPlus, PsiMinus };

BellLabel bell_label_from_string(std::string_view s);  // "phi+", "phi-", "psi+", "psi-"
const char* to_string(BellLabel label);

Eigen::Vector4cd bell_vector(BellLabel label);

/// Pure projector onto the named Bell state.
TwoQubitState bell_state(BellLabel label);

/// Sagnac-source output parameters: |psi> = sqrt(p)|HV> + e^{i phi} sqrt(1-p)|VH>
/// mixed with white noise of weight w.
struct SourceImperfections {
    double phase_rad = 0.0;   // relative phase phi
    double hv_share = 0.5;    // amplitude share p of the HV component
    double white_noise = 0.0; // w, accidental-coincidence proxy
};

/// rho = (1-w) |psi(p, phi)><psi(p, phi)| + w I/4.
TwoQubitState sagnac_state(const SourceImperfections& imperfections);

enum class Plate { Half, Quarter };

Plate plate_from_string(std::string_view s);  // "hwp" | "qwp"
const char* to_string(Plate plate);

/// Jones matrix of an ideal retarder, fast axis horizontal at angle 0,
/// diag(1, e^{i delta}) convention with the global phase dropped.
Eigen::Matrix2cd waveplate_jones(Plate plate, double angle_rad);

/// Apply a waveplate on one arm (1 or 2): rho -> (U1 x U2) rho (U1 x U2)^dag.
TwoQubitState waveplate_transform(const TwoQubitState& state, int arm, Plate plate,
                                  double angle_rad);

/// (1-w) rho + w I/4.
TwoQubitState apply_white_noise(const TwoQubitState& state, double w);

} // namespace spdckit

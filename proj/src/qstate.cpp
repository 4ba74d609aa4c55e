#include "spdckit/qstate.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <complex>
#include <unsupported/Eigen/KroneckerProduct>

#include "spdckit/errors.hpp"
#include "spdckit/numeric.hpp"

namespace spdckit {

using std::complex;

TwoQubitState::TwoQubitState(const Eigen::Matrix4cd& rho) {
    const double herm_dev = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
    if (herm_dev > 1e-12)
        throw DomainError("density matrix is not Hermitian (deviation " +
                          format_double(herm_dev) + ")");
    const complex<double> tr = rho.trace();
    if (std::abs(tr - 1.0) > 1e-12)
        throw DomainError("density matrix trace deviates from 1 by " +
                          format_double(std::abs(tr - 1.0)));
    rho_ = 0.5 * (rho + rho.adjoint());
    rho_ /= rho_.trace().real();
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(rho_,
                                                             Eigen::EigenvaluesOnly);
    const double min_eig = es.eigenvalues().minCoeff();
    if (min_eig < -1e-10)
        throw DomainError("density matrix has a negative eigenvalue " +
                          format_double(min_eig));
}

const std::array<const char*, 4>& TwoQubitState::basis_labels() {
    static const std::array<const char*, 4> labels = {"HH", "HV", "VH", "VV"};
    return labels;
}

BellLabel bell_label_from_string(std::string_view s) {
    if (s == "phi+") return BellLabel::PhiPlus;
    if (s == "phi-") return BellLabel::PhiMinus;
    if (s == "psi+") return BellLabel::PsiPlus;
    if (s == "psi-") return BellLabel::PsiMinus;
    throw DomainError("unknown Bell state label '" + std::string(s) +
                      "' (expected phi+, phi-, psi+ or psi-)");
}

const char* to_string(BellLabel label) {
    switch (label) {
        case BellLabel::PhiPlus: return "phi+";
        case BellLabel::PhiMinus: return "phi-";
        case BellLabel::PsiPlus: return "psi+";
        default: return "psi-";
    }
}

Eigen::Vector4cd bell_vector(BellLabel label) {
    const double s = 1.0 / std::sqrt(2.0);
    Eigen::Vector4cd v = Eigen::Vector4cd::Zero();
    switch (label) {
        case BellLabel::PhiPlus:  v[0] = s; v[3] = s;  break;
        case BellLabel::PhiMinus: v[0] = s; v[3] = -s; break;
        case BellLabel::PsiPlus:  v[1] = s; v[2] = s;  break;
        case BellLabel::PsiMinus: v[1] = s; v[2] = -s; break;
    }
    return v;
}

TwoQubitState bell_state(BellLabel label) {
    const Eigen::Vector4cd v = bell_vector(label);
    return TwoQubitState(v * v.adjoint());
}

TwoQubitState sagnac_state(const SourceImperfections& imp) {
    if (!(imp.hv_share >= 0.0 && imp.hv_share <= 1.0))
        throw DomainError("HV amplitude share p must lie in [0, 1]");
    if (!(imp.white_noise >= 0.0 && imp.white_noise <= 1.0))
        throw DomainError("white-noise weight w must lie in [0, 1]");
    if (!std::isfinite(imp.phase_rad)) throw DomainError("relative phase must be finite");
    Eigen::Vector4cd psi = Eigen::Vector4cd::Zero();
    psi[1] = std::sqrt(imp.hv_share);
    psi[2] = std::exp(complex<double>(0.0, imp.phase_rad)) * std::sqrt(1.0 - imp.hv_share);
    const Eigen::Matrix4cd rho = (1.0 - imp.white_noise) * (psi * psi.adjoint()) +
                                 imp.white_noise * 0.25 * Eigen::Matrix4cd::Identity();
    return TwoQubitState(rho);
}

Plate plate_from_string(std::string_view s) {
    if (s == "hwp" || s == "HWP") return Plate::Half;
    if (s == "qwp" || s == "QWP") return Plate::Quarter;
    throw DomainError("unknown waveplate '" + std::string(s) + "' (expected hwp or qwp)");
}

const char* to_string(Plate plate) { return plate == Plate::Half ? "hwp" : "qwp"; }

Eigen::Matrix2cd waveplate_jones(Plate plate, double angle_rad) {
    const double c = std::cos(angle_rad), s = std::sin(angle_rad);
    Eigen::Matrix2cd j;
    if (plate == Plate::Half) {
        const double c2 = c * c - s * s, s2 = 2.0 * c * s;
        j << c2, s2,
             s2, -c2;
    } else {
        const complex<double> i(0.0, 1.0);
        j << c * c + i * s * s, (1.0 - i) * c * s,
             (1.0 - i) * c * s, s * s + i * c * c;
    }
    return j;
}

TwoQubitState waveplate_transform(const TwoQubitState& state, int arm, Plate plate,
                                  double angle_rad) {
    if (arm != 1 && arm != 2) throw DomainError("arm must be 1 or 2");
    const Eigen::Matrix2cd j = waveplate_jones(plate, angle_rad);
    const Eigen::Matrix2cd id = Eigen::Matrix2cd::Identity();
    const Eigen::Matrix4cd u = (arm == 1) ? Eigen::kroneckerProduct(j, id).eval()
                                          : Eigen::kroneckerProduct(id, j).eval();
    return TwoQubitState(u * state.matrix() * u.adjoint());
}

TwoQubitState apply_white_noise(const TwoQubitState& state, double w) {
    if (!(w >= 0.0 && w <= 1.0)) throw RangeError("white-noise weight w must lie in [0, 1]");
    return TwoQubitState((1.0 - w) * state.matrix() +
                         w * 0.25 * Eigen::Matrix4cd::Identity());
}

} // namespace spdckit

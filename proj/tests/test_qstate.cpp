#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

#include <nlohmann/json.hpp>

#include "spdckit/errors.hpp"
#include "spdckit/io.hpp"
#include "spdckit/numeric.hpp"
#include "spdckit/qstate.hpp"
#include "spdckit/tomography.hpp"

using namespace spdckit;
using std::complex;

namespace {

void check_physical(const TwoQubitState& s) {
    const auto& rho = s.matrix();
    CHECK((rho - rho.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(std::abs(rho.trace().real() - 1.0) < 1e-12);
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(rho, Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues().minCoeff() > -1e-10);
}

} // namespace

TEST_CASE("Bell states") {
    const auto psi_plus = bell_state(BellLabel::PsiPlus);
    SUBCASE("psi+ has the four 1/2 entries on HV/VH") {
        const auto& rho = psi_plus.matrix();
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c) {
                const bool hv_block = (r == 1 || r == 2) && (c == 1 || c == 2);
                CHECK(std::abs(rho(r, c) - (hv_block ? 0.5 : 0.0)) < 1e-15);
            }
    }
    SUBCASE("all four are pure and mutually orthogonal") {
        const BellLabel labels[] = {BellLabel::PhiPlus, BellLabel::PhiMinus,
                                    BellLabel::PsiPlus, BellLabel::PsiMinus};
        for (auto a : labels) {
            CHECK(purity(bell_state(a)) == doctest::Approx(1.0).epsilon(1e-12));
            check_physical(bell_state(a));
            for (auto b : labels) {
                if (a == b) continue;
                CHECK(fidelity(bell_state(a), bell_state(b)) < 1e-15);
            }
        }
    }
    SUBCASE("label parsing") {
        CHECK(bell_label_from_string("phi-") == BellLabel::PhiMinus);
        CHECK_THROWS_AS(bell_label_from_string("chi+"), DomainError);
    }
}

TEST_CASE("Sagnac output state") {
    SUBCASE("phi = 0 gives psi+, phi = pi gives psi-") {
        const auto plus = sagnac_state({0.0, 0.5, 0.0});
        CHECK(fidelity(plus, bell_state(BellLabel::PsiPlus)) ==
              doctest::Approx(1.0).epsilon(1e-12));
        const auto minus = sagnac_state({kPi, 0.5, 0.0});
        CHECK(fidelity(minus, bell_state(BellLabel::PsiMinus)) ==
              doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("unbalanced share p = 0.6 has concurrence 2 sqrt(p(1-p))") {
        const auto s = sagnac_state({0.0, 0.6, 0.0});
        CHECK(concurrence(s) == doctest::Approx(2.0 * std::sqrt(0.6 * 0.4)).epsilon(1e-9));
    }
    SUBCASE("noise-free states are pure") {
        for (double phi : {0.0, 0.7, 2.5})
            for (double p : {0.0, 0.3, 1.0})
                CHECK(purity(sagnac_state({phi, p, 0.0})) ==
                      doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("phase is 2pi periodic") {
        const auto a = sagnac_state({0.9, 0.45, 0.1});
        const auto b = sagnac_state({0.9 + 2.0 * kPi, 0.45, 0.1});
        CHECK((a.matrix() - b.matrix()).cwiseAbs().maxCoeff() < 1e-12);
    }
    SUBCASE("parameter ranges") {
        CHECK_THROWS_AS(sagnac_state({0.0, -0.1, 0.0}), DomainError);
        CHECK_THROWS_AS(sagnac_state({0.0, 1.1, 0.0}), DomainError);
        CHECK_THROWS_AS(sagnac_state({0.0, 0.5, 2.0}), DomainError);
    }
}

TEST_CASE("waveplates") {
    SUBCASE("HWP at 45 deg on arm 1 maps psi+ to phi+") {
        const auto out = waveplate_transform(bell_state(BellLabel::PsiPlus), 1, Plate::Half,
                                             kPi / 4.0);
        CHECK(fidelity(out, bell_state(BellLabel::PhiPlus)) ==
              doctest::Approx(1.0).epsilon(1e-12));
        // explicit matrix oracle: X on arm 1
        Eigen::Matrix4cd u = Eigen::Matrix4cd::Zero();
        u(0, 2) = u(1, 3) = u(2, 0) = u(3, 1) = 1.0; // X (x) I
        const Eigen::Matrix4cd expected =
            u * bell_state(BellLabel::PsiPlus).matrix() * u.adjoint();
        CHECK((out.matrix() - expected).cwiseAbs().maxCoeff() < 1e-14);
    }
    SUBCASE("HWP at 0 on both arms leaves the source state unchanged") {
        // diag(1,-1) on each arm: the HV and VH components each pick up one
        // sign, a pure global phase on the single-excitation subspace
        const auto in = sagnac_state({0.3, 0.5, 0.05});
        const auto out = waveplate_transform(
            waveplate_transform(in, 1, Plate::Half, 0.0), 2, Plate::Half, 0.0);
        CHECK((out.matrix() - in.matrix()).cwiseAbs().maxCoeff() < 1e-14);
    }
    SUBCASE("HWP applied twice on one arm is the identity") {
        const auto in = sagnac_state({1.1, 0.4, 0.1});
        const auto out = waveplate_transform(
            waveplate_transform(in, 2, Plate::Half, 0.37), 2, Plate::Half, 0.37);
        CHECK((out.matrix() - in.matrix()).cwiseAbs().maxCoeff() < 1e-14);
    }
    SUBCASE("two quarter-wave plates compose to one half-wave plate") {
        for (double angle : {0.0, 0.2, kPi / 4.0, 1.1}) {
            const Eigen::Matrix2cd q = waveplate_jones(Plate::Quarter, angle);
            const Eigen::Matrix2cd h = waveplate_jones(Plate::Half, angle);
            CHECK((q * q - h).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
    SUBCASE("jones matrices are unitary") {
        for (double angle : {0.0, 0.4, 1.3})
            for (Plate p : {Plate::Half, Plate::Quarter}) {
                const Eigen::Matrix2cd j = waveplate_jones(p, angle);
                CHECK((j * j.adjoint() - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff() <
                      1e-14);
            }
    }
    SUBCASE("purity and concurrence are invariant under local unitaries") {
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> angle(0.0, kPi);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (int i = 0; i < 50; ++i) {
            auto state = sagnac_state({angle(rng), unit(rng), 0.3 * unit(rng)});
            const double p0 = purity(state);
            const double c0 = concurrence(state);
            for (int k = 0; k < 3; ++k) {
                const int arm = 1 + static_cast<int>(unit(rng) * 2.0) % 2;
                const Plate plate = unit(rng) < 0.5 ? Plate::Half : Plate::Quarter;
                state = waveplate_transform(state, arm, plate, angle(rng));
            }
            check_physical(state);
            CHECK(purity(state) == doctest::Approx(p0).epsilon(1e-10));
            CHECK(concurrence(state) == doctest::Approx(c0).epsilon(1e-10));
        }
    }
    SUBCASE("invalid arm") {
        CHECK_THROWS_AS(waveplate_transform(bell_state(BellLabel::PsiPlus), 3, Plate::Half,
                                            0.0),
                        DomainError);
        CHECK_THROWS_AS(plate_from_string("full"), DomainError);
    }
}

TEST_CASE("white noise admixture") {
    const auto psi = bell_state(BellLabel::PsiPlus);
    SUBCASE("w = 0 is the identity operation") {
        CHECK((apply_white_noise(psi, 0.0).matrix() - psi.matrix()).cwiseAbs().maxCoeff() <
              1e-15);
    }
    SUBCASE("w = 1 is maximally mixed") {
        const auto mixed = apply_white_noise(psi, 1.0);
        CHECK(purity(mixed) == doctest::Approx(0.25).epsilon(1e-12));
    }
    SUBCASE("Werner state purity follows the closed form") {
        const auto werner = apply_white_noise(psi, 0.1);
        CHECK(purity(werner) == doctest::Approx(0.8575).epsilon(1e-12));
        check_physical(werner);
    }
    SUBCASE("range check") {
        CHECK_THROWS_AS(apply_white_noise(psi, -0.01), RangeError);
        CHECK_THROWS_AS(apply_white_noise(psi, 1.01), RangeError);
    }
}

TEST_CASE("TwoQubitState validation") {
    Eigen::Matrix4cd bad = Eigen::Matrix4cd::Zero();
    bad(0, 0) = 1.5;
    bad(1, 1) = -0.5;
    CHECK_THROWS_AS((void)TwoQubitState(bad), DomainError); // negative eigenvalue
    Eigen::Matrix4cd off = 0.25 * Eigen::Matrix4cd::Identity();
    off(0, 1) = complex<double>(0.0, 1e-3); // non-Hermitian
    CHECK_THROWS_AS((void)TwoQubitState(off), DomainError);
    Eigen::Matrix4cd scaled = 0.5 * Eigen::Matrix4cd::Identity();
    CHECK_THROWS_AS((void)TwoQubitState(scaled), DomainError); // trace 2
}

TEST_CASE("density-matrix JSON round-trip validates on load") {
    const auto state = sagnac_state({0.3, 0.55, 0.2});
    const auto back = state_from_json(state_to_json(state));
    CHECK((back.matrix() - state.matrix()).cwiseAbs().maxCoeff() < 1e-15);

    auto j = state_to_json(state);
    j["basis"] = {"HH", "HV", "VH", "XX"};
    CHECK_THROWS_AS(state_from_json(j), ParseError);

    auto k = state_to_json(state);
    k["real"][0][0] = 1.5;
    k["real"][1][1] = k["real"][1][1].get<double>() - 1.0;
    CHECK_THROWS_AS(state_from_json(k), DomainError);
}

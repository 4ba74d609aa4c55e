#include "spdckit/tomography.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "spdckit/errors.hpp"
#include "spdckit/numeric.hpp"

namespace spdckit {

using std::complex;

Pol pol_from_string(std::string_view s) {
    if (s == "H" || s == "h") return Pol::H;
    if (s == "V" || s == "v") return Pol::V;
    if (s == "D" || s == "d") return Pol::D;
    if (s == "A" || s == "a") return Pol::A;
    if (s == "R" || s == "r") return Pol::R;
    if (s == "L" || s == "l") return Pol::L;
    throw DomainError("unknown polarization label '" + std::string(s) +
                      "' (expected one of H V D A R L)");
}

const char* to_string(Pol pol) {
    switch (pol) {
        case Pol::H: return "H";
        case Pol::V: return "V";
        case Pol::D: return "D";
        case Pol::A: return "A";
        case Pol::R: return "R";
        default: return "L";
    }
}

Eigen::Vector2cd polarization_ket(Pol pol) {
    const double s = 1.0 / std::sqrt(2.0);
    const complex<double> i(0.0, 1.0);
    Eigen::Vector2cd v;
    switch (pol) {
        case Pol::H: v << 1.0, 0.0; break;
        case Pol::V: v << 0.0, 1.0; break;
        case Pol::D: v << s, s; break;
        case Pol::A: v << s, -s; break;
        case Pol::R: v << s, -i * s; break;
        default:     v << s, i * s; break;
    }
    return v;
}

std::vector<MeasurementSetting> default_settings() {
    static const Pol order[6] = {Pol::H, Pol::V, Pol::D, Pol::A, Pol::R, Pol::L};
    std::vector<MeasurementSetting> out;
    out.reserve(36);
    for (Pol a : order)
        for (Pol b : order) out.push_back({a, b});
    return out;
}

Eigen::Vector4cd setting_ket(const MeasurementSetting& setting) {
    const Eigen::Vector2cd a = polarization_ket(setting.arm1);
    const Eigen::Vector2cd b = polarization_ket(setting.arm2);
    Eigen::Vector4cd v;
    v << a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1];
    return v;
}

Eigen::Matrix4cd projector(const MeasurementSetting& setting) {
    const Eigen::Vector4cd v = setting_ket(setting);
    return v * v.adjoint();
}

namespace {

double setting_probability(const Eigen::Matrix4cd& rho, const Eigen::Vector4cd& ket) {
    return std::max((ket.adjoint() * rho * ket).real()(0, 0), 0.0);
}

} // namespace

std::vector<TomographyRecord> simulate_counts(const TwoQubitState& state,
                                              const std::vector<MeasurementSetting>& settings,
                                              double pairs_per_setting, std::uint64_t seed,
                                              double accidental_rate) {
    if (!(pairs_per_setting > 0.0)) throw RangeError("pairs per setting must be > 0");
    if (!(accidental_rate >= 0.0 && accidental_rate < 1.0))
        throw RangeError("accidental rate must lie in [0, 1)");
    if (settings.empty()) throw ConfigError("no measurement settings given");
    std::mt19937_64 rng(seed);
    std::vector<TomographyRecord> records;
    records.reserve(settings.size());
    for (const auto& setting : settings) {
        const double p = (1.0 - accidental_rate) *
                             setting_probability(state.matrix(), setting_ket(setting)) +
                         accidental_rate / 4.0;
        const double mu = pairs_per_setting * p;
        std::uint64_t count = 0;
        if (mu > 0.0) {
            std::poisson_distribution<std::uint64_t> poisson(mu);
            count = poisson(rng);
        }
        records.push_back({setting, count, pairs_per_setting});
    }
    return records;
}

namespace {

const std::array<Eigen::Matrix4cd, 16>& hermitian_basis() {
    static const std::array<Eigen::Matrix4cd, 16> basis = [] {
        std::array<Eigen::Matrix2cd, 4> pauli;
        const complex<double> i(0.0, 1.0);
        pauli[0] = Eigen::Matrix2cd::Identity();
        pauli[1] << 0, 1, 1, 0;
        pauli[2] << 0, -i, i, 0;
        pauli[3] << 1, 0, 0, -1;
        std::array<Eigen::Matrix4cd, 16> out;
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) {
                Eigen::Matrix4cd m;
                for (int r = 0; r < 2; ++r)
                    for (int c = 0; c < 2; ++c)
                        m.block<2, 2>(2 * r, 2 * c) = pauli[a](r, c) * pauli[b];
                out[4 * a + b] = m;
            }
        return out;
    }();
    return basis;
}

void validate_records(const std::vector<TomographyRecord>& records) {
    if (records.empty()) throw ConfigError("no tomography records");
    for (const auto& r : records)
        if (!(r.pairs_per_setting > 0.0))
            throw RangeError("acquisition scale N must be > 0 in every record");
}

} // namespace

Eigen::Matrix4cd linear_inversion(const std::vector<TomographyRecord>& records) {
    validate_records(records);
    const auto& basis = hermitian_basis();
    const Eigen::Index k = static_cast<Eigen::Index>(records.size());
    Eigen::MatrixXd design(k, 16);
    Eigen::VectorXd freq(k);
    for (Eigen::Index r = 0; r < k; ++r) {
        const Eigen::Matrix4cd proj = projector(records[r].setting);
        for (int j = 0; j < 16; ++j)
            design(r, j) = (proj * basis[j]).trace().real();
        freq[r] = static_cast<double>(records[r].count) / records[r].pairs_per_setting;
    }
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(design,
                                                Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double smax = svd.singularValues()[0];
    Eigen::Index rank = 0;
    for (Eigen::Index j = 0; j < svd.singularValues().size(); ++j)
        if (svd.singularValues()[j] > 1e-12 * smax) ++rank;
    if (rank < 16)
        throw ConfigError("measurement settings span only " + std::to_string(rank) +
                          " of the 16 operator dimensions; tomography is underdetermined");
    const Eigen::VectorXd coeff = svd.solve(freq);
    Eigen::Matrix4cd rho = Eigen::Matrix4cd::Zero();
    for (int j = 0; j < 16; ++j) rho += coeff[j] * basis[j];
    rho = 0.5 * (rho + rho.adjoint()).eval();
    const double tr = rho.trace().real();
    if (std::abs(tr) < 1e-12)
        throw DomainError("linear inversion produced a traceless estimate");
    return rho / tr;
}

double log_likelihood(const Eigen::Matrix4cd& rho,
                      const std::vector<TomographyRecord>& records) {
    double ll = 0.0;
    for (const auto& rec : records) {
        const double p = setting_probability(rho, setting_ket(rec.setting));
        if (rec.count > 0) {
            if (p <= 0.0) return -std::numeric_limits<double>::infinity();
            ll += static_cast<double>(rec.count) * std::log(p);
        }
        ll -= rec.pairs_per_setting * p;
    }
    return ll;
}

namespace {

Eigen::Matrix4cd psd_project(const Eigen::Matrix4cd& herm) {
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(herm);
    Eigen::Vector4d vals = es.eigenvalues().cwiseMax(0.0);
    const double sum = vals.sum();
    if (!(sum > 0.0)) return 0.25 * Eigen::Matrix4cd::Identity();
    vals /= sum;
    return es.eigenvectors() * vals.asDiagonal() * es.eigenvectors().adjoint();
}

// Lower-triangular T with T^dag T = rho (reverse Cholesky via the
// anti-diagonal reversal J: T = J L^dag J where J rho J = L L^dag).
Eigen::Matrix4cd reverse_cholesky(const Eigen::Matrix4cd& rho) {
    Eigen::Matrix4cd rev = rho;
    rev.rowwise().reverseInPlace();
    rev.colwise().reverseInPlace();
    const Eigen::LLT<Eigen::Matrix4cd> llt(rev);
    Eigen::Matrix4cd t = llt.matrixL().toDenseMatrix().adjoint();
    t.rowwise().reverseInPlace();
    t.colwise().reverseInPlace();
    return t;
}

Eigen::Matrix4cd rho_from_factor(const Eigen::Matrix4cd& t) {
    const Eigen::Matrix4cd rho = t.adjoint() * t;
    return rho / rho.trace().real();
}

// Keep T in the 16-parameter form: lower-triangular, real diagonal.
void project_parameterization(Eigen::Matrix4cd& g) {
    for (int r = 0; r < 4; ++r) {
        g(r, r) = complex<double>(g(r, r).real(), 0.0);
        for (int c = r + 1; c < 4; ++c) g(r, c) = 0.0;
    }
}

} // namespace

MleResult mle_reconstruct(const std::vector<TomographyRecord>& records,
                          const MleOptions& options) {
    validate_records(records);
    const Eigen::Index k = static_cast<Eigen::Index>(records.size());
    std::vector<Eigen::Vector4cd> kets(records.size());
    Eigen::VectorXd counts(k), pairs(k);
    for (Eigen::Index r = 0; r < k; ++r) {
        kets[r] = setting_ket(records[r].setting);
        counts[r] = static_cast<double>(records[r].count);
        pairs[r] = records[r].pairs_per_setting;
    }
    auto ll_of = [&](const Eigen::Matrix4cd& rho) { return log_likelihood(rho, records); };

    const Eigen::Matrix4cd start = psd_project(linear_inversion(records));
    const double start_ll = ll_of(start);

    Eigen::Matrix4cd t = reverse_cholesky(start + 1e-12 * Eigen::Matrix4cd::Identity());
    t /= std::sqrt((t.adjoint() * t).trace().real());
    double ll = ll_of(rho_from_factor(t));

    double step = 1e-3;
    int iterations = 0;
    bool converged = false;
    for (int it = 0; it < options.max_iterations; ++it) {
        iterations = it + 1;
        const Eigen::Matrix4cd rho = rho_from_factor(t);
        // R = sum (n_k/p_k - N_k) |k><k|; ascent direction G = tril(T (R - tr(R rho) I))
        Eigen::Matrix4cd r_mat = Eigen::Matrix4cd::Zero();
        for (Eigen::Index rr = 0; rr < k; ++rr) {
            const double p = std::max(setting_probability(rho, kets[rr]), 1e-15);
            r_mat += (counts[rr] / p - pairs[rr]) * (kets[rr] * kets[rr].adjoint());
        }
        const double lagrange = (r_mat * rho).trace().real();
        Eigen::Matrix4cd grad = t * (r_mat - lagrange * Eigen::Matrix4cd::Identity());
        project_parameterization(grad);
        const double grad_norm2 = grad.squaredNorm();
        if (std::sqrt(grad_norm2) < 1e-13) {
            converged = true;
            break;
        }
        // Backtracking line search with the Armijo condition.
        bool accepted = false;
        double gain = 0.0;
        for (double s = step; s > 1e-20; s *= 0.5) {
            Eigen::Matrix4cd trial = t + s * grad;
            const double trial_ll = ll_of(rho_from_factor(trial));
            if (trial_ll >= ll + 1e-4 * s * grad_norm2) {
                trial /= std::sqrt((trial.adjoint() * trial).trace().real());
                t = trial;
                gain = trial_ll - ll;
                ll = trial_ll;
                step = s * 2.0;
                accepted = true;
                break;
            }
        }
        if (!accepted || gain < options.tolerance) {
            converged = true;
            break;
        }
    }

    Eigen::Matrix4cd best = rho_from_factor(t);
    double best_ll = ll_of(best);
    if (start_ll > best_ll) {
        best = start;
        best_ll = start_ll;
    }
    return MleResult{TwoQubitState(best), best_ll, iterations, converged};
}

double purity(const TwoQubitState& state) {
    return (state.matrix() * state.matrix()).trace().real();
}

double concurrence(const TwoQubitState& state) {
    static const Eigen::Matrix4cd flip = [] {
        // sigma_y x sigma_y
        Eigen::Matrix4cd f = Eigen::Matrix4cd::Zero();
        f(0, 3) = -1.0;
        f(1, 2) = 1.0;
        f(2, 1) = 1.0;
        f(3, 0) = -1.0;
        return f;
    }();
    const Eigen::Matrix4cd& rho = state.matrix();
    const Eigen::Matrix4cd spin_flipped = flip * rho.conjugate() * flip;
    const Eigen::ComplexEigenSolver<Eigen::Matrix4cd> es(rho * spin_flipped, false);
    std::array<double, 4> lambda;
    for (int i = 0; i < 4; ++i)
        lambda[i] = std::sqrt(std::max(es.eigenvalues()[i].real(), 0.0));
    std::sort(lambda.begin(), lambda.end(), std::greater<>());
    return std::max(0.0, lambda[0] - lambda[1] - lambda[2] - lambda[3]);
}

double fidelity(const TwoQubitState& state, const TwoQubitState& pure_target) {
    const double target_purity = purity(pure_target);
    if (target_purity < 1.0 - 1e-6)
        throw DomainError("fidelity target must be pure (purity " +
                          format_double(target_purity) +
                          "); the mixed-target variant is not provided");
    return std::clamp((state.matrix() * pure_target.matrix()).trace().real(), 0.0, 1.0);
}

double coincidence_to_single_ratio(const CountRates& rates) {
    if (!(rates.signal_hz > 0.0) || !(rates.idler_hz > 0.0))
        throw DomainError("singles rates must be > 0");
    if (rates.coincidences_hz < 0.0) throw RangeError("coincidence rate must be >= 0");
    if (rates.coincidences_hz > std::min(rates.signal_hz, rates.idler_hz))
        throw RangeError("coincidence rate exceeds a singles rate");
    return rates.coincidences_hz / std::sqrt(rates.signal_hz * rates.idler_hz);
}

double normalized_source_metric(double brightness_khz_per_mw, double crystal_length_mm,
                                double detection_efficiency) {
    if (!(brightness_khz_per_mw > 0.0)) throw RangeError("brightness must be > 0");
    if (!(crystal_length_mm > 0.0)) throw RangeError("crystal length must be > 0");
    if (!(detection_efficiency > 0.0 && detection_efficiency <= 1.0))
        throw RangeError("detection efficiency must lie in (0, 1]");
    return brightness_khz_per_mw / (crystal_length_mm * detection_efficiency *
                                    detection_efficiency);
}

std::uint64_t stream_seed(std::uint64_t master_seed, std::uint64_t index) {
    return splitmix64(master_seed + 0x9E3779B97F4A7C15ULL * (index + 1));
}

MetricErrors bootstrap_metric_errors(const TwoQubitState& reconstructed,
                                     const std::vector<MeasurementSetting>& settings,
                                     double pairs_per_setting,
                                     const TwoQubitState* fidelity_target,
                                     const BootstrapOptions& options) {
    if (options.resamples < 2) throw ConfigError("need at least two bootstrap resamples");
    std::vector<double> p_samples, c_samples, f_samples;
    p_samples.reserve(options.resamples);
    c_samples.reserve(options.resamples);
    for (int b = 0; b < options.resamples; ++b) {
        const auto counts = simulate_counts(reconstructed, settings, pairs_per_setting,
                                            stream_seed(options.seed, b));
        const MleResult fit = mle_reconstruct(counts, options.mle);
        p_samples.push_back(purity(fit.state));
        c_samples.push_back(concurrence(fit.state));
        if (fidelity_target) f_samples.push_back(fidelity(fit.state, *fidelity_target));
    }
    auto sd = [](const std::vector<double>& xs) {
        double mean = 0.0;
        for (double x : xs) mean += x;
        mean /= static_cast<double>(xs.size());
        double var = 0.0;
        for (double x : xs) var += (x - mean) * (x - mean);
        return std::sqrt(var / static_cast<double>(xs.size() - 1));
    };
    MetricErrors err;
    err.purity_sd = sd(p_samples);
    err.concurrence_sd = sd(c_samples);
    if (fidelity_target) err.fidelity_sd = sd(f_samples);
    return err;
}

} // namespace spdckit

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "spdckit/qstate.hpp"

namespace spdckit {

/// The six canonical polarization projector labels. Conventions:
/// D = (H+V)/sqrt2, A = (H-V)/sqrt2, R = (H-iV)/sqrt2, L = (H+iV)/sqrt2.
enum class Pol { H, V, D, A, R, L };

Pol pol_from_string(std::string_view s);
const char* to_string(Pol pol);

Eigen::Vector2cd polarization_ket(Pol pol);

struct MeasurementSetting {
    Pol arm1 = Pol::H;
    Pol arm2 = Pol::H;
};

/// The 36-setting product set {H,V,D,A,R,L} x {H,V,D,A,R,L}.
std::vector<MeasurementSetting> default_settings();

Eigen::Vector4cd setting_ket(const MeasurementSetting& setting);

/// Rank-1 projector |a1 a2><a1 a2|; idempotent, trace 1.
Eigen::Matrix4cd projector(const MeasurementSetting& setting);

struct TomographyRecord {
    MeasurementSetting setting;
    std::uint64_t count = 0;
    double pairs_per_setting = 0.0;  // acquisition scale N
};

/// Poisson counts with mean N [(1-a) Tr(rho Pi) + a/4]; deterministic for a
/// fixed seed (single RNG stream consumed in setting order).
std::vector<TomographyRecord> simulate_counts(const TwoQubitState& state,
                                              const std::vector<MeasurementSetting>& settings,
                                              double pairs_per_setting, std::uint64_t seed,
                                              double accidental_rate = 0.0);

/// Least-squares solution of Tr(rho Pi_k) = count_k / N_k over the Hermitian
/// operator space; Hermitian by construction, trace renormalized to 1, not
/// necessarily positive. ConfigError when the settings do not span the
/// 16-dimensional operator space.
Eigen::Matrix4cd linear_inversion(const std::vector<TomographyRecord>& records);

/// Poisson log-likelihood sum_k [count_k ln p_k - N_k p_k], p_k = Tr(rho Pi_k)
/// (constant terms dropped); -inf when a zero-probability setting has counts.
double log_likelihood(const Eigen::Matrix4cd& rho,
                      const std::vector<TomographyRecord>& records);

struct MleOptions {
    int max_iterations = 10000;
    double tolerance = 1e-10;  // stop when the log-likelihood gain drops below
};

struct MleResult {
    TwoQubitState state;
    double log_likelihood = 0.0;
    int iterations = 0;
    bool converged = true;  // false: iteration cap hit before the tolerance
};

/// Maximum-likelihood reconstruction through the physical parameterization
/// rho = T^dag T / Tr(T^dag T) (T lower-triangular, 16 real parameters),
/// gradient ascent with a backtracking line search, started from the
/// PSD-projected linear inversion. Never returns a state with lower
/// likelihood than that starting point.
MleResult mle_reconstruct(const std::vector<TomographyRecord>& records,
                          const MleOptions& options = {});

/// Tr(rho^2), in [1/4, 1] for two qubits.
double purity(const TwoQubitState& state);

/// Wootters concurrence max(0, l1 - l2 - l3 - l4) from the decreasing square
/// roots of the eigenvalues of rho (sy x sy) rho* (sy x sy).
double concurrence(const TwoQubitState& state);

/// <psi|rho|psi> for a pure target (DomainError for mixed targets).
double fidelity(const TwoQubitState& state, const TwoQubitState& pure_target);

struct CountRates {
    double coincidences_hz = 0.0;  // S_c
    double signal_hz = 0.0;        // S_s
    double idler_hz = 0.0;         // S_i
};

/// eta_c = S_c / sqrt(S_s S_i).
double coincidence_to_single_ratio(const CountRates& rates);

/// U = brightness / (length * efficiency^2): brightness per unit crystal
/// length with the per-arm detection loss removed. kHz/mW/mm.
double normalized_source_metric(double brightness_khz_per_mw, double crystal_length_mm,
                                double detection_efficiency);

struct BootstrapOptions {
    int resamples = 100;
    std::uint64_t seed = 1;
    MleOptions mle;
};

struct MetricErrors {
    double purity_sd = 0.0;
    double concurrence_sd = 0.0;
    std::optional<double> fidelity_sd;  // set when a fidelity target was given
};

/// Parametric bootstrap: resample counts from the reconstructed state,
/// re-run the MLE, report the sample standard deviation of each metric.
/// Stream seeds derive from the master seed by resample index, so results
/// do not depend on evaluation order.
MetricErrors bootstrap_metric_errors(const TwoQubitState& reconstructed,
                                     const std::vector<MeasurementSetting>& settings,
                                     double pairs_per_setting,
                                     const TwoQubitState* fidelity_target,
                                     const BootstrapOptions& options);

/// Stream seed for resample/batch index derived from a master seed.
std::uint64_t stream_seed(std::uint64_t master_seed, std::uint64_t index);

} // namespace spdckit

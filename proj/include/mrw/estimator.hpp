#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "mrw/errors.hpp"
#include "mrw/series.hpp"

namespace mrw {

inline constexpr double kLambda2Max = 1.5;
inline constexpr int kCoarseGridPoints = 21;
inline constexpr double kRhoGridLimit = 0.95;
inline constexpr double kRhoGridStep = 0.05;
inline constexpr double kLambdaEdgeMargin = 1e-4;
inline constexpr double kCouplingFloor = 1e-6;

struct FitResult {
    Scale scale;
    double estimate = 0.0;  // lambda2_hat or Lambda_hat
    double chi2_min = 0.0;
    std::size_t n_bins_used = 0;
    std::size_t n_samples = 0;
    int iterations = 0;
    double bracket_lo = 0.0;  // golden-section bracket around the coarse-grid minimum
    double bracket_hi = 0.0;
    double domain_lo = 0.0;
    double domain_hi = 0.0;
    bool boundary_hit = false;
    double rho_eps = std::numeric_limits<double>::quiet_NaN();  // joint fits: best grid rho at the optimum
};

// How the Gaussian-part correlation is removed from the joint objective.
enum class RhoMarginalization {
    Likelihood,    // -2 ln of the integral of exp(-chi^2/2) over rho
    ChiSquareSum,  // integral of chi^2 over rho
};

// chi^2(lambda2) against a univariate histogram; model density at bin centers.
[[nodiscard]] double chi_square_lambda2(const HistogramPdf& hist, double lambda2);

// chi^2 of a joint histogram at fixed (Lambda, rho_eps).
[[nodiscard]] double chi_square_joint(const JointHistogramPdf& jhist, double lambda2_1,
                                      double lambda2_2, double Lambda, double rho_eps);

// Joint objective with rho_eps integrated out by the trapezoid rule on
// [-0.95, 0.95], step 0.05.
[[nodiscard]] double marginal_chi_square_joint(
    const JointHistogramPdf& jhist, double lambda2_1, double lambda2_2, double Lambda,
    RhoMarginalization mode = RhoMarginalization::Likelihood);

// Minimizes chi_square_lambda2 over [0, 1.5]: 21-point grid, then golden section
// around the best grid point. Throws InsufficientData below 100 samples.
[[nodiscard]] FitResult fit_lambda2(const HistogramPdf& hist);

// Minimizes marginal_chi_square_joint over |Lambda| <= sqrt(l1 l2) - 1e-4.
// Throws CouplingUndefined when lambda2_1 * lambda2_2 < 1e-6.
[[nodiscard]] FitResult fit_Lambda(const JointHistogramPdf& jhist, double lambda2_1,
                                   double lambda2_2,
                                   RhoMarginalization mode = RhoMarginalization::Likelihood);

[[nodiscard]] double empirical_moment(const IncrementSet& inc, double q);
[[nodiscard]] double empirical_joint_moment(const IncrementSet& inc1, const IncrementSet& inc2,
                                            double q);

struct ScaleFailure {
    Scale scale;
    ErrorKind kind;
    std::string message;
};

struct ScaleProfile {
    std::vector<Scale> scales;
    std::vector<double> values;
    std::vector<FitResult> fits;
    // Marginal lambda2 used by each joint fit (empty for univariate profiles).
    std::vector<double> lambda2_1;
    std::vector<double> lambda2_2;
    std::vector<ScaleFailure> failures;
};

// values[qi][si] with qi indexing q_values and si indexing scales.
struct MomentGrid {
    std::vector<double> q_values;
    std::vector<Scale> scales;
    std::vector<std::vector<double>> values;
    std::vector<ScaleFailure> failures;
};

struct SweepOptions {
    int bins = kDefaultBins;
    int joint_bins = kDefaultJointBins;
    double clip_sd = kDefaultClipSd;
    RhoMarginalization rho_marginalization = RhoMarginalization::Likelihood;
};

// Scale sweeps. Each scale is independent and may run concurrently; results
// come back ordered by scale, and a scale that fails is recorded in
// `failures` instead of aborting the sweep.
[[nodiscard]] ScaleProfile sweep_lambda2(const SeriesRecord& series, std::span<const Scale> scales,
                                         const SweepOptions& opts = {});
[[nodiscard]] ScaleProfile sweep_Lambda(const SeriesRecord& series1, const SeriesRecord& series2,
                                        std::span<const Scale> scales,
                                        const SweepOptions& opts = {});
[[nodiscard]] MomentGrid sweep_moments(const SeriesRecord& series, std::span<const Scale> scales,
                                       std::span<const double> q_values);
[[nodiscard]] MomentGrid sweep_joint_moments(const SeriesRecord& series1,
                                             const SeriesRecord& series2,
                                             std::span<const Scale> scales,
                                             std::span<const double> q_values);

enum class WindowStandardization {
    PerWindow,  // z-score the increments inside each window
    Global,     // z-score once over the full series, then slice
};

struct RollingOptions {
    int window = 60;
    int step = 1;
    Scale scale{12};
    WindowStandardization standardization = WindowStandardization::PerWindow;
};

// moments*[w][qi] for window w and q_values[qi].
struct RollingResult {
    std::vector<MonthIndex> window_starts;
    int window_length = 0;
    int step = 0;
    Scale scale;
    std::vector<double> q_values;
    std::vector<std::vector<double>> moments1;
    std::vector<std::vector<double>> moments2;
    std::vector<std::vector<double>> joint;
};

// Slides a window over two aligned monthly series and evaluates m_q of each
// and the joint moment at `scale`. Throws InvalidWindow when the window
// exceeds the span or is shorter than five scales.
[[nodiscard]] RollingResult rolling_scan(const SeriesRecord& series1, const SeriesRecord& series2,
                                         std::span<const double> q_values,
                                         const RollingOptions& opts = {});

}  // namespace mrw

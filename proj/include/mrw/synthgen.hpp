#pragma once

#include <cstddef>
#include <cstdint>
#include <variant>
#include <vector>

#include "mrw/bicascade.hpp"
#include "mrw/cascade.hpp"
#include "mrw/series.hpp"

namespace mrw {

enum class GeneratorKind { UniCascade, BiCascade, MrwPath };

struct GeneratorSpec {
    GeneratorKind kind = GeneratorKind::UniCascade;
    std::variant<CascadeParams, BiCascadeParams> params = CascadeParams{};
    std::size_t n = 0;
    std::uint64_t seed = 0;
    double decorrelation_length = 0.0;  // mrw-path only, in samples

    // Throws InvalidParams or GeneratorConfig.
    void validate() const;
};

struct SamplePairs {
    std::vector<double> x1;
    std::vector<double> x2;
};

// n iid draws of eps * exp(omega).
[[nodiscard]] std::vector<double> gen_cascade(const GeneratorSpec& spec);
[[nodiscard]] std::vector<double> gen_cascade(const CascadeParams& p, std::size_t n,
                                              std::uint64_t seed);

// n iid pairs, Cholesky sampling of both Gaussian parts.
[[nodiscard]] SamplePairs gen_bicascade(const GeneratorSpec& spec);
[[nodiscard]] SamplePairs gen_bicascade(const BiCascadeParams& p, std::size_t n,
                                        std::uint64_t seed);

// Length-n path whose lag-1 increments are eps(t) exp(omega(t)); omega is a
// stationary Gaussian sequence with mean -lambda2 and covariance
// lambda2 ln(L / (1 + tau)) for tau < L, zero beyond, drawn by circulant
// embedding. Timestamps start at `start`.
[[nodiscard]] SeriesRecord gen_mrw_path(const GeneratorSpec& spec, MonthIndex start);

// Running sum starting at 0: a series of n + 1 points whose lag-1 increments
// are `steps`.
[[nodiscard]] std::vector<double> integrate_path(const std::vector<double>& steps);

}  // namespace mrw

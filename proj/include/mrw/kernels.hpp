#pragma once

#include <span>

#include "mrw/bicascade.hpp"
#include "mrw/cascade.hpp"

// Data-parallel evaluation kernels used by the fits. The OpenMP versions live
// in namespace mrw::kernels; mrw::kernels::serial holds straightforward
// single-threaded references (pointwise model evaluation, no component
// pruning) that the tests and the benchmark compare against.
namespace mrw::kernels {

void mixture_pdf(const Mixture1D& mix, std::span<const double> x, std::span<double> out);

// out[i * x2.size() + j] = density at (x1[i], x2[j]).
void mixture_pdf_grid(const Mixture2D& mix, std::span<const double> x1,
                      std::span<const double> x2, std::span<double> out);

// Per-bin terms (p_data - p_theory)^2 / (sigma_data^2 + sigma_theory^2), with
// sigma_theory the Poisson error of the expected count n_total * p_theory * cell.
void chi_square_terms(std::span<const double> p_data, std::span<const double> sigma_data,
                      std::span<const double> p_theory, double n_total, double cell,
                      std::span<double> out);

// Sum of chi_square_terms, accumulated in index order so the result does
// not depend on the thread count.
[[nodiscard]] double chi_square(std::span<const double> p_data, std::span<const double> sigma_data,
                                std::span<const double> p_theory, double n_total, double cell);

namespace serial {

void cascade_pdf(const CascadeParams& p, std::span<const double> x, std::span<double> out);
void joint_cascade_pdf_grid(const BiCascadeParams& p, std::span<const double> x1,
                            std::span<const double> x2, std::span<double> out);
[[nodiscard]] double chi_square(std::span<const double> p_data, std::span<const double> sigma_data,
                                std::span<const double> p_theory, double n_total, double cell);

}  // namespace serial

}  // namespace mrw::kernels

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mrw/kernels.hpp"

namespace mrw::kernels::serial {

void cascade_pdf(const CascadeParams& p, std::span<const double> x, std::span<double> out) {
    if (out.size() != x.size()) throw std::invalid_argument("cascade_pdf: size mismatch");
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = mrw::cascade_pdf(x[i], p);
}

void joint_cascade_pdf_grid(const BiCascadeParams& p, std::span<const double> x1,
                            std::span<const double> x2, std::span<double> out) {
    if (out.size() != x1.size() * x2.size()) {
        throw std::invalid_argument("joint_cascade_pdf_grid: size mismatch");
    }
    for (std::size_t i = 0; i < x1.size(); ++i) {
        for (std::size_t j = 0; j < x2.size(); ++j) {
            out[i * x2.size() + j] = mrw::joint_cascade_pdf(x1[i], x2[j], p);
        }
    }
}

double chi_square(std::span<const double> p_data, std::span<const double> sigma_data,
                  std::span<const double> p_theory, double n_total, double cell) {
    double acc = 0.0;
    for (std::size_t i = 0; i < p_data.size(); ++i) {
        const double expected = n_total * cell * p_theory[i];
        const double sigma_theory = std::sqrt(std::max(expected, 1.0)) / (n_total * cell);
        const double d = p_data[i] - p_theory[i];
        acc += d * d / (sigma_data[i] * sigma_data[i] + sigma_theory * sigma_theory);
    }
    return acc;
}

}  // namespace mrw::kernels::serial

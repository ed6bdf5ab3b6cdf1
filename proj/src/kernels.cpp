#include "mrw/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace mrw::kernels {

namespace {

// Terms amplitude * exp(-E) below 1e-30 are skipped by the grid kernel.
constexpr double kLogTermFloor = 69.07755278982137;  // -ln(1e-30)

}  // namespace

void mixture_pdf(const Mixture1D& mix, std::span<const double> x, std::span<double> out) {
    if (out.size() != x.size()) throw std::invalid_argument("mixture_pdf: size mismatch");
    const std::size_t nc = mix.amplitude.size();
    const double* amp = mix.amplitude.data();
    const double* prec = mix.precision.data();
    const auto n = static_cast<std::ptrdiff_t>(x.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const double xx = x[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)];
        double acc = 0.0;
        for (std::size_t k = 0; k < nc; ++k) acc += amp[k] * std::exp(-prec[k] * xx);
        out[static_cast<std::size_t>(i)] = acc;
    }
}

void mixture_pdf_grid(const Mixture2D& mix, std::span<const double> x1,
                      std::span<const double> x2, std::span<double> out) {
    const std::size_t n1 = x1.size();
    const std::size_t n2 = x2.size();
    if (out.size() != n1 * n2) throw std::invalid_argument("mixture_pdf_grid: size mismatch");
    if (n1 == 0 || n2 == 0) return;
    const std::size_t nc = mix.amplitude.size();
    const double* amp = mix.amplitude.data();
    const double* q11 = mix.q11.data();
    const double* q22 = mix.q22.data();
    const double* q12 = mix.q12.data();
    std::vector<double> x2sq(n2);
    for (std::size_t j = 0; j < n2; ++j) x2sq[j] = x2[j] * x2[j];
    // Equally spaced second axis (histogram bin centers) lets each row skip
    // the cells where a component's term is below 1e-30.
    const double y0 = x2[0];
    const double dy = n2 > 1 ? (x2[n2 - 1] - x2[0]) / static_cast<double>(n2 - 1) : 1.0;
    bool uniform = dy > 0.0;
    for (std::size_t j = 1; uniform && j < n2; ++j) {
        uniform = std::abs(x2[j] - (y0 + dy * static_cast<double>(j))) <= 1e-9 * dy;
    }

#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n1); ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        double* row = out.data() + i * n2;
        std::fill(row, row + n2, 0.0);
        const double a = x1[i];
        for (std::size_t k = 0; k < nc; ++k) {
            const double base = q11[k] * a * a;
            const double cross = q12[k] * a;
            const double qk = q22[k];
            const double ak = amp[k];
            const double cutoff = std::log(ak) + kLogTermFloor;
            std::size_t jlo = 0;
            std::size_t jhi = n2;
            if (uniform) {
                // exponent = qk (y - y*)^2 + floor_k, minimized at y* = -cross / (2 qk)
                const double ystar = -cross / (2.0 * qk);
                const double floor_k = base - qk * ystar * ystar;
                if (floor_k > cutoff) continue;
                const double half = std::sqrt((cutoff - floor_k) / qk);
                const double lo = std::ceil((ystar - half - y0) / dy);
                const double hi = std::floor((ystar + half - y0) / dy);
                if (hi < 0.0 || lo > static_cast<double>(n2 - 1)) continue;
                jlo = static_cast<std::size_t>(std::max(lo, 0.0));
                jhi = static_cast<std::size_t>(std::min(hi, static_cast<double>(n2 - 1))) + 1;
            }
            for (std::size_t j = jlo; j < jhi; ++j) {
                row[j] += ak * std::exp(-(base + qk * x2sq[j] + cross * x2[j]));
            }
        }
    }
}

void chi_square_terms(std::span<const double> p_data, std::span<const double> sigma_data,
                      std::span<const double> p_theory, double n_total, double cell,
                      std::span<double> out) {
    const std::size_t n = p_data.size();
    if (sigma_data.size() != n || p_theory.size() != n || out.size() != n) {
        throw std::invalid_argument("chi_square_terms: size mismatch");
    }
    const double scale = n_total * cell;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        const double expected = scale * p_theory[i];
        const double sigma_theory = std::sqrt(std::max(expected, 1.0)) / scale;
        const double d = p_data[i] - p_theory[i];
        out[i] = d * d / (sigma_data[i] * sigma_data[i] + sigma_theory * sigma_theory);
    }
}

double chi_square(std::span<const double> p_data, std::span<const double> sigma_data,
                  std::span<const double> p_theory, double n_total, double cell) {
    std::vector<double> terms(p_data.size());
    chi_square_terms(p_data, sigma_data, p_theory, n_total, cell, terms);
    double acc = 0.0;
    for (double t : terms) acc += t;
    return acc;
}

}  // namespace mrw::kernels

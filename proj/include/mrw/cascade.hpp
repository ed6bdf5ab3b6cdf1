#pragma once

#include <vector>

namespace mrw {

// Parameters of the univariate cascade dx = eps * exp(omega), with
// eps ~ N(0, sigma^2) and omega ~ N(-lambda2, lambda2).
struct CascadeParams {
    double lambda2 = 0.0;
    double sigma = 1.0;

    // Throws InvalidParams unless lambda2 >= 0 and sigma > 0, both finite.
    void validate() const;
};

// Zero-mean Gaussian mixture sum_k amplitude[k] * exp(-precision[k] * x^2).
// This is the quadrature-discretized cascade density; the batch kernels
// evaluate it over many abscissae.
struct Mixture1D {
    std::vector<double> amplitude;
    std::vector<double> precision;
};

// 40-node Gauss-Hermite discretization of the log-scale integral. Components
// whose quadrature weight is below 1e-15 of the total are dropped.
[[nodiscard]] Mixture1D cascade_mixture(const CascadeParams& p);

// Density of dx at x. Gauss-Hermite quadrature over ln(scale) with
// ln(scale) = -lambda2 + sqrt(2 lambda2) u; exact normal density when
// lambda2 == 0. Throws Domain for non-finite x.
[[nodiscard]] double cascade_pdf(double x, const CascadeParams& p);

// E|dx|^q = sigma^q 2^(q/2) Gamma((q+1)/2) / sqrt(pi) * exp(-q lambda2 + q^2 lambda2 / 2).
[[nodiscard]] double cascade_abs_moment(double q, const CascadeParams& p);

// m_q = (E|dx|^q)^(1/q), closed form.
[[nodiscard]] double cascade_log_moment(double q, const CascadeParams& p);

// E[dx^4] / E[dx^2]^2 = 3 exp(4 lambda2).
[[nodiscard]] double cascade_kurtosis(const CascadeParams& p);

}  // namespace mrw

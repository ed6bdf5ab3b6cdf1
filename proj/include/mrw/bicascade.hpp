#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace mrw {

/**
 * Parameters of the coupled cascade pair (eps1 e^omega1, eps2 e^omega2).
 *
 * (eps1, eps2) is bivariate normal with standard deviations sigma1, sigma2
 * and correlation rho_eps. (omega1, omega2) is bivariate normal with means
 * (-lambda2_1, -lambda2_2) and the multifractal covariance matrix
 * [[lambda2_1, Lambda], [Lambda, lambda2_2]].
 */
struct BiCascadeParams {
    double lambda2_1 = 0.0;
    double lambda2_2 = 0.0;
    double Lambda = 0.0;
    double rho_eps = 0.0;
    double sigma1 = 1.0;
    double sigma2 = 1.0;

    // Throws InvalidParams on negative log-variances, |Lambda| > sqrt(lambda2_1
    // lambda2_2), |rho_eps| >= 1 or non-positive sigmas.
    void validate() const;

    // Lambda / (lambda_1 lambda_2); zero when either marginal is Gaussian.
    [[nodiscard]] double rho_omega() const;
    // Off-diagonal of the Gaussian-part covariance, rho_eps sigma1 sigma2.
    [[nodiscard]] double Sigma() const { return rho_eps * sigma1 * sigma2; }
};

// sum_k amplitude[k] * exp(-(q11[k] x1^2 + q22[k] x2^2 + q12[k] x1 x2))
struct Mixture2D {
    std::vector<double> amplitude;
    std::vector<double> q11;
    std::vector<double> q22;
    std::vector<double> q12;
};

// 40x40 tensor Gauss-Hermite discretization (the univariate rule on each
// axis) after a Cholesky factorization of the multifractal matrix. Components
// with normalized weight below 1e-15 are dropped.
[[nodiscard]] Mixture2D bicascade_mixture(const BiCascadeParams& p);

// Joint density of (dx1, dx2). Throws InvalidParams on invalid parameters.
[[nodiscard]] double joint_cascade_pdf(double x1, double x2, const BiCascadeParams& p);

// E[dx1^2 dx2^2] = sigma1^2 sigma2^2 (1 + 2 rho_eps^2) exp(4 Lambda).
[[nodiscard]] double joint_abs_moment_q2(const BiCascadeParams& p);

struct MomentEstimate {
    double value = 0.0;
    double standard_error = 0.0;  // zero for closed-form results
    bool closed_form = true;
};

// m_q^joint = (E|dx1|^q |dx2|^q)^(1/q). Closed form for q == 2; otherwise a
// Monte Carlo estimate from `samples` draws in antithetic pairs, with the
// delta-method standard error of the 1/q-powered value.
[[nodiscard]] MomentEstimate joint_log_moment(double q, const BiCascadeParams& p,
                                              std::uint64_t seed = 0,
                                              std::size_t samples = 1'000'000);

}  // namespace mrw

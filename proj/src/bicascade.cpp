#include "mrw/bicascade.hpp"

#include <cmath>
#include <numbers>

#include "mrw/errors.hpp"
#include "mrw/quadrature.hpp"
#include "mrw/random.hpp"

namespace mrw {

namespace {

constexpr double kPruneWeight = 1e-15;

// Lower Cholesky factor of the multifractal matrix.
struct Cholesky2 {
    double l11;
    double l21;
    double l22;
};

Cholesky2 multifractal_cholesky(const BiCascadeParams& p) {
    const double l11 = std::sqrt(p.lambda2_1);
    const double l21 = l11 > 0.0 ? p.Lambda / l11 : 0.0;
    const double l22 = std::sqrt(std::max(p.lambda2_2 - l21 * l21, 0.0));
    return {l11, l21, l22};
}

}  // namespace

void BiCascadeParams::validate() const {
    for (double v : {lambda2_1, lambda2_2, Lambda, rho_eps, sigma1, sigma2}) {
        if (!std::isfinite(v)) throw Error(ErrorKind::InvalidParams, "non-finite parameter");
    }
    if (lambda2_1 < 0.0 || lambda2_2 < 0.0) {
        throw Error(ErrorKind::InvalidParams, "lambda2 values must be >= 0");
    }
    const double bound = std::sqrt(lambda2_1 * lambda2_2);
    if (std::abs(Lambda) > bound * (1.0 + 1e-12)) {
        throw Error(ErrorKind::InvalidParams,
                    "multifractal matrix not positive semidefinite: |Lambda| > sqrt(lambda2_1 lambda2_2)");
    }
    if (!(std::abs(rho_eps) < 1.0)) {
        throw Error(ErrorKind::InvalidParams, "|rho_eps| must be < 1");
    }
    if (sigma1 <= 0.0 || sigma2 <= 0.0) {
        throw Error(ErrorKind::InvalidParams, "sigmas must be > 0");
    }
}

double BiCascadeParams::rho_omega() const {
    const double denom = std::sqrt(lambda2_1 * lambda2_2);
    return denom > 0.0 ? Lambda / denom : 0.0;
}

Mixture2D bicascade_mixture(const BiCascadeParams& p) {
    p.validate();
    const auto& gh = gauss_hermite_40();
    const Cholesky2 c = multifractal_cholesky(p);
    const double root2 = std::numbers::sqrt2;
    const double det = 1.0 - p.rho_eps * p.rho_eps;
    const double norm = 1.0 / (2.0 * std::numbers::pi * std::sqrt(det));

    Mixture2D mix;
    const std::size_t n = gh.nodes.size();
    mix.amplitude.reserve(n * n);
    mix.q11.reserve(n * n);
    mix.q22.reserve(n * n);
    mix.q12.reserve(n * n);
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = 0; b < n; ++b) {
            const double w = gh.weights[a] * gh.weights[b] / std::numbers::pi;
            if (w < kPruneWeight) continue;
            // (omega1, omega2) = mean + L * sqrt(2) * (u_a, u_b)
            const double u = root2 * gh.nodes[a];
            const double v = root2 * gh.nodes[b];
            const double s1 = p.sigma1 * std::exp(-p.lambda2_1 + c.l11 * u);
            const double s2 = p.sigma2 * std::exp(-p.lambda2_2 + c.l21 * u + c.l22 * v);
            mix.amplitude.push_back(w * norm / (s1 * s2));
            mix.q11.push_back(0.5 / (det * s1 * s1));
            mix.q22.push_back(0.5 / (det * s2 * s2));
            mix.q12.push_back(-p.rho_eps / (det * s1 * s2));
        }
    }
    return mix;
}

double joint_cascade_pdf(double x1, double x2, const BiCascadeParams& p) {
    if (!std::isfinite(x1) || !std::isfinite(x2)) {
        throw Error(ErrorKind::Domain, "joint_cascade_pdf: non-finite abscissa");
    }
    p.validate();
    const auto& gh = gauss_hermite_40();
    const Cholesky2 c = multifractal_cholesky(p);
    const double root2 = std::numbers::sqrt2;
    const double det = 1.0 - p.rho_eps * p.rho_eps;
    double acc = 0.0;
    for (std::size_t a = 0; a < gh.nodes.size(); ++a) {
        const double u = root2 * gh.nodes[a];
        const double s1 = p.sigma1 * std::exp(-p.lambda2_1 + c.l11 * u);
        const double z1 = x1 / s1;
        for (std::size_t b = 0; b < gh.nodes.size(); ++b) {
            const double v = root2 * gh.nodes[b];
            const double s2 = p.sigma2 * std::exp(-p.lambda2_2 + c.l21 * u + c.l22 * v);
            const double z2 = x2 / s2;
            const double quad = (z1 * z1 - 2.0 * p.rho_eps * z1 * z2 + z2 * z2) / det;
            acc += gh.weights[a] * gh.weights[b] * std::exp(-0.5 * quad) / (s1 * s2);
        }
    }
    return acc / (std::numbers::pi * 2.0 * std::numbers::pi * std::sqrt(det));
}

double joint_abs_moment_q2(const BiCascadeParams& p) {
    p.validate();
    const double s = p.sigma1 * p.sigma2;
    return s * s * (1.0 + 2.0 * p.rho_eps * p.rho_eps) * std::exp(4.0 * p.Lambda);
}

MomentEstimate joint_log_moment(double q, const BiCascadeParams& p, std::uint64_t seed,
                                std::size_t samples) {
    if (!(q > 0.0) || !std::isfinite(q)) throw Error(ErrorKind::Domain, "moment order must be > 0");
    p.validate();
    if (q == 2.0) return {std::sqrt(joint_abs_moment_q2(p)), 0.0, true};
    if (samples < 2) throw Error(ErrorKind::InsufficientData, "Monte Carlo needs >= 2 samples");

    const Cholesky2 c = multifractal_cholesky(p);
    const double re = p.rho_eps;
    const double re_c = std::sqrt(1.0 - re * re);
    Engine eng = make_engine(seed, 0x6a6f696e74ull);
    std::normal_distribution<double> normal;

    auto product = [&](double z1, double z2, double z3, double z4) {
        const double w1 = -p.lambda2_1 + c.l11 * z1;
        const double w2 = -p.lambda2_2 + c.l21 * z1 + c.l22 * z2;
        const double e1 = p.sigma1 * z3;
        const double e2 = p.sigma2 * (re * z3 + re_c * z4);
        return std::pow(std::abs(e1 * std::exp(w1)) * std::abs(e2 * std::exp(w2)), q);
    };

    // Each antithetic pair contributes one averaged observation.
    const std::size_t pairs = samples / 2;
    double mean = 0.0;
    double m2 = 0.0;
    for (std::size_t i = 0; i < pairs; ++i) {
        const double z1 = normal(eng);
        const double z2 = normal(eng);
        const double z3 = normal(eng);
        const double z4 = normal(eng);
        const double y = 0.5 * (product(z1, z2, z3, z4) + product(-z1, -z2, -z3, -z4));
        const double delta = y - mean;
        mean += delta / static_cast<double>(i + 1);
        m2 += delta * (y - mean);
    }
    const double se_raw = std::sqrt(m2 / static_cast<double>(pairs - 1) / static_cast<double>(pairs));
    const double value = std::pow(mean, 1.0 / q);
    // d/dE (E^(1/q)) = E^(1/q - 1) / q
    const double se = value / (q * mean) * se_raw;
    return {value, se, false};
}

}  // namespace mrw

#include "mrw/cascade.hpp"

#include <cmath>
#include <numbers>

#include "mrw/errors.hpp"
#include "mrw/quadrature.hpp"

namespace mrw {

namespace {

constexpr double kPruneWeight = 1e-15;

double normal_pdf(double x, double sd) {
    const double z = x / sd;
    return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
}

}  // namespace

void CascadeParams::validate() const {
    if (!std::isfinite(lambda2) || lambda2 < 0.0) {
        throw Error(ErrorKind::InvalidParams, "lambda2 must be finite and >= 0");
    }
    if (!std::isfinite(sigma) || sigma <= 0.0) {
        throw Error(ErrorKind::InvalidParams, "sigma must be finite and > 0");
    }
}

Mixture1D cascade_mixture(const CascadeParams& p) {
    p.validate();
    Mixture1D mix;
    if (p.lambda2 == 0.0) {
        mix.amplitude.push_back(1.0 / (p.sigma * std::sqrt(2.0 * std::numbers::pi)));
        mix.precision.push_back(0.5 / (p.sigma * p.sigma));
        return mix;
    }
    const auto& gh = gauss_hermite_40();
    const double spread = std::sqrt(2.0 * p.lambda2);
    for (std::size_t k = 0; k < gh.nodes.size(); ++k) {
        const double w = gh.weights[k] / std::sqrt(std::numbers::pi);
        if (w < kPruneWeight) continue;
        const double s = p.sigma * std::exp(-p.lambda2 + spread * gh.nodes[k]);
        mix.amplitude.push_back(w / (s * std::sqrt(2.0 * std::numbers::pi)));
        mix.precision.push_back(0.5 / (s * s));
    }
    return mix;
}

double cascade_pdf(double x, const CascadeParams& p) {
    if (!std::isfinite(x)) throw Error(ErrorKind::Domain, "cascade_pdf: non-finite abscissa");
    p.validate();
    if (p.lambda2 == 0.0) return normal_pdf(x, p.sigma);
    const auto& gh = gauss_hermite_40();
    const double spread = std::sqrt(2.0 * p.lambda2);
    double acc = 0.0;
    for (std::size_t k = 0; k < gh.nodes.size(); ++k) {
        const double s = p.sigma * std::exp(-p.lambda2 + spread * gh.nodes[k]);
        acc += gh.weights[k] * normal_pdf(x, s);
    }
    return acc / std::sqrt(std::numbers::pi);
}

double cascade_abs_moment(double q, const CascadeParams& p) {
    if (!(q > 0.0) || !std::isfinite(q)) throw Error(ErrorKind::Domain, "moment order must be > 0");
    p.validate();
    const double gaussian = std::pow(p.sigma, q) * std::pow(2.0, 0.5 * q) *
                            std::tgamma(0.5 * (q + 1.0)) / std::sqrt(std::numbers::pi);
    return gaussian * std::exp(-q * p.lambda2 + 0.5 * q * q * p.lambda2);
}

double cascade_log_moment(double q, const CascadeParams& p) {
    return std::pow(cascade_abs_moment(q, p), 1.0 / q);
}

double cascade_kurtosis(const CascadeParams& p) {
    p.validate();
    return 3.0 * std::exp(4.0 * p.lambda2);
}

}  // namespace mrw

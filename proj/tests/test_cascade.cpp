#include <catch_amalgamated.hpp>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <utility>
#include <vector>

#include "mrw/cascade.hpp"
#include "mrw/errors.hpp"

using namespace mrw;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

double normal_pdf(double x, double sd) {
    return std::exp(-0.5 * x * x / (sd * sd)) / (sd * std::sqrt(2.0 * std::numbers::pi));
}

// Density of eps * exp(omega) by adaptive quadrature over omega, independent
// of the Gauss-Hermite discretization.
double reference_pdf(double x, double lambda2, double sigma) {
    if (lambda2 == 0.0) return normal_pdf(x, sigma);
    boost::math::quadrature::tanh_sinh<double> ts;
    const double sd = std::sqrt(lambda2);
    auto f = [&](double w) { return normal_pdf(x, sigma * std::exp(w)) * normal_pdf(w + lambda2, sd); };
    return ts.integrate(f, -lambda2 - 14.0 * sd, -lambda2 + 14.0 * sd);
}

double integrate_half_line(const std::function<double(double)>& f) {
    boost::math::quadrature::exp_sinh<double> es;
    return es.integrate(f, 0.0, std::numeric_limits<double>::infinity());
}

}  // namespace

TEST_CASE("cascade_pdf normalizes") {
    for (double l2 : {0.0, 0.1, 0.3, 0.5, 1.0, 1.5}) {
        const CascadeParams p{l2, 1.0};
        const double mass = 2.0 * integrate_half_line([&](double x) { return cascade_pdf(x, p); });
        CHECK_THAT(mass, WithinAbs(1.0, 1e-6));
    }
}

TEST_CASE("cascade_pdf at the origin") {
    CHECK_THAT(cascade_pdf(0.0, {0.2, 1.0}), WithinAbs(std::exp(0.3) / std::sqrt(2.0 * std::numbers::pi), 1e-6));
    CHECK_THAT(cascade_pdf(0.0, {0.0, 1.0}), WithinRel(1.0 / std::sqrt(2.0 * std::numbers::pi), 1e-15));
    // P(0) = E[exp(-omega)] / (sigma sqrt(2 pi)) = exp(1.5 lambda2) / (sigma sqrt(2 pi))
    for (double l2 : {0.05, 0.5, 1.0}) {
        const double expect = std::exp(1.5 * l2) / (2.0 * std::sqrt(2.0 * std::numbers::pi));
        CHECK_THAT(cascade_pdf(0.0, {l2, 2.0}), WithinRel(expect, 1e-8));
    }
}

TEST_CASE("cascade_pdf agrees with adaptive quadrature over the log-scale") {
    // Pointwise accuracy of the 40-node rule degrades as the log-scale spread grows.
    const std::vector<std::pair<double, double>> cases = {
        {0.01, 1e-7}, {0.1, 2e-5}, {0.3, 5e-4}, {0.7, 3e-3}, {1.5, 2e-2}};
    for (const auto& [l2, tol] : cases) {
        for (double x : {-5.0, -2.0, -0.3, 0.0, 0.1, 1.0, 2.5, 4.0, 8.0}) {
            const double ref = reference_pdf(x, l2, 1.0);
            CHECK_THAT(cascade_pdf(x, {l2, 1.0}), WithinRel(ref, tol));
        }
    }
    CHECK_THAT(cascade_pdf(1.3, {0.4, 0.5}), WithinRel(reference_pdf(1.3, 0.4, 0.5), 1e-5));
}

TEST_CASE("cascade_pdf is even") {
    for (double l2 : {0.0, 0.2, 0.9}) {
        for (double x : {0.01, 0.5, 1.7, 3.3, 9.0}) {
            CHECK(cascade_pdf(x, {l2, 1.0}) == cascade_pdf(-x, {l2, 1.0}));
        }
    }
}

TEST_CASE("cascade_pdf Gaussian limit") {
    double worst = 0.0;
    for (double x = -8.0; x <= 8.0; x += 0.01) {
        worst = std::max(worst, std::abs(cascade_pdf(x, {1e-12, 1.0}) - normal_pdf(x, 1.0)));
    }
    CHECK(worst < 1e-8);
}

TEST_CASE("cascade tails thicken with lambda2") {
    // At fixed unit variance the density at x rises with lambda2 only up to a
    // turnover (about 0.35 at x = 3.2, later for larger x); beyond it mass
    // moves further out. It stays above the Gaussian throughout.
    for (double x : {3.2, 3.5, 4.0, 5.0, 6.0, 8.0}) {
        double prev = cascade_pdf(x, {0.0, 1.0});
        for (double l2 = 0.025; l2 <= 0.3 + 1e-12; l2 += 0.025) {
            const double cur = cascade_pdf(x, {l2, 1.0});
            CHECK(cur > prev);
            prev = cur;
        }
    }
    for (double x : {3.0, 3.2, 4.0, 6.0, 8.0}) {
        for (double l2 = 0.05; l2 <= 1.5 + 1e-12; l2 += 0.05) {
            CHECK(cascade_pdf(x, {l2, 1.0}) > normal_pdf(x, 1.0));
            CHECK(cascade_pdf(-x, {l2, 1.0}) > normal_pdf(x, 1.0));
        }
    }
}

TEST_CASE("closed-form moments match numerical integrals of the density") {
    for (double l2 : {0.0, 0.1, 0.3}) {
        const CascadeParams p{l2, 1.0};
        for (double q : {1.0, 2.0, 3.0, 4.0}) {
            const double numeric =
                2.0 * integrate_half_line([&](double x) {
                    const double d = cascade_pdf(x, p);
                    return d == 0.0 ? 0.0 : std::pow(x, q) * d;
                });
            const double closed = std::pow(cascade_log_moment(q, p), q);
            CHECK_THAT(numeric, WithinRel(closed, 1e-4));
            CHECK_THAT(cascade_abs_moment(q, p), WithinRel(closed, 1e-14));
        }
    }
}

TEST_CASE("unit variance and known moments") {
    for (double l2 : {0.0, 0.2, 1.1}) {
        CHECK_THAT(cascade_abs_moment(2.0, {l2, 1.0}), WithinRel(1.0, 1e-14));
        CHECK_THAT(cascade_abs_moment(2.0, {l2, 3.0}), WithinRel(9.0, 1e-14));
    }
    CHECK_THAT(cascade_abs_moment(1.0, {0.0, 1.0}), WithinRel(std::sqrt(2.0 / std::numbers::pi), 1e-14));
    CHECK_THAT(cascade_abs_moment(4.0, {0.0, 1.0}), WithinRel(3.0, 1e-14));
}

TEST_CASE("kurtosis") {
    CHECK_THAT(cascade_kurtosis({0.0, 1.0}), WithinRel(3.0, 1e-15));
    CHECK_THAT(cascade_kurtosis({0.1, 1.0}), WithinRel(3.0 * std::exp(0.4), 1e-14));
    CHECK_THAT(cascade_kurtosis({0.5, 1.0}), WithinRel(22.1672, 1e-5));
    const CascadeParams p{0.37, 1.7};
    CHECK_THAT(cascade_kurtosis(p),
               WithinRel(cascade_abs_moment(4.0, p) / std::pow(cascade_abs_moment(2.0, p), 2), 1e-13));
}

TEST_CASE("log moments increase with q") {
    const CascadeParams p{0.3, 1.0};
    double prev = 0.0;
    for (double q = 0.5; q <= 8.0; q += 0.5) {
        const double m = cascade_log_moment(q, p);
        CHECK(m > prev);
        prev = m;
    }
}

TEST_CASE("mixture discretization reproduces the density") {
    const CascadeParams p{0.45, 1.0};
    const Mixture1D mix = cascade_mixture(p);
    REQUIRE(mix.amplitude.size() <= 40u);
    REQUIRE(mix.amplitude.size() >= 20u);
    for (double x : {0.0, 0.7, 2.0, 5.0}) {
        double v = 0.0;
        for (std::size_t k = 0; k < mix.amplitude.size(); ++k) {
            v += mix.amplitude[k] * std::exp(-mix.precision[k] * x * x);
        }
        CHECK_THAT(v, WithinRel(cascade_pdf(x, p), 1e-12));
    }
    CHECK(cascade_mixture({0.0, 1.0}).amplitude.size() == 1u);
}

TEST_CASE("cascade parameter and domain errors") {
    auto kind = [](auto&& fn) {
        try {
            fn();
        } catch (const Error& e) {
            return e.kind();
        }
        return ErrorKind::Io;
    };
    CHECK(kind([] { (void)cascade_pdf(0.0, {-0.1, 1.0}); }) == ErrorKind::InvalidParams);
    CHECK(kind([] { (void)cascade_pdf(0.0, {0.1, 0.0}); }) == ErrorKind::InvalidParams);
    CHECK(kind([] { (void)cascade_pdf(0.0, {NAN, 1.0}); }) == ErrorKind::InvalidParams);
    CHECK(kind([] { (void)cascade_pdf(INFINITY, {0.1, 1.0}); }) == ErrorKind::Domain);
    CHECK(kind([] { (void)cascade_pdf(NAN, {0.1, 1.0}); }) == ErrorKind::Domain);
    CHECK(kind([] { (void)cascade_log_moment(0.0, {0.1, 1.0}); }) == ErrorKind::Domain);
}

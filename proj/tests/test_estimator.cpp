#include <catch_amalgamated.hpp>

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "mrw/cascade.hpp"
#include "mrw/errors.hpp"
#include "mrw/estimator.hpp"
#include "mrw/random.hpp"
#include "mrw/synthgen.hpp"

using namespace mrw;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

ErrorKind kind_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    return ErrorKind::Io;
}

HistogramPdf cascade_histogram(double l2, std::size_t n, std::uint64_t seed) {
    return histogram(increment_set_from_samples(gen_cascade({l2, 1.0}, n, seed)));
}

std::vector<double> normals(std::size_t n, std::uint64_t seed) {
    Engine eng = make_engine(seed, 77);
    std::normal_distribution<double> nd;
    std::vector<double> v(n);
    for (double& x : v) x = nd(eng);
    return v;
}

SeriesRecord path_of(const std::vector<double>& steps, MonthIndex start = 0) {
    std::vector<double> v = integrate_path(steps);
    std::vector<MonthIndex> t(v.size());
    std::iota(t.begin(), t.end(), start);
    return SeriesRecord("s", std::move(t), std::move(v));
}

std::vector<Scale> scales_of(std::initializer_list<int> v) {
    std::vector<Scale> out;
    for (int s : v) out.emplace_back(s);
    return out;
}

void check_fit_invariants(const FitResult& f) {
    CHECK(f.chi2_min >= 0.0);
    CHECK(f.estimate >= f.domain_lo);
    CHECK(f.estimate <= f.domain_hi);
    CHECK(f.bracket_lo <= f.estimate);
    CHECK(f.estimate <= f.bracket_hi);
    const double tol = 1e-5 * (f.domain_hi - f.domain_lo);
    const bool pinned = f.estimate - f.domain_lo < tol || f.domain_hi - f.estimate < tol;
    if (pinned) CHECK(f.boundary_hit);
}

}  // namespace

TEST_CASE("lambda2 fit recovers the generating value") {
    const FitResult f = fit_lambda2(cascade_histogram(0.3, 200'000, 7));
    CHECK(f.estimate >= 0.25);
    CHECK(f.estimate <= 0.35);
    CHECK(f.n_samples == 200'000u);
    CHECK(f.n_bins_used == 64u);
    CHECK(f.iterations > 0);
    CHECK(f.domain_lo == 0.0);
    CHECK(f.domain_hi == kLambda2Max);
    CHECK_FALSE(f.boundary_hit);
    check_fit_invariants(f);
}

TEST_CASE("Gaussian input gives lambda2 near zero") {
    const FitResult f = fit_lambda2(histogram(increment_set_from_samples(normals(200'000, 1))));
    CHECK(f.estimate < 0.02);
    check_fit_invariants(f);
}

TEST_CASE("the fit minimizes the objective") {
    const HistogramPdf h = cascade_histogram(0.2, 100'000, 3);
    const FitResult f = fit_lambda2(h);
    CHECK_THAT(chi_square_lambda2(h, f.estimate), WithinRel(f.chi2_min, 1e-12));
    for (double d : {-0.05, -0.01, -0.001, 0.001, 0.01, 0.05}) {
        CHECK(chi_square_lambda2(h, f.estimate + d) >= f.chi2_min);
    }
    for (double l2 = 0.0; l2 <= kLambda2Max; l2 += 0.1) {
        const double c = chi_square_lambda2(h, l2);
        CHECK(std::isfinite(c));
        CHECK(c >= 0.0);
    }
}

TEST_CASE("lambda2 fit is invariant to rescaling the series") {
    const std::vector<double> x = gen_cascade({0.25, 1.0}, 50'000, 12);
    const SeriesRecord s = path_of(x);
    const double base = fit_lambda2(histogram(increments(s, Scale(1)))).estimate;
    for (double k : {2.0, 3.7}) {
        const double scaled = fit_lambda2(histogram(increments(s.scaled(k), Scale(1)))).estimate;
        CHECK_THAT(scaled, WithinAbs(base, 1e-6));
    }
}

TEST_CASE("lambda2 fit preconditions") {
    const IncrementSet small = increment_set_from_samples(normals(80, 2));
    CHECK(kind_of([&] { (void)fit_lambda2(histogram(small, 8)); }) == ErrorKind::InsufficientData);
    HistogramPdf empty;
    CHECK(kind_of([&] { (void)fit_lambda2(empty); }) == ErrorKind::InsufficientData);
}

TEST_CASE("degenerate data hits the boundary flag, not an error") {
    // A two-point distribution is lighter-tailed than any cascade.
    std::vector<double> v(20'000);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = (i % 2 ? 1.0 : -1.0) + 1e-3 * static_cast<double>(i % 7);
    const FitResult f = fit_lambda2(histogram(increment_set_from_samples(v), 16));
    check_fit_invariants(f);
}

TEST_CASE("coupling fit recovers Lambda") {
    const BiCascadeParams p{0.3, 0.2, 0.15, 0.4};
    const SamplePairs s = gen_bicascade(p, 200'000, 21);
    const IncrementSet a = increment_set_from_samples(s.x1);
    const IncrementSet b = increment_set_from_samples(s.x2);
    const double l1 = fit_lambda2(histogram(a)).estimate;
    const double l2 = fit_lambda2(histogram(b)).estimate;
    const FitResult f = fit_Lambda(joint_histogram(a, b), l1, l2);
    CHECK(std::abs(f.estimate - 0.15) <= 0.05);
    CHECK(std::abs(f.estimate) <= std::sqrt(l1 * l2));
    CHECK_THAT(f.rho_eps, WithinAbs(0.4, 0.1));
    CHECK(f.n_bins_used == 32u * 32u);
    check_fit_invariants(f);
}

TEST_CASE("coupling fit domain errors") {
    const IncrementSet a = increment_set_from_samples(normals(5000, 1));
    const IncrementSet b = increment_set_from_samples(normals(5000, 2));
    const JointHistogramPdf jh = joint_histogram(a, b);
    CHECK(kind_of([&] { (void)fit_Lambda(jh, 0.0, 0.3); }) == ErrorKind::CouplingUndefined);
    CHECK(kind_of([&] { (void)fit_Lambda(jh, 1e-4, 1e-3); }) == ErrorKind::CouplingUndefined);
    CHECK(kind_of([&] { (void)fit_Lambda(jh, -0.1, 0.3); }) == ErrorKind::InvalidParams);
    CHECK(kind_of([&] { (void)marginal_chi_square_joint(jh, 0.0, 0.0, 0.0); }) ==
          ErrorKind::CouplingUndefined);
}

TEST_CASE("rho marginalizations") {
    const SamplePairs s = gen_bicascade({0.2, 0.2, 0.05, -0.3}, 50'000, 2);
    const IncrementSet a = increment_set_from_samples(s.x1);
    const IncrementSet b = increment_set_from_samples(s.x2);
    const JointHistogramPdf jh = joint_histogram(a, b);
    for (double L : {-0.1, 0.0, 0.05, 0.15}) {
        double cmin = 1e300;
        double sum = 0.0;
        for (int k = 0; k <= 38; ++k) {
            const double c = chi_square_joint(jh, 0.2, 0.2, L, -0.95 + 0.05 * k);
            CHECK(c >= 0.0);
            cmin = std::min(cmin, c);
            sum += (k == 0 || k == 38 ? 0.5 : 1.0) * c;
        }
        const double like = marginal_chi_square_joint(jh, 0.2, 0.2, L, RhoMarginalization::Likelihood);
        const double chisum = marginal_chi_square_joint(jh, 0.2, 0.2, L, RhoMarginalization::ChiSquareSum);
        CHECK_THAT(chisum, WithinRel(sum * 0.05, 1e-12));
        // -2 ln of an integral over an interval of length 1.9 whose integrand
        // peaks at exp(-cmin / 2)
        CHECK(like >= cmin - 2.0 * std::log(1.9) - 1e-9);
        CHECK(like <= cmin + 2.0 * std::log(1.0 / 0.05) + 1e-9);
    }
}

TEST_CASE("coupling fit at the chi-square-sum option stays in domain") {
    const SamplePairs s = gen_bicascade({0.3, 0.2, 0.1, 0.0}, 50'000, 6);
    const IncrementSet a = increment_set_from_samples(s.x1);
    const IncrementSet b = increment_set_from_samples(s.x2);
    const FitResult f = fit_Lambda(joint_histogram(a, b), 0.3, 0.2, RhoMarginalization::ChiSquareSum);
    check_fit_invariants(f);
    CHECK(std::abs(f.estimate) <= std::sqrt(0.06));
}

TEST_CASE("empirical moments") {
    const IncrementSet inc = increment_set_from_samples(gen_cascade({0.3, 1.0}, 400'000, 8));
    // Standardized with the n - 1 convention.
    const double n = static_cast<double>(inc.n());
    CHECK_THAT(empirical_moment(inc, 2.0), WithinRel(std::sqrt((n - 1.0) / n), 1e-12));
    double prev = 0.0;
    for (double q = 0.5; q <= 8.0; q += 0.5) {
        const double m = empirical_moment(inc, q);
        CHECK(m > prev);
        prev = m;
    }
    // Low orders are estimated tightly; compare with the unit-variance closed form.
    CHECK_THAT(empirical_moment(inc, 1.0), WithinRel(cascade_log_moment(1.0, {0.3, 1.0}), 0.01));
    CHECK(kind_of([&] { (void)empirical_moment(inc, 0.0); }) == ErrorKind::Domain);
    IncrementSet empty;
    CHECK(kind_of([&] { (void)empirical_moment(empty, 1.0); }) == ErrorKind::InsufficientData);
}

TEST_CASE("empirical joint moment") {
    const SamplePairs s = gen_bicascade({0.3, 0.2, 0.15, 0.4}, 1'000'000, 9);
    const IncrementSet a = increment_set_from_samples(s.x1);
    const IncrementSet b = increment_set_from_samples(s.x2);
    CHECK_THAT(empirical_joint_moment(a, b, 2.0),
               WithinRel(joint_log_moment(2.0, {0.3, 0.2, 0.15, 0.4}).value, 0.03));
    const IncrementSet c = increment_set_from_samples(normals(999'999, 3));
    CHECK(kind_of([&] { (void)empirical_joint_moment(a, c, 2.0); }) == ErrorKind::Alignment);
    // Same series twice: (mean |z|^(2q))^(1/q) = m_2q^2
    CHECK_THAT(empirical_joint_moment(a, a, 1.5), WithinRel(std::pow(empirical_moment(a, 3.0), 2.0), 1e-10));
}

TEST_CASE("lambda2 sweep over scales") {
    const SeriesRecord s = path_of(gen_cascade({0.3, 1.0}, 20'000, 4));
    const std::vector<Scale> sc = scales_of({1, 2, 4, 8, 30000});
    const ScaleProfile prof = sweep_lambda2(s, sc);
    REQUIRE(prof.scales.size() == 4u);
    CHECK(prof.values.size() == prof.scales.size());
    CHECK(prof.fits.size() == prof.scales.size());
    CHECK(std::is_sorted(prof.scales.begin(), prof.scales.end()));
    REQUIRE(prof.failures.size() == 1u);
    CHECK(prof.failures[0].scale == Scale(30000));
    CHECK(prof.failures[0].kind == ErrorKind::InvalidScale);
    CHECK_THAT(prof.values[0], WithinAbs(0.3, 0.05));
    // Aggregating iid increments pulls them towards Gaussian.
    CHECK(prof.values[3] < prof.values[0]);
    for (const FitResult& f : prof.fits) check_fit_invariants(f);
    CHECK(prof.lambda2_1.empty());
}

TEST_CASE("sweeps do not depend on the thread count") {
    const SeriesRecord s = path_of(gen_cascade({0.3, 1.0}, 20'000, 5));
    const std::vector<Scale> sc = scales_of({1, 2, 3, 5, 8, 13});
    const std::vector<double> qs = {1, 2, 3};
    const int saved = omp_get_max_threads();
    omp_set_num_threads(1);
    const ScaleProfile a = sweep_lambda2(s, sc);
    const MomentGrid ga = sweep_moments(s, sc, qs);
    omp_set_num_threads(4);
    const ScaleProfile b = sweep_lambda2(s, sc);
    const MomentGrid gb = sweep_moments(s, sc, qs);
    omp_set_num_threads(saved);
    CHECK(a.values == b.values);
    CHECK(ga.values == gb.values);
}

TEST_CASE("coupling sweep") {
    const SamplePairs p = gen_bicascade({0.3, 0.2, 0.15, 0.4}, 20'000, 14);
    const SeriesRecord s1 = path_of(p.x1);
    const SeriesRecord s2 = path_of(p.x2);
    const ScaleProfile prof = sweep_Lambda(s1, s2, scales_of({1, 25000}));
    REQUIRE(prof.scales.size() == 1u);
    REQUIRE(prof.failures.size() == 1u);
    CHECK(prof.lambda2_1.size() == 1u);
    CHECK(prof.lambda2_2.size() == 1u);
    CHECK(std::abs(prof.values[0]) <= std::sqrt(prof.lambda2_1[0] * prof.lambda2_2[0]));

    const SeriesRecord shifted = path_of(p.x2, 5);
    CHECK(kind_of([&] { (void)sweep_Lambda(s1, shifted, scales_of({1})); }) == ErrorKind::Alignment);
}

TEST_CASE("moment grids") {
    const SamplePairs p = gen_bicascade({0.3, 0.2, 0.15, 0.4}, 10'000, 15);
    const SeriesRecord s1 = path_of(p.x1);
    const SeriesRecord s2 = path_of(p.x2);
    const std::vector<Scale> sc = scales_of({1, 3, 12, 48});
    const std::vector<double> qs = {0.5, 1, 2, 4, 8};
    const MomentGrid g = sweep_moments(s1, sc, qs);
    const MomentGrid j = sweep_joint_moments(s1, s2, sc, qs);
    for (const MomentGrid* m : {&g, &j}) {
        REQUIRE(m->values.size() == qs.size());
        CHECK(m->scales.size() == sc.size());
        CHECK(m->failures.empty());
        for (std::size_t qi = 0; qi < qs.size(); ++qi) {
            REQUIRE(m->values[qi].size() == sc.size());
            for (double v : m->values[qi]) {
                CHECK(std::isfinite(v));
                CHECK(v > 0.0);
            }
        }
        for (std::size_t si = 0; si < sc.size(); ++si) {
            for (std::size_t qi = 1; qi < qs.size(); ++qi) {
                CHECK(m->values[qi][si] > m->values[qi - 1][si]);
            }
        }
    }
    CHECK(kind_of([&] { (void)sweep_moments(s1, sc, std::vector<double>{-1.0}); }) == ErrorKind::Domain);
}

TEST_CASE("rolling scan shape") {
    const SamplePairs p = gen_bicascade({0.3, 0.2, 0.15, 0.4}, 849, 16);
    const SeriesRecord s1 = path_of(p.x1, 1948 * 12);
    const SeriesRecord s2 = path_of(p.x2, 1948 * 12);
    REQUIRE(s1.size() == 850u);
    const std::vector<double> qs = {1, 2, 3, 4, 5, 6, 7, 8};
    const RollingResult r = rolling_scan(s1, s2, qs, {60, 1, Scale(12)});
    CHECK(r.window_starts.size() == 850u - 60u + 1u);
    CHECK(r.window_starts.front() == 1948 * 12);
    CHECK(r.window_starts.back() + 59 == s1.timestamps().back());
    for (std::size_t w = 1; w < r.window_starts.size(); ++w) {
        CHECK(r.window_starts[w] - r.window_starts[w - 1] == 1);
    }
    CHECK(r.moments1.size() == r.window_starts.size());
    CHECK(r.joint.front().size() == qs.size());
    for (const auto& row : r.joint) {
        for (double v : row) CHECK((std::isfinite(v) && v > 0.0));
    }

    const RollingResult stepped = rolling_scan(s1, s2, qs, {120, 12, Scale(3)});
    CHECK(stepped.window_starts.size() == (850u - 120u) / 12u + 1u);
    CHECK(stepped.step == 12);
}

TEST_CASE("rolling scan standardization modes") {
    const SamplePairs p = gen_bicascade({0.3, 0.2, 0.15, 0.4}, 600, 17);
    const SeriesRecord s1 = path_of(p.x1);
    const SeriesRecord s2 = path_of(p.x2);
    const std::vector<double> qs = {2};
    const RollingResult per = rolling_scan(s1, s2, qs, {60, 1, Scale(12), WindowStandardization::PerWindow});
    const RollingResult glob = rolling_scan(s1, s2, qs, {60, 1, Scale(12), WindowStandardization::Global});
    REQUIRE(per.window_starts == glob.window_starts);
    // Per-window z-scores have unit variance, so m_2 is fixed by the window size.
    const double n = 60.0 - 12.0;
    for (const auto& row : per.moments1) CHECK_THAT(row[0], WithinRel(std::sqrt((n - 1.0) / n), 1e-12));
    double spread = 0.0;
    for (const auto& row : glob.moments1) spread = std::max(spread, std::abs(row[0] - glob.moments1[0][0]));
    CHECK(spread > 0.01);
}

TEST_CASE("rolling scan errors") {
    const SeriesRecord s = path_of(normals(200, 1));
    const SeriesRecord t = path_of(normals(200, 2));
    const std::vector<double> qs = {1, 2};
    CHECK(kind_of([&] { (void)rolling_scan(s, t, qs, {50, 1, Scale(12)}); }) == ErrorKind::InvalidWindow);
    CHECK(kind_of([&] { (void)rolling_scan(s, t, qs, {500, 1, Scale(12)}); }) == ErrorKind::InvalidWindow);
    CHECK(kind_of([&] { (void)rolling_scan(s, t, qs, {60, 0, Scale(12)}); }) == ErrorKind::InvalidWindow);
    CHECK(kind_of([&] { (void)rolling_scan(s, path_of(normals(200, 2), 1), qs); }) == ErrorKind::Alignment);

    // Gapped timestamps
    std::vector<MonthIndex> ts(s.size());
    std::iota(ts.begin(), ts.end(), MonthIndex{0});
    for (std::size_t i = 100; i < ts.size(); ++i) ts[i] += 3;
    const SeriesRecord g1("g1", ts, s.values());
    const SeriesRecord g2("g2", ts, t.values());
    CHECK(kind_of([&] { (void)rolling_scan(g1, g2, qs); }) == ErrorKind::InvalidSeries);

    // A window over a flat stretch leaves a NaN row instead of failing.
    std::vector<double> flat = s.values();
    for (std::size_t i = 0; i < 70; ++i) flat[i] = 1.0;
    const SeriesRecord f("f", s.timestamps(), flat);
    const RollingResult r = rolling_scan(f, t, qs, {60, 1, Scale(12)});
    CHECK(std::isnan(r.moments1[0][0]));
    CHECK(std::isnan(r.joint[0][0]));
    CHECK(std::isfinite(r.moments2[0][0]));
    CHECK(std::isfinite(r.moments1.back()[0]));
}

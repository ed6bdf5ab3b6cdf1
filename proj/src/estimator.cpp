#include "mrw/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>

#include "mrw/bicascade.hpp"
#include "mrw/cascade.hpp"
#include "mrw/kernels.hpp"

namespace mrw {

namespace {

constexpr double kInvPhi = 0.6180339887498948482;
constexpr std::size_t kMinFitSamples = 100;

struct Minimum {
    double x = 0.0;
    double fx = 0.0;
    int iterations = 0;
    double bracket_lo = 0.0;
    double bracket_hi = 0.0;
    bool boundary_hit = false;
};

// Coarse grid over [lo, hi], then golden section on the two grid cells around
// the best grid point.
Minimum grid_then_golden(const std::function<double(double)>& f, double lo, double hi) {
    const int n = kCoarseGridPoints;
    std::vector<double> xs(static_cast<std::size_t>(n));
    std::vector<double> fs(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        xs[static_cast<std::size_t>(k)] = lo + (hi - lo) * k / (n - 1);
        fs[static_cast<std::size_t>(k)] = f(xs[static_cast<std::size_t>(k)]);
    }
    const auto best = static_cast<int>(std::min_element(fs.begin(), fs.end()) - fs.begin());
    Minimum m;
    m.bracket_lo = xs[static_cast<std::size_t>(std::max(best - 1, 0))];
    m.bracket_hi = xs[static_cast<std::size_t>(std::min(best + 1, n - 1))];

    const double tol = 1e-6 * (hi - lo);
    double a = m.bracket_lo;
    double b = m.bracket_hi;
    double c = b - kInvPhi * (b - a);
    double d = a + kInvPhi * (b - a);
    double fc = f(c);
    double fd = f(d);
    int it = 0;
    while (b - a > tol) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - kInvPhi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + kInvPhi * (b - a);
            fd = f(d);
        }
        ++it;
    }
    const double x = 0.5 * (a + b);
    const double fx = f(x);
    m.iterations = it;
    if (fx <= fs[static_cast<std::size_t>(best)]) {
        m.x = x;
        m.fx = fx;
    } else {
        m.x = xs[static_cast<std::size_t>(best)];
        m.fx = fs[static_cast<std::size_t>(best)];
    }
    const bool edge = best == 0 || best == n - 1;
    m.boundary_hit = edge && (m.x - lo <= 2.0 * tol || hi - m.x <= 2.0 * tol);
    return m;
}

std::vector<double> centers(const std::vector<double>& edges) {
    std::vector<double> c(edges.size() - 1);
    for (std::size_t k = 0; k + 1 < edges.size(); ++k) c[k] = 0.5 * (edges[k] + edges[k + 1]);
    return c;
}

// Densities and errors rescaled from the in-range normalization to the
// full-sample normalization the model densities use.
struct AbsoluteData {
    std::vector<double> p;
    std::vector<double> sigma;
};

template <class Hist>
AbsoluteData absolute_data(const Hist& h) {
    const double mass = h.mass_in_range();
    AbsoluteData d{h.density, h.sigma_data};
    for (double& v : d.p) v *= mass;
    for (double& v : d.sigma) v *= mass;
    return d;
}

class JointObjective {
public:
    JointObjective(const JointHistogramPdf& h, double l1, double l2)
        : h_(h), l1_(l1), l2_(l2), c1_(centers(h.bin_edges_1)), c2_(centers(h.bin_edges_2)),
          data_(absolute_data(h)), theory_(h.density.size()) {}

    double at(double Lambda, double rho) {
        BiCascadeParams p{l1_, l2_, Lambda, rho, 1.0, 1.0};
        const Mixture2D mix = bicascade_mixture(p);
        kernels::mixture_pdf_grid(mix, c1_, c2_, theory_);
        return kernels::chi_square(data_.p, data_.sigma, theory_, static_cast<double>(h_.n_total),
                                   h_.width1() * h_.width2());
    }

    struct Marginal {
        double value = 0.0;
        double rho_best = 0.0;  // grid rho with the smallest chi^2
    };

    Marginal marginal(double Lambda, RhoMarginalization mode) {
        const int steps = static_cast<int>(std::lround(2.0 * kRhoGridLimit / kRhoGridStep));
        std::vector<double> chi(static_cast<std::size_t>(steps + 1));
        for (int k = 0; k <= steps; ++k) {
            chi[static_cast<std::size_t>(k)] = at(Lambda, -kRhoGridLimit + k * kRhoGridStep);
        }
        const auto best = static_cast<int>(std::min_element(chi.begin(), chi.end()) - chi.begin());
        Marginal m;
        m.rho_best = -kRhoGridLimit + best * kRhoGridStep;
        if (mode == RhoMarginalization::ChiSquareSum) {
            double acc = 0.0;
            for (int k = 0; k <= steps; ++k) {
                const double w = (k == 0 || k == steps) ? 0.5 : 1.0;
                acc += w * chi[static_cast<std::size_t>(k)];
            }
            m.value = acc * kRhoGridStep;
            return m;
        }
        // -2 ln of the trapezoid integral of exp(-chi^2 / 2), shifted by the minimum.
        const double cmin = chi[static_cast<std::size_t>(best)];
        double acc = 0.0;
        for (int k = 0; k <= steps; ++k) {
            const double w = (k == 0 || k == steps) ? 0.5 : 1.0;
            acc += w * std::exp(-0.5 * (chi[static_cast<std::size_t>(k)] - cmin));
        }
        m.value = cmin - 2.0 * std::log(acc * kRhoGridStep);
        return m;
    }

private:
    const JointHistogramPdf& h_;
    double l1_;
    double l2_;
    std::vector<double> c1_;
    std::vector<double> c2_;
    AbsoluteData data_;
    std::vector<double> theory_;
};

void check_coupling(double l1, double l2) {
    if (!(l1 >= 0.0) || !(l2 >= 0.0)) {
        throw Error(ErrorKind::InvalidParams, "marginal lambda2 values must be >= 0");
    }
    if (l1 * l2 < kCouplingFloor) {
        throw Error(ErrorKind::CouplingUndefined,
                    "lambda2_1 * lambda2_2 below 1e-6: multifractal matrix is near-singular");
    }
}

}  // namespace

double chi_square_lambda2(const HistogramPdf& hist, double lambda2) {
    const std::vector<double> c = centers(hist.bin_edges);
    std::vector<double> theory(c.size());
    kernels::mixture_pdf(cascade_mixture({lambda2, 1.0}), c, theory);
    const AbsoluteData d = absolute_data(hist);
    return kernels::chi_square(d.p, d.sigma, theory, static_cast<double>(hist.n_total), hist.width());
}

double chi_square_joint(const JointHistogramPdf& jhist, double lambda2_1, double lambda2_2,
                        double Lambda, double rho_eps) {
    JointObjective obj(jhist, lambda2_1, lambda2_2);
    return obj.at(Lambda, rho_eps);
}

double marginal_chi_square_joint(const JointHistogramPdf& jhist, double lambda2_1,
                                 double lambda2_2, double Lambda, RhoMarginalization mode) {
    check_coupling(lambda2_1, lambda2_2);
    JointObjective obj(jhist, lambda2_1, lambda2_2);
    return obj.marginal(Lambda, mode).value;
}

FitResult fit_lambda2(const HistogramPdf& hist) {
    if (hist.n_in_range == 0 || hist.bins() == 0) {
        throw Error(ErrorKind::InsufficientData, "empty histogram");
    }
    if (hist.n_total < kMinFitSamples) {
        throw Error(ErrorKind::InsufficientData, "fit_lambda2 needs at least 100 samples, got " +
                                                     std::to_string(hist.n_total));
    }
    const std::vector<double> c = centers(hist.bin_edges);
    const AbsoluteData d = absolute_data(hist);
    std::vector<double> theory(c.size());
    const double n = static_cast<double>(hist.n_total);
    auto objective = [&](double l2) {
        kernels::mixture_pdf(cascade_mixture({l2, 1.0}), c, theory);
        return kernels::chi_square(d.p, d.sigma, theory, n, hist.width());
    };
    const Minimum m = grid_then_golden(objective, 0.0, kLambda2Max);

    FitResult r;
    r.scale = hist.scale;
    r.estimate = m.x;
    r.chi2_min = m.fx;
    r.n_bins_used = hist.bins();
    r.n_samples = hist.n_total;
    r.iterations = m.iterations;
    r.bracket_lo = m.bracket_lo;
    r.bracket_hi = m.bracket_hi;
    r.domain_lo = 0.0;
    r.domain_hi = kLambda2Max;
    r.boundary_hit = m.boundary_hit;
    return r;
}

FitResult fit_Lambda(const JointHistogramPdf& jhist, double lambda2_1, double lambda2_2,
                     RhoMarginalization mode) {
    check_coupling(lambda2_1, lambda2_2);
    if (jhist.n_in_range == 0) throw Error(ErrorKind::InsufficientData, "empty joint histogram");
    const double bound = std::sqrt(lambda2_1 * lambda2_2) - kLambdaEdgeMargin;
    JointObjective obj(jhist, lambda2_1, lambda2_2);
    const Minimum m =
        grid_then_golden([&](double L) { return obj.marginal(L, mode).value; }, -bound, bound);

    FitResult r;
    r.scale = jhist.scale;
    r.estimate = m.x;
    r.chi2_min = m.fx;
    r.n_bins_used = jhist.density.size();
    r.n_samples = jhist.n_total;
    r.iterations = m.iterations;
    r.bracket_lo = m.bracket_lo;
    r.bracket_hi = m.bracket_hi;
    r.domain_lo = -bound;
    r.domain_hi = bound;
    r.boundary_hit = m.boundary_hit;
    r.rho_eps = obj.marginal(m.x, mode).rho_best;
    return r;
}

double empirical_moment(const IncrementSet& inc, double q) {
    if (inc.n() == 0) throw Error(ErrorKind::InsufficientData, "empty increment set");
    if (!(q > 0.0)) throw Error(ErrorKind::Domain, "moment order must be > 0");
    double acc = 0.0;
    for (double z : inc.standardized) acc += std::pow(std::abs(z), q);
    return std::pow(acc / static_cast<double>(inc.n()), 1.0 / q);
}

double empirical_joint_moment(const IncrementSet& inc1, const IncrementSet& inc2, double q) {
    require_aligned(inc1, inc2);
    if (inc1.n() == 0) throw Error(ErrorKind::InsufficientData, "empty increment set");
    if (!(q > 0.0)) throw Error(ErrorKind::Domain, "moment order must be > 0");
    double acc = 0.0;
    for (std::size_t t = 0; t < inc1.n(); ++t) {
        acc += std::pow(std::abs(inc1.standardized[t]) * std::abs(inc2.standardized[t]), q);
    }
    return std::pow(acc / static_cast<double>(inc1.n()), 1.0 / q);
}

namespace {

void require_same_timestamps(const SeriesRecord& a, const SeriesRecord& b) {
    if (a.timestamps() != b.timestamps()) {
        throw Error(ErrorKind::Alignment, "series '" + a.name() + "' and '" + b.name() +
                                              "' are not aligned; align them first");
    }
}

// Runs `body` for each scale (possibly concurrently); failures become gaps.
template <class T, class Body>
void for_each_scale(std::span<const Scale> scales, std::vector<std::optional<T>>& slots,
                    std::vector<std::optional<ScaleFailure>>& failures, Body body) {
    slots.assign(scales.size(), std::nullopt);
    failures.assign(scales.size(), std::nullopt);
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(scales.size()); ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        try {
            slots[i] = body(scales[i]);
        } catch (const Error& e) {
            failures[i] = ScaleFailure{scales[i], e.kind(), e.what()};
        } catch (const std::exception& e) {
            failures[i] = ScaleFailure{scales[i], ErrorKind::Domain, e.what()};
        }
    }
}

struct JointPoint {
    FitResult fit;
    double l1;
    double l2;
};

}  // namespace

ScaleProfile sweep_lambda2(const SeriesRecord& series, std::span<const Scale> scales,
                           const SweepOptions& opts) {
    std::vector<std::optional<FitResult>> slots;
    std::vector<std::optional<ScaleFailure>> failures;
    for_each_scale<FitResult>(scales, slots, failures, [&](Scale s) {
        return fit_lambda2(histogram(increments(series, s), opts.bins, opts.clip_sd));
    });
    ScaleProfile out;
    for (std::size_t i = 0; i < scales.size(); ++i) {
        if (slots[i]) {
            out.scales.push_back(scales[i]);
            out.values.push_back(slots[i]->estimate);
            out.fits.push_back(*slots[i]);
        } else {
            out.failures.push_back(*failures[i]);
        }
    }
    return out;
}

ScaleProfile sweep_Lambda(const SeriesRecord& series1, const SeriesRecord& series2,
                          std::span<const Scale> scales, const SweepOptions& opts) {
    require_same_timestamps(series1, series2);
    std::vector<std::optional<JointPoint>> slots;
    std::vector<std::optional<ScaleFailure>> failures;
    for_each_scale<JointPoint>(scales, slots, failures, [&](Scale s) {
        const IncrementSet inc1 = increments(series1, s);
        const IncrementSet inc2 = increments(series2, s);
        const double l1 = fit_lambda2(histogram(inc1, opts.bins, opts.clip_sd)).estimate;
        const double l2 = fit_lambda2(histogram(inc2, opts.bins, opts.clip_sd)).estimate;
        const JointHistogramPdf jh = joint_histogram(inc1, inc2, opts.joint_bins, opts.clip_sd);
        return JointPoint{fit_Lambda(jh, l1, l2, opts.rho_marginalization), l1, l2};
    });
    ScaleProfile out;
    for (std::size_t i = 0; i < scales.size(); ++i) {
        if (slots[i]) {
            out.scales.push_back(scales[i]);
            out.values.push_back(slots[i]->fit.estimate);
            out.fits.push_back(slots[i]->fit);
            out.lambda2_1.push_back(slots[i]->l1);
            out.lambda2_2.push_back(slots[i]->l2);
        } else {
            out.failures.push_back(*failures[i]);
        }
    }
    return out;
}

namespace {

MomentGrid assemble_grid(std::span<const Scale> scales, std::span<const double> q_values,
                         const std::vector<std::optional<std::vector<double>>>& slots,
                         const std::vector<std::optional<ScaleFailure>>& failures) {
    MomentGrid g;
    g.q_values.assign(q_values.begin(), q_values.end());
    g.values.assign(q_values.size(), {});
    for (std::size_t i = 0; i < scales.size(); ++i) {
        if (!slots[i]) {
            g.failures.push_back(*failures[i]);
            continue;
        }
        g.scales.push_back(scales[i]);
        for (std::size_t qi = 0; qi < q_values.size(); ++qi) g.values[qi].push_back((*slots[i])[qi]);
    }
    return g;
}

void check_orders(std::span<const double> q_values) {
    for (double q : q_values) {
        if (!(q > 0.0) || !std::isfinite(q)) throw Error(ErrorKind::Domain, "moment orders must be > 0");
    }
}

}  // namespace

MomentGrid sweep_moments(const SeriesRecord& series, std::span<const Scale> scales,
                         std::span<const double> q_values) {
    check_orders(q_values);
    std::vector<std::optional<std::vector<double>>> slots;
    std::vector<std::optional<ScaleFailure>> failures;
    for_each_scale<std::vector<double>>(scales, slots, failures, [&](Scale s) {
        const IncrementSet inc = increments(series, s);
        std::vector<double> row;
        for (double q : q_values) row.push_back(empirical_moment(inc, q));
        return row;
    });
    return assemble_grid(scales, q_values, slots, failures);
}

MomentGrid sweep_joint_moments(const SeriesRecord& series1, const SeriesRecord& series2,
                               std::span<const Scale> scales, std::span<const double> q_values) {
    check_orders(q_values);
    require_same_timestamps(series1, series2);
    std::vector<std::optional<std::vector<double>>> slots;
    std::vector<std::optional<ScaleFailure>> failures;
    for_each_scale<std::vector<double>>(scales, slots, failures, [&](Scale s) {
        const IncrementSet inc1 = increments(series1, s);
        const IncrementSet inc2 = increments(series2, s);
        std::vector<double> row;
        for (double q : q_values) row.push_back(empirical_joint_moment(inc1, inc2, q));
        return row;
    });
    return assemble_grid(scales, q_values, slots, failures);
}

RollingResult rolling_scan(const SeriesRecord& series1, const SeriesRecord& series2,
                           std::span<const double> q_values, const RollingOptions& opts) {
    check_orders(q_values);
    require_same_timestamps(series1, series2);
    const int s = opts.scale.value();
    if (opts.step < 1) throw Error(ErrorKind::InvalidWindow, "window step must be >= 1");
    if (opts.window < 5 * s) {
        throw Error(ErrorKind::InvalidWindow, "window of " + std::to_string(opts.window) +
                                                  " months is shorter than five scales (" +
                                                  std::to_string(5 * s) + ")");
    }
    const auto window = static_cast<std::size_t>(opts.window);
    if (window > series1.size()) {
        throw Error(ErrorKind::InvalidWindow, "window of " + std::to_string(opts.window) +
                                                  " months exceeds the series span of " +
                                                  std::to_string(series1.size()));
    }
    const auto& ts = series1.timestamps();
    for (std::size_t i = 1; i < ts.size(); ++i) {
        if (ts[i] - ts[i - 1] != series1.cadence()) {
            throw Error(ErrorKind::InvalidSeries, "rolling scan needs a gap-free series");
        }
    }

    RollingResult r;
    r.window_length = opts.window;
    r.step = opts.step;
    r.scale = opts.scale;
    r.q_values.assign(q_values.begin(), q_values.end());
    std::vector<std::size_t> starts;
    for (std::size_t p = 0; p + window <= series1.size(); p += static_cast<std::size_t>(opts.step)) {
        starts.push_back(p);
        r.window_starts.push_back(ts[p]);
    }
    const std::size_t nw = starts.size();
    const std::size_t nq = q_values.size();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    r.moments1.assign(nw, std::vector<double>(nq, nan));
    r.moments2.assign(nw, std::vector<double>(nq, nan));
    r.joint.assign(nw, std::vector<double>(nq, nan));

    std::optional<IncrementSet> full1;
    std::optional<IncrementSet> full2;
    if (opts.standardization == WindowStandardization::Global) {
        full1 = increments(series1, opts.scale);
        full2 = increments(series2, opts.scale);
    }
    const std::size_t per_window = window - static_cast<std::size_t>(s);

    auto slice = [&](const IncrementSet& full, std::size_t p) {
        IncrementSet w;
        w.scale = full.scale;
        const auto b = static_cast<std::ptrdiff_t>(p);
        const auto e = static_cast<std::ptrdiff_t>(p + per_window);
        w.raw.assign(full.raw.begin() + b, full.raw.begin() + e);
        w.standardized.assign(full.standardized.begin() + b, full.standardized.begin() + e);
        w.start_times.assign(full.start_times.begin() + b, full.start_times.begin() + e);
        w.mean_raw = full.mean_raw;
        w.sd_raw = full.sd_raw;
        return w;
    };

#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t wi = 0; wi < static_cast<std::ptrdiff_t>(nw); ++wi) {
        const auto w = static_cast<std::size_t>(wi);
        const std::size_t p = starts[w];
        // A window over a constant stretch of one series leaves that series'
        // row (and the joint row) NaN.
        auto window_increments = [&](const SeriesRecord& series,
                                     const std::optional<IncrementSet>& full) -> std::optional<IncrementSet> {
            try {
                if (full) return slice(*full, p);
                return increments(series.slice(p, window), opts.scale);
            } catch (const Error&) {
                return std::nullopt;
            }
        };
        const std::optional<IncrementSet> inc1 = window_increments(series1, full1);
        const std::optional<IncrementSet> inc2 = window_increments(series2, full2);
        for (std::size_t qi = 0; qi < nq; ++qi) {
            if (inc1) r.moments1[w][qi] = empirical_moment(*inc1, q_values[qi]);
            if (inc2) r.moments2[w][qi] = empirical_moment(*inc2, q_values[qi]);
            if (inc1 && inc2) r.joint[w][qi] = empirical_joint_moment(*inc1, *inc2, q_values[qi]);
        }
    }
    return r;
}

}  // namespace mrw

#include "mrw/series.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mrw/errors.hpp"

namespace mrw {

SeriesRecord::SeriesRecord(std::string name, std::vector<MonthIndex> timestamps,
                           std::vector<double> values, int cadence)
    : name_(std::move(name)),
      timestamps_(std::move(timestamps)),
      values_(std::move(values)),
      cadence_(cadence) {
    if (timestamps_.size() != values_.size()) {
        throw Error(ErrorKind::InvalidSeries, "series '" + name_ + "': " +
                                                  std::to_string(timestamps_.size()) +
                                                  " timestamps for " +
                                                  std::to_string(values_.size()) + " values");
    }
    if (values_.size() < 2) {
        throw Error(ErrorKind::InvalidSeries, "series '" + name_ + "' needs at least 2 points");
    }
    if (cadence_ < 1) {
        throw Error(ErrorKind::InvalidSeries, "cadence must be positive");
    }
    for (std::size_t i = 1; i < timestamps_.size(); ++i) {
        if (timestamps_[i] <= timestamps_[i - 1]) {
            throw Error(ErrorKind::InvalidSeries,
                        "series '" + name_ + "': timestamps not strictly increasing at position " +
                            std::to_string(i));
        }
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i])) {
            throw Error(ErrorKind::InvalidSeries, "series '" + name_ +
                                                      "': non-finite value at position " +
                                                      std::to_string(i));
        }
    }
}

SeriesRecord SeriesRecord::slice(std::size_t first, std::size_t count) const {
    if (first + count > size()) {
        throw Error(ErrorKind::InvalidSeries, "slice exceeds series length");
    }
    const auto t0 = timestamps_.begin() + static_cast<std::ptrdiff_t>(first);
    const auto v0 = values_.begin() + static_cast<std::ptrdiff_t>(first);
    return SeriesRecord(name_, {t0, t0 + static_cast<std::ptrdiff_t>(count)},
                        {v0, v0 + static_cast<std::ptrdiff_t>(count)}, cadence_);
}

SeriesRecord SeriesRecord::scaled(double factor) const {
    std::vector<double> v(values_);
    for (double& x : v) x *= factor;
    return SeriesRecord(name_, timestamps_, std::move(v), cadence_);
}

Scale::Scale(int samples) : samples_(samples) {
    if (samples < 1) {
        throw Error(ErrorKind::InvalidScale, "scale must be >= 1, got " + std::to_string(samples));
    }
}

std::vector<double> standardize(std::span<const double> values) {
    const std::size_t n = values.size();
    if (n < 2) {
        throw Error(ErrorKind::InsufficientData, "standardization needs at least 2 samples");
    }
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (!(sd > 0.0) || !std::isfinite(sd)) {
        throw Error(ErrorKind::DegenerateSeries, "zero sample variance");
    }
    std::vector<double> z(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = (values[i] - mean) / sd;
    return z;
}

namespace {

void fill_standardized(IncrementSet& inc) {
    const std::size_t n = inc.raw.size();
    const double mean = std::accumulate(inc.raw.begin(), inc.raw.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double v : inc.raw) ss += (v - mean) * (v - mean);
    inc.mean_raw = mean;
    inc.sd_raw = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
    inc.standardized = standardize(inc.raw);
}

}  // namespace

IncrementSet increments(const SeriesRecord& series, Scale scale) {
    const auto s = static_cast<std::size_t>(scale.value());
    if (s >= series.size()) {
        throw Error(ErrorKind::InvalidScale, "scale " + std::to_string(s) +
                                                 " out of range for series of length " +
                                                 std::to_string(series.size()));
    }
    IncrementSet inc;
    inc.scale = scale;
    const std::size_t n = series.size() - s;
    inc.raw.resize(n);
    inc.start_times.resize(n);
    const auto& v = series.values();
    for (std::size_t t = 0; t < n; ++t) {
        inc.raw[t] = v[t + s] - v[t];
        inc.start_times[t] = series.timestamps()[t];
    }
    if (n < 2) {
        throw Error(ErrorKind::InsufficientData, "fewer than 2 increments at scale " +
                                                     std::to_string(s));
    }
    fill_standardized(inc);
    return inc;
}

IncrementSet increment_set_from_samples(std::span<const double> raw, Scale scale) {
    IncrementSet inc;
    inc.scale = scale;
    inc.raw.assign(raw.begin(), raw.end());
    inc.start_times.resize(raw.size());
    std::iota(inc.start_times.begin(), inc.start_times.end(), MonthIndex{0});
    fill_standardized(inc);
    return inc;
}

namespace {

struct Axis {
    double lo;
    double hi;
    double width;
    int bins;

    // -1 when outside [lo, hi].
    [[nodiscard]] int index(double z) const {
        if (z < lo || z > hi) return -1;
        const int k = static_cast<int>((z - lo) / width);
        return std::min(k, bins - 1);
    }

    [[nodiscard]] std::vector<double> edges() const {
        std::vector<double> e(static_cast<std::size_t>(bins) + 1);
        for (int k = 0; k <= bins; ++k) e[static_cast<std::size_t>(k)] = lo + k * width;
        e.back() = hi;
        return e;
    }
};

Axis make_axis(std::span<const double> z, int bins, double clip_sd) {
    const auto [mn, mx] = std::minmax_element(z.begin(), z.end());
    Axis a{std::max(*mn, -clip_sd), std::min(*mx, clip_sd), 0.0, bins};
    if (!(a.hi > a.lo)) {
        throw Error(ErrorKind::DegenerateSeries, "histogram range is empty");
    }
    a.width = (a.hi - a.lo) / bins;
    return a;
}

// Poisson error of a bin: sqrt(max(n_k, 1)) / (N w).
double poisson_sigma(std::size_t count, double n, double cell) {
    return std::sqrt(static_cast<double>(std::max<std::size_t>(count, 1))) / (n * cell);
}

}  // namespace

HistogramPdf histogram(const IncrementSet& inc, int bins, double clip_sd) {
    if (bins < 8) {
        throw Error(ErrorKind::InsufficientData, "histogram needs at least 8 bins");
    }
    if (inc.n() < static_cast<std::size_t>(bins)) {
        throw Error(ErrorKind::InsufficientData, std::to_string(inc.n()) + " samples for " +
                                                     std::to_string(bins) + " bins");
    }
    const auto& z = inc.standardized;
    const Axis axis = make_axis(z, bins, clip_sd);

    HistogramPdf h;
    h.scale = inc.scale;
    h.bin_edges = axis.edges();
    h.counts.assign(static_cast<std::size_t>(bins), 0);
    for (double v : z) {
        const int k = axis.index(v);
        if (k >= 0) ++h.counts[static_cast<std::size_t>(k)];
    }
    h.n_total = z.size();
    h.n_in_range = std::accumulate(h.counts.begin(), h.counts.end(), std::size_t{0});

    const double n_in = static_cast<double>(h.n_in_range);
    h.density.resize(h.counts.size());
    h.sigma_data.resize(h.counts.size());
    for (std::size_t k = 0; k < h.counts.size(); ++k) {
        h.density[k] = static_cast<double>(h.counts[k]) / (n_in * axis.width);
        h.sigma_data[k] = poisson_sigma(h.counts[k], n_in, axis.width);
    }
    return h;
}

void require_aligned(const IncrementSet& inc1, const IncrementSet& inc2) {
    if (inc1.scale != inc2.scale) {
        throw Error(ErrorKind::Alignment, "increment sets have different scales");
    }
    if (inc1.n() != inc2.n()) {
        throw Error(ErrorKind::Alignment, "increment sets have different lengths (" +
                                              std::to_string(inc1.n()) + " vs " +
                                              std::to_string(inc2.n()) + ")");
    }
    if (inc1.start_times != inc2.start_times) {
        throw Error(ErrorKind::Alignment, "increment sets cover different months");
    }
}

JointHistogramPdf joint_histogram(const IncrementSet& inc1, const IncrementSet& inc2, int bins,
                                  double clip_sd) {
    require_aligned(inc1, inc2);
    if (bins < 8) {
        throw Error(ErrorKind::InsufficientData, "joint histogram needs at least 8 bins per axis");
    }
    if (inc1.n() < static_cast<std::size_t>(bins)) {
        throw Error(ErrorKind::InsufficientData, std::to_string(inc1.n()) + " samples for " +
                                                     std::to_string(bins) + " bins per axis");
    }
    const Axis a1 = make_axis(inc1.standardized, bins, clip_sd);
    const Axis a2 = make_axis(inc2.standardized, bins, clip_sd);
    const auto nb = static_cast<std::size_t>(bins);

    JointHistogramPdf h;
    h.scale = inc1.scale;
    h.bin_edges_1 = a1.edges();
    h.bin_edges_2 = a2.edges();
    h.counts.assign(nb * nb, 0);
    for (std::size_t t = 0; t < inc1.n(); ++t) {
        const int i = a1.index(inc1.standardized[t]);
        const int j = a2.index(inc2.standardized[t]);
        if (i >= 0 && j >= 0) ++h.counts[static_cast<std::size_t>(i) * nb + static_cast<std::size_t>(j)];
    }
    h.n_total = inc1.n();
    h.n_in_range = std::accumulate(h.counts.begin(), h.counts.end(), std::size_t{0});

    const double n_in = static_cast<double>(h.n_in_range);
    const double cell = a1.width * a2.width;
    h.density.resize(h.counts.size());
    h.sigma_data.resize(h.counts.size());
    for (std::size_t k = 0; k < h.counts.size(); ++k) {
        h.density[k] = static_cast<double>(h.counts[k]) / (n_in * cell);
        h.sigma_data[k] = poisson_sigma(h.counts[k], n_in, cell);
    }
    return h;
}

}  // namespace mrw

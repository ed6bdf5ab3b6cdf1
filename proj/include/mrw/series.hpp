#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace mrw {

// Months since year 0: year * 12 + (month - 1).
using MonthIndex = std::int64_t;

/**
 * A named, strictly time-ordered scalar sequence sampled on a monthly grid.
 *
 * Construction validates the invariants (equal lengths, at least two points,
 * strictly increasing timestamps, finite values); a constructed record is
 * immutable.
 */
class SeriesRecord {
public:
    SeriesRecord(std::string name, std::vector<MonthIndex> timestamps,
                 std::vector<double> values, int cadence = 1);

    [[nodiscard]] const std::string& name() const noexcept { return name_; }
    [[nodiscard]] const std::vector<MonthIndex>& timestamps() const noexcept { return timestamps_; }
    [[nodiscard]] const std::vector<double>& values() const noexcept { return values_; }
    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
    [[nodiscard]] int cadence() const noexcept { return cadence_; }

    // Sub-range [first, first + count) as a new record.
    [[nodiscard]] SeriesRecord slice(std::size_t first, std::size_t count) const;

    // Same timestamps, values multiplied by `factor`.
    [[nodiscard]] SeriesRecord scaled(double factor) const;

private:
    std::string name_;
    std::vector<MonthIndex> timestamps_;
    std::vector<double> values_;
    int cadence_;
};

// Lag in samples. Validity against a particular series is checked where the
// scale is used.
class Scale {
public:
    constexpr Scale() = default;
    explicit Scale(int samples);

    [[nodiscard]] constexpr int value() const noexcept { return samples_; }

    friend constexpr auto operator<=>(Scale, Scale) = default;

private:
    int samples_ = 1;
};

struct IncrementSet {
    Scale scale;
    std::vector<MonthIndex> start_times;  // timestamp of x(t) for each increment
    std::vector<double> raw;
    std::vector<double> standardized;
    double mean_raw = 0.0;
    double sd_raw = 0.0;

    [[nodiscard]] std::size_t n() const noexcept { return raw.size(); }
};

struct HistogramPdf {
    Scale scale;
    std::vector<double> bin_edges;
    std::vector<double> density;
    std::vector<double> sigma_data;
    std::vector<std::size_t> counts;
    std::size_t n_total = 0;     // all samples offered to the histogram
    std::size_t n_in_range = 0;  // samples that fell inside the clipped range

    [[nodiscard]] std::size_t bins() const noexcept { return density.size(); }
    [[nodiscard]] double width() const noexcept { return bin_edges[1] - bin_edges[0]; }
    [[nodiscard]] double center(std::size_t k) const noexcept {
        return 0.5 * (bin_edges[k] + bin_edges[k + 1]);
    }
    // Fraction of the samples represented by the normalized density.
    [[nodiscard]] double mass_in_range() const noexcept {
        return n_total == 0 ? 0.0 : static_cast<double>(n_in_range) / static_cast<double>(n_total);
    }
};

// Row-major grid: cell (i, j) at index i * bins2() + j, i along the first series.
struct JointHistogramPdf {
    Scale scale;
    std::vector<double> bin_edges_1;
    std::vector<double> bin_edges_2;
    std::vector<double> density;
    std::vector<double> sigma_data;
    std::vector<std::size_t> counts;
    std::size_t n_total = 0;
    std::size_t n_in_range = 0;

    [[nodiscard]] std::size_t bins1() const noexcept { return bin_edges_1.size() - 1; }
    [[nodiscard]] std::size_t bins2() const noexcept { return bin_edges_2.size() - 1; }
    [[nodiscard]] double width1() const noexcept { return bin_edges_1[1] - bin_edges_1[0]; }
    [[nodiscard]] double width2() const noexcept { return bin_edges_2[1] - bin_edges_2[0]; }
    [[nodiscard]] double center1(std::size_t i) const noexcept {
        return 0.5 * (bin_edges_1[i] + bin_edges_1[i + 1]);
    }
    [[nodiscard]] double center2(std::size_t j) const noexcept {
        return 0.5 * (bin_edges_2[j] + bin_edges_2[j + 1]);
    }
    [[nodiscard]] double at(std::size_t i, std::size_t j) const noexcept {
        return density[i * bins2() + j];
    }
    [[nodiscard]] double mass_in_range() const noexcept {
        return n_total == 0 ? 0.0 : static_cast<double>(n_in_range) / static_cast<double>(n_total);
    }
};

inline constexpr int kDefaultBins = 64;
inline constexpr int kDefaultJointBins = 32;
inline constexpr double kDefaultClipSd = 6.0;

// z-scores with the sample (n - 1) standard deviation. Throws DegenerateSeries
// when the spread is zero.
[[nodiscard]] std::vector<double> standardize(std::span<const double> values);

[[nodiscard]] IncrementSet increments(const SeriesRecord& series, Scale scale);

// Builds an increment set directly from increment samples (used for synthetic
// per-scale draws where no parent series exists).
[[nodiscard]] IncrementSet increment_set_from_samples(std::span<const double> raw,
                                                      Scale scale = Scale{1});

[[nodiscard]] HistogramPdf histogram(const IncrementSet& inc, int bins = kDefaultBins,
                                     double clip_sd = kDefaultClipSd);

[[nodiscard]] JointHistogramPdf joint_histogram(const IncrementSet& inc1, const IncrementSet& inc2,
                                                int bins = kDefaultJointBins,
                                                double clip_sd = kDefaultClipSd);

// Throws Alignment unless both sets share scale, length and start times.
void require_aligned(const IncrementSet& inc1, const IncrementSet& inc2);

}  // namespace mrw

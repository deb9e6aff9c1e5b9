#include "mortcast/stats.hpp"

#include "mortcast/errors.hpp"

#include <algorithm>
#include <cmath>

namespace mortcast {

double compensated_sum(std::span<const double> values) {
    CompensatedSum sum;
    for (double v : values) {
        sum.add(v);
    }
    return sum.value();
}

double mean(std::span<const double> values) {
    if (values.empty()) {
        return 0.0;
    }
    return compensated_sum(values) / static_cast<double>(values.size());
}

double sample_variance(std::span<const double> values, double mean_value) {
    const std::size_t n = values.size();
    if (n < 2) {
        return 0.0;
    }
    double sum = 0.0;
    double comp = 0.0;
    for (double v : values) {
        const double d = (v - mean_value) * (v - mean_value);
        const double t = sum + d;
        if (sum >= d) {
            comp += (sum - t) + d;
        } else {
            comp += (d - t) + sum;
        }
        sum = t;
    }
    return (sum + comp) / static_cast<double>(n - 1);
}

double sample_std(std::span<const double> values, double mean_value) {
    return std::sqrt(sample_variance(values, mean_value));
}

double quantile_sorted(std::span<const double> sorted, double p) {
    if (sorted.empty()) {
        throw ValidationError("quantile of empty sample");
    }
    if (p < 0.0 || p > 1.0) {
        throw ValidationError("quantile level must lie in [0, 1]");
    }
    const std::size_t n = sorted.size();
    if (n == 1) {
        return sorted[0];
    }
    const double pos = p * static_cast<double>(n - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, n - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double inverse_normal_cdf(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw ValidationError("inverse normal CDF requires p in (0, 1)");
    }

    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00, 2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};

    constexpr double p_low = 0.02425;
    constexpr double p_high = 1.0 - p_low;

    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > p_high) {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

std::vector<HistogramBin> histogram(std::span<const double> values, std::size_t n_bins) {
    std::vector<HistogramBin> bins;
    if (values.empty() || n_bins == 0) {
        return bins;
    }
    const auto [min_it, max_it] = std::minmax_element(values.begin(), values.end());
    double lo = *min_it;
    double hi = *max_it;
    if (lo == hi) {
        // All samples equal: one bin of nominal unit width around the value.
        bins.push_back({lo - 0.5, hi + 0.5, values.size()});
        return bins;
    }
    const double width = (hi - lo) / static_cast<double>(n_bins);
    bins.resize(n_bins);
    for (std::size_t i = 0; i < n_bins; ++i) {
        bins[i] = {lo + width * static_cast<double>(i),
                   lo + width * static_cast<double>(i + 1), 0};
    }
    bins.back().hi = hi;
    for (double v : values) {
        auto idx = static_cast<std::size_t>((v - lo) / width);
        if (idx >= n_bins) {
            idx = n_bins - 1;
        }
        ++bins[idx].count;
    }
    return bins;
}

} // namespace mortcast

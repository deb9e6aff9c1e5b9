#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace mortcast {

// Compensated (Neumaier) running sum. Order-deterministic for a fixed add
// order, which keeps aggregate statistics identical across worker counts.
class CompensatedSum {
public:
    void add(double v) {
        const double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v)) {
            comp_ += (sum_ - t) + v;
        } else {
            comp_ += (v - t) + sum_;
        }
        sum_ = t;
    }

    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

double compensated_sum(std::span<const double> values);

double mean(std::span<const double> values);

// Sample variance with divisor n-1 (two-pass, compensated). Returns 0 for n < 2.
double sample_variance(std::span<const double> values, double mean_value);

double sample_std(std::span<const double> values, double mean_value);

// Linear-interpolation empirical quantile (the R type-7 convention) on an
// already sorted vector. p in [0, 1], monotone in p.
double quantile_sorted(std::span<const double> sorted, double p);

// Inverse standard normal CDF (Acklam's rational approximation,
// |relative error| < 1.2e-9). p must lie in (0, 1).
double inverse_normal_cdf(double p);

struct HistogramBin {
    double lo;
    double hi;
    std::size_t count;
};

// Equal-width histogram over [min, max] of the data. Empty input gives no bins.
std::vector<HistogramBin> histogram(std::span<const double> values, std::size_t n_bins);

} // namespace mortcast

#pragma once

// Synthetic fixtures shared by the unit tests and the acceptance checks.

#include "mortcast/leecarter.hpp"
#include "mortcast/rng.hpp"
#include "mortcast/surface.hpp"
#include "mortcast/trend.hpp"
#include "mortcast/valuation.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace testutil {

/// exp(alpha_x + beta_x * kappa_t) over [age_min, ...] x [year_min, ...].
inline mortcast::MortalitySurface rank1_surface(const std::vector<double>& alpha,
                                                const std::vector<double>& beta,
                                                const std::vector<double>& kappa, int age_min,
                                                int year_min) {
    const int n_ages = static_cast<int>(alpha.size());
    const int n_years = static_cast<int>(kappa.size());
    std::vector<double> rates;
    rates.reserve(static_cast<std::size_t>(n_ages) * static_cast<std::size_t>(n_years));
    for (int i = 0; i < n_ages; ++i) {
        for (int j = 0; j < n_years; ++j) {
            rates.push_back(std::exp(alpha[static_cast<std::size_t>(i)] +
                                     beta[static_cast<std::size_t>(i)] *
                                         kappa[static_cast<std::size_t>(j)]));
        }
    }
    return mortcast::MortalitySurface(age_min, age_min + n_ages - 1, year_min,
                                      year_min + n_years - 1, std::move(rates));
}

struct Rank1Spec {
    std::vector<double> alpha;
    std::vector<double> beta;  // positive, sums to 1
    std::vector<double> kappa; // sums to 0
};

/// Random decomposition already satisfying the identifiability constraints.
inline Rank1Spec random_rank1(std::mt19937_64& gen, int n_ages, int n_years) {
    Rank1Spec spec;
    spec.alpha.resize(static_cast<std::size_t>(n_ages));
    spec.beta.resize(static_cast<std::size_t>(n_ages));
    spec.kappa.resize(static_cast<std::size_t>(n_years));

    double beta_sum = 0.0;
    for (int i = 0; i < n_ages; ++i) {
        spec.alpha[static_cast<std::size_t>(i)] = -6.0 + 4.0 * mortcast::uniform01(gen);
        const double b = 0.2 + 0.8 * mortcast::uniform01(gen);
        spec.beta[static_cast<std::size_t>(i)] = b;
        beta_sum += b;
    }
    for (double& b : spec.beta) {
        b /= beta_sum;
    }

    double kappa_sum = 0.0;
    for (int j = 0; j < n_years; ++j) {
        const double k = 6.0 * (mortcast::uniform01(gen) - 0.5);
        spec.kappa[static_cast<std::size_t>(j)] = k;
        kappa_sum += k;
    }
    const double kappa_mean = kappa_sum / n_years;
    for (double& k : spec.kappa) {
        k -= kappa_mean;
    }
    return spec;
}

/// Model shaped like the published study: 56 ages (50..105), 47 years
/// (1959..2005), a strongly declining period index with the published trend
/// estimates, and positive age loadings falling with age.
struct PaperModel {
    mortcast::LeeCarterParams params;
    mortcast::TrendFit fit;
};

inline PaperModel paper_model(std::uint64_t seed, double sigma_gamma = 3.98227882) {
    const int age_min = 50, age_max = 105;
    const int year_min = 1959, year_max = 2005;
    const int n_ages = age_max - age_min + 1;
    const int n_years = year_max - year_min + 1;
    const double a_true = -2.05775;
    const double b_true = 49.38604;

    mortcast::LeeCarterParams p;
    p.age_min = age_min;
    p.age_max = age_max;
    p.year_min = year_min;
    p.year_max = year_max;

    double beta_sum = 0.0;
    for (int i = 0; i < n_ages; ++i) {
        p.alpha.push_back(-6.2 + 0.105 * i);
        const double b = 1.8 - 0.02 * i; // younger ages improve faster
        p.beta.push_back(b);
        beta_sum += b;
    }
    for (double& b : p.beta) {
        b /= beta_sum;
    }

    auto gen = mortcast::substream(seed, 77, 0);
    double k_sum = 0.0;
    for (int tau = 1; tau <= n_years; ++tau) {
        const double k = a_true * tau + b_true + sigma_gamma * mortcast::normal01(gen);
        p.kappa.push_back(k);
        k_sum += k;
    }
    const double k_mean = k_sum / n_years;
    for (double& k : p.kappa) {
        k -= k_mean; // keep the usual sum-zero normalization
    }

    PaperModel model;
    model.fit = mortcast::fit_trend(p.kappa, year_min, year_max);
    model.params = std::move(p);
    return model;
}

/// 374 annuitants, mean age 63.8 (ages clipped to [50, 90]) and mean annual
/// annuity exactly 5500.
inline mortcast::Portfolio paper_portfolio(std::uint64_t seed) {
    constexpr int n = 374;
    constexpr double target_mean_age = 63.8;
    auto gen = mortcast::substream(seed, 78, 0);

    std::vector<int> ages;
    std::vector<double> annuities;
    ages.reserve(n);
    annuities.reserve(n);
    double annuity_sum = 0.0;
    long long age_sum = 0;
    for (int i = 0; i < n; ++i) {
        double a = target_mean_age + 7.0 * mortcast::normal01(gen);
        a = std::min(90.0, std::max(50.0, a));
        const int age = static_cast<int>(std::lround(a));
        ages.push_back(age);
        age_sum += age;

        const double r = std::exp(0.45 * mortcast::normal01(gen));
        annuities.push_back(r);
        annuity_sum += r;
    }

    // Nudge single members by one year until the mean age matches closely.
    double mean_age = static_cast<double>(age_sum) / n;
    std::size_t idx = 0;
    while (std::abs(mean_age - target_mean_age) > 0.5 / n && idx < ages.size()) {
        const int step = mean_age > target_mean_age ? -1 : 1;
        const int moved = ages[idx] + step;
        if (moved >= 50 && moved <= 90) {
            ages[idx] = moved;
            age_sum += step;
            mean_age = static_cast<double>(age_sum) / n;
        }
        ++idx;
        if (idx == ages.size() && std::abs(mean_age - target_mean_age) > 0.5 / n) {
            idx = 0;
        }
    }

    mortcast::Portfolio portfolio;
    const double scale = 5500.0 * n / annuity_sum;
    for (int i = 0; i < n; ++i) {
        portfolio.members.push_back({"L" + std::to_string(i + 1),
                                     ages[static_cast<std::size_t>(i)],
                                     annuities[static_cast<std::size_t>(i)] * scale});
    }
    return portfolio;
}

/// Yearly survival probability p such that a cohort with flat mortality and
/// closure after max_years has curtate expectancy exactly e_target:
/// sum_{k=1..K} p^k = e_target, solved by bisection.
inline double survival_for_expectancy(double e_target, int max_years) {
    double lo = 0.0, hi = 1.0 - 1e-12;
    for (int it = 0; it < 200; ++it) {
        const double p = 0.5 * (lo + hi);
        double e = 0.0, pk = 1.0;
        for (int k = 1; k <= max_years; ++k) {
            pk *= p;
            e += pk;
        }
        (e < e_target ? lo : hi) = p;
    }
    return 0.5 * (lo + hi);
}

/// Surface whose cohort expectancy at `age` rises exactly linearly with the
/// birth generation: every cohort has flat (age-independent) mortality, so
/// its expectancy is the closed-form geometric sum the solver inverts.
inline mortcast::MortalitySurface linear_expectancy_surface(int age, int gen_first, int gen_last,
                                                            double e_first,
                                                            double step_per_generation,
                                                            int omega_max) {
    const int age_lo = age;
    const int age_hi = omega_max - 1; // the closure year itself needs no cell
    const int year_lo = gen_first + age_lo;
    const int year_hi = gen_last + age_hi;
    const int n_years = year_hi - year_lo + 1;

    std::vector<double> mu_by_gen;
    for (int g = gen_first; g <= gen_last; ++g) {
        const double e = e_first + step_per_generation * (g - gen_first);
        const double p = survival_for_expectancy(e, omega_max - age);
        mu_by_gen.push_back(-std::log(p));
    }

    std::vector<double> rates;
    rates.reserve(static_cast<std::size_t>(age_hi - age_lo + 1) *
                  static_cast<std::size_t>(n_years));
    for (int x = age_lo; x <= age_hi; ++x) {
        for (int y = year_lo; y <= year_hi; ++y) {
            int g = y - x;
            g = std::max(gen_first, std::min(gen_last, g)); // off-diagonal filler
            rates.push_back(mu_by_gen[static_cast<std::size_t>(g - gen_first)]);
        }
    }
    return mortcast::MortalitySurface(age_lo, age_hi, year_lo, year_hi, std::move(rates));
}

} // namespace testutil

#pragma once

#include "mortcast/leecarter.hpp"
#include "mortcast/surface.hpp"
#include "mortcast/trend.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace mortcast {

/// One annuitant: attained age at the valuation date and annual benefit.
struct Annuitant {
    std::string id;
    int age = 0;
    double annuity = 0.0;
};

struct Portfolio {
    std::vector<Annuitant> members;

    std::size_t size() const { return members.size(); }
    double total_annuity() const;
    double mean_age() const;
    double mean_annuity() const;
    int min_age() const;
};

/// Parse CSV `id,age,annuity`. Ids must be unique, annuities positive,
/// ages nonnegative.
Portfolio load_portfolio(std::istream& in);

/// n disjoint copies. The first copy keeps the original ids; later copies
/// append "#<copy>" so ids stay unique.
Portfolio replicate(const Portfolio& portfolio, int n);

enum class ValuationMode {
    Deterministic, ///< one fixed surface; dispersion is sampling risk only
    Stochastic,    ///< fresh trend scenario per outer draw, adding systematic risk
};

struct ValuationConfig {
    ValuationMode mode = ValuationMode::Deterministic;
    double discount_rate = 0.025; ///< annual, discrete compounding
    int n_scenarios = 1;          ///< outer (trend) draws; must be 1 in deterministic mode
    int n_inner = 20000;          ///< lifetime simulations per scenario
    std::uint64_t seed = 0;
    int omega_max = 120; ///< closing age: death is certain by then
    int replication = 1; ///< value the portfolio replicated this many times
    /// Projection variant in stochastic mode (Raw or BiasCorrected); must be
    /// MeanReference in deterministic mode when projecting from a fit.
    SurfaceVariant variant = SurfaceVariant::MeanReference;
};

/// Empirical distribution of the discounted liability.
struct ValuationResult {
    /// Scenario-major: samples[s * n_inner + i] is inner draw i of scenario s.
    std::vector<double> samples;
    int n_scenarios = 1;
    int n_inner = 0;

    double mean = 0.0;
    double std_dev = 0.0;
    double cv = 0.0; ///< std_dev / mean; 0 for an all-zero (degenerate) run
    std::map<double, double> quantiles;
    double ci95_lo = 0.0; ///< normal-approximation CI for the mean
    double ci95_hi = 0.0;

    std::span<const double> scenario_samples(int s) const {
        return std::span<const double>(samples).subspan(
            static_cast<std::size_t>(s) * static_cast<std::size_t>(n_inner),
            static_cast<std::size_t>(n_inner));
    }
};

/// Split of the liability variance into the systematic part carried by the
/// trend scenarios (between) and the mutualisable sampling part (within).
struct VarianceDecomposition {
    double between = 0.0;
    double within = 0.0;
    double omega = 0.0; ///< between / (between + within), in [0, 1]
};

/// Curtate lifetime: walk the yearly death probabilities, one uniform draw
/// per year survived-or-died; returns the count of fully completed years.
/// The closing q = 1 entry guarantees termination.
int simulate_lifetime(std::span<const double> q, std::mt19937_64& gen);

/// One curtate lifetime per member, drawn sequentially from the stream.
std::vector<int> simulate_lifetimes(std::span<const CohortRateVector> cohorts,
                                    std::mt19937_64& gen);

/// Discounted portfolio outflow for one set of lifetimes: member j pays
/// annuity_j at the end of each survived year t = 1..K_j.
double liability(std::span<const int> lifetimes, const Portfolio& portfolio,
                 double discount_rate);

/// Monte Carlo valuation against a fitted model. Stochastic mode draws one
/// trend scenario per outer index and rebuilds the projected surface; years
/// up to the fit's last year stay fixed, members enter exposure the year
/// after. Deterministic mode projects the mean-reference surface once.
///
/// `workers` caps the thread count (0 = hardware concurrency). Results are
/// bit-identical for any worker count: every (scenario, inner) pair owns a
/// substream derived from the seed, and statistics are reduced in index
/// order from a preallocated sample array.
ValuationResult run_valuation(const ValuationConfig& config, const LeeCarterParams& params,
                              const TrendFit& fit, const Portfolio& portfolio,
                              int workers = 0);

/// Deterministic-mode valuation against a caller-supplied surface (already
/// projected as far as the cohorts need). Members aged x are exposed to
/// rate (x, first_exposure_year) in their first year.
ValuationResult run_valuation(const ValuationConfig& config, const MortalitySurface& surface,
                              int first_exposure_year, const Portfolio& portfolio,
                              int workers = 0);

/// Between/within split of a grouped result (needs >= 2 scenarios of >= 2
/// inner draws). The between estimator subtracts the within-group noise
/// term within/n_inner, the standard correction for group means estimated
/// from finitely many inner draws; omega is clamped to [0, 1].
VarianceDecomposition decompose(const ValuationResult& result);

/// Systematic variance share after replicating the portfolio n times:
/// (1 + (1/n)(1/omega - 1))^{-1}. Strictly increasing in n toward 1.
double omega_n(double omega, int n);

/// Curtate cohort life expectancy: sum over k >= 1 of the probability of
/// surviving the first k years, truncated at omega_max.
double life_expectancy(const MortalitySurface& surface, int age, int generation,
                       int omega_max = 120);

/// Slope, in months per calendar year of birth, of the cohort life
/// expectancy at the given age across generations [gen_first, gen_last]
/// (at least 3), fitted by least squares.
double expectancy_drift(const MortalitySurface& surface, int age, int gen_first, int gen_last,
                        int omega_max = 120);

/// Expected present value of a unit annuity in arrears along the cohort:
/// sum over t >= 1 of (1+i)^{-t} times the t-year survival probability.
double annuity_factor(const MortalitySurface& surface, int age, int generation,
                      double discount_rate, int omega_max = 120);

} // namespace mortcast

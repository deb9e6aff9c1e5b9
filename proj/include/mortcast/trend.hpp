#pragma once

#include "mortcast/leecarter.hpp"
#include "mortcast/surface.hpp"

#include <array>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <vector>

namespace mortcast {

/// 2x2 covariance of the affine-trend estimators, ordering (a, b).
struct TrendCovariance {
    double var_a = 0.0;
    double cov_ab = 0.0;
    double var_b = 0.0;
};

/// Affine trend of the period index, fitted by OLS in the shifted index
/// tau = t - t_m + 1: kappa_tau = a*tau + b + gamma_tau with gamma white
/// noise of scale sigma_gamma.
///
/// The estimator pair (a_hat, b_hat) is bivariate normal with covariance
///   var(a)    = 12 sigma_gamma^2 / (T (T^2 - 1))
///   cov(a, b) = -var(a) (T + 1) / 2
///   var(b)    =  var(a) (T + 1)(2T + 1) / 6
/// which `cov` always stores.
struct TrendFit {
    double a_hat = 0.0;        ///< slope per year
    double b_hat = 0.0;        ///< intercept in the tau index
    double sigma_gamma = 0.0;  ///< residual scale, divisor T - 2
    double k_bar = 0.0;        ///< mean of the fitted kappa series
    int t_m = 0;               ///< first fitted calendar year
    int t_M = 0;               ///< last fitted calendar year
    TrendCovariance cov;

    int T() const { return t_M - t_m + 1; }
    int tau_of_year(int year) const { return year - t_m + 1; }
    /// Fitted trend line at index tau.
    double trend_at(int tau) const { return a_hat * tau + b_hat; }
};

/// One draw of the estimator pair; a projected trend scenario.
struct TrendScenario {
    double a_star = 0.0;
    double b_star = 0.0;
};

/// How projected rates are assembled from a trend (see build_surface).
enum class SurfaceVariant {
    Raw,            ///< exp(alpha + beta k*), the plain stochastic model
    BiasCorrected,  ///< exp(alpha - beta^2 sigma_t^2 / 2 + beta k*)
    MeanReference,  ///< deterministic mean surface exp(alpha + beta k_hat + beta^2 sigma_t^2 / 2)
};

/// Assemble a fit directly from the estimates; k_bar and the covariance are
/// derived from (a_hat, b_hat, sigma_gamma, T). Needs T >= 3.
TrendFit make_trend_fit(double a_hat, double b_hat, double sigma_gamma, int t_m, int t_M);

/// Closed-form OLS of the period index on [t_m, t_M]. Needs length >= 3 so
/// sigma_gamma keeps at least one residual degree of freedom.
TrendFit fit_trend(std::span<const double> kappa, int t_m, int t_M);

/// Convenience: fit the trend of an already fitted decomposition.
TrendFit fit_trend(const LeeCarterParams& params);

/// Variance of the fitted trend line at index tau (tau >= 1, in-sample or
/// beyond): tau^2 var(a) + 2 tau cov(a,b) + var(b). Symmetric about
/// (T+1)/2, where it attains its minimum sigma_gamma^2 / T.
double sigma_t_sq(const TrendFit& fit, int tau);

/// {quadratic, linear, constant} coefficients of sigma_t_sq as a polynomial
/// in tau.
std::array<double, 3> sigma_t_sq_coefficients(const TrendFit& fit);

/// Bivariate-normal draw of (a*, b*) around (a_hat, b_hat) through the
/// lower-triangular square root of the estimator covariance. A zero
/// sigma_gamma yields the point mass at the estimates. Consumes exactly two
/// engine outputs, so substreams stay aligned across scenario indices.
TrendScenario draw_scenario(const TrendFit& fit, std::mt19937_64& gen);

/// Straight-line projection k*_tau = a* tau + b* for tau in
/// [tau_first, tau_last]. No per-year noise is added: the model's
/// volatility is the uncertain drift, not annual shocks.
std::vector<double> project_kappa(const TrendScenario& scenario, int tau_first, int tau_last);

/// Assemble a surface over [year_min, horizon_year].
///
/// Years up to t_M always carry the Lee-Carter reconstruction (the past
/// surface is treated as fixed). Later years follow the variant; Raw and
/// BiasCorrected require a scenario, MeanReference forbids one.
MortalitySurface build_surface(const LeeCarterParams& params, const TrendFit& fit,
                               const std::optional<TrendScenario>& scenario,
                               SurfaceVariant variant, int horizon_year);

/// One row of the trend corridor (fan chart).
struct FanChartRow {
    int tau = 0;
    int year = 0;
    double k_mean = 0.0;
    double k_lo = 0.0;
    double k_hi = 0.0;
};

/// Corridor of k* at the given two-sided confidence level, tau = 1 up to
/// the horizon. Band halfwidth is z * sigma_tau, so it widens with tau
/// beyond the design center.
std::vector<FanChartRow> fan_chart(const TrendFit& fit, int horizon_year,
                                   double confidence = 0.95);

/// CSV `tau,year,k_mean,k_lo,k_hi`.
void save_fan_chart(std::span<const FanChartRow> rows, std::ostream& out);

} // namespace mortcast

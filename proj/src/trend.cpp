#include "mortcast/trend.hpp"

#include "mortcast/errors.hpp"
#include "mortcast/rng.hpp"
#include "mortcast/stats.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace mortcast {

TrendFit make_trend_fit(double a_hat, double b_hat, double sigma_gamma, int t_m, int t_M)
{
    const int T = t_M - t_m + 1;
    if (T < 3)
        throw ValidationError("trend fit: need at least 3 years, got " + std::to_string(T));
    if (!(sigma_gamma >= 0.0) || !std::isfinite(sigma_gamma))
        throw ValidationError("trend fit: residual scale must be nonnegative and finite");
    if (!std::isfinite(a_hat) || !std::isfinite(b_hat))
        throw ValidationError("trend fit: estimates must be finite");

    TrendFit fit;
    fit.a_hat = a_hat;
    fit.b_hat = b_hat;
    fit.sigma_gamma = sigma_gamma;
    fit.t_m = t_m;
    fit.t_M = t_M;

    const double Td = static_cast<double>(T);
    fit.k_bar = b_hat + a_hat * (Td + 1.0) / 2.0; // inverts b = k_bar - a (T+1)/2

    const double var_a = 12.0 * sigma_gamma * sigma_gamma / (Td * (Td * Td - 1.0));
    fit.cov.var_a = var_a;
    fit.cov.cov_ab = -var_a * (Td + 1.0) / 2.0;
    fit.cov.var_b = var_a * (Td + 1.0) * (2.0 * Td + 1.0) / 6.0;
    return fit;
}

TrendFit fit_trend(std::span<const double> kappa, int t_m, int t_M)
{
    if (t_M < t_m)
        throw ValidationError("trend fit: year range is empty");
    const int T = t_M - t_m + 1;
    if (static_cast<std::size_t>(T) != kappa.size())
        throw ValidationError("trend fit: kappa length " + std::to_string(kappa.size()) +
                              " does not match year range [" + std::to_string(t_m) + ", " +
                              std::to_string(t_M) + "]");
    if (T < 3)
        throw ValidationError("trend fit: need at least 3 years, got " + std::to_string(T));
    for (double k : kappa)
        if (!std::isfinite(k))
            throw ValidationError("trend fit: kappa contains a non-finite value");

    // OLS against tau = 1..T. Centered moments of tau are closed-form:
    // mean (T+1)/2, variance (T^2-1)/12.
    const double Td = static_cast<double>(T);
    const double tau_bar = (Td + 1.0) / 2.0;
    const double tau_var = (Td * Td - 1.0) / 12.0;

    CompensatedSum sum_k;
    CompensatedSum sum_tk;
    for (int i = 0; i < T; ++i) {
        sum_k.add(kappa[i]);
        sum_tk.add((i + 1) * kappa[i]);
    }
    const double k_bar = sum_k.value() / Td;
    const double a_hat = (sum_tk.value() / Td - tau_bar * k_bar) / tau_var;
    const double b_hat = k_bar - a_hat * tau_bar;

    CompensatedSum rss;
    for (int i = 0; i < T; ++i) {
        const double r = kappa[i] - (a_hat * (i + 1) + b_hat);
        rss.add(r * r);
    }
    const double sigma_gamma = std::sqrt(std::max(0.0, rss.value()) / (Td - 2.0));

    TrendFit fit = make_trend_fit(a_hat, b_hat, sigma_gamma, t_m, t_M);
    fit.k_bar = k_bar; // the directly computed mean, not the closed-form inversion
    return fit;
}

TrendFit fit_trend(const LeeCarterParams& params)
{
    if (params.degenerate)
        throw DegeneracyError("trend fit: decomposition is degenerate (flat period index)");
    return fit_trend(params.kappa, params.year_min, params.year_max);
}

double sigma_t_sq(const TrendFit& fit, int tau)
{
    if (tau < 1)
        throw ValidationError("sigma_t_sq: tau must be >= 1, got " + std::to_string(tau));
    const double td = static_cast<double>(tau);
    return td * td * fit.cov.var_a + 2.0 * td * fit.cov.cov_ab + fit.cov.var_b;
}

std::array<double, 3> sigma_t_sq_coefficients(const TrendFit& fit)
{
    return {fit.cov.var_a, 2.0 * fit.cov.cov_ab, fit.cov.var_b};
}

TrendScenario draw_scenario(const TrendFit& fit, std::mt19937_64& gen)
{
    // Lower Cholesky factor of cov; closed form because the matrix is 2x2.
    // var_b - l21^2 = var_a (T+1)(2T+1)/6 - var_a (T+1)^2/4 >= 0 for T >= 1,
    // with equality only at sigma_gamma = 0; the max() guards rounding.
    const double l11 = std::sqrt(fit.cov.var_a);
    const double l21 = l11 > 0.0 ? fit.cov.cov_ab / l11 : 0.0;
    const double l22 = std::sqrt(std::max(0.0, fit.cov.var_b - l21 * l21));

    const auto [z1, z2] = normal_pair(gen);
    return {fit.a_hat + l11 * z1, fit.b_hat + l21 * z1 + l22 * z2};
}

std::vector<double> project_kappa(const TrendScenario& scenario, int tau_first, int tau_last)
{
    if (tau_last < tau_first)
        throw ValidationError("project_kappa: empty tau range");
    std::vector<double> k;
    k.reserve(static_cast<std::size_t>(tau_last - tau_first + 1));
    for (int tau = tau_first; tau <= tau_last; ++tau)
        k.push_back(scenario.a_star * tau + scenario.b_star);
    return k;
}

MortalitySurface build_surface(const LeeCarterParams& params, const TrendFit& fit,
                               const std::optional<TrendScenario>& scenario,
                               SurfaceVariant variant, int horizon_year)
{
    if (params.degenerate)
        throw DegeneracyError("build_surface: decomposition is degenerate");
    if (fit.t_m != params.year_min || fit.t_M != params.year_max)
        throw ValidationError("build_surface: trend fit years [" + std::to_string(fit.t_m) +
                              ", " + std::to_string(fit.t_M) +
                              "] do not match the decomposition [" +
                              std::to_string(params.year_min) + ", " +
                              std::to_string(params.year_max) + "]");
    if (horizon_year <= fit.t_M)
        throw ValidationError("build_surface: horizon year " + std::to_string(horizon_year) +
                              " must lie beyond the fitted range (last year " +
                              std::to_string(fit.t_M) + ")");
    const bool needs_scenario = variant != SurfaceVariant::MeanReference;
    if (needs_scenario && !scenario)
        throw ValidationError("build_surface: this variant projects a drawn trend; "
                              "a scenario is required");
    if (!needs_scenario && scenario)
        throw ValidationError("build_surface: the mean-reference surface is deterministic; "
                              "no scenario may be supplied");

    const int n_ages = params.n_ages();
    const int n_years_fit = params.n_years();
    const int n_years = horizon_year - params.year_min + 1;

    std::vector<double> rates(static_cast<std::size_t>(n_ages) * n_years);
    for (int i = 0; i < n_ages; ++i) {
        const double a = params.alpha[i];
        const double b = params.beta[i];
        double* row = rates.data() + static_cast<std::size_t>(i) * n_years;
        // Fitted window: always the plain reconstruction.
        for (int j = 0; j < n_years_fit; ++j)
            row[j] = std::exp(a + b * params.kappa[j]);
        // Projection window.
        for (int j = n_years_fit; j < n_years; ++j) {
            const int tau = j + 1; // year_min + j  ->  tau = j + 1
            const double s2 = sigma_t_sq(fit, tau);
            double log_mu = 0.0;
            switch (variant) {
            case SurfaceVariant::Raw:
                log_mu = a + b * (scenario->a_star * tau + scenario->b_star);
                break;
            case SurfaceVariant::BiasCorrected:
                log_mu = a - 0.5 * b * b * s2 + b * (scenario->a_star * tau + scenario->b_star);
                break;
            case SurfaceVariant::MeanReference:
                log_mu = a + b * fit.trend_at(tau) + 0.5 * b * b * s2;
                break;
            }
            row[j] = std::exp(log_mu);
        }
    }
    return MortalitySurface(params.age_min, params.age_max, params.year_min, horizon_year,
                            std::move(rates));
}

std::vector<FanChartRow> fan_chart(const TrendFit& fit, int horizon_year, double confidence)
{
    if (horizon_year < fit.t_m)
        throw ValidationError("fan_chart: horizon year precedes the fitted range");
    if (!(confidence > 0.0 && confidence < 1.0))
        throw ValidationError("fan_chart: confidence must lie in (0, 1)");

    const double z = inverse_normal_cdf(0.5 * (1.0 + confidence));
    const int tau_last = fit.tau_of_year(horizon_year);
    std::vector<FanChartRow> rows;
    rows.reserve(static_cast<std::size_t>(tau_last));
    for (int tau = 1; tau <= tau_last; ++tau) {
        const double mean = fit.trend_at(tau);
        const double half = z * std::sqrt(sigma_t_sq(fit, tau));
        rows.push_back({tau, fit.t_m + tau - 1, mean, mean - half, mean + half});
    }
    return rows;
}

void save_fan_chart(std::span<const FanChartRow> rows, std::ostream& out)
{
    out << "tau,year,k_mean,k_lo,k_hi\n";
    char buf[160];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%.17g,%.17g\n", r.tau, r.year, r.k_mean,
                      r.k_lo, r.k_hi);
        out << buf;
    }
    if (!out)
        throw IoError("fan chart: write failed");
}

} // namespace mortcast

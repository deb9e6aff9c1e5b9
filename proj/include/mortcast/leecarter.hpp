#pragma once

#include "mortcast/surface.hpp"

#include <vector>

namespace mortcast {

/// Fitted parameters of the log-bilinear mortality decomposition
/// ln mu(x, t) = alpha_x + beta_x * kappa_t, under the identifiability
/// constraints sum(beta) = 1 and sum(kappa) = 0.
struct LeeCarterParams {
    std::vector<double> alpha; ///< log-rate level per age
    std::vector<double> beta;  ///< age sensitivity to the period index
    std::vector<double> kappa; ///< period index per calendar year
    double sigma_eps = 0.0;    ///< residual scale of the log-rate fit
    int age_min = 0;
    int age_max = 0;
    int year_min = 0;
    int year_max = 0;
    /// Set when the centered log-surface is rank 0 (no time variation):
    /// kappa is all zeros, beta uniform, and projections are deterministic.
    bool degenerate = false;

    int n_ages() const { return age_max - age_min + 1; }
    int n_years() const { return year_max - year_min + 1; }
};

/// Least-squares fit of the decomposition.
///
/// alpha_x is the time-average of ln mu(x, .); (beta, kappa) is the best
/// rank-1 factor of the centered log-surface (Eckart-Young via SVD),
/// rescaled to the constraints. sigma_eps uses the degrees-of-freedom
/// divisor X*T - X - T (zero when that is not positive, as on a 2x2 grid).
LeeCarterParams fit_lee_carter(const MortalitySurface& surface);

/// Noise-free surface exp(alpha_x + beta_x * kappa_t) over the fitted ranges.
MortalitySurface reconstruct(const LeeCarterParams& params);

} // namespace mortcast

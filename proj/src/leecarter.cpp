#include "mortcast/leecarter.hpp"

#include "mortcast/errors.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>
#include <cstdlib>

namespace mortcast {

LeeCarterParams fit_lee_carter(const MortalitySurface& surface) {
    const int n_ages = surface.n_ages();
    const int n_years = surface.n_years();

    LeeCarterParams params;
    params.age_min = surface.age_min();
    params.age_max = surface.age_max();
    params.year_min = surface.year_min();
    params.year_max = surface.year_max();
    params.alpha.resize(static_cast<std::size_t>(n_ages));
    params.beta.resize(static_cast<std::size_t>(n_ages));
    params.kappa.resize(static_cast<std::size_t>(n_years));

    Eigen::MatrixXd log_rates(n_ages, n_years);
    for (int i = 0; i < n_ages; ++i) {
        for (int j = 0; j < n_years; ++j) {
            log_rates(i, j) = std::log(surface.at(surface.age_min() + i, surface.year_min() + j));
        }
    }

    const Eigen::VectorXd alpha = log_rates.rowwise().mean();
    Eigen::MatrixXd centered = log_rates.colwise() - alpha;
    for (int i = 0; i < n_ages; ++i) {
        params.alpha[static_cast<std::size_t>(i)] = alpha(i);
    }

    const double scale = centered.cwiseAbs().maxCoeff();
    if (scale <= 1e-13 * std::max(1.0, log_rates.cwiseAbs().maxCoeff())) {
        // No time variation: keep a deterministic flat decomposition.
        params.degenerate = true;
        std::fill(params.beta.begin(), params.beta.end(), 1.0 / n_ages);
        std::fill(params.kappa.begin(), params.kappa.end(), 0.0);
        params.sigma_eps = 0.0;
        return params;
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd u = svd.matrixU().col(0);
    const Eigen::VectorXd v = svd.matrixV().col(0);
    const double s = svd.singularValues()(0);

    const double u_sum = u.sum();
    if (std::abs(u_sum) < 1e-12) {
        throw DegeneracyError("beta normalization degenerate: leading age factor sums to zero");
    }

    Eigen::VectorXd beta = u / u_sum;
    Eigen::VectorXd kappa = (s * u_sum) * v;

    // v is orthogonal to the ones vector up to roundoff; fold the residual
    // mean of kappa into alpha so sum(kappa) = 0 holds tightly.
    const double kappa_mean = kappa.mean();
    kappa.array() -= kappa_mean;
    for (int i = 0; i < n_ages; ++i) {
        params.alpha[static_cast<std::size_t>(i)] += beta(i) * kappa_mean;
        params.beta[static_cast<std::size_t>(i)] = beta(i);
    }
    for (int j = 0; j < n_years; ++j) {
        params.kappa[static_cast<std::size_t>(j)] = kappa(j);
    }

    const double rss = (centered - beta * kappa.transpose()).squaredNorm();
    const int dof = n_ages * n_years - n_ages - n_years;
    params.sigma_eps = dof > 0 ? std::sqrt(rss / dof) : 0.0;
    return params;
}

MortalitySurface reconstruct(const LeeCarterParams& params) {
    const int n_ages = params.n_ages();
    const int n_years = params.n_years();
    if (static_cast<int>(params.alpha.size()) != n_ages ||
        static_cast<int>(params.beta.size()) != n_ages ||
        static_cast<int>(params.kappa.size()) != n_years) {
        throw ValidationError("parameter vector lengths do not match the index ranges");
    }
    std::vector<double> rates(static_cast<std::size_t>(n_ages) * static_cast<std::size_t>(n_years));
    std::size_t idx = 0;
    for (int i = 0; i < n_ages; ++i) {
        for (int j = 0; j < n_years; ++j) {
            rates[idx++] = std::exp(params.alpha[static_cast<std::size_t>(i)] +
                                    params.beta[static_cast<std::size_t>(i)] *
                                        params.kappa[static_cast<std::size_t>(j)]);
        }
    }
    return MortalitySurface(params.age_min, params.age_max, params.year_min, params.year_max,
                            std::move(rates));
}

} // namespace mortcast

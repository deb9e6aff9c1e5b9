#pragma once

#include <iosfwd>
#include <span>
#include <vector>

namespace mortcast {

/// Rectangular grid of instantaneous mortality rates mu(age, year).
///
/// The grid is complete by construction: one strictly positive, finite rate
/// for every (age, year) pair in the closed ranges [age_min, age_max] x
/// [year_min, year_max], each range holding at least two points. Immutable
/// after construction, so concurrent reads are safe.
class MortalitySurface {
public:
    /// rates is age-major: rates[(age - age_min) * n_years + (year - year_min)].
    MortalitySurface(int age_min, int age_max, int year_min, int year_max,
                     std::vector<double> rates);

    int age_min() const { return age_min_; }
    int age_max() const { return age_max_; }
    int year_min() const { return year_min_; }
    int year_max() const { return year_max_; }
    int n_ages() const { return age_max_ - age_min_ + 1; }
    int n_years() const { return year_max_ - year_min_ + 1; }

    bool contains(int age, int year) const {
        return age >= age_min_ && age <= age_max_ && year >= year_min_ && year <= year_max_;
    }

    /// Rate at (age, year); throws std::out_of_range outside the grid.
    double at(int age, int year) const;

    std::span<const double> rates() const { return rates_; }

private:
    int age_min_, age_max_, year_min_, year_max_;
    std::vector<double> rates_;
};

/// Annual death probabilities along one birth cohort's diagonal.
/// Entry k applies to age start_age + k in calendar year
/// generation + start_age + k; the final entry (age omega_max) is 1.
struct CohortRateVector {
    int generation = 0;
    int start_age = 0;
    std::vector<double> q;
};

/// Annual death probability under a constant hazard within the year:
/// q = 1 - exp(-mu). Throws ValidationError for negative mu.
///
/// Strictly below min(mu, 1) for mu > 0, though in double precision the
/// result rounds to exactly 1.0 once mu exceeds about 36.7.
double mu_to_q(double mu);

/// Parse a surface from CSV with header `age,year,mu`. Lines starting with
/// '#' are skipped. The grid must be complete, rates strictly positive.
/// Throws ValidationError with the line number on malformed input, and an
/// error listing the missing cells when the grid is incomplete.
MortalitySurface load_surface(std::istream& in);

/// Write the `age,year,mu` CSV, age-major, LF line endings. Rates are
/// printed with 17 significant digits so load(save(s)) is bit-exact.
void save_surface(const MortalitySurface& surface, std::ostream& out);

/// Diagonal (generation) read of the surface from start_age up to omega_max.
///
/// Ages above the surface's last age reuse the last-age rate for the same
/// calendar year; q at omega_max is forced to 1 without a surface lookup.
/// Any other cell falling outside the surface is a ValidationError: there is
/// no calendar-year extrapolation here, projected years must come from an
/// already projected surface.
CohortRateVector cohort_view(const MortalitySurface& surface, int generation,
                             int start_age, int omega_max);

/// Cohort export CSV `age,year,q`.
void save_cohort(const CohortRateVector& cohort, std::ostream& out);

} // namespace mortcast

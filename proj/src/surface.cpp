#include "mortcast/surface.hpp"

#include "mortcast/errors.hpp"

#include "csv.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mortcast {

using detail::parse_double;
using detail::parse_int;
using detail::split_fields;
using detail::trim;

namespace {

std::string cell_name(int age, int year) {
    return "(" + std::to_string(age) + ", " + std::to_string(year) + ")";
}

} // namespace

MortalitySurface::MortalitySurface(int age_min, int age_max, int year_min, int year_max,
                                   std::vector<double> rates)
    : age_min_(age_min), age_max_(age_max), year_min_(year_min), year_max_(year_max),
      rates_(std::move(rates)) {
    if (age_max_ < age_min_ + 1) {
        throw ValidationError("surface needs at least 2 ages");
    }
    if (year_max_ < year_min_ + 1) {
        throw ValidationError("surface needs at least 2 years");
    }
    const auto expected = static_cast<std::size_t>(n_ages()) * static_cast<std::size_t>(n_years());
    if (rates_.size() != expected) {
        throw ValidationError("surface rate grid has " + std::to_string(rates_.size()) +
                              " cells, expected " + std::to_string(expected));
    }
    for (std::size_t i = 0; i < rates_.size(); ++i) {
        const double mu = rates_[i];
        if (!(mu > 0.0) || !std::isfinite(mu)) {
            const int age = age_min_ + static_cast<int>(i) / n_years();
            const int year = year_min_ + static_cast<int>(i) % n_years();
            throw ValidationError("non-positive or non-finite rate at " + cell_name(age, year));
        }
    }
}

double MortalitySurface::at(int age, int year) const {
    if (!contains(age, year)) {
        throw std::out_of_range("surface cell " + cell_name(age, year) + " outside grid [" +
                                std::to_string(age_min_) + ", " + std::to_string(age_max_) +
                                "] x [" + std::to_string(year_min_) + ", " +
                                std::to_string(year_max_) + "]");
    }
    return rates_[static_cast<std::size_t>(age - age_min_) * static_cast<std::size_t>(n_years()) +
                  static_cast<std::size_t>(year - year_min_)];
}

double mu_to_q(double mu) {
    if (mu < 0.0 || !std::isfinite(mu)) {
        throw ValidationError("hazard rate must be nonnegative and finite");
    }
    return -std::expm1(-mu);
}

MortalitySurface load_surface(std::istream& in) {
    std::string line;
    long line_no = 0;

    // Header.
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view body = trim(line);
        if (body.empty() || body.front() == '#') {
            continue;
        }
        if (body != "age,year,mu") {
            throw ValidationError("line " + std::to_string(line_no) +
                                  ": expected header 'age,year,mu'");
        }
        have_header = true;
        break;
    }
    if (!have_header) {
        throw ValidationError("empty surface file: missing 'age,year,mu' header");
    }

    struct Cell {
        int age;
        int year;
        double mu;
    };
    std::vector<Cell> cells;
    int age_lo = 0, age_hi = 0, year_lo = 0, year_hi = 0;

    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view body = trim(line);
        if (body.empty() || body.front() == '#') {
            continue;
        }
        const auto fields = split_fields(body);
        int age = 0, year = 0;
        double mu = 0.0;
        if (fields.size() != 3 || !parse_int(fields[0], age) || !parse_int(fields[1], year) ||
            !parse_double(fields[2], mu)) {
            throw ValidationError("line " + std::to_string(line_no) +
                                  ": malformed surface row '" + std::string(body) + "'");
        }
        if (!(mu > 0.0) || !std::isfinite(mu)) {
            throw ValidationError("line " + std::to_string(line_no) + ": non-positive rate at " +
                                  cell_name(age, year));
        }
        if (cells.empty()) {
            age_lo = age_hi = age;
            year_lo = year_hi = year;
        } else {
            age_lo = std::min(age_lo, age);
            age_hi = std::max(age_hi, age);
            year_lo = std::min(year_lo, year);
            year_hi = std::max(year_hi, year);
        }
        cells.push_back({age, year, mu});
    }
    if (cells.empty()) {
        throw ValidationError("surface file has no data rows");
    }

    const int n_ages = age_hi - age_lo + 1;
    const int n_years = year_hi - year_lo + 1;
    const auto n_cells = static_cast<std::size_t>(n_ages) * static_cast<std::size_t>(n_years);
    std::vector<double> rates(n_cells, -1.0);
    for (const Cell& c : cells) {
        const auto idx = static_cast<std::size_t>(c.age - age_lo) * static_cast<std::size_t>(n_years) +
                         static_cast<std::size_t>(c.year - year_lo);
        if (rates[idx] >= 0.0) {
            throw ValidationError("duplicate cell " + cell_name(c.age, c.year));
        }
        rates[idx] = c.mu;
    }

    std::vector<std::string> missing;
    for (std::size_t i = 0; i < n_cells; ++i) {
        if (rates[i] < 0.0) {
            const int age = age_lo + static_cast<int>(i) / n_years;
            const int year = year_lo + static_cast<int>(i) % n_years;
            if (missing.size() < 10) {
                missing.push_back(cell_name(age, year));
            } else {
                missing.back() = "...";
                break;
            }
        }
    }
    if (!missing.empty()) {
        std::string msg = "incomplete grid, missing cells:";
        for (const auto& m : missing) {
            msg += " " + m;
        }
        throw ValidationError(msg);
    }

    return MortalitySurface(age_lo, age_hi, year_lo, year_hi, std::move(rates));
}

void save_surface(const MortalitySurface& surface, std::ostream& out) {
    out << "age,year,mu\n";
    char buf[64];
    for (int age = surface.age_min(); age <= surface.age_max(); ++age) {
        for (int year = surface.year_min(); year <= surface.year_max(); ++year) {
            std::snprintf(buf, sizeof(buf), "%d,%d,%.17g\n", age, year, surface.at(age, year));
            out << buf;
        }
    }
    if (!out) {
        throw IoError("failed writing surface CSV");
    }
}

CohortRateVector cohort_view(const MortalitySurface& surface, int generation, int start_age,
                             int omega_max) {
    if (start_age > omega_max) {
        throw ValidationError("start_age " + std::to_string(start_age) +
                              " exceeds closure age " + std::to_string(omega_max));
    }
    if (start_age < surface.age_min()) {
        throw ValidationError("start_age " + std::to_string(start_age) +
                              " below surface age range");
    }
    CohortRateVector cohort;
    cohort.generation = generation;
    cohort.start_age = start_age;
    cohort.q.reserve(static_cast<std::size_t>(omega_max - start_age) + 1);
    for (int age = start_age; age <= omega_max; ++age) {
        if (age == omega_max) {
            cohort.q.push_back(1.0); // closure, no surface lookup
            break;
        }
        const int year = generation + age;
        const int lookup_age = std::min(age, surface.age_max()); // old ages held at last row
        if (year < surface.year_min() || year > surface.year_max()) {
            throw ValidationError("cohort diagonal leaves the surface at " +
                                  cell_name(age, year) + "; project the surface further first");
        }
        cohort.q.push_back(mu_to_q(surface.at(lookup_age, year)));
    }
    return cohort;
}

void save_cohort(const CohortRateVector& cohort, std::ostream& out) {
    out << "age,year,q\n";
    char buf[64];
    for (std::size_t k = 0; k < cohort.q.size(); ++k) {
        const int age = cohort.start_age + static_cast<int>(k);
        std::snprintf(buf, sizeof(buf), "%d,%d,%.17g\n", age, cohort.generation + age,
                      cohort.q[k]);
        out << buf;
    }
    if (!out) {
        throw IoError("failed writing cohort CSV");
    }
}

} // namespace mortcast

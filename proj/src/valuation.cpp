#include "mortcast/valuation.hpp"

#include "mortcast/errors.hpp"
#include "mortcast/rng.hpp"
#include "mortcast/stats.hpp"

#include "csv.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <istream>
#include <optional>
#include <string>
#include <thread>
#include <unordered_set>
#include <utility>

namespace mortcast {

using detail::parse_double;
using detail::parse_int;
using detail::split_fields;
using detail::trim;

double Portfolio::total_annuity() const {
    CompensatedSum sum;
    for (const auto& m : members) {
        sum.add(m.annuity);
    }
    return sum.value();
}

double Portfolio::mean_age() const {
    if (members.empty()) {
        return 0.0;
    }
    CompensatedSum sum;
    for (const auto& m : members) {
        sum.add(m.age);
    }
    return sum.value() / static_cast<double>(members.size());
}

double Portfolio::mean_annuity() const {
    return members.empty() ? 0.0 : total_annuity() / static_cast<double>(members.size());
}

int Portfolio::min_age() const {
    if (members.empty()) {
        throw ValidationError("empty portfolio has no minimum age");
    }
    int lo = members.front().age;
    for (const auto& m : members) {
        lo = std::min(lo, m.age);
    }
    return lo;
}

Portfolio load_portfolio(std::istream& in) {
    std::string line;
    long line_no = 0;

    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view body = trim(line);
        if (body.empty() || body.front() == '#') {
            continue;
        }
        if (body != "id,age,annuity") {
            throw ValidationError("line " + std::to_string(line_no) +
                                  ": expected header 'id,age,annuity'");
        }
        have_header = true;
        break;
    }
    if (!have_header) {
        throw ValidationError("empty portfolio file: missing 'id,age,annuity' header");
    }

    Portfolio portfolio;
    std::unordered_set<std::string> seen;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view body = trim(line);
        if (body.empty() || body.front() == '#') {
            continue;
        }
        const auto fields = split_fields(body);
        int age = 0;
        double annuity = 0.0;
        if (fields.size() != 3 || !parse_int(fields[1], age) ||
            !parse_double(fields[2], annuity)) {
            throw ValidationError("line " + std::to_string(line_no) +
                                  ": malformed portfolio row '" + std::string(body) + "'");
        }
        std::string id(trim(fields[0]));
        if (id.empty()) {
            throw ValidationError("line " + std::to_string(line_no) + ": empty member id");
        }
        if (age < 0) {
            throw ValidationError("line " + std::to_string(line_no) + ": negative age for '" +
                                  id + "'");
        }
        if (!(annuity > 0.0) || !std::isfinite(annuity)) {
            throw ValidationError("line " + std::to_string(line_no) +
                                  ": annuity must be positive for '" + id + "'");
        }
        if (!seen.insert(id).second) {
            throw ValidationError("line " + std::to_string(line_no) + ": duplicate member id '" +
                                  id + "'");
        }
        portfolio.members.push_back({std::move(id), age, annuity});
    }
    if (portfolio.members.empty()) {
        throw ValidationError("portfolio file has no data rows");
    }
    return portfolio;
}

Portfolio replicate(const Portfolio& portfolio, int n) {
    if (portfolio.members.empty()) {
        throw ValidationError("cannot replicate an empty portfolio");
    }
    if (n < 1) {
        throw ValidationError("replication count must be >= 1");
    }
    Portfolio out;
    out.members.reserve(portfolio.members.size() * static_cast<std::size_t>(n));
    for (int copy = 1; copy <= n; ++copy) {
        for (const auto& m : portfolio.members) {
            Annuitant a = m;
            if (copy > 1) {
                a.id += "#" + std::to_string(copy);
            }
            out.members.push_back(std::move(a));
        }
    }
    return out;
}

int simulate_lifetime(std::span<const double> q, std::mt19937_64& gen) {
    for (std::size_t k = 0; k < q.size(); ++k) {
        if (uniform01(gen) < q[k]) {
            return static_cast<int>(k); // died in year k+1: k full years lived
        }
    }
    return static_cast<int>(q.size()); // unreachable when the vector closes with q = 1
}

std::vector<int> simulate_lifetimes(std::span<const CohortRateVector> cohorts,
                                    std::mt19937_64& gen) {
    std::vector<int> lifetimes;
    lifetimes.reserve(cohorts.size());
    for (const auto& c : cohorts) {
        lifetimes.push_back(simulate_lifetime(c.q, gen));
    }
    return lifetimes;
}

double liability(std::span<const int> lifetimes, const Portfolio& portfolio,
                 double discount_rate) {
    if (lifetimes.size() != portfolio.members.size()) {
        throw ValidationError("lifetime count " + std::to_string(lifetimes.size()) +
                              " does not match portfolio size " +
                              std::to_string(portfolio.members.size()));
    }
    if (!(discount_rate >= 0.0) || !std::isfinite(discount_rate)) {
        throw ValidationError("discount rate must be nonnegative and finite");
    }
    const double v = 1.0 / (1.0 + discount_rate);
    CompensatedSum total;
    for (std::size_t j = 0; j < lifetimes.size(); ++j) {
        if (lifetimes[j] < 0) {
            throw ValidationError("negative lifetime for member '" + portfolio.members[j].id +
                                  "'");
        }
        double pv = 0.0;
        double v_pow = 1.0;
        for (int t = 1; t <= lifetimes[j]; ++t) {
            v_pow *= v;
            pv += v_pow;
        }
        total.add(portfolio.members[j].annuity * pv);
    }
    return total.value();
}

namespace {

// Cohort death probabilities for every distinct member age, indexed by
// age - min_age. A member aged x meets rate (x, first_year) in year one.
struct QTable {
    int min_age = 0;
    std::vector<std::vector<double>> by_age;
};

QTable build_q_table(const MortalitySurface& surface, const std::vector<int>& ages,
                     int first_year, int omega_max) {
    QTable table;
    table.min_age = ages.front();
    table.by_age.resize(static_cast<std::size_t>(ages.back() - ages.front()) + 1);
    for (int age : ages) {
        table.by_age[static_cast<std::size_t>(age - table.min_age)] =
            cohort_view(surface, first_year - age, age, omega_max).q;
    }
    return table;
}

std::vector<int> distinct_ages(const Portfolio& portfolio) {
    std::vector<int> ages;
    ages.reserve(portfolio.members.size());
    for (const auto& m : portfolio.members) {
        ages.push_back(m.age);
    }
    std::sort(ages.begin(), ages.end());
    ages.erase(std::unique(ages.begin(), ages.end()), ages.end());
    return ages;
}

// Present value of 1 paid at the end of years 1..k, for k = 0..max_years.
std::vector<double> cumulative_discount(double rate, int max_years) {
    std::vector<double> cum(static_cast<std::size_t>(max_years) + 1, 0.0);
    const double v = 1.0 / (1.0 + rate);
    double v_pow = 1.0;
    for (int t = 1; t <= max_years; ++t) {
        v_pow *= v;
        cum[static_cast<std::size_t>(t)] = cum[static_cast<std::size_t>(t - 1)] + v_pow;
    }
    return cum;
}

void validate_config(const ValuationConfig& config) {
    if (!(config.discount_rate >= 0.0) || !std::isfinite(config.discount_rate)) {
        throw ValidationError("discount rate must be nonnegative and finite");
    }
    if (config.n_scenarios < 1 || config.n_inner < 1) {
        throw ValidationError("scenario and inner sample counts must be >= 1");
    }
    if (config.replication < 1) {
        throw ValidationError("replication count must be >= 1");
    }
    if (config.omega_max < 1) {
        throw ValidationError("closure age must be >= 1");
    }
    if (config.mode == ValuationMode::Deterministic && config.n_scenarios != 1) {
        throw ValidationError("deterministic valuation runs exactly one scenario; "
                              "set n_scenarios = 1");
    }
    const long long total =
        static_cast<long long>(config.n_scenarios) * static_cast<long long>(config.n_inner);
    if (total < 1000) {
        throw ValidationError("liability statistics need at least 1000 total samples, got " +
                              std::to_string(total));
    }
}

void validate_ages(const Portfolio& portfolio, int omega_max) {
    if (portfolio.members.empty()) {
        throw ValidationError("cannot value an empty portfolio");
    }
    for (const auto& m : portfolio.members) {
        if (m.age < 0 || m.age >= omega_max) {
            throw ValidationError("member '" + m.id + "' aged " + std::to_string(m.age) +
                                  " lies outside [0, " + std::to_string(omega_max) + ")");
        }
        if (!(m.annuity > 0.0) || !std::isfinite(m.annuity)) {
            throw ValidationError("member '" + m.id + "' has a nonpositive annuity");
        }
    }
}

// Everything a worker needs; owned by run_engine for the run's duration.
struct EngineContext {
    const ValuationConfig& config;
    const Portfolio& portfolio;           // already replicated
    const std::vector<int>& ages;         // distinct, sorted
    const std::vector<double>& cum_v;     // discount table
    const QTable* shared_table = nullptr; // deterministic mode
    const LeeCarterParams* params = nullptr; // stochastic mode
    const TrendFit* fit = nullptr;
    int first_year = 0;
    int horizon_year = 0;
    std::vector<double>& samples;
};

QTable scenario_q_table(const EngineContext& ctx, int scenario_index) {
    auto gen = substream(ctx.config.seed, 1, static_cast<std::uint64_t>(scenario_index));
    const TrendScenario scenario = draw_scenario(*ctx.fit, gen);
    const MortalitySurface surface =
        build_surface(*ctx.params, *ctx.fit, scenario, ctx.config.variant, ctx.horizon_year);
    return build_q_table(surface, ctx.ages, ctx.first_year, ctx.config.omega_max);
}

// Fill the flat sample slots [first, last). Slot f is inner draw f % n_inner
// of scenario f / n_inner; each (scenario, inner) pair owns substream
// (seed, 2 + scenario, inner), so any partition yields identical samples.
void run_range(const EngineContext& ctx, long long first, long long last) {
    const int n_inner = ctx.config.n_inner;
    QTable local_table;
    const QTable* table = ctx.shared_table;
    int current_scenario = -1;

    for (long long f = first; f < last;) {
        const int s = static_cast<int>(f / n_inner);
        const int i0 = static_cast<int>(f % n_inner);
        const int i1 = static_cast<int>(std::min<long long>(n_inner, i0 + (last - f)));
        if (!ctx.shared_table && s != current_scenario) {
            local_table = scenario_q_table(ctx, s);
            table = &local_table;
            current_scenario = s;
        }
        for (int i = i0; i < i1; ++i) {
            auto gen = substream(ctx.config.seed, 2 + static_cast<std::uint64_t>(s),
                                 static_cast<std::uint64_t>(i));
            CompensatedSum lambda;
            for (const auto& m : ctx.portfolio.members) {
                const auto& q = table->by_age[static_cast<std::size_t>(m.age - table->min_age)];
                const int k = simulate_lifetime(q, gen);
                lambda.add(m.annuity * ctx.cum_v[static_cast<std::size_t>(k)]);
            }
            ctx.samples[static_cast<std::size_t>(f) + static_cast<std::size_t>(i - i0)] =
                lambda.value();
        }
        f += i1 - i0;
    }
}

ValuationResult run_engine(EngineContext& ctx, int workers) {
    const long long total =
        static_cast<long long>(ctx.config.n_scenarios) * static_cast<long long>(ctx.config.n_inner);

    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) {
        hw = 1;
    }
    long long n_workers = workers > 0 ? workers : static_cast<long long>(hw);
    n_workers = std::min<long long>(n_workers, total);

    if (n_workers <= 1) {
        run_range(ctx, 0, total);
    } else {
        std::vector<std::thread> threads;
        std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n_workers));
        threads.reserve(static_cast<std::size_t>(n_workers));
        for (long long w = 0; w < n_workers; ++w) {
            const long long first = total * w / n_workers;
            const long long last = total * (w + 1) / n_workers;
            threads.emplace_back([&ctx, &errors, w, first, last] {
                try {
                    run_range(ctx, first, last);
                } catch (...) {
                    errors[static_cast<std::size_t>(w)] = std::current_exception();
                }
            });
        }
        for (auto& t : threads) {
            t.join();
        }
        for (const auto& e : errors) {
            if (e) {
                std::rethrow_exception(e);
            }
        }
    }

    ValuationResult result;
    result.n_scenarios = ctx.config.n_scenarios;
    result.n_inner = ctx.config.n_inner;
    result.samples = std::move(ctx.samples);

    result.mean = mean(result.samples);
    result.std_dev = sample_std(result.samples, result.mean);
    result.cv = result.mean != 0.0 ? result.std_dev / result.mean : 0.0;

    std::vector<double> sorted = result.samples;
    std::sort(sorted.begin(), sorted.end());
    for (double p : {0.5, 0.75, 0.95, 0.995}) {
        result.quantiles[p] = quantile_sorted(sorted, p);
    }
    const double half = 1.96 * result.std_dev / std::sqrt(static_cast<double>(total));
    result.ci95_lo = result.mean - half;
    result.ci95_hi = result.mean + half;
    return result;
}

} // namespace

ValuationResult run_valuation(const ValuationConfig& config, const LeeCarterParams& params,
                              const TrendFit& fit, const Portfolio& portfolio, int workers) {
    validate_config(config);
    const Portfolio full = replicate(portfolio, config.replication);
    validate_ages(full, config.omega_max);

    if (config.mode == ValuationMode::Deterministic) {
        if (config.variant != SurfaceVariant::MeanReference) {
            throw ValidationError("deterministic valuation from a fit projects the "
                                  "mean-reference surface; set the variant accordingly or "
                                  "pass a fixed surface");
        }
    } else if (config.variant == SurfaceVariant::MeanReference) {
        throw ValidationError("stochastic valuation needs a scenario-driven variant "
                              "(raw or bias-corrected)");
    }

    const std::vector<int> ages = distinct_ages(full);
    const int first_year = fit.t_M + 1;
    const int horizon_year = fit.t_M + config.omega_max - ages.front();
    const std::vector<double> cum_v =
        cumulative_discount(config.discount_rate, config.omega_max - ages.front());
    std::vector<double> samples(
        static_cast<std::size_t>(config.n_scenarios) * static_cast<std::size_t>(config.n_inner));

    EngineContext ctx{config, full,       ages,         cum_v,  nullptr,
                      &params, &fit,      first_year,   horizon_year, samples};

    std::optional<QTable> fixed_table;
    if (config.mode == ValuationMode::Deterministic) {
        const MortalitySurface surface =
            build_surface(params, fit, std::nullopt, SurfaceVariant::MeanReference, horizon_year);
        fixed_table = build_q_table(surface, ages, first_year, config.omega_max);
        ctx.shared_table = &*fixed_table;
    }
    return run_engine(ctx, workers);
}

ValuationResult run_valuation(const ValuationConfig& config, const MortalitySurface& surface,
                              int first_exposure_year, const Portfolio& portfolio, int workers) {
    validate_config(config);
    if (config.mode != ValuationMode::Deterministic) {
        throw ValidationError("a fixed surface carries no trend scenarios; stochastic "
                              "valuation needs the fit-based overload");
    }
    const Portfolio full = replicate(portfolio, config.replication);
    validate_ages(full, config.omega_max);

    const std::vector<int> ages = distinct_ages(full);
    const std::vector<double> cum_v =
        cumulative_discount(config.discount_rate, config.omega_max - ages.front());
    std::vector<double> samples(
        static_cast<std::size_t>(config.n_scenarios) * static_cast<std::size_t>(config.n_inner));

    const QTable fixed_table =
        build_q_table(surface, ages, first_exposure_year, config.omega_max);

    EngineContext ctx{config,       full, ages, cum_v, &fixed_table,
                      nullptr,      nullptr, first_exposure_year,
                      surface.year_max(), samples};
    return run_engine(ctx, workers);
}

VarianceDecomposition decompose(const ValuationResult& result) {
    if (result.n_scenarios < 2 || result.n_inner < 2) {
        throw ValidationError("variance split needs >= 2 scenarios with >= 2 inner draws each");
    }
    const auto expected = static_cast<std::size_t>(result.n_scenarios) *
                          static_cast<std::size_t>(result.n_inner);
    if (result.samples.size() != expected) {
        throw ValidationError("result samples do not match the scenario grouping");
    }

    std::vector<double> group_means(static_cast<std::size_t>(result.n_scenarios));
    CompensatedSum within_sum;
    for (int s = 0; s < result.n_scenarios; ++s) {
        const auto group = result.scenario_samples(s);
        const double m = mean(group);
        group_means[static_cast<std::size_t>(s)] = m;
        within_sum.add(sample_variance(group, m));
    }
    VarianceDecomposition d;
    d.within = within_sum.value() / static_cast<double>(result.n_scenarios);

    const double means_var = sample_variance(group_means, mean(group_means));
    // Group means carry sampling noise within/n_inner on top of the true
    // between-scenario variance; subtract it so omega is unbiased.
    d.between = std::max(0.0, means_var - d.within / static_cast<double>(result.n_inner));

    const double total = d.between + d.within;
    d.omega = total > 0.0 ? std::clamp(d.between / total, 0.0, 1.0) : 0.0;
    return d;
}

double omega_n(double omega, int n) {
    if (!(omega > 0.0 && omega <= 1.0)) {
        throw ValidationError("omega must lie in (0, 1]");
    }
    if (n < 1) {
        throw ValidationError("replication count must be >= 1");
    }
    return 1.0 / (1.0 + (1.0 / static_cast<double>(n)) * (1.0 / omega - 1.0));
}

double life_expectancy(const MortalitySurface& surface, int age, int generation, int omega_max) {
    const CohortRateVector cohort = cohort_view(surface, generation, age, omega_max);
    double e = 0.0;
    double survival = 1.0;
    for (double q : cohort.q) {
        survival *= 1.0 - q;
        e += survival;
        if (survival == 0.0) {
            break;
        }
    }
    return e;
}

double expectancy_drift(const MortalitySurface& surface, int age, int gen_first, int gen_last,
                        int omega_max) {
    if (gen_last - gen_first + 1 < 3) {
        throw ValidationError("expectancy drift needs at least 3 generations");
    }
    std::vector<double> e;
    e.reserve(static_cast<std::size_t>(gen_last - gen_first) + 1);
    for (int g = gen_first; g <= gen_last; ++g) {
        e.push_back(life_expectancy(surface, age, g, omega_max));
    }
    // Least-squares slope per generation, scaled to months per year.
    return 12.0 * fit_trend(e, gen_first, gen_last).a_hat;
}

double annuity_factor(const MortalitySurface& surface, int age, int generation,
                      double discount_rate, int omega_max) {
    if (!(discount_rate >= 0.0) || !std::isfinite(discount_rate)) {
        throw ValidationError("discount rate must be nonnegative and finite");
    }
    const CohortRateVector cohort = cohort_view(surface, generation, age, omega_max);
    const double v = 1.0 / (1.0 + discount_rate);
    double factor = 0.0;
    double survival = 1.0;
    double v_pow = 1.0;
    for (double q : cohort.q) {
        survival *= 1.0 - q;
        v_pow *= v;
        factor += survival * v_pow;
        if (survival == 0.0) {
            break;
        }
    }
    return factor;
}

} // namespace mortcast

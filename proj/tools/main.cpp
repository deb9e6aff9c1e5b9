// Command-line front end: fit a mortality surface, project the period-index
// trend, run Monte Carlo liability valuations, and tabulate cohort life
// expectancies. Emits CSV/JSON artifacts only; plotting is someone else's job.

#include "mortcast/errors.hpp"
#include "mortcast/leecarter.hpp"
#include "mortcast/rng.hpp"
#include "mortcast/serialize.hpp"
#include "mortcast/stats.hpp"
#include "mortcast/surface.hpp"
#include "mortcast/trend.hpp"
#include "mortcast/valuation.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitValidation = 4;
constexpr int kExitDegeneracy = 5;

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw mortcast::IoError("cannot open '" + path + "' for reading");
    }
    return in;
}

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw mortcast::IoError("cannot open '" + path.string() + "' for writing");
    }
    return out;
}

fs::path ensure_out_dir(const std::string& dir) {
    fs::path p(dir);
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec) {
        throw mortcast::IoError("cannot create output directory '" + dir + "': " + ec.message());
    }
    return p;
}

std::string trimmed(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) {
        return "";
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

// Flat key=value config files, expanded into synthesized flags before the
// parse so required-option checks and precedence behave exactly as if every
// value had been typed on the command line. A key is skipped when its flag
// already appears explicitly, which is what gives flags > file > defaults.
std::vector<std::string> expand_config(std::vector<std::string> args) {
    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            path = args[i + 1];
            break;
        }
        if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
            break;
        }
    }
    if (path.empty()) {
        return args;
    }

    auto in = open_input(path);
    std::vector<std::string> extra;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string entry = trimmed(line);
        if (entry.empty() || entry.front() == '#' || entry.front() == ';') {
            continue;
        }
        const std::string where = path + " line " + std::to_string(line_no);
        if (entry.front() == '[') {
            throw mortcast::ValidationError("config sections are not supported; use flat "
                                            "key=value (" +
                                            where + ")");
        }
        const auto eq = entry.find('=');
        if (eq == std::string::npos) {
            throw mortcast::ValidationError("expected key=value in " + where);
        }
        const std::string key = trimmed(entry.substr(0, eq));
        std::string value = trimmed(entry.substr(eq + 1));
        if (key.empty()) {
            throw mortcast::ValidationError("empty key in " + where);
        }
        if (key == "config") {
            throw mortcast::ValidationError("config files cannot chain (" + where + ")");
        }
        if (value.size() >= 2 && value.front() == value.back() &&
            (value.front() == '"' || value.front() == '\'')) {
            value = value.substr(1, value.size() - 2);
        }
        const std::string flag = "--" + key;
        const bool given = std::any_of(args.begin(), args.end(), [&](const std::string& a) {
            return a == flag || a.rfind(flag + "=", 0) == 0;
        });
        if (!given) {
            extra.push_back(flag);
            extra.push_back(std::move(value));
        }
    }
    args.insert(args.end(), extra.begin(), extra.end());
    return args;
}

mortcast::MortalitySurface load_surface_file(const std::string& path) {
    auto in = open_input(path);
    return mortcast::load_surface(in);
}

mortcast::Portfolio load_portfolio_file(const std::string& path) {
    auto in = open_input(path);
    return mortcast::load_portfolio(in);
}

void write_histogram(const fs::path& path, std::span<const double> samples, std::size_t bins,
                     std::uint64_t seed) {
    auto out = open_output(path);
    out << "# seed = " << seed << "\n";
    out << "bin_lo,bin_hi,count\n";
    char buf[96];
    for (const auto& bin : mortcast::histogram(samples, bins)) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%zu\n", bin.lo, bin.hi, bin.count);
        out << buf;
    }
    if (!out) {
        throw mortcast::IoError("failed writing '" + path.string() + "'");
    }
}

// ---- fit ------------------------------------------------------------------

struct FitOptions {
    std::string surface_path;
    std::string out_dir = ".";
};

int run_fit(const FitOptions& opt) {
    const auto surface = load_surface_file(opt.surface_path);
    const auto params = mortcast::fit_lee_carter(surface);
    const auto trend = mortcast::fit_trend(params);
    const auto poly = mortcast::sigma_t_sq_coefficients(trend);

    const fs::path dir = ensure_out_dir(opt.out_dir);
    mortcast::write_json_file(mortcast::params_to_json(params), (dir / "params.json").string());
    mortcast::write_json_file(mortcast::trend_to_json(trend), (dir / "trend.json").string());

    json report{
        {"surface", opt.surface_path},
        {"ages", {{"min", params.age_min}, {"max", params.age_max}}},
        {"years", {{"min", params.year_min}, {"max", params.year_max}}},
        {"sigma_eps", params.sigma_eps},
        {"a_hat", trend.a_hat},
        {"b_hat", trend.b_hat},
        {"sigma_gamma", trend.sigma_gamma},
        {"k_bar", trend.k_bar},
        {"covariance",
         {{"var_a", trend.cov.var_a}, {"cov_ab", trend.cov.cov_ab}, {"var_b", trend.cov.var_b}}},
        {"sigma_t_sq", {{"quadratic", poly[0]}, {"linear", poly[1]}, {"constant", poly[2]}}},
    };
    mortcast::write_json_file(report, (dir / "fit_report.json").string());

    std::cout << "fit: years [" << params.year_min << ", " << params.year_max << "], a_hat = "
              << trend.a_hat << ", b_hat = " << trend.b_hat
              << ", sigma_gamma = " << trend.sigma_gamma << "\n";
    return 0;
}

// ---- project ---------------------------------------------------------------

struct ProjectOptions {
    std::string params_path;
    std::string trend_path;
    int horizon = 0;
    std::string variant = "mean_reference";
    int n_paths = 0;
    double confidence = 0.95;
    std::uint64_t seed = 0;
    std::string out_dir = ".";
};

int run_project(const ProjectOptions& opt) {
    const auto params = mortcast::params_from_json(mortcast::read_json_file(opt.params_path));
    const auto trend = mortcast::trend_from_json(mortcast::read_json_file(opt.trend_path));
    const auto variant = mortcast::variant_from_string(opt.variant);

    const auto fan = mortcast::fan_chart(trend, opt.horizon, opt.confidence);
    const fs::path dir = ensure_out_dir(opt.out_dir);
    {
        auto out = open_output(dir / "fan.csv");
        mortcast::save_fan_chart(fan, out);
    }

    if (opt.n_paths > 0) {
        auto out = open_output(dir / "paths.csv");
        out << "# seed = " << opt.seed << "\n";
        out << "path,tau,year,k_star\n";
        char buf[96];
        const int tau_first = trend.T() + 1;
        const int tau_last = trend.tau_of_year(opt.horizon);
        for (int s = 0; s < opt.n_paths; ++s) {
            auto gen = mortcast::substream(opt.seed, 1, static_cast<std::uint64_t>(s));
            const auto scenario = mortcast::draw_scenario(trend, gen);
            const auto k = mortcast::project_kappa(scenario, tau_first, tau_last);
            for (int tau = tau_first; tau <= tau_last; ++tau) {
                std::snprintf(buf, sizeof(buf), "%d,%d,%d,%.17g\n", s, tau,
                              trend.t_m + tau - 1, k[static_cast<std::size_t>(tau - tau_first)]);
                out << buf;
            }
        }
        if (!out) {
            throw mortcast::IoError("failed writing '" + (dir / "paths.csv").string() + "'");
        }
    }

    // One full projected surface: deterministic for the mean-reference
    // variant, otherwise built from the scenario-0 draw.
    std::optional<mortcast::TrendScenario> scenario;
    if (variant != mortcast::SurfaceVariant::MeanReference) {
        auto gen = mortcast::substream(opt.seed, 1, 0);
        scenario = mortcast::draw_scenario(trend, gen);
    }
    const auto projected =
        mortcast::build_surface(params, trend, scenario, variant, opt.horizon);
    {
        auto out = open_output(dir / "surface.csv");
        if (scenario) {
            out << "# seed = " << opt.seed << "\n";
        }
        mortcast::save_surface(projected, out);
    }

    std::cout << "project: fan chart to " << opt.horizon << " at " << opt.confidence * 100.0
              << "% confidence, " << opt.n_paths << " sampled paths\n";
    return 0;
}

// ---- simulate ---------------------------------------------------------------

struct SimulateOptions {
    std::string surface_path;
    std::string portfolio_path;
    std::string mode = "both";
    double discount_rate = 0.025;
    int n_scenarios = 200;
    int n_inner = 100;
    std::uint64_t seed = 0;
    int omega_max = 120;
    int replication = 1;
    std::string variant = "raw";
    int workers = 0;
    std::size_t bins = 40;
    std::vector<int> sweep;
    std::string out_dir = ".";
};

mortcast::ValuationConfig deterministic_config(const SimulateOptions& opt) {
    mortcast::ValuationConfig cfg;
    cfg.mode = mortcast::ValuationMode::Deterministic;
    cfg.discount_rate = opt.discount_rate;
    cfg.n_scenarios = 1;
    cfg.n_inner = opt.n_scenarios * opt.n_inner; // same total sample count
    cfg.seed = opt.seed;
    cfg.omega_max = opt.omega_max;
    cfg.replication = opt.replication;
    cfg.variant = mortcast::SurfaceVariant::MeanReference;
    return cfg;
}

mortcast::ValuationConfig stochastic_config(const SimulateOptions& opt) {
    mortcast::ValuationConfig cfg;
    cfg.mode = mortcast::ValuationMode::Stochastic;
    cfg.discount_rate = opt.discount_rate;
    cfg.n_scenarios = opt.n_scenarios;
    cfg.n_inner = opt.n_inner;
    cfg.seed = opt.seed;
    cfg.omega_max = opt.omega_max;
    cfg.replication = opt.replication;
    cfg.variant = mortcast::variant_from_string(opt.variant);
    return cfg;
}

int run_simulate(const SimulateOptions& opt) {
    if (opt.mode != "deterministic" && opt.mode != "stochastic" && opt.mode != "both") {
        throw mortcast::ValidationError("mode must be deterministic, stochastic or both");
    }
    const auto surface = load_surface_file(opt.surface_path);
    const auto params = mortcast::fit_lee_carter(surface);
    const auto trend = mortcast::fit_trend(params);
    const auto portfolio = load_portfolio_file(opt.portfolio_path);

    const fs::path dir = ensure_out_dir(opt.out_dir);
    const bool want_det = opt.mode != "stochastic";
    const bool want_sto = opt.mode != "deterministic";

    std::optional<mortcast::ValuationResult> det;
    std::optional<mortcast::ValuationResult> sto;
    std::optional<mortcast::VarianceDecomposition> split;

    if (want_det) {
        const auto cfg = deterministic_config(opt);
        det = mortcast::run_valuation(cfg, params, trend, portfolio, opt.workers);
        mortcast::write_json_file(mortcast::result_to_json(cfg, *det),
                                  (dir / "result_deterministic.json").string());
        write_histogram(dir / "histogram_deterministic.csv", det->samples, opt.bins, opt.seed);
    }
    if (want_sto) {
        const auto cfg = stochastic_config(opt);
        sto = mortcast::run_valuation(cfg, params, trend, portfolio, opt.workers);
        if (cfg.n_scenarios >= 2 && cfg.n_inner >= 2) {
            split = mortcast::decompose(*sto);
        }
        mortcast::write_json_file(mortcast::result_to_json(cfg, *sto, split),
                                  (dir / "result_stochastic.json").string());
        write_histogram(dir / "histogram_stochastic.csv", sto->samples, opt.bins, opt.seed);
    }

    if (det && sto) {
        const double q75_det = det->quantiles.at(0.75);
        const double q75_sto = sto->quantiles.at(0.75);
        json comparison{
            {"cv",
             {{"deterministic", det->cv},
              {"stochastic", sto->cv},
              {"ratio", det->cv > 0.0 ? sto->cv / det->cv : 0.0}}},
            {"mean", {{"deterministic", det->mean}, {"stochastic", sto->mean}}},
            {"quantile_75",
             {{"deterministic", q75_det},
              {"stochastic", q75_sto},
              {"uplift_pct", q75_det != 0.0 ? 100.0 * (q75_sto - q75_det) / q75_det : 0.0}}},
            {"seed", opt.seed},
        };
        mortcast::write_json_file(comparison, (dir / "comparison.json").string());
    }

    if (!opt.sweep.empty()) {
        if (!want_sto) {
            throw mortcast::ValidationError("a replication sweep needs stochastic runs");
        }
        std::vector<int> ns = opt.sweep;
        if (std::find(ns.begin(), ns.end(), 1) == ns.end()) {
            ns.insert(ns.begin(), 1); // the law is anchored at the base portfolio
        }
        std::sort(ns.begin(), ns.end());
        double omega_base = 0.0;
        json table = nlohmann::json::array();
        for (int n : ns) {
            SimulateOptions point = opt;
            point.replication = n;
            const auto cfg = stochastic_config(point);
            const auto result = mortcast::run_valuation(cfg, params, trend, portfolio,
                                                        opt.workers);
            const auto d = mortcast::decompose(result);
            if (n == 1) {
                omega_base = d.omega;
            }
            json row{{"n", n}, {"cv", result.cv}, {"omega_measured", d.omega}};
            if (omega_base > 0.0) {
                row["omega_predicted"] = mortcast::omega_n(omega_base, n);
            }
            table.push_back(std::move(row));
        }
        mortcast::write_json_file(json{{"seed", opt.seed}, {"points", table}},
                                  (dir / "sweep.json").string());
    }

    if (det) {
        std::cout << "deterministic: mean = " << det->mean << ", cv = " << det->cv << "\n";
    }
    if (sto) {
        std::cout << "stochastic:    mean = " << sto->mean << ", cv = " << sto->cv;
        if (split) {
            std::cout << ", omega = " << split->omega;
        }
        std::cout << "\n";
    }
    return 0;
}

// ---- expectancy --------------------------------------------------------------

struct ExpectancyOptions {
    std::string surface_path;
    std::string surface2_path;
    std::string params_path;
    std::string trend_path;
    int horizon = 0;
    int age = 60;
    int gen_first = 0;
    int gen_last = 0;
    int omega_max = 120;
    std::string out_dir = ".";
};

mortcast::MortalitySurface expectancy_surface(const ExpectancyOptions& opt) {
    if (!opt.surface_path.empty()) {
        return load_surface_file(opt.surface_path);
    }
    if (opt.params_path.empty() || opt.trend_path.empty() || opt.horizon == 0) {
        throw mortcast::ValidationError(
            "expectancy needs either --surface or --params/--trend with --horizon");
    }
    const auto params = mortcast::params_from_json(mortcast::read_json_file(opt.params_path));
    const auto trend = mortcast::trend_from_json(mortcast::read_json_file(opt.trend_path));
    return mortcast::build_surface(params, trend, std::nullopt,
                                   mortcast::SurfaceVariant::MeanReference, opt.horizon);
}

void write_expectancy_csv(const fs::path& path, const mortcast::MortalitySurface& surface,
                          const ExpectancyOptions& opt) {
    auto out = open_output(path);
    out << "generation,e\n";
    char buf[64];
    for (int g = opt.gen_first; g <= opt.gen_last; ++g) {
        const double e = mortcast::life_expectancy(surface, opt.age, g, opt.omega_max);
        std::snprintf(buf, sizeof(buf), "%d,%.17g\n", g, e);
        out << buf;
    }
    if (!out) {
        throw mortcast::IoError("failed writing '" + path.string() + "'");
    }
}

int run_expectancy(const ExpectancyOptions& opt) {
    if (opt.gen_last < opt.gen_first) {
        throw mortcast::ValidationError("generation range is empty");
    }
    const auto surface = expectancy_surface(opt);
    const double drift = mortcast::expectancy_drift(surface, opt.age, opt.gen_first,
                                                    opt.gen_last, opt.omega_max);

    const fs::path dir = ensure_out_dir(opt.out_dir);
    write_expectancy_csv(dir / "expectancy.csv", surface, opt);

    json report{{"age", opt.age},
                {"generations", {{"first", opt.gen_first}, {"last", opt.gen_last}}},
                {"drift_months_per_year", drift}};

    if (!opt.surface2_path.empty()) {
        const auto surface2 = load_surface_file(opt.surface2_path);
        const double drift2 = mortcast::expectancy_drift(surface2, opt.age, opt.gen_first,
                                                         opt.gen_last, opt.omega_max);
        write_expectancy_csv(dir / "expectancy2.csv", surface2, opt);
        report["drift2_months_per_year"] = drift2;
        // Both relative-gap conventions: the difference against either base.
        if (drift != 0.0) {
            report["gap_vs_first"] = (drift2 - drift) / drift;
        }
        if (drift2 != 0.0) {
            report["gap_vs_second"] = (drift2 - drift) / drift2;
        }
    }
    mortcast::write_json_file(report, (dir / "expectancy.json").string());

    std::cout << "expectancy drift at age " << opt.age << ": " << drift << " months/year\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mortality trend-risk toolkit: Lee-Carter fit, trend projection, "
                 "annuity portfolio Monte Carlo"};
    app.require_subcommand(1);

    // --config is handled by expand_config before the parse; the option is
    // registered so it is accepted and documented.
    std::string config_file;
    const char* config_help = "Flat key=value config file; explicit flags take precedence";

    FitOptions fit_opt;
    auto* fit = app.add_subcommand("fit", "Fit the log-bilinear model and its time trend");
    fit->add_option("--config", config_file, config_help);
    fit->add_option("--surface", fit_opt.surface_path, "Mortality surface CSV (age,year,mu)")
        ->required();
    fit->add_option("--out-dir", fit_opt.out_dir, "Output directory");

    ProjectOptions project_opt;
    auto* project =
        app.add_subcommand("project", "Project the trend corridor and sampled surfaces");
    project->add_option("--config", config_file, config_help);
    project->add_option("--params", project_opt.params_path, "Fitted parameters JSON")
        ->required();
    project->add_option("--trend", project_opt.trend_path, "Fitted trend JSON")->required();
    project->add_option("--horizon", project_opt.horizon, "Last projected calendar year")
        ->required();
    project->add_option("--variant", project_opt.variant,
                        "Surface variant: raw, bias_corrected or mean_reference");
    project->add_option("--paths", project_opt.n_paths, "Number of sampled k trajectories");
    project->add_option("--confidence", project_opt.confidence, "Corridor confidence level");
    project->add_option("--seed", project_opt.seed, "Master random seed");
    project->add_option("--out-dir", project_opt.out_dir, "Output directory");

    SimulateOptions sim_opt;
    auto* simulate =
        app.add_subcommand("simulate", "Monte Carlo liability valuation of a portfolio");
    simulate->add_option("--config", config_file, config_help);
    simulate->add_option("--surface", sim_opt.surface_path, "Mortality surface CSV")->required();
    simulate->add_option("--portfolio", sim_opt.portfolio_path, "Portfolio CSV (id,age,annuity)")
        ->required();
    simulate->add_option("--mode", sim_opt.mode, "deterministic, stochastic or both");
    simulate->add_option("--discount-rate", sim_opt.discount_rate, "Annual discount rate");
    simulate->add_option("--n-scenarios", sim_opt.n_scenarios, "Outer trend scenarios");
    simulate->add_option("--n-inner", sim_opt.n_inner, "Lifetime simulations per scenario");
    simulate->add_option("--seed", sim_opt.seed, "Master random seed");
    simulate->add_option("--omega-max", sim_opt.omega_max, "Closure age");
    simulate->add_option("--replication", sim_opt.replication, "Portfolio replication factor");
    simulate->add_option("--variant", sim_opt.variant,
                         "Stochastic surface variant: raw or bias_corrected");
    simulate->add_option("--workers", sim_opt.workers, "Worker threads (0 = hardware)");
    simulate->add_option("--bins", sim_opt.bins, "Histogram bin count");
    simulate->add_option("--sweep", sim_opt.sweep, "Replication sweep, e.g. 1,10,30")
        ->delimiter(',');
    simulate->add_option("--out-dir", sim_opt.out_dir, "Output directory");

    ExpectancyOptions exp_opt;
    auto* expectancy =
        app.add_subcommand("expectancy", "Cohort life expectancies and their drift");
    expectancy->add_option("--config", config_file, config_help);
    expectancy->add_option("--surface", exp_opt.surface_path, "Projected surface CSV");
    expectancy->add_option("--surface2", exp_opt.surface2_path,
                           "Second surface for drift comparison");
    expectancy->add_option("--params", exp_opt.params_path, "Fitted parameters JSON");
    expectancy->add_option("--trend", exp_opt.trend_path, "Fitted trend JSON");
    expectancy->add_option("--horizon", exp_opt.horizon,
                           "Projection horizon when building from a fit");
    expectancy->add_option("--age", exp_opt.age, "Age the expectancy is taken at");
    expectancy->add_option("--gen-first", exp_opt.gen_first, "First birth generation")
        ->required();
    expectancy->add_option("--gen-last", exp_opt.gen_last, "Last birth generation")->required();
    expectancy->add_option("--omega-max", exp_opt.omega_max, "Closure age");
    expectancy->add_option("--out-dir", exp_opt.out_dir, "Output directory");

    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        args = expand_config(std::move(args));
    } catch (const mortcast::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const mortcast::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }

    try {
        std::reverse(args.begin(), args.end()); // CLI11's vector parse pops from the back
        app.parse(std::move(args));
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (fit->parsed()) {
            return run_fit(fit_opt);
        }
        if (project->parsed()) {
            return run_project(project_opt);
        }
        if (simulate->parsed()) {
            return run_simulate(sim_opt);
        }
        if (expectancy->parsed()) {
            return run_expectancy(exp_opt);
        }
        std::cerr << "error: no command selected\n";
        return kExitUsage;
    } catch (const mortcast::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const mortcast::DegeneracyError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDegeneracy;
    } catch (const mortcast::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

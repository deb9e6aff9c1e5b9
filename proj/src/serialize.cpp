#include "mortcast/serialize.hpp"

#include "mortcast/errors.hpp"

#include <cstdio>
#include <fstream>

namespace mortcast {

std::string to_string(SurfaceVariant variant) {
    switch (variant) {
    case SurfaceVariant::Raw:
        return "raw";
    case SurfaceVariant::BiasCorrected:
        return "bias_corrected";
    case SurfaceVariant::MeanReference:
        return "mean_reference";
    }
    throw ValidationError("unknown surface variant");
}

SurfaceVariant variant_from_string(const std::string& name) {
    if (name == "raw") {
        return SurfaceVariant::Raw;
    }
    if (name == "bias_corrected") {
        return SurfaceVariant::BiasCorrected;
    }
    if (name == "mean_reference") {
        return SurfaceVariant::MeanReference;
    }
    throw ValidationError("unknown surface variant '" + name +
                          "' (expected raw, bias_corrected or mean_reference)");
}

std::string to_string(ValuationMode mode) {
    switch (mode) {
    case ValuationMode::Deterministic:
        return "deterministic";
    case ValuationMode::Stochastic:
        return "stochastic";
    }
    throw ValidationError("unknown valuation mode");
}

ValuationMode mode_from_string(const std::string& name) {
    if (name == "deterministic") {
        return ValuationMode::Deterministic;
    }
    if (name == "stochastic") {
        return ValuationMode::Stochastic;
    }
    throw ValidationError("unknown valuation mode '" + name +
                          "' (expected deterministic or stochastic)");
}

nlohmann::json params_to_json(const LeeCarterParams& params) {
    return nlohmann::json{
        {"alpha", params.alpha},
        {"beta", params.beta},
        {"kappa", params.kappa},
        {"sigma_eps", params.sigma_eps},
        {"degenerate", params.degenerate},
        {"ages", {{"min", params.age_min}, {"max", params.age_max}}},
        {"years", {{"min", params.year_min}, {"max", params.year_max}}},
    };
}

LeeCarterParams params_from_json(const nlohmann::json& j) {
    LeeCarterParams p;
    try {
        p.alpha = j.at("alpha").get<std::vector<double>>();
        p.beta = j.at("beta").get<std::vector<double>>();
        p.kappa = j.at("kappa").get<std::vector<double>>();
        p.sigma_eps = j.at("sigma_eps").get<double>();
        p.degenerate = j.at("degenerate").get<bool>();
        p.age_min = j.at("ages").at("min").get<int>();
        p.age_max = j.at("ages").at("max").get<int>();
        p.year_min = j.at("years").at("min").get<int>();
        p.year_max = j.at("years").at("max").get<int>();
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed parameter JSON: ") + e.what());
    }
    if (p.age_max <= p.age_min || p.year_max <= p.year_min) {
        throw ValidationError("parameter JSON: degenerate age or year range");
    }
    const auto n_ages = static_cast<std::size_t>(p.n_ages());
    const auto n_years = static_cast<std::size_t>(p.n_years());
    if (p.alpha.size() != n_ages || p.beta.size() != n_ages || p.kappa.size() != n_years) {
        throw ValidationError("parameter JSON: vector lengths do not match the ranges");
    }
    return p;
}

nlohmann::json trend_to_json(const TrendFit& fit) {
    return nlohmann::json{
        {"a_hat", fit.a_hat},       {"b_hat", fit.b_hat}, {"sigma_gamma", fit.sigma_gamma},
        {"t_m", fit.t_m},           {"t_M", fit.t_M},
    };
}

TrendFit trend_from_json(const nlohmann::json& j) {
    try {
        return make_trend_fit(j.at("a_hat").get<double>(), j.at("b_hat").get<double>(),
                              j.at("sigma_gamma").get<double>(), j.at("t_m").get<int>(),
                              j.at("t_M").get<int>());
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed trend JSON: ") + e.what());
    }
}

namespace {

std::string quantile_key(double p) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", p);
    return buf;
}

} // namespace

nlohmann::json result_to_json(const ValuationConfig& config, const ValuationResult& result,
                              const std::optional<VarianceDecomposition>& split) {
    nlohmann::json quantiles = nlohmann::json::object();
    for (const auto& [p, value] : result.quantiles) {
        quantiles[quantile_key(p)] = value;
    }

    nlohmann::json j{
        {"config",
         {{"mode", to_string(config.mode)},
          {"discount_rate", config.discount_rate},
          {"n_scenarios", config.n_scenarios},
          {"n_inner", config.n_inner},
          {"seed", config.seed},
          {"omega_max", config.omega_max},
          {"replication", config.replication},
          {"variant", to_string(config.variant)}}},
        {"n_samples", result.samples.size()},
        {"mean", result.mean},
        {"std", result.std_dev},
        {"cv", result.cv},
        {"quantiles", quantiles},
        {"ci95", {{"lo", result.ci95_lo}, {"hi", result.ci95_hi}}},
    };

    if (split) {
        j["variance"] = {{"between", split->between},
                         {"within", split->within},
                         {"omega", split->omega}};
        if (split->omega > 0.0) {
            nlohmann::json table = nlohmann::json::array();
            for (int n : {1, 2, 5, 10, 20, 30, 50, 100}) {
                table.push_back({{"n", n}, {"omega", omega_n(split->omega, n)}});
            }
            j["omega_n"] = table;
        }
    }
    return j;
}

void write_json_file(const nlohmann::json& j, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open '" + path + "' for writing");
    }
    out << j.dump(2) << '\n';
    if (!out) {
        throw IoError("failed writing '" + path + "'");
    }
}

nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open '" + path + "' for reading");
    }
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError("invalid JSON in '" + path + "': " + e.what());
    }
}

} // namespace mortcast

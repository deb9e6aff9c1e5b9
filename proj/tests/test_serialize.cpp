#include "helpers.hpp"
#include "mortcast/errors.hpp"
#include "mortcast/rng.hpp"
#include "mortcast/serialize.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

using namespace mortcast;

namespace {

std::filesystem::path temp_file(const std::string& stem) {
    return std::filesystem::temp_directory_path() / (stem + "_" + std::to_string(::getpid()) +
                                                     ".json");
}

} // namespace

TEST_CASE("enum names round-trip and reject unknown values") {
    CHECK(to_string(SurfaceVariant::Raw) == "raw");
    CHECK(to_string(SurfaceVariant::BiasCorrected) == "bias_corrected");
    CHECK(to_string(SurfaceVariant::MeanReference) == "mean_reference");
    CHECK(variant_from_string("raw") == SurfaceVariant::Raw);
    CHECK(variant_from_string("bias_corrected") == SurfaceVariant::BiasCorrected);
    CHECK(variant_from_string("mean_reference") == SurfaceVariant::MeanReference);
    CHECK_THROWS_AS(variant_from_string("RAW"), ValidationError);

    CHECK(to_string(ValuationMode::Deterministic) == "deterministic");
    CHECK(to_string(ValuationMode::Stochastic) == "stochastic");
    CHECK(mode_from_string("stochastic") == ValuationMode::Stochastic);
    CHECK_THROWS_AS(mode_from_string("bogus"), ValidationError);
}

TEST_CASE("decomposition parameters round-trip bit-exactly through JSON") {
    std::mt19937_64 gen(61);
    const auto spec = testutil::random_rank1(gen, 6, 10);
    const auto surface = testutil::rank1_surface(spec.alpha, spec.beta, spec.kappa, 55, 1985);
    const auto params = fit_lee_carter(surface);

    const auto j = params_to_json(params);
    const auto back = params_from_json(j);

    CHECK(back.age_min == params.age_min);
    CHECK(back.age_max == params.age_max);
    CHECK(back.year_min == params.year_min);
    CHECK(back.year_max == params.year_max);
    CHECK(back.degenerate == params.degenerate);
    CHECK(back.sigma_eps == params.sigma_eps);
    REQUIRE(back.alpha.size() == params.alpha.size());
    for (std::size_t i = 0; i < params.alpha.size(); ++i) {
        CHECK(back.alpha[i] == params.alpha[i]);
        CHECK(back.beta[i] == params.beta[i]);
    }
    for (std::size_t j2 = 0; j2 < params.kappa.size(); ++j2) {
        CHECK(back.kappa[j2] == params.kappa[j2]);
    }
}

TEST_CASE("malformed parameter documents are rejected") {
    const auto good = [] {
        std::mt19937_64 gen(62);
        const auto spec = testutil::random_rank1(gen, 3, 4);
        const auto surface = testutil::rank1_surface(spec.alpha, spec.beta, spec.kappa, 70, 2010);
        return params_to_json(fit_lee_carter(surface));
    }();

    auto missing = good;
    missing.erase("beta");
    CHECK_THROWS_AS(params_from_json(missing), ValidationError);

    auto short_beta = good;
    short_beta["beta"].erase(0);
    CHECK_THROWS_AS(params_from_json(short_beta), ValidationError);

    auto bad_range = good;
    bad_range["ages"]["max"] = bad_range["ages"]["min"];
    CHECK_THROWS_AS(params_from_json(bad_range), ValidationError);

    auto wrong_type = good;
    wrong_type["kappa"] = "not an array";
    CHECK_THROWS_AS(params_from_json(wrong_type), ValidationError);
}

TEST_CASE("trend fit JSON reconstructs the derived fields") {
    const auto fit = make_trend_fit(-2.05775, 49.38604, 3.98227882, 1959, 2005);
    const auto j = trend_to_json(fit);
    const auto back = trend_from_json(j);

    CHECK(back.a_hat == fit.a_hat);
    CHECK(back.b_hat == fit.b_hat);
    CHECK(back.sigma_gamma == fit.sigma_gamma);
    CHECK(back.t_m == fit.t_m);
    CHECK(back.t_M == fit.t_M);
    CHECK(back.k_bar == fit.k_bar);
    CHECK(back.cov.var_a == fit.cov.var_a);
    CHECK(back.cov.cov_ab == fit.cov.cov_ab);
    CHECK(back.cov.var_b == fit.cov.var_b);

    auto bad = j;
    bad["t_M"] = bad["t_m"]; // T = 1 < 3
    CHECK_THROWS_AS(trend_from_json(bad), ValidationError);
}

TEST_CASE("valuation result document carries the expected fields") {
    ValuationResult result;
    result.samples = {1.0, 2.0, 3.0, 5.0, 7.0, 9.0};
    result.n_scenarios = 2;
    result.n_inner = 3;
    result.mean = 4.5;
    result.std_dev = 3.08;
    result.cv = 0.684;
    result.quantiles = {{0.5, 4.0}, {0.75, 6.5}, {0.95, 8.5}, {0.995, 8.95}};
    result.ci95_lo = 2.0;
    result.ci95_hi = 7.0;

    ValuationConfig config;
    config.mode = ValuationMode::Stochastic;
    config.n_scenarios = 2;
    config.n_inner = 3;
    config.seed = 42;
    config.variant = SurfaceVariant::Raw;

    SECTION("without decomposition") {
        const auto j = result_to_json(config, result);
        CHECK(j["config"]["mode"] == "stochastic");
        CHECK(j["config"]["variant"] == "raw");
        CHECK(j["config"]["seed"] == 42);
        CHECK(j["n_samples"] == 6);
        CHECK(j["mean"] == 4.5);
        CHECK(j["quantiles"]["0.75"] == 6.5);
        CHECK(j["ci95"]["lo"] == 2.0);
        CHECK_FALSE(j.contains("variance"));
        CHECK_FALSE(j.contains("omega_n"));
    }

    SECTION("with decomposition") {
        const auto split = decompose(result);
        const auto j = result_to_json(config, result, split);
        CHECK(j.contains("variance"));
        CHECK(j["variance"]["omega"] == split.omega);
        REQUIRE(j.contains("omega_n"));
        CHECK(j["omega_n"][0]["n"] == 1);
        CHECK(j["omega_n"][0]["omega"] == split.omega);
    }

    SECTION("config echo never includes a worker count") {
        const auto dump = result_to_json(config, result).dump();
        CHECK(dump.find("worker") == std::string::npos);
    }
}

TEST_CASE("JSON file IO") {
    const auto path = temp_file("mortcast_serialize");
    const nlohmann::json doc = {{"alpha", {1.0, 2.0}}, {"name", "x"}};
    write_json_file(doc, path.string());

    SECTION("round-trip") {
        const auto back = read_json_file(path.string());
        CHECK(back == doc);
    }

    SECTION("written form is indented and newline-terminated") {
        std::ifstream in(path);
        std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        CHECK(text.back() == '\n');
        CHECK(text.find("  \"alpha\"") != std::string::npos);
    }

    SECTION("missing file is an IO error") {
        CHECK_THROWS_AS(read_json_file("/nonexistent/dir/file.json"), IoError);
    }

    SECTION("invalid JSON is a validation error") {
        const auto bad = temp_file("mortcast_bad");
        std::ofstream out(bad);
        out << "{ not json";
        out.close();
        CHECK_THROWS_AS(read_json_file(bad.string()), ValidationError);
        std::filesystem::remove(bad);
    }

    std::filesystem::remove(path);
}

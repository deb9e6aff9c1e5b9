#pragma once

#include "mortcast/leecarter.hpp"
#include "mortcast/trend.hpp"
#include "mortcast/valuation.hpp"

#include <json.hpp>

#include <optional>
#include <string>

namespace mortcast {

std::string to_string(SurfaceVariant variant);
SurfaceVariant variant_from_string(const std::string& name);

std::string to_string(ValuationMode mode);
ValuationMode mode_from_string(const std::string& name);

/// {alpha, beta, kappa, sigma_eps, degenerate, ages{min,max}, years{min,max}}
nlohmann::json params_to_json(const LeeCarterParams& params);
LeeCarterParams params_from_json(const nlohmann::json& j);

/// {a_hat, b_hat, sigma_gamma, t_m, t_M}; the derived fields (k_bar, cov)
/// are reconstructed on load.
nlohmann::json trend_to_json(const TrendFit& fit);
TrendFit trend_from_json(const nlohmann::json& j);

/// Config echo plus distribution statistics; omega and the omega_n
/// projection table are included when a decomposition is supplied.
/// Samples themselves are not serialized (histograms cover plotting).
nlohmann::json result_to_json(const ValuationConfig& config, const ValuationResult& result,
                              const std::optional<VarianceDecomposition>& split = std::nullopt);

/// Write with 2-space indentation and a trailing newline; content depends
/// only on the document, so identical runs give identical bytes.
void write_json_file(const nlohmann::json& j, const std::string& path);
nlohmann::json read_json_file(const std::string& path);

} // namespace mortcast

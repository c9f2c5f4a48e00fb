#pragma once

#include <nlohmann/json.hpp>
#include <string>

#include "statmanifold/inference.hpp"

namespace statmanifold {

using nlohmann::json;

inline constexpr const char* kEngineVersion = "statmanifold 1.0.0";
inline constexpr int kSchemaVersion = 1;

// Family spec format:
//   {"schema": 1, "kind": "gaussian" | "gaussian_fixed_sigma" | "poisson" |
//    "bernoulli" | "categorical" | "mixture" | "exponential_family" |
//    "mixture_family", ...kind-specific fields}
// Custom families give carrier/statistics as expression strings over x
// and a support descriptor; "domain" entries accept numbers or the
// strings "inf"/"-inf".
ParametricFamily family_from_json(const json& spec);
ParametricFamily load_family(const std::string& path);

// Curved model spec:
//   {"schema": 1, "ambient": {family spec}, "model_dim": m,
//    "u_domain": [[lo,hi],...], "embedding": ["expr over u1..um", ...]}
CurvedModelSpec curved_model_from_json(const json& spec);
CurvedModelSpec load_curved_model(const std::string& path);

json to_json(const VectorXd& v);
json to_json(const MatrixXd& m);
json to_json(const Tensor3& t);

// every report embeds the resolved config and engine version
json report_header(const std::string& command, json resolved_config);

}  // namespace statmanifold

#pragma once

#include "json.hpp"
#include <string>

#include "hsl/asymptotics.hpp"
#include "hsl/barriers.hpp"
#include "hsl/hardy.hpp"
#include "hsl/params.hpp"
#include "hsl/radial_ode.hpp"
#include "hsl/seeds.hpp"

namespace hsl::io {

using json = nlohmann::json;

constexpr int kSchemaVersion = 1;

/// %.17g; every CSV number goes through here so artifacts are byte-stable.
std::string fmt(double x);

/// Pretty JSON with a trailing newline.
std::string dump(const json& j);
void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

json to_json(const Problem& problem);
Problem problem_from_json(const json& j);

json to_json(const Exponents& e);
json to_json(const DeadCoreCoefficients& c);

json to_json(const PicardConfig& c);
PicardConfig picard_from_json(const json& j);
json to_json(const IntegrationOptions& o);
IntegrationOptions integration_from_json(const json& j);

/// Kind, parameters, profile arrays, validity radius and certificate.
json to_json(const Seed& seed);
/// The evaluator is not restored; states come from the stored profile.
Seed seed_from_json(const json& j);

/// Columns r, u, u_prime, delta.
std::string table_csv(const SolutionTable& table);
/// Problem and events.
json table_sidecar(const SolutionTable& table);
SolutionTable table_from_csv(const std::string& csv, const json& sidecar);

json to_json(const BoundaryFit& fit);
json to_json(const SlopeCheck& s);
json to_json(const AlphaCheck& a);

/// Columns n, value.
std::string history_csv(const HardyEstimate& est);
json to_json(const HardyEstimate& est);

json to_json(const BarrierProfile& b);
/// Columns delta, lower, upper on the lower profile's samples.
std::string pair_csv(const BarrierPair& pair);
/// Columns sweep, increment.
std::string trace_csv(const IterationResult& res);
json to_json(const IterationResult& res);

}  // namespace hsl::io

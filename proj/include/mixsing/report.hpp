#pragma once

#include "mixsing/diagnostics.hpp"
#include "mixsing/eigen_solver.hpp"
#include "mixsing/grid.hpp"
#include "mixsing/multiplicity_solver.hpp"
#include "mixsing/singular_solver.hpp"

#include <json.hpp>

#include <filesystem>
#include <string_view>
#include <vector>

namespace mixsing {

// JSON views of solver results. Fields appear as summaries (norms and
// extremes); the nodal values go to CSV. Key order is sorted, so equal
// inputs always serialize to identical bytes.

nlohmann::json to_json(const Domain& d);
/// {l2, linf, h1_semi, min, max}
nlohmann::json field_summary(const Field& f);
nlohmann::json to_json(const ResidualReport& r);
nlohmann::json to_json(const EigenPair& e);
nlohmann::json to_json(const PureSingularResult& r);
nlohmann::json to_json(const SandwichCertificate& c);
nlohmann::json to_json(const MountainPassParams& p);
nlohmann::json to_json(const RimCheck& r);
nlohmann::json to_json(const TwoSolutions& t);

/// Two-space indented dump with a trailing newline.
void write_json(const std::filesystem::path& path, const nlohmann::json& j);
void write_field(const std::filesystem::path& path, const Field& f);
void write_eps_trace(const std::filesystem::path& path, const std::vector<EpsTraceEntry>& trace);
void write_continuation_trace(const std::filesystem::path& path, const std::vector<ContinuationStep>& trace);

}  // namespace mixsing

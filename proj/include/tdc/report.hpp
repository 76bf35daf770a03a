#pragma once

#include <json.hpp>

#include "tdc/refinement.hpp"
#include "tdc/verification.hpp"

namespace tdc {

inline constexpr const char* kReportSchema = "tdc-report/1";

nlohmann::json to_json(const Parameters& p);
nlohmann::json to_json(const DerivedConstants& c);
nlohmann::json to_json(const HypothesisReport& r);
nlohmann::json to_json(const ProtectionReport& r, bool with_entries = false);
nlohmann::json to_json(const ManifoldCheck& m);
nlohmann::json to_json(const ResolvedCompare& c);
nlohmann::json to_json(const RefinementAudit& a);
nlohmann::json to_json(const RefineSummary& s, const RefinementState& st);
nlohmann::json to_json(const Event& e);

// Infinite and NaN values become strings so the output stays valid JSON.
nlohmann::json number(double v);

} // namespace tdc

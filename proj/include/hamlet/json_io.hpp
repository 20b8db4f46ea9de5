#pragma once

#include <json.hpp>

#include "hamlet/policies.hpp"
#include "hamlet/simulator.hpp"
#include "hamlet/trace.hpp"

// nlohmann::json conversions for the types that appear in config and result files.
namespace hamlet {

void to_json(nlohmann::json& j, const SaturatingCurve& c);
void from_json(const nlohmann::json& j, SaturatingCurve& c);
void to_json(nlohmann::json& j, const SyntheticSpec& s);
void from_json(const nlohmann::json& j, SyntheticSpec& s);

// Accepts either an object {"kind": ..., params} or a policy output name string.
void to_json(nlohmann::json& j, const PolicySpec& p);
void from_json(const nlohmann::json& j, PolicySpec& p);

void to_json(nlohmann::json& j, const OverheadModel& o);
void from_json(const nlohmann::json& j, OverheadModel& o);

void to_json(nlohmann::json& j, const FittedCurve& c);

// Non-finite scores (forced arms) serialize as null and read back as +infinity.
nlohmann::json to_json(const RunResult& r, bool with_curves);
void to_json(nlohmann::json& j, const RunResult& r);
void from_json(const nlohmann::json& j, RunResult& r);

} // namespace hamlet

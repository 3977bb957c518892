#pragma once

#include <string>

#include "json.hpp"
#include "mcrd/counterfactual.hpp"
#include "mcrd/fuzzy.hpp"
#include "mcrd/mc.hpp"
#include "mcrd/schedule.hpp"
#include "mcrd/sharp.hpp"

namespace mcrd {

inline constexpr int kSchemaVersion = 1;

CutoffSchedule schedule_from_json(const nlohmann::json& j);
nlohmann::json schedule_to_json(const CutoffSchedule& sched);

/// Counterfactual document. Discrete: {"kind":"discrete","weights":[...]}.
/// Continuous: {"kind":"continuous","profile":"cutoff_only|dose_change|full",
/// "density":"uniform","support":{"c":[lo,hi],"u":...,"d":...,"dp":...}}
/// where a scalar entry pins the coordinate.
CounterfactualSpec counterfactual_from_json(const nlohmann::json& j);

WBasis wbasis_from_json(const nlohmann::json& j);

QuadratureConfig quadrature_from_json(const nlohmann::json& j);

nlohmann::json ate_result_to_json(const AteResult& r);
AteResult ate_result_from_json(const nlohmann::json& j);

nlohmann::json mc_report_to_json(const McReport& r);
nlohmann::json fuzzy_result_to_json(const FuzzyResult& r);
nlohmann::json h2_selection_to_json(const H2Selection& sel);

nlohmann::json load_json_file(const std::string& path);

}  // namespace mcrd

#pragma once

#include <string>

#include <json.hpp>

#include "chansynth/bounds/bounds.hpp"
#include "chansynth/oneshot.hpp"
#include "chansynth/prob.hpp"
#include "chansynth/sim/codesim.hpp"

namespace chansynth::io {

using nlohmann::json;

// throws ConfigError with a field-path message on malformed input
prob::Dist dist_from_json(const json& j, const std::string& label = "");
prob::Kernel kernel_from_json(const json& j, const std::string& label = "");
prob::JointDist joint_from_json(const json& j);

json dist_to_json(const prob::Dist& d);
json kernel_to_json(const prob::Kernel& k);
json joint_to_json(const prob::JointDist& d);

bounds::P2PTarget p2p_target_from_json(const json& j);
bounds::BroadcastTarget broadcast_target_from_json(const json& j);
bounds::InteractiveTarget interactive_target_from_json(const json& j);
bounds::AuxShape shape_from_json(const json& j);
bounds::OptimizerSettings settings_from_json(const json& j);

sim::P2PSchemeSpec p2p_scheme_from_json(const json& j);
sim::BroadcastSchemeSpec broadcast_scheme_from_json(const json& j);
sim::InteractiveSchemeSpec interactive_scheme_from_json(const json& j);

json bound_result_to_json(const bounds::BoundResult& r);
json sim_report_to_json(const sim::SimReport& r);
json verifier_report_to_json(const oneshot::VerifierReport& r);

// +inf-aware number encoding: +inf maps to JSON null
json num_to_json(double v);

json load_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// fixed-format floating point for CSV output (shortest round-trip)
std::string fmt_double(double v);

}  // namespace chansynth::io

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "twd/instance.hpp"
#include "twd/solver.hpp"
#include "twd/window_design.hpp"

namespace twd {

std::string plan_to_json(const WindowPlan& plan);
WindowPlan plan_from_json(const std::string& text);

/// SolveResult fields plus the winner's plan under "plan". wall_time is
/// left out unless `with_timing`.
std::string solve_result_to_json(const SolveResult& result, bool with_timing);

/// {"seq": [0, ..., 0]}
std::string route_to_json(const std::vector<NodeId>& seq);
std::vector<NodeId> route_from_json(const std::string& text);

/// customer, lower, upper, width, cost_component
std::string cost_report_csv(const WindowPlan& plan);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace twd

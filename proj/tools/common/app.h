#pragma once

#include <filesystem>
#include <istream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sdfilter/sd_solver.h"

namespace sdfilter::app {

/// Parses "2.5lc" as a multiple of `lc` or "0.04" as an absolute length.
double resolve_length(const std::string& text, double lc);

/// Accepts either a number or a string understood by resolve_length.
double resolve_length(const nlohmann::json& value, double lc);

/// Reads a schedule: a JSON array (or an object with a "levels" array) of
/// {"lambda", "eta", "mu", "nu", optional "max_iters", "eps"}.
std::vector<FilterParams> parse_schedule(const nlohmann::json& doc, double lc);
std::vector<FilterParams> load_schedule(const std::filesystem::path& path, double lc);

nlohmann::json params_to_json(const FilterParams& params);

/// Whitespace-separated non-negative integers; '#' starts a comment.
std::vector<int> parse_index_list(std::istream& in);
std::vector<int> load_index_list(const std::filesystem::path& path);

/// "1,0.5,2" -> {1, 0.5, 2}.
std::vector<double> parse_number_list(const std::string& text);

}  // namespace sdfilter::app

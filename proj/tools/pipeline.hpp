#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace sphmean::pipeline {

/// Every key the stages read, with reference values.
nlohmann::json default_config();

/// Applies "a.b.c=value"; the value is parsed as JSON when it parses, else
/// taken as a string.
void apply_override(nlohmann::json& cfg, const std::string& assignment);

/// Defaults, then the file (if given), then the overrides; validated.
nlohmann::json load_config(const std::filesystem::path& file,
                           const std::vector<std::string>& overrides);

/// Throws Error(InvalidArgument) naming the offending key.
void validate_config(const nlohmann::json& cfg);

struct StageResult {
  bool pass = true;  // false when an acceptance threshold was missed
  nlohmann::json summary;
};

// Each stage reads its inputs from and writes its outputs to `out`, along
// with manifest_<stage>.json recording the sha256 of every file consumed
// and produced.
StageResult run_phantom(const nlohmann::json& cfg, const std::filesystem::path& out);
StageResult run_forward(const nlohmann::json& cfg, const std::filesystem::path& out);
StageResult run_invert(const nlohmann::json& cfg, const std::filesystem::path& out);
StageResult run_verify(const nlohmann::json& cfg, const std::filesystem::path& out);
StageResult run_report(const nlohmann::json& cfg, const std::filesystem::path& out);

}  // namespace sphmean::pipeline

#pragma once

#include <cstdint>
#include <string>

#include <nlohmann/json_fwd.hpp>

namespace crs {

// Fully-resolved run configuration. Defaults live in default_config();
// a run's config is copied verbatim into its output bundle so that
// re-running from the bundle reproduces it byte-for-byte.
nlohmann::json default_config();

// Merges `overrides` (flags or user config file) onto the defaults,
// recursively; unknown keys are rejected.
nlohmann::json resolve_config(const nlohmann::json& overrides);

// `synth`: write a synthetic dataset CSV plus a manifest recording the
// planted sensitivity structure.
void run_synth(const nlohmann::json& config, const std::string& out_dir);

// `pipeline`: split -> train 8 models -> evaluate -> admit -> vote ->
// build/evaluate modes -> theory validation; writes every report plus
// one summary JSON.
void run_pipeline(const nlohmann::json& config, const std::string& out_dir);

// `theory`: curves + verdicts only.
void run_theory(const nlohmann::json& config, const std::string& out_dir);

// `report`: re-render summary.json from an existing bundle; returns the
// rendered summary text.
std::string run_report(const std::string& bundle_dir);

} // namespace crs

// Copyright Contributors to the robust-splat project
// SPDX-License-Identifier: Apache-2.0
//
// The JSON configuration document. Every section and field is optional;
// unknown keys are rejected with the offending field path.
#pragma once

#include "rgs/eval.hpp"
#include "rgs/optimizer.hpp"
#include "rgs/renderer.hpp"
#include "rgs/synth.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace rgs {

struct Config {
    RenderOptions render;
    FitConfig fit;
    AdaptConfig adapt;
    SynthConfig synth;
    SelectionOptions selection;
};

/// Parses a document; the "render" section is copied into fit, adapt and synth.
Config config_from_json(const nlohmann::json& doc);
Config load_config(const std::filesystem::path& path);
nlohmann::ordered_json config_to_json(const Config& cfg);

nlohmann::ordered_json render_options_to_json(const RenderOptions& o);
RenderOptions render_options_from_json(const nlohmann::json& j, const std::string& where);

nlohmann::ordered_json fit_config_to_json(const FitConfig& c);
FitConfig fit_config_from_json(const nlohmann::json& j, const std::string& where);

nlohmann::ordered_json adapt_config_to_json(const AdaptConfig& c);
AdaptConfig adapt_config_from_json(const nlohmann::json& j, const std::string& where);

nlohmann::ordered_json corruption_to_json(const CorruptionSpec& s);
CorruptionSpec corruption_from_json(const nlohmann::json& j, const std::string& where);

nlohmann::ordered_json synth_config_to_json(const SynthConfig& c);
SynthConfig synth_config_from_json(const nlohmann::json& j, const std::string& where);

nlohmann::ordered_json selection_to_json(const SelectionOptions& s);
SelectionOptions selection_from_json(const nlohmann::json& j, const std::string& where);

nlohmann::ordered_json flags_to_json(const MechanismFlags& f);
MechanismFlags flags_from_json(const nlohmann::json& j, const std::string& where);

} // namespace rgs

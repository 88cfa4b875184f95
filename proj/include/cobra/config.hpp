#pragma once

#include "cobra/refmodel.hpp"
#include "cobra/report.hpp"
#include "cobra/synth.hpp"

namespace cobra {

/// Reads a synth config; absent keys keep their defaults, unknown keys are
/// rejected.
SynthConfig synth_config_from_json(const Json& j);
Json to_json(const SynthConfig& cfg);

Json to_json(const TrainConfig& cfg);

}  // namespace cobra

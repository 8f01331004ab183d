#pragma once

#include <string>

#include <json.hpp>

#include "weakpointer/circuit.hpp"
#include "weakpointer/pointer.hpp"

namespace weakpointer {

// Schema: { "stages": [...], "paths": [{name, first_stage, last_stage}],
//   "couplers": [{stage, in: [p, q], out: [r, s], matrix: [[re, im] x4 row-major]}],
//   "passthroughs": [{stage, from, to}] (optional),
//   "source": name, "terminals": [...] }.
// Parse failures throw ConfigError with the offending key in the message.
CircuitSpec circuit_spec_from_json(const nlohmann::json& j);
nlohmann::ordered_json circuit_spec_to_json(const CircuitSpec& spec);

Circuit circuit_from_json(const nlohmann::json& j);
Circuit load_circuit_file(const std::string& path);

// Schema: { "devices": [{id, path, stage, delta, sigma}] }.
std::vector<MeterDevice> devices_from_json(const nlohmann::json& j);
std::vector<MeterDevice> load_devices_file(const std::string& path);

}  // namespace weakpointer

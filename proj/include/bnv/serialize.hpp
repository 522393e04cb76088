#pragma once

#include <string>

#include "json.hpp"

#include "bnv/bayesnet.hpp"

namespace bnv {

// Native network schema:
//   {variables:[{name,values:[...]}], edges:[[p,c],...],
//    cpts:{name:{parents:[...],rows:[{given:[...],p:[...]}]}}, outcome:"Y"}
// Names (not indices) throughout; `given` holds parent value labels so row
// order in the file does not matter.
nlohmann::json network_to_json(const BayesianNetwork& net);
BayesianNetwork network_from_json(const nlohmann::json& j);

// format is "bif" or "native-json". BIF carries no outcome marker, so
// outcome_name is required for it; for native-json it must be empty (the
// file has an `outcome` field).
BayesianNetwork parse_network(const std::string& text, const std::string& format,
                              const std::string& outcome_name = "");

std::string serialize_network(const BayesianNetwork& net, const std::string& format);

// FNV-1a 64-bit, rendered as 16 hex digits. Used to key cached artifacts.
std::string content_hash(const std::string& bytes);

}  // namespace bnv

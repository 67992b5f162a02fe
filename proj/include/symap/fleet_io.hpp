#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>

#include "symap/error.hpp"
#include "symap/text_io.hpp"
#include "symap/transferability.hpp"
#include "symap/version.hpp"

namespace symap {

inline nlohmann::json fleet_to_json(const FleetGraph& fleet) {
  fleet.validate();
  nlohmann::json j;
  j["schema"] = format_version;
  j["agents"] = nlohmann::json::array();
  for (const auto& a : fleet.agents)
    j["agents"].push_back({{"id", a.id}, {"kind", to_string(a.kind)}});
  j["edges"] = nlohmann::json::array();
  for (const auto& e : fleet.edges)
    j["edges"].push_back({{"a", e.agent_a},
                          {"b", e.agent_b},
                          {"t_ab", e.t_ab},
                          {"t_ba", e.t_ba}});
  return j;
}

inline FleetGraph fleet_from_json(const nlohmann::json& j) {
  try {
    if (j.value("schema", format_version) != format_version)
      throw ParseError("unsupported fleet schema version");
    FleetGraph fleet;
    for (const auto& agent : j.at("agents"))
      fleet.agents.push_back(
          {agent.at("id").get<std::string>(),
           agent_kind_from_string(agent.at("kind").get<std::string>())});
    if (j.contains("edges"))
      for (const auto& edge : j.at("edges"))
        fleet.edges.push_back({edge.at("a").get<std::string>(),
                               edge.at("b").get<std::string>(),
                               edge.at("t_ab").get<double>(),
                               edge.at("t_ba").get<double>()});
    fleet.validate();
    return fleet;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed fleet description: ") + e.what());
  } catch (const ValidationError& e) {
    // Anything structurally wrong in a file is a parse failure to callers.
    throw ParseError(std::string("invalid fleet description: ") + e.what());
  }
}

inline void save_fleet(const std::filesystem::path& path,
                       const FleetGraph& fleet) {
  write_file(path, fleet_to_json(fleet).dump(2) + "\n");
}

inline FleetGraph load_fleet(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return fleet_from_json(j);
}

inline std::vector<CandidateAttachment> candidates_from_json(
    const nlohmann::json& j) {
  try {
    std::vector<CandidateAttachment> out;
    for (const auto& c : j.at("candidates"))
      out.push_back({c.at("attach_to").get<std::string>(),
                     c.at("t_existing_to_new").get<double>(),
                     c.at("t_new_to_existing").get<double>()});
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed candidate list: ") + e.what());
  } catch (const ValidationError& e) {
    throw ParseError(std::string("invalid candidate list: ") + e.what());
  }
}

inline std::vector<CandidateAttachment> load_candidates(
    const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return candidates_from_json(j);
}

}  // namespace symap

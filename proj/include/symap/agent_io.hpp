#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>

#include "symap/error.hpp"
#include "symap/kinematics.hpp"
#include "symap/text_io.hpp"
#include "symap/version.hpp"

namespace symap {

inline nlohmann::json agent_to_json(const AgentModel& agent) {
  nlohmann::json j;
  j["schema"] = format_version;
  j["name"] = agent.name;
  j["feature_encoding"] = to_string(agent.feature_encoding);
  j["sensor_noise_sigma"] = agent.sensor_noise_sigma;
  if (agent.total_length_override > 0.0)
    j["total_length"] = agent.total_length_override;
  j["joints"] = nlohmann::json::array();
  for (std::size_t i = 0; i < agent.joints.size(); ++i) {
    const auto& joint = agent.joints[i];
    j["joints"].push_back({{"axis", {joint.axis.x(), joint.axis.y(), joint.axis.z()}},
                           {"limits", {joint.lower, joint.upper}},
                           {"parent_link", joint.parent_link},
                           {"link_length", agent.link_lengths[i]}});
  }
  j["keypoints"] = nlohmann::json::array();
  for (const auto& kp : agent.keypoints)
    j["keypoints"].push_back({{"name", kp.name}, {"link", kp.link}});
  j["chains"] = nlohmann::json::array();
  for (const auto& c : agent.chains)
    j["chains"].push_back(
        {{"name", c.name}, {"joints", {c.first_joint, c.last_joint}}});
  return j;
}

inline AgentModel agent_from_json(const nlohmann::json& j) {
  try {
    if (j.value("schema", format_version) != format_version)
      throw ParseError("unsupported agent schema version");
    AgentModel agent;
    agent.name = j.at("name").get<std::string>();
    agent.feature_encoding =
        feature_encoding_from_string(j.at("feature_encoding").get<std::string>());
    agent.sensor_noise_sigma = j.value("sensor_noise_sigma", 0.0);
    agent.total_length_override = j.value("total_length", 0.0);
    for (const auto& joint_json : j.at("joints")) {
      JointSpec joint;
      const auto& axis = joint_json.at("axis");
      joint.axis = Eigen::Vector3d(axis.at(0).get<double>(),
                                   axis.at(1).get<double>(),
                                   axis.at(2).get<double>());
      joint.lower = joint_json.at("limits").at(0).get<double>();
      joint.upper = joint_json.at("limits").at(1).get<double>();
      joint.parent_link = joint_json.at("parent_link").get<int>();
      agent.joints.push_back(joint);
      agent.link_lengths.push_back(joint_json.at("link_length").get<double>());
    }
    for (const auto& kp_json : j.at("keypoints"))
      agent.keypoints.push_back({kp_json.at("name").get<std::string>(),
                                 kp_json.at("link").get<int>()});
    if (j.contains("chains"))
      for (const auto& chain_json : j.at("chains"))
        agent.chains.push_back({chain_json.at("name").get<std::string>(),
                                chain_json.at("joints").at(0).get<int>(),
                                chain_json.at("joints").at(1).get<int>()});
    agent.validate();
    return agent;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed agent description: ") + e.what());
  } catch (const ValidationError& e) {
    // Anything structurally wrong in a file is a parse failure to callers.
    throw ParseError(std::string("invalid agent description: ") + e.what());
  }
}

inline void save_agent(const std::filesystem::path& path,
                       const AgentModel& agent) {
  agent.validate();
  write_file(path, agent_to_json(agent).dump(2) + "\n");
}

inline AgentModel load_agent(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return agent_from_json(j);
}

}  // namespace symap

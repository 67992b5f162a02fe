#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>

#include "symap/datagen.hpp"
#include "symap/error.hpp"
#include "symap/text_io.hpp"
#include "symap/version.hpp"

namespace symap {

// Correspondence maps travel as JSON next to the agent descriptions.
inline nlohmann::json correspondence_to_json(const CorrespondenceMap& map) {
  map.validate();
  nlohmann::json j;
  j["schema"] = format_version;
  if (map.scale > 0.0) j["scale"] = map.scale;
  j["pairs"] = nlohmann::json::array();
  for (const auto& p : map.pairs)
    j["pairs"].push_back({{"leader", p.leader_keypoint},
                          {"follower", p.follower_keypoint},
                          {"weight", p.weight}});
  return j;
}

inline CorrespondenceMap correspondence_from_json(const nlohmann::json& j) {
  try {
    if (j.value("schema", format_version) != format_version)
      throw ParseError("unsupported correspondence schema version");
    CorrespondenceMap map;
    map.scale = j.value("scale", 0.0);
    for (const auto& p : j.at("pairs"))
      map.pairs.push_back({p.at("leader").get<std::string>(),
                           p.at("follower").get<std::string>(),
                           p.value("weight", 1.0)});
    map.validate();
    return map;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed correspondence map: ") + e.what());
  } catch (const ValidationError& e) {
    // Anything structurally wrong in a file is a parse failure to callers.
    throw ParseError(std::string("invalid correspondence map: ") + e.what());
  }
}

inline void save_correspondence(const std::filesystem::path& path,
                                const CorrespondenceMap& map) {
  write_file(path, correspondence_to_json(map).dump(2) + "\n");
}

inline CorrespondenceMap load_correspondence(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return correspondence_from_json(j);
}

// Line-oriented text format.  '#' lines carry provenance; 'meta' records
// describe the pairing; each 'sample' row holds agent A's features followed
// by agent B's.  Numbers use shortest round-trip formatting, so
// export(import(x)) is byte-identical to x.
inline std::string dataset_to_text(const MotionDataset& ds,
                                   const Provenance& provenance = {}) {
  ds.validate();
  std::ostringstream out;
  out << provenance.header("dataset");
  out << "meta,agent_a," << ds.agent_a << "\n";
  out << "meta,agent_b," << ds.agent_b << "\n";
  out << "meta,encoding_a," << to_string(ds.encoding_a) << "\n";
  out << "meta,encoding_b," << to_string(ds.encoding_b) << "\n";
  out << "meta,width_a," << ds.width_a() << "\n";
  out << "meta,width_b," << ds.width_b() << "\n";
  out << "meta,samples," << ds.size() << "\n";
  out << "meta,seed," << ds.seed << "\n";
  out << "meta,noise_sigma_a," << format_double(ds.noise_sigma_a) << "\n";
  out << "meta,noise_sigma_b," << format_double(ds.noise_sigma_b) << "\n";
  out << "meta,mean_mimic_objective," << format_double(ds.mean_mimic_objective)
      << "\n";
  for (long long i = 0; i < ds.size(); ++i) {
    out << "sample";
    for (int r = 0; r < ds.width_a(); ++r)
      out << "," << format_double(ds.features_a(r, i));
    for (int r = 0; r < ds.width_b(); ++r)
      out << "," << format_double(ds.features_b(r, i));
    out << "\n";
  }
  return out.str();
}

inline void export_dataset(const std::filesystem::path& path,
                           const MotionDataset& ds,
                           const Provenance& provenance = {}) {
  write_file(path, dataset_to_text(ds, provenance));
}

// `expected_a` / `expected_b`, when given, pin the file to known agents:
// name, encoding, and feature width must all agree.
inline MotionDataset dataset_from_text(const std::string& text,
                                       const AgentModel* expected_a = nullptr,
                                       const AgentModel* expected_b = nullptr) {
  MotionDataset ds;
  int width_a = -1, width_b = -1;
  long long samples = -1;
  std::vector<std::string> rows;

  for (const std::string& line : payload_lines(text)) {
    const auto fields = split(line, ',');
    if (fields[0] == "meta") {
      if (fields.size() != 3) throw ParseError("malformed meta record: " + line);
      const std::string key(fields[1]);
      const std::string value(fields[2]);
      if (key == "agent_a") ds.agent_a = value;
      else if (key == "agent_b") ds.agent_b = value;
      else if (key == "encoding_a") ds.encoding_a = feature_encoding_from_string(value);
      else if (key == "encoding_b") ds.encoding_b = feature_encoding_from_string(value);
      else if (key == "width_a") width_a = static_cast<int>(parse_int(value));
      else if (key == "width_b") width_b = static_cast<int>(parse_int(value));
      else if (key == "samples") samples = parse_int(value);
      else if (key == "seed") ds.seed = parse_uint64(value);
      else if (key == "noise_sigma_a") ds.noise_sigma_a = parse_double(value);
      else if (key == "noise_sigma_b") ds.noise_sigma_b = parse_double(value);
      else if (key == "mean_mimic_objective") ds.mean_mimic_objective = parse_double(value);
      else throw ParseError("unknown meta key: " + key);
    } else if (fields[0] == "sample") {
      rows.emplace_back(line);
    } else {
      throw ParseError("unknown record kind: " + std::string(fields[0]));
    }
  }

  if (width_a <= 0 || width_b <= 0)
    throw ParseError("dataset header is missing feature widths");
  if (samples != static_cast<long long>(rows.size()))
    throw ParseError("dataset sample count does not match its header");

  ds.features_a.resize(width_a, samples);
  ds.features_b.resize(width_b, samples);
  for (long long i = 0; i < samples; ++i) {
    const auto fields = split(rows[static_cast<std::size_t>(i)], ',');
    if (static_cast<int>(fields.size()) != 1 + width_a + width_b)
      throw ParseError("dataset row has the wrong number of values");
    for (int r = 0; r < width_a; ++r)
      ds.features_a(r, i) = parse_double(fields[static_cast<std::size_t>(1 + r)]);
    for (int r = 0; r < width_b; ++r)
      ds.features_b(r, i) =
          parse_double(fields[static_cast<std::size_t>(1 + width_a + r)]);
  }
  ds.validate();

  auto check_side = [](const AgentModel* expected, const std::string& got_name,
                       FeatureEncoding got_encoding, int got_width) {
    if (!expected) return;
    if (expected->name != got_name)
      throw ParseError("dataset names agent '" + got_name +
                       "', expected '" + expected->name + "'");
    if (expected->feature_encoding != got_encoding)
      throw ParseError("dataset encoding for '" + got_name +
                       "' does not match the agent description");
    if (expected->feature_width() != got_width)
      throw ParseError("dataset width for '" + got_name +
                       "' does not match the agent description");
  };
  check_side(expected_a, ds.agent_a, ds.encoding_a, ds.width_a());
  check_side(expected_b, ds.agent_b, ds.encoding_b, ds.width_b());
  return ds;
}

inline MotionDataset import_dataset(const std::filesystem::path& path,
                                    const AgentModel* expected_a = nullptr,
                                    const AgentModel* expected_b = nullptr) {
  try {
    return dataset_from_text(read_file(path), expected_a, expected_b);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace symap

#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>

#include "symap/error.hpp"
#include "symap/mapping.hpp"
#include "symap/text_io.hpp"

namespace symap {

namespace detail {

inline void write_scaler(std::ostream& out, const char* side,
                         const FeatureScaler& s) {
  out << "scaler," << side << ",mean";
  for (int i = 0; i < s.mean.size(); ++i)
    out << "," << format_double(s.mean[i]);
  out << "\nscaler," << side << ",stddev";
  for (int i = 0; i < s.stddev.size(); ++i)
    out << "," << format_double(s.stddev[i]);
  out << "\nscaler," << side << ",degenerate";
  for (const int d : s.degenerate) out << "," << d;
  out << "\n";
}

inline void write_network(std::ostream& out, const char* role,
                          const NetworkParams& net) {
  out << "net," << role << "," << net.layers.size() << "\n";
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const Layer& layer = net.layers[l];
    out << "layer," << role << "," << l << "," << to_string(layer.activation)
        << "," << layer.weights.rows() << "," << layer.weights.cols() << "\n";
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      out << "wrow," << role << "," << l << "," << r;
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c)
        out << "," << format_double(layer.weights(r, c));
      out << "\n";
    }
    out << "bias," << role << "," << l;
    for (Eigen::Index r = 0; r < layer.biases.size(); ++r)
      out << "," << format_double(layer.biases[r]);
    out << "\n";
  }
}

}  // namespace detail

inline std::string model_to_text(const DualAutoencoderModel& model,
                                 const Provenance& provenance = {}) {
  model.validate();
  std::ostringstream out;
  out << provenance.header("model");
  out << "meta,kind,dual\n";
  out << "meta,agent_a," << model.agent_a << "\n";
  out << "meta,agent_b," << model.agent_b << "\n";
  detail::write_scaler(out, "a", model.norm_a);
  detail::write_scaler(out, "b", model.norm_b);
  detail::write_network(out, "encoder_a", model.encoder_a);
  detail::write_network(out, "decoder_a", model.decoder_a);
  detail::write_network(out, "encoder_b", model.encoder_b);
  detail::write_network(out, "decoder_b", model.decoder_b);
  return out.str();
}

inline std::string model_to_text(const DirectMapModel& model,
                                 const Provenance& provenance = {}) {
  model.validate();
  std::ostringstream out;
  out << provenance.header("model");
  out << "meta,kind,direct\n";
  out << "meta,agent_a," << model.agent_a << "\n";
  out << "meta,agent_b," << model.agent_b << "\n";
  detail::write_scaler(out, "a", model.norm_a);
  detail::write_scaler(out, "b", model.norm_b);
  detail::write_network(out, "net", model.net);
  return out.str();
}

// Exactly one of `dual`/`direct` is set after a successful load.
struct StoredModel {
  std::shared_ptr<DualAutoencoderModel> dual;
  std::shared_ptr<DirectMapModel> direct;

  const std::string& agent_a() const { return dual ? dual->agent_a : direct->agent_a; }
  const std::string& agent_b() const { return dual ? dual->agent_b : direct->agent_b; }
};

namespace detail {

class ModelParser {
 public:
  explicit ModelParser(const std::string& text)
      : lines_(payload_lines(text)) {}

  StoredModel parse() {
    for (const auto& line : lines_) {
      const auto f = split(line, ',');
      if (f.size() < 3 || (f[0] != "meta" && f[0] != "scaler" && f[0] != "net" &&
                           f[0] != "layer" && f[0] != "wrow" && f[0] != "bias"))
        throw ParseError("unrecognized model record: " + line);
    }
    std::string kind;
    std::string agent_a, agent_b;
    bool have_a = false, have_b = false;
    for (const auto& line : lines_) {
      const auto f = split(line, ',');
      if (f[0] != "meta") continue;
      if (f.size() != 3) throw ParseError("malformed meta record: " + line);
      if (f[1] == "kind") kind = std::string(f[2]);
      else if (f[1] == "agent_a") { agent_a = std::string(f[2]); have_a = true; }
      else if (f[1] == "agent_b") { agent_b = std::string(f[2]); have_b = true; }
      else throw ParseError("unknown model meta key: " + std::string(f[1]));
    }
    if (!have_a || !have_b)
      throw ParseError("model file is missing its agent names");
    StoredModel out;
    if (kind == "dual") {
      auto m = std::make_shared<DualAutoencoderModel>();
      m->agent_a = agent_a;
      m->agent_b = agent_b;
      m->norm_a = parse_scaler("a");
      m->norm_b = parse_scaler("b");
      m->encoder_a = parse_network("encoder_a");
      m->decoder_a = parse_network("decoder_a");
      m->encoder_b = parse_network("encoder_b");
      m->decoder_b = parse_network("decoder_b");
      m->validate();
      out.dual = std::move(m);
    } else if (kind == "direct") {
      auto m = std::make_shared<DirectMapModel>();
      m->agent_a = agent_a;
      m->agent_b = agent_b;
      m->norm_a = parse_scaler("a");
      m->norm_b = parse_scaler("b");
      m->net = parse_network("net");
      m->validate();
      out.direct = std::move(m);
    } else {
      throw ParseError("unknown or missing model kind: '" + kind + "'");
    }
    return out;
  }

 private:
  static Eigen::VectorXd values_after(const std::vector<std::string_view>& f,
                                      std::size_t first) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(f.size() - first));
    for (std::size_t i = first; i < f.size(); ++i)
      v[static_cast<Eigen::Index>(i - first)] = parse_double(f[i]);
    return v;
  }

  FeatureScaler parse_scaler(const std::string& side) const {
    FeatureScaler s;
    bool have_mean = false, have_stddev = false, have_degenerate = false;
    for (const auto& line : lines_) {
      const auto f = split(line, ',');
      if (f[0] != "scaler" || std::string(f[1]) != side) continue;
      if (f[2] == "mean") {
        s.mean = values_after(f, 3);
        have_mean = true;
      } else if (f[2] == "stddev") {
        s.stddev = values_after(f, 3);
        have_stddev = true;
      } else if (f[2] == "degenerate") {
        for (std::size_t i = 3; i < f.size(); ++i)
          s.degenerate.push_back(static_cast<int>(parse_int(f[i])));
        have_degenerate = true;
      } else {
        throw ParseError("unknown scaler record: " + line);
      }
    }
    if (!have_mean || !have_stddev || !have_degenerate)
      throw ParseError("model file is missing scaler statistics for side " + side);
    return s;
  }

  NetworkParams parse_network(const std::string& role) const {
    long long declared = -1;
    std::map<long long, Layer> layers;
    for (const auto& line : lines_) {
      const auto f = split(line, ',');
      if (std::string(f[1]) != role) continue;
      if (f[0] == "net") {
        declared = parse_int(f[2]);
      } else if (f[0] == "layer") {
        if (f.size() != 6) throw ParseError("malformed layer record: " + line);
        const long long index = parse_int(f[2]);
        Layer& layer = layers[index];
        layer.activation = activation_from_string(std::string(f[3]));
        layer.weights.resize(parse_int(f[4]), parse_int(f[5]));
        layer.biases.resize(layer.weights.rows());
      }
    }
    if (declared < 0)
      throw ParseError("model file is missing network '" + role + "'");
    if (declared != static_cast<long long>(layers.size()))
      throw ParseError("network '" + role + "' layer count mismatch");

    // Every weight row and bias vector must actually appear, otherwise a
    // truncated file would hand back uninitialized parameters.
    std::map<long long, std::set<long long>> rows_seen;
    std::set<long long> bias_seen;
    for (const auto& line : lines_) {
      const auto f = split(line, ',');
      if (std::string(f[1]) != role) continue;
      if (f[0] == "wrow") {
        if (f.size() < 4) throw ParseError("malformed weight row: " + line);
        const long long index = parse_int(f[2]);
        const long long row = parse_int(f[3]);
        auto it = layers.find(index);
        if (it == layers.end())
          throw ParseError("weight row for undeclared layer in '" + role + "'");
        Layer& layer = it->second;
        if (row < 0 || row >= layer.weights.rows() ||
            static_cast<long long>(f.size()) != 4 + layer.weights.cols())
          throw ParseError("weight row shape mismatch in '" + role + "'");
        for (Eigen::Index c = 0; c < layer.weights.cols(); ++c)
          layer.weights(row, c) = parse_double(f[static_cast<std::size_t>(4 + c)]);
        rows_seen[index].insert(row);
      } else if (f[0] == "bias") {
        const long long index = parse_int(f[2]);
        auto it = layers.find(index);
        if (it == layers.end())
          throw ParseError("bias for undeclared layer in '" + role + "'");
        Layer& layer = it->second;
        if (static_cast<long long>(f.size()) != 3 + layer.biases.size())
          throw ParseError("bias shape mismatch in '" + role + "'");
        for (Eigen::Index r = 0; r < layer.biases.size(); ++r)
          layer.biases[r] = parse_double(f[static_cast<std::size_t>(3 + r)]);
        bias_seen.insert(index);
      }
    }

    NetworkParams net;
    for (long long i = 0; i < declared; ++i) {
      auto it = layers.find(i);
      if (it == layers.end())
        throw ParseError("network '" + role + "' is missing layer " +
                         std::to_string(i));
      if (static_cast<long long>(rows_seen[i].size()) !=
          it->second.weights.rows())
        throw ParseError("network '" + role + "' layer " + std::to_string(i) +
                         " is missing weight rows");
      if (!bias_seen.count(i))
        throw ParseError("network '" + role + "' layer " + std::to_string(i) +
                         " is missing its bias vector");
      net.layers.push_back(std::move(it->second));
    }
    net.validate();
    return net;
  }

  std::vector<std::string> lines_;
};

}  // namespace detail

inline StoredModel model_from_text(const std::string& text) {
  try {
    return detail::ModelParser(text).parse();
  } catch (const ValidationError& e) {
    // Anything structurally wrong in a file is a parse failure to callers.
    throw ParseError(std::string("invalid model file: ") + e.what());
  }
}

inline void save_model(const std::filesystem::path& path,
                       const DualAutoencoderModel& model,
                       const Provenance& provenance = {}) {
  write_file(path, model_to_text(model, provenance));
}

inline void save_model(const std::filesystem::path& path,
                       const DirectMapModel& model,
                       const Provenance& provenance = {}) {
  write_file(path, model_to_text(model, provenance));
}

inline StoredModel load_model(const std::filesystem::path& path) {
  try {
    return model_from_text(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace symap

#pragma once

#include <array>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "symap/error.hpp"
#include "symap/version.hpp"

namespace symap {

// Shortest decimal string that round-trips to the exact same double.
inline std::string format_double(double value) {
  std::array<char, 40> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), res.ptr);
}

inline double parse_double(std::string_view text) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  const auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc() || res.ptr != last)
    throw ParseError("bad floating point value: '" + std::string(text) + "'");
  return value;
}

inline long long parse_int(std::string_view text) {
  long long value = 0;
  const auto res =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw ParseError("bad integer value: '" + std::string(text) + "'");
  return value;
}

// Seeds span the full unsigned 64-bit range, past what parse_int accepts.
inline std::uint64_t parse_uint64(std::string_view text) {
  std::uint64_t value = 0;
  const auto res =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw ParseError("bad unsigned integer value: '" + std::string(text) + "'");
  return value;
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

// FNV-1a, 64 bit.  Used to fingerprint input artifacts in output headers.
class Fnv1a64 {
 public:
  void update(const void* data, std::size_t size) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
      hash_ ^= bytes[i];
      hash_ *= 0x100000001b3ull;
    }
  }

  void update(std::string_view text) { update(text.data(), text.size()); }

  std::uint64_t value() const { return hash_; }

  std::string hex() const {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    std::uint64_t h = hash_;
    for (int i = 15; i >= 0; --i) {
      out[static_cast<std::size_t>(i)] = digits[h & 0xf];
      h >>= 4;
    }
    return out;
  }

 private:
  std::uint64_t hash_ = 0xcbf29ce484222325ull;
};

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline std::string digest_file(const std::filesystem::path& path) {
  Fnv1a64 h;
  h.update(read_file(path));
  return "fnv1a64:" + h.hex();
}

inline void write_file(const std::filesystem::path& path,
                       const std::string& content) {
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out) throw IoError("write failed for " + path.string());
}

// Header block stamped at the top of every generated artifact.  Contains no
// timestamps or host details, so reruns with equal inputs are byte-identical.
struct Provenance {
  std::string command;                 // normalized command line, may be empty
  std::vector<std::uint64_t> seeds;    // every seed that influenced the run
  std::vector<std::pair<std::string, std::string>> inputs;  // name -> digest
  std::vector<std::string> notes;

  std::string header(std::string_view kind) const {
    std::ostringstream out;
    out << "# symap " << version_string << " " << kind << " format "
        << format_version << "\n";
    if (!command.empty()) out << "# command: " << command << "\n";
    for (const std::uint64_t s : seeds) out << "# seed: " << s << "\n";
    for (const auto& [name, digest] : inputs)
      out << "# input " << name << ": " << digest << "\n";
    for (const auto& note : notes) out << "# " << note << "\n";
    return out.str();
  }
};

// Strips '#' comment lines; returns the remaining non-empty lines.
inline std::vector<std::string> payload_lines(const std::string& content) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= content.size()) {
    std::size_t end = content.find('\n', start);
    if (end == std::string::npos) end = content.size();
    std::string_view line = trim(
        std::string_view(content).substr(start, end - start));
    if (!line.empty() && line.front() != '#') out.emplace_back(line);
    if (end == content.size()) break;
    start = end + 1;
  }
  return out;
}

}  // namespace symap

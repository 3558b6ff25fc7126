#pragma once

// Run configuration: a flat `key=value` text file. Unknown keys are errors.
// `serialize()` writes every field in a fixed order and is embedded in the
// header of each artifact a run produces. The worker count is an execution
// setting, not part of the experiment, and is not serialized.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>

#include <json.hpp>

#include "rse/edit_distance.hpp"
#include "rse/errors.hpp"
#include "rse/ingest.hpp"
#include "rse/sampler.hpp"

namespace rse {

struct RunConfig {
  std::string train_path;
  std::string test_path;  // empty: split train_path by train_fraction
  DatasetFormat format = DatasetFormat::tsv;
  double train_fraction = 0.7;
  Strategy strategy = Strategy::bss;
  std::size_t d_max = 10;
  FeatureMap feature = FeatureMap::soft;
  double gamma = 1.0;
  std::size_t r = 256;
  double reg_c = 1.0;
  std::size_t epochs = 1000;
  double tolerance = 1e-4;
  std::uint64_t seed = 0;

  [[nodiscard]] SamplerConfig sampler() const { return {strategy, d_max, seed}; }
  [[nodiscard]] FeatureParams features() const { return {feature, gamma}; }

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

namespace detail {

inline std::string format_double(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, end};
}

template <class T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size())
    throw ArgumentError("config key '" + std::string(key) + "': bad value '" + std::string(value) + "'");
  return out;
}

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

inline void set_config_value(RunConfig& c, std::string_view key, std::string_view value) {
  using detail::parse_number;
  if (key == "train") c.train_path = value;
  else if (key == "test") c.test_path = value;
  else if (key == "format") c.format = parse_dataset_format(value);
  else if (key == "train_fraction") c.train_fraction = parse_number<double>(key, value);
  else if (key == "strategy") c.strategy = parse_strategy(value);
  else if (key == "d_max") c.d_max = parse_number<std::size_t>(key, value);
  else if (key == "feature") c.feature = parse_feature_map(value);
  else if (key == "gamma") c.gamma = parse_number<double>(key, value);
  else if (key == "R") c.r = parse_number<std::size_t>(key, value);
  else if (key == "reg_C") c.reg_c = parse_number<double>(key, value);
  else if (key == "epochs") c.epochs = parse_number<std::size_t>(key, value);
  else if (key == "tolerance") c.tolerance = parse_number<double>(key, value);
  else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, value);
  else throw ArgumentError("unknown config key '" + std::string(key) + "'");
}

// Applies `key=value` lines; '#' starts a comment line.
inline void apply_config(RunConfig& c, std::istream& in) {
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = detail::trim(raw);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected key=value", line_no);
    try {
      set_config_value(c, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
    } catch (const ArgumentError& e) {
      throw ParseError(e.what(), line_no);
    }
  }
}

inline void apply_config_file(RunConfig& c, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open config file '" + path.string() + "'");
  apply_config(c, in);
}

inline std::string serialize(const RunConfig& c) {
  std::ostringstream os;
  os << "train=" << c.train_path << '\n'
     << "test=" << c.test_path << '\n'
     << "format=" << (c.format == DatasetFormat::tsv ? "tsv" : "fasta") << '\n'
     << "train_fraction=" << detail::format_double(c.train_fraction) << '\n'
     << "strategy=" << to_string(c.strategy) << '\n'
     << "d_max=" << c.d_max << '\n'
     << "feature=" << to_string(c.feature) << '\n'
     << "gamma=" << detail::format_double(c.gamma) << '\n'
     << "R=" << c.r << '\n'
     << "reg_C=" << detail::format_double(c.reg_c) << '\n'
     << "epochs=" << c.epochs << '\n'
     << "tolerance=" << detail::format_double(c.tolerance) << '\n'
     << "seed=" << c.seed << '\n';
  return os.str();
}

inline nlohmann::ordered_json to_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  std::istringstream in(serialize(c));
  for (std::string line; std::getline(in, line);) {
    const auto eq = line.find('=');
    j[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return j;
}

}  // namespace rse

#include "mi/config.hpp"

#include "mi/errors.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <vector>

namespace mi {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::string token;
  for (char c : value) {
    if (c == ',' || c == ' ' || c == '\t') {
      if (!token.empty()) out.push_back(token);
      token.clear();
    } else {
      token.push_back(c);
    }
  }
  if (!token.empty()) out.push_back(token);
  if (out.empty()) throw ValidationError("empty list value");
  return out;
}

template <typename T>
T parse_number(const std::string& text, const std::string& key) {
  T value{};
  const char* first = text.data();
  const char* last = first + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw ValidationError("invalid value '" + text + "' for '" + key + "'");
  }
  return value;
}

}  // namespace

void apply_setting(SimulationConfig& config, const std::string& key, const std::string& value) {
  if (key == "n") {
    config.n_values.clear();
    for (const auto& t : split_list(value)) config.n_values.push_back(parse_number<std::size_t>(t, key));
  } else if (key == "rate") {
    config.rates.clear();
    for (const auto& t : split_list(value)) config.rates.push_back(parse_number<double>(t, key));
  } else if (key == "method") {
    config.methods = split_list(value);
  } else if (key == "estimand") {
    config.estimands.clear();
    for (const auto& t : split_list(value)) config.estimands.push_back(estimand_from_string(t));
  } else if (key == "m") {
    config.m = parse_number<int>(trim(value), key);
  } else if (key == "replicates") {
    config.replicates = parse_number<std::size_t>(trim(value), key);
  } else if (key == "seed") {
    config.seed = parse_number<std::uint64_t>(trim(value), key);
  } else if (key == "level") {
    config.level = parse_number<double>(trim(value), key);
  } else {
    throw ValidationError("unknown configuration key '" + key + "'");
  }
}

SimulationConfig parse_config(std::istream& in, SimulationConfig base) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    try {
      apply_setting(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ValidationError& ex) {
      throw ValidationError("config line " + std::to_string(lineno) + ": " + ex.what());
    }
  }
  return base;
}

SimulationConfig load_config(const std::filesystem::path& path, SimulationConfig base) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file " + path.string());
  return parse_config(in, std::move(base));
}

}  // namespace mi

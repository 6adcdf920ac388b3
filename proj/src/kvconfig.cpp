#include "linkcloze/kvconfig.hpp"

#include <charconv>
#include <fstream>
#include <istream>

#include "linkcloze/errors.hpp"

namespace linkcloze {

std::string trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r\n");
  return std::string(text.substr(first, last - first + 1));
}

std::vector<std::string> split_list(std::string_view text, char separator) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find(separator, start);
    if (end == std::string_view::npos) end = text.size();
    auto item = trim(text.substr(start, end - start));
    if (!item.empty()) out.push_back(std::move(item));
    start = end + 1;
  }
  return out;
}

KeyValueConfig KeyValueConfig::parse(std::istream& in) {
  KeyValueConfig config;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto content = trim(line);
    if (content.empty() || content.front() == '#') continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", number);
    auto key = trim(std::string_view(content).substr(0, eq));
    if (key.empty()) throw ParseError("empty key", number);
    config.set(std::move(key), trim(std::string_view(content).substr(eq + 1)));
  }
  return config;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file '" + path.string() + "'");
  return parse(in);
}

void KeyValueConfig::set(std::string key, std::string value) {
  entries_.emplace_back(std::move(key), std::move(value));
}

std::optional<std::string> KeyValueConfig::get(std::string_view key) const {
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
    if (it->first == key) return it->second;
  }
  return std::nullopt;
}

std::optional<double> KeyValueConfig::get_double(std::string_view key) const {
  auto value = get(key);
  if (!value) return std::nullopt;
  try {
    std::size_t used = 0;
    const double parsed = std::stod(*value, &used);
    if (used == value->size()) return parsed;
  } catch (const std::exception&) {
  }
  throw ConfigError("config key '" + std::string(key) + "' is not a number: " + *value);
}

std::optional<long long> KeyValueConfig::get_int(std::string_view key) const {
  auto value = get(key);
  if (!value) return std::nullopt;
  long long parsed = 0;
  auto [ptr, ec] = std::from_chars(value->data(), value->data() + value->size(), parsed);
  if (ec != std::errc{} || ptr != value->data() + value->size()) {
    throw ConfigError("config key '" + std::string(key) + "' is not an integer: " + *value);
  }
  return parsed;
}

std::optional<bool> KeyValueConfig::get_bool(std::string_view key) const {
  auto value = get(key);
  if (!value) return std::nullopt;
  if (*value == "true" || *value == "on" || *value == "1" || *value == "yes") return true;
  if (*value == "false" || *value == "off" || *value == "0" || *value == "no") return false;
  throw ConfigError("config key '" + std::string(key) + "' is not a boolean: " + *value);
}

}  // namespace linkcloze

#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace linkcloze {

// `key = value` lines; `#` starts a comment line. Later duplicates win on
// lookup while entries() keeps file order.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream& in);
  static KeyValueConfig load(const std::filesystem::path& path);

  void set(std::string key, std::string value);

  std::optional<std::string> get(std::string_view key) const;
  std::optional<double> get_double(std::string_view key) const;
  std::optional<long long> get_int(std::string_view key) const;
  std::optional<bool> get_bool(std::string_view key) const;

  const std::vector<std::pair<std::string, std::string>>& entries() const noexcept { return entries_; }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

std::vector<std::string> split_list(std::string_view text, char separator = ',');
std::string trim(std::string_view text);

}  // namespace linkcloze

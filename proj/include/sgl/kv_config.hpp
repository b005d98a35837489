#pragma once

// Plain-text "key = value" configuration files. Lines starting with '#' are
// comments; blank lines are ignored; keys are unique.

#include <map>
#include <string>
#include <string_view>

namespace sgl {

class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::string_view text);
  static KeyValueConfig load(const std::string& path);

  bool contains(const std::string& key) const { return entries_.count(key) != 0; }
  const std::string& raw(const std::string& key) const;
  double get_double(const std::string& key) const;
  int get_int(const std::string& key) const;

  void set(const std::string& key, std::string value) { entries_[key] = std::move(value); }
  void set(const std::string& key, double value);
  void set(const std::string& key, int value) { entries_[key] = std::to_string(value); }

  const std::map<std::string, std::string>& entries() const { return entries_; }

  std::string to_string() const;
  void save(const std::string& path) const;

 private:
  std::map<std::string, std::string> entries_;
};

/// Round-trippable decimal rendering of a double.
std::string format_double(double value);

}  // namespace sgl

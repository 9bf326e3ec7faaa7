#pragma once

// Strict reader over nlohmann::json objects: every access records the key, and
// finish() rejects anything left unread.

#include <set>
#include <string>
#include <vector>

#include <json.hpp>

namespace gridplan::detail {

class ObjectReader {
 public:
  ObjectReader(const nlohmann::json& obj, std::string path);

  bool has(const std::string& key) const;

  double number(const std::string& key);
  double number_or(const std::string& key, double fallback);
  int integer(const std::string& key);
  bool boolean_or(const std::string& key, bool fallback);
  std::string string_or(const std::string& key, std::string fallback);
  const nlohmann::json& array(const std::string& key);
  const nlohmann::json& object(const std::string& key);
  const nlohmann::json& raw(const std::string& key);

  /// A number or an array of numbers.
  std::vector<double> series(const std::string& key);

  std::string path_of(const std::string& key) const { return path_ + "." + key; }
  const std::string& path() const { return path_; }

  /// Throws ParseError on the first unread key.
  void finish() const;

 private:
  const nlohmann::json& get(const std::string& key);

  const nlohmann::json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

double as_number(const nlohmann::json& value, const std::string& path);
std::vector<double> as_series(const nlohmann::json& value, const std::string& path);
std::vector<std::vector<double>> as_matrix(const nlohmann::json& value, const std::string& path);

nlohmann::json read_json_file(const std::string& path);

}  // namespace gridplan::detail

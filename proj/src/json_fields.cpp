#include "json_fields.hpp"

#include <fstream>
#include <sstream>

#include "gridplan/errors.hpp"

namespace gridplan::detail {

ObjectReader::ObjectReader(const nlohmann::json& obj, std::string path)
    : obj_(obj), path_(std::move(path)) {
  if (!obj_.is_object()) throw ParseError(path_ + ": expected an object");
}

bool ObjectReader::has(const std::string& key) const { return obj_.contains(key); }

const nlohmann::json& ObjectReader::get(const std::string& key) {
  auto it = obj_.find(key);
  if (it == obj_.end()) throw ParseError(path_of(key) + ": missing required field");
  seen_.insert(key);
  return *it;
}

double ObjectReader::number(const std::string& key) { return as_number(get(key), path_of(key)); }

double ObjectReader::number_or(const std::string& key, double fallback) {
  return has(key) ? number(key) : fallback;
}

int ObjectReader::integer(const std::string& key) {
  const auto& v = get(key);
  if (!v.is_number_integer()) throw ParseError(path_of(key) + ": expected an integer");
  return v.get<int>();
}

bool ObjectReader::boolean_or(const std::string& key, bool fallback) {
  if (!has(key)) return fallback;
  const auto& v = get(key);
  if (!v.is_boolean()) throw ParseError(path_of(key) + ": expected a boolean");
  return v.get<bool>();
}

std::string ObjectReader::string_or(const std::string& key, std::string fallback) {
  if (!has(key)) return fallback;
  const auto& v = get(key);
  if (!v.is_string()) throw ParseError(path_of(key) + ": expected a string");
  return v.get<std::string>();
}

const nlohmann::json& ObjectReader::array(const std::string& key) {
  const auto& v = get(key);
  if (!v.is_array()) throw ParseError(path_of(key) + ": expected an array");
  return v;
}

const nlohmann::json& ObjectReader::object(const std::string& key) {
  const auto& v = get(key);
  if (!v.is_object()) throw ParseError(path_of(key) + ": expected an object");
  return v;
}

const nlohmann::json& ObjectReader::raw(const std::string& key) { return get(key); }

std::vector<double> ObjectReader::series(const std::string& key) {
  return as_series(get(key), path_of(key));
}

void ObjectReader::finish() const {
  for (auto it = obj_.begin(); it != obj_.end(); ++it) {
    if (!seen_.count(it.key())) throw ParseError(path_of(it.key()) + ": unknown field");
  }
}

double as_number(const nlohmann::json& value, const std::string& path) {
  if (!value.is_number()) throw ParseError(path + ": expected a number");
  return value.get<double>();
}

std::vector<double> as_series(const nlohmann::json& value, const std::string& path) {
  if (value.is_number()) return {value.get<double>()};
  if (!value.is_array()) throw ParseError(path + ": expected a number or an array of numbers");
  std::vector<double> out;
  out.reserve(value.size());
  for (std::size_t i = 0; i < value.size(); ++i) {
    out.push_back(as_number(value[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

std::vector<std::vector<double>> as_matrix(const nlohmann::json& value, const std::string& path) {
  if (!value.is_array()) throw ParseError(path + ": expected a 2-D array");
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < value.size(); ++i) {
    const std::string row_path = path + "[" + std::to_string(i) + "]";
    if (!value[i].is_array()) throw ParseError(row_path + ": expected an array");
    out.push_back(as_series(value[i], row_path));
  }
  return out;
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return nlohmann::json::parse(buf.str());
  } catch (const nlohmann::json::parse_error& e) {
    // nlohmann reports "line L, column C" in e.what()
    throw ParseError(path + ": " + e.what());
  }
}

}  // namespace gridplan::detail

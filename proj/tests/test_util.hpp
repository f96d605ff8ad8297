#pragma once

#include <complex>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <stdexcept>
#include <string>

namespace testutil {

inline std::string data_path(const std::string& rel) {
  return std::string(AIMVQE_DATA_DIR) + "/" + rel;
}

inline std::string load_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline nlohmann::json load_golden() {
  return nlohmann::json::parse(load_text(data_path("golden/golden.json")));
}

inline double golden_value(const nlohmann::json& g, const std::string& key) {
  return g.at(key).at("value").get<double>();
}

}  // namespace testutil

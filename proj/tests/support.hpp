#pragma once

#include "core/geometry.hpp"

#include <json.hpp>

#include <fstream>
#include <random>
#include <string>

namespace nqd::testing {

inline std::string data_path(const std::string& name) { return std::string(NQD_TEST_DATA) + "/" + name; }

inline nlohmann::json load_json(const std::string& name) {
  std::ifstream in(data_path(name));
  return nlohmann::json::parse(in);
}

inline geometry::DomainPtr load_domain(const std::string& name) { return geometry::domain_from_json(load_json(name)); }

inline Vec random_vec(std::mt19937_64& g, int n, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = u(g);
  return v;
}

}  // namespace nqd::testing

#include "core/report.hpp"

#include "core/common.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace nqd::report {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) v = 0.0;  // drops the sign of -0
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

nlohmann::ordered_json round12(const nlohmann::ordered_json& j) {
  if (j.is_number_float()) {
    const double v = j.get<double>();
    if (!std::isfinite(v)) return num(v);
    return std::strtod(num(v).c_str(), nullptr);
  }
  if (j.is_array() || j.is_object()) {
    nlohmann::ordered_json out = j;
    for (auto it = out.begin(); it != out.end(); ++it) *it = round12(*it);
    return out;
  }
  return j;
}

void Table::add(std::vector<std::string> row) {
  NQD_REQUIRE(row.size() == header.size(), ErrorCode::Internal, "table: row width does not match the header");
  rows.push_back(std::move(row));
}

std::string Table::csv() const {
  std::ostringstream os;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
    os << '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return os.str();
}

std::string Report::render(Format f) const {
  if (f == Format::Csv) return table.csv();
  return round12(json).dump(2) + "\n";
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text << std::flush;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  NQD_REQUIRE(out.good(), ErrorCode::Io, "cannot open " + path + " for writing");
  out << text;
  out.close();
  NQD_REQUIRE(!out.fail(), ErrorCode::Io, "write to " + path + " failed");
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  NQD_REQUIRE(in.good(), ErrorCode::Io, "cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace nqd::report

#pragma once

#include <json.hpp>

#include <string>
#include <vector>

namespace nqd::report {

enum class Format { Json, Csv };

/// "%.12g", with nan/inf spelled out.
std::string num(double v);

/// Copy of j with every float rounded to 12 significant digits.
nlohmann::ordered_json round12(const nlohmann::ordered_json& j);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row);
  [[nodiscard]] std::string csv() const;
};

/// Both views of one result; `verdict` is +1 positive, 0 negative, -1 when it does not apply.
struct Report {
  nlohmann::ordered_json json = nlohmann::ordered_json::object();
  Table table;
  int verdict = -1;

  [[nodiscard]] std::string render(Format f) const;
};

/// Writes text to path, or to stdout when path is empty or "-". Throws Error(Io).
void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

}  // namespace nqd::report

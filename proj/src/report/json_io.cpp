#include "diffu/report/json_io.hpp"

#include "diffu/common/error.hpp"
#include "diffu/report/csv.hpp"

namespace diffu::report {

void write_json(const std::string& path, const nlohmann::json& j) { write_text_file(path, j.dump(2) + "\n"); }

nlohmann::json read_json(const std::string& path) {
  const std::string text = read_text_file(path);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail_validation("'" + path + "' is not valid JSON: " + e.what());
  }
}

}  // namespace diffu::report

#pragma once

#include <string>

#include <json.hpp>

namespace diffu::report {

/// Pretty-printed (2-space) JSON with a trailing newline. Doubles use the
/// shortest representation that round-trips exactly.
void write_json(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json(const std::string& path);

}  // namespace diffu::report

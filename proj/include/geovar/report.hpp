#pragma once
// Report emission: JSON documents with deterministic key order and floats
// printed to 17 significant digits, plus the CSV table schemas.

#include <string>

#include <json.hpp>

#include "geovar/linalg.hpp"

namespace geovar {

using OJson = nlohmann::ordered_json;

// serialize with %.17g floats and stable key order
std::string dump_json(const OJson& j, int indent = 2);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

// row-major plain text matrix (one row per line, %.17g entries)
std::string matrix_to_text(const Mat& m);

}  // namespace geovar

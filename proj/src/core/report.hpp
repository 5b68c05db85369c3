#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "core/config.hpp"
#include "core/greens.hpp"

namespace fibermc {

using Json = nlohmann::ordered_json;

const char* version_string();

// Shortest round-trip decimal, capped at 17 significant digits.
std::string fmt_g17(double v);

// One CSV data row, 17-significant-digit floats, no trailing newline.
std::string csv_row(const std::vector<double>& vals);

Json config_json(const RunConfig& cfg);
Json estimate_json(const GreenEstimate& e);
Json comparison_json(const Comparison& c);
Json generator_json(const GeneratorCheck& c);

// Creates parent directories as needed.
bool write_text_file(const std::string& path, const std::string& text,
                     std::string& err);

}  // namespace fibermc

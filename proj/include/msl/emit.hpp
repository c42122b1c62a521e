#pragma once
#include <string>

#include "msl/experiments.hpp"

namespace msl {

// fixed 12-significant-digit rendering used by every CSV cell, so identical
// runs serialize byte-identically
std::string format_sig(double v);

enum class EmitFormat { Csv, Json, Svg };
EmitFormat parse_format(const std::string& s);  // ConfigError on anything else
const char* format_extension(EmitFormat f);

std::string to_csv(const RateReport& rep);
std::string to_json_text(const RateReport& rep);
// self-contained log-log line chart, one series per procedure
std::string to_svg(const RateReport& rep);

std::string to_csv(const AsymmetryReport& rep);
std::string to_json_text(const AsymmetryReport& rep);

std::string to_csv(const AdaptivityReport& rep);
std::string to_json_text(const AdaptivityReport& rep);

std::string to_csv(const BoundsReport& rep);
std::string to_json_text(const BoundsReport& rep);

std::string to_csv(const PackReport& rep);
std::string to_json_text(const PackReport& rep);

std::string to_csv(const ValidateReport& rep);
std::string to_json_text(const ValidateReport& rep);

// Values-only view of a config as JSON and back. The inverse renders config
// text and reparses it, so `config_from_json_text(config_to_json_text(c))`
// reproduces every section, key, and value (comments and layout are not kept).
std::string config_to_json_text(const Config& cfg);
Config config_from_json_text(const std::string& text);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace msl

#include "pamforge/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <mutex>
#include <fstream>
#include <sstream>

#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "pamforge/error.hpp"

namespace pamforge {

namespace {

using json = nlohmann::json;

[[noreturn]] void schema_error(const std::string& field, const std::string& what) {
  throw Error(ErrorCode::SchemaError, "field \"" + field + "\": " + what);
}

std::size_t read_count(const json& obj, const char* field, bool required, std::size_t fallback) {
  const auto it = obj.find(field);
  if (it == obj.end()) {
    if (required) schema_error(field, "is required");
    return fallback;
  }
  if (!it->is_number_integer() || it->get<long long>() < 0) schema_error(field, "must be a non-negative integer");
  return it->get<std::size_t>();
}

Rational read_rational(const json& obj, const char* field, bool required, Rational fallback) {
  const auto it = obj.find(field);
  if (it == obj.end()) {
    if (required) schema_error(field, "is required");
    return fallback;
  }
  std::optional<Rational> r;
  if (it->is_number_integer()) r = Rational(it->get<std::int64_t>());
  else if (it->is_number_float()) r = Rational::from_double(it->get<double>());
  else if (it->is_string()) r = Rational::parse(it->get<std::string>());
  if (!r || !r->positive()) schema_error(field, "must be a positive number or a fraction string like \"1/8\"");
  return *r;
}

double read_real(const json& obj, const char* field, double fallback) {
  const auto it = obj.find(field);
  if (it == obj.end()) return fallback;
  if (!it->is_number()) schema_error(field, "must be a number");
  return it->get<double>();
}

}  // namespace

std::optional<AnalysisParams> preset(std::string_view name) {
  AnalysisParams p;
  if (name == "set1") {
    p.nfft = 256;
    p.windowSize = 256;
    p.windowOverlap = 128;
    p.recordSizeSec = Rational(1);
    return p;
  }
  if (name == "set2") {
    p.nfft = 1024;
    p.windowSize = 1024;
    p.windowOverlap = 0;
    p.recordSizeSec = Rational(30);
    return p;
  }
  return std::nullopt;
}

AnalysisParams params_from_json(std::string_view text) {
  json obj;
  try {
    obj = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::SchemaError, std::string("not valid JSON: ") + e.what());
  }
  if (!obj.is_object()) throw Error(ErrorCode::SchemaError, "parameter file must hold a JSON object");
  static const char* known[] = {"nfft", "windowSize", "windowOverlap", "recordSizeInSec", "windowType",
                                "calibrationDb", "dbReference", "tolWindowSec"};
  for (const auto& [key, value] : obj.items()) {
    if (std::find(std::begin(known), std::end(known), key) == std::end(known)) schema_error(key, "is not a known field");
  }
  AnalysisParams p;
  p.nfft = read_count(obj, "nfft", true, 0);
  p.windowSize = read_count(obj, "windowSize", true, 0);
  p.windowOverlap = read_count(obj, "windowOverlap", true, 0);
  p.recordSizeSec = read_rational(obj, "recordSizeInSec", true, Rational(1));
  p.tolWindowSec = read_rational(obj, "tolWindowSec", false, Rational(1));
  if (const auto it = obj.find("windowType"); it != obj.end()) {
    const std::string w = it->is_string() ? it->get<std::string>() : "";
    if (w == "hamming") p.windowType = WindowType::Hamming;
    else if (w == "rectangular") p.windowType = WindowType::Rectangular;
    else schema_error("windowType", "must be \"hamming\" or \"rectangular\"");
  }
  p.calibrationDb = read_real(obj, "calibrationDb", 0.0);
  p.dbReference = read_real(obj, "dbReference", 1.0);
  p.validate();
  return p;
}

AnalysisParams load_params(std::string_view pathOrPreset) {
  if (auto p = preset(pathOrPreset)) return *p;
  std::ifstream in{std::string(pathOrPreset)};
  if (!in) throw Error(ErrorCode::SchemaError, "no preset or readable file named '" + std::string(pathOrPreset) + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return params_from_json(ss.str());
}

std::string params_to_json(const AnalysisParams& p) {
  nlohmann::ordered_json obj;
  obj["nfft"] = p.nfft;
  obj["windowOverlap"] = p.windowOverlap;
  obj["windowSize"] = p.windowSize;
  if (p.recordSizeSec.is_integer()) obj["recordSizeInSec"] = p.recordSizeSec.num();
  else obj["recordSizeInSec"] = p.recordSizeSec.to_string();
  obj["windowType"] = to_string(p.windowType);
  obj["calibrationDb"] = p.calibrationDb;
  obj["dbReference"] = p.dbReference;
  if (p.tolWindowSec.is_integer()) obj["tolWindowSec"] = p.tolWindowSec.num();
  else obj["tolWindowSec"] = p.tolWindowSec.to_string();
  return obj.dump();
}

std::string executor_to_json(const ExecutorConfig& cfg) {
  nlohmann::ordered_json obj;
  obj["numExecutors"] = cfg.numExecutors;
  obj["executorCores"] = cfg.executorCores;
  obj["blockSizeBytes"] = cfg.blockSizeBytes;
  obj["maxRetries"] = cfg.maxRetries;
  obj["reservedCores"] = cfg.reservedCores;
  obj["executorMemoryBytes"] = cfg.executorMemoryBytes;
  return obj.dump();
}

ExecutorConfig executor_from_json(std::string_view text) {
  json obj;
  try {
    obj = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::SchemaError, std::string("executor config is not valid JSON: ") + e.what());
  }
  ExecutorConfig cfg;
  cfg.numExecutors = read_count(obj, "numExecutors", false, cfg.numExecutors);
  cfg.executorCores = read_count(obj, "executorCores", false, cfg.executorCores);
  cfg.blockSizeBytes = read_count(obj, "blockSizeBytes", false, cfg.blockSizeBytes);
  cfg.maxRetries = read_count(obj, "maxRetries", false, cfg.maxRetries);
  cfg.reservedCores = read_count(obj, "reservedCores", false, cfg.reservedCores);
  cfg.executorMemoryBytes = read_count(obj, "executorMemoryBytes", false, cfg.executorMemoryBytes);
  cfg.validate();
  return cfg;
}

void init_logging(std::string_view fallbackLevel) {
  static std::once_flag once;
  std::call_once(once, [] {
    auto logger = spdlog::stderr_color_mt("pamforge");
    spdlog::set_default_logger(logger);
  });
  std::string level(fallbackLevel);
  if (const char* env = std::getenv("PAMFORGE_LOG"); env && *env) level = env;
  spdlog::set_level(spdlog::level::from_str(level));
}

}  // namespace pamforge

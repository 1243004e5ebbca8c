#include <cmath>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "pamforge/error.hpp"
#include "pamforge/feature_pipeline.hpp"

namespace pamforge {

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json number_array(const std::vector<double>& values, std::string_view field) {
  ordered_json arr = ordered_json::array();
  for (double v : values) {
    if (!std::isfinite(v)) throw Error(ErrorCode::SinkFailure, "non-finite value in \"" + std::string(field) + "\"");
    arr.push_back(v);
  }
  return arr;
}

std::vector<double> read_array(const ordered_json& obj, const char* field) {
  const auto it = obj.find(field);
  if (it == obj.end() || !it->is_array()) throw Error(ErrorCode::SchemaError, std::string("missing array ") + field);
  std::vector<double> out;
  out.reserve(it->size());
  for (const auto& v : *it) {
    if (!v.is_number()) throw Error(ErrorCode::SchemaError, std::string("non-numeric entry in ") + field);
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace

std::string serialize_record(const FeatureRecord& record) {
  if (!std::isfinite(record.spl)) throw Error(ErrorCode::SinkFailure, "non-finite spl");
  ordered_json obj;
  obj["timestamp"] = format_iso8601(record.timestamp);
  obj["file"] = record.fileId;
  obj["record"] = record.recordIndex;
  obj["spl"] = record.spl;
  obj["welch"] = number_array(record.welch, "welch");
  obj["tol"] = number_array(record.tol, "tol");
  obj["paramsHash"] = record.paramsHash;
  return obj.dump();
}

void serialize_records(std::span<const FeatureRecord> records, std::ostream& sink) {
  for (const auto& r : records) {
    sink << serialize_record(r) << '\n';
    if (!sink) throw Error(ErrorCode::SinkFailure, "write to feature sink failed");
  }
  sink.flush();
  if (!sink) throw Error(ErrorCode::SinkFailure, "flush of feature sink failed");
}

FeatureRecord parse_record(std::string_view line) {
  ordered_json obj;
  try {
    obj = ordered_json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::SchemaError, e.what());
  }
  if (!obj.is_object()) throw Error(ErrorCode::SchemaError, "feature line is not a JSON object");
  FeatureRecord rec;
  try {
    auto ts = parse_iso8601(obj.at("timestamp").get<std::string>());
    if (!ts) throw Error(ErrorCode::SchemaError, "bad timestamp");
    rec.timestamp = *ts;
    rec.fileId = obj.at("file").get<std::string>();
    rec.recordIndex = obj.at("record").get<std::uint64_t>();
    rec.spl = obj.at("spl").get<double>();
    rec.paramsHash = obj.at("paramsHash").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SchemaError, e.what());
  }
  rec.welch = read_array(obj, "welch");
  rec.tol = read_array(obj, "tol");
  return rec;
}

std::vector<FeatureRecord> parse_records(std::istream& in) {
  std::vector<FeatureRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(parse_record(line));
  }
  return out;
}

}  // namespace pamforge

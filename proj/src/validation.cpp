#include <algorithm>
#include <cmath>
#include <map>

#include "pamforge/error.hpp"
#include "pamforge/feature_pipeline.hpp"

namespace pamforge {

namespace {

struct Accumulator {
  double sumSq = 0.0;
  double refSq = 0.0;
  double maxAbs = 0.0;
  std::size_t n = 0;

  void add(double value, double reference) {
    const double d = value - reference;
    sumSq += d * d;
    refSq += reference * reference;
    maxAbs = std::max(maxAbs, std::abs(d));
    ++n;
  }

  FeatureError finish() const {
    FeatureError e;
    e.entries = n;
    if (n == 0) return e;
    e.rmse = std::sqrt(sumSq / static_cast<double>(n));
    const double refRms = std::sqrt(refSq / static_cast<double>(n));
    e.relativeRmse = refRms > 0.0 ? e.rmse / refRms : e.rmse;
    e.maxAbsError = maxAbs;
    return e;
  }
};

double to_domain(double db, CompareDomain domain) {
  return domain == CompareDomain::Linear ? std::pow(10.0, db / 10.0) : db;
}

void compare_vectors(const std::vector<double>& a, const std::vector<double>& b, CompareDomain domain,
                     Accumulator& acc, const char* what) {
  if (a.size() != b.size())
    throw Error(ErrorCode::ParamsMismatch, std::string(what) + " vectors differ in length");
  for (std::size_t i = 0; i < a.size(); ++i) acc.add(to_domain(a[i], domain), to_domain(b[i], domain));
}

}  // namespace

ValidationReport validate_against_oracle(std::span<const FeatureRecord> records,
                                         std::span<const FeatureRecord> oracleRecords,
                                         const ValidationOptions& options) {
  if (!options.allowMissing && records.size() != oracleRecords.size())
    throw Error(ErrorCode::RecordCountMismatch, std::to_string(records.size()) + " records vs " +
                                                    std::to_string(oracleRecords.size()) + " reference records");
  std::map<std::pair<std::string, std::uint64_t>, const FeatureRecord*> reference;
  for (const auto& r : oracleRecords) reference[{r.fileId, r.recordIndex}] = &r;

  Accumulator welch, tolAcc, splAcc;
  ValidationReport report;
  for (const auto& r : records) {
    const auto it = reference.find({r.fileId, r.recordIndex});
    if (it == reference.end()) {
      if (options.allowMissing) continue;
      throw Error(ErrorCode::RecordCountMismatch,
                  "no reference for " + r.fileId + " record " + std::to_string(r.recordIndex));
    }
    const FeatureRecord& o = *it->second;
    if (r.paramsHash != o.paramsHash)
      throw Error(ErrorCode::ParamsMismatch, "params fingerprint " + r.paramsHash + " vs " + o.paramsHash);
    compare_vectors(r.welch, o.welch, options.domain, welch, "welch");
    compare_vectors(r.tol, o.tol, options.domain, tolAcc, "tol");
    splAcc.add(to_domain(r.spl, options.domain), to_domain(o.spl, options.domain));
    ++report.recordCount;
  }

  report.welch = welch.finish();
  report.tol = tolAcc.finish();
  report.spl = splAcc.finish();
  report.maxAbsError = std::max({report.welch.maxAbsError, report.tol.maxAbsError, report.spl.maxAbsError});
  report.threshold = options.threshold;
  report.relative = options.relative;
  auto within = [&](const FeatureError& e) {
    return (options.relative ? e.relativeRmse : e.rmse) <= options.threshold;
  };
  report.pass = within(report.welch) && within(report.tol) && within(report.spl);
  return report;
}

}  // namespace pamforge

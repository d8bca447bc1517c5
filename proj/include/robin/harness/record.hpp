#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace robin::harness {

/// Verdict strings. Inequality checks use holds / equal / indeterminate /
/// fails; oracle checks pass / fail; data runs computed; skipped cases
/// absent; solver failures error.
namespace verdict {
inline constexpr const char* kHolds = "holds";
inline constexpr const char* kEqual = "equal";
inline constexpr const char* kIndeterminate = "indeterminate";
inline constexpr const char* kFails = "fails";
inline constexpr const char* kPass = "pass";
inline constexpr const char* kFail = "fail";
inline constexpr const char* kComputed = "computed";
inline constexpr const char* kAbsent = "absent";
inline constexpr const char* kError = "error";
}  // namespace verdict

/// Verdict for the claim lhs ≤ rhs with combined error bar `errbar`:
/// holds if rhs − lhs > errbar, equal if |rhs − lhs| ≤ errbar, fails only if
/// lhs − rhs > 10·errbar, indeterminate otherwise.
std::string compare(double lhs, double rhs, double errbar);

struct CaseResult {
  std::string case_id;
  std::string curve_id;
  std::optional<double> length;
  std::optional<double> width;  ///< ∞ for exterior problems
  double alpha = 0.0;
  std::optional<double> kappa_max;
  std::optional<double> lambda1;
  std::optional<double> lambda2;
  std::optional<double> lambda_disk1;
  std::optional<double> lambda_disk2;
  std::optional<double> ru;
  std::optional<double> rv;
  std::optional<double> bound;
  std::optional<double> errbar;
  std::string verdict;
  std::string note;
  nlohmann::json details = nlohmann::json::object();

  bool operator==(const CaseResult&) const = default;
};

struct RunRecord {
  int schema_version = 1;
  std::string kind;
  std::string software_version;
  std::string config_hash;
  nlohmann::json config;  ///< canonical config snapshot
  std::vector<CaseResult> cases;  ///< sorted by case_id
  nlohmann::json tables = nlohmann::json::object();
  /// Wall-clock seconds per case_id and in total. Not part of run.json.
  nlohmann::json timings = nlohmann::json::object();

  bool operator==(const RunRecord& o) const {
    return schema_version == o.schema_version && kind == o.kind && software_version == o.software_version &&
           config_hash == o.config_hash && config == o.config && cases == o.cases && tables == o.tables;
  }
};

nlohmann::json to_json(const CaseResult& c);
CaseResult case_from_json(const nlohmann::json& j);
/// Everything except timings.
nlohmann::json to_json(const RunRecord& r);
RunRecord record_from_json(const nlohmann::json& j);

inline constexpr const char* kCsvHeader =
    "case_id,L,d,alpha,kappa_max,lambda1,lambda2,lambda_disk1,lambda_disk2,Ru,Rv,bound,errbar,verdict";
void write_results_csv(std::ostream& out, const RunRecord& r);
/// λ against the swept parameter (α, or L for the corollary table), one
/// series per curve and width, with error bars.
void write_svg(std::ostream& out, const RunRecord& r);

/// Writes <root>/<kind>-<hash>/{results.csv, run.json, plot.svg, timing.json}
/// and returns the directory. Throws IoError with the failing path.
std::filesystem::path emit_outputs(const RunRecord& r, const std::filesystem::path& root);

/// 0 if every verdict is holds / equal / indeterminate / pass / computed /
/// absent; 2 if any case fails; 1 if any case errored (and none failed).
int exit_code(const RunRecord& r);

}  // namespace robin::harness

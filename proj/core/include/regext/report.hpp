#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace regext {

enum class Status { pass, fail, skipped };

std::string to_string(Status status);
Status status_from_string(const std::string& name);

struct CheckResult {
  std::string name;
  std::string paper_ref;
  Status status = Status::pass;
  double measured_constant = 0.0;  // non-finite values serialise as null
  std::size_t samples = 0;
  double tolerance = 0.0;
  std::string details = "{}";  // a JSON object

  bool operator==(const CheckResult& o) const = default;
};

using Report = std::vector<CheckResult>;

enum class ReportFormat { json, csv };

ReportFormat report_format_from_string(const std::string& name);

/// Deterministic serialisation: fixed key order, shortest round-trip numbers.
std::string emit_report(const Report& report, ReportFormat format);
Report parse_report(const std::string& json);
void write_report(const std::string& path, const Report& report, ReportFormat format);

/// 0 iff no check failed.
int exit_code(const Report& report);

}  // namespace regext

#include "regext/report.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "regext/grid.hpp"

namespace regext {

using nlohmann::ordered_json;

std::string to_string(Status status) {
  switch (status) {
    case Status::pass: return "pass";
    case Status::fail: return "fail";
    case Status::skipped: return "skipped";
  }
  return "?";
}

Status status_from_string(const std::string& name) {
  if (name == "pass") return Status::pass;
  if (name == "fail") return Status::fail;
  if (name == "skipped") return Status::skipped;
  throw Error("unknown status '" + name + "'");
}

ReportFormat report_format_from_string(const std::string& name) {
  if (name == "json") return ReportFormat::json;
  if (name == "csv") return ReportFormat::csv;
  throw Error("unknown report format '" + name + "'");
}

namespace {

ordered_json number(double x) { return std::isfinite(x) ? ordered_json(x) : ordered_json(nullptr); }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string emit_report(const Report& report, ReportFormat format) {
  if (format == ReportFormat::csv) {
    std::ostringstream os;
    os << "name,paper_ref,status,measured_constant,samples,tolerance,details\n";
    for (const auto& r : report)
      os << csv_field(r.name) << ',' << csv_field(r.paper_ref) << ',' << to_string(r.status) << ','
         << number(r.measured_constant).dump() << ',' << r.samples << ',' << number(r.tolerance).dump() << ','
         << csv_field(ordered_json::parse(r.details).dump()) << '\n';
    return os.str();
  }
  ordered_json arr = ordered_json::array();
  for (const auto& r : report) {
    ordered_json j;
    j["name"] = r.name;
    j["paper_ref"] = r.paper_ref;
    j["status"] = to_string(r.status);
    j["measured_constant"] = number(r.measured_constant);
    j["samples"] = r.samples;
    j["tolerance"] = number(r.tolerance);
    j["details"] = ordered_json::parse(r.details);
    arr.push_back(std::move(j));
  }
  return arr.empty() ? std::string("[]") : arr.dump(2);
}

Report parse_report(const std::string& text) {
  try {
    const ordered_json arr = ordered_json::parse(text);
    if (!arr.is_array()) throw Error("report must be a JSON array");
    Report out;
    for (const auto& j : arr) {
      CheckResult r;
      r.name = j.at("name").get<std::string>();
      r.paper_ref = j.at("paper_ref").get<std::string>();
      r.status = status_from_string(j.at("status").get<std::string>());
      r.measured_constant = j.at("measured_constant").is_null() ? kInf : j["measured_constant"].get<double>();
      r.samples = j.at("samples").get<std::size_t>();
      r.tolerance = j.at("tolerance").is_null() ? kInf : j["tolerance"].get<double>();
      r.details = j.at("details").dump();
      out.push_back(std::move(r));
    }
    return out;
  } catch (const ordered_json::exception& e) {
    throw Error(std::string("report: ") + e.what());
  }
}

void write_report(const std::string& path, const Report& report, ReportFormat format) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  os << emit_report(report, format);
  if (format == ReportFormat::json) os << '\n';
  if (!os) throw Error("failed writing '" + path + "'");
}

int exit_code(const Report& report) {
  for (const auto& r : report)
    if (r.status == Status::fail) return 1;
  return 0;
}

}  // namespace regext
